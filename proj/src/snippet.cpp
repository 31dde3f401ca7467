#include "tableqa/snippet.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace tableqa::snippet {

namespace {

using Set = std::set<std::string>;

void add_text(Set &out, std::string_view text) {
  for (const auto &tok : docmap::tokenize(text)) out.insert(match_form(tok));
}

void add_row(Set &out, const std::optional<extraction::Row> &row) {
  if (!row) return;
  for (const auto &c : *row) add_text(out, c);
}

Set metadata_forms(const extraction::TableMetadata &m, bool with_column_names) {
  Set out;
  for (const auto &tok : docmap::tokenize_url(m.url)) out.insert(match_form(tok));
  add_text(out, m.page_title);
  add_text(out, m.h1_heading);
  for (const auto &h : m.section_headings) add_text(out, h);
  add_text(out, m.preceding_text);
  add_text(out, m.caption);
  add_row(out, m.footer_row);
  if (with_column_names) {
    add_row(out, m.header_row);
    add_row(out, m.column_names);
  }
  return out;
}

struct Weighted {
  std::size_t exact = 0;
  std::size_t synonym = 0;
  std::size_t tokens = 0;

  double matched() const { return static_cast<double>(exact + synonym); }
  double desirability() const {
    return tokens == 0 ? 0.0 : (exact + kSynonymWeight * synonym) / static_cast<double>(tokens);
  }
};

/// Exclusive keyword matches of one text against the query.
Weighted count_matches(std::string_view text, const Set &query, const Synonyms &synonyms, const Set &metadata) {
  Weighted w;
  for (const auto &tok : docmap::tokenize(text)) {
    ++w.tokens;
    const std::string form = match_form(tok);
    if (query.count(form)) {
      if (!metadata.count(form)) ++w.exact;
      continue;
    }
    for (const auto &q : query) {
      auto it = synonyms.find(q);
      if (it != synonyms.end() && it->second.count(form) && !metadata.count(q) && !metadata.count(form)) {
        ++w.synonym;
        break;
      }
    }
  }
  return w;
}

void sort_matches(std::vector<Match> &list) {
  std::stable_sort(list.begin(), list.end(), [](const Match &a, const Match &b) {
    if (a.desirability != b.desirability) return a.desirability > b.desirability;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
}

bool contains(const std::vector<std::size_t> &v, std::size_t x) { return std::find(v.begin(), v.end(), x) != v.end(); }

const std::optional<extraction::Row> &names_of(const extraction::ExtractedTable &t) {
  return t.metadata.column_names ? t.metadata.column_names : t.metadata.header_row;
}

}  // namespace

std::string match_form(std::string_view token) {
  std::string s(token);
  if (s.size() > 4 && s.ends_with("ies")) return s.substr(0, s.size() - 3) + "y";
  if (s.size() > 3 && s.back() == 's' && !s.ends_with("ss") && !s.ends_with("us") && !s.ends_with("is")) {
    s.pop_back();
  }
  return s;
}

Synonyms parse_synonyms(std::string_view text) {
  Synonyms out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("synonyms line " + std::to_string(line_no) + ": expected 'word: synonyms'");
    }
    const auto key = docmap::tokenize(std::string_view(line).substr(0, colon));
    if (key.size() != 1) {
      throw std::invalid_argument("synonyms line " + std::to_string(line_no) + ": key must be a single word");
    }
    auto &syns = out[match_form(key.front())];
    for (const auto &tok : docmap::tokenize(std::string_view(line).substr(colon + 1))) syns.insert(match_form(tok));
  }
  return out;
}

MatchLists find_matches(const docmap::Tokens &query, const extraction::ExtractedTable &t, const Synonyms &synonyms) {
  MatchLists lists;
  Set q;
  for (const auto &tok : query) q.insert(match_form(tok));
  if (q.empty()) return lists;

  const Set all_metadata = metadata_forms(t.metadata, true);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) {
      const Weighted w = count_matches(t.grid[r][c], q, synonyms, all_metadata);
      if (w.tokens == 0 || w.matched() == 0 || w.matched() / w.tokens < kCoverage) continue;
      (t.subject_col && *t.subject_col == c ? lists.ec : lists.ac).push_back({r, c, w.desirability()});
    }
  }

  if (const auto &names = names_of(t)) {
    const Set outside_names = metadata_forms(t.metadata, false);
    for (std::size_t c = 0; c < names->size() && c < t.cols(); ++c) {
      const Weighted w = count_matches((*names)[c], q, synonyms, outside_names);
      if (w.matched() > 0) lists.cn.push_back({0, c, w.desirability()});
    }
  }
  sort_matches(lists.ec);
  sort_matches(lists.ac);
  sort_matches(lists.cn);
  return lists;
}

void union_bounded(std::vector<std::size_t> &set, std::size_t y, std::size_t cap) {
  if (set.size() < cap && !contains(set, y)) set.push_back(y);
}

bool fill_eligible(const extraction::Grid &grid, std::size_t col) {
  if (grid.empty()) return false;
  std::size_t empty = 0;
  for (const auto &row : grid) empty += row[col].empty() ? 1 : 0;
  const double empty_fraction = static_cast<double>(empty) / static_cast<double>(grid.size());
  return empty_fraction <= 0.5 && extraction::distinct_fraction(grid, col) >= 0.2;
}

Snippet generate(const extraction::ExtractedTable &t, const docmap::Tokens &query, std::size_t m, std::size_t n,
                 const Synonyms &synonyms) {
  if (m == 0 || n == 0) throw std::invalid_argument("snippet dimensions must be positive");
  Snippet s;
  const std::size_t row_cap = std::min(m, t.rows());
  const std::size_t col_cap = std::min(n, t.cols());

  MatchLists lists = find_matches(query, t, synonyms);
  std::size_t ec = 0, ac = 0, cn = 0;
  auto row_step = [&](TraceStep::Source src, std::size_t index) {
    const auto before = s.rows.size();
    union_bounded(s.rows, index, row_cap);
    s.trace.push_back({src, true, index, s.rows.size() != before});
  };
  auto col_step = [&](TraceStep::Source src, std::size_t index) {
    const auto before = s.cols.size();
    union_bounded(s.cols, index, col_cap);
    s.trace.push_back({src, false, index, s.cols.size() != before});
  };
  auto full = [&] { return s.rows.size() >= row_cap && s.cols.size() >= col_cap; };
  auto exhausted = [&] { return ec >= lists.ec.size() && ac >= lists.ac.size() && cn >= lists.cn.size(); };

  while (!full() && !exhausted()) {
    if (ec < lists.ec.size()) {
      const Match &a = lists.ec[ec++];
      row_step(TraceStep::Source::EC, a.row);
      col_step(TraceStep::Source::EC, a.col);
    }
    if (ac < lists.ac.size()) {
      const Match &b = lists.ac[ac++];
      row_step(TraceStep::Source::AC, b.row);
      col_step(TraceStep::Source::AC, b.col);
    }
    if (cn < lists.cn.size()) col_step(TraceStep::Source::CN, lists.cn[cn++].col);
  }

  if (t.subject_col && *t.subject_col < t.cols() && !contains(s.cols, *t.subject_col)) {
    if (s.cols.size() >= col_cap) s.cols.pop_back();
    s.cols.push_back(*t.subject_col);
  }
  for (std::size_t r = 0; r < t.rows() && s.rows.size() < row_cap; ++r) union_bounded(s.rows, r, row_cap);
  for (std::size_t c = 0; c < t.cols() && s.cols.size() < col_cap; ++c) {
    if (fill_eligible(t.grid, c)) union_bounded(s.cols, c, col_cap);
  }

  std::sort(s.rows.begin(), s.rows.end());
  std::sort(s.cols.begin(), s.cols.end());
  const auto &names = names_of(t);
  for (auto c : s.cols) s.column_names.push_back(names && c < names->size() ? (*names)[c] : "");
  for (auto r : s.rows) {
    std::vector<std::string> line;
    for (auto c : s.cols) line.push_back(t.grid[r][c]);
    s.cells.push_back(std::move(line));
  }
  s.title = t.metadata.page_title.empty() ? t.metadata.h1_heading : t.metadata.page_title;
  s.url = t.metadata.url;
  return s;
}

nlohmann::json to_json(const Snippet &s) {
  return {{"rows", s.cells},
          {"row_indices", s.rows},
          {"column_indices", s.cols},
          {"column_names", s.column_names},
          {"title", s.title},
          {"url", s.url}};
}

}  // namespace tableqa::snippet
