#include "tableqa/extraction.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <set>

namespace tableqa::extraction {

namespace {

using html::DomTree;
using html::kNoNode;
using html::Node;
using html::NodeId;
using html::NodeKind;

constexpr std::size_t kMaxColspan = 1000;
constexpr std::size_t kPrecedingTextLimit = 500;  // code points

std::size_t span_attribute(const Node &cell, std::string_view name) {
  auto raw = cell.attribute(name);
  if (!raw) return 1;
  std::size_t value = 0;
  std::string_view digits = *raw;
  while (!digits.empty() && digits.front() == ' ') digits.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr == digits.data()) return 1;
  return value;
}

// Rows of `table` in source order, skipping rows that belong to nested tables.
void collect_rows(const DomTree &dom, NodeId id, TableLayout::Section section,
                  std::vector<std::pair<NodeId, TableLayout::Section>> &rows) {
  for (NodeId child : dom.node(id).children) {
    const Node &n = dom.node(child);
    if (!n.is_element() || n.tag == "table") continue;
    if (n.tag == "tr") {
      rows.emplace_back(child, section);
      continue;
    }
    auto next = section;
    if (n.tag == "thead") next = TableLayout::Section::Head;
    if (n.tag == "tfoot") next = TableLayout::Section::Foot;
    if (n.tag == "tbody") next = TableLayout::Section::Body;
    collect_rows(dom, child, next, rows);
  }
}

std::string truncate_code_points(const std::string &text, std::size_t limit) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    bool lead = (static_cast<unsigned char>(text[i]) & 0xC0) != 0x80;
    if (lead && count++ == limit) return text.substr(0, i);
  }
  return text;
}

bool is_heading_tag(std::string_view tag) {
  return tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6';
}

std::string preceding_text(const DomTree &dom, NodeId table) {
  NodeId cur = table;
  while (cur != kNoNode && dom.node(cur).kind != NodeKind::Root) {
    const Node &self = dom.node(cur);
    if (self.is("body")) break;
    NodeId parent = self.parent;
    const auto &siblings = dom.node(parent).children;
    auto it = std::find(siblings.begin(), siblings.end(), cur);
    while (it != siblings.begin()) {
      --it;
      const Node &sib = dom.node(*it);
      if (sib.kind == NodeKind::Text) {
        std::string text = html::normalize_whitespace(sib.text);
        if (!text.empty()) return truncate_code_points(text, kPrecedingTextLimit);
        continue;
      }
      if (!sib.is_element() || is_heading_tag(sib.tag) || sib.tag == "table" || sib.tag == "script" ||
          sib.tag == "style" || sib.tag == "title" || sib.tag == "head") {
        continue;
      }
      std::string text = html::visible_text(dom, *it);
      if (!text.empty()) return truncate_code_points(text, kPrecedingTextLimit);
    }
    cur = parent;
  }
  return {};
}

std::vector<std::string> section_headings(const DomTree &dom, NodeId table) {
  std::array<std::string, 3> chain;  // h2, h3, h4
  const std::size_t table_begin = dom.node(table).begin;
  for (NodeId id : dom.descendants()) {
    const Node &n = dom.node(id);
    if (!n.is_element()) continue;
    if (n.begin >= table_begin) break;
    if (n.tag == "h1") {
      chain = {};
    } else if (n.tag == "h2" || n.tag == "h3" || n.tag == "h4") {
      std::size_t level = static_cast<std::size_t>(n.tag[1] - '2');
      std::string text = html::visible_text(dom, id);
      if (text.empty()) continue;
      chain[level] = std::move(text);
      for (std::size_t deeper = level + 1; deeper < chain.size(); ++deeper) chain[deeper].clear();
    }
  }
  std::vector<std::string> out;
  for (auto &h : chain) {
    if (!h.empty()) out.push_back(std::move(h));
  }
  return out;
}

std::optional<std::size_t> header_row_index(const TableLayout &layout) {
  std::optional<std::size_t> last_head;
  for (std::size_t r = 0; r < layout.cells.size(); ++r) {
    if (layout.row_sections[r] == TableLayout::Section::Head) last_head = r;
  }
  if (last_head) return last_head;
  if (!layout.cells.empty() && layout.row_sections[0] == TableLayout::Section::Body && layout.row_all_header[0]) {
    return 0;
  }
  return std::nullopt;
}

bool is_data_row(const TableLayout &layout, std::size_t r, std::optional<std::size_t> header) {
  if (layout.row_sections[r] != TableLayout::Section::Body) return false;
  return !(header && *header == r);
}

// Sorted, merged [begin, end) spans of script/style elements and comments.
std::vector<std::pair<std::size_t, std::size_t>> removed_spans(const DomTree &dom) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (NodeId id = 1; id < dom.size(); ++id) {
    const Node &n = dom.node(id);
    if (n.kind == NodeKind::Comment || n.is("script") || n.is("style")) spans.emplace_back(n.begin, n.end);
  }
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (const auto &s : spans) {
    if (!merged.empty() && s.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, s.second);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

std::size_t cleaned_bytes(const std::vector<std::pair<std::size_t, std::size_t>> &removed, std::size_t begin,
                          std::size_t end) {
  if (end <= begin) return 0;
  std::size_t gone = 0;
  for (const auto &[b, e] : removed) {
    std::size_t lo = std::max(b, begin);
    std::size_t hi = std::min(e, end);
    if (hi > lo) gone += hi - lo;
  }
  return (end - begin) - gone;
}

double ratio(std::size_t num, std::size_t den) {
  if (den == 0) return 0.0;
  return std::clamp(static_cast<double>(num) / static_cast<double>(den), 0.0, 1.0);
}

std::string strip_numeric_decorations(std::string_view cell) {
  static const std::vector<std::string_view> kCurrency = {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5"};
  std::string s;
  for (std::size_t i = 0; i < cell.size();) {
    bool skipped = false;
    for (auto sym : kCurrency) {
      if (cell.substr(i, sym.size()) == sym) {
        i += sym.size();
        skipped = true;
        break;
      }
    }
    if (skipped) continue;
    char c = cell[i++];
    if (c == ',' || c == ' ') continue;
    s.push_back(c);
  }
  if (!s.empty() && s.back() == '%') s.pop_back();
  if (!s.empty() && s.front() == '+') s.erase(s.begin());
  return s;
}

}  // namespace

TableLayout build_layout(const DomTree &dom, NodeId table) {
  std::vector<std::pair<NodeId, TableLayout::Section>> rows;
  collect_rows(dom, table, TableLayout::Section::Body, rows);

  TableLayout layout;
  const std::size_t n_rows = rows.size();
  std::vector<std::vector<std::optional<std::string>>> slots(n_rows);
  layout.row_sections.reserve(n_rows);
  layout.row_all_header.assign(n_rows, false);

  for (std::size_t r = 0; r < n_rows; ++r) {
    layout.row_sections.push_back(rows[r].second);
    std::size_t col = 0;
    bool any_cell = false;
    bool all_header = true;
    for (NodeId cell_id : dom.node(rows[r].first).children) {
      const Node &cell = dom.node(cell_id);
      if (!cell.is("td") && !cell.is("th")) continue;
      any_cell = true;
      all_header = all_header && cell.is("th");
      std::size_t colspan = std::clamp<std::size_t>(span_attribute(cell, "colspan"), 1, kMaxColspan);
      std::size_t rowspan = span_attribute(cell, "rowspan");
      if (rowspan == 0 || rowspan > n_rows - r) rowspan = n_rows - r;
      while (col < slots[r].size() && slots[r][col]) ++col;
      std::string text = html::visible_text(dom, cell_id);
      for (std::size_t dr = 0; dr < rowspan; ++dr) {
        auto &target = slots[r + dr];
        if (target.size() < col + colspan) target.resize(col + colspan);
        for (std::size_t dc = 0; dc < colspan; ++dc) {
          if (!target[col + dc]) target[col + dc] = text;
        }
      }
      col += colspan;
    }
    layout.row_all_header[r] = any_cell && all_header;
  }

  std::size_t width = 0;
  for (const auto &row : slots) width = std::max(width, row.size());
  layout.cells.reserve(n_rows);
  for (auto &row : slots) {
    Row out(width);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c]) out[c] = std::move(*row[c]);
    }
    layout.cells.push_back(std::move(out));
  }
  return layout;
}

TableContext table_context(const DomTree &dom, NodeId table) {
  TableContext ctx;
  auto nested = dom.find_all("table", table);
  ctx.has_nested_table = nested.size() > 1;
  if (auto role = dom.node(table).attribute("role")) {
    ctx.presentation_role = *role == "presentation" || *role == "none";
  }
  return ctx;
}

bool is_relational(const Grid &grid, const TableContext &context) {
  const std::size_t rows = grid.size();
  const std::size_t cols = rows == 0 ? 0 : grid.front().size();
  if (rows < 2 || cols < 2) return false;
  if (context.has_nested_table || context.presentation_role) return false;

  std::size_t empty = 0;
  std::vector<std::size_t> lengths;
  lengths.reserve(rows * cols);
  for (const auto &row : grid) {
    for (const auto &cell : row) {
      if (cell.empty()) ++empty;
      lengths.push_back(cell.size());
    }
  }
  if (2 * empty > lengths.size()) return false;

  std::sort(lengths.begin(), lengths.end());
  const std::size_t mid = lengths.size() / 2;
  const double median = lengths.size() % 2 == 1 ? static_cast<double>(lengths[mid])
                                                : (lengths[mid - 1] + lengths[mid]) / 2.0;
  if (median > 100.0) return false;

  std::set<std::vector<std::string>> distinct_columns;
  for (std::size_t c = 0; c < cols; ++c) {
    if (is_empty_column(grid, c)) continue;
    std::vector<std::string> column;
    column.reserve(rows);
    for (const auto &row : grid) column.push_back(row[c]);
    distinct_columns.insert(std::move(column));
  }
  return distinct_columns.size() >= 2;
}

TableMetadata extract_metadata(const DomTree &dom, NodeId table, std::string_view url) {
  TableMetadata meta;
  meta.url = html::normalize_whitespace(url);
  if (NodeId title = dom.find_first("title"); title != kNoNode) meta.page_title = html::visible_text(dom, title);
  if (NodeId h1 = dom.find_first("h1"); h1 != kNoNode) meta.h1_heading = html::visible_text(dom, h1);
  meta.section_headings = section_headings(dom, table);
  meta.preceding_text = preceding_text(dom, table);
  for (NodeId child : dom.node(table).children) {
    if (dom.node(child).is("caption")) {
      meta.caption = html::visible_text(dom, child);
      break;
    }
  }

  TableLayout layout = build_layout(dom, table);
  if (auto header = header_row_index(layout)) {
    meta.header_row = layout.cells[*header];
    meta.column_names = layout.cells[*header];
  }
  for (std::size_t r = 0; r < layout.cells.size(); ++r) {
    if (layout.row_sections[r] == TableLayout::Section::Foot) {
      meta.footer_row = layout.cells[r];
      break;
    }
  }
  return meta;
}

bool is_numeric_cell(std::string_view cell) {
  std::string s = strip_numeric_decorations(cell);
  if (s.empty()) return false;
  bool digit = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != '-' && c != 'e' && c != 'E' && c != '+') {
      return false;
    }
  }
  if (!digit) return false;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_empty_column(const Grid &grid, std::size_t col) {
  return std::all_of(grid.begin(), grid.end(), [col](const Row &row) { return row[col].empty(); });
}

bool is_numeric_column(const Grid &grid, std::size_t col) {
  std::size_t non_empty = 0;
  std::size_t numeric = 0;
  for (const auto &row : grid) {
    if (row[col].empty()) continue;
    ++non_empty;
    if (is_numeric_cell(row[col])) ++numeric;
  }
  return non_empty > 0 && 5 * numeric >= 4 * non_empty;
}

double distinct_fraction(const Grid &grid, std::size_t col) {
  std::set<std::string_view> values;
  std::size_t non_empty = 0;
  for (const auto &row : grid) {
    if (row[col].empty()) continue;
    ++non_empty;
    values.insert(row[col]);
  }
  return non_empty == 0 ? 0.0 : static_cast<double>(values.size()) / static_cast<double>(non_empty);
}

std::optional<std::size_t> detect_subject_column(const Grid &grid) {
  const std::size_t cols = grid.empty() ? 0 : grid.front().size();
  std::optional<std::size_t> fallback;
  for (std::size_t c = 0; c < cols; ++c) {
    if (is_empty_column(grid, c) || is_numeric_column(grid, c)) continue;
    if (distinct_fraction(grid, c) >= 0.8) return c;
    if (!fallback) fallback = c;
  }
  return fallback;
}

DominanceCounts dominance_counts(const DomTree &dom, std::string_view source, NodeId table) {
  const Node &t = dom.node(table);
  const auto removed = removed_spans(dom);
  DominanceCounts counts;
  counts.total_raw = source.size();
  counts.table_raw = t.end - t.begin;
  counts.before_raw = t.begin;
  counts.total_cleaned = cleaned_bytes(removed, 0, source.size());
  counts.table_cleaned = cleaned_bytes(removed, t.begin, t.end);
  counts.before_cleaned = cleaned_bytes(removed, 0, t.begin);

  NodeId h1 = dom.find_first("h1");
  if (h1 == kNoNode) {
    counts.container_main = counts.total_cleaned;
    counts.before_main = counts.before_cleaned;
  } else {
    const Node &container = dom.node(dom.lowest_common_ancestor(h1, table));
    counts.container_main = cleaned_bytes(removed, container.inner_begin, container.inner_end);
    counts.before_main = cleaned_bytes(removed, container.inner_begin, t.begin);
  }
  return counts;
}

DominanceFeatures compute_dominance(const DomTree &dom, std::string_view source, NodeId table) {
  DominanceCounts c = dominance_counts(dom, source, table);
  DominanceFeatures f;
  f.frac_raw = ratio(c.table_raw, c.total_raw);
  f.frac_cleaned = ratio(c.table_cleaned, c.total_cleaned);
  f.frac_main = ratio(c.table_cleaned, c.container_main);
  f.pos_raw = ratio(c.before_raw, c.total_raw);
  f.pos_cleaned = ratio(c.before_cleaned, c.total_cleaned);
  f.pos_main = ratio(c.before_main, c.container_main);
  return f;
}

std::vector<ExtractedTable> extract_candidate_tables(const DomTree &dom, std::string_view source,
                                                     std::string_view url, int doc_rank) {
  std::vector<ExtractedTable> tables;
  int next_index = 1;
  for (NodeId id : dom.find_all("table")) {
    TableLayout layout = build_layout(dom, id);
    if (!is_relational(layout.cells, table_context(dom, id))) continue;

    auto header = header_row_index(layout);
    ExtractedTable t;
    for (std::size_t r = 0; r < layout.cells.size(); ++r) {
      if (is_data_row(layout, r, header)) t.grid.push_back(layout.cells[r]);
    }
    // The header row counts towards the relational test but an answer table
    // still needs two data rows.
    if (t.grid.size() < 2) continue;

    t.metadata = extract_metadata(dom, id, url);
    t.subject_col = detect_subject_column(t.grid);
    t.doc_rank = doc_rank;
    t.table_index = next_index++;
    t.dominance = compute_dominance(dom, source, id);
    t.dominance.table_index = t.table_index;
    tables.push_back(std::move(t));
  }
  return tables;
}

std::vector<ExtractedTable> extract_candidate_tables(std::string_view source, std::string_view url,
                                                     int doc_rank) {
  return extract_candidate_tables(html::parse_html(source), source, url, doc_rank);
}

}  // namespace tableqa::extraction
