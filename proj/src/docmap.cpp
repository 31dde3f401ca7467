#include "tableqa/docmap.hpp"

#include <stdexcept>

namespace tableqa::docmap {

namespace {

void append(Tokens &out, Tokens more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

void append_text(Tokens &out, std::string_view text) { append(out, tokenize(text)); }

void append_row(Tokens &out, const std::optional<extraction::Row> &row) {
  if (!row) return;
  for (const auto &cell : *row) append_text(out, cell);
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Single: return "Single";
    case Strategy::MDocCDoc: return "MDocCDoc";
    case Strategy::MDocSDoc: return "MDocSDoc";
    case Strategy::MDocCDocSDoc: return "MDocCDocSDoc";
  }
  return "";
}

std::string_view to_string(DocKind k) {
  switch (k) {
    case DocKind::Doc: return "doc";
    case DocKind::MDoc: return "mdoc";
    case DocKind::CDoc: return "cdoc";
    case DocKind::SDoc: return "sdoc";
  }
  return "";
}

Strategy strategy_from_string(std::string_view name) {
  for (auto s : {Strategy::Single, Strategy::MDocCDoc, Strategy::MDocSDoc, Strategy::MDocCDocSDoc}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown mapping strategy: " + std::string(name));
}

DocKind doc_kind_from_string(std::string_view name) {
  for (auto k : {DocKind::Doc, DocKind::MDoc, DocKind::CDoc, DocKind::SDoc}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown document kind: " + std::string(name));
}

std::vector<DocKind> kinds_for(Strategy s) {
  switch (s) {
    case Strategy::Single: return {DocKind::Doc};
    case Strategy::MDocCDoc: return {DocKind::MDoc, DocKind::CDoc};
    case Strategy::MDocSDoc: return {DocKind::MDoc, DocKind::SDoc};
    case Strategy::MDocCDocSDoc: return {DocKind::MDoc, DocKind::CDoc, DocKind::SDoc};
  }
  return {};
}

const Tokens &DocumentSet::get(DocKind kind) const {
  for (const auto &d : docs) {
    if (d.kind == kind) return d.tokens;
  }
  throw std::out_of_range("document kind not in set: " + std::string(to_string(kind)));
}

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0) {
      flush();
      ++i;
    } else if (c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z')) {
      current.push_back(static_cast<char>(c));
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Tokens tokenize_url(std::string_view url) {
  if (auto scheme = url.find("://"); scheme != std::string_view::npos) url.remove_prefix(scheme + 3);
  if (auto cut = url.find_first_of("?#"); cut != std::string_view::npos) url = url.substr(0, cut);
  // Host pieces and path segments both reduce to alphanumeric runs, which
  // already splits on '.', '/', '-' and '_'.
  return tokenize(url);
}

Tokens metadata_tokens(const extraction::ExtractedTable &t) {
  const auto &m = t.metadata;
  Tokens out = tokenize_url(m.url);
  append_text(out, m.page_title);
  append_text(out, m.h1_heading);
  for (const auto &h : m.section_headings) append_text(out, h);
  append_text(out, m.caption);
  append_row(out, m.header_row);
  append_row(out, m.footer_row);
  append_row(out, m.column_names);
  return out;
}

Tokens cell_tokens(const extraction::ExtractedTable &t) {
  const std::size_t cols = t.cols();
  std::vector<bool> skip(cols);
  for (std::size_t c = 0; c < cols; ++c) skip[c] = extraction::is_numeric_column(t.grid, c);
  Tokens out;
  for (const auto &row : t.grid) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!skip[c]) append_text(out, row[c]);
    }
  }
  return out;
}

Tokens subject_tokens(const extraction::ExtractedTable &t) {
  Tokens out;
  if (!t.subject_col) return out;
  const std::size_t col = *t.subject_col;
  if (t.metadata.column_names && col < t.metadata.column_names->size()) {
    append_text(out, (*t.metadata.column_names)[col]);
  }
  for (const auto &row : t.grid) append_text(out, row[col]);
  return out;
}

DocumentSet build_documents(const extraction::ExtractedTable &t, Strategy strategy) {
  DocumentSet set{strategy, {}};
  for (DocKind kind : kinds_for(strategy)) {
    Tokens tokens;
    switch (kind) {
      case DocKind::Doc:
        tokens = metadata_tokens(t);
        append(tokens, cell_tokens(t));
        break;
      case DocKind::MDoc: tokens = metadata_tokens(t); break;
      case DocKind::CDoc: tokens = cell_tokens(t); break;
      case DocKind::SDoc: tokens = subject_tokens(t); break;
    }
    set.docs.push_back({kind, std::move(tokens)});
  }
  return set;
}

}  // namespace tableqa::docmap
