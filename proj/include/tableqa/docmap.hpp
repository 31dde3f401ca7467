#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tableqa/extraction.hpp"

namespace tableqa::docmap {

using Tokens = std::vector<std::string>;

enum class Strategy { Single, MDocCDoc, MDocSDoc, MDocCDocSDoc };
enum class DocKind { Doc, MDoc, CDoc, SDoc };

std::string_view to_string(Strategy s);
std::string_view to_string(DocKind k);
Strategy strategy_from_string(std::string_view name);  // throws std::invalid_argument
DocKind doc_kind_from_string(std::string_view name);   // throws std::invalid_argument

/// Document kinds produced by a strategy, in output order.
std::vector<DocKind> kinds_for(Strategy s);

struct NamedDocument {
  DocKind kind;
  Tokens tokens;
};

struct DocumentSet {
  Strategy strategy;
  std::vector<NamedDocument> docs;

  const Tokens &get(DocKind kind) const;  // throws std::out_of_range
};

/// Lowercased ASCII-alphanumeric runs; bytes >= 0x80 are word characters,
/// except U+00A0 which separates.
Tokens tokenize(std::string_view text);

/// Host split on dots, path split on '/', '-', '_'; scheme, query string and
/// fragment dropped.
Tokens tokenize_url(std::string_view url);

Tokens metadata_tokens(const extraction::ExtractedTable &t);
Tokens cell_tokens(const extraction::ExtractedTable &t);
Tokens subject_tokens(const extraction::ExtractedTable &t);

DocumentSet build_documents(const extraction::ExtractedTable &t, Strategy strategy);

}  // namespace tableqa::docmap
