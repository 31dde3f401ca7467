#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace tableqa::similarity {

using Tokens = std::vector<std::string>;

struct CorpusStats {
  std::size_t doc_count = 0;
  std::size_t total_length = 0;
  std::map<std::string, std::size_t> document_frequency;

  double avgdl() const;
  std::size_t df(const std::string &term) const;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

CorpusStats corpus_stats(std::span<const Tokens> docs);

/// Okapi BM25 with idf = ln(1 + (N - df + 0.5) / (df + 0.5)). Summed over query
/// token occurrences, so repeated query terms count repeatedly.
double bm25(const Tokens &query, const Tokens &doc, const CorpusStats &stats, const Bm25Params &params = {});

nlohmann::json to_json(const CorpusStats &stats);
CorpusStats corpus_stats_from_json(const nlohmann::json &j);

}  // namespace tableqa::similarity
