#include "tableqa/similarity/bm25.hpp"

#include <cmath>
#include <set>
#include <unordered_map>

namespace tableqa::similarity {

double CorpusStats::avgdl() const {
  return doc_count == 0 ? 0.0 : static_cast<double>(total_length) / static_cast<double>(doc_count);
}

std::size_t CorpusStats::df(const std::string &term) const {
  auto it = document_frequency.find(term);
  return it == document_frequency.end() ? 0 : it->second;
}

CorpusStats corpus_stats(std::span<const Tokens> docs) {
  CorpusStats stats;
  stats.doc_count = docs.size();
  for (const auto &doc : docs) {
    stats.total_length += doc.size();
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto term : seen) ++stats.document_frequency[std::string(term)];
  }
  return stats;
}

double bm25(const Tokens &query, const Tokens &doc, const CorpusStats &stats, const Bm25Params &params) {
  if (query.empty() || doc.empty()) return 0.0;
  std::unordered_map<std::string_view, std::size_t> tf;
  for (const auto &t : doc) ++tf[t];

  const double n = static_cast<double>(stats.doc_count);
  const double avgdl = stats.avgdl();
  const double length_ratio = avgdl > 0.0 ? static_cast<double>(doc.size()) / avgdl : 1.0;
  const double norm = params.k1 * (1.0 - params.b + params.b * length_ratio);

  double score = 0.0;
  for (const auto &term : query) {
    auto it = tf.find(term);
    if (it == tf.end()) continue;
    const double df = static_cast<double>(stats.df(term));
    // Clamped so a document outside the stats corpus cannot yield a negative idf.
    const double idf = std::log(1.0 + std::max(0.0, n - df + 0.5) / (df + 0.5));
    const double f = static_cast<double>(it->second);
    score += idf * f * (params.k1 + 1.0) / (f + norm);
  }
  return score;
}

nlohmann::json to_json(const CorpusStats &stats) {
  return {{"doc_count", stats.doc_count},
          {"total_length", stats.total_length},
          {"document_frequency", stats.document_frequency}};
}

CorpusStats corpus_stats_from_json(const nlohmann::json &j) {
  CorpusStats stats;
  stats.doc_count = j.at("doc_count").get<std::size_t>();
  stats.total_length = j.at("total_length").get<std::size_t>();
  stats.document_frequency = j.at("document_frequency").get<std::map<std::string, std::size_t>>();
  return stats;
}

}  // namespace tableqa::similarity
