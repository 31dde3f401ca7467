#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace tableqa::similarity {

using Tokens = std::vector<std::string>;

/// Word translation probabilities P(q | w) for a source (document) word w,
/// mixed with an add-one smoothed background unigram model when scoring.
class TranslationTable {
 public:
  using Row = std::map<std::string, double>;  // query word -> P(q | w)

  TranslationTable() = default;
  TranslationTable(std::map<std::string, Row> rows, std::map<std::string, std::size_t> background_counts,
                   double beta);

  double probability(const std::string &query_word, const std::string &doc_word) const;
  /// (count(q) + 1) / (total + vocabulary + 1); every word gets mass, seen or not.
  double background(const std::string &word) const;

  const std::map<std::string, Row> &rows() const { return rows_; }
  const std::map<std::string, std::size_t> &background_counts() const { return background_counts_; }
  std::size_t background_total() const { return background_total_; }
  double beta() const { return beta_; }
  void set_beta(double beta);

 private:
  std::map<std::string, Row> rows_;
  std::map<std::string, std::size_t> background_counts_;
  std::size_t background_total_ = 0;
  double beta_ = 0.8;
};

struct TranslationPair {
  Tokens query;
  Tokens doc;
};

/// IBM Model 1 EM over doc -> query alignments, uniform initialisation over
/// co-occurring words. `log_likelihood` receives the training log-likelihood
/// of the initial table and of the table after each iteration.
TranslationTable tm_train(std::span<const TranslationPair> pairs, std::size_t iterations, double beta = 0.8,
                          std::vector<double> *log_likelihood = nullptr);

/// sum_q log[(1 - beta) P_bg(q) + beta * sum_w P(q|w) P_mle(w | doc)].
double tm_score(const Tokens &query, const Tokens &doc, const TranslationTable &table);

nlohmann::json to_json(const TranslationTable &table);
TranslationTable translation_from_json(const nlohmann::json &j);

}  // namespace tableqa::similarity
