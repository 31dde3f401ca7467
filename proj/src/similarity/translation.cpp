#include "tableqa/similarity/translation.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace tableqa::similarity {

namespace {

constexpr int kSchemaVersion = 1;

using Counts = std::unordered_map<std::string, std::unordered_map<std::string, double>>;

double pair_log_likelihood(const TranslationPair &pair, const Counts &table) {
  double ll = 0.0;
  const double inv_len = 1.0 / static_cast<double>(pair.doc.size());
  for (const auto &q : pair.query) {
    double p = 0.0;
    for (const auto &w : pair.doc) {
      auto row = table.find(w);
      if (row == table.end()) continue;
      auto cell = row->second.find(q);
      if (cell != row->second.end()) p += cell->second;
    }
    ll += std::log(p * inv_len);
  }
  return ll;
}

}  // namespace

TranslationTable::TranslationTable(std::map<std::string, Row> rows,
                                   std::map<std::string, std::size_t> background_counts, double beta)
    : rows_(std::move(rows)), background_counts_(std::move(background_counts)) {
  for (const auto &[word, count] : background_counts_) background_total_ += count;
  set_beta(beta);
}

void TranslationTable::set_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("translation smoothing weight must lie in [0, 1]");
  beta_ = beta;
}

double TranslationTable::probability(const std::string &query_word, const std::string &doc_word) const {
  auto row = rows_.find(doc_word);
  if (row == rows_.end()) return 0.0;
  auto cell = row->second.find(query_word);
  return cell == row->second.end() ? 0.0 : cell->second;
}

double TranslationTable::background(const std::string &word) const {
  auto it = background_counts_.find(word);
  const double count = it == background_counts_.end() ? 0.0 : static_cast<double>(it->second);
  return (count + 1.0) / static_cast<double>(background_total_ + background_counts_.size() + 1);
}

TranslationTable tm_train(std::span<const TranslationPair> pairs, std::size_t iterations, double beta,
                          std::vector<double> *log_likelihood) {
  if (pairs.empty()) throw std::invalid_argument("translation training needs at least one pair");
  if (iterations == 0) throw std::invalid_argument("translation training needs at least one iteration");
  if (log_likelihood) log_likelihood->clear();

  std::map<std::string, std::size_t> background;
  std::unordered_map<std::string, std::set<std::string>> support;
  for (const auto &pair : pairs) {
    for (const auto &t : pair.query) ++background[t];
    for (const auto &t : pair.doc) ++background[t];
    for (const auto &w : pair.doc) support[w].insert(pair.query.begin(), pair.query.end());
  }

  Counts table;
  for (const auto &[w, targets] : support) {
    if (targets.empty()) continue;
    const double uniform = 1.0 / static_cast<double>(targets.size());
    for (const auto &q : targets) table[w][q] = uniform;
  }

  auto usable = [](const TranslationPair &p) { return !p.doc.empty() && !p.query.empty(); };

  for (std::size_t iter = 0; iter < iterations; ++iter) {
    Counts expected;
    std::unordered_map<std::string, double> totals;
    double ll = 0.0;
    for (const auto &pair : pairs) {
      if (!usable(pair)) continue;
      ll += pair_log_likelihood(pair, table);
      for (const auto &q : pair.query) {
        double denom = 0.0;
        for (const auto &w : pair.doc) denom += table[w][q];
        for (const auto &w : pair.doc) {
          const double share = table[w][q] / denom;
          expected[w][q] += share;
          totals[w] += share;
        }
      }
    }
    if (log_likelihood) log_likelihood->push_back(ll);
    for (auto &[w, row] : expected) {
      const double total = totals[w];
      for (auto &[q, count] : row) count /= total;
    }
    table = std::move(expected);
  }
  if (log_likelihood) {
    double ll = 0.0;
    for (const auto &pair : pairs) {
      if (usable(pair)) ll += pair_log_likelihood(pair, table);
    }
    log_likelihood->push_back(ll);
  }

  std::map<std::string, TranslationTable::Row> rows;
  for (const auto &[w, row] : table) rows[w] = TranslationTable::Row(row.begin(), row.end());
  return TranslationTable(std::move(rows), std::move(background), beta);
}

double tm_score(const Tokens &query, const Tokens &doc, const TranslationTable &table) {
  std::map<std::string, double> mle;
  for (const auto &w : doc) mle[w] += 1.0;
  for (auto &[w, p] : mle) p /= static_cast<double>(doc.size());

  const double beta = table.beta();
  double score = 0.0;
  for (const auto &q : query) {
    double translated = 0.0;
    for (const auto &[w, p] : mle) translated += table.probability(q, w) * p;
    const double mixed = (1.0 - beta) * table.background(q) + beta * translated;
    score += std::log(std::max(mixed, std::numeric_limits<double>::min()));
  }
  return score;
}

nlohmann::json to_json(const TranslationTable &table) {
  return {{"schema_version", kSchemaVersion},
          {"kind", "translation"},
          {"beta", table.beta()},
          {"background_counts", table.background_counts()},
          {"rows", table.rows()}};
}

TranslationTable translation_from_json(const nlohmann::json &j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion || j.at("kind").get<std::string>() != "translation") {
    throw std::invalid_argument("unsupported translation model record");
  }
  return TranslationTable(j.at("rows").get<std::map<std::string, TranslationTable::Row>>(),
                          j.at("background_counts").get<std::map<std::string, std::size_t>>(),
                          j.at("beta").get<double>());
}

}  // namespace tableqa::similarity
