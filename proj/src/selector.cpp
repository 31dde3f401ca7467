#include "tableqa/selector.hpp"

#include <stdexcept>
#include <vector>

namespace tableqa::selector {

bool outranks(const ScoredCandidate &a, const ScoredCandidate &b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.key.doc_rank != b.key.doc_rank) return a.key.doc_rank < b.key.doc_rank;
  return a.key.table_index < b.key.table_index;
}

SelectionResult select_scored(std::span<const ScoredCandidate> candidates, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (candidates.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (outranks(candidates[i], candidates[best])) best = i;
  }
  if (!(candidates[best].score > theta)) return std::nullopt;
  double runner_up = 0.0;
  bool has_runner_up = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i == best) continue;
    if (!has_runner_up || candidates[i].score > runner_up) runner_up = candidates[i].score;
    has_runner_up = true;
  }
  const double score = candidates[best].score;
  return Selection{candidates[best].key, score, score - runner_up, best};
}

SelectionResult select(std::span<const Candidate> candidates, const classifier::BoostedModel &model, double theta) {
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (const auto &c : candidates) scored.push_back({c.features.key, classifier::predict(model, c.features)});
  return select_scored(scored, theta);
}

}  // namespace tableqa::selector
