#pragma once

#include <optional>
#include <span>

#include "tableqa/classifier.hpp"
#include "tableqa/extraction.hpp"
#include "tableqa/features.hpp"

namespace tableqa::selector {

struct Candidate {
  const extraction::ExtractedTable *table = nullptr;  // optional, not consulted for scoring
  features::FeatureVector features;
};

struct ScoredCandidate {
  features::TableKey key;
  double score = 0.0;
};

struct Selection {
  features::TableKey key;
  double score = 0.0;
  double margin = 0.0;  // best minus runner-up; the best score itself when alone
  std::size_t index = 0;  // position of the winner in the input list
};

using SelectionResult = std::optional<Selection>;

/// True when a outranks b: higher score, then lower doc rank, then lower table index.
bool outranks(const ScoredCandidate &a, const ScoredCandidate &b);

/// Argmax over pre-computed scores, returned only when strictly above theta.
SelectionResult select_scored(std::span<const ScoredCandidate> candidates, double theta);

SelectionResult select(std::span<const Candidate> candidates, const classifier::BoostedModel &model, double theta);

}  // namespace tableqa::selector
