#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tableqa/selector.hpp"

namespace tableqa::eval {

struct PrPoint {
  double threshold = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 1.0;
  double recall = 0.0;
  bool precision_undefined = false;  // tp + fp == 0, precision reported as 1
  bool recall_undefined = false;     // tp + fn == 0, recall reported as 0
};

PrPoint make_point(double threshold, std::size_t tp, std::size_t fp, std::size_t fn);

/// {0.00, 0.01, ..., 1.00}
std::vector<double> default_thresholds();

struct ScoredPair {
  double score = 0.0;
  int label = 0;
};

/// Per-pair counts: a pair is predicted positive when score >= alpha.
std::vector<PrPoint> classifier_pr(std::span<const ScoredPair> pairs, std::span<const double> thresholds);

struct QueryOutcome {
  std::vector<selector::ScoredCandidate> candidates;
  std::vector<int> labels;  // parallel to candidates
};

/// Per-query counts: the selector returns its argmax when strictly above theta.
std::vector<PrPoint> selector_pr(std::span<const QueryOutcome> queries, std::span<const double> thresholds);

std::string format_number(double v);
std::string to_csv(std::span<const PrPoint> curve);
nlohmann::json to_json(std::span<const PrPoint> curve);

}  // namespace tableqa::eval
