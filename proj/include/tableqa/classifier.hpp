#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tableqa/features.hpp"

namespace tableqa::classifier {

struct LabeledPair {
  std::string query_text;
  features::FeatureVector features;  // key carries query id, doc rank, table index
  int label = 0;
};

struct Hyper {
  std::size_t n_trees = 200;
  std::size_t max_depth = 4;
  double learning_rate = 0.1;
  std::size_t min_leaf = 5;   // examples per leaf
  double subsample = 1.0;     // row fraction drawn per tree
  double max_step = 4.0;      // cap on a leaf's Newton step before shrinkage
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const Hyper &h);
Hyper hyper_from_json(const nlohmann::json &j);

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;  // index into BoostedModel::feature_names
  double threshold = 0.0;   // x < threshold goes left
  double value = 0.0;       // leaf output, already shrunk
  std::size_t left = 0;
  std::size_t right = 0;
};

/// Node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double evaluate(std::span<const double> x) const;
  std::size_t depth() const;
};

struct BoostedModel {
  std::string fingerprint;
  std::vector<std::string> feature_names;
  double learning_rate = 0.1;
  std::size_t max_depth = 4;
  std::vector<Tree> trees;

  double margin(const features::FeatureVector &fv) const;  // throws on config mismatch
};

/// Gradient boosting on the logistic loss with Newton leaf values. A tree
/// that would raise the training loss has its leaves halved until it does not.
/// `loss_history` receives the mean training loss before the first tree and
/// after each tree.
BoostedModel train(std::span<const LabeledPair> data, const Hyper &hyper, std::vector<double> *loss_history = nullptr);

double predict(const BoostedModel &model, const features::FeatureVector &fv);

double sigmoid(double margin);

nlohmann::json to_json(const BoostedModel &model);
BoostedModel model_from_json(const nlohmann::json &j);

}  // namespace tableqa::classifier
