#include "tableqa/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tableqa/random.hpp"

namespace tableqa::classifier {

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kMinGain = 1e-12;
constexpr int kMaxHalvings = 30;

double log_loss(double margin, int label) {
  // log(1 + exp(-s)) with s = +margin for positives, -margin for negatives.
  const double s = label ? margin : -margin;
  return s > 0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
}

double mean_loss(std::span<const double> margins, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) total += log_loss(margins[i], labels[i]);
  return total / static_cast<double>(margins.size());
}

struct Builder {
  const std::vector<std::vector<double>> &x;
  const std::vector<double> &grad;
  const std::vector<double> &hess;
  const Hyper &hyper;
  std::size_t n_features;
  Tree tree;

  double leaf_value(std::span<const std::size_t> rows) const {
    double g = 0.0, h = 0.0;
    for (auto r : rows) {
      g += grad[r];
      h += hess[r];
    }
    if (h <= 0.0) return 0.0;
    return hyper.learning_rate * std::clamp(-g / h, -hyper.max_step, hyper.max_step);
  }

  std::size_t build(std::vector<std::size_t> rows, std::size_t depth) {
    const std::size_t id = tree.nodes.size();
    tree.nodes.push_back({});

    double g_total = 0.0, h_total = 0.0;
    for (auto r : rows) {
      g_total += grad[r];
      h_total += hess[r];
    }

    double best_gain = kMinGain;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;
    if (depth < hyper.max_depth && rows.size() >= 2 * std::max<std::size_t>(hyper.min_leaf, 1) && h_total > 0.0) {
      const double parent = g_total * g_total / h_total;
      std::vector<std::size_t> order = rows;
      for (std::size_t f = 0; f < n_features; ++f) {
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a][f] < x[b][f]; });
        double g_left = 0.0, h_left = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          g_left += grad[order[i]];
          h_left += hess[order[i]];
          const double here = x[order[i]][f], next = x[order[i + 1]][f];
          if (here == next) continue;
          const std::size_t n_left = i + 1, n_right = order.size() - n_left;
          if (n_left < hyper.min_leaf || n_right < hyper.min_leaf) continue;
          const double h_right = h_total - h_left, g_right = g_total - g_left;
          if (h_left <= 0.0 || h_right <= 0.0) continue;
          const double gain = g_left * g_left / h_left + g_right * g_right / h_right - parent;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = f;
            best_threshold = here + (next - here) / 2.0;
            found = true;
          }
        }
      }
    }

    if (!found) {
      tree.nodes[id].value = leaf_value(rows);
      return id;
    }
    std::vector<std::size_t> left, right;
    for (auto r : rows) (x[r][best_feature] < best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const std::size_t l = build(std::move(left), depth + 1);
    const std::size_t r = build(std::move(right), depth + 1);
    auto &node = tree.nodes[id];
    node.leaf = false;
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

void check_features(const BoostedModel &model, const features::FeatureVector &fv) {
  if (fv.fingerprint != model.fingerprint || fv.values.size() != model.feature_names.size()) {
    throw std::invalid_argument("feature vector does not match the model's feature configuration");
  }
}

nlohmann::json node_to_json(const Tree &tree, std::size_t id, const std::vector<std::string> &names) {
  const auto &n = tree.nodes[id];
  if (n.leaf) return {{"leaf", n.value}};
  return {{"feature", names[n.feature]},
          {"threshold", n.threshold},
          {"left", node_to_json(tree, n.left, names)},
          {"right", node_to_json(tree, n.right, names)}};
}

std::size_t node_from_json(Tree &tree, const nlohmann::json &j, const std::vector<std::string> &names) {
  const std::size_t id = tree.nodes.size();
  tree.nodes.push_back({});
  if (j.contains("leaf")) {
    tree.nodes[id].value = j.at("leaf").get<double>();
    return id;
  }
  const auto name = j.at("feature").get<std::string>();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::invalid_argument("split references unknown feature " + name);
  const std::size_t l = node_from_json(tree, j.at("left"), names);
  const std::size_t r = node_from_json(tree, j.at("right"), names);
  auto &node = tree.nodes[id];
  node.leaf = false;
  node.feature = static_cast<std::size_t>(it - names.begin());
  node.threshold = j.at("threshold").get<double>();
  node.left = l;
  node.right = r;
  return id;
}

}  // namespace

nlohmann::json to_json(const Hyper &h) {
  return {{"n_trees", h.n_trees},       {"max_depth", h.max_depth}, {"learning_rate", h.learning_rate},
          {"min_leaf", h.min_leaf},     {"subsample", h.subsample}, {"max_step", h.max_step},
          {"seed", h.seed}};
}

Hyper hyper_from_json(const nlohmann::json &j) {
  Hyper h;
  h.n_trees = j.value("n_trees", h.n_trees);
  h.max_depth = j.value("max_depth", h.max_depth);
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.min_leaf = j.value("min_leaf", h.min_leaf);
  h.subsample = j.value("subsample", h.subsample);
  h.max_step = j.value("max_step", h.max_step);
  h.seed = j.value("seed", h.seed);
  if (h.learning_rate <= 0.0 || h.subsample <= 0.0 || h.subsample > 1.0 || h.max_step <= 0.0) {
    throw std::invalid_argument("invalid classifier hyperparameters");
  }
  return h;
}

double Tree::evaluate(std::span<const double> x) const {
  std::size_t id = 0;
  while (!nodes[id].leaf) id = x[nodes[id].feature] < nodes[id].threshold ? nodes[id].left : nodes[id].right;
  return nodes[id].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].leaf) d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
  }
  return deepest;
}

double BoostedModel::margin(const features::FeatureVector &fv) const {
  check_features(*this, fv);
  double total = 0.0;
  for (const auto &t : trees) total += t.evaluate(fv.values);
  return total;
}

double sigmoid(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

double predict(const BoostedModel &model, const features::FeatureVector &fv) { return sigmoid(model.margin(fv)); }

BoostedModel train(std::span<const LabeledPair> data, const Hyper &hyper, std::vector<double> *loss_history) {
  if (data.size() < 2) throw std::invalid_argument("training needs at least two examples");
  const auto &first = data.front().features;
  std::vector<std::vector<double>> x;
  std::vector<int> labels;
  bool has_pos = false, has_neg = false;
  for (const auto &p : data) {
    if (p.features.fingerprint != first.fingerprint || p.features.names != first.names) {
      throw std::invalid_argument("training examples use different feature configurations");
    }
    if (p.label != 0 && p.label != 1) throw std::invalid_argument("labels must be 0 or 1");
    for (double v : p.features.values) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
    }
    (p.label ? has_pos : has_neg) = true;
    x.push_back(p.features.values);
    labels.push_back(p.label);
  }
  if (!has_pos || !has_neg) throw std::invalid_argument("training data must contain both labels");

  BoostedModel model;
  model.fingerprint = first.fingerprint;
  model.feature_names = first.names;
  model.learning_rate = hyper.learning_rate;
  model.max_depth = hyper.max_depth;

  const std::size_t n = x.size();
  std::vector<double> margins(n, 0.0), grad(n), hess(n), trial(n);
  double loss = mean_loss(margins, labels);
  if (loss_history) loss_history->assign(1, loss);

  Rng rng(hyper.seed);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (std::size_t t = 0; t < hyper.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margins[i]);
      grad[i] = p - labels[i];
      hess[i] = p * (1.0 - p);
    }
    std::vector<std::size_t> rows = all;
    if (hyper.subsample < 1.0) {
      rng.shuffle(rows);
      rows.resize(std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(hyper.subsample * n))));
      std::sort(rows.begin(), rows.end());
    }
    Builder builder{x, grad, hess, hyper, model.feature_names.size(), {}};
    builder.build(std::move(rows), 0);
    Tree tree = std::move(builder.tree);

    double next = loss;
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = margins[i] + tree.evaluate(x[i]);
      next = mean_loss(trial, labels);
      if (next <= loss) break;
      for (auto &node : tree.nodes) node.value = attempt == kMaxHalvings - 1 ? 0.0 : node.value / 2.0;
    }
    if (next > loss) {
      for (auto &node : tree.nodes) node.value = 0.0;
      next = loss;
    } else {
      margins = trial;
    }
    loss = next;
    model.trees.push_back(std::move(tree));
    if (loss_history) loss_history->push_back(loss);
  }
  return model;
}

nlohmann::json to_json(const BoostedModel &model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto &t : model.trees) trees.push_back(node_to_json(t, 0, model.feature_names));
  return {{"schema_version", kSchemaVersion},
          {"kind", "boosted_trees"},
          {"fingerprint", model.fingerprint},
          {"feature_names", model.feature_names},
          {"learning_rate", model.learning_rate},
          {"max_depth", model.max_depth},
          {"trees", trees}};
}

BoostedModel model_from_json(const nlohmann::json &j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion || j.at("kind").get<std::string>() != "boosted_trees") {
    throw std::invalid_argument("not a boosted tree model");
  }
  BoostedModel model;
  model.fingerprint = j.at("fingerprint").get<std::string>();
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  model.learning_rate = j.at("learning_rate").get<double>();
  model.max_depth = j.at("max_depth").get<std::size_t>();
  for (const auto &tj : j.at("trees")) {
    Tree t;
    node_from_json(t, tj, model.feature_names);
    if (t.depth() > model.max_depth) throw std::invalid_argument("tree deeper than the model's depth limit");
    model.trees.push_back(std::move(t));
  }
  return model;
}

}  // namespace tableqa::classifier
