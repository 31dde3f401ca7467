#include "tableqa/eval.hpp"

#include <charconv>
#include <stdexcept>

namespace tableqa::eval {

PrPoint make_point(double threshold, std::size_t tp, std::size_t fp, std::size_t fn) {
  PrPoint p{threshold, tp, fp, fn};
  if (tp + fp == 0) {
    p.precision = 1.0;
    p.precision_undefined = true;
  } else {
    p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    p.recall = 0.0;
    p.recall_undefined = true;
  } else {
    p.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  return p;
}

std::vector<double> default_thresholds() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  return grid;
}

std::vector<PrPoint> classifier_pr(std::span<const ScoredPair> pairs, std::span<const double> thresholds) {
  std::vector<PrPoint> curve;
  for (double alpha : thresholds) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto &p : pairs) {
      if (p.label != 0 && p.label != 1) throw std::invalid_argument("labels must be 0 or 1");
      if (p.score >= alpha) {
        (p.label ? tp : fp) += 1;
      } else if (p.label) {
        ++fn;
      }
    }
    curve.push_back(make_point(alpha, tp, fp, fn));
  }
  return curve;
}

std::vector<PrPoint> selector_pr(std::span<const QueryOutcome> queries, std::span<const double> thresholds) {
  std::vector<PrPoint> curve;
  for (double theta : thresholds) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto &q : queries) {
      if (q.labels.size() != q.candidates.size()) throw std::invalid_argument("labels and candidates differ in count");
      bool any_positive = false;
      for (int l : q.labels) any_positive = any_positive || l == 1;
      const auto chosen = selector::select_scored(q.candidates, theta);
      if (chosen) {
        (q.labels[chosen->index] == 1 ? tp : fp) += 1;
      } else if (any_positive) {
        ++fn;
      }
    }
    curve.push_back(make_point(theta, tp, fp, fn));
  }
  return curve;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

std::string to_csv(std::span<const PrPoint> curve) {
  std::string out = "threshold,tp,fp,fn,precision,recall\n";
  for (const auto &p : curve) {
    out += format_number(p.threshold) + "," + std::to_string(p.tp) + "," + std::to_string(p.fp) + "," +
           std::to_string(p.fn) + "," + format_number(p.precision) + "," + format_number(p.recall) + "\n";
  }
  return out;
}

nlohmann::json to_json(std::span<const PrPoint> curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto &p : curve) {
    points.push_back({{"threshold", p.threshold},
                      {"tp", p.tp},
                      {"fp", p.fp},
                      {"fn", p.fn},
                      {"precision", p.precision},
                      {"recall", p.recall},
                      {"precision_undefined", p.precision_undefined},
                      {"recall_undefined", p.recall_undefined}});
  }
  return {{"schema_version", 1}, {"points", points}};
}

}  // namespace tableqa::eval
