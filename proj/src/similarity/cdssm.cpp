#include "tableqa/similarity/cdssm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tableqa/random.hpp"

namespace tableqa::similarity {

namespace {

constexpr int kSchemaVersion = 1;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void require_plan(std::span<const ClickPair> batch, const NegativePlan &plan) {
  if (plan.size() != batch.size()) throw std::invalid_argument("negative plan does not match batch size");
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan[i].empty()) throw std::invalid_argument("every pair needs at least one negative");
    for (std::size_t j : plan[i]) {
      if (j >= batch.size() || j == i) throw std::invalid_argument("negative index out of range or self");
    }
  }
}

struct PairScores {
  std::vector<std::size_t> docs;  // positive first
  std::vector<double> cosines;
  std::vector<double> probs;
  double loss = 0.0;
};

PairScores score_pair(std::size_t i, const NegativePlan &plan, const std::vector<CdssmTrace> &queries,
                      const std::vector<CdssmTrace> &docs, double gamma) {
  PairScores s;
  s.docs.push_back(i);
  s.docs.insert(s.docs.end(), plan[i].begin(), plan[i].end());
  for (std::size_t d : s.docs) s.cosines.push_back(cosine(queries[i].output, docs[d].output));
  double peak = *std::max_element(s.cosines.begin(), s.cosines.end()) * gamma;
  double z = 0.0;
  for (double c : s.cosines) z += std::exp(gamma * c - peak);
  for (double c : s.cosines) s.probs.push_back(std::exp(gamma * c - peak) / z);
  s.loss = -gamma * s.cosines[0] + peak + std::log(z);
  return s;
}

// Accumulates scale * d cos(a, b) / d a into out.
void add_cosine_grad(std::span<const double> a, std::span<const double> b, double scale, std::vector<double> &out) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return;
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  const double cos = dot / (na * nb);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += scale * (b[k] / (na * nb) - cos * a[k] / (na * na));
}

void backprop(const CdssmTrace &trace, const std::vector<double> &d_output, const CdssmParams &params,
              CdssmGradient &grad) {
  const auto &shape = params.shape;
  const std::size_t in = shape.input_dim();
  std::vector<double> dz(shape.semantic_dim);
  for (std::size_t m = 0; m < shape.semantic_dim; ++m) {
    dz[m] = d_output[m] * (1.0 - trace.output[m] * trace.output[m]);
  }
  std::vector<double> dv(shape.conv_dim, 0.0);
  for (std::size_t m = 0; m < shape.semantic_dim; ++m) {
    if (dz[m] == 0.0) continue;
    for (std::size_t k = 0; k < shape.conv_dim; ++k) {
      grad.semantic[m * shape.conv_dim + k] += dz[m] * trace.pooled[k];
      dv[k] += params.semantic[m * shape.conv_dim + k] * dz[m];
    }
  }
  for (std::size_t k = 0; k < shape.conv_dim; ++k) {
    const std::size_t t = trace.argmax[k];
    const double h = trace.hidden[t][k];
    const double da = dv[k] * (1.0 - h * h);
    if (da == 0.0) continue;
    for (const auto &[idx, val] : trace.windows[t]) grad.conv[k * in + idx] += da * val;
  }
}

std::vector<CdssmTrace> traces(std::span<const ClickPair> batch, const CdssmParams &params, bool queries) {
  std::vector<CdssmTrace> out;
  out.reserve(batch.size());
  for (const auto &p : batch) out.push_back(cdssm_trace(queries ? p.query : p.doc, params));
  return out;
}

// max_i |a_i - n_i| / max(max_i |a_i|, max_i |n_i|), 0 when both are zero.
double relative_error(const std::vector<double> &analytic, const std::vector<double> &numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return scale == 0.0 ? 0.0 : diff / scale;
}

}  // namespace

CdssmParams CdssmParams::zeros(const CdssmShape &shape) {
  CdssmParams p;
  p.shape = shape;
  p.conv.assign(shape.conv_dim * shape.input_dim(), 0.0);
  p.semantic.assign(shape.semantic_dim * shape.conv_dim, 0.0);
  return p;
}

CdssmParams CdssmParams::random(const CdssmShape &shape, std::uint64_t seed) {
  CdssmParams p = zeros(shape);
  Rng rng(seed);
  const double r_conv = std::sqrt(6.0 / static_cast<double>(shape.input_dim() + shape.conv_dim));
  for (double &w : p.conv) w = rng.uniform(-r_conv, r_conv);
  const double r_sem = std::sqrt(6.0 / static_cast<double>(shape.conv_dim + shape.semantic_dim));
  for (double &w : p.semantic) w = rng.uniform(-r_sem, r_sem);
  return p;
}

void CdssmParams::validate() const {
  if (shape.trigram_dim == 0 || shape.window == 0 || shape.conv_dim == 0 || shape.semantic_dim == 0) {
    throw std::invalid_argument("C-DSSM dimensions must be positive");
  }
  if (conv.size() != shape.conv_dim * shape.input_dim() || semantic.size() != shape.semantic_dim * shape.conv_dim) {
    throw std::invalid_argument("C-DSSM weight sizes do not match the declared shape");
  }
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(conv.begin(), conv.end(), finite) || !std::all_of(semantic.begin(), semantic.end(), finite)) {
    throw std::invalid_argument("C-DSSM weights must be finite");
  }
}

SparseVector letter_trigrams(const std::string &word, std::size_t buckets) {
  const std::string wrapped = "#" + word + "#";
  std::map<std::size_t, double> counts;
  for (std::size_t i = 0; i + 3 <= wrapped.size(); ++i) {
    counts[fnv1a(std::string_view(wrapped).substr(i, 3)) % buckets] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

std::vector<SparseVector> window_vectors(const Tokens &tokens, const CdssmShape &shape) {
  if (tokens.empty()) return {SparseVector{}};
  std::vector<SparseVector> per_token;
  per_token.reserve(tokens.size());
  for (const auto &t : tokens) per_token.push_back(letter_trigrams(t, shape.trigram_dim));

  const auto n = static_cast<std::ptrdiff_t>(tokens.size());
  const auto lead = static_cast<std::ptrdiff_t>((shape.window - 1) / 2);
  std::vector<SparseVector> windows;
  windows.reserve(tokens.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    SparseVector l;
    for (std::size_t p = 0; p < shape.window; ++p) {
      const std::ptrdiff_t pos = i - lead + static_cast<std::ptrdiff_t>(p);
      if (pos < 0 || pos >= n) continue;
      for (const auto &[idx, count] : per_token[static_cast<std::size_t>(pos)]) {
        l.emplace_back(p * shape.trigram_dim + idx, count);
      }
    }
    windows.push_back(std::move(l));
  }
  return windows;
}

CdssmTrace cdssm_trace(const Tokens &tokens, const CdssmParams &params) {
  const auto &shape = params.shape;
  const std::size_t in = shape.input_dim();
  CdssmTrace tr;
  tr.windows = window_vectors(tokens, shape);
  tr.hidden.reserve(tr.windows.size());
  for (const auto &l : tr.windows) {
    std::vector<double> h(shape.conv_dim, 0.0);
    for (std::size_t k = 0; k < shape.conv_dim; ++k) {
      const double *row = params.conv.data() + k * in;
      double a = 0.0;
      for (const auto &[idx, val] : l) a += row[idx] * val;
      h[k] = std::tanh(a);
    }
    tr.hidden.push_back(std::move(h));
  }
  tr.pooled.assign(shape.conv_dim, 0.0);
  tr.argmax.assign(shape.conv_dim, 0);
  for (std::size_t k = 0; k < shape.conv_dim; ++k) {
    tr.pooled[k] = tr.hidden[0][k];
    for (std::size_t t = 1; t < tr.hidden.size(); ++t) {
      if (tr.hidden[t][k] > tr.pooled[k]) {
        tr.pooled[k] = tr.hidden[t][k];
        tr.argmax[k] = t;
      }
    }
  }
  tr.output.assign(shape.semantic_dim, 0.0);
  for (std::size_t m = 0; m < shape.semantic_dim; ++m) {
    double z = 0.0;
    for (std::size_t k = 0; k < shape.conv_dim; ++k) z += params.semantic[m * shape.conv_dim + k] * tr.pooled[k];
    tr.output[m] = std::tanh(z);
  }
  return tr;
}

std::vector<double> cdssm_forward(const Tokens &tokens, const CdssmParams &params) {
  return cdssm_trace(tokens, params).output;
}

double cosine(std::span<const double> a, std::span<const double> b, SimilarityDiagnostics *diag) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    if (diag) ++diag->zero_norm;
    return 0.0;
  }
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double cdssm_similarity(const Tokens &query, const Tokens &doc, const CdssmParams &params,
                        SimilarityDiagnostics *diag) {
  return cosine(cdssm_forward(query, params), cdssm_forward(doc, params), diag);
}

NegativePlan cyclic_negatives(std::size_t batch_size, std::size_t count) {
  if (count == 0 || count >= batch_size) {
    throw std::invalid_argument("negatives per pair must be in [1, batch size)");
  }
  NegativePlan plan(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    for (std::size_t j = 1; j <= count; ++j) plan[i].push_back((i + j) % batch_size);
  }
  return plan;
}

double cdssm_batch_loss(const CdssmParams &params, std::span<const ClickPair> batch, const NegativePlan &plan,
                        double gamma) {
  require_plan(batch, plan);
  auto q = traces(batch, params, true);
  auto d = traces(batch, params, false);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) loss += score_pair(i, plan, q, d, gamma).loss;
  return loss / static_cast<double>(batch.size());
}

CdssmGradient cdssm_batch_gradient(const CdssmParams &params, std::span<const ClickPair> batch,
                                   const NegativePlan &plan, double gamma) {
  require_plan(batch, plan);
  const auto &shape = params.shape;
  auto q = traces(batch, params, true);
  auto d = traces(batch, params, false);
  const double scale = 1.0 / static_cast<double>(batch.size());

  std::vector<std::vector<double>> dq(batch.size(), std::vector<double>(shape.semantic_dim, 0.0));
  std::vector<std::vector<double>> dd(batch.size(), std::vector<double>(shape.semantic_dim, 0.0));
  CdssmGradient grad;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    PairScores s = score_pair(i, plan, q, d, gamma);
    grad.loss += s.loss * scale;
    for (std::size_t c = 0; c < s.docs.size(); ++c) {
      const double g = gamma * (s.probs[c] - (c == 0 ? 1.0 : 0.0)) * scale;
      const std::size_t doc = s.docs[c];
      add_cosine_grad(q[i].output, d[doc].output, g, dq[i]);
      add_cosine_grad(d[doc].output, q[i].output, g, dd[doc]);
    }
  }
  grad.conv.assign(params.conv.size(), 0.0);
  grad.semantic.assign(params.semantic.size(), 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    backprop(q[i], dq[i], params, grad);
    backprop(d[i], dd[i], params, grad);
  }
  return grad;
}

double cdssm_grad_check(const CdssmParams &params, std::span<const ClickPair> batch, const NegativePlan &plan,
                        double gamma, const std::function<void(CdssmGradient &)> &mutate) {
  params.validate();
  constexpr double kStep = 1e-4;
  CdssmGradient analytic = cdssm_batch_gradient(params, batch, plan, gamma);
  if (mutate) mutate(analytic);

  CdssmParams probe = params;
  double worst = 0.0;
  auto check = [&](std::vector<double> &weights, const std::vector<double> &grads) {
    std::vector<double> numeric(weights.size());
    for (std::size_t e = 0; e < weights.size(); ++e) {
      const double saved = weights[e];
      weights[e] = saved + kStep;
      const double up = cdssm_batch_loss(probe, batch, plan, gamma);
      weights[e] = saved - kStep;
      const double down = cdssm_batch_loss(probe, batch, plan, gamma);
      weights[e] = saved;
      numeric[e] = (up - down) / (2.0 * kStep);
    }
    worst = std::max(worst, relative_error(grads, numeric));
  };
  check(probe.conv, analytic.conv);
  check(probe.semantic, analytic.semantic);
  return worst;
}

double cdssm_grad_check(const CdssmParams &params, std::span<const ClickPair> batch, std::size_t negatives,
                        double gamma) {
  return cdssm_grad_check(params, batch, cyclic_negatives(batch.size(), negatives), gamma);
}

CdssmParams cdssm_train(std::span<const ClickPair> pairs, const CdssmShape &shape, const CdssmTraining &training,
                        std::vector<double> *loss_history) {
  if (pairs.empty()) throw std::invalid_argument("C-DSSM training needs at least one click pair");
  if (training.negatives == 0) throw std::invalid_argument("C-DSSM training needs at least one negative");
  if (training.negatives >= training.batch_size) {
    throw std::invalid_argument("negatives per pair must be smaller than the batch size");
  }
  if (pairs.size() <= training.negatives) {
    throw std::invalid_argument("not enough click pairs to draw the requested negatives");
  }

  CdssmParams params = CdssmParams::random(shape, training.seed);
  params.training = training;
  params.validate();
  Rng rng(training.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<std::vector<ClickPair>> batches;
  for (std::size_t start = 0; start < order.size(); start += training.batch_size) {
    std::vector<ClickPair> batch;
    for (std::size_t i = start; i < std::min(order.size(), start + training.batch_size); ++i) {
      batch.push_back(pairs[order[i]]);
    }
    if (batch.size() <= training.negatives && !batches.empty()) {
      batches.back().insert(batches.back().end(), batch.begin(), batch.end());
    } else {
      batches.push_back(std::move(batch));
    }
  }

  std::vector<NegativePlan> plans;
  for (const auto &batch : batches) {
    NegativePlan plan(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < batch.size(); ++j) {
        if (j != i) others.push_back(j);
      }
      for (std::size_t j = 0; j < training.negatives; ++j) {
        std::swap(others[j], others[j + rng.index(others.size() - j)]);
        plan[i].push_back(others[j]);
      }
    }
    plans.push_back(std::move(plan));
  }

  auto training_loss = [&] {
    double total = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      total += cdssm_batch_loss(params, batches[b], plans[b], training.gamma) *
               static_cast<double>(batches[b].size());
    }
    return total / static_cast<double>(pairs.size());
  };

  if (loss_history) loss_history->assign(1, training_loss());
  std::vector<std::size_t> batch_order(batches.size());
  for (std::size_t b = 0; b < batch_order.size(); ++b) batch_order[b] = b;
  for (std::size_t epoch = 0; epoch < training.epochs; ++epoch) {
    rng.shuffle(batch_order);
    for (std::size_t b : batch_order) {
      CdssmGradient g = cdssm_batch_gradient(params, batches[b], plans[b], training.gamma);
      for (std::size_t e = 0; e < params.conv.size(); ++e) params.conv[e] -= training.learning_rate * g.conv[e];
      for (std::size_t e = 0; e < params.semantic.size(); ++e) {
        params.semantic[e] -= training.learning_rate * g.semantic[e];
      }
    }
    if (loss_history) loss_history->push_back(training_loss());
  }
  return params;
}

nlohmann::json to_json(const CdssmParams &params) {
  const auto &s = params.shape;
  const auto &t = params.training;
  return {{"schema_version", kSchemaVersion},
          {"kind", "cdssm"},
          {"shape",
           {{"trigram_dim", s.trigram_dim},
            {"window", s.window},
            {"conv_dim", s.conv_dim},
            {"semantic_dim", s.semantic_dim}}},
          {"training",
           {{"negatives", t.negatives},
            {"gamma", t.gamma},
            {"learning_rate", t.learning_rate},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"seed", t.seed}}},
          {"conv", params.conv},
          {"semantic", params.semantic}};
}

CdssmParams cdssm_from_json(const nlohmann::json &j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion || j.at("kind").get<std::string>() != "cdssm") {
    throw std::invalid_argument("unsupported C-DSSM model record");
  }
  CdssmParams p;
  const auto &s = j.at("shape");
  p.shape.trigram_dim = s.at("trigram_dim").get<std::size_t>();
  p.shape.window = s.at("window").get<std::size_t>();
  p.shape.conv_dim = s.at("conv_dim").get<std::size_t>();
  p.shape.semantic_dim = s.at("semantic_dim").get<std::size_t>();
  const auto &t = j.at("training");
  p.training.negatives = t.at("negatives").get<std::size_t>();
  p.training.gamma = t.at("gamma").get<double>();
  p.training.learning_rate = t.at("learning_rate").get<double>();
  p.training.epochs = t.at("epochs").get<std::size_t>();
  p.training.batch_size = t.at("batch_size").get<std::size_t>();
  p.training.seed = t.at("seed").get<std::uint64_t>();
  p.conv = j.at("conv").get<std::vector<double>>();
  p.semantic = j.at("semantic").get<std::vector<double>>();
  p.validate();
  return p;
}

}  // namespace tableqa::similarity
