#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace tableqa::similarity {

using Tokens = std::vector<std::string>;

struct CdssmShape {
  std::size_t trigram_dim = 5000;  // letter-trigram hash buckets per word
  std::size_t window = 3;          // words per convolution window
  std::size_t conv_dim = 64;
  std::size_t semantic_dim = 32;

  std::size_t input_dim() const { return window * trigram_dim; }
};

struct CdssmTraining {
  std::size_t negatives = 4;  // in-batch negatives per clicked pair
  double gamma = 10.0;        // softmax sharpness over cosines
  double learning_rate = 0.5;
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
};

/// Convolution weights (conv_dim x input_dim) and semantic projection
/// (semantic_dim x conv_dim), both row-major.
struct CdssmParams {
  CdssmShape shape;
  CdssmTraining training;
  std::vector<double> conv;
  std::vector<double> semantic;

  static CdssmParams zeros(const CdssmShape &shape);
  /// Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
  static CdssmParams random(const CdssmShape &shape, std::uint64_t seed);

  void validate() const;  // throws std::invalid_argument
  double &conv_at(std::size_t row, std::size_t col) { return conv[row * shape.input_dim() + col]; }
  double conv_at(std::size_t row, std::size_t col) const { return conv[row * shape.input_dim() + col]; }
};

using SparseVector = std::vector<std::pair<std::size_t, double>>;

/// Letter-trigram counts of "#word#", hashed into `buckets`.
SparseVector letter_trigrams(const std::string &word, std::size_t buckets);

/// One concatenated term vector per window position. Windows are centred on
/// each token with zero padding at the edges; an empty sequence yields a
/// single all-padding window.
std::vector<SparseVector> window_vectors(const Tokens &tokens, const CdssmShape &shape);

struct CdssmTrace {
  std::vector<SparseVector> windows;
  std::vector<std::vector<double>> hidden;  // tanh(W_c l_t) per window
  std::vector<double> pooled;
  std::vector<std::size_t> argmax;  // window chosen per pooled dimension
  std::vector<double> output;
};

CdssmTrace cdssm_trace(const Tokens &tokens, const CdssmParams &params);
std::vector<double> cdssm_forward(const Tokens &tokens, const CdssmParams &params);

struct SimilarityDiagnostics {
  std::size_t zero_norm = 0;
};

/// Cosine of the two semantic vectors; 0 (and a diagnostic tick) when either
/// vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b, SimilarityDiagnostics *diag = nullptr);
double cdssm_similarity(const Tokens &query, const Tokens &doc, const CdssmParams &params,
                        SimilarityDiagnostics *diag = nullptr);

struct ClickPair {
  Tokens query;
  Tokens doc;
};

/// negatives[i] lists batch positions whose documents act as negatives for pair i.
using NegativePlan = std::vector<std::vector<std::size_t>>;

/// Cyclic plan: pair i uses documents i+1 .. i+count (mod batch size).
NegativePlan cyclic_negatives(std::size_t batch_size, std::size_t count);

struct CdssmGradient {
  double loss = 0.0;
  std::vector<double> conv;
  std::vector<double> semantic;
};

/// Mean over the batch of -log softmax_gamma(cos(Q_i, D_i)) against the
/// planned negatives.
double cdssm_batch_loss(const CdssmParams &params, std::span<const ClickPair> batch, const NegativePlan &plan,
                        double gamma);
CdssmGradient cdssm_batch_gradient(const CdssmParams &params, std::span<const ClickPair> batch,
                                   const NegativePlan &plan, double gamma);

/// Max relative error between the analytic gradient and central differences
/// (step 1e-4) over both weight matrices. Per matrix the error is
/// max|a - n| / max(max|a|, max|n|). `mutate` may tamper with the analytic
/// gradient before comparison.
double cdssm_grad_check(const CdssmParams &params, std::span<const ClickPair> batch, const NegativePlan &plan,
                        double gamma, const std::function<void(CdssmGradient &)> &mutate = {});
double cdssm_grad_check(const CdssmParams &params, std::span<const ClickPair> batch, std::size_t negatives,
                        double gamma);

/// Mini-batch SGD from a seeded initialisation. Batches and their negative
/// plans are drawn once, so the objective is fixed across epochs.
/// `loss_history` receives the training loss before the first epoch and after
/// every epoch.
CdssmParams cdssm_train(std::span<const ClickPair> pairs, const CdssmShape &shape, const CdssmTraining &training,
                        std::vector<double> *loss_history = nullptr);

nlohmann::json to_json(const CdssmParams &params);
CdssmParams cdssm_from_json(const nlohmann::json &j);

}  // namespace tableqa::similarity
