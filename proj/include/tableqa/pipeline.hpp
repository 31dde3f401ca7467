#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tableqa/classifier.hpp"
#include "tableqa/eval.hpp"
#include "tableqa/extraction.hpp"
#include "tableqa/features.hpp"
#include "tableqa/snippet.hpp"

namespace tableqa::pipeline {

namespace fs = std::filesystem;

/// Validation or I/O failure with a machine-readable record.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string code, const std::string &message, std::string file = {}, std::size_t line = 0);

  const std::string &code() const { return code_; }
  const std::string &file() const { return file_; }
  std::size_t line() const { return line_; }
  nlohmann::json record() const;

 private:
  std::string code_;
  std::string file_;
  std::size_t line_;
};

struct DocumentRef {
  int rank = 1;
  std::string path;  // relative to the corpus root
  std::string url;
};

struct QueryEntry {
  std::string id;
  std::string text;
  std::vector<DocumentRef> docs;                  // rank order, at most k
  std::vector<extraction::ExtractedTable> tables;  // every candidate from those docs
};

struct ClickRecord {
  std::string query;
  std::string doc;
};

struct Corpus {
  fs::path root;
  std::vector<QueryEntry> queries;
  std::map<features::TableKey, int> labels;
  std::vector<ClickRecord> clicks;
  std::size_t k = 0;  // most documents consumed by any query

  const QueryEntry &query(const std::string &id) const;  // throws PipelineError
  std::optional<int> label(const features::TableKey &key) const;
};

struct IngestOptions {
  std::size_t max_docs = 0;  // 0 keeps every listed document
  bool load_labels = true;
};

/// Layout: queries.jsonl, docs/**, optional labels.jsonl and clicks.jsonl.
Corpus ingest_corpus(const fs::path &root, const IngestOptions &options = {});

struct DatasetFilter {
  bool enabled = true;
  std::size_t top_docs = 3;
  double min_fraction = 0.4;  // frac_cleaned a table must exceed
};

/// A query enters the dataset when one of its top documents holds a table
/// whose cleaned-byte fraction exceeds the filter's minimum.
bool passes_filter(const QueryEntry &q, const DatasetFilter &filter);

struct Config {
  features::FeatureConfig features;
  classifier::Hyper classifier;
  similarity::CdssmShape cdssm_shape;
  similarity::CdssmTraining cdssm_training;
  std::size_t tm_iterations = 10;
  double tm_beta = 0.8;
  similarity::Bm25Params bm25;
  double theta = 0.5;
  std::size_t snippet_m = 4;
  std::size_t snippet_n = 4;
  std::string synonyms_path;  // relative paths resolve against the config file
  std::size_t k = 5;
  DatasetFilter filter;
};

nlohmann::json to_json(const Config &cfg);
Config config_from_json(const nlohmann::json &j, const fs::path &base = {});
Config load_config(const fs::path &path);

struct ModelBundle {
  features::FeatureConfig features;
  features::SimilarityModels similarity;
  classifier::BoostedModel classifier;
};

nlohmann::json to_json(const ModelBundle &bundle);
ModelBundle bundle_from_json(const nlohmann::json &j);

nlohmann::json to_json(const extraction::ExtractedTable &t, const std::string &query_id);

/// Queries admitted by the dataset filter, in corpus order.
std::vector<const QueryEntry *> dataset_queries(const Corpus &corpus, const Config &cfg);

/// Click pairs for the learned similarity models: clicks.jsonl when present,
/// else labeled positive pairs, else each query against the tables of its
/// top-ranked document. Table side is the single-document mapping.
std::vector<similarity::ClickPair> similarity_pairs(const Corpus &corpus, const Config &cfg);

/// Similarity models and BM25 statistics for the configured features; the
/// classifier is left empty.
ModelBundle train_similarity(const Corpus &corpus, const Config &cfg);

std::vector<features::FeatureVector> query_features(const QueryEntry &q, const ModelBundle &bundle);

std::vector<classifier::LabeledPair> labeled_pairs(const Corpus &corpus, const Config &cfg, const ModelBundle &bundle);

ModelBundle train_bundle(const Corpus &corpus, const Config &cfg);

/// Full answer flow for one query over already extracted candidates.
nlohmann::json answer(const std::string &query_text, const std::vector<extraction::ExtractedTable> &tables,
                      const ModelBundle &bundle, const Config &cfg, const snippet::Synonyms &synonyms);

struct Evaluation {
  std::vector<eval::PrPoint> classifier_curve;
  std::vector<eval::PrPoint> selector_curve;
  nlohmann::json scores;  // array of scored pairs
};

Evaluation evaluate(const Corpus &corpus, const Config &cfg, const ModelBundle &bundle,
                    const std::vector<double> &thresholds = eval::default_thresholds());

struct Options {
  std::string corpus;
  std::string config;
  std::string model;
  std::string out;
  std::string query_id;
  std::string query;
  std::vector<std::string> docs;
};

/// Each command writes its artifacts under options.out (created if needed).
void run_extract(const Options &o);
void run_features(const Options &o);
void run_train(const Options &o);
void run_evaluate(const Options &o);
void run_answer(const Options &o);
void run_inspect(const Options &o);

std::string read_file(const fs::path &path);
void write_file(const fs::path &path, const std::string &content);

}  // namespace tableqa::pipeline
