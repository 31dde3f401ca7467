#include "tableqa/pipeline.hpp"

namespace tableqa::pipeline {

namespace {

using nlohmann::json;

void reject_unknown(const json &j, std::initializer_list<const char *> known, const std::string &where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char *k : known) ok = ok || it.key() == k;
    if (!ok) throw PipelineError("config_error", "unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

nlohmann::json to_json(const Config &cfg) {
  const auto &s = cfg.cdssm_shape;
  const auto &t = cfg.cdssm_training;
  return {{"schema_version", 1},
          {"features", features::to_json(cfg.features)},
          {"classifier", classifier::to_json(cfg.classifier)},
          {"cdssm",
           {{"trigram_dim", s.trigram_dim},
            {"window", s.window},
            {"conv_dim", s.conv_dim},
            {"semantic_dim", s.semantic_dim},
            {"negatives", t.negatives},
            {"gamma", t.gamma},
            {"learning_rate", t.learning_rate},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"seed", t.seed}}},
          {"tm", {{"iterations", cfg.tm_iterations}, {"beta", cfg.tm_beta}}},
          {"bm25", {{"k1", cfg.bm25.k1}, {"b", cfg.bm25.b}}},
          {"theta", cfg.theta},
          {"snippet", {{"m", cfg.snippet_m}, {"n", cfg.snippet_n}, {"synonyms", cfg.synonyms_path}}},
          {"k", cfg.k},
          {"dataset_filter",
           {{"enabled", cfg.filter.enabled},
            {"top_docs", cfg.filter.top_docs},
            {"min_fraction", cfg.filter.min_fraction}}}};
}

Config config_from_json(const nlohmann::json &j, const fs::path &base) {
  Config cfg;
  try {
    if (!j.is_object()) throw PipelineError("config_error", "config must be a JSON object");
    reject_unknown(j, {"schema_version", "features", "classifier", "cdssm", "tm", "bm25", "theta", "snippet", "k",
                       "dataset_filter"},
                   "config");
    if (j.contains("features")) cfg.features = features::feature_config_from_json(j.at("features"));
    if (j.contains("classifier")) cfg.classifier = classifier::hyper_from_json(j.at("classifier"));
    if (j.contains("cdssm")) {
      const auto &c = j.at("cdssm");
      auto &s = cfg.cdssm_shape;
      auto &t = cfg.cdssm_training;
      s.trigram_dim = c.value("trigram_dim", s.trigram_dim);
      s.window = c.value("window", s.window);
      s.conv_dim = c.value("conv_dim", s.conv_dim);
      s.semantic_dim = c.value("semantic_dim", s.semantic_dim);
      t.negatives = c.value("negatives", t.negatives);
      t.gamma = c.value("gamma", t.gamma);
      t.learning_rate = c.value("learning_rate", t.learning_rate);
      t.epochs = c.value("epochs", t.epochs);
      t.batch_size = c.value("batch_size", t.batch_size);
      t.seed = c.value("seed", t.seed);
    }
    if (j.contains("tm")) {
      cfg.tm_iterations = j.at("tm").value("iterations", cfg.tm_iterations);
      cfg.tm_beta = j.at("tm").value("beta", cfg.tm_beta);
    }
    if (j.contains("bm25")) {
      cfg.bm25.k1 = j.at("bm25").value("k1", cfg.bm25.k1);
      cfg.bm25.b = j.at("bm25").value("b", cfg.bm25.b);
    }
    cfg.theta = j.value("theta", cfg.theta);
    if (j.contains("snippet")) {
      const auto &sn = j.at("snippet");
      cfg.snippet_m = sn.value("m", cfg.snippet_m);
      cfg.snippet_n = sn.value("n", cfg.snippet_n);
      std::string syn = sn.value("synonyms", std::string());
      if (!syn.empty() && fs::path(syn).is_relative() && !base.empty()) syn = (base / syn).string();
      cfg.synonyms_path = syn;
    }
    cfg.k = j.value("k", cfg.k);
    if (j.contains("dataset_filter")) {
      const auto &f = j.at("dataset_filter");
      cfg.filter.enabled = f.value("enabled", cfg.filter.enabled);
      cfg.filter.top_docs = f.value("top_docs", cfg.filter.top_docs);
      cfg.filter.min_fraction = f.value("min_fraction", cfg.filter.min_fraction);
    }
  } catch (const json::exception &e) {
    throw PipelineError("config_error", e.what());
  } catch (const std::invalid_argument &e) {
    throw PipelineError("config_error", e.what());
  }
  if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) throw PipelineError("config_error", "theta must lie in [0, 1]");
  if (cfg.snippet_m == 0 || cfg.snippet_n == 0) throw PipelineError("config_error", "snippet m and n must be >= 1");
  if (cfg.tm_beta < 0.0 || cfg.tm_beta > 1.0) throw PipelineError("config_error", "tm beta must lie in [0, 1]");
  return cfg;
}

Config load_config(const fs::path &path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw PipelineError("parse_error", e.what(), path.string());
  }
  return config_from_json(j, path.parent_path());
}

nlohmann::json to_json(const ModelBundle &bundle) {
  json stats = json::object();
  for (const auto &[kind, s] : bundle.similarity.bm25_stats) stats[std::string(docmap::to_string(kind))] = similarity::to_json(s);
  json j{{"schema_version", 1},
         {"kind", "tableqa_model"},
         {"features", features::to_json(bundle.features)},
         {"fingerprint", bundle.features.fingerprint()},
         {"bm25", {{"k1", bundle.similarity.bm25_params.k1}, {"b", bundle.similarity.bm25_params.b}, {"stats", stats}}},
         {"classifier", classifier::to_json(bundle.classifier)}};
  j["cdssm"] = bundle.similarity.cdssm ? similarity::to_json(*bundle.similarity.cdssm) : json(nullptr);
  j["translation"] = bundle.similarity.translation ? similarity::to_json(*bundle.similarity.translation) : json(nullptr);
  return j;
}

ModelBundle bundle_from_json(const nlohmann::json &j) {
  ModelBundle b;
  try {
    if (j.at("schema_version").get<int>() != 1 || j.at("kind").get<std::string>() != "tableqa_model") {
      throw PipelineError("model_error", "not a model bundle");
    }
    b.features = features::feature_config_from_json(j.at("features"));
    if (j.at("fingerprint").get<std::string>() != b.features.fingerprint()) {
      throw PipelineError("model_mismatch", "bundle fingerprint does not match its feature configuration");
    }
    b.similarity.bm25_params.k1 = j.at("bm25").at("k1").get<double>();
    b.similarity.bm25_params.b = j.at("bm25").at("b").get<double>();
    for (const auto &[name, s] : j.at("bm25").at("stats").items()) {
      b.similarity.bm25_stats[docmap::doc_kind_from_string(name)] = similarity::corpus_stats_from_json(s);
    }
    if (!j.at("cdssm").is_null()) b.similarity.cdssm = similarity::cdssm_from_json(j.at("cdssm"));
    if (!j.at("translation").is_null()) b.similarity.translation = similarity::translation_from_json(j.at("translation"));
    b.classifier = classifier::model_from_json(j.at("classifier"));
  } catch (const json::exception &e) {
    throw PipelineError("model_error", e.what());
  } catch (const std::invalid_argument &e) {
    throw PipelineError("model_error", e.what());
  }
  if (b.classifier.fingerprint != b.features.fingerprint()) {
    throw PipelineError("model_mismatch", "classifier was trained on a different feature configuration");
  }
  return b;
}

}  // namespace tableqa::pipeline
