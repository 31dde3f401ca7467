#include "tableqa/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tableqa/quality.hpp"

namespace tableqa::features {

namespace {

constexpr int kSchemaVersion = 1;

const std::vector<std::string> kFractionNames{"frac_raw", "frac_cleaned", "frac_main"};
const std::vector<std::string> kPositionNames{"pos_raw", "pos_cleaned", "pos_main", "table_index"};
const std::vector<std::string> kQualityNames{
    "q_n_rows",           "q_n_cols",
    "q_empty_cell_fraction", "q_has_column_names",
    "q_has_numeric_column", "q_numeric_column_count",
    "q_subject_distinct_fraction", "q_type_consistency_mean",
    "q_type_consistency_min",
};

SimilarityModel similarity_from_string(std::string_view s) {
  for (auto m : {SimilarityModel::Bm25, SimilarityModel::Translation, SimilarityModel::Cdssm}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown similarity model: " + std::string(s));
}

FeatureGroup group_from_string(std::string_view s) {
  for (auto g : {FeatureGroup::Fraction, FeatureGroup::Position, FeatureGroup::Quality}) {
    if (to_string(g) == s) return g;
  }
  throw std::invalid_argument("unknown feature group: " + std::string(s));
}

}  // namespace

std::string_view to_string(SimilarityModel m) {
  switch (m) {
    case SimilarityModel::Bm25: return "bm25";
    case SimilarityModel::Translation: return "tm";
    case SimilarityModel::Cdssm: return "cdssm";
  }
  return "";
}

std::string_view to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Fraction: return "fraction";
    case FeatureGroup::Position: return "position";
    case FeatureGroup::Quality: return "quality";
  }
  return "";
}

bool FeatureConfig::uses(SimilarityModel m) const {
  return std::find(similarities.begin(), similarities.end(), m) != similarities.end();
}

bool FeatureConfig::uses(FeatureGroup g) const { return std::find(groups.begin(), groups.end(), g) != groups.end(); }

void FeatureConfig::validate() const {
  if (similarities.empty() && groups.empty()) {
    throw std::invalid_argument("feature config enables neither a similarity model nor a table-feature group");
  }
}

std::vector<std::string> FeatureConfig::feature_names() const {
  std::vector<std::string> names;
  // Canonical order regardless of how the lists were written.
  for (auto m : {SimilarityModel::Bm25, SimilarityModel::Translation, SimilarityModel::Cdssm}) {
    if (!uses(m)) continue;
    for (auto kind : docmap::kinds_for(strategy)) {
      names.push_back(std::string(to_string(m)) + "_" + std::string(docmap::to_string(kind)));
    }
  }
  if (uses(FeatureGroup::Fraction)) names.insert(names.end(), kFractionNames.begin(), kFractionNames.end());
  if (uses(FeatureGroup::Position)) names.insert(names.end(), kPositionNames.begin(), kPositionNames.end());
  if (uses(FeatureGroup::Quality)) names.insert(names.end(), kQualityNames.begin(), kQualityNames.end());
  return names;
}

std::string FeatureConfig::fingerprint() const {
  std::string fp = "v1:" + std::string(docmap::to_string(strategy)) + ":";
  auto names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) fp += (i ? "," : "") + names[i];
  return fp;
}

nlohmann::json to_json(const FeatureConfig &cfg) {
  nlohmann::json sims = nlohmann::json::array();
  for (auto m : {SimilarityModel::Bm25, SimilarityModel::Translation, SimilarityModel::Cdssm}) {
    if (cfg.uses(m)) sims.push_back(to_string(m));
  }
  nlohmann::json groups = nlohmann::json::array();
  for (auto g : {FeatureGroup::Fraction, FeatureGroup::Position, FeatureGroup::Quality}) {
    if (cfg.uses(g)) groups.push_back(to_string(g));
  }
  return {{"strategy", docmap::to_string(cfg.strategy)}, {"similarities", sims}, {"groups", groups}};
}

FeatureConfig feature_config_from_json(const nlohmann::json &j) {
  FeatureConfig cfg;
  if (j.contains("strategy")) cfg.strategy = docmap::strategy_from_string(j.at("strategy").get<std::string>());
  if (j.contains("similarities")) {
    cfg.similarities.clear();
    for (const auto &s : j.at("similarities")) cfg.similarities.push_back(similarity_from_string(s.get<std::string>()));
  }
  if (j.contains("groups")) {
    cfg.groups.clear();
    for (const auto &g : j.at("groups")) cfg.groups.push_back(group_from_string(g.get<std::string>()));
  }
  cfg.validate();
  return cfg;
}

double FeatureVector::at(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::out_of_range("no feature named " + std::string(name));
}

nlohmann::json to_json(const FeatureVector &fv) {
  return {{"schema_version", kSchemaVersion},
          {"query_id", fv.key.query_id},
          {"doc_rank", fv.key.doc_rank},
          {"table_index", fv.key.table_index},
          {"fingerprint", fv.fingerprint},
          {"names", fv.names},
          {"values", fv.values}};
}

FeatureVector feature_vector_from_json(const nlohmann::json &j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion) throw std::invalid_argument("unsupported feature record");
  FeatureVector fv;
  fv.key.query_id = j.at("query_id").get<std::string>();
  fv.key.doc_rank = j.at("doc_rank").get<int>();
  fv.key.table_index = j.at("table_index").get<int>();
  fv.fingerprint = j.at("fingerprint").get<std::string>();
  fv.names = j.at("names").get<std::vector<std::string>>();
  fv.values = j.at("values").get<std::vector<double>>();
  if (fv.names.size() != fv.values.size()) throw std::invalid_argument("feature names and values differ in length");
  return fv;
}

std::map<docmap::DocKind, similarity::CorpusStats> build_bm25_stats(
    std::span<const extraction::ExtractedTable> tables, docmap::Strategy strategy) {
  std::map<docmap::DocKind, std::vector<docmap::Tokens>> corpora;
  for (const auto &t : tables) {
    for (auto &doc : docmap::build_documents(t, strategy).docs) corpora[doc.kind].push_back(std::move(doc.tokens));
  }
  std::map<docmap::DocKind, similarity::CorpusStats> stats;
  for (auto kind : docmap::kinds_for(strategy)) stats[kind] = similarity::corpus_stats(corpora[kind]);
  return stats;
}

FeatureVector assemble(const TableKey &key, const docmap::Tokens &query, const extraction::ExtractedTable &table,
                       const SimilarityModels &models, const FeatureConfig &cfg,
                       similarity::SimilarityDiagnostics *diag) {
  cfg.validate();
  if (cfg.uses(SimilarityModel::Cdssm) && !models.cdssm) throw std::invalid_argument("C-DSSM model not supplied");
  if (cfg.uses(SimilarityModel::Translation) && !models.translation) {
    throw std::invalid_argument("translation model not supplied");
  }

  FeatureVector fv;
  fv.key = key;
  fv.fingerprint = cfg.fingerprint();
  fv.names = cfg.feature_names();
  fv.values.reserve(fv.names.size());

  if (!cfg.similarities.empty()) {
    const docmap::DocumentSet docs = docmap::build_documents(table, cfg.strategy);
    std::vector<double> query_vector;
    if (cfg.uses(SimilarityModel::Cdssm)) query_vector = similarity::cdssm_forward(query, *models.cdssm);
    for (auto m : {SimilarityModel::Bm25, SimilarityModel::Translation, SimilarityModel::Cdssm}) {
      if (!cfg.uses(m)) continue;
      for (const auto &doc : docs.docs) {
        switch (m) {
          case SimilarityModel::Bm25: {
            auto stats = models.bm25_stats.find(doc.kind);
            if (stats == models.bm25_stats.end()) {
              throw std::invalid_argument("BM25 statistics missing for " + std::string(docmap::to_string(doc.kind)));
            }
            fv.values.push_back(similarity::bm25(query, doc.tokens, stats->second, models.bm25_params));
            break;
          }
          case SimilarityModel::Translation:
            fv.values.push_back(similarity::tm_score(query, doc.tokens, *models.translation));
            break;
          case SimilarityModel::Cdssm:
            fv.values.push_back(
                similarity::cosine(query_vector, similarity::cdssm_forward(doc.tokens, *models.cdssm), diag));
            break;
        }
      }
    }
  }

  const auto &d = table.dominance;
  if (cfg.uses(FeatureGroup::Fraction)) fv.values.insert(fv.values.end(), {d.frac_raw, d.frac_cleaned, d.frac_main});
  if (cfg.uses(FeatureGroup::Position)) {
    fv.values.insert(fv.values.end(), {d.pos_raw, d.pos_cleaned, d.pos_main, static_cast<double>(table.table_index)});
  }
  if (cfg.uses(FeatureGroup::Quality)) {
    const auto q = quality::compute_quality(table);
    fv.values.insert(fv.values.end(), {static_cast<double>(q.n_rows), static_cast<double>(q.n_cols),
                                       q.empty_cell_fraction, q.has_column_names ? 1.0 : 0.0,
                                       q.has_numeric_column ? 1.0 : 0.0,
                                       static_cast<double>(q.numeric_column_count), q.subject_distinct_fraction,
                                       q.type_consistency_mean, q.type_consistency_min});
  }
  for (double &v : fv.values) {
    if (!std::isfinite(v)) v = 0.0;
  }
  return fv;
}

}  // namespace tableqa::features
