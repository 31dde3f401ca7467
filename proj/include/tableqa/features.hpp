#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tableqa/docmap.hpp"
#include "tableqa/extraction.hpp"
#include "tableqa/similarity/bm25.hpp"
#include "tableqa/similarity/cdssm.hpp"
#include "tableqa/similarity/translation.hpp"

namespace tableqa::features {

enum class SimilarityModel { Bm25, Translation, Cdssm };
enum class FeatureGroup { Fraction, Position, Quality };

std::string_view to_string(SimilarityModel m);
std::string_view to_string(FeatureGroup g);

struct FeatureConfig {
  docmap::Strategy strategy = docmap::Strategy::MDocCDoc;
  std::vector<SimilarityModel> similarities{SimilarityModel::Bm25, SimilarityModel::Translation,
                                            SimilarityModel::Cdssm};
  std::vector<FeatureGroup> groups{FeatureGroup::Fraction, FeatureGroup::Position, FeatureGroup::Quality};

  bool uses(SimilarityModel m) const;
  bool uses(FeatureGroup g) const;
  void validate() const;  // throws std::invalid_argument
  std::vector<std::string> feature_names() const;
  std::string fingerprint() const;
};

nlohmann::json to_json(const FeatureConfig &cfg);
FeatureConfig feature_config_from_json(const nlohmann::json &j);

/// Identifies one query-table pair: 1-based document rank and table index.
struct TableKey {
  std::string query_id;
  int doc_rank = 1;
  int table_index = 1;

  auto operator<=>(const TableKey &) const = default;
};

struct FeatureVector {
  TableKey key;
  std::string fingerprint;
  std::vector<std::string> names;
  std::vector<double> values;

  double at(std::string_view name) const;  // throws std::out_of_range
};

nlohmann::json to_json(const FeatureVector &fv);
FeatureVector feature_vector_from_json(const nlohmann::json &j);

struct SimilarityModels {
  std::optional<similarity::CdssmParams> cdssm;
  std::optional<similarity::TranslationTable> translation;
  std::map<docmap::DocKind, similarity::CorpusStats> bm25_stats;
  similarity::Bm25Params bm25_params;
};

/// BM25 statistics per document kind: every mdoc of the collection forms one
/// corpus, every cdoc another, and so on.
std::map<docmap::DocKind, similarity::CorpusStats> build_bm25_stats(std::span<const extraction::ExtractedTable> tables,
                                                                    docmap::Strategy strategy);

FeatureVector assemble(const TableKey &key, const docmap::Tokens &query, const extraction::ExtractedTable &table,
                       const SimilarityModels &models, const FeatureConfig &cfg,
                       similarity::SimilarityDiagnostics *diag = nullptr);

}  // namespace tableqa::features
