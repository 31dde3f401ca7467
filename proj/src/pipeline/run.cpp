#include <algorithm>
#include <iostream>

#include "tableqa/docmap.hpp"
#include "tableqa/pipeline.hpp"
#include "tableqa/selector.hpp"

namespace tableqa::pipeline {

namespace {

using nlohmann::json;

std::string dump_file(const json &j) { return j.dump(2) + "\n"; }

std::string dump_lines(const std::vector<json> &lines) {
  std::string out;
  for (const auto &l : lines) out += l.dump() + "\n";
  return out;
}

fs::path out_dir(const Options &o) {
  if (o.out.empty()) throw PipelineError("usage", "--out is required");
  fs::create_directories(o.out);
  return o.out;
}

Config config_for(const Options &o) { return o.config.empty() ? Config{} : load_config(o.config); }

Corpus corpus_for(const Options &o, const Config &cfg, bool labels = true) {
  if (o.corpus.empty()) throw PipelineError("usage", "--corpus is required");
  return ingest_corpus(o.corpus, {cfg.k, labels});
}

ModelBundle load_bundle(const fs::path &path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception &e) {
    throw PipelineError("parse_error", e.what(), path.string());
  }
  return bundle_from_json(j);
}

snippet::Synonyms load_synonyms(const Config &cfg) {
  if (cfg.synonyms_path.empty()) return {};
  try {
    return snippet::parse_synonyms(read_file(cfg.synonyms_path));
  } catch (const std::invalid_argument &e) {
    throw PipelineError("parse_error", e.what(), cfg.synonyms_path);
  }
}

json key_json(const features::TableKey &k) {
  return {{"query_id", k.query_id}, {"doc_rank", k.doc_rank}, {"table_index", k.table_index}};
}

json row_json(const std::optional<extraction::Row> &row) { return row ? json(*row) : json(nullptr); }

}  // namespace

nlohmann::json to_json(const extraction::ExtractedTable &t, const std::string &query_id) {
  const auto &m = t.metadata;
  const auto &d = t.dominance;
  return {{"schema_version", 1},
          {"query_id", query_id},
          {"doc_rank", t.doc_rank},
          {"table_index", t.table_index},
          {"grid", t.grid},
          {"subject_col", t.subject_col ? json(*t.subject_col) : json(nullptr)},
          {"metadata",
           {{"url", m.url},
            {"page_title", m.page_title},
            {"h1_heading", m.h1_heading},
            {"section_headings", m.section_headings},
            {"preceding_text", m.preceding_text},
            {"caption", m.caption},
            {"header_row", row_json(m.header_row)},
            {"footer_row", row_json(m.footer_row)},
            {"column_names", row_json(m.column_names)}}},
          {"dominance",
           {{"frac_raw", d.frac_raw},
            {"frac_cleaned", d.frac_cleaned},
            {"frac_main", d.frac_main},
            {"pos_raw", d.pos_raw},
            {"pos_cleaned", d.pos_cleaned},
            {"pos_main", d.pos_main}}}};
}

std::vector<const QueryEntry *> dataset_queries(const Corpus &corpus, const Config &cfg) {
  std::vector<const QueryEntry *> out;
  for (const auto &q : corpus.queries) {
    if (passes_filter(q, cfg.filter)) out.push_back(&q);
  }
  return out;
}

std::vector<similarity::ClickPair> similarity_pairs(const Corpus &corpus, const Config &cfg) {
  std::vector<similarity::ClickPair> pairs;
  if (!corpus.clicks.empty()) {
    for (const auto &c : corpus.clicks) pairs.push_back({docmap::tokenize(c.query), docmap::tokenize(c.doc)});
    return pairs;
  }
  const auto queries = dataset_queries(corpus, cfg);
  auto table_doc = [](const extraction::ExtractedTable &t) {
    return docmap::build_documents(t, docmap::Strategy::Single).get(docmap::DocKind::Doc);
  };
  for (const auto *q : queries) {
    for (const auto &t : q->tables) {
      if (corpus.label({q->id, t.doc_rank, t.table_index}) == 1) pairs.push_back({docmap::tokenize(q->text), table_doc(t)});
    }
  }
  if (!pairs.empty()) return pairs;
  for (const auto *q : queries) {
    for (const auto &t : q->tables) {
      if (t.doc_rank == 1) pairs.push_back({docmap::tokenize(q->text), table_doc(t)});
    }
  }
  return pairs;
}

ModelBundle train_similarity(const Corpus &corpus, const Config &cfg) {
  ModelBundle bundle;
  bundle.features = cfg.features;
  bundle.similarity.bm25_params = cfg.bm25;
  const auto &fc = cfg.features;

  if (fc.uses(features::SimilarityModel::Bm25)) {
    std::vector<extraction::ExtractedTable> all;
    for (const auto &q : corpus.queries) all.insert(all.end(), q.tables.begin(), q.tables.end());
    bundle.similarity.bm25_stats = features::build_bm25_stats(all, fc.strategy);
  }

  if (fc.uses(features::SimilarityModel::Translation) || fc.uses(features::SimilarityModel::Cdssm)) {
    const auto pairs = similarity_pairs(corpus, cfg);
    if (fc.uses(features::SimilarityModel::Translation)) {
      if (pairs.empty()) throw PipelineError("insufficient_data", "no training pairs for the translation model");
      std::vector<similarity::TranslationPair> tm_pairs;
      for (const auto &p : pairs) tm_pairs.push_back({p.query, p.doc});
      try {
        bundle.similarity.translation = similarity::tm_train(tm_pairs, cfg.tm_iterations, cfg.tm_beta);
      } catch (const std::invalid_argument &e) {
        throw PipelineError("config_error", e.what());
      }
    }
    if (fc.uses(features::SimilarityModel::Cdssm)) {
      if (pairs.size() < 2) throw PipelineError("insufficient_data", "C-DSSM training needs at least two pairs");
      auto training = cfg.cdssm_training;
      training.batch_size = std::max<std::size_t>(2, std::min(training.batch_size, pairs.size()));
      training.negatives = std::max<std::size_t>(1, std::min({training.negatives, training.batch_size - 1}));
      try {
        bundle.similarity.cdssm = similarity::cdssm_train(pairs, cfg.cdssm_shape, training);
      } catch (const std::invalid_argument &e) {
        throw PipelineError("config_error", e.what());
      }
    }
  }
  return bundle;
}

std::vector<features::FeatureVector> query_features(const QueryEntry &q, const ModelBundle &bundle) {
  const auto tokens = docmap::tokenize(q.text);
  std::vector<features::FeatureVector> out;
  for (const auto &t : q.tables) {
    out.push_back(features::assemble({q.id, t.doc_rank, t.table_index}, tokens, t, bundle.similarity, bundle.features));
  }
  return out;
}

std::vector<classifier::LabeledPair> labeled_pairs(const Corpus &corpus, const Config &cfg,
                                                   const ModelBundle &bundle) {
  std::vector<classifier::LabeledPair> out;
  for (const auto *q : dataset_queries(corpus, cfg)) {
    for (auto &fv : query_features(*q, bundle)) {
      if (auto label = corpus.label(fv.key)) out.push_back({q->text, std::move(fv), *label});
    }
  }
  return out;
}

ModelBundle train_bundle(const Corpus &corpus, const Config &cfg) {
  ModelBundle bundle = train_similarity(corpus, cfg);
  const auto pairs = labeled_pairs(corpus, cfg, bundle);
  try {
    bundle.classifier = classifier::train(pairs, cfg.classifier);
  } catch (const std::invalid_argument &e) {
    throw PipelineError("insufficient_data", e.what(), "labels.jsonl");
  }
  return bundle;
}

nlohmann::json answer(const std::string &query_text, const std::vector<extraction::ExtractedTable> &tables,
                      const ModelBundle &bundle, const Config &cfg, const snippet::Synonyms &synonyms) {
  const auto tokens = docmap::tokenize(query_text);
  std::vector<selector::ScoredCandidate> scored;
  json candidates = json::array();
  for (const auto &t : tables) {
    const features::TableKey key{"", t.doc_rank, t.table_index};
    const auto fv = features::assemble(key, tokens, t, bundle.similarity, bundle.features);
    const double score = classifier::predict(bundle.classifier, fv);
    scored.push_back({key, score});
    candidates.push_back({{"doc_rank", t.doc_rank}, {"table_index", t.table_index}, {"score", score}});
  }
  json out{{"schema_version", 1}, {"query", query_text}, {"theta", cfg.theta}, {"candidates", candidates}};
  const auto chosen = selector::select_scored(scored, cfg.theta);
  if (!chosen) {
    out["answer"] = nullptr;
    out["reason"] = tables.empty() ? "no candidate tables" : "no candidate scored above theta";
    return out;
  }
  const auto &t = tables[chosen->index];
  const auto snip = snippet::generate(t, tokens, cfg.snippet_m, cfg.snippet_n, synonyms);
  out["answer"] = {{"doc_rank", t.doc_rank},
                   {"table_index", t.table_index},
                   {"score", chosen->score},
                   {"margin", chosen->margin},
                   {"snippet", snippet::to_json(snip)}};
  return out;
}

Evaluation evaluate(const Corpus &corpus, const Config &cfg, const ModelBundle &bundle,
                    const std::vector<double> &thresholds) {
  Evaluation ev;
  ev.scores = json::array();
  std::vector<eval::ScoredPair> pairs;
  std::vector<eval::QueryOutcome> outcomes;
  for (const auto *q : dataset_queries(corpus, cfg)) {
    eval::QueryOutcome outcome;
    bool any_label = false;
    for (const auto &fv : query_features(*q, bundle)) {
      const double score = classifier::predict(bundle.classifier, fv);
      const auto label = corpus.label(fv.key);
      outcome.candidates.push_back({fv.key, score});
      outcome.labels.push_back(label.value_or(0));
      json rec = key_json(fv.key);
      rec["score"] = score;
      rec["label"] = label ? json(*label) : json(nullptr);
      ev.scores.push_back(rec);
      if (label) {
        pairs.push_back({score, *label});
        any_label = true;
      }
    }
    if (any_label) outcomes.push_back(std::move(outcome));
  }
  ev.classifier_curve = eval::classifier_pr(pairs, thresholds);
  ev.selector_curve = eval::selector_pr(outcomes, thresholds);
  return ev;
}

void run_extract(const Options &o) {
  const Config cfg = config_for(o);
  const Corpus corpus = corpus_for(o, cfg, false);
  std::vector<json> lines;
  for (const auto &q : corpus.queries) {
    for (const auto &t : q.tables) lines.push_back(to_json(t, q.id));
  }
  write_file(out_dir(o) / "tables.jsonl", dump_lines(lines));
}

void run_features(const Options &o) {
  const Config cfg = config_for(o);
  const Corpus corpus = corpus_for(o, cfg);
  const ModelBundle bundle = o.model.empty() ? train_similarity(corpus, cfg) : load_bundle(o.model);
  std::vector<json> lines;
  for (const auto *q : dataset_queries(corpus, cfg)) {
    for (const auto &fv : query_features(*q, bundle)) {
      json rec = features::to_json(fv);
      const auto label = corpus.label(fv.key);
      rec["label"] = label ? json(*label) : json(nullptr);
      lines.push_back(std::move(rec));
    }
  }
  write_file(out_dir(o) / "features.jsonl", dump_lines(lines));
}

void run_train(const Options &o) {
  const Config cfg = config_for(o);
  const Corpus corpus = corpus_for(o, cfg);
  const ModelBundle bundle = train_bundle(corpus, cfg);
  const fs::path model_path = o.model.empty() ? out_dir(o) / "model.json" : fs::path(o.model);
  write_file(model_path, dump_file(to_json(bundle)));
}

void run_evaluate(const Options &o) {
  if (o.model.empty()) throw PipelineError("usage", "--model is required");
  const Config cfg = config_for(o);
  const Corpus corpus = corpus_for(o, cfg);
  const ModelBundle bundle = load_bundle(o.model);
  const Evaluation ev = evaluate(corpus, cfg, bundle);
  const fs::path dir = out_dir(o);
  write_file(dir / "classifier_pr.csv", eval::to_csv(ev.classifier_curve));
  write_file(dir / "classifier_pr.json", dump_file(eval::to_json(ev.classifier_curve)));
  write_file(dir / "selector_pr.csv", eval::to_csv(ev.selector_curve));
  write_file(dir / "selector_pr.json", dump_file(eval::to_json(ev.selector_curve)));
  std::vector<json> lines(ev.scores.begin(), ev.scores.end());
  write_file(dir / "scores.jsonl", dump_lines(lines));
}

void run_answer(const Options &o) {
  if (o.model.empty()) throw PipelineError("usage", "--model is required");
  const Config cfg = config_for(o);
  const ModelBundle bundle = load_bundle(o.model);
  std::string text;
  std::vector<extraction::ExtractedTable> tables;
  std::string query_id;
  if (!o.query_id.empty()) {
    const Corpus corpus = corpus_for(o, cfg, false);
    const auto &q = corpus.query(o.query_id);
    text = q.text;
    tables = q.tables;
    query_id = q.id;
  } else {
    if (o.query.empty()) throw PipelineError("usage", "answer needs --query-id or --query with --doc");
    text = o.query;
    int rank = 0;
    for (const auto &d : o.docs) {
      auto found = extraction::extract_candidate_tables(read_file(d), "", ++rank);
      tables.insert(tables.end(), found.begin(), found.end());
      if (rank >= static_cast<int>(cfg.k)) break;
    }
  }
  json result = answer(text, tables, bundle, cfg, load_synonyms(cfg));
  if (!query_id.empty()) result["query_id"] = query_id;
  const std::string body = dump_file(result);
  if (!o.out.empty()) write_file(out_dir(o) / "answer.json", body);
  std::cout << body;
}

void run_inspect(const Options &o) {
  json report{{"schema_version", 1}};
  if (!o.model.empty()) {
    const ModelBundle b = load_bundle(o.model);
    std::size_t max_depth = 0;
    for (const auto &t : b.classifier.trees) max_depth = std::max(max_depth, t.depth());
    report["model"] = {{"fingerprint", b.features.fingerprint()},
                       {"features", b.features.feature_names()},
                       {"trees", b.classifier.trees.size()},
                       {"deepest_tree", max_depth},
                       {"cdssm", b.similarity.cdssm.has_value()},
                       {"translation", b.similarity.translation.has_value()}};
  }
  if (!o.corpus.empty()) {
    const Config cfg = config_for(o);
    const Corpus corpus = corpus_for(o, cfg);
    json queries = json::array();
    for (const auto &q : corpus.queries) {
      std::size_t labeled = 0, positive = 0;
      for (const auto &t : q.tables) {
        if (auto l = corpus.label({q.id, t.doc_rank, t.table_index})) {
          ++labeled;
          positive += *l;
        }
      }
      queries.push_back({{"id", q.id},
                         {"documents", q.docs.size()},
                         {"tables", q.tables.size()},
                         {"labeled", labeled},
                         {"positive", positive},
                         {"in_dataset", passes_filter(q, cfg.filter)}});
    }
    report["corpus"] = {{"k", corpus.k}, {"labels", corpus.labels.size()}, {"clicks", corpus.clicks.size()},
                        {"queries", queries}};
  }
  if (!o.model.empty() || !o.corpus.empty()) {
    const std::string body = dump_file(report);
    if (!o.out.empty()) write_file(out_dir(o) / "inspect.json", body);
    std::cout << body;
    return;
  }
  throw PipelineError("usage", "inspect needs --model or --corpus");
}

}  // namespace tableqa::pipeline
