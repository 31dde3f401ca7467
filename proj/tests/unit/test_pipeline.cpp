#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "tableqa/pipeline.hpp"

using namespace tableqa;
using namespace tableqa::pipeline;
using nlohmann::json;

namespace {

const fs::path kFixtures = TABLEQA_FIXTURES;

Config small_config() {
  Config cfg;
  cfg.cdssm_shape = {200, 3, 16, 8};
  cfg.cdssm_training.epochs = 2;
  cfg.classifier.n_trees = 20;
  cfg.classifier.min_leaf = 2;
  return cfg;
}

std::string slurp(const fs::path &p) { return read_file(p); }

void write_text(const fs::path &p, const std::string &s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

std::string one_table_page(const std::string &title) {
  return "<html><head><title>" + title + "</title></head><body><h1>" + title +
         "</h1><table><tr><th>Name</th><th>Size</th></tr><tr><td>Alpha</td><td>10</td></tr>"
         "<tr><td>Beta</td><td>20</td></tr></table></body></html>";
}

template <typename F>
std::string error_code_of(F &&f) {
  try {
    f();
  } catch (const PipelineError &e) {
    return e.code() + "|" + e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("minimal corpus ingests one query with k = 1") {
    const Corpus c = ingest_corpus(kFixtures / "minimal");
    REQUIRE(c.queries.size() == 1);
    CHECK(c.k == 1);
    const auto &q = c.query("q1");
    REQUIRE(q.tables.size() == 1);
    CHECK(q.tables[0].rows() == 6);
    CHECK(c.label({"q1", 1, 1}) == 1);
    CHECK_FALSE(c.label({"q1", 1, 2}).has_value());
    CHECK_THROWS_AS(c.query("nope"), PipelineError);
  }

  TEST_CASE("rank gap is reported with file and line") {
    try {
      ingest_corpus(kFixtures / "bad_rank_gap");
      FAIL("no error");
    } catch (const PipelineError &e) {
      CHECK(e.code() == "rank_gap");
      CHECK(std::string(e.what()).find("rank gap") != std::string::npos);
      CHECK(e.line() == 2);
      CHECK(e.record()["error"] == "rank_gap");
    }
  }

  TEST_CASE("five ranked documents give k = 5, max_docs truncates") {
    const auto dir = testing::scratch_dir("five_docs");
    json docs = json::array();
    for (int r = 1; r <= 5; ++r) {
      write_text(dir / "docs" / (std::to_string(r) + ".html"), one_table_page("page " + std::to_string(r)));
      docs.push_back({{"rank", r}, {"path", "docs/" + std::to_string(r) + ".html"}});
    }
    write_text(dir / "queries.jsonl", json{{"id", "q"}, {"text", "sizes"}, {"docs", docs}}.dump() + "\n");
    CHECK(ingest_corpus(dir).k == 5);
    CHECK(ingest_corpus(dir).query("q").tables.size() == 5);
    const Corpus cut = ingest_corpus(dir, {3, true});
    CHECK(cut.k == 3);
    CHECK(cut.query("q").tables.back().doc_rank == 3);
  }

  TEST_CASE("corpus errors") {
    const auto dir = testing::scratch_dir("corpus_errors");
    CHECK(error_code_of([&] { ingest_corpus(dir); }).rfind("missing_file", 0) == 0);

    write_text(dir / "docs" / "a.html", one_table_page("a"));
    write_text(dir / "queries.jsonl", R"({"id": "q1", "text": "x", "docs": ["docs/a.html"]})" "\n");
    write_text(dir / "labels.jsonl", R"({"query_id": "q1", "doc_rank": 1, "table_index": 4, "label": 1})" "\n");
    const std::string missing_table = error_code_of([&] { ingest_corpus(dir); });
    CHECK(missing_table.rfind("unknown_table", 0) == 0);
    CHECK(missing_table.find("nonexistent table") != std::string::npos);

    write_text(dir / "labels.jsonl", R"({"query_id": "q9", "doc_rank": 1, "table_index": 1, "label": 1})" "\n");
    CHECK(error_code_of([&] { ingest_corpus(dir); }).rfind("unknown_query", 0) == 0);
    write_text(dir / "labels.jsonl", R"({"query_id": "q1", "doc_rank": 1, "table_index": 1, "label": 2})" "\n");
    CHECK(error_code_of([&] { ingest_corpus(dir); }).rfind("invalid_label", 0) == 0);
    write_text(dir / "labels.jsonl", "{not json\n");
    CHECK(error_code_of([&] { ingest_corpus(dir); }).rfind("parse_error", 0) == 0);
    CHECK_NOTHROW(ingest_corpus(dir, {0, false}));

    write_text(dir / "queries.jsonl", R"({"id": "q1", "text": "x", "docs": ["docs/missing.html"]})" "\n");
    CHECK(error_code_of([&] { ingest_corpus(dir, {0, false}); }).rfind("missing_document", 0) == 0);
    write_text(dir / "queries.jsonl", R"({"id": "q1", "docs": ["docs/a.html"]})" "\n");
    CHECK(error_code_of([&] { ingest_corpus(dir, {0, false}); }).rfind("missing_field", 0) == 0);
  }

  TEST_CASE("config round-trip and validation") {
    Config cfg = small_config();
    cfg.theta = 0.3;
    cfg.features.strategy = docmap::Strategy::Single;
    const Config back = config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
    CHECK_THROWS_AS(config_from_json(json{{"theta", 1.5}}), PipelineError);
    CHECK_THROWS_AS(config_from_json(json{{"snippet", {{"m", 0}}}}), PipelineError);
    CHECK_THROWS_AS(config_from_json(json{{"tm", {{"beta", 1.5}}}}), PipelineError);
    CHECK(config_from_json(json{{"snippet", {{"m", 3}}}}).snippet_m == 3);
    CHECK_THROWS_AS(config_from_json(json{{"no_such_key", 1}}), PipelineError);
  }

  TEST_CASE("dataset filter uses the cleaned fraction of the top documents") {
    QueryEntry q;
    extraction::ExtractedTable t;
    t.doc_rank = 4;
    t.dominance.frac_cleaned = 0.9;
    q.tables.push_back(t);
    DatasetFilter f;
    CHECK_FALSE(passes_filter(q, f));
    q.tables[0].doc_rank = 3;
    CHECK(passes_filter(q, f));
    q.tables[0].dominance.frac_cleaned = 0.4;
    CHECK_FALSE(passes_filter(q, f));
    f.enabled = false;
    CHECK(passes_filter(q, f));
  }

  TEST_CASE("trained bundle: answers, theta cut-off, curves and labels") {
    const auto dir = testing::scratch_dir("bundle_corpus");
    testing::write_corpus(dir, testing::dominance_benchmark(5, 6, "t"));
    const Corpus corpus = ingest_corpus(dir);
    Config cfg = small_config();
    const ModelBundle bundle = train_bundle(corpus, cfg);

    // Bundle survives JSON with identical scores.
    const ModelBundle back = bundle_from_json(json::parse(to_json(bundle).dump()));
    const auto &q = corpus.queries.front();
    const auto a = query_features(q, bundle), b = query_features(q, back);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(classifier::predict(bundle.classifier, a[i]) == classifier::predict(back.classifier, b[i]));
    }

    cfg.theta = 0.0;
    const json ans = answer(q.text, q.tables, bundle, cfg, {});
    REQUIRE(ans["answer"].is_object());
    const auto &snip = ans["answer"]["snippet"];
    CHECK(snip["row_indices"].size() == 4);
    CHECK(snip["column_indices"].size() == 3);  // the synthetic tables have three columns
    cfg.theta = 1.0;
    const json none = answer(q.text, q.tables, bundle, cfg, {});
    CHECK(none["answer"].is_null());
    CHECK(none["reason"] == "no candidate scored above theta");

    cfg.theta = 0.5;
    const Evaluation ev = evaluate(corpus, cfg, bundle);
    std::vector<eval::ScoredPair> pairs;
    for (const auto &rec : ev.scores) {
      if (!rec["label"].is_null()) pairs.push_back({rec["score"].get<double>(), rec["label"].get<int>()});
    }
    const auto grid = eval::default_thresholds();
    REQUIRE(ev.classifier_curve.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto want = testing::classifier_counts_oracle(pairs, grid[i]);
      CHECK(ev.classifier_curve[i].tp == want.tp);
      CHECK(ev.classifier_curve[i].fp == want.fp);
      CHECK(ev.classifier_curve[i].fn == want.fn);
    }

    // Answering never looks at labels.
    const Corpus unlabeled = ingest_corpus(dir, {0, false});
    CHECK(unlabeled.labels.empty());
    CHECK(answer(q.text, unlabeled.query(q.id).tables, bundle, cfg, {}) == answer(q.text, q.tables, bundle, cfg, {}));
  }

  TEST_CASE("CLI commands write their artifacts and report errors as records") {
    const auto dir = testing::scratch_dir("cli_corpus");
    testing::write_corpus(dir / "corpus", testing::dominance_benchmark(9, 3, "c"));
    write_text(dir / "config.json", to_json(small_config()).dump(2));
    const std::string cli = TABLEQA_CLI;
    const std::string common = " --corpus " + (dir / "corpus").string() + " --config " + (dir / "config.json").string();
    const std::string out = (dir / "out").string();
    REQUIRE(std::system((cli + " train" + common + " --out " + out + " > /dev/null").c_str()) == 0);
    REQUIRE(std::system((cli + " evaluate" + common + " --model " + out + "/model.json --out " + out + " > /dev/null").c_str()) == 0);
    REQUIRE(std::system((cli + " answer" + common + " --model " + out + "/model.json --query-id c1 --out " + out + " > /dev/null").c_str()) == 0);
    for (const char *f : {"model.json", "classifier_pr.csv", "selector_pr.csv", "scores.jsonl", "answer.json"}) {
      CHECK(fs::exists(dir / "out" / f));
    }
    CHECK(slurp(dir / "out" / "classifier_pr.csv").rfind("threshold,tp,fp,fn,precision,recall\n", 0) == 0);
    const json ans = json::parse(slurp(dir / "out" / "answer.json"));
    CHECK(ans.contains("answer"));

    const int rc = std::system((cli + " extract --corpus " + (kFixtures / "bad_rank_gap").string() + " --out " + out +
                                " 2> " + (dir / "err.txt").string())
                                   .c_str());
    CHECK(rc != 0);
    const json record = json::parse(slurp(dir / "err.txt"));
    CHECK(record["error"] == "rank_gap");
    CHECK(record["line"] == 2);
  }
}
