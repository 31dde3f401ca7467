// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "tableqa/docmap.hpp"
#include "tableqa/eval.hpp"
#include "tableqa/extraction.hpp"
#include "tableqa/pipeline.hpp"
#include "tableqa/random.hpp"
#include "tableqa/similarity/bm25.hpp"
#include "tableqa/similarity/cdssm.hpp"
#include "tableqa/similarity/translation.hpp"
#include "tableqa/snippet.hpp"

using namespace tableqa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- dominance

// A page assembled from pieces whose role is known, so every byte count can be
// summed directly without parsing.
struct Piece {
  std::string text;
  bool removed = false;  // script, style or comment bytes
  bool table = false;    // inside the measured <table> element
  bool main = false;     // inside the main container's content
};

struct Fixture {
  std::string name;
  std::vector<Piece> pieces;
};

Piece plain(std::string s, bool main = false) { return {std::move(s), false, false, main}; }
Piece gone(std::string s, bool main = false) { return {std::move(s), true, false, main}; }
Piece tab(std::string s, bool removed = false) { return {std::move(s), removed, true, true}; }

extraction::DominanceCounts hand_counts(const Fixture &f) {
  extraction::DominanceCounts c;
  bool seen_table = false;
  bool seen_main = false;
  for (const auto &p : f.pieces) {
    const std::size_t n = p.text.size();
    seen_table = seen_table || p.table;
    seen_main = seen_main || p.main;
    c.total_raw += n;
    if (p.table) c.table_raw += n;
    if (!seen_table) c.before_raw += n;
    if (p.removed) continue;
    c.total_cleaned += n;
    if (p.table) c.table_cleaned += n;
    if (!seen_table) c.before_cleaned += n;
    if (p.main) c.container_main += n;
    if (p.main && !seen_table) c.before_main += n;
  }
  return c;
}

const std::string kTable2x2 = "<table><tr><td>a</td><td>b</td></tr><tr><td>c</td><td>d</td></tr></table>";

std::vector<Fixture> dominance_fixtures() {
  // Main-container pieces lie strictly between the container's open and close tags.
  const std::string rows = "<tr><td>Oslo</td><td>1</td></tr><tr><td>Rome</td><td>2</td></tr>";
  return {
      {"no h1: whole document is main",
       {plain("<html><body>", true), plain("<p>intro text</p>", true), tab(kTable2x2), plain("</body></html>", true)}},
      {"table first in container",
       {plain("<html><body><div>"), tab(kTable2x2), plain("<h1>Title</h1>", true), plain("</div></body></html>")}},
      {"script before table",
       {plain("<html><head>"), gone("<script>var x = 1;</script>"), plain("</head><body><div id=c>"),
        plain("<h1>Cities</h1><p>some words</p>", true), tab(kTable2x2), plain("</div></body></html>")}},
      {"comment inside table",
       {plain("<html><body><main>"), plain("<h1>H</h1>", true), tab("<table>"), tab("<!-- note -->", true),
        tab(rows + "</table>"), plain("<p>after</p>", true), plain("</main><footer>f</footer></body></html>")}},
      {"style in head and script after table",
       {plain("<html><head>"), gone("<style>td { color: red; }</style>"), plain("<title>T</title></head><body><div>"),
        plain("<h1>Lakes</h1>", true), tab(kTable2x2), gone("<script>track();</script>", true),
        plain("<p>tail</p>", true), plain("</div></body></html>")}},
      {"nested containers: LCA is the section",
       {plain("<html><body><nav>menu menu</nav><section>"), plain("<div><h1>Deep</h1></div>", true),
        plain("<p>lead</p>", true), plain("<div>", true), tab("<table>" + rows + "</table>"), plain("</div>", true),
        plain("</section></body></html>")}},
      {"table at the very end of the page",
       {plain("<html><body>"), plain("<h1>End</h1>", true), plain("<p>" + std::string(120, 'x') + "</p>", true),
        tab(kTable2x2)}},
      {"adjacent removed spans",
       {plain("<html><body><article>"), plain("<h1>A</h1>", true), gone("<script>a()</script>", true),
        gone("<!-- c -->", true), gone("<style>p{}</style>", true), tab(kTable2x2), plain("</article></body></html>")}},
      {"large filler around table",
       {plain("<html><body><div class=wrap>"), plain("<h1>Big</h1>", true),
        plain("<p>" + std::string(500, 'b') + "</p>", true), tab("<table>" + rows + rows + rows + "</table>"),
        plain("<p>" + std::string(300, 'a') + "</p>", true), plain("</div><p>outside</p></body></html>")}},
      {"multibyte text counts bytes",
       {plain("<html><body><div>"), plain("<h1>Caf\xC3\xA9s</h1>", true), plain("<p>na\xC3\xAFve \xE2\x82\xAC</p>", true),
        tab("<table><tr><td>\xC3\xA9</td><td>\xE2\x82\xAC 5</td></tr><tr><td>b</td><td>c</td></tr></table>"),
        plain("</div></body></html>")}},
      {"h1 outside the table's branch: LCA is body",
       {plain("<html><body>"), plain("<header><h1>Site</h1></header>", true), plain("<div><p>x</p>", true),
        tab(kTable2x2), plain("</div>", true), plain("</body></html>")}},
  };
}

double frac(std::size_t n, std::size_t d) { return d == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(d); }

Outcome criterion_dominance() {
  Outcome out;
  std::size_t checked = 0;
  for (const auto &f : dominance_fixtures()) {
    std::string src;
    for (const auto &p : f.pieces) src += p.text;
    const auto want = hand_counts(f);
    const html::DomTree dom = html::parse_html(src);
    const html::NodeId table = dom.find_first("table");
    const auto got = extraction::dominance_counts(dom, src, table);
    const auto feat = extraction::compute_dominance(dom, src, table);
    const bool counts_ok = got.table_raw == want.table_raw && got.before_raw == want.before_raw &&
                           got.total_raw == want.total_raw && got.table_cleaned == want.table_cleaned &&
                           got.before_cleaned == want.before_cleaned && got.total_cleaned == want.total_cleaned &&
                           got.before_main == want.before_main && got.container_main == want.container_main;
    const bool feats_ok = feat.frac_raw == frac(want.table_raw, want.total_raw) &&
                          feat.frac_cleaned == frac(want.table_cleaned, want.total_cleaned) &&
                          feat.frac_main == frac(want.table_cleaned, want.container_main) &&
                          feat.pos_raw == frac(want.before_raw, want.total_raw) &&
                          feat.pos_cleaned == frac(want.before_cleaned, want.total_cleaned) &&
                          feat.pos_main == frac(want.before_main, want.container_main);
    if (!counts_ok || !feats_ok) {
      out.pass = false;
      out.detail += "[" + f.name + "] ";
    }
    ++checked;
  }
  out.pass = out.pass && checked >= 10;
  out.detail += std::to_string(checked) + " fixtures";
  return out;
}

// ---------------------------------------------------------------- C-DSSM

// Smallest gap between the two largest window activations of any pooled unit.
// Below the finite-difference reach the pooled argmax can switch mid-step.
double pooling_gap(const similarity::Tokens &tokens, const similarity::CdssmParams &params) {
  const auto tr = similarity::cdssm_trace(tokens, params);
  double gap = std::numeric_limits<double>::infinity();
  if (tr.hidden.size() < 2) return gap;
  for (std::size_t k = 0; k < params.shape.conv_dim; ++k) {
    std::vector<double> v;
    for (const auto &h : tr.hidden) v.push_back(h[k]);
    std::partial_sort(v.begin(), v.begin() + 2, v.end(), std::greater<>());
    gap = std::min(gap, v[0] - v[1]);
  }
  return gap;
}

Outcome criterion_grad_check() {
  Rng rng(2024);
  const std::vector<std::string> vocab{"lake", "river", "city", "tall", "tower", "bridge", "map", "area",
                                       "list", "world", "sea", "peak", "road", "rail", "port"};
  auto sentence = [&](std::size_t min_len, std::size_t max_len) {
    similarity::Tokens t;
    const std::size_t n = min_len + rng.index(max_len - min_len + 1);
    for (std::size_t i = 0; i < n; ++i) t.push_back(rng.pick(vocab));
    return t;
  };
  double worst = 0.0;
  std::size_t redrawn = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const similarity::CdssmShape shape{50, 3, 8, 4};
    const auto params = similarity::CdssmParams::random(shape, 100 + trial);
    std::vector<similarity::ClickPair> batch;
    for (;;) {
      batch.clear();
      const std::size_t size = 2 + rng.index(3);
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < size; ++i) {
        batch.push_back({sentence(1, 3), sentence(1, 6)});
        gap = std::min({gap, pooling_gap(batch.back().query, params), pooling_gap(batch.back().doc, params)});
      }
      if (gap > 1e-2) break;
      ++redrawn;
    }
    const std::size_t negatives = 1 + rng.index(batch.size() - 1);
    const double gamma = rng.uniform(1.0, 10.0);
    worst = std::max(worst, similarity::cdssm_grad_check(params, batch, negatives, gamma));
  }
  return {worst <= 1e-4, "max relative error " + fmt(worst) + " (" + std::to_string(redrawn) +
                             " batches redrawn for pooling near-ties)"};
}

// ---------------------------------------------------------------- TM

Outcome criterion_tm_em() {
  Rng rng(77);
  const std::vector<std::string> q_vocab{"largest", "lakes", "tallest", "towers", "rivers", "longest", "city", "area"};
  const std::vector<std::string> d_vocab{"lake",  "area",  "km",   "tower", "height", "river", "length",
                                         "city",  "rank",  "name", "list",  "largest", "world"};
  std::vector<similarity::TranslationPair> pairs;
  for (int i = 0; i < 100; ++i) {
    similarity::TranslationPair p;
    for (std::size_t k = 1 + rng.index(3); k > 0; --k) p.query.push_back(rng.pick(q_vocab));
    for (std::size_t k = 2 + rng.index(8); k > 0; --k) p.doc.push_back(rng.pick(d_vocab));
    pairs.push_back(std::move(p));
  }
  std::vector<double> ll;
  const auto table = similarity::tm_train(pairs, 20, 0.8, &ll);
  bool monotone = ll.size() == 21;
  for (std::size_t i = 1; i < ll.size(); ++i) monotone = monotone && ll[i] >= ll[i - 1] - 1e-9;
  double worst_row = 0.0;
  for (const auto &[w, row] : table.rows()) {
    double sum = 0.0;
    for (const auto &[q, p] : row) sum += p;
    worst_row = std::max(worst_row, std::abs(sum - 1.0));
  }
  return {monotone && worst_row <= 1e-9,
          "iterations " + std::to_string(ll.size() - 1) + ", monotone " + (monotone ? "yes" : "no") +
              ", max row deviation " + fmt(worst_row)};
}

// ---------------------------------------------------------------- BM25

Outcome criterion_bm25() {
  Rng rng(4242);
  std::vector<std::string> vocab;
  for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<similarity::Tokens> corpus(1 + rng.index(12));
    for (auto &doc : corpus) {
      for (std::size_t k = rng.index(30); k > 0; --k) doc.push_back(rng.pick(vocab));
    }
    similarity::Tokens query;
    for (std::size_t k = 1 + rng.index(5); k > 0; --k) query.push_back(rng.pick(vocab));
    const auto &doc = corpus[rng.index(corpus.size())];
    const similarity::Bm25Params params{rng.uniform(0.5, 2.0), rng.uniform(0.0, 1.0)};
    const double got = similarity::bm25(query, doc, similarity::corpus_stats(corpus), params);
    const double want = testing::bm25_oracle(query, doc, corpus, params.k1, params.b);
    worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= 1e-12, "1000 triples, max abs diff " + fmt(worst)};
}

// ---------------------------------------------------------------- synthetic benchmarks

pipeline::Config benchmark_config() {
  pipeline::Config cfg;
  cfg.cdssm_shape = {1000, 3, 32, 16};
  cfg.cdssm_training.epochs = 5;
  cfg.classifier.n_trees = 100;
  cfg.classifier.min_leaf = 3;
  return cfg;
}

pipeline::Corpus synthetic_corpus(const std::string &name, const std::vector<testing::SyntheticQuery> &queries,
                                  const std::vector<testing::SyntheticClick> &clicks = {}) {
  const auto dir = testing::scratch_dir(name);
  testing::write_corpus(dir, queries, clicks);
  return pipeline::ingest_corpus(dir);
}

struct HeldOut {
  std::vector<eval::PrPoint> selector_curve;
  std::map<std::string, double> score;  // "<query>/<rank>"
};

HeldOut score_held_out(const pipeline::Corpus &corpus, const pipeline::Config &cfg,
                       const pipeline::ModelBundle &bundle) {
  HeldOut h;
  const auto ev = pipeline::evaluate(corpus, cfg, bundle);
  h.selector_curve = ev.selector_curve;
  for (const auto &rec : ev.scores) {
    h.score[rec["query_id"].get<std::string>() + "/" + std::to_string(rec["doc_rank"].get<int>())] =
        rec["score"].get<double>();
  }
  return h;
}

double recall_at_precision(const std::vector<eval::PrPoint> &curve, double precision) {
  double best = 0.0;
  for (const auto &p : curve) {
    if (!p.precision_undefined && p.precision >= precision) best = std::max(best, p.recall);
  }
  return best;
}

// Fraction of a family's queries where the selector prefers the distractor.
double misrank_rate(const HeldOut &h, const std::vector<testing::SyntheticQuery> &queries, const std::string &family) {
  std::size_t n = 0, bad = 0;
  for (const auto &q : queries) {
    if (q.family != family) continue;
    const auto g = h.score.find(q.id + "/" + std::to_string(q.good_rank));
    const auto d = h.score.find(q.id + "/" + std::to_string(q.distractor_rank));
    if (g == h.score.end() || d == h.score.end()) continue;
    ++n;
    const selector::ScoredCandidate good{{q.id, q.good_rank, 1}, g->second};
    const selector::ScoredCandidate distractor{{q.id, q.distractor_rank, 1}, d->second};
    if (selector::outranks(distractor, good)) ++bad;
  }
  return n == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(n);
}

Outcome criterion_baseline_failure() {
  const auto train_q = testing::dominance_benchmark(101, 30, "tr");
  const auto test_q = testing::dominance_benchmark(202, 20, "ho");
  const auto clicks = testing::click_log(testing::dominance_benchmark(909, 30, "cl"));
  const auto train = synthetic_corpus("acc_dom_train", train_q, clicks);
  const auto test = synthetic_corpus("acc_dom_test", test_q);
  for (const char *fam : {"A", "B"}) {
    const auto n = std::count_if(test_q.begin(), test_q.end(), [&](const auto &q) { return q.family == fam; });
    if (n < 20) return {false, std::string("family ") + fam + " has fewer than 20 queries"};
  }

  auto run = [&](bool sims, bool groups) {
    pipeline::Config cfg = benchmark_config();
    if (!sims) cfg.features.similarities.clear();
    if (!groups) cfg.features.groups.clear();
    const auto bundle = pipeline::train_bundle(train, cfg);
    return score_held_out(test, cfg, bundle);
  };
  const HeldOut combined = run(true, true);
  const HeldOut sim_only = run(true, false);
  const HeldOut table_only = run(false, true);

  const double r_comb = recall_at_precision(combined.selector_curve, 0.8);
  const double r_sim = recall_at_precision(sim_only.selector_curve, 0.8);
  const double r_tab = recall_at_precision(table_only.selector_curve, 0.8);
  const double mis_sim = misrank_rate(sim_only, test_q, "A");
  const double mis_tab = misrank_rate(table_only, test_q, "B");
  const bool pass = r_comb > r_sim && r_comb > r_tab && mis_sim >= 0.5 && mis_tab >= 0.5;
  return {pass, "recall@P>=0.8 combined " + fmt(r_comb) + ", similarity-only " + fmt(r_sim) + ", table-only " +
                    fmt(r_tab) + "; misranked A by similarity-only " + fmt(mis_sim) + ", B by table-only " +
                    fmt(mis_tab)};
}

Outcome criterion_ablation_ordering() {
  const auto clicks = testing::click_log(testing::capitals_benchmark(505, 60, "cl"));
  const auto train = synthetic_corpus("acc_cap_train", testing::capitals_benchmark(303, 60, "tr"), clicks);
  const auto test = synthetic_corpus("acc_cap_test", testing::capitals_benchmark(404, 40, "ho"));
  auto held_out_auc = [&](docmap::Strategy strategy) {
    pipeline::Config cfg = benchmark_config();
    cfg.filter.enabled = false;
    cfg.features.strategy = strategy;
    const auto bundle = pipeline::train_bundle(train, cfg);
    const auto ev = pipeline::evaluate(test, cfg, bundle);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto &rec : ev.scores) {
      if (rec["label"].is_null()) continue;
      scores.push_back(rec["score"].get<double>());
      labels.push_back(rec["label"].get<int>());
    }
    return testing::auc(scores, labels);
  };
  const double split = held_out_auc(docmap::Strategy::MDocCDoc);
  const double single = held_out_auc(docmap::Strategy::Single);
  return {split - single >= 0.02, "AUC MDocCDoc " + fmt(split) + ", Single " + fmt(single)};
}

// ---------------------------------------------------------------- selector / eval

Outcome criterion_eval_oracles() {
  Rng rng(99);
  const auto grid = eval::default_thresholds();
  std::size_t mismatches = 0, non_monotone = 0;
  for (int instance = 0; instance < 100; ++instance) {
    std::vector<eval::QueryOutcome> queries(1 + rng.index(15));
    std::vector<eval::ScoredPair> pairs;
    int qn = 0;
    for (auto &q : queries) {
      ++qn;
      const std::size_t n = rng.index(6);
      for (std::size_t i = 0; i < n; ++i) {
        // Two-decimal scores land exactly on grid thresholds.
        const double s = rng.bernoulli(0.5) ? static_cast<double>(rng.index(101)) / 100.0 : rng.uniform01();
        const int label = rng.bernoulli(0.4) ? 1 : 0;
        q.candidates.push_back({{"q" + std::to_string(qn), static_cast<int>(1 + rng.index(3)), static_cast<int>(i + 1)}, s});
        q.labels.push_back(label);
        pairs.push_back({s, label});
      }
    }
    const auto cls = eval::classifier_pr(pairs, grid);
    const auto sel = eval::selector_pr(queries, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto c = testing::classifier_counts_oracle(pairs, grid[i]);
      const auto s = testing::selector_counts_oracle(queries, grid[i]);
      if (cls[i].tp != c.tp || cls[i].fp != c.fp || cls[i].fn != c.fn) ++mismatches;
      if (sel[i].tp != s.tp || sel[i].fp != s.fp || sel[i].fn != s.fn) ++mismatches;
      if (i > 0 && (cls[i].recall > cls[i - 1].recall || sel[i].recall > sel[i - 1].recall)) ++non_monotone;
    }
  }
  return {mismatches == 0 && non_monotone == 0,
          "100 instances, count mismatches " + std::to_string(mismatches) + ", recall increases " +
              std::to_string(non_monotone)};
}

// ---------------------------------------------------------------- snippet

extraction::ExtractedTable grid_table(std::size_t rows, std::size_t cols, std::optional<std::size_t> subject) {
  extraction::ExtractedTable t;
  for (std::size_t r = 0; r < rows; ++r) {
    extraction::Row row;
    for (std::size_t c = 0; c < cols; ++c) row.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
    t.grid.push_back(row);
  }
  t.subject_col = subject;
  return t;
}

Outcome criterion_snippet() {
  using Idx = std::vector<std::size_t>;
  using snippet::TraceStep;
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string &what) {
    if (!ok) failed.push_back(what);
  };

  // Union_m boundaries.
  Idx s{1, 2};
  snippet::union_bounded(s, 3, 2);
  expect(s == Idx{1, 2}, "union at cap");
  s = {1};
  snippet::union_bounded(s, 3, 2);
  expect(s == Idx{1, 3}, "union below cap");
  snippet::union_bounded(s, 1, 5);
  expect(s == Idx{1, 3}, "union of a present element");
  s = {};
  snippet::union_bounded(s, 0, 0);
  expect(s.empty(), "union with zero cap");

  // Round robin: first three insertions come from EC, AC, CN in turn.
  {
    auto t = grid_table(10, 5, 0);
    t.grid[7][0] = "Alpha";
    t.grid[5][3] = "Beta";
    t.metadata.column_names = extraction::Row{"Name", "x", "Gamma", "y", "z"};
    const auto snip = snippet::generate(t, {"alpha", "beta", "gamma"}, 4, 4);
    std::vector<const TraceStep *> inserted;
    for (const auto &step : snip.trace) {
      if (step.inserted) inserted.push_back(&step);
    }
    const bool order = inserted.size() >= 3 && inserted[0]->source == TraceStep::Source::EC &&
                       inserted[0]->is_row && inserted[0]->index == 7 &&
                       inserted[2]->source == TraceStep::Source::AC && inserted[2]->is_row &&
                       inserted[2]->index == 5;
    const auto cn = std::find_if(inserted.begin(), inserted.end(),
                                 [](const TraceStep *p) { return p->source == TraceStep::Source::CN; });
    expect(order && cn != inserted.end() && (*cn)->index == 2, "round-robin insertion order");
    expect(snip.rows == Idx{0, 1, 5, 7} && snip.cols == Idx{0, 1, 2, 3}, "round-robin result");
  }

  // Subject column forced in, evicting the last inserted column.
  {
    auto t = grid_table(5, 5, 0);
    t.grid[1][2] = "Left";
    t.grid[2][3] = "Right";
    const auto snip = snippet::generate(t, {"left", "right"}, 2, 2);
    expect(snip.cols == Idx{0, 2}, "subject column inclusion");
  }

  // Exclusivity: a cell word also present in metadata is not a match.
  {
    extraction::ExtractedTable t;
    t.metadata.page_title = "Largest cities by population";
    t.metadata.column_names = extraction::Row{"Rank", "Name", "Population"};
    t.grid = {{"1", "Los Angeles", "3,898,747"}, {"2", "San Diego", "1,386,932"}, {"3", "Lake City", "12,000"}};
    t.subject_col = 1;
    const auto blocked = snippet::find_matches({"cities", "by", "population"}, t);
    expect(blocked.ec.empty() && blocked.ac.empty(), "Salt Lake City safeguard blocks metadata words");
    t.metadata.page_title = "Largest places";
    const auto open = snippet::find_matches({"cities", "by", "population"}, t);
    expect(open.ec.size() == 1 && open.ec.front().row == 2, "exclusive cell word matches");
  }

  // Default fill: top-m rows and leftmost-n eligible columns.
  {
    const auto snip = snippet::generate(grid_table(10, 5, 0), {"nothing"}, 4, 4);
    expect(snip.rows == Idx{0, 1, 2, 3} && snip.cols == Idx{0, 1, 2, 3}, "default top-m/leftmost-n");
    const auto right = snippet::generate(grid_table(10, 5, 4), {}, 4, 4);
    expect(right.cols == Idx{0, 1, 2, 4}, "default fill keeps the subject column");
  }

  std::string detail = failed.empty() ? "all trace checks exact" : "failed:";
  for (const auto &f : failed) detail += " [" + f + "]";
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------- determinism

Outcome criterion_determinism() {
  const auto root = testing::scratch_dir("acc_determinism");
  testing::write_corpus(root / "corpus", testing::dominance_benchmark(7, 4, "d"));
  pipeline::Config cfg = benchmark_config();
  cfg.cdssm_training.epochs = 3;
  pipeline::write_file(root / "config.json", pipeline::to_json(cfg).dump(2));
  const std::string cli = TABLEQA_CLI;
  const std::string common =
      " --corpus " + (root / "corpus").string() + " --config " + (root / "config.json").string();

  auto run = [&](const std::string &tag) {
    const std::string out = (root / tag).string();
    const std::string model = out + "/model.json";
    const std::vector<std::string> cmds{
        cli + " extract" + common + " --out " + out,
        cli + " train" + common + " --out " + out,
        cli + " features" + common + " --model " + model + " --out " + out,
        cli + " evaluate" + common + " --model " + model + " --out " + out,
        cli + " answer" + common + " --model " + model + " --query-id d1 --out " + out,
    };
    for (const auto &c : cmds) {
      if (std::system((c + " > /dev/null").c_str()) != 0) return false;
    }
    return true;
  };
  if (!run("run1") || !run("run2")) return {false, "a pipeline command failed"};

  std::size_t files = 0;
  std::vector<std::string> differing;
  for (const auto &entry : fs::directory_iterator(root / "run1")) {
    const auto name = entry.path().filename();
    ++files;
    if (!fs::exists(root / "run2" / name) ||
        pipeline::read_file(entry.path()) != pipeline::read_file(root / "run2" / name)) {
      differing.push_back(name.string());
    }
  }
  for (const char *needed : {"model.json", "features.jsonl", "answer.json", "classifier_pr.csv", "selector_pr.csv"}) {
    if (!fs::exists(root / "run1" / needed)) differing.push_back(std::string("missing ") + needed);
  }
  std::string detail = std::to_string(files) + " artifacts compared";
  for (const auto &d : differing) detail += ", differs: " + d;
  return {differing.empty(), detail};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    std::string name;
    std::function<Outcome()> run;
    double budget_s;  // 0: no runtime bound
  };
  const std::vector<Entry> entries{
      {1, "dominance exactness", criterion_dominance, 1.0},
      {2, "C-DSSM gradient check", criterion_grad_check, 30.0},
      {3, "TM EM monotone and normalized", criterion_tm_em, 5.0},
      {4, "BM25 oracle", criterion_bm25, 0.0},
      {5, "baseline-failure reproduction", criterion_baseline_failure, 120.0},
      {6, "ablation ordering", criterion_ablation_ordering, 0.0},
      {7, "selector/eval oracle equivalence", criterion_eval_oracles, 0.0},
      {8, "snippet conformance", criterion_snippet, 0.0},
      {9, "determinism", criterion_determinism, 0.0},
  };
  int failures = 0;
  for (const auto &e : entries) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception &ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (e.budget_s > 0 && secs >= e.budget_s) {
      o.pass = false;
      o.detail += "; over the " + fmt(e.budget_s) + " s budget";
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << e.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << e.name << ": " << o.detail
              << " (" << fmt(secs) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
