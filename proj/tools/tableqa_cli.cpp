#include <iostream>

#include <CLI11.hpp>

#include "tableqa/pipeline.hpp"

namespace pl = tableqa::pipeline;

int main(int argc, char **argv) {
  CLI::App app{"Table answer selection: extract, train, evaluate and answer over a document corpus"};
  app.require_subcommand(1);
  pl::Options o;

  auto common = [&](CLI::App *sub) {
    sub->add_option("--corpus", o.corpus, "Corpus root directory");
    sub->add_option("--config", o.config, "Config JSON file");
    sub->add_option("--model", o.model, "Model bundle JSON file");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto *extract = app.add_subcommand("extract", "Write every candidate table as JSONL");
  auto *features = app.add_subcommand("features", "Write query-table feature vectors as JSONL");
  auto *train = app.add_subcommand("train", "Train similarity models and the classifier");
  auto *evaluate = app.add_subcommand("evaluate", "Write classifier and selector precision/recall curves");
  auto *answer = app.add_subcommand("answer", "Answer one query with a table snippet or a no-answer record");
  auto *inspect = app.add_subcommand("inspect", "Summarize a corpus and/or a model bundle");
  for (auto *sub : {extract, features, train, evaluate, answer, inspect}) common(sub);
  answer->add_option("--query-id", o.query_id, "Query id from the corpus");
  answer->add_option("--query", o.query, "Free query text");
  answer->add_option("--doc", o.docs, "HTML documents in rank order (with --query)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) pl::run_extract(o);
    if (features->parsed()) pl::run_features(o);
    if (train->parsed()) pl::run_train(o);
    if (evaluate->parsed()) pl::run_evaluate(o);
    if (answer->parsed()) pl::run_answer(o);
    if (inspect->parsed()) pl::run_inspect(o);
  } catch (const pl::PipelineError &e) {
    std::cerr << e.record().dump() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << nlohmann::json{{"schema_version", 1}, {"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  return 0;
}
