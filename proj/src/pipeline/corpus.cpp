#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tableqa/pipeline.hpp"

namespace tableqa::pipeline {

namespace {

using nlohmann::json;

struct JsonLine {
  std::size_t line;
  json value;
};

std::vector<JsonLine> read_jsonl(const fs::path &path, const std::string &display) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("missing_file", "cannot open " + display, display);
  std::vector<JsonLine> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back({line, json::parse(text)});
    } catch (const json::exception &e) {
      throw PipelineError("parse_error", e.what(), display, line);
    }
    if (!out.back().value.is_object()) throw PipelineError("parse_error", "expected a JSON object", display, line);
  }
  return out;
}

template <typename T>
T field(const JsonLine &l, const char *name, const std::string &file) {
  if (!l.value.contains(name)) throw PipelineError("missing_field", std::string("missing field '") + name + "'", file, l.line);
  try {
    return l.value.at(name).get<T>();
  } catch (const json::exception &) {
    throw PipelineError("bad_field", std::string("field '") + name + "' has the wrong type", file, l.line);
  }
}

std::vector<DocumentRef> parse_docs(const JsonLine &l, const std::string &file) {
  if (!l.value.contains("docs") || !l.value.at("docs").is_array()) {
    throw PipelineError("missing_field", "missing field 'docs'", file, l.line);
  }
  std::vector<DocumentRef> docs;
  int position = 0;
  for (const auto &d : l.value.at("docs")) {
    ++position;
    DocumentRef ref;
    if (d.is_string()) {
      ref.path = d.get<std::string>();
      ref.rank = position;
    } else if (d.is_object() && d.contains("path") && d.at("path").is_string()) {
      ref.path = d.at("path").get<std::string>();
      ref.rank = d.contains("rank") ? d.at("rank").get<int>() : position;
      ref.url = d.value("url", std::string());
    } else {
      throw PipelineError("bad_field", "document entries must be paths or {path, rank, url} objects", file, l.line);
    }
    docs.push_back(std::move(ref));
  }
  std::stable_sort(docs.begin(), docs.end(), [](const auto &a, const auto &b) { return a.rank < b.rank; });
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].rank < 1) throw PipelineError("bad_field", "document ranks start at 1", file, l.line);
    if (i > 0 && docs[i].rank == docs[i - 1].rank) {
      throw PipelineError("duplicate_rank", "duplicate document rank " + std::to_string(docs[i].rank), file, l.line);
    }
    if (docs[i].rank != static_cast<int>(i + 1)) {
      throw PipelineError("rank_gap", "rank gap: expected rank " + std::to_string(i + 1) + ", found " +
                                          std::to_string(docs[i].rank), file, l.line);
    }
  }
  return docs;
}

}  // namespace

PipelineError::PipelineError(std::string code, const std::string &message, std::string file, std::size_t line)
    : std::runtime_error(message), code_(std::move(code)), file_(std::move(file)), line_(line) {}

nlohmann::json PipelineError::record() const {
  json j{{"schema_version", 1}, {"error", code_}, {"message", what()}};
  if (!file_.empty()) j["file"] = file_;
  if (line_ > 0) j["line"] = line_;
  return j;
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("missing_file", "cannot open " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path &path, const std::string &content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("io_error", "cannot write " + path.string(), path.string());
  out << content;
}

const QueryEntry &Corpus::query(const std::string &id) const {
  for (const auto &q : queries) {
    if (q.id == id) return q;
  }
  throw PipelineError("unknown_query", "no query with id '" + id + "'", "queries.jsonl");
}

std::optional<int> Corpus::label(const features::TableKey &key) const {
  auto it = labels.find(key);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

Corpus ingest_corpus(const fs::path &root, const IngestOptions &options) {
  Corpus corpus;
  corpus.root = root;
  const std::string queries_file = "queries.jsonl";
  if (!fs::exists(root / queries_file)) {
    throw PipelineError("missing_file", "corpus has no queries.jsonl", (root / queries_file).string());
  }

  std::set<std::string> ids;
  for (const auto &l : read_jsonl(root / queries_file, queries_file)) {
    QueryEntry q;
    q.id = field<std::string>(l, "id", queries_file);
    q.text = field<std::string>(l, "text", queries_file);
    if (q.id.empty()) throw PipelineError("bad_field", "query id is empty", queries_file, l.line);
    if (!ids.insert(q.id).second) throw PipelineError("duplicate_query", "duplicate query id " + q.id, queries_file, l.line);
    q.docs = parse_docs(l, queries_file);
    if (options.max_docs > 0 && q.docs.size() > options.max_docs) q.docs.resize(options.max_docs);
    for (const auto &d : q.docs) {
      const fs::path p = root / d.path;
      if (!fs::is_regular_file(p)) {
        throw PipelineError("missing_document", "document not found: " + d.path, queries_file, l.line);
      }
      auto tables = extraction::extract_candidate_tables(read_file(p), d.url, d.rank);
      q.tables.insert(q.tables.end(), std::make_move_iterator(tables.begin()), std::make_move_iterator(tables.end()));
    }
    corpus.k = std::max(corpus.k, q.docs.size());
    corpus.queries.push_back(std::move(q));
  }

  const std::string labels_file = "labels.jsonl";
  if (options.load_labels && fs::exists(root / labels_file)) {
    for (const auto &l : read_jsonl(root / labels_file, labels_file)) {
      features::TableKey key{field<std::string>(l, "query_id", labels_file), field<int>(l, "doc_rank", labels_file),
                             field<int>(l, "table_index", labels_file)};
      const int label = field<int>(l, "label", labels_file);
      if (label != 0 && label != 1) throw PipelineError("invalid_label", "label must be 0 or 1", labels_file, l.line);
      if (!ids.count(key.query_id)) {
        throw PipelineError("unknown_query", "label references unknown query " + key.query_id, labels_file, l.line);
      }
      const auto &tables = corpus.query(key.query_id).tables;
      const bool exists = std::any_of(tables.begin(), tables.end(), [&](const auto &t) {
        return t.doc_rank == key.doc_rank && t.table_index == key.table_index;
      });
      if (!exists) {
        throw PipelineError("unknown_table",
                            "label references nonexistent table (doc_rank " + std::to_string(key.doc_rank) +
                                ", table_index " + std::to_string(key.table_index) + ")",
                            labels_file, l.line);
      }
      if (!corpus.labels.emplace(key, label).second) {
        throw PipelineError("duplicate_label", "duplicate label", labels_file, l.line);
      }
    }
  }

  const std::string clicks_file = "clicks.jsonl";
  if (fs::exists(root / clicks_file)) {
    for (const auto &l : read_jsonl(root / clicks_file, clicks_file)) {
      corpus.clicks.push_back({field<std::string>(l, "query", clicks_file), field<std::string>(l, "doc", clicks_file)});
    }
  }
  return corpus;
}

bool passes_filter(const QueryEntry &q, const DatasetFilter &filter) {
  if (!filter.enabled) return true;
  return std::any_of(q.tables.begin(), q.tables.end(), [&](const auto &t) {
    return t.doc_rank <= static_cast<int>(filter.top_docs) && t.dominance.frac_cleaned > filter.min_fraction;
  });
}

}  // namespace tableqa::pipeline
