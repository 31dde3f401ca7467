#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tableqa/docmap.hpp"
#include "tableqa/extraction.hpp"

namespace tableqa::snippet {

/// Query token -> synonyms, all in match form.
using Synonyms = std::map<std::string, std::set<std::string>>;

/// One entry per non-empty line: "word: syn1 syn2 ...". Lines starting with
/// '#' are comments. Throws std::invalid_argument naming the bad line.
Synonyms parse_synonyms(std::string_view text);

/// Token form used for keyword matching: a light plural fold so that
/// "cities" and "city" meet.
std::string match_form(std::string_view token);

struct Match {
  std::size_t row = 0;  // unused for column-name matches
  std::size_t col = 0;
  double desirability = 0.0;
};

struct MatchLists {
  std::vector<Match> ec;  // subject-column cells
  std::vector<Match> ac;  // other cells
  std::vector<Match> cn;  // column names
};

inline constexpr double kCoverage = 0.5;
inline constexpr double kSynonymWeight = 0.5;

MatchLists find_matches(const docmap::Tokens &query, const extraction::ExtractedTable &t,
                        const Synonyms &synonyms = {});

/// Union_m: adds y only while the set holds fewer than `cap` elements.
void union_bounded(std::vector<std::size_t> &set, std::size_t y, std::size_t cap);

struct TraceStep {
  enum class Source { EC, AC, CN };
  Source source;
  bool is_row;
  std::size_t index;
  bool inserted;
};

struct Snippet {
  std::vector<std::size_t> rows;  // ascending
  std::vector<std::size_t> cols;  // original column order
  std::vector<std::string> column_names;
  std::vector<std::vector<std::string>> cells;
  std::string title;
  std::string url;
  std::vector<TraceStep> trace;  // matched-cell loop only
};

/// Columns the default fill may use: empty-cell fraction <= 0.5 and
/// distinct-value fraction >= 0.2.
bool fill_eligible(const extraction::Grid &grid, std::size_t col);

Snippet generate(const extraction::ExtractedTable &t, const docmap::Tokens &query, std::size_t m = 4,
                 std::size_t n = 4, const Synonyms &synonyms = {});

nlohmann::json to_json(const Snippet &s);

}  // namespace tableqa::snippet
