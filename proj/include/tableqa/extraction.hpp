#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tableqa/html.hpp"

namespace tableqa::extraction {

using Row = std::vector<std::string>;
using Grid = std::vector<Row>;

struct TableMetadata {
  std::string url;
  std::string page_title;
  std::string h1_heading;
  std::vector<std::string> section_headings;  // h2, h3, h4 chain, outermost first
  std::string preceding_text;
  std::string caption;
  std::optional<Row> header_row;
  std::optional<Row> footer_row;
  std::optional<Row> column_names;
};

/// Byte counts behind the dominance fractions. All counts are UTF-8 bytes.
struct DominanceCounts {
  std::size_t table_raw = 0;
  std::size_t before_raw = 0;
  std::size_t total_raw = 0;
  std::size_t table_cleaned = 0;
  std::size_t before_cleaned = 0;
  std::size_t total_cleaned = 0;
  std::size_t before_main = 0;     // cleaned bytes between container content start and table start
  std::size_t container_main = 0;  // cleaned bytes of the main container's content
};

struct DominanceFeatures {
  double frac_raw = 0.0;
  double frac_cleaned = 0.0;
  double frac_main = 0.0;
  double pos_raw = 0.0;
  double pos_cleaned = 0.0;
  double pos_main = 0.0;
  int table_index = 1;
};

struct ExtractedTable {
  Grid grid;  // data rows only; header/footer rows live in metadata
  TableMetadata metadata;
  std::optional<std::size_t> subject_col;
  int doc_rank = 1;
  int table_index = 1;
  DominanceFeatures dominance;

  std::size_t rows() const { return grid.size(); }
  std::size_t cols() const { return grid.empty() ? 0 : grid.front().size(); }
};

/// Span-expanded view of a <table> element before header/footer separation.
struct TableLayout {
  enum class Section { Head, Body, Foot };
  Grid cells;                           // every row, rectangular
  std::vector<Section> row_sections;    // parallel to cells
  std::vector<bool> row_all_header;     // row made only of <th> cells
};

/// Structural facts about the table element the grid came from.
struct TableContext {
  bool has_nested_table = false;
  bool presentation_role = false;
};

TableLayout build_layout(const html::DomTree &dom, html::NodeId table);
TableContext table_context(const html::DomTree &dom, html::NodeId table);

/// Relational-table heuristics over a span-expanded grid:
///   H1  >= 2 rows and >= 2 columns
///   H2  no cell holds a nested table
///   H3  at most half the cells are empty
///   H4  median cell length <= 100 bytes
///   H5  not role="presentation", and >= 2 non-empty columns with distinct content
bool is_relational(const Grid &grid, const TableContext &context);

TableMetadata extract_metadata(const html::DomTree &dom, html::NodeId table, std::string_view url);

/// A cell is numeric when, after dropping commas, currency symbols and a
/// trailing '%', it parses completely as a number.
bool is_numeric_cell(std::string_view cell);
/// At least 80% of the non-empty cells are numeric. Empty columns are not numeric.
bool is_numeric_column(const Grid &grid, std::size_t col);
bool is_empty_column(const Grid &grid, std::size_t col);
/// Distinct non-empty values over non-empty cells; 0 for an empty column.
double distinct_fraction(const Grid &grid, std::size_t col);

std::optional<std::size_t> detect_subject_column(const Grid &grid);

DominanceCounts dominance_counts(const html::DomTree &dom, std::string_view source, html::NodeId table);
DominanceFeatures compute_dominance(const html::DomTree &dom, std::string_view source, html::NodeId table);

/// Relational tables of one document, in source order, fully populated.
std::vector<ExtractedTable> extract_candidate_tables(const html::DomTree &dom, std::string_view source,
                                                     std::string_view url, int doc_rank);
std::vector<ExtractedTable> extract_candidate_tables(std::string_view source, std::string_view url,
                                                     int doc_rank);

}  // namespace tableqa::extraction
