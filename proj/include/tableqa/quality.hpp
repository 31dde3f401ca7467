#pragma once

#include <cstddef>
#include <string_view>

#include "tableqa/extraction.hpp"

namespace tableqa::quality {

enum class CellType { Number, String, StringWithDigits };

CellType classify_cell(std::string_view cell);

/// Query-independent syntactic properties of a table.
struct QualityFeatures {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  double empty_cell_fraction = 0.0;
  bool has_column_names = false;
  bool has_numeric_column = false;
  std::size_t numeric_column_count = 0;
  double subject_distinct_fraction = 0.0;
  double type_consistency_mean = 0.0;
  double type_consistency_min = 0.0;
};

/// Share of non-empty cells that belong to the column's majority type.
/// An all-empty column scores 0.
double type_consistency(const extraction::Grid &grid, std::size_t col);

QualityFeatures compute_quality(const extraction::ExtractedTable &t);

}  // namespace tableqa::quality
