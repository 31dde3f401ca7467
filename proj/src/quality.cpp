#include "tableqa/quality.hpp"

#include <algorithm>
#include <array>

namespace tableqa::quality {

CellType classify_cell(std::string_view cell) {
  if (extraction::is_numeric_cell(cell)) return CellType::Number;
  bool digit = std::any_of(cell.begin(), cell.end(), [](char c) { return c >= '0' && c <= '9'; });
  return digit ? CellType::StringWithDigits : CellType::String;
}

double type_consistency(const extraction::Grid &grid, std::size_t col) {
  std::array<std::size_t, 3> counts{};
  std::size_t non_empty = 0;
  for (const auto &row : grid) {
    if (row[col].empty()) continue;
    ++non_empty;
    ++counts[static_cast<std::size_t>(classify_cell(row[col]))];
  }
  if (non_empty == 0) return 0.0;
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(non_empty);
}

QualityFeatures compute_quality(const extraction::ExtractedTable &t) {
  QualityFeatures q;
  q.n_rows = t.rows();
  q.n_cols = t.cols();
  q.has_column_names = t.metadata.column_names.has_value();

  std::size_t empty = 0;
  for (const auto &row : t.grid) empty += static_cast<std::size_t>(std::count(row.begin(), row.end(), ""));
  const std::size_t cells = q.n_rows * q.n_cols;
  q.empty_cell_fraction = cells == 0 ? 0.0 : static_cast<double>(empty) / static_cast<double>(cells);

  for (std::size_t c = 0; c < q.n_cols; ++c) {
    if (extraction::is_numeric_column(t.grid, c)) ++q.numeric_column_count;
  }
  q.has_numeric_column = q.numeric_column_count > 0;
  if (t.subject_col) q.subject_distinct_fraction = extraction::distinct_fraction(t.grid, *t.subject_col);

  if (q.n_cols > 0) {
    double sum = 0.0;
    double lowest = 1.0;
    for (std::size_t c = 0; c < q.n_cols; ++c) {
      double consistency = type_consistency(t.grid, c);
      sum += consistency;
      lowest = std::min(lowest, consistency);
    }
    q.type_consistency_mean = sum / static_cast<double>(q.n_cols);
    q.type_consistency_min = lowest;
  }
  return q;
}

}  // namespace tableqa::quality
