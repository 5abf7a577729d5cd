#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tsckit {

// Dense row-major matrix of doubles. Used for feature matrices (n x q),
// classifier scores and class probabilities (n x C).
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  bool operator==(const FeatureMatrix&) const = default;

  // Copies the given columns, preserving their order.
  FeatureMatrix select_columns(const std::vector<uint32_t>& columns) const {
    FeatureMatrix out(rows, columns.size());
    for (std::size_t r = 0; r < rows; ++r) {
      const double* src = row(r);
      double* dst = out.row(r);
      for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] >= cols) throw std::out_of_range("select_columns: column index out of range");
        dst[j] = src[columns[j]];
      }
    }
    return out;
  }

  // Horizontal concatenation: [this | other], row counts must match.
  FeatureMatrix hcat(const FeatureMatrix& other) const {
    if (rows != other.rows) throw std::invalid_argument("hcat: row count mismatch");
    FeatureMatrix out(rows, cols + other.cols);
    for (std::size_t r = 0; r < rows; ++r) {
      double* dst = out.row(r);
      const double* a = row(r);
      const double* b = other.row(r);
      for (std::size_t j = 0; j < cols; ++j) dst[j] = a[j];
      for (std::size_t j = 0; j < other.cols; ++j) dst[cols + j] = b[j];
    }
    return out;
  }
};

// Per-row argmax (ties to lowest column index). Used to turn score /
// probability matrices into labels.
inline std::vector<uint32_t> argmax_rows(const FeatureMatrix& scores) {
  std::vector<uint32_t> labels(scores.rows);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    const double* row = scores.row(i);
    uint32_t best = 0;
    for (std::size_t c = 1; c < scores.cols; ++c)
      if (row[c] > row[best]) best = static_cast<uint32_t>(c);
    labels[i] = best;
  }
  return labels;
}

}  // namespace tsckit
