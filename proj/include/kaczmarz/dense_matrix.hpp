#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kaczmarz/errors.hpp"

namespace kaczmarz {

/// Dense real matrix, row-major storage.
///
/// The carrier for the data matrix A, row blocks A_tau, sketch matrices and
/// centroid matrices. Entries are expected to be finite; IO and system
/// constructors enforce this via all_finite().
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t n_rows, std::size_t n_cols)
      : rows_(n_rows), cols_(n_cols), entries_(n_rows * n_cols, 0.0) {
    if (n_rows == 0 || n_cols == 0)
      throw DimensionError("DenseMatrix: dimensions must be positive");
  }

  DenseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> entries)
      : rows_(n_rows), cols_(n_cols), entries_(std::move(entries)) {
    if (n_rows == 0 || n_cols == 0)
      throw DimensionError("DenseMatrix: dimensions must be positive");
    if (entries_.size() != rows_ * cols_)
      throw DimensionError("DenseMatrix: entry count does not match shape");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t n_rows() const { return rows_; }
  std::size_t n_cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }

  std::vector<double>& entries() { return entries_; }
  const std::vector<double>& entries() const { return entries_; }

  bool all_finite() const {
    for (double v : entries_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

using Vector = std::vector<double>;

}  // namespace kaczmarz
