#pragma once

#include <Eigen/Dense>
#include <span>

#include "kaczmarz/dense_matrix.hpp"

namespace kaczmarz::detail {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const RowMajorMatrix> as_eigen(const DenseMatrix& m) {
  return {m.entries().data(), static_cast<Eigen::Index>(m.n_rows()),
          static_cast<Eigen::Index>(m.n_cols())};
}

inline Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()),
                  static_cast<std::size_t>(m.cols()));
  RowMajorMatrix::Map(out.entries().data(), m.rows(), m.cols()) = m;
  return out;
}

/// Singular values of m, descending. Throws ComputationError on failure.
Eigen::VectorXd singular_values(const DenseMatrix& m);

}  // namespace kaczmarz::detail
