#pragma once

#include <optional>
#include <span>

#include "kaczmarz/dense_matrix.hpp"

namespace kaczmarz {

/// A linear system Ax = b, optionally carrying the generating ground truth
/// x* and the noise vector e = A·x* − b (zero for consistent systems).
struct LinearSystem {
  DenseMatrix A;
  Vector b;
  std::optional<Vector> x_star;
  std::optional<Vector> e;

  std::size_t n_rows() const { return A.n_rows(); }
  std::size_t n_cols() const { return A.n_cols(); }

  /// Checks dimensions, finiteness, and (when x_star and e are both
  /// present) ‖(A·x_star − b) − e‖ ≤ 1e-9. Throws DimensionError.
  void validate() const;
};

/// ‖Ax − b‖₂.
double residual_norm(const LinearSystem& sys, std::span<const double> x);

/// ‖Ax − b‖₂ / ‖b‖₂, or the absolute residual when b = 0.
double relative_residual(const LinearSystem& sys, std::span<const double> x);

/// The same system with every equation rescaled to a unit-norm row:
/// A_i/‖A_i‖, b_i/‖A_i‖, e_i/‖A_i‖. The solution set and x_star are
/// unchanged. Throws DegenerateRowError on a zero row.
LinearSystem normalize_system_rows(const LinearSystem& sys);

}  // namespace kaczmarz
