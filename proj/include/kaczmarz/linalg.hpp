#pragma once

#include <span>
#include <vector>

#include "kaczmarz/dense_matrix.hpp"

namespace kaczmarz {

/// Euclidean norm of each row.
Vector row_norms(const DenseMatrix& a);

/// Squared Frobenius norm; equals the sum of squared row norms.
double frobenius_norm_sq(const DenseMatrix& a);

/// Minimum-norm solution of min ||M z - r||_2, via SVD with singular values
/// below max(rows, cols) * eps * sigma_max treated as zero.
/// Throws ComputationError if the SVD fails to converge.
Vector least_norm_solve(const DenseMatrix& m, std::span<const double> r);

/// Largest singular value.
double spectral_norm(const DenseMatrix& m);

/// Smallest singular value (of the min(rows, cols) spectrum).
double min_singular_value(const DenseMatrix& m);

/// Condition number of the Gram matrix A A^T, computed from the singular
/// values of A itself: sigma(AA^T) = sigma(A)^2. Throws SingularGramError
/// when AA^T is numerically singular (including n_rows > n_cols).
double condition_number_gram(const DenseMatrix& a);

/// Max absolute pairwise inner product between normalized rows, clamped to
/// [0, 1]. Requires at least two rows and no zero row.
double orthogonality_value(const DenseMatrix& a);

/// Each row scaled to unit Euclidean norm. Throws DegenerateRowError on a
/// zero row.
DenseMatrix normalize_rows(const DenseMatrix& a);

// Small vector kernels shared across modules.
double dot(std::span<const double> x, std::span<const double> y);
double norm2_sq(std::span<const double> x);
double norm2(std::span<const double> x);

}  // namespace kaczmarz
