#include "kaczmarz/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kaczmarz/errors.hpp"
#include "eigen_util.hpp"

namespace kaczmarz {

namespace detail {

Eigen::VectorXd singular_values(const DenseMatrix& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(as_eigen(m));
  if (svd.info() != Eigen::Success)
    throw ComputationError("singular_values: SVD did not converge");
  return svd.singularValues();
}

}  // namespace detail

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double norm2_sq(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double norm2(std::span<const double> x) { return std::sqrt(norm2_sq(x)); }

Vector row_norms(const DenseMatrix& a) {
  Vector out(a.n_rows());
  for (std::size_t i = 0; i < a.n_rows(); ++i) out[i] = norm2(a.row(i));
  return out;
}

double frobenius_norm_sq(const DenseMatrix& a) {
  return norm2_sq(a.entries());
}

Vector least_norm_solve(const DenseMatrix& m, std::span<const double> r) {
  if (r.size() != m.n_rows())
    throw DimensionError("least_norm_solve: rhs length != n_rows");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      detail::as_eigen(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw ComputationError("least_norm_solve: SVD did not converge");
  svd.setThreshold(static_cast<double>(std::max(m.n_rows(), m.n_cols())) *
                   std::numeric_limits<double>::epsilon());
  Eigen::VectorXd z = svd.solve(detail::as_eigen(r));
  return {z.data(), z.data() + z.size()};
}

double spectral_norm(const DenseMatrix& m) {
  return detail::singular_values(m)(0);
}

double min_singular_value(const DenseMatrix& m) {
  const Eigen::VectorXd s = detail::singular_values(m);
  return s(s.size() - 1);
}

double condition_number_gram(const DenseMatrix& a) {
  if (a.n_rows() > a.n_cols())
    throw SingularGramError(
        "condition_number_gram: more rows than columns, Gram matrix is "
        "rank-deficient");
  const Eigen::VectorXd s = detail::singular_values(a);
  const double s_max = s(0);
  const double s_min = s(s.size() - 1);
  const double tol = static_cast<double>(std::max(a.n_rows(), a.n_cols())) *
                     std::numeric_limits<double>::epsilon() * s_max;
  if (s_min <= tol)
    throw SingularGramError("condition_number_gram: Gram matrix numerically "
                            "singular");
  const double ratio = s_max / s_min;
  return ratio * ratio;
}

DenseMatrix normalize_rows(const DenseMatrix& a) {
  DenseMatrix out = a;
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    const double nrm = norm2(a.row(i));
    if (nrm == 0.0)
      throw DegenerateRowError("normalize_rows: zero row " + std::to_string(i));
    for (double& v : out.row(i)) v /= nrm;
  }
  return out;
}

double orthogonality_value(const DenseMatrix& a) {
  if (a.n_rows() < 2)
    throw DimensionError("orthogonality_value: need at least two rows");
  const DenseMatrix hat = normalize_rows(a);
  double ov = 0.0;
  for (std::size_t i = 0; i + 1 < hat.n_rows(); ++i)
    for (std::size_t j = i + 1; j < hat.n_rows(); ++j)
      ov = std::max(ov, std::abs(dot(hat.row(i), hat.row(j))));
  return std::min(ov, 1.0);
}

}  // namespace kaczmarz
