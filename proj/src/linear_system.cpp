#include "kaczmarz/linear_system.hpp"

#include <cmath>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"

namespace kaczmarz {

void LinearSystem::validate() const {
  if (b.size() != A.n_rows())
    throw DimensionError("LinearSystem: b length != n_rows");
  if (x_star && x_star->size() != A.n_cols())
    throw DimensionError("LinearSystem: x_star length != n_cols");
  if (e && e->size() != A.n_rows())
    throw DimensionError("LinearSystem: e length != n_rows");
  if (!A.all_finite())
    throw DimensionError("LinearSystem: non-finite entry in A");
  for (double v : b)
    if (!std::isfinite(v)) throw DimensionError("LinearSystem: non-finite b");
  if (x_star && e) {
    double diff_sq = 0.0;
    for (std::size_t i = 0; i < A.n_rows(); ++i) {
      const double d = dot(A.row(i), *x_star) - b[i] - (*e)[i];
      diff_sq += d * d;
    }
    if (std::sqrt(diff_sq) > 1e-9)
      throw DimensionError("LinearSystem: e inconsistent with A·x_star − b");
  }
}

double residual_norm(const LinearSystem& sys, std::span<const double> x) {
  if (x.size() != sys.A.n_cols())
    throw DimensionError("residual_norm: x length != n_cols");
  double acc = 0.0;
  for (std::size_t i = 0; i < sys.A.n_rows(); ++i) {
    const double r = dot(sys.A.row(i), x) - sys.b[i];
    acc += r * r;
  }
  return std::sqrt(acc);
}

double relative_residual(const LinearSystem& sys, std::span<const double> x) {
  const double b_norm = norm2(sys.b);
  const double r = residual_norm(sys, x);
  return b_norm > 0.0 ? r / b_norm : r;
}

LinearSystem normalize_system_rows(const LinearSystem& sys) {
  LinearSystem out = sys;
  for (std::size_t i = 0; i < sys.A.n_rows(); ++i) {
    const double nrm = norm2(sys.A.row(i));
    if (nrm == 0.0)
      throw DegenerateRowError("normalize_system_rows: zero row " +
                               std::to_string(i));
    for (double& v : out.A.row(i)) v /= nrm;
    out.b[i] /= nrm;
    if (out.e) (*out.e)[i] /= nrm;
  }
  return out;
}

}  // namespace kaczmarz
