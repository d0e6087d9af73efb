#include "kaczmarz/jl_sketch.hpp"

#include <cmath>
#include <utility>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/rng.hpp"
#include "eigen_util.hpp"

namespace kaczmarz::jl {

std::size_t default_sketch_dim(std::size_t p) {
  const double ln_p = std::log(static_cast<double>(p));
  const auto dim = static_cast<std::size_t>(std::ceil(4.0 * ln_p));
  return std::max<std::size_t>(10, dim);
}

namespace {

JLSketch finish_sketch(const DenseMatrix& a, DenseMatrix phi,
                       std::uint64_t seed) {
  if (phi.n_cols() != a.n_cols())
    throw DimensionError("build_sketch: phi columns != A columns");
  JLSketch s;
  s.d = phi.n_rows();
  s.seed = seed;
  const auto phi_e = detail::as_eigen(phi);
  const auto a_e = detail::as_eigen(a);
  s.sketched_rows = detail::from_eigen(a_e * phi_e.transpose());
  s.sketched_row_norms = row_norms(s.sketched_rows);
  s.phi = std::move(phi);
  return s;
}

}  // namespace

JLSketch build_sketch(const DenseMatrix& a, std::size_t d, std::uint64_t seed) {
  if (d == 0) throw DimensionError("build_sketch: d must be positive");
  Rng rng(seed);
  DenseMatrix phi(d, a.n_cols());
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : phi.entries()) v = scale * rng.gaussian();
  return finish_sketch(a, std::move(phi), seed);
}

JLSketch build_sketch_with_phi(const DenseMatrix& a, DenseMatrix phi) {
  return finish_sketch(a, std::move(phi), 0);
}

Vector sketch_point(const JLSketch& s, std::span<const double> x) {
  if (x.size() != s.phi.n_cols())
    throw DimensionError("sketch_point: x length != p");
  Vector out(s.d);
  for (std::size_t i = 0; i < s.d; ++i) out[i] = dot(s.phi.row(i), x);
  return out;
}

double sketched_gamma(const JLSketch& s, std::size_t i,
                      std::span<const double> x_hat, double b_i) {
  if (i >= s.sketched_rows.n_rows())
    throw DimensionError("sketched_gamma: row index out of range");
  if (x_hat.size() != s.d)
    throw DimensionError("sketched_gamma: x_hat length != d");
  const double nrm = s.sketched_row_norms[i];
  if (nrm == 0.0)
    throw DegenerateRowError("sketched_gamma: sketched row " +
                             std::to_string(i) + " has zero norm");
  return std::abs(b_i - dot(s.sketched_rows.row(i), x_hat)) / nrm;
}

}  // namespace kaczmarz::jl
