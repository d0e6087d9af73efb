#pragma once

#include <cstdint>
#include <span>

#include "kaczmarz/dense_matrix.hpp"

namespace kaczmarz::jl {

/// Gaussian sketch of the rows of A. phi is d×p with entries N(0, 1/d), so
/// sketched inner products estimate true inner products directly, and
/// sketched_rows row i = phi · A_i with its norm cached.
struct JLSketch {
  std::size_t d = 0;
  DenseMatrix phi;
  DenseMatrix sketched_rows;
  Vector sketched_row_norms;
  std::uint64_t seed = 0;
};

/// Default sketch dimension max(10, ceil(4·ln p)).
std::size_t default_sketch_dim(std::size_t p);

JLSketch build_sketch(const DenseMatrix& a, std::size_t d, std::uint64_t seed);

/// Test hook: build the sketch around a caller-supplied phi (e.g. the
/// identity when d = p), so selection logic can be exercised without
/// stochastic slack.
JLSketch build_sketch_with_phi(const DenseMatrix& a, DenseMatrix phi);

/// x̂ = phi · x.
Vector sketch_point(const JLSketch& s, std::span<const double> x);

/// γ_i = |b_i − ⟨α_i, x̂⟩| / ‖α_i‖₂ where α_i is sketched row i.
double sketched_gamma(const JLSketch& s, std::size_t i,
                      std::span<const double> x_hat, double b_i);

}  // namespace kaczmarz::jl
