#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kaczmarz/dense_matrix.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/row_clustering.hpp"

namespace kaczmarz::paving {

/// Spectral summary of one block, computed on the row-normalized block
/// Â_τ: eigenvalue extremes and condition number of Â_τ Â_τᵀ, the spectral
/// norm ‖Â_τ‖₂ = sqrt(λ_max), and the block's orthogonality value (0 for
/// single-row blocks). cond is +inf for a rank-deficient block.
struct BlockSpectrum {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double cond = 0.0;
  double spectral_norm = 0.0;
  double ov = 0.0;
};

/// An (m, α, β) row paving: blocks partition {0,…,n−1}; alpha/beta are the
/// min/max over blocks of λ_min/λ_max of the normalized block Gram.
struct RowPaving {
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t m = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<BlockSpectrum> per_block;
};

/// Seeded random permutation chopped into ⌈n/block_size⌉ consecutive
/// blocks; the last block may be smaller.
RowPaving build_random_paving(const DenseMatrix& a, std::size_t block_size,
                              std::uint64_t seed);

/// One row drawn (seeded, without replacement) from every non-empty cluster
/// per round; as clusters empty, later rounds form smaller blocks from the
/// remaining clusters until every row is used exactly once.
RowPaving build_cluster_paving(const DenseMatrix& a,
                               const clustering::RowClustering& c,
                               std::uint64_t seed);

/// Right-hand side of Lemma 1 together with its pieces:
///   value      = [1 − σ²_min(A)/(βm)]·‖x0 − x*‖² + (β/α)·‖e‖²/σ²_min(A)
///   coefficient  = 1 − σ²_min(A)/(mβ)     (one-step contraction)
///   per_step_noise = ‖e‖²/(mα)            (one-step additive term)
///   noise_floor  = (β/α)·‖e‖²/σ²_min(A)
/// σ_min is taken on the row-normalized A, matching the paving constants.
struct Lemma1Bound {
  double value = 0.0;
  double coefficient = 0.0;
  double per_step_noise = 0.0;
  double noise_floor = 0.0;
  double sigma_min_sq = 0.0;
};

Lemma1Bound lemma1_bound(const DenseMatrix& a, const RowPaving& paving,
                         std::span<const double> x0,
                         std::span<const double> x_star,
                         std::span<const double> e);

/// Theorem 2: with ε = ov(Â) and k rows, ‖ÂÂᵀ‖₂ ≤ 1 + kε.
struct Thm2Result {
  double ov = 0.0;
  std::size_t k = 0;
  double spectral = 0.0;
  double bound = 0.0;
  bool holds = false;
};
Thm2Result check_thm2(const DenseMatrix& a);

/// Theorem 3: with δ = min_{i≠j} |⟨Â_i, Â_j⟩|, ‖ÂÂᵀ‖₂ ≥ 1 + (k−1)δ. The
/// bound requires all pairwise inner products to share a sign; applicable
/// is false when signs are mixed and holds is then not meaningful.
struct Thm3Result {
  double delta = 0.0;
  double spectral = 0.0;
  double bound = 0.0;
  bool applicable = false;
  bool holds = false;
};
Thm3Result check_thm3(const DenseMatrix& a);

/// Theorems 4 and 5: with ε = ov(Â), both the stated form σ_min(ÂÂᵀ) ≥ 1 − ε
/// and the Gershgorin form σ_min(ÂÂᵀ) ≥ 1 − (k−1)ε are evaluated, plus
/// cond(ÂÂᵀ) ≤ (1+kε)/(1−ε) whenever ε < 1. cond is +inf for a singular
/// Gram matrix.
struct Thm45Result {
  double ov = 0.0;
  std::size_t k = 0;
  double sigma_min = 0.0;
  double sigma_min_bound_paper = 0.0;
  double sigma_min_bound_gershgorin = 0.0;
  bool gershgorin_applicable = false;
  double cond = 0.0;
  double cond_bound = 0.0;
  bool cond_bound_defined = false;
  bool holds_paper = false;
  bool holds_gershgorin = false;
  bool holds_cond = false;
};
Thm45Result check_thm4_thm5(const DenseMatrix& a);

/// Theorem 1 Monte Carlo: fraction of i.i.d. Gaussian pairs u, v in ℝ^d
/// with |cos(u,v)| ≤ eps, against the polynomial factor of the bound,
/// 1 − 1/(eps²·(1−delta)⁴·d). passes is the 2-standard-error comparison
/// (vacuously true when the bound is non-positive).
struct OrthogonalityExperiment {
  double empirical_fraction = 0.0;
  double structural_lower_bound = 0.0;
  std::size_t trials = 0;
  double standard_error = 0.0;
  bool passes = false;
};
OrthogonalityExperiment orthogonality_probability_experiment(
    std::size_t d, double eps, double delta, std::size_t trials,
    std::uint64_t seed);

/// Audit-instance generators. random_unit_rows draws k i.i.d. Gaussian rows
/// in ℝ^p and normalizes them; random_cone_rows additionally confines the
/// rows to a cone around a random center so all pairwise inner products are
/// positive (Theorem 3's applicability regime).
DenseMatrix random_unit_rows(std::size_t k, std::size_t p, Rng& rng);
DenseMatrix random_cone_rows(std::size_t k, std::size_t p, double cone_scale,
                             Rng& rng);

}  // namespace kaczmarz::paving
