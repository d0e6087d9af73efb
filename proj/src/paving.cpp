#include "kaczmarz/paving.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/sampling.hpp"
#include "eigen_util.hpp"

namespace kaczmarz::paving {

namespace {

BlockSpectrum block_spectrum(const DenseMatrix& a,
                             std::span<const std::size_t> rows) {
  DenseMatrix block(rows.size(), a.n_cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = a.row(rows[i]);
    std::copy(src.begin(), src.end(), block.row(i).begin());
  }
  const DenseMatrix hat = normalize_rows(block);
  BlockSpectrum s;
  if (rows.size() == 1) {
    s.lambda_min = s.lambda_max = s.cond = s.spectral_norm = 1.0;
    s.ov = 0.0;
    return s;
  }
  const Eigen::VectorXd sv = detail::singular_values(hat);
  const double s_max = sv(0);
  // AÂᵀ eigenvalues are squared singular values; a block with more rows
  // than columns has a rank-deficient Gram with lambda_min = 0, and tiny
  // trailing singular values below the usual relative threshold are noise
  // from an exactly rank-deficient block.
  const double rank_tol = static_cast<double>(std::max(rows.size(),
                                                       a.n_cols())) *
                          std::numeric_limits<double>::epsilon() * s_max;
  double s_min = rows.size() <= a.n_cols() ? sv(sv.size() - 1) : 0.0;
  if (s_min <= rank_tol) s_min = 0.0;
  s.lambda_max = s_max * s_max;
  s.lambda_min = s_min * s_min;
  s.spectral_norm = s_max;
  s.cond = s.lambda_min > 0.0 ? s.lambda_max / s.lambda_min
                              : std::numeric_limits<double>::infinity();
  s.ov = orthogonality_value(hat);
  return s;
}

RowPaving finish_paving(const DenseMatrix& a,
                        std::vector<std::vector<std::size_t>> blocks) {
  RowPaving paving;
  paving.blocks = std::move(blocks);
  paving.m = paving.blocks.size();
  paving.per_block.reserve(paving.m);
  paving.alpha = std::numeric_limits<double>::infinity();
  paving.beta = 0.0;
  for (auto& block : paving.blocks) {
    std::sort(block.begin(), block.end());
    const BlockSpectrum s = block_spectrum(a, block);
    paving.alpha = std::min(paving.alpha, s.lambda_min);
    paving.beta = std::max(paving.beta, s.lambda_max);
    paving.per_block.push_back(s);
  }
  return paving;
}

}  // namespace

RowPaving build_random_paving(const DenseMatrix& a, std::size_t block_size,
                              std::uint64_t seed) {
  const std::size_t n = a.n_rows();
  if (block_size == 0 || block_size > n)
    throw DimensionError("build_random_paving: need 1 <= block_size <= n_rows");
  Rng rng(seed);
  const std::vector<std::size_t> perm = random_permutation(n, rng);
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t start = 0; start < n; start += block_size) {
    const std::size_t stop = std::min(start + block_size, n);
    blocks.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                        perm.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return finish_paving(a, std::move(blocks));
}

RowPaving build_cluster_paving(const DenseMatrix& a,
                               const clustering::RowClustering& c,
                               std::uint64_t seed) {
  const std::size_t n = a.n_rows();
  if (c.assignments.size() != n)
    throw DimensionError("build_cluster_paving: clustering is for a different "
                         "matrix");
  std::vector<std::vector<std::size_t>> members(c.k);
  for (std::size_t i = 0; i < n; ++i) members[c.assignments[i]].push_back(i);

  // Drawing one row per cluster without replacement, round after round, is
  // one shuffle of each member list read off column by column.
  Rng rng(seed);
  std::size_t rounds = 0;
  for (auto& list : members) {
    const std::vector<std::size_t> perm = random_permutation(list.size(), rng);
    std::vector<std::size_t> shuffled(list.size());
    for (std::size_t t = 0; t < list.size(); ++t) shuffled[t] = list[perm[t]];
    list = std::move(shuffled);
    rounds = std::max(rounds, list.size());
  }
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t r = 0; r < rounds; ++r) {
    std::vector<std::size_t> block;
    for (const auto& list : members)
      if (r < list.size()) block.push_back(list[r]);
    blocks.push_back(std::move(block));
  }
  return finish_paving(a, std::move(blocks));
}

Lemma1Bound lemma1_bound(const DenseMatrix& a, const RowPaving& paving,
                         std::span<const double> x0,
                         std::span<const double> x_star,
                         std::span<const double> e) {
  if (x0.size() != a.n_cols() || x_star.size() != a.n_cols())
    throw DimensionError("lemma1_bound: iterate length != n_cols");
  if (e.size() != a.n_rows())
    throw DimensionError("lemma1_bound: e length != n_rows");
  if (paving.m == 0)
    throw DegeneratePavingError("lemma1_bound: paving has no blocks");
  if (!(paving.alpha > 0.0))
    throw DegeneratePavingError("lemma1_bound: alpha <= 0");

  const DenseMatrix hat = normalize_rows(a);
  const Eigen::VectorXd sv = detail::singular_values(hat);
  const double s_max = sv(0);
  const double s_min = a.n_rows() >= a.n_cols() ? sv(sv.size() - 1) : 0.0;
  const double tol = static_cast<double>(std::max(a.n_rows(), a.n_cols())) *
                     std::numeric_limits<double>::epsilon() * s_max;
  if (s_min <= tol)
    throw DegenerateSystemError("lemma1_bound: A is not of full column rank");

  const double sigma_min_sq = s_min * s_min;
  const double m = static_cast<double>(paving.m);
  double dist0_sq = 0.0;
  for (std::size_t j = 0; j < x0.size(); ++j) {
    const double d = x0[j] - x_star[j];
    dist0_sq += d * d;
  }
  const double e_sq = norm2_sq(e);

  Lemma1Bound out;
  out.sigma_min_sq = sigma_min_sq;
  out.coefficient = 1.0 - sigma_min_sq / (m * paving.beta);
  out.per_step_noise = e_sq / (m * paving.alpha);
  out.noise_floor = (paving.beta / paving.alpha) * e_sq / sigma_min_sq;
  out.value = out.coefficient * dist0_sq + out.noise_floor;
  return out;
}

Thm2Result check_thm2(const DenseMatrix& a) {
  const DenseMatrix hat = normalize_rows(a);
  Thm2Result r;
  r.k = hat.n_rows();
  r.ov = orthogonality_value(hat);
  const double s_max = spectral_norm(hat);
  r.spectral = s_max * s_max;
  r.bound = 1.0 + static_cast<double>(r.k) * r.ov;
  r.holds = r.spectral <= r.bound + 1e-9;
  return r;
}

Thm3Result check_thm3(const DenseMatrix& a) {
  const DenseMatrix hat = normalize_rows(a);
  const std::size_t k = hat.n_rows();
  if (k < 2) throw DimensionError("check_thm3: need at least two rows");
  Thm3Result r;
  r.applicable = true;
  r.delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double g = dot(hat.row(i), hat.row(j));
      if (g < 0.0) r.applicable = false;
      r.delta = std::min(r.delta, std::abs(g));
    }
  }
  const double s_max = spectral_norm(hat);
  r.spectral = s_max * s_max;
  r.bound = 1.0 + static_cast<double>(k - 1) * r.delta;
  r.holds = r.spectral >= r.bound - 1e-9;
  return r;
}

Thm45Result check_thm4_thm5(const DenseMatrix& a) {
  const DenseMatrix hat = normalize_rows(a);
  Thm45Result r;
  r.k = hat.n_rows();
  r.ov = orthogonality_value(hat);
  const Eigen::VectorXd sv = detail::singular_values(hat);
  const double s_max = sv(0);
  const double s_min =
      hat.n_rows() <= hat.n_cols() ? sv(sv.size() - 1) : 0.0;
  r.sigma_min = s_min * s_min;
  r.sigma_min_bound_paper = 1.0 - r.ov;
  r.sigma_min_bound_gershgorin =
      1.0 - static_cast<double>(r.k - 1) * r.ov;
  r.gershgorin_applicable = static_cast<double>(r.k - 1) * r.ov < 1.0;
  r.cond = r.sigma_min > 0.0
               ? (s_max * s_max) / r.sigma_min
               : std::numeric_limits<double>::infinity();
  r.cond_bound_defined = r.ov < 1.0;
  r.cond_bound = r.cond_bound_defined
                     ? (1.0 + static_cast<double>(r.k) * r.ov) / (1.0 - r.ov)
                     : std::numeric_limits<double>::infinity();
  r.holds_paper = r.sigma_min >= r.sigma_min_bound_paper - 1e-9;
  r.holds_gershgorin = r.sigma_min >= r.sigma_min_bound_gershgorin - 1e-9;
  r.holds_cond = !r.cond_bound_defined || r.cond <= r.cond_bound + 1e-9;
  return r;
}

OrthogonalityExperiment orthogonality_probability_experiment(
    std::size_t d, double eps, double delta, std::size_t trials,
    std::uint64_t seed) {
  if (d == 0) throw DimensionError("orthogonality experiment: d must be positive");
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0))
    throw DimensionError("orthogonality experiment: eps, delta must lie in (0,1)");
  if (trials < 1000)
    throw DimensionError("orthogonality experiment: need at least 1000 trials");

  std::size_t hits = 0;
  Vector u(d), v(d);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    for (double& x : u) x = rng.gaussian();
    for (double& x : v) x = rng.gaussian();
    const double denom = norm2(u) * norm2(v);
    const double cos = denom > 0.0 ? std::abs(dot(u, v)) / denom : 1.0;
    if (cos <= eps) ++hits;
  }

  OrthogonalityExperiment out;
  out.trials = trials;
  out.empirical_fraction =
      static_cast<double>(hits) / static_cast<double>(trials);
  const double shrink = (1.0 - delta) * (1.0 - delta);
  out.structural_lower_bound =
      1.0 - 1.0 / (eps * eps * shrink * shrink * static_cast<double>(d));
  out.standard_error =
      std::sqrt(out.empirical_fraction * (1.0 - out.empirical_fraction) /
                static_cast<double>(trials));
  out.passes = out.structural_lower_bound <= 0.0 ||
               out.empirical_fraction >=
                   out.structural_lower_bound - 2.0 * out.standard_error;
  return out;
}

DenseMatrix random_unit_rows(std::size_t k, std::size_t p, Rng& rng) {
  DenseMatrix a(k, p);
  for (double& v : a.entries()) v = rng.gaussian();
  return normalize_rows(a);
}

DenseMatrix random_cone_rows(std::size_t k, std::size_t p, double cone_scale,
                             Rng& rng) {
  if (!(cone_scale >= 0.0))
    throw DimensionError("random_cone_rows: cone_scale must be >= 0");
  Vector center(p);
  for (double& v : center) v = rng.gaussian();
  const double c_nrm = norm2(center);
  for (double& v : center) v /= c_nrm;
  DenseMatrix a(k, p);
  Vector g(p);
  for (std::size_t i = 0; i < k; ++i) {
    for (double& v : g) v = rng.gaussian();
    const double g_nrm = norm2(g);
    for (std::size_t j = 0; j < p; ++j)
      a(i, j) = center[j] + cone_scale * g[j] / g_nrm;
  }
  return normalize_rows(a);
}

}  // namespace kaczmarz::paving
