#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "kaczmarz/dense_matrix.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/paving.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/row_clustering.hpp"

namespace kz = kaczmarz;
namespace pv = kaczmarz::paving;

namespace {

kz::DenseMatrix two_rows_with_cosine(double c) {
  return kz::DenseMatrix(2, 2, {1.0, 0.0, c, std::sqrt(1.0 - c * c)});
}

void check_partition(const pv::RowPaving& paving, std::size_t n) {
  std::set<std::size_t> seen;
  for (const auto& block : paving.blocks) {
    CHECK(!block.empty());
    for (std::size_t i : block) {
      CHECK(i < n);
      CHECK(seen.insert(i).second);  // no duplicates across blocks
    }
  }
  CHECK(seen.size() == n);
  CHECK(paving.m == paving.blocks.size());
  CHECK(paving.per_block.size() == paving.blocks.size());
}

}  // namespace

TEST_CASE("per-block spectrum of a two-row block with known cosine") {
  const double c = 0.3;
  kz::DenseMatrix a = two_rows_with_cosine(c);
  // Scale row 1 by 5: block spectra are computed on normalized rows.
  for (std::size_t j = 0; j < 2; ++j) a(1, j) *= 5.0;
  const pv::RowPaving paving = pv::build_random_paving(a, 2, 1);
  REQUIRE(paving.m == 1);
  const pv::BlockSpectrum& s = paving.per_block[0];
  CHECK(s.lambda_max == doctest::Approx(1.0 + c));
  CHECK(s.lambda_min == doctest::Approx(1.0 - c));
  CHECK(s.cond == doctest::Approx((1.0 + c) / (1.0 - c)));
  CHECK(s.spectral_norm == doctest::Approx(std::sqrt(1.0 + c)));
  CHECK(s.ov == doctest::Approx(c));
  CHECK(paving.alpha == doctest::Approx(1.0 - c));
  CHECK(paving.beta == doctest::Approx(1.0 + c));
}

TEST_CASE("single-row blocks have trivial spectra") {
  kz::DenseMatrix a(3, 2, {2.0, 0.0, 0.0, 7.0, 1.0, 1.0});
  const pv::RowPaving paving = pv::build_random_paving(a, 1, 4);
  REQUIRE(paving.m == 3);
  for (const pv::BlockSpectrum& s : paving.per_block) {
    CHECK(s.lambda_min == doctest::Approx(1.0));
    CHECK(s.lambda_max == doctest::Approx(1.0));
    CHECK(s.cond == doctest::Approx(1.0));
    CHECK(s.ov == 0.0);
  }
  CHECK(paving.alpha == doctest::Approx(1.0));
  CHECK(paving.beta == doctest::Approx(1.0));
}

TEST_CASE("duplicate rows in one block give an infinite condition number") {
  kz::DenseMatrix a(2, 2, {1.0, 1.0, 2.0, 2.0});
  const pv::RowPaving paving = pv::build_random_paving(a, 2, 0);
  CHECK(std::isinf(paving.per_block[0].cond));
  CHECK(paving.per_block[0].lambda_min == doctest::Approx(0.0));
  CHECK(paving.per_block[0].lambda_max == doctest::Approx(2.0));
}

TEST_CASE("build_random_paving partitions the rows") {
  kz::Rng rng(8);
  kz::DenseMatrix a(23, 6);
  for (double& v : a.entries()) v = rng.gaussian();
  const pv::RowPaving paving = pv::build_random_paving(a, 5, 42);
  check_partition(paving, 23);
  CHECK(paving.m == 5);  // ceil(23 / 5)
  std::size_t full = 0;
  for (const auto& b : paving.blocks) full += b.size() == 5 ? 1 : 0;
  CHECK(full == 4);

  const pv::RowPaving again = pv::build_random_paving(a, 5, 42);
  CHECK(again.blocks == paving.blocks);
  const pv::RowPaving other = pv::build_random_paving(a, 5, 43);
  CHECK(other.blocks != paving.blocks);

  CHECK_THROWS_AS(pv::build_random_paving(a, 0, 1), kz::DimensionError);
  CHECK_THROWS_AS(pv::build_random_paving(a, 24, 1), kz::DimensionError);
}

TEST_CASE("build_cluster_paving takes at most one row per cluster per block") {
  kz::Rng rng(3);
  const std::size_t n = 40, p = 8, k = 4;
  kz::DenseMatrix a(n, p);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i % k) = 1.0;
    for (std::size_t j = 0; j < p; ++j) a(i, j) += 0.05 * rng.gaussian();
    b[i] = rng.gaussian();
  }
  const kz::clustering::RowClustering c =
      kz::clustering::cluster_rows(a, b, k, 21);
  const pv::RowPaving paving = pv::build_cluster_paving(a, c, 77);
  check_partition(paving, n);
  for (const auto& block : paving.blocks) {
    std::set<std::size_t> clusters_in_block;
    for (std::size_t i : block)
      CHECK(clusters_in_block.insert(c.assignments[i]).second);
  }
  // Balanced clusters of 10 rows each: 10 blocks of k rows.
  CHECK(paving.m == 10);
}

TEST_CASE("lemma1_bound on a hand-checked identity system") {
  const kz::DenseMatrix a = kz::DenseMatrix::identity(4);
  pv::RowPaving paving = pv::build_random_paving(a, 2, 6);
  const std::vector<double> x0(4, 0.0);
  const std::vector<double> x_star(4, 1.0);
  const std::vector<double> e{0.1, 0.0, 0.0, 0.2};
  const pv::Lemma1Bound bound = pv::lemma1_bound(a, paving, x0, x_star, e);
  // sigma_min^2 = 1, m = 2, alpha = beta = 1, ||e||^2 = 0.05, dist^2 = 4.
  CHECK(bound.sigma_min_sq == doctest::Approx(1.0));
  CHECK(bound.coefficient == doctest::Approx(0.5));
  CHECK(bound.per_step_noise == doctest::Approx(0.025));
  CHECK(bound.noise_floor == doctest::Approx(0.05));
  CHECK(bound.value == doctest::Approx(2.05));
}

TEST_CASE("lemma1_bound rejects rank-deficient systems") {
  kz::DenseMatrix a(2, 2, {1.0, 0.0, 1.0, 0.0});
  const pv::RowPaving paving = pv::build_random_paving(a, 1, 0);
  const std::vector<double> z(2, 0.0);
  CHECK_THROWS_AS(pv::lemma1_bound(a, paving, z, z, z),
                  kz::DegenerateSystemError);
}

TEST_CASE("check_thm2 on a known two-row matrix") {
  const pv::Thm2Result r = pv::check_thm2(two_rows_with_cosine(0.3));
  CHECK(r.k == 2);
  CHECK(r.ov == doctest::Approx(0.3));
  CHECK(r.spectral == doctest::Approx(1.3));
  CHECK(r.bound == doctest::Approx(1.6));
  CHECK(r.holds);
}

TEST_CASE("check_thm2 is tight for duplicated rows") {
  kz::DenseMatrix a(3, 2, {1.0, 0.0, 1.0, 0.0, 1.0, 0.0});
  const pv::Thm2Result r = pv::check_thm2(a);
  // ov = 1, spectral = k = 3, bound = 1 + 3 = 4.
  CHECK(r.spectral == doctest::Approx(3.0));
  CHECK(r.bound == doctest::Approx(4.0));
  CHECK(r.holds);
}

TEST_CASE("check_thm3 equality case and applicability gate") {
  const pv::Thm3Result pos = pv::check_thm3(two_rows_with_cosine(0.3));
  CHECK(pos.applicable);
  CHECK(pos.delta == doctest::Approx(0.3));
  CHECK(pos.spectral == doctest::Approx(1.3));
  CHECK(pos.bound == doctest::Approx(1.3));
  CHECK(pos.holds);

  const pv::Thm3Result neg = pv::check_thm3(two_rows_with_cosine(-0.4));
  CHECK(!neg.applicable);
}

TEST_CASE("check_thm4_thm5 on a known two-row matrix") {
  const pv::Thm45Result r = pv::check_thm4_thm5(two_rows_with_cosine(0.3));
  CHECK(r.sigma_min == doctest::Approx(0.7));
  CHECK(r.sigma_min_bound_paper == doctest::Approx(0.7));
  CHECK(r.sigma_min_bound_gershgorin == doctest::Approx(0.7));
  CHECK(r.gershgorin_applicable);
  CHECK(r.cond == doctest::Approx(1.3 / 0.7));
  CHECK(r.cond_bound == doctest::Approx(1.6 / 0.7));
  CHECK(r.holds_paper);
  CHECK(r.holds_gershgorin);
  CHECK(r.holds_cond);
}

TEST_CASE("check_thm4_thm5 flags the inapplicable Gershgorin regime") {
  // Three copies of nearly the same row: ov near 1, (k-1)ov >= 1.
  kz::DenseMatrix a(3, 2, {1.0, 0.0, 1.0, 0.01, 1.0, -0.01});
  const pv::Thm45Result r = pv::check_thm4_thm5(a);
  CHECK(!r.gershgorin_applicable);
  CHECK(r.cond_bound_defined);
  CHECK(std::isinf(r.cond));
  CHECK(!r.holds_cond);
}

TEST_CASE("orthogonality experiment validates parameters") {
  CHECK_THROWS_AS(
      pv::orthogonality_probability_experiment(0, 0.2, 0.5, 1000, 1),
      kz::DimensionError);
  CHECK_THROWS_AS(
      pv::orthogonality_probability_experiment(10, 0.0, 0.5, 1000, 1),
      kz::DimensionError);
  CHECK_THROWS_AS(
      pv::orthogonality_probability_experiment(10, 0.2, 1.0, 1000, 1),
      kz::DimensionError);
  CHECK_THROWS_AS(
      pv::orthogonality_probability_experiment(10, 0.2, 0.5, 999, 1),
      kz::DimensionError);
}

TEST_CASE("orthogonality experiment at acceptance-scale parameters") {
  const pv::OrthogonalityExperiment r =
      pv::orthogonality_probability_experiment(400, 0.25, 0.5, 2000, 9);
  // Structural bound 1 - 16/(eps^2 d) = 0.36; high-dimensional cosines
  // concentrate near 0 so the empirical fraction sits near 1.
  CHECK(r.structural_lower_bound == doctest::Approx(0.36));
  CHECK(r.trials == 2000);
  CHECK(r.empirical_fraction > 0.9);
  CHECK(r.passes);
}

TEST_CASE("random_unit_rows and random_cone_rows invariants") {
  kz::Rng rng(12);
  const kz::DenseMatrix u = pv::random_unit_rows(5, 9, rng);
  CHECK(u.n_rows() == 5);
  CHECK(u.n_cols() == 9);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(kz::norm2(u.row(i)) == doctest::Approx(1.0));

  const kz::DenseMatrix c = pv::random_cone_rows(6, 12, 0.15, rng);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(kz::norm2(c.row(i)) == doctest::Approx(1.0));
    for (std::size_t j = i + 1; j < 6; ++j)
      CHECK(kz::dot(c.row(i), c.row(j)) > 0.0);
  }
}
