#include <doctest.h>

#include <cmath>
#include <vector>

#include "kaczmarz/dense_matrix.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/rng.hpp"

namespace kz = kaczmarz;

namespace {

// Independent spectral-norm oracle: power iteration on M^T M.
double power_iteration_spectral(const kz::DenseMatrix& m) {
  const std::size_t p = m.n_cols();
  std::vector<double> v(p, 1.0 / std::sqrt(static_cast<double>(p)));
  double lambda = 0.0;
  for (int it = 0; it < 3000; ++it) {
    std::vector<double> mv(m.n_rows(), 0.0);
    for (std::size_t i = 0; i < m.n_rows(); ++i) mv[i] = kz::dot(m.row(i), v);
    std::vector<double> w(p, 0.0);
    for (std::size_t i = 0; i < m.n_rows(); ++i)
      for (std::size_t j = 0; j < p; ++j) w[j] += m(i, j) * mv[i];
    lambda = kz::norm2(w);
    for (double& x : w) x /= lambda;
    v = std::move(w);
  }
  return std::sqrt(lambda);
}

kz::DenseMatrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
  kz::Rng rng(seed);
  kz::DenseMatrix m(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) m(i, j) = rng.gaussian();
  return m;
}

}  // namespace

TEST_CASE("dot and norms") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{4.0, -5.0, 6.0};
  CHECK(kz::dot(a, b) == doctest::Approx(4.0 - 10.0 + 18.0));
  CHECK(kz::norm2_sq(a) == doctest::Approx(14.0));
  CHECK(kz::norm2(a) == doctest::Approx(std::sqrt(14.0)));
  CHECK_THROWS_AS(kz::dot(a, std::vector<double>{1.0}), kz::DimensionError);
}

TEST_CASE("row_norms and frobenius_norm_sq") {
  kz::DenseMatrix m(2, 2, {3.0, 4.0, 0.0, 2.0});
  const std::vector<double> rn = kz::row_norms(m);
  REQUIRE(rn.size() == 2);
  CHECK(rn[0] == doctest::Approx(5.0));
  CHECK(rn[1] == doctest::Approx(2.0));
  CHECK(kz::frobenius_norm_sq(m) == doctest::Approx(29.0));
}

TEST_CASE("spectral extremes on a diagonal matrix") {
  kz::DenseMatrix m(3, 3, {5.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.5});
  CHECK(kz::spectral_norm(m) == doctest::Approx(5.0));
  CHECK(kz::min_singular_value(m) == doctest::Approx(0.5));
}

TEST_CASE("spectral norm matches power iteration on a random matrix") {
  const kz::DenseMatrix m = random_matrix(17, 9, 123);
  CHECK(kz::spectral_norm(m) ==
        doctest::Approx(power_iteration_spectral(m)).epsilon(1e-8));
}

TEST_CASE("least_norm_solve returns the minimum-norm solution") {
  // Underdetermined: one row, r = 6.  Minimal-norm x = A^T r / ||A||^2.
  kz::DenseMatrix a(1, 3, {1.0, 2.0, 2.0});
  const std::vector<double> r{6.0};
  const std::vector<double> x = kz::least_norm_solve(a, r);
  REQUIRE(x.size() == 3);
  CHECK(x[0] == doctest::Approx(6.0 / 9.0));
  CHECK(x[1] == doctest::Approx(12.0 / 9.0));
  CHECK(x[2] == doctest::Approx(12.0 / 9.0));
}

TEST_CASE("least_norm_solve handles a rank-deficient block") {
  // Row 2 = 2 * row 1 with a consistent rhs; pseudoinverse treats the
  // duplicated constraint as one.
  kz::DenseMatrix a(2, 2, {1.0, 1.0, 2.0, 2.0});
  const std::vector<double> r{2.0, 4.0};
  const std::vector<double> x = kz::least_norm_solve(a, r);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("least_norm_solve solves a square invertible system exactly") {
  kz::DenseMatrix a(2, 2, {2.0, 1.0, 1.0, 3.0});
  // b = A * (1, -1) = (1, -2)
  const std::vector<double> rhs{1.0, -2.0};
  const std::vector<double> x = kz::least_norm_solve(a, rhs);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(-1.0));
}

TEST_CASE("condition_number_gram is the squared singular value ratio") {
  kz::DenseMatrix m(2, 3, {3.0, 0.0, 0.0, 0.0, 1.5, 0.0});
  // Gram eigenvalues: 9 and 2.25, cond = 4.
  CHECK(kz::condition_number_gram(m) == doctest::Approx(4.0));
}

TEST_CASE("condition_number_gram rejects singular gram matrices") {
  kz::DenseMatrix m(2, 2, {1.0, 1.0, 2.0, 2.0});
  CHECK_THROWS_AS(kz::condition_number_gram(m), kz::SingularGramError);
  kz::DenseMatrix tall(3, 2, {1.0, 0.0, 0.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(kz::condition_number_gram(tall), kz::SingularGramError);
}

TEST_CASE("orthogonality_value is the largest pairwise cosine magnitude") {
  // Rows: e1, e2, (cos t, sin t) with t = 60 deg.  Cosines: 0, 0.5, sin 60.
  const double t = 3.14159265358979323846 / 3.0;
  kz::DenseMatrix m(3, 2,
                    {1.0, 0.0, 0.0, 1.0, std::cos(t), std::sin(t)});
  CHECK(kz::orthogonality_value(m) == doctest::Approx(std::sin(t)));
  CHECK_THROWS_AS(kz::orthogonality_value(kz::DenseMatrix(1, 2, {1.0, 0.0})),
                  kz::DimensionError);
}

TEST_CASE("orthogonality_value ignores row scaling") {
  kz::DenseMatrix m(2, 2, {10.0, 0.0, 3.0, 4.0});
  CHECK(kz::orthogonality_value(m) == doctest::Approx(0.6));
}

TEST_CASE("normalize_rows produces unit rows and rejects zero rows") {
  kz::DenseMatrix m(2, 2, {3.0, 4.0, 0.0, -2.0});
  const kz::DenseMatrix u = kz::normalize_rows(m);
  CHECK(kz::norm2(u.row(0)) == doctest::Approx(1.0));
  CHECK(kz::norm2(u.row(1)) == doctest::Approx(1.0));
  CHECK(u(0, 0) == doctest::Approx(0.6));
  CHECK(u(1, 1) == doctest::Approx(-1.0));
  kz::DenseMatrix z(2, 2, {1.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(kz::normalize_rows(z), kz::DegenerateRowError);
}

TEST_CASE("rng determinism and stream separation") {
  kz::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(kz::derive_seed(42, 0) != kz::derive_seed(42, 1));
  CHECK(kz::derive_seed(42, 0) == kz::derive_seed(42, 0));
  CHECK(kz::derive_seed(42, 0) != kz::derive_seed(43, 0));
}

TEST_CASE("rng gaussian moments") {
  kz::Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng uniform_index stays in range and covers values") {
  kz::Rng rng(11);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const std::size_t v = rng.uniform_index(5);
    REQUIRE(v < 5);
    ++counts[v];
  }
  for (int c : counts) CHECK(c > 700);
}
