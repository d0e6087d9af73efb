#include "kaczmarz/row_clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/rng.hpp"

namespace kaczmarz::clustering {

namespace {

std::vector<double> canonical_signs(const DenseMatrix& a) {
  std::vector<double> signs(a.n_rows(), 1.0);
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    auto row = a.row(i);
    std::size_t j = 0;
    while (j < row.size() && row[j] == 0.0) ++j;
    if (j == row.size())
      throw DegenerateRowError("canonicalize_row_signs: zero row " +
                               std::to_string(i));
    if (row[j] < 0.0) signs[i] = -1.0;
  }
  return signs;
}

// Axial similarity: rows i and -i define the same hyperplane, so all
// clustering comparisons use the magnitude of the cosine.
double axial_cos(std::span<const double> u, std::span<const double> v) {
  return std::abs(dot(u, v));
}

}  // namespace

DenseMatrix canonicalize_row_signs(const DenseMatrix& a) {
  const std::vector<double> signs = canonical_signs(a);
  DenseMatrix out = a;
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    if (signs[i] < 0.0)
      for (double& v : out.row(i)) v = -v;
  return out;
}

RowClustering cluster_rows(const DenseMatrix& a, std::span<const double> b,
                           std::size_t k, std::uint64_t seed,
                           std::size_t max_iters) {
  const std::size_t n = a.n_rows();
  const std::size_t p = a.n_cols();
  if (k == 0 || k > n)
    throw DimensionError("cluster_rows: need 1 <= k <= n_rows");
  if (b.size() != n) throw DimensionError("cluster_rows: b length != n_rows");
  if (max_iters == 0)
    throw DimensionError("cluster_rows: max_iters must be positive");

  // Work on unit rows and the correspondingly rescaled right-hand side, so
  // every member represents its hyperplane <u_i, x> = b_hat_i.
  const std::vector<double> norms = row_norms(a);
  const DenseMatrix u = normalize_rows(a);
  Vector b_hat(n);
  for (std::size_t i = 0; i < n; ++i) b_hat[i] = b[i] / norms[i];

  // Farthest-first initialization (axial distance) from a seeded start.
  Rng rng(seed);
  DenseMatrix centroids(k, p);
  std::vector<bool> picked(n, false);
  std::vector<double> best_cos(n, -1.0);
  std::size_t first = rng.uniform_index(n);
  for (std::size_t l = 0; l < k; ++l) {
    std::size_t choice = first;
    if (l > 0) {
      double worst = std::numeric_limits<double>::infinity();
      choice = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (picked[i]) continue;
        if (best_cos[i] < worst) {
          worst = best_cos[i];
          choice = i;
        }
      }
    }
    picked[choice] = true;
    std::copy(u.row(choice).begin(), u.row(choice).end(),
              centroids.row(l).begin());
    for (std::size_t i = 0; i < n; ++i)
      best_cos[i] =
          std::max(best_cos[i], axial_cos(u.row(i), centroids.row(l)));
  }

  std::vector<std::size_t> assign(n, 0);
  std::vector<std::size_t> sizes(k, 0);
  std::vector<double> cost_history;

  auto assign_all = [&] {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_c = -1.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double c = axial_cos(u.row(i), centroids.row(l));
        if (c > best_c) {
          best_c = c;
          best = l;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
      ++sizes[best];
    }
    return changed;
  };

  auto repair_empty = [&] {
    while (true) {
      std::size_t empty = k;
      for (std::size_t l = 0; l < k; ++l)
        if (sizes[l] == 0) {
          empty = l;
          break;
        }
      if (empty == k) return;
      // Farthest row from its centroid among clusters that can spare one.
      std::size_t worst_row = n;
      double worst_c = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assign[i]] < 2) continue;
        const double c = axial_cos(u.row(i), centroids.row(assign[i]));
        if (c < worst_c) {
          worst_c = c;
          worst_row = i;
        }
      }
      if (worst_row == n)
        throw DegenerateSystemError("cluster_rows: cannot repair empty cluster");
      --sizes[assign[worst_row]];
      assign[worst_row] = empty;
      sizes[empty] = 1;
      std::copy(u.row(worst_row).begin(), u.row(worst_row).end(),
                centroids.row(empty).begin());
    }
  };

  // Sign-aligned mean: members are flipped toward the current centroid
  // before averaging, the standard axial k-means update.
  auto update_centroids = [&] {
    for (std::size_t l = 0; l < k; ++l) {
      Vector mean(p, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != l) continue;
        const double s = dot(u.row(i), centroids.row(l)) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < p; ++j) mean[j] += s * u(i, j);
      }
      const double nrm = norm2(mean);
      if (nrm < 1e-12) continue;
      for (std::size_t j = 0; j < p; ++j) centroids(l, j) = mean[j] / nrm;
    }
  };

  auto cost = [&] {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      c += 1.0 - axial_cos(u.row(i), centroids.row(assign[i]));
    return c;
  };

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    const bool changed = assign_all();
    repair_empty();
    update_centroids();
    cost_history.push_back(cost());
    if (!changed && iter > 0) break;
  }

  // Deterministic orientation: each centroid's first nonzero coordinate is
  // positive; centroid_b follows the same convention.
  for (std::size_t l = 0; l < k; ++l) {
    auto row = centroids.row(l);
    std::size_t j = 0;
    while (j < row.size() && row[j] == 0.0) ++j;
    if (j < row.size() && row[j] < 0.0)
      for (double& v : row) v = -v;
  }

  RowClustering out;
  out.k = k;
  out.assignments = std::move(assign);
  out.centroids = std::move(centroids);
  out.cluster_sizes = std::move(sizes);
  out.seed = seed;
  out.cost_history = std::move(cost_history);
  out.centroid_b.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = out.assignments[i];
    const double s =
        dot(u.row(i), out.centroids.row(l)) < 0.0 ? -1.0 : 1.0;
    out.centroid_b[l] += s * b_hat[i];
  }
  for (std::size_t l = 0; l < k; ++l)
    out.centroid_b[l] /= static_cast<double>(out.cluster_sizes[l]);
  return out;
}

std::size_t furthest_cluster(const RowClustering& c, std::span<const double> x) {
  if (x.size() != c.centroids.n_cols())
    throw DimensionError("furthest_cluster: x length != p");
  std::size_t best = 0;
  double best_r = -1.0;
  for (std::size_t l = 0; l < c.k; ++l) {
    const double r = std::abs(c.centroid_b[l] - dot(c.centroids.row(l), x));
    if (r > best_r) {
      best_r = r;
      best = l;
    }
  }
  return best;
}

void write_assignments_csv(const RowClustering& c,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "row_index,cluster_index\n";
  for (std::size_t i = 0; i < c.assignments.size(); ++i)
    out << i << ',' << c.assignments[i] << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace kaczmarz::clustering
