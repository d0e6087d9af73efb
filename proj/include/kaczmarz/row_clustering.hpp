#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kaczmarz/dense_matrix.hpp"

namespace kaczmarz::clustering {

/// Axial k-means result over the rows of A. Rows i and −i define the same
/// hyperplane, so similarity is |cosine| and the clustering is invariant to
/// row sign and scale. Centroid rows are unit norm with their first nonzero
/// coordinate positive; centroid_b[l] is the mean of b_i/‖A_i‖ over the
/// members of cluster l, each term sign-aligned with the centroid, so
/// ⟨centroid_l, x⟩ ≈ centroid_b[l] for members' hyperplanes.
struct RowClustering {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  DenseMatrix centroids;
  std::vector<std::size_t> cluster_sizes;
  Vector centroid_b;
  std::uint64_t seed = 0;
  /// Objective (sum of 1 − |cosine| to assigned centroid) after each Lloyd
  /// iteration; monotone non-increasing.
  std::vector<double> cost_history;
};

/// Flip each row so its first nonzero coordinate is positive. Throws
/// DegenerateRowError on a zero row.
DenseMatrix canonicalize_row_signs(const DenseMatrix& a);

RowClustering cluster_rows(const DenseMatrix& a, std::span<const double> b,
                           std::size_t k, std::uint64_t seed,
                           std::size_t max_iters = 100);

/// argmax over l of |centroid_b[l] − ⟨centroid_l, x⟩|, ties toward the
/// lowest index. Centroid rows are unit norm so no denominator is needed.
std::size_t furthest_cluster(const RowClustering& c, std::span<const double> x);

/// CSV export: header `row_index,cluster_index`, one line per row of A.
void write_assignments_csv(const RowClustering& c,
                           const std::filesystem::path& path);

}  // namespace kaczmarz::clustering
