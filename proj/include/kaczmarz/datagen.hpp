#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "kaczmarz/linear_system.hpp"

namespace kaczmarz::datagen {

struct GenSpec {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t k = 1;
  /// Within-cluster angular noise scale; 0 makes each cluster's rows
  /// exactly parallel.
  double spread = 0.1;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  /// Throws DimensionError unless n, p, k ≥ 1, k ≤ min(n, p),
  /// spread > 0 or spread == 0, noise_sigma ≥ 0.
  void validate() const;
};

struct GeneratedSystem {
  LinearSystem system;
  std::vector<std::size_t> labels;
};

/// Clustered instance per the experimental setup: k exactly orthonormal
/// direction vectors (QR of a seeded Gaussian matrix); row i points along
/// its cluster's direction plus spread-scaled Gaussian perturbation, with
/// log-uniform row scale in [0.5, 2]; x* standard normal; b = A·x*; e = 0.
/// Ignores spec.noise_sigma (see gen_instance).
GeneratedSystem gen_clustered_system(const GenSpec& spec);

/// i.i.d. standard normal A, standard normal x*, b = A·x*.
LinearSystem gen_gaussian_system(std::size_t n, std::size_t p,
                                 std::uint64_t seed);

/// b' = b + η with η i.i.d. N(0, σ²); x_star kept, e = A·x_star − b'
/// recorded when x_star is present.
LinearSystem add_noise(const LinearSystem& sys, double sigma,
                       std::uint64_t seed);

/// gen_clustered_system followed by add_noise(spec.noise_sigma); the
/// composition the CLI and bench runner use.
GeneratedSystem gen_instance(const GenSpec& spec);

enum class MatrixFormat { Csv, Binary };

/// Instance directory layout: A.csv (or A.bin), b.csv, x_star.csv,
/// labels.csv (`row_index,cluster_index`), spec.json (keys exactly n, p, k,
/// spread, noise_sigma, seed).
void write_instance(const std::filesystem::path& dir,
                    const GeneratedSystem& gen, const GenSpec& spec,
                    MatrixFormat format = MatrixFormat::Csv);

struct Instance {
  LinearSystem system;
  std::vector<std::size_t> labels;
  std::optional<GenSpec> spec;
};

/// Reads the directory back; accepts either A.csv or A.bin. e is
/// recomputed from x_star when present. Throws IoError on missing or
/// malformed files.
Instance read_instance(const std::filesystem::path& dir);

}  // namespace kaczmarz::datagen
