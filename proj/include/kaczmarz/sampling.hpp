#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kaczmarz/rng.hpp"

namespace kaczmarz {

/// Discrete distribution over indices with probability proportional to the
/// given non-negative weights. Sampling is inverse-CDF over the cumulative
/// sums, so a fixed Rng stream yields a fixed index sequence.
class WeightedSampler {
 public:
  explicit WeightedSampler(std::span<const double> weights);

  std::size_t sample(Rng& rng) const;

  std::size_t size() const { return cumulative_.size(); }
  double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

 private:
  std::vector<double> cumulative_;
};

/// Uniformly random permutation of {0,…,n−1} (Fisher-Yates, seed-stable).
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace kaczmarz
