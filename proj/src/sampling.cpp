#include "kaczmarz/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "kaczmarz/errors.hpp"

namespace kaczmarz {

WeightedSampler::WeightedSampler(std::span<const double> weights) {
  cumulative_.reserve(weights.size());
  double acc = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("WeightedSampler: negative or NaN weight");
    acc += w;
    cumulative_.push_back(acc);
  }
}

std::size_t WeightedSampler::sample(Rng& rng) const {
  if (cumulative_.empty() || cumulative_.back() <= 0.0)
    throw DegenerateSystemError("WeightedSampler: total weight is zero");
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i)
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  return perm;
}

}  // namespace kaczmarz
