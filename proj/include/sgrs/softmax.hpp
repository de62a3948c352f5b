#ifndef SGRS_SOFTMAX_HPP
#define SGRS_SOFTMAX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sgrs/error.hpp"
#include "sgrs/rng.hpp"

namespace sgrs {

/// Boltzmann distribution exp(p_i / tau) / sum_j exp(p_j / tau), evaluated
/// after subtracting the maximum preference.
inline std::vector<double> softmax_probs(std::span<const double> preferences, double tau) {
  if (!(tau > 0.0)) throw DomainError("softmax: temperature must be positive");
  if (preferences.empty()) throw DomainError("softmax: no preferences");
  const double top = *std::max_element(preferences.begin(), preferences.end());
  std::vector<double> p(preferences.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((preferences[i] - top) / tau);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

/// Inverse-CDF pick in index order for u in [0, 1). Zero-probability entries
/// are never returned, even when rounding leaves u above the last partial sum.
inline std::size_t sample_index(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  return last_positive;
}

/// One uniform01() draw per call.
template <UniformSource Rng>
std::size_t sample_softmax(std::span<const double> preferences, double tau, Rng& rng) {
  const auto p = softmax_probs(preferences, tau);
  return sample_index(p, rng.uniform01());
}

}  // namespace sgrs

#endif  // SGRS_SOFTMAX_HPP
