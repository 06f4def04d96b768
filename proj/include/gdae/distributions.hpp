#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gdae/error.hpp"
#include "gdae/rng.hpp"
#include "gdae/sample.hpp"

namespace gdae {

inline constexpr double kNormalizationTolerance = 1e-6;
inline constexpr double kRenormalizeThreshold = 1e-12;

// Normalized probability vector over {0, ..., K-1}. Construction rejects
// negative entries and sums off by more than 1e-6. Sums off by more than
// 1e-12 are renormalized; closer ones are stored as given so that values
// written out and read back compare equal.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidArgument("ProbVector: empty");
    double total = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i]))
        throw InvalidArgument("ProbVector: entry " + std::to_string(i) + " is negative or not finite");
      total += probs_[i];
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance)
      throw InvalidArgument("ProbVector: entries sum to " + std::to_string(total));
    if (std::abs(total - 1.0) > kRenormalizeThreshold)
      for (double& p : probs_) p /= total;
  }

  static ProbVector uniform(std::size_t k) {
    if (k == 0) throw InvalidArgument("ProbVector: empty");
    return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  // Normalizes arbitrary non-negative weights.
  static ProbVector from_weights(std::vector<double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total))
      throw InvalidArgument("ProbVector: weights must have a positive finite sum");
    for (double& w : weights) w /= total;
    return ProbVector(std::move(weights));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& vector() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Draws i with probability p[i]. Consumes exactly one uniform.
inline DiscreteScalar sample_categorical(std::span<const double> p, RngStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    cumulative += p[i];
    last_positive = i;
    if (u < cumulative) return {i};
  }
  return {last_positive};
}

inline DiscreteScalar sample_categorical(const ProbVector& p, RngStream& rng) {
  return sample_categorical(p.probs(), rng);
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw InvalidArgument("total_variation: length mismatch (" + std::to_string(p.size()) +
                          " vs " + std::to_string(q.size()) + ")");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

inline double total_variation(const ProbVector& p, const ProbVector& q) {
  return total_variation(p.probs(), q.probs());
}

// log(sum(exp(xs))) without overflow; -inf entries contribute nothing.
inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("log_sum_exp: empty input");
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  if (hi == std::numeric_limits<double>::infinity()) return hi;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

}  // namespace gdae
