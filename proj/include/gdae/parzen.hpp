#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gdae/corruption.hpp"
#include "gdae/distributions.hpp"
#include "gdae/error.hpp"
#include "gdae/rng.hpp"
#include "gdae/sample.hpp"

namespace gdae {

// Kernel estimate of P(X | X~) from training pairs (x_i, x~_i):
//
//   P(x | x~) = sum_i w_i(x~) N(x; x_i, sigma_x^2 I),
//   w_i(x~) proportional to exp(-|x~ - x~_i|^2 / (2 sigma_c^2)).
class ParzenConditional {
 public:
  ParzenConditional(std::vector<RealVector> clean, std::vector<RealVector> corrupted, double sigma_x,
                    double sigma_c)
      : sigma_x_(sigma_x), sigma_c_(sigma_c) {
    if (clean.empty()) throw InvalidArgument("ParzenConditional: need at least one anchor");
    if (clean.size() != corrupted.size())
      throw InvalidArgument("ParzenConditional: clean and corrupted anchor counts differ");
    if (!(sigma_x > 0.0) || !(sigma_c > 0.0) || !std::isfinite(sigma_x) || !std::isfinite(sigma_c))
      throw InvalidArgument("ParzenConditional: bandwidths must be positive");
    dim_ = clean.front().values.size();
    if (dim_ == 0) throw InvalidArgument("ParzenConditional: zero-dimensional anchors");
    clean_.reserve(clean.size() * dim_);
    corrupted_.reserve(clean.size() * dim_);
    for (std::size_t i = 0; i < clean.size(); ++i) {
      if (clean[i].values.size() != dim_ || corrupted[i].values.size() != dim_)
        throw InvalidArgument("ParzenConditional: anchor " + std::to_string(i) + " has the wrong dimension");
      clean_.insert(clean_.end(), clean[i].values.begin(), clean[i].values.end());
      corrupted_.insert(corrupted_.end(), corrupted[i].values.begin(), corrupted[i].values.end());
    }
  }

  // Median heuristic: sigma_c is the median pairwise distance among the
  // corrupted anchors (first 1000 only), sigma_x = 0.5 sigma_c. Falls back to
  // 1 when fewer than two distinct anchors exist.
  static ParzenConditional with_default_bandwidths(std::vector<RealVector> clean,
                                                   std::vector<RealVector> corrupted) {
    const double sigma_c = median_pairwise_distance(corrupted, 1000);
    return ParzenConditional(std::move(clean), std::move(corrupted), 0.5 * sigma_c, sigma_c);
  }

  static double median_pairwise_distance(const std::vector<RealVector>& points, std::size_t cap) {
    const std::size_t n = std::min(points.size(), cap);
    std::vector<double> dists;
    dists.reserve(n * (n - (n > 0)) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double sq = 0.0;
        for (std::size_t k = 0; k < points[i].values.size(); ++k) {
          const double diff = points[i].values[k] - points[j].values[k];
          sq += diff * diff;
        }
        dists.push_back(std::sqrt(sq));
      }
    }
    if (dists.empty()) return 1.0;
    auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    return *mid > 0.0 ? *mid : 1.0;
  }

  std::size_t size() const { return clean_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  double sigma_x() const { return sigma_x_; }
  double sigma_c() const { return sigma_c_; }
  std::span<const double> clean_anchor(std::size_t i) const { return {clean_.data() + i * dim_, dim_}; }
  std::span<const double> corrupted_anchor(std::size_t i) const { return {corrupted_.data() + i * dim_, dim_}; }

  // Normalized log mixture weights log w_i(x~).
  std::vector<double> log_weights(std::span<const double> x_tilde) const {
    check_dim(x_tilde.size());
    const std::size_t n = size();
    std::vector<double> lw(n);
    const double scale = 1.0 / (2.0 * sigma_c_ * sigma_c_);
    for (std::size_t i = 0; i < n; ++i) {
      const auto anchor = corrupted_anchor(i);
      double sq = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double diff = x_tilde[k] - anchor[k];
        sq += diff * diff;
      }
      lw[i] = -sq * scale;
    }
    const double norm = log_sum_exp(lw);
    for (double& v : lw) v -= norm;
    return lw;
  }

  double log_prob(std::span<const double> x, std::span<const double> x_tilde) const {
    check_dim(x.size());
    std::vector<double> terms = log_weights(x_tilde);
    for (std::size_t i = 0; i < terms.size(); ++i)
      terms[i] += detail::gaussian_log_density(x, clean_anchor(i), sigma_x_);
    return log_sum_exp(terms);
  }

  RealVector sample(std::span<const double> x_tilde, RngStream& rng) const {
    std::vector<double> weights = log_weights(x_tilde);
    for (double& w : weights) w = std::exp(w);
    const std::size_t component = sample_categorical(weights, rng).value;
    const auto center = clean_anchor(component);
    RealVector out{std::vector<double>(center.begin(), center.end())};
    for (double& v : out.values) v += sigma_x_ * rng.normal();
    return out;
  }

 private:
  void check_dim(std::size_t got) const {
    if (got != dim_)
      throw VariantMismatch("ParzenConditional: dimension " + std::to_string(got) + " does not match " +
                            std::to_string(dim_));
  }

  std::size_t dim_ = 0;
  double sigma_x_;
  double sigma_c_;
  std::vector<double> clean_;
  std::vector<double> corrupted_;
};

}  // namespace gdae
