#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gdae/distributions.hpp"
#include "gdae/error.hpp"
#include "gdae/rng.hpp"
#include "gdae/sample.hpp"

namespace gdae {

// Counting estimator of P(X | X~) over K states with Laplace smoothing.
// counts(x_tilde, x) is the number of observed (x, x_tilde) pairs; the
// conditional row for x_tilde is (counts + alpha) / (row total + K alpha).
// With alpha = 0 a row with no observations is undefined: it has zero mass
// everywhere, which the ergodicity check reports.
class MultinomialTable {
 public:
  MultinomialTable(std::size_t states, double alpha)
      : MultinomialTable(states, alpha, std::vector<double>(states * states, 0.0)) {}

  // counts is row-major: counts[x_tilde * K + x].
  MultinomialTable(std::size_t states, double alpha, std::vector<double> counts)
      : states_(states), alpha_(alpha), counts_(std::move(counts)), row_totals_(states, 0.0) {
    if (states == 0) throw InvalidArgument("MultinomialTable: need at least one state");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("MultinomialTable: alpha must be >= 0");
    if (counts_.size() != states * states)
      throw InvalidArgument("MultinomialTable: expected " + std::to_string(states * states) + " counts");
    for (std::size_t r = 0; r < states_; ++r) {
      for (std::size_t x = 0; x < states_; ++x) {
        const double c = counts_[r * states_ + x];
        if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("MultinomialTable: counts must be non-negative");
        row_totals_[r] += c;
      }
    }
  }

  std::size_t states() const { return states_; }
  double alpha() const { return alpha_; }
  double count(std::size_t x_tilde, std::size_t x) const { return counts_[x_tilde * states_ + x]; }
  std::span<const double> counts() const { return counts_; }

  void add(std::size_t x_tilde, std::size_t x, double weight = 1.0) {
    counts_[x_tilde * states_ + x] += weight;
    row_totals_[x_tilde] += weight;
  }

  bool row_defined(std::size_t x_tilde) const {
    return row_totals_[x_tilde] + static_cast<double>(states_) * alpha_ > 0.0;
  }

  double prob(std::size_t x, std::size_t x_tilde) const {
    if (!row_defined(x_tilde)) return 0.0;
    return (count(x_tilde, x) + alpha_) / (row_totals_[x_tilde] + static_cast<double>(states_) * alpha_);
  }

  double log_prob(std::size_t x, std::size_t x_tilde) const {
    const double p = prob(x, x_tilde);
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  }

  std::vector<double> row(std::size_t x_tilde) const {
    std::vector<double> out(states_);
    for (std::size_t x = 0; x < states_; ++x) out[x] = prob(x, x_tilde);
    return out;
  }

  DiscreteScalar sample(std::size_t x_tilde, RngStream& rng) const {
    if (!row_defined(x_tilde))
      throw ErgodicityError("MultinomialTable: conditional row for x~=" + std::to_string(x_tilde) +
                            " has no mass (unseen with alpha = 0)");
    return sample_categorical(row(x_tilde), rng);
  }

 private:
  std::size_t states_;
  double alpha_;
  std::vector<double> counts_;
  std::vector<double> row_totals_;
};

struct DiscretePair {
  std::size_t x = 0;
  std::size_t x_tilde = 0;
};

// Maximum-likelihood (counting) fit; smoothing is applied at query time.
inline MultinomialTable fit_multinomial(std::span<const DiscretePair> pairs, std::size_t states, double alpha) {
  MultinomialTable table(states, alpha);
  for (const auto& pair : pairs) {
    if (pair.x >= states || pair.x_tilde >= states)
      throw InvalidArgument("fit_multinomial: pair (" + std::to_string(pair.x) + ", " +
                            std::to_string(pair.x_tilde) + ") outside [0, " + std::to_string(states) + ")");
    table.add(pair.x_tilde, pair.x);
  }
  return table;
}

}  // namespace gdae
