#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gdae/chain.hpp"
#include "gdae/conditional_model.hpp"
#include "gdae/corruption.hpp"
#include "gdae/dataset.hpp"
#include "gdae/distributions.hpp"
#include "gdae/error.hpp"

namespace gdae {

// ---------------------------------------------------------------------------
// Non-parametric log-likelihood bound
// ---------------------------------------------------------------------------

struct BoundEstimate {
  double mean_log_lik = 0.0;  // nats per test example
  std::size_t n_test = 0;
  std::size_t n_chain_samples = 0;
};

namespace detail {

// Terms are sorted before summation so the result does not depend on the
// order of the chain samples.
inline double log_mean_exp_sorted(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  return log_sum_exp(terms) - std::log(static_cast<double>(terms.size()));
}

}  // namespace detail

// log P^(x) = log mean_j P(x | X~_j) over the chain's corrupted samples,
// averaged over the test set.
inline BoundEstimate loglik_bound(const ConditionalModel& m, std::span<const Sample> chain_x_tildes,
                                  const Dataset& test) {
  if (chain_x_tildes.empty()) throw InvalidArgument("loglik_bound: empty chain");
  test.validate();
  const SampleKind want = sample_kind_for(m);
  if (test.kind() != want || kind_of(chain_x_tildes.front()) != want)
    throw VariantMismatch(std::string("loglik_bound: ") + family_name(m) + " model expects " + kind_name(want) +
                          " samples");
  const std::size_t n_chain = chain_x_tildes.size();
  std::vector<double> terms(n_chain);
  double total = 0.0;

  if (const auto* mlp = std::get_if<BernoulliMlp>(&m)) {
    // Per chain sample: log p and log(1 - p), as in BernoulliMlp::log_prob.
    const std::size_t d = mlp->visible();
    std::vector<double> log_on(n_chain * d), log_off(n_chain * d);
    for (std::size_t j = 0; j < n_chain; ++j) {
      const auto& xt = expect_variant<BinaryVector>(chain_x_tildes[j], "loglik_bound");
      mlp->check_dim(xt.bits.size());
      const Eigen::VectorXd probs = mlp->output_probs(xt);
      for (std::size_t i = 0; i < d; ++i) {
        const double p = probs(static_cast<Eigen::Index>(i));
        log_on[j * d + i] = std::log(p);
        log_off[j * d + i] = std::log1p(-p);
      }
    }
    for (const auto& s : test.samples) {
      const auto& x = std::get<BinaryVector>(s);
      mlp->check_dim(x.bits.size());
      for (std::size_t j = 0; j < n_chain; ++j) {
        const double* on = &log_on[j * d];
        const double* off = &log_off[j * d];
        double lp = 0.0;
        for (std::size_t i = 0; i < d; ++i) lp += x.bits[i] ? on[i] : off[i];
        terms[j] = lp;
      }
      total += detail::log_mean_exp_sorted(terms);
    }
  } else {
    for (const auto& x : test.samples) {
      for (std::size_t j = 0; j < n_chain; ++j) terms[j] = cond_log_prob(m, x, chain_x_tildes[j]);
      total += detail::log_mean_exp_sorted(terms);
    }
  }
  const double mean = total / static_cast<double>(test.size());
  return {mean, test.size(), n_chain};
}

inline BoundEstimate loglik_bound(const ConditionalModel& m, const ChainRun& chain, const Dataset& test) {
  return loglik_bound(m, std::span<const Sample>(chain.x_tildes), test);
}

// ---------------------------------------------------------------------------
// Anchored energy
// ---------------------------------------------------------------------------

// energy(x) = -log P(x | anchor) + log C(anchor | x). Defined up to a
// constant that depends on the anchor, so only differences at a shared
// anchor carry meaning.
struct EnergyEstimate {
  Sample x;
  Sample x_anchor;
  double energy = 0.0;
};

inline EnergyEstimate energy_estimate(const ConditionalModel& m, const CorruptionProcess& c, const Sample& x,
                                      const Sample& x_anchor) {
  check_compatible(m, c, x, "energy_estimate");
  const double log_c = corruption_log_density(c, x_anchor, x);
  if (log_c == -std::numeric_limits<double>::infinity())
    throw InvalidArgument("energy_estimate: anchor lies outside the corruption support of x");
  return {x, x_anchor, -cond_log_prob(m, x, x_anchor) + log_c};
}

// energy(to) - energy(from) at a shared anchor.
inline double energy_difference(const ConditionalModel& m, const CorruptionProcess& c, const Sample& from,
                                const Sample& to, const Sample& anchor) {
  return energy_estimate(m, c, to, anchor).energy - energy_estimate(m, c, from, anchor).energy;
}

// Relative energy between path.front() and path.back(), summing one anchored
// difference per link; anchors[i] serves the link path[i] -> path[i+1].
inline double path_energy_difference(const ConditionalModel& m, const CorruptionProcess& c,
                                     std::span<const Sample> path, std::span<const Sample> anchors) {
  if (path.size() < 2) throw InvalidArgument("path_energy_difference: need at least two points");
  if (anchors.size() + 1 != path.size())
    throw InvalidArgument("path_energy_difference: need one anchor per link");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) total += energy_difference(m, c, path[i], path[i + 1], anchors[i]);
  return total;
}

// ---------------------------------------------------------------------------
// Histogram comparisons
// ---------------------------------------------------------------------------

struct TvReport {
  double tv = 0.0;
  std::size_t n_samples = 0;
  std::vector<double> empirical;
};

inline std::vector<double> empirical_histogram(std::span<const Sample> samples, std::size_t states) {
  if (samples.empty()) throw InvalidArgument("histogram_compare: empty samples");
  std::vector<double> hist(states, 0.0);
  for (const auto& s : samples) {
    const auto v = expect_variant<DiscreteScalar>(s, "histogram_compare").value;
    detail::check_state(v, states, "histogram_compare");
    hist[v] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(samples.size());
  return hist;
}

// Discrete: TV between the empirical histogram of samples and reference.
inline TvReport histogram_compare(std::span<const Sample> samples, const ProbVector& reference) {
  TvReport report;
  report.empirical = empirical_histogram(samples, reference.size());
  report.n_samples = samples.size();
  report.tv = total_variation(report.empirical, reference.probs());
  return report;
}

struct CoordinatePairTv {
  std::size_t i = 0;
  std::size_t j = 0;
  double tv = 0.0;
};

struct PairwiseTvReport {
  std::size_t bins = 0;
  std::size_t n_samples = 0;
  std::size_t n_reference = 0;
  std::vector<CoordinatePairTv> pairs;

  double max_tv() const {
    double m = 0.0;
    for (const auto& p : pairs) m = std::max(m, p.tv);
    return m;
  }
  double mean_tv() const {
    double s = 0.0;
    for (const auto& p : pairs) s += p.tv;
    return pairs.empty() ? 0.0 : s / static_cast<double>(pairs.size());
  }
  double fraction_at_most(double threshold) const {
    std::size_t n = 0;
    for (const auto& p : pairs) n += (p.tv <= threshold);
    return pairs.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(pairs.size());
  }
};

// Continuous: per coordinate pair (i < j), TV between 2-D histograms of the
// samples and the reference. Each axis uses `bins` equal-width bins over the
// reference min/max widened by 5% of the span on both sides; sample points
// outside that box go to an overflow cell where the reference has no mass.
// One-dimensional data yields a single (0, 0) entry from 1-D histograms.
inline PairwiseTvReport histogram_compare(std::span<const Sample> samples, const Dataset& reference,
                                          std::size_t bins = 20) {
  if (samples.empty()) throw InvalidArgument("histogram_compare: empty samples");
  if (bins < 2) throw InvalidArgument("histogram_compare: need at least 2 bins");
  reference.validate();
  if (reference.kind() != SampleKind::real) throw VariantMismatch("histogram_compare: reference must be real vectors");
  const std::size_t d = reference.dim();
  for (const auto& s : samples) {
    if (expect_variant<RealVector>(s, "histogram_compare").values.size() != d)
      throw VariantMismatch("histogram_compare: sample dimension differs from reference");
  }

  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (const auto& s : reference.samples) {
    const auto& v = std::get<RealVector>(s).values;
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double span = hi[k] - lo[k];
    const double pad = span > 0.0 ? 0.05 * span : 0.5;
    lo[k] -= pad;
    hi[k] += pad;
  }
  const long long nb = static_cast<long long>(bins);
  auto bin_of = [&](double v, std::size_t axis) -> long long {
    const double pos = (v - lo[axis]) / (hi[axis] - lo[axis]) * static_cast<double>(bins);
    if (!(pos >= 0.0) || pos >= static_cast<double>(bins)) return -1;
    return static_cast<long long>(pos);
  };

  auto histogram = [&](std::span<const Sample> set, std::size_t a, std::size_t b, bool two_d) {
    const std::size_t cells = two_d ? bins * bins : bins;
    std::vector<double> h(cells + 1, 0.0);  // last cell: outside the box
    for (const auto& s : set) {
      const auto& v = std::get<RealVector>(s).values;
      const long long ia = bin_of(v[a], a);
      const long long ib = two_d ? bin_of(v[b], b) : 0;
      if (ia < 0 || ib < 0) h[cells] += 1.0;
      else h[static_cast<std::size_t>(two_d ? ia * nb + ib : ia)] += 1.0;
    }
    for (double& x : h) x /= static_cast<double>(set.size());
    return h;
  };

  PairwiseTvReport report;
  report.bins = bins;
  report.n_samples = samples.size();
  report.n_reference = reference.size();
  const std::span<const Sample> ref(reference.samples);
  if (d == 1) {
    report.pairs.push_back({0, 0, total_variation(histogram(samples, 0, 0, false), histogram(ref, 0, 0, false))});
    return report;
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      report.pairs.push_back({a, b, total_variation(histogram(samples, a, b, true), histogram(ref, a, b, true))});
    }
  }
  return report;
}

}  // namespace gdae
