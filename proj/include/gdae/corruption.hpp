#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>

#include "gdae/error.hpp"
#include "gdae/rng.hpp"
#include "gdae/sample.hpp"

namespace gdae {

// With probability eps the state is replaced by a uniform draw over all K
// states (possibly itself), otherwise kept.
class DiscreteFlip {
 public:
  DiscreteFlip(std::size_t states, double eps) : states_(states), eps_(eps) {
    if (states < 2) throw InvalidArgument("DiscreteFlip: need at least 2 states");
    if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("DiscreteFlip: eps must lie in [0, 1]");
  }

  std::size_t states() const { return states_; }
  double eps() const { return eps_; }
  double stay_prob() const { return (1.0 - eps_) + eps_ / static_cast<double>(states_); }
  double move_prob() const { return eps_ / static_cast<double>(states_); }
  double prob(std::size_t to, std::size_t from) const { return to == from ? stay_prob() : move_prob(); }
  bool strictly_positive() const { return eps_ > 0.0; }

 private:
  std::size_t states_;
  double eps_;
};

// Per bit, with probability corrupt_prob the bit is replaced by a fair coin.
class SaltPepper {
 public:
  SaltPepper(std::size_t dim, double corrupt_prob) : dim_(dim), corrupt_prob_(corrupt_prob) {
    if (dim == 0) throw InvalidArgument("SaltPepper: dimension must be positive");
    if (!(corrupt_prob >= 0.0 && corrupt_prob <= 1.0))
      throw InvalidArgument("SaltPepper: corrupt_prob must lie in [0, 1]");
  }

  std::size_t dim() const { return dim_; }
  double corrupt_prob() const { return corrupt_prob_; }
  double keep_prob() const { return 1.0 - 0.5 * corrupt_prob_; }
  double flip_prob() const { return 0.5 * corrupt_prob_; }
  bool strictly_positive() const { return corrupt_prob_ > 0.0; }

 private:
  std::size_t dim_;
  double corrupt_prob_;
};

// Adds N(0, sigma^2 I).
class IsotropicGaussian {
 public:
  IsotropicGaussian(std::size_t dim, double sigma) : dim_(dim), sigma_(sigma) {
    if (dim == 0) throw InvalidArgument("IsotropicGaussian: dimension must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("IsotropicGaussian: sigma must be positive");
  }

  std::size_t dim() const { return dim_; }
  double sigma() const { return sigma_; }
  bool strictly_positive() const { return true; }

 private:
  std::size_t dim_;
  double sigma_;
};

using CorruptionProcess = std::variant<DiscreteFlip, SaltPepper, IsotropicGaussian>;

inline SampleKind sample_kind_for(const CorruptionProcess& c) {
  return static_cast<SampleKind>(c.index());
}

inline bool is_strictly_positive(const CorruptionProcess& c) {
  return std::visit([](const auto& p) { return p.strictly_positive(); }, c);
}

namespace detail {

inline void check_dim(std::size_t got, std::size_t want, const char* context) {
  if (got != want)
    throw VariantMismatch(std::string(context) + ": dimension " + std::to_string(got) +
                          " does not match process dimension " + std::to_string(want));
}

inline void check_state(std::size_t x, std::size_t k, const char* context) {
  if (x >= k)
    throw VariantMismatch(std::string(context) + ": state " + std::to_string(x) +
                          " outside [0, " + std::to_string(k) + ")");
}

inline double gaussian_log_density(std::span<const double> x, std::span<const double> mean, double sigma) {
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - mean[i];
    sq += diff * diff;
  }
  const double n = static_cast<double>(x.size());
  return -0.5 * sq / (sigma * sigma) - n * std::log(sigma) - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace detail

// Draws X~ ~ C(X~ | x).
inline Sample corrupt(const CorruptionProcess& c, const Sample& x, RngStream& rng) {
  return std::visit(
      overloaded{
          [&](const DiscreteFlip& flip) -> Sample {
            const auto& v = expect_variant<DiscreteScalar>(x, "corrupt(discrete_flip)");
            detail::check_state(v.value, flip.states(), "corrupt(discrete_flip)");
            if (rng.uniform() < flip.eps()) return DiscreteScalar{rng.uniform_int(flip.states())};
            return v;
          },
          [&](const SaltPepper& sp) -> Sample {
            const auto& v = expect_variant<BinaryVector>(x, "corrupt(salt_pepper)");
            detail::check_dim(v.bits.size(), sp.dim(), "corrupt(salt_pepper)");
            BinaryVector out = v;
            for (auto& bit : out.bits) {
              if (rng.uniform() < sp.corrupt_prob()) bit = rng.uniform() < 0.5 ? 1 : 0;
            }
            return out;
          },
          [&](const IsotropicGaussian& g) -> Sample {
            const auto& v = expect_variant<RealVector>(x, "corrupt(gaussian)");
            detail::check_dim(v.values.size(), g.dim(), "corrupt(gaussian)");
            RealVector out = v;
            for (double& value : out.values) value += g.sigma() * rng.normal();
            return out;
          }},
      c);
}

// Exact log C(x_tilde | x).
inline double corruption_log_density(const CorruptionProcess& c, const Sample& x_tilde, const Sample& x) {
  return std::visit(
      overloaded{
          [&](const DiscreteFlip& flip) -> double {
            const auto& xt = expect_variant<DiscreteScalar>(x_tilde, "corruption_log_density(discrete_flip)");
            const auto& xv = expect_variant<DiscreteScalar>(x, "corruption_log_density(discrete_flip)");
            detail::check_state(xt.value, flip.states(), "corruption_log_density(discrete_flip)");
            detail::check_state(xv.value, flip.states(), "corruption_log_density(discrete_flip)");
            return std::log(flip.prob(xt.value, xv.value));
          },
          [&](const SaltPepper& sp) -> double {
            const auto& xt = expect_variant<BinaryVector>(x_tilde, "corruption_log_density(salt_pepper)");
            const auto& xv = expect_variant<BinaryVector>(x, "corruption_log_density(salt_pepper)");
            detail::check_dim(xt.bits.size(), sp.dim(), "corruption_log_density(salt_pepper)");
            detail::check_dim(xv.bits.size(), sp.dim(), "corruption_log_density(salt_pepper)");
            std::size_t flipped = 0;
            for (std::size_t i = 0; i < xt.bits.size(); ++i) flipped += (xt.bits[i] != xv.bits[i]);
            const double kept = static_cast<double>(xt.bits.size() - flipped);
            if (flipped > 0 && sp.flip_prob() == 0.0) return -std::numeric_limits<double>::infinity();
            double result = kept * std::log(sp.keep_prob());
            if (flipped > 0) result += static_cast<double>(flipped) * std::log(sp.flip_prob());
            return result;
          },
          [&](const IsotropicGaussian& g) -> double {
            const auto& xt = expect_variant<RealVector>(x_tilde, "corruption_log_density(gaussian)");
            const auto& xv = expect_variant<RealVector>(x, "corruption_log_density(gaussian)");
            detail::check_dim(xt.values.size(), g.dim(), "corruption_log_density(gaussian)");
            detail::check_dim(xv.values.size(), g.dim(), "corruption_log_density(gaussian)");
            return detail::gaussian_log_density(xt.values, xv.values, g.sigma());
          }},
      c);
}

}  // namespace gdae
