#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gdae/chain.hpp"
#include "gdae/conditional_model.hpp"
#include "gdae/corruption.hpp"
#include "gdae/dataset.hpp"
#include "gdae/error.hpp"
#include "gdae/multinomial.hpp"
#include "gdae/parzen.hpp"
#include "gdae/rng.hpp"

namespace gdae {

// SGD with momentum and L2 weight decay:
//   v <- momentum v - lr (grad + weight_decay theta),  theta <- theta + v,
// and lr <- lr * lr_decay after every epoch.
struct TrainConfig {
  std::size_t epochs = 1;
  std::size_t minibatch = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double lr_decay = 0.99;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  // Independent corruptions drawn per example when walkback is off.
  std::size_t corruptions_per_example = 1;

  void validate() const {
    if (epochs == 0) throw InvalidArgument("TrainConfig: epochs must be positive");
    if (minibatch == 0) throw InvalidArgument("TrainConfig: minibatch must be positive");
    if (!(learning_rate >= 0.0)) throw InvalidArgument("TrainConfig: learning_rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("TrainConfig: momentum must lie in [0, 1)");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidArgument("TrainConfig: lr_decay must lie in (0, 1]");
    if (!(weight_decay >= 0.0)) throw InvalidArgument("TrainConfig: weight_decay must be >= 0");
    if (corruptions_per_example == 0) throw InvalidArgument("TrainConfig: corruptions_per_example must be positive");
  }
};

// Walkback corruption. With fixed_steps == 0 the walk continues after each
// corruption with probability p, up to max_steps corruptions. With
// fixed_steps > 0 the walk always produces exactly fixed_steps corruptions.
struct WalkbackConfig {
  bool enabled = false;
  double p = 0.5;
  std::size_t max_steps = 20;
  std::size_t fixed_steps = 0;

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("WalkbackConfig: p must lie in (0, 1)");
    if (max_steps == 0) throw InvalidArgument("WalkbackConfig: max_steps must be positive");
  }
};

struct TrainingMetrics {
  std::vector<double> train_nll;  // mean -log P(x | x~) over the epoch's pairs
  std::vector<double> valid_nll;  // NaN when no validation set was given
  std::vector<double> seconds;
};

// One walkback corruption list L for training example x. Every element is
// meant to be paired with the original x as target. Each corrupted X~* is
// appended once; the walk stops when u > p or max_steps is reached.
inline std::vector<Sample> walkback_rollout(const ConditionalModel& m, const CorruptionProcess& c, const Sample& x,
                                            const WalkbackConfig& wb, RngStream& rng) {
  wb.validate();
  check_compatible(m, c, x, "walkback_rollout");
  std::vector<Sample> out;
  Sample current = x;
  while (true) {
    Sample x_tilde = corrupt(c, current, rng);
    if (wb.fixed_steps > 0) {
      out.push_back(x_tilde);
      if (out.size() >= wb.fixed_steps) return out;
    } else {
      const double u = rng.uniform();
      out.push_back(x_tilde);
      if (u > wb.p || out.size() >= wb.max_steps) return out;
    }
    current = cond_sample(m, out.back(), rng);
  }
}

struct MlpArchitecture {
  std::size_t visible = 0;
  std::size_t hidden = 0;
};

namespace detail {

inline void set_column(Eigen::MatrixXd& m, Eigen::Index col, const BinaryVector& v) {
  for (std::size_t i = 0; i < v.bits.size(); ++i) m(static_cast<Eigen::Index>(i), col) = v.bits[i] ? 1.0 : 0.0;
}

inline double mean_nll(const BernoulliMlp& m, const Dataset& data, const CorruptionProcess& c, RngStream rng) {
  double total = 0.0;
  for (const auto& s : data.samples) {
    const Sample xt = corrupt(c, s, rng);
    total -= m.log_prob(std::get<BinaryVector>(s), std::get<BinaryVector>(xt));
  }
  return total / static_cast<double>(data.size());
}

}  // namespace detail

// Denoising training of a Bernoulli MLP on binary data. Each example yields
// one pair (x, C(x)) or, with walkback, one pair per element of its rollout
// under the current parameters. Every minibatch takes one step on the mean
// negative log-likelihood of its pairs. Deterministic given cfg.seed.
inline std::pair<BernoulliMlp, TrainingMetrics> train_dae(const Dataset& data, const CorruptionProcess& c,
                                                          const TrainConfig& cfg, const WalkbackConfig& wb,
                                                          MlpArchitecture arch, const Dataset* valid = nullptr) {
  cfg.validate();
  if (wb.enabled) wb.validate();
  data.validate();
  if (data.kind() != SampleKind::binary) throw VariantMismatch("train_dae: data must be binary vectors");
  if (data.dim() != arch.visible)
    throw VariantMismatch("train_dae: data dimension " + std::to_string(data.dim()) +
                          " does not match architecture " + std::to_string(arch.visible));
  if (sample_kind_for(c) != SampleKind::binary) throw VariantMismatch("train_dae: corruption must act on binary vectors");
  if (valid != nullptr) {
    valid->validate();
    if (valid->kind() != SampleKind::binary || valid->dim() != arch.visible)
      throw VariantMismatch("train_dae: validation data does not match the architecture");
  }

  RngStream init_rng(cfg.seed, 1);
  ConditionalModel model = BernoulliMlp::initialized(arch.visible, arch.hidden, init_rng);
  auto& mlp = std::get<BernoulliMlp>(model);
  RngStream rng(cfg.seed, 2);

  MlpParameters velocity = MlpParameters::zeros(arch.visible, arch.hidden);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double lr = cfg.learning_rate;
  TrainingMetrics metrics;
  const auto d = static_cast<Eigen::Index>(arch.visible);

  std::vector<const BinaryVector*> targets;
  std::vector<Sample> inputs;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);

    double loss_total = 0.0;
    std::size_t pair_total = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.minibatch) {
      const std::size_t end = std::min(order.size(), begin + cfg.minibatch);
      targets.clear();
      inputs.clear();
      for (std::size_t k = begin; k < end; ++k) {
        const Sample& x = data.samples[order[k]];
        if (wb.enabled) {
          for (auto& xt : walkback_rollout(model, c, x, wb, rng)) {
            targets.push_back(&std::get<BinaryVector>(x));
            inputs.push_back(std::move(xt));
          }
        } else {
          for (std::size_t r = 0; r < cfg.corruptions_per_example; ++r) {
            targets.push_back(&std::get<BinaryVector>(x));
            inputs.push_back(corrupt(c, x, rng));
          }
        }
      }
      const auto n_pairs = static_cast<Eigen::Index>(targets.size());
      Eigen::MatrixXd xs(d, n_pairs);
      Eigen::MatrixXd xts(d, n_pairs);
      for (Eigen::Index j = 0; j < n_pairs; ++j) {
        detail::set_column(xs, j, *targets[static_cast<std::size_t>(j)]);
        detail::set_column(xts, j, std::get<BinaryVector>(inputs[static_cast<std::size_t>(j)]));
      }
      MlpBatchResult batch = mlp_batch_grad(mlp, xs, xts);
      if (!std::isfinite(batch.loss_sum))
        throw Error("train_dae: non-finite loss at epoch " + std::to_string(epoch) + ", example offset " +
                    std::to_string(begin));
      loss_total += batch.loss_sum;
      pair_total += targets.size();

      batch.grad.scale(1.0 / static_cast<double>(n_pairs));
      if (cfg.weight_decay > 0.0) batch.grad.add_scaled(mlp.params(), cfg.weight_decay);
      velocity.scale(cfg.momentum);
      velocity.add_scaled(batch.grad, -lr);
      mlp.mutable_params().add_scaled(velocity, 1.0);
    }
    if (!mlp.params().all_finite())
      throw Error("train_dae: parameters diverged at epoch " + std::to_string(epoch));
    lr *= cfg.lr_decay;

    metrics.train_nll.push_back(loss_total / static_cast<double>(pair_total));
    metrics.valid_nll.push_back(valid != nullptr ? detail::mean_nll(mlp, *valid, c, RngStream(cfg.seed, 3))
                                                 : std::numeric_limits<double>::quiet_NaN());
    metrics.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return {std::move(mlp), std::move(metrics)};
}

enum class NonparametricFamily { multinomial, parzen };

struct NonparametricOptions {
  NonparametricFamily family = NonparametricFamily::multinomial;
  double alpha = 0.1;
  // Zero selects the median-heuristic defaults.
  double sigma_x = 0.0;
  double sigma_c = 0.0;
  std::uint64_t seed = 0;
};

// Draws one x~ ~ C(.|x) per example, then counts (multinomial) or keeps the
// pairs as kernel anchors (Parzen).
inline ConditionalModel fit_nonparametric(const Dataset& data, const CorruptionProcess& c,
                                          const NonparametricOptions& opts) {
  data.validate();
  RngStream rng(opts.seed, 4);
  if (opts.family == NonparametricFamily::multinomial) {
    const auto* flip = std::get_if<DiscreteFlip>(&c);
    if (flip == nullptr || data.kind() != SampleKind::discrete)
      throw VariantMismatch("fit_nonparametric: multinomial family needs discrete data and discrete_flip corruption");
    std::vector<DiscretePair> pairs;
    pairs.reserve(data.size());
    for (const auto& s : data.samples) {
      const Sample xt = corrupt(c, s, rng);
      pairs.push_back({std::get<DiscreteScalar>(s).value, std::get<DiscreteScalar>(xt).value});
    }
    return fit_multinomial(pairs, flip->states(), opts.alpha);
  }
  if (!std::holds_alternative<IsotropicGaussian>(c) || data.kind() != SampleKind::real)
    throw VariantMismatch("fit_nonparametric: parzen family needs real data and gaussian corruption");
  std::vector<RealVector> clean, corrupted;
  clean.reserve(data.size());
  corrupted.reserve(data.size());
  for (const auto& s : data.samples) {
    clean.push_back(std::get<RealVector>(s));
    corrupted.push_back(std::get<RealVector>(corrupt(c, s, rng)));
  }
  double sigma_c = opts.sigma_c;
  if (sigma_c <= 0.0) sigma_c = ParzenConditional::median_pairwise_distance(corrupted, 1000);
  const double sigma_x = opts.sigma_x > 0.0 ? opts.sigma_x : 0.5 * sigma_c;
  return ParzenConditional(std::move(clean), std::move(corrupted), sigma_x, sigma_c);
}

}  // namespace gdae
