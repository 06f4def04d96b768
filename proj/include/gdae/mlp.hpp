#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gdae/error.hpp"
#include "gdae/rng.hpp"
#include "gdae/sample.hpp"

namespace gdae {

// Weights of a one-hidden-layer denoising auto-encoder. Also used as the
// gradient type, since both share a shape.
struct MlpParameters {
  Eigen::MatrixXd w1;  // hidden x visible
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // visible x hidden
  Eigen::VectorXd b2;  // visible

  static MlpParameters zeros(std::size_t visible, std::size_t hidden) {
    const auto d = static_cast<Eigen::Index>(visible);
    const auto h = static_cast<Eigen::Index>(hidden);
    return {Eigen::MatrixXd::Zero(h, d), Eigen::VectorXd::Zero(h), Eigen::MatrixXd::Zero(d, h),
            Eigen::VectorXd::Zero(d)};
  }

  std::size_t visible() const { return static_cast<std::size_t>(b2.size()); }
  std::size_t hidden() const { return static_cast<std::size_t>(b1.size()); }
  std::size_t parameter_count() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
  }

  // this += scale * other
  void add_scaled(const MlpParameters& other, double scale) {
    w1 += scale * other.w1;
    b1 += scale * other.b1;
    w2 += scale * other.w2;
    b2 += scale * other.b2;
  }

  void scale(double factor) {
    w1 *= factor;
    b1 *= factor;
    w2 *= factor;
    b2 *= factor;
  }

  // Flat view in persistence order: w1 row-major, b1, w2 row-major, b2.
  double& flat(std::size_t index) {
    const auto h = w1.rows();
    const auto d = w1.cols();
    auto i = static_cast<Eigen::Index>(index);
    if (i < h * d) return w1(i / d, i % d);
    i -= h * d;
    if (i < h) return b1(i);
    i -= h;
    if (i < d * h) return w2(i / h, i % h);
    i -= d * h;
    return b2(i);
  }
  double flat(std::size_t index) const { return const_cast<MlpParameters&>(*this).flat(index); }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
  }

  friend bool operator==(const MlpParameters& a, const MlpParameters& b) {
    return a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
  }
};

using MlpGradient = MlpParameters;

inline Eigen::VectorXd to_eigen(const BinaryVector& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.bits.size()));
  for (std::size_t i = 0; i < v.bits.size(); ++i) out(static_cast<Eigen::Index>(i)) = v.bits[i] ? 1.0 : 0.0;
  return out;
}

// Factorized Bernoulli reconstruction distribution
//   hidden = tanh(W1 x~ + b1),  p = logistic(W2 hidden + b2),
//   P(x | x~) = prod_j p_j^x_j (1 - p_j)^(1 - x_j).
// Probabilities are clamped to [1e-7, 1 - 1e-7] for sampling and density
// evaluation so every configuration keeps positive mass.
class BernoulliMlp {
 public:
  static constexpr double kClamp = 1e-7;

  BernoulliMlp(std::size_t visible, std::size_t hidden) : params_(MlpParameters::zeros(visible, hidden)) {
    if (visible == 0 || hidden == 0) throw InvalidArgument("BernoulliMlp: dimensions must be positive");
  }

  explicit BernoulliMlp(MlpParameters params) : params_(std::move(params)) {
    const auto d = params_.b2.size();
    const auto h = params_.b1.size();
    if (d == 0 || h == 0 || params_.w1.rows() != h || params_.w1.cols() != d || params_.w2.rows() != d ||
        params_.w2.cols() != h)
      throw InvalidArgument("BernoulliMlp: inconsistent parameter shapes");
  }

  // Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
  static BernoulliMlp initialized(std::size_t visible, std::size_t hidden, RngStream& rng) {
    BernoulliMlp m(visible, hidden);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(visible));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto& p = m.params_;
    for (Eigen::Index i = 0; i < p.w1.rows(); ++i)
      for (Eigen::Index j = 0; j < p.w1.cols(); ++j) p.w1(i, j) = r1 * (2.0 * rng.uniform() - 1.0);
    for (Eigen::Index i = 0; i < p.w2.rows(); ++i)
      for (Eigen::Index j = 0; j < p.w2.cols(); ++j) p.w2(i, j) = r2 * (2.0 * rng.uniform() - 1.0);
    return m;
  }

  std::size_t visible() const { return params_.visible(); }
  std::size_t hidden() const { return params_.hidden(); }
  const MlpParameters& params() const { return params_; }
  MlpParameters& mutable_params() { return params_; }

  // Unclamped logistic outputs for one corrupted input.
  Eigen::VectorXd raw_output(const Eigen::VectorXd& x_tilde) const {
    check_dim(static_cast<std::size_t>(x_tilde.size()));
    const Eigen::VectorXd hid = (params_.w1 * x_tilde + params_.b1).array().tanh().matrix();
    const Eigen::VectorXd pre = params_.w2 * hid + params_.b2;
    return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
  }

  Eigen::VectorXd output_probs(const BinaryVector& x_tilde) const {
    return raw_output(to_eigen(x_tilde)).cwiseMax(kClamp).cwiseMin(1.0 - kClamp);
  }

  // log P(x | p) for clamped per-bit probabilities p.
  static double log_prob_given(const BinaryVector& x, const Eigen::VectorXd& probs) {
    double total = 0.0;
    for (std::size_t j = 0; j < x.bits.size(); ++j) {
      const double p = probs(static_cast<Eigen::Index>(j));
      total += x.bits[j] ? std::log(p) : std::log1p(-p);
    }
    return total;
  }

  double log_prob(const BinaryVector& x, const BinaryVector& x_tilde) const {
    check_dim(x.bits.size());
    return log_prob_given(x, output_probs(x_tilde));
  }

  BinaryVector sample(const BinaryVector& x_tilde, RngStream& rng) const {
    const Eigen::VectorXd probs = output_probs(x_tilde);
    BinaryVector out;
    out.bits.resize(visible());
    for (std::size_t j = 0; j < out.bits.size(); ++j)
      out.bits[j] = rng.uniform() < probs(static_cast<Eigen::Index>(j)) ? 1 : 0;
    return out;
  }

  void check_dim(std::size_t got) const {
    if (got != visible())
      throw VariantMismatch("BernoulliMlp: dimension " + std::to_string(got) + " does not match " +
                            std::to_string(visible()));
  }

 private:
  MlpParameters params_;
};

struct MlpBatchResult {
  MlpGradient grad;
  double loss_sum = 0.0;  // sum over columns of -log P(x | x~), clamped
};

// Backpropagation of the summed cross-entropy over a batch whose columns are
// examples. The output delta is p - x with the unclamped p.
inline MlpBatchResult mlp_batch_grad(const BernoulliMlp& m, const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& x_tilde) {
  const auto& p = m.params();
  if (x.rows() != p.b2.size() || x_tilde.rows() != p.b2.size() || x.cols() != x_tilde.cols())
    throw VariantMismatch("mlp_grad: batch shape does not match visible dimension " +
                          std::to_string(p.b2.size()));
  const Eigen::MatrixXd hid = ((p.w1 * x_tilde).colwise() + p.b1).array().tanh().matrix();
  const Eigen::MatrixXd pre = (p.w2 * hid).colwise() + p.b2;
  const Eigen::MatrixXd out = (1.0 / (1.0 + (-pre.array()).exp())).matrix();

  const Eigen::ArrayXXd clamped = out.array().max(BernoulliMlp::kClamp).min(1.0 - BernoulliMlp::kClamp);
  const double loss = -(x.array() * clamped.log() + (1.0 - x.array()) * (1.0 - clamped).log()).sum();

  const Eigen::MatrixXd delta_out = out - x;
  const Eigen::MatrixXd delta_hid =
      ((p.w2.transpose() * delta_out).array() * (1.0 - hid.array().square())).matrix();

  MlpBatchResult result{MlpParameters::zeros(m.visible(), m.hidden()), loss};
  result.grad.w2.noalias() = delta_out * hid.transpose();
  result.grad.b2 = delta_out.rowwise().sum();
  result.grad.w1.noalias() = delta_hid * x_tilde.transpose();
  result.grad.b1 = delta_hid.rowwise().sum();
  return result;
}

// Gradient of -log P_theta(x | x~) for one pair.
inline MlpGradient mlp_grad(const BernoulliMlp& m, const BinaryVector& x, const BinaryVector& x_tilde) {
  m.check_dim(x.bits.size());
  m.check_dim(x_tilde.bits.size());
  return mlp_batch_grad(m, to_eigen(x), to_eigen(x_tilde)).grad;
}

}  // namespace gdae
