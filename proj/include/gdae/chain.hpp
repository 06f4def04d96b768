#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gdae/conditional_model.hpp"
#include "gdae/corruption.hpp"
#include "gdae/distributions.hpp"
#include "gdae/error.hpp"
#include "gdae/rng.hpp"
#include "gdae/sample.hpp"

namespace gdae {

// ---------------------------------------------------------------------------
// Pseudo-Gibbs sampling
// ---------------------------------------------------------------------------

struct ChainConfig {
  std::size_t n_steps = 1;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  Sample init;

  // burn_in defaults to 10% of n_steps, thin to 1.
  static ChainConfig with_defaults(std::size_t n_steps, Sample init) {
    return {n_steps, n_steps / 10, 1, std::move(init)};
  }

  void validate() const {
    if (n_steps == 0) throw InvalidArgument("ChainConfig: n_steps must be positive");
    if (thin == 0) throw InvalidArgument("ChainConfig: thin must be positive");
    if (burn_in >= n_steps) throw InvalidArgument("ChainConfig: burn_in must be smaller than n_steps");
  }

  std::size_t retained() const { return (n_steps - burn_in + thin - 1) / thin; }
};

struct ChainRun {
  std::vector<Sample> xs;
  std::vector<Sample> x_tildes;
  ChainConfig config;
};

inline void check_compatible(const ConditionalModel& m, const CorruptionProcess& c, const Sample& s,
                             const char* context) {
  const SampleKind mk = sample_kind_for(m);
  const SampleKind ck = sample_kind_for(c);
  if (mk != ck)
    throw VariantMismatch(std::string(context) + ": model family works on " + kind_name(mk) +
                          " samples but corruption works on " + kind_name(ck));
  if (kind_of(s) != mk)
    throw VariantMismatch(std::string(context) + ": expected " + kind_name(mk) + " sample, got " +
                          kind_name(kind_of(s)));
}

// X_t ~ P(X | x_tilde_prev), then X~_t ~ C(X~ | X_t).
inline std::pair<Sample, Sample> chain_step(const ConditionalModel& m, const CorruptionProcess& c,
                                            const Sample& x_tilde_prev, RngStream& rng) {
  check_compatible(m, c, x_tilde_prev, "chain_step");
  Sample x = cond_sample(m, x_tilde_prev, rng);
  Sample x_tilde = corrupt(c, x, rng);
  return {std::move(x), std::move(x_tilde)};
}

// Step 0 is (init, C(.|init)); step t >= 1 is chain_step from X~_{t-1}.
// Steps t >= burn_in with (t - burn_in) % thin == 0 are retained.
inline ChainRun run_chain(const ConditionalModel& m, const CorruptionProcess& c, const ChainConfig& cfg,
                          RngStream& rng) {
  cfg.validate();
  check_compatible(m, c, cfg.init, "run_chain");
  ChainRun run;
  run.config = cfg;
  run.xs.reserve(cfg.retained());
  run.x_tildes.reserve(cfg.retained());
  Sample x = cfg.init;
  Sample x_tilde = corrupt(c, x, rng);
  for (std::size_t t = 0; t < cfg.n_steps; ++t) {
    if (t > 0) std::tie(x, x_tilde) = chain_step(m, c, x_tilde, rng);
    if (t >= cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0) {
      run.xs.push_back(x);
      run.x_tildes.push_back(x_tilde);
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Exact operator on finite state spaces
// ---------------------------------------------------------------------------

// Enumerates the states of a finite corruption process: K values for
// DiscreteFlip, 2^d bit patterns (d <= 12) for SaltPepper, with bit j of the
// state index stored in bits[j].
class FiniteStateSpace {
 public:
  static constexpr std::size_t kMaxStates = 4096;

  explicit FiniteStateSpace(const CorruptionProcess& c) {
    std::visit(overloaded{[&](const DiscreteFlip& f) {
                            kind_ = SampleKind::discrete;
                            size_ = f.states();
                          },
                          [&](const SaltPepper& sp) {
                            if (sp.dim() > 12) throw InvalidArgument("FiniteStateSpace: binary dimension above 12");
                            kind_ = SampleKind::binary;
                            dim_ = sp.dim();
                            size_ = std::size_t{1} << sp.dim();
                          },
                          [&](const IsotropicGaussian&) -> void {
                            throw InvalidArgument("exact transition operator needs a finite state space");
                          }},
               c);
    if (size_ > kMaxStates) throw InvalidArgument("FiniteStateSpace: more than 4096 states");
  }

  std::size_t size() const { return size_; }
  SampleKind kind() const { return kind_; }

  Sample state(std::size_t index) const {
    if (kind_ == SampleKind::discrete) return DiscreteScalar{index};
    BinaryVector v;
    v.bits.resize(dim_);
    for (std::size_t j = 0; j < dim_; ++j) v.bits[j] = (index >> j) & 1u;
    return v;
  }

  std::size_t index(const Sample& s) const {
    if (kind_ == SampleKind::discrete) return expect_variant<DiscreteScalar>(s, "FiniteStateSpace").value;
    const auto& v = expect_variant<BinaryVector>(s, "FiniteStateSpace");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < v.bits.size(); ++j) idx |= std::size_t{v.bits[j] != 0} << j;
    return idx;
  }

 private:
  SampleKind kind_ = SampleKind::discrete;
  std::size_t size_ = 0;
  std::size_t dim_ = 0;
};

// Column-stochastic K x K kernel, at(next, prev) = P(X_t = next | X_{t-1} = prev).
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Eigen::MatrixXd t) : t_(std::move(t)) {
    if (t_.rows() != t_.cols() || t_.rows() == 0) throw InvalidArgument("TransitionMatrix: must be square");
  }

  std::size_t size() const { return static_cast<std::size_t>(t_.rows()); }
  double at(std::size_t next, std::size_t prev) const {
    return t_(static_cast<Eigen::Index>(next), static_cast<Eigen::Index>(prev));
  }
  double column_sum(std::size_t prev) const { return t_.col(static_cast<Eigen::Index>(prev)).sum(); }
  const Eigen::MatrixXd& matrix() const { return t_; }

 private:
  Eigen::MatrixXd t_;
};

namespace detail {

// model(x, x~) = P(x | x~) over an enumerated state space.
inline Eigen::MatrixXd model_matrix(const ConditionalModel& m, const FiniteStateSpace& space) {
  const auto k = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index xt = 0; xt < k; ++xt) {
    const Sample x_tilde = space.state(static_cast<std::size_t>(xt));
    for (Eigen::Index x = 0; x < k; ++x)
      out(x, xt) = std::exp(cond_log_prob(m, space.state(static_cast<std::size_t>(x)), x_tilde));
  }
  return out;
}

// corruption(x~, x) = C(x~ | x).
inline Eigen::MatrixXd corruption_matrix(const CorruptionProcess& c, const FiniteStateSpace& space) {
  const auto k = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index x = 0; x < k; ++x) {
    const Sample from = space.state(static_cast<std::size_t>(x));
    for (Eigen::Index xt = 0; xt < k; ++xt)
      out(xt, x) = std::exp(corruption_log_density(c, space.state(static_cast<std::size_t>(xt)), from));
  }
  return out;
}

inline void check_model_space(const ConditionalModel& m, const CorruptionProcess& c, const FiniteStateSpace& space) {
  if (sample_kind_for(m) != space.kind())
    throw VariantMismatch(std::string("model family ") + family_name(m) + " does not match the " +
                          kind_name(space.kind()) + " state space");
  if (const auto* t = std::get_if<MultinomialTable>(&m)) {
    if (t->states() != space.size())
      throw VariantMismatch("table has " + std::to_string(t->states()) + " states but corruption has " +
                            std::to_string(space.size()));
  }
  if (const auto* mlp = std::get_if<BernoulliMlp>(&m)) {
    if ((std::size_t{1} << mlp->visible()) != space.size())
      throw VariantMismatch("mlp dimension does not match salt-and-pepper dimension");
  }
  (void)c;
}

}  // namespace detail

// T(next, prev) = sum_{x~} P(next | x~) C(x~ | prev), summed exactly.
inline TransitionMatrix build_transition_matrix(const ConditionalModel& m, const CorruptionProcess& c) {
  const FiniteStateSpace space(c);
  detail::check_model_space(m, c, space);
  return TransitionMatrix(detail::model_matrix(m, space) * detail::corruption_matrix(c, space));
}

struct StationaryOptions {
  double tolerance = 1e-13;         // TV between successive iterates
  std::size_t max_iterations = 1000000;
  double column_tolerance = 1e-9;   // accepted deviation of column sums from 1
};

// Principal eigenvector of a strictly positive column-stochastic matrix by
// power iteration from the uniform vector.
inline ProbVector stationary_distribution(const TransitionMatrix& t, const StationaryOptions& opts = {}) {
  const std::size_t k = t.size();
  for (std::size_t prev = 0; prev < k; ++prev) {
    for (std::size_t next = 0; next < k; ++next) {
      if (!(t.at(next, prev) > 0.0))
        throw ErgodicityError("stationary_distribution: transition entry (" + std::to_string(next) + ", " +
                              std::to_string(prev) + ") is not strictly positive");
    }
    const double sum = t.column_sum(prev);
    if (std::abs(sum - 1.0) > opts.column_tolerance)
      throw ErgodicityError("stationary_distribution: column " + std::to_string(prev) + " sums to " +
                            std::to_string(sum) + ", not a stochastic kernel");
  }
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
  Eigen::VectorXd next(pi.size());
  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    next.noalias() = t.matrix() * pi;
    next /= next.sum();
    const double tv = 0.5 * (next - pi).cwiseAbs().sum();
    pi.swap(next);
    if (tv < opts.tolerance) return ProbVector(std::vector<double>(pi.data(), pi.data() + pi.size()));
  }
  throw ConvergenceError("stationary_distribution: power iteration did not converge in " +
                         std::to_string(opts.max_iterations) + " iterations");
}

// Exact Bayes conditional P(x | x~) proportional to P(x) C(x~ | x), stored
// as an unsmoothed table whose rows hold the conditional probabilities.
inline MultinomialTable build_true_conditional(const ProbVector& p, const DiscreteFlip& c) {
  const std::size_t k = p.size();
  if (c.states() != k)
    throw InvalidArgument("build_true_conditional: distribution has " + std::to_string(k) +
                          " states, corruption has " + std::to_string(c.states()));
  for (std::size_t x = 0; x < k; ++x) {
    if (!(p[x] > 0.0))
      throw InvalidArgument("build_true_conditional: state " + std::to_string(x) + " has zero probability");
  }
  std::vector<double> rows(k * k);
  for (std::size_t xt = 0; xt < k; ++xt) {
    double norm = 0.0;
    for (std::size_t x = 0; x < k; ++x) norm += p[x] * c.prob(xt, x);
    for (std::size_t x = 0; x < k; ++x) rows[xt * k + x] = p[x] * c.prob(xt, x) / norm;
  }
  return MultinomialTable(k, 0.0, std::move(rows));
}

struct ErgodicityViolation {
  enum class Kind { model, corruption, transition };
  Kind kind;
  std::size_t row;  // model: x~, corruption: x~, transition: next
  std::size_t col;  // model: x,  corruption: x,  transition: prev
};

inline const char* violation_kind_name(ErgodicityViolation::Kind k) {
  switch (k) {
    case ErgodicityViolation::Kind::model: return "model";
    case ErgodicityViolation::Kind::corruption: return "corruption";
    case ErgodicityViolation::Kind::transition: return "transition";
  }
  return "unknown";
}

struct ErgodicityReport {
  std::size_t states = 0;
  std::vector<ErgodicityViolation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ErgodicityViolation::Kind kind) const {
    std::size_t n = 0;
    for (const auto& v : violations) n += (v.kind == kind);
    return n;
  }
};

// Lists every zero entry of the model conditional, the corruption kernel and
// the resulting transition operator.
inline ErgodicityReport check_ergodicity(const ConditionalModel& m, const CorruptionProcess& c) {
  const FiniteStateSpace space(c);
  detail::check_model_space(m, c, space);
  const Eigen::MatrixXd model = detail::model_matrix(m, space);
  const Eigen::MatrixXd corr = detail::corruption_matrix(c, space);
  const Eigen::MatrixXd trans = model * corr;
  ErgodicityReport report;
  report.states = space.size();
  const auto k = static_cast<Eigen::Index>(space.size());
  using Kind = ErgodicityViolation::Kind;
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index x = 0; x < k; ++x)
      if (!(model(x, r) > 0.0))
        report.violations.push_back({Kind::model, static_cast<std::size_t>(r), static_cast<std::size_t>(x)});
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index x = 0; x < k; ++x)
      if (!(corr(r, x) > 0.0))
        report.violations.push_back({Kind::corruption, static_cast<std::size_t>(r), static_cast<std::size_t>(x)});
  for (Eigen::Index n = 0; n < k; ++n)
    for (Eigen::Index p = 0; p < k; ++p)
      if (!(trans(n, p) > 0.0))
        report.violations.push_back({Kind::transition, static_cast<std::size_t>(n), static_cast<std::size_t>(p)});
  return report;
}

}  // namespace gdae
