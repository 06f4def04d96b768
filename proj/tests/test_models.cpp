#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "gdae/chain.hpp"
#include "gdae/conditional_model.hpp"
#include "gdae/dataset.hpp"
#include "gdae/model_io.hpp"
#include "oracles.hpp"

namespace gdae {
namespace {

// --- multinomial ------------------------------------------------------------

TEST(MultinomialTest, CountRatio) {
  MultinomialTable t(3, 0.0, {0, 0, 0, 2, 1, 0, 0, 0, 0});
  EXPECT_NEAR(cond_log_prob(t, DiscreteScalar{0}, DiscreteScalar{1}), std::log(2.0 / 3.0), 1e-15);
}

TEST(MultinomialTest, FitExamples) {
  const std::vector<DiscretePair> pairs{{0, 1}, {1, 1}, {0, 1}};
  EXPECT_NEAR(fit_multinomial(pairs, 2, 0.0).prob(0, 1), 2.0 / 3.0, 1e-15);

  const auto smoothed = fit_multinomial({}, 3, 0.1);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(smoothed.prob(x, r), 1.0 / 3.0, 1e-15);

  const std::vector<DiscretePair> single{{2, 0}};
  const auto one = fit_multinomial(single, 3, 0.0);
  EXPECT_EQ(one.prob(2, 0), 1.0);
  int nonzero = 0;
  for (double c : one.counts()) nonzero += c != 0.0;
  EXPECT_EQ(nonzero, 1);

  const std::vector<DiscretePair> bad{{3, 0}};
  EXPECT_THROW(fit_multinomial(bad, 3, 0.1), InvalidArgument);
}

TEST(MultinomialTest, DegenerateRowAlwaysSamplesItsState) {
  const ConditionalModel m = MultinomialTable(3, 0.0, {1, 0, 0, 1, 0, 0, 1, 0, 0});
  RngStream rng(1, 0);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(cond_sample(m, DiscreteScalar{i % 3u}, rng), Sample(DiscreteScalar{0}));
}

TEST(MultinomialTest, UnseenRowWithoutSmoothingHasNoMass) {
  const MultinomialTable t(2, 0.0, {1, 1, 0, 0});
  EXPECT_FALSE(t.row_defined(1));
  EXPECT_EQ(t.log_prob(0, 1), -std::numeric_limits<double>::infinity());
  RngStream rng(1, 0);
  EXPECT_THROW(t.sample(1, rng), ErgodicityError);
}

TEST(MultinomialTest, RowsNormalizeAndMatchSampling) {
  RngStream rng(2, 0);
  MultinomialTable t(6, 0.1);
  for (int i = 0; i < 300; ++i) t.add(rng.uniform_int(6), rng.uniform_int(3));
  const ConditionalModel m = t;
  for (std::size_t xt = 0; xt < 6; ++xt) {
    double total = 0;
    for (std::size_t x = 0; x < 6; ++x) total += std::exp(cond_log_prob(m, DiscreteScalar{x}, DiscreteScalar{xt}));
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
  const int n = 100000;
  std::vector<int> counts(6, 0);
  for (int i = 0; i < n; ++i) ++counts[std::get<DiscreteScalar>(cond_sample(m, DiscreteScalar{4}, rng)).value];
  for (std::size_t x = 0; x < 6; ++x) {
    const double p = t.prob(x, 4);
    EXPECT_NEAR(counts[x] / double(n), p, 4 * std::sqrt(p * (1 - p) / n) + 1e-12);
  }
}

TEST(MultinomialTest, CountingIsConsistent) {
  const ProbVector p = default_discrete_target();
  const DiscreteFlip flip(10, 0.5);
  // True conditional by Bayes rule with the hand-written kernel.
  auto true_row = [&](std::size_t xt) {
    std::vector<double> row(10);
    double z = 0;
    for (std::size_t x = 0; x < 10; ++x) z += row[x] = p[x] * oracle::flip_prob(xt, x, 10, 0.5);
    for (double& v : row) v /= z;
    return row;
  };
  auto max_row_tv = [&](std::size_t n, std::uint64_t seed) {
    RngStream rng(seed, 0);
    std::vector<DiscretePair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = sample_categorical(p, rng);
      pairs.push_back({x.value, std::get<DiscreteScalar>(corrupt(flip, x, rng)).value});
    }
    const auto t = fit_multinomial(pairs, 10, 0.1);
    double worst = 0;
    for (std::size_t xt = 0; xt < 10; ++xt) worst = std::max(worst, total_variation(t.row(xt), true_row(xt)));
    return worst;
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) EXPECT_LT(max_row_tv(50000, seed), max_row_tv(500, seed));
}

// --- Parzen -----------------------------------------------------------------

TEST(ParzenTest, SingleAnchorIsOneGaussian) {
  const ConditionalModel m = ParzenConditional({RealVector{{1.0, 2.0}}}, {RealVector{{0.0, 0.0}}}, 0.5, 1.0);
  const Sample x = RealVector{{1.3, 1.6}};
  const double expected = -0.5 * (0.09 + 0.16) / 0.25 - 2 * std::log(0.5) - std::log(2 * std::numbers::pi);
  for (const Sample& xt : {Sample(RealVector{{0.0, 0.0}}), Sample(RealVector{{5.0, -3.0}})})
    EXPECT_NEAR(cond_log_prob(m, x, xt), expected, 1e-12);
}

TEST(ParzenTest, VanishingBandwidthReturnsAnchor) {
  const ConditionalModel m = ParzenConditional({RealVector{{1.0, -2.0, 3.0}}}, {RealVector{{0, 0, 0}}}, 1e-8, 1.0);
  RngStream rng(3, 0);
  const auto s = std::get<RealVector>(cond_sample(m, RealVector{{0.5, 0.5, 0.5}}, rng));
  EXPECT_NEAR(s.values[0], 1.0, 1e-6);
  EXPECT_NEAR(s.values[1], -2.0, 1e-6);
  EXPECT_NEAR(s.values[2], 3.0, 1e-6);
}

TEST(ParzenTest, MixtureMatchesDirectSum) {
  std::vector<RealVector> clean{RealVector{{0.0}}, RealVector{{2.0}}, RealVector{{-1.0}}};
  std::vector<RealVector> corr{RealVector{{0.1}}, RealVector{{1.5}}, RealVector{{-0.7}}};
  const ParzenConditional pz(clean, corr, 0.4, 0.8);
  const double xt = 0.6, x = 1.1;
  double wsum = 0, dens = 0;
  for (int i = 0; i < 3; ++i) {
    const double w = std::exp(-std::pow(xt - corr[i].values[0], 2) / (2 * 0.64));
    wsum += w;
    dens += w * std::exp(-std::pow(x - clean[i].values[0], 2) / (2 * 0.16)) / (0.4 * std::sqrt(2 * std::numbers::pi));
  }
  EXPECT_NEAR(pz.log_prob(std::vector<double>{x}, std::vector<double>{xt}), std::log(dens / wsum), 1e-12);
}

TEST(ParzenTest, DefaultBandwidthsUseMedianDistance) {
  const auto pz = ParzenConditional::with_default_bandwidths(
      {RealVector{{0.0}}, RealVector{{0.0}}, RealVector{{0.0}}},
      {RealVector{{0.0}}, RealVector{{1.0}}, RealVector{{3.0}}});
  // distances 1, 3, 2 -> median 2
  EXPECT_DOUBLE_EQ(pz.sigma_c(), 2.0);
  EXPECT_DOUBLE_EQ(pz.sigma_x(), 1.0);
}

TEST(ParzenTest, Validation) {
  EXPECT_THROW(ParzenConditional({}, {}, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(ParzenConditional({RealVector{{0.0}}}, {RealVector{{0.0}}}, 0.0, 1.0), InvalidArgument);
  const ConditionalModel m = ParzenConditional({RealVector{{0.0}}}, {RealVector{{0.0}}}, 1.0, 1.0);
  EXPECT_THROW(cond_log_prob(m, RealVector{{0.0, 1.0}}, RealVector{{0.0}}), VariantMismatch);
  EXPECT_THROW(cond_log_prob(m, DiscreteScalar{0}, RealVector{{0.0}}), VariantMismatch);
}

// --- Bernoulli MLP ------------------------------------------------------------

BinaryVector random_bits(std::size_t d, RngStream& rng) {
  BinaryVector v;
  for (std::size_t i = 0; i < d; ++i) v.bits.push_back(rng.uniform() < 0.5);
  return v;
}

std::vector<double> as_doubles(const BinaryVector& v) { return {v.bits.begin(), v.bits.end()}; }

TEST(MlpTest, ZeroWeightsGiveFairCoins) {
  const ConditionalModel m = BernoulliMlp(5, 3);
  RngStream rng(4, 0);
  for (int i = 0; i < 10; ++i)
    EXPECT_NEAR(cond_log_prob(m, random_bits(5, rng), random_bits(5, rng)), 5 * std::log(0.5), 1e-12);
}

TEST(MlpTest, ZeroWeightsSampleFairBits) {
  const ConditionalModel m = BernoulliMlp(3, 2);
  RngStream rng(5, 0);
  std::vector<int> ones(3, 0);
  const Sample xt = BinaryVector{{1, 0, 1}};
  for (int i = 0; i < 100000; ++i) {
    const auto s = std::get<BinaryVector>(cond_sample(m, xt, rng));
    for (int j = 0; j < 3; ++j) ones[j] += s.bits[j];
  }
  for (int c : ones) {
    EXPECT_GE(c / 1e5, 0.49);
    EXPECT_LE(c / 1e5, 0.51);
  }
}

TEST(MlpTest, LogProbMatchesLoopOracle) {
  RngStream rng(6, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = BernoulliMlp::initialized(7, 5, rng);
    const auto x = random_bits(7, rng), xt = random_bits(7, rng);
    EXPECT_NEAR(-m.log_prob(x, xt), oracle::mlp_nll_loops(m.params(), as_doubles(x), as_doubles(xt)), 1e-10);
  }
}

TEST(MlpTest, NormalizesOverAllBinaryVectors) {
  RngStream rng(7, 0);
  const ConditionalModel m = BernoulliMlp::initialized(10, 6, rng);
  const FiniteStateSpace space(SaltPepper(10, 0.5));
  for (int trial = 0; trial < 3; ++trial) {
    const Sample xt = random_bits(10, rng);
    std::vector<double> terms;
    for (std::size_t s = 0; s < space.size(); ++s) terms.push_back(cond_log_prob(m, space.state(s), xt));
    EXPECT_NEAR(std::exp(log_sum_exp(terms)), 1.0, 1e-9);
  }
}

TEST(MlpTest, SamplingMatchesDensity) {
  RngStream rng(8, 0);
  const ConditionalModel m = BernoulliMlp::initialized(3, 4, rng);
  const FiniteStateSpace space(SaltPepper(3, 0.5));
  const Sample xt = BinaryVector{{1, 1, 0}};
  const int n = 100000;
  std::vector<int> counts(space.size(), 0);
  for (int i = 0; i < n; ++i) ++counts[space.index(cond_sample(m, xt, rng))];
  for (std::size_t s = 0; s < space.size(); ++s) {
    const double p = std::exp(cond_log_prob(m, space.state(s), xt));
    EXPECT_NEAR(counts[s] / double(n), p, 4 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(MlpTest, OutputProbabilitiesAreClamped) {
  auto params = MlpParameters::zeros(2, 1);
  params.b2 << 80.0, -80.0;
  const BernoulliMlp m(params);
  const auto p = m.output_probs(BinaryVector{{0, 0}});
  EXPECT_EQ(p(0), 1.0 - BernoulliMlp::kClamp);
  EXPECT_EQ(p(1), BernoulliMlp::kClamp);
  EXPECT_TRUE(std::isfinite(m.log_prob(BinaryVector{{0, 1}}, BinaryVector{{0, 0}})));
}

TEST(MlpGradTest, ZeroWeightsOutputBias) {
  const BernoulliMlp m(2, 1);
  const auto g = mlp_grad(m, BinaryVector{{1, 1}}, BinaryVector{{1, 1}});
  EXPECT_DOUBLE_EQ(g.b2(0), -0.5);
  EXPECT_DOUBLE_EQ(g.b2(1), -0.5);
  // Hidden units are tanh(0) = 0 and W2 = 0, so nothing else moves.
  EXPECT_EQ(g.w2.norm(), 0.0);
  EXPECT_EQ(g.w1.norm(), 0.0);
  EXPECT_EQ(g.b1.norm(), 0.0);
}

TEST(MlpGradTest, StationaryWhenOutputsMatchTargets) {
  auto params = MlpParameters::zeros(3, 2);
  params.b2.setConstant(50.0);  // logistic(50) rounds to exactly 1
  const BernoulliMlp m(params);
  const auto g = mlp_grad(m, BinaryVector{{1, 1, 1}}, BinaryVector{{0, 1, 0}});
  EXPECT_EQ(g.b2.norm(), 0.0);
  EXPECT_EQ(g.w2.norm(), 0.0);
}

TEST(MlpGradTest, MatchesCentralFiniteDifferences) {
  RngStream rng(9, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + rng.uniform_int(7), h = 1 + rng.uniform_int(8);
    auto m = BernoulliMlp::initialized(d, h, rng);
    for (std::size_t i = 0; i < m.params().parameter_count(); ++i) m.mutable_params().flat(i) += 0.5 * rng.normal();
    const auto x = random_bits(d, rng), xt = random_bits(d, rng);
    const auto grad = mlp_grad(m, x, xt);
    const auto fd = oracle::finite_difference_gradient(
        m.params(), [&](const MlpParameters& p) { return oracle::mlp_nll_loops(p, as_doubles(x), as_doubles(xt)); },
        1e-5);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double a = grad.flat(i), b = fd[i];
      EXPECT_LE(std::abs(a - b), 1e-4 * std::max(1e-3, std::max(std::abs(a), std::abs(b))))
          << "trial " << trial << " param " << i;
    }
  }
}

TEST(MlpGradTest, BatchGradientIsSumOfSingles) {
  RngStream rng(10, 0);
  const auto m = BernoulliMlp::initialized(4, 3, rng);
  Eigen::MatrixXd xs(4, 3), xts(4, 3);
  auto total = MlpParameters::zeros(4, 3);
  for (int j = 0; j < 3; ++j) {
    const auto x = random_bits(4, rng), xt = random_bits(4, rng);
    xs.col(j) = to_eigen(x);
    xts.col(j) = to_eigen(xt);
    total.add_scaled(mlp_grad(m, x, xt), 1.0);
  }
  const auto batch = mlp_batch_grad(m, xs, xts);
  for (std::size_t i = 0; i < total.parameter_count(); ++i) EXPECT_NEAR(batch.grad.flat(i), total.flat(i), 1e-12);
}

TEST(MlpGradTest, DimensionMismatch) {
  const BernoulliMlp m(3, 2);
  EXPECT_THROW(mlp_grad(m, BinaryVector{{1, 0}}, BinaryVector{{1, 0, 1}}), VariantMismatch);
}

// --- persistence ------------------------------------------------------------

ConditionalModel round_trip(const ConditionalModel& m) {
  std::stringstream buf;
  save_model(buf, m);
  return load_model(buf);
}

TEST(ModelIoTest, RoundTripsAreExact) {
  RngStream rng(11, 0);
  MultinomialTable t(4, 0.1);
  for (int i = 0; i < 30; ++i) t.add(rng.uniform_int(4), rng.uniform_int(4), rng.uniform());
  const auto t2 = std::get<MultinomialTable>(round_trip(t));
  EXPECT_EQ(t2.alpha(), t.alpha());
  EXPECT_TRUE(std::equal(t.counts().begin(), t.counts().end(), t2.counts().begin()));

  std::vector<RealVector> clean, corr;
  for (int i = 0; i < 5; ++i) {
    clean.push_back(RealVector{{rng.normal(), rng.normal()}});
    corr.push_back(RealVector{{rng.normal(), rng.normal()}});
  }
  const ParzenConditional pz(clean, corr, 0.3 + rng.uniform(), 0.7 + rng.uniform());
  const auto pz2 = std::get<ParzenConditional>(round_trip(pz));
  EXPECT_EQ(pz2.sigma_x(), pz.sigma_x());
  EXPECT_EQ(pz2.sigma_c(), pz.sigma_c());
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_TRUE(std::equal(pz.clean_anchor(i).begin(), pz.clean_anchor(i).end(), pz2.clean_anchor(i).begin()));
    EXPECT_TRUE(std::equal(pz.corrupted_anchor(i).begin(), pz.corrupted_anchor(i).end(), pz2.corrupted_anchor(i).begin()));
  }

  auto mlp = BernoulliMlp::initialized(6, 4, rng);
  for (std::size_t i = 0; i < mlp.params().parameter_count(); ++i) mlp.mutable_params().flat(i) = rng.normal() * 1e-3;
  EXPECT_TRUE(std::get<BernoulliMlp>(round_trip(mlp)).params() == mlp.params());
}

TEST(ModelIoTest, FormatLayout) {
  std::stringstream buf;
  save_model(buf, MultinomialTable(2, 0.5, {1, 2, 3, 4}));
  EXPECT_EQ(buf.str(), "GDAE-MODEL v1\nmultinomial\n2 0.5\n1 2\n3 4\n");
}

TEST(ModelIoTest, RejectsMalformedFiles) {
  auto load = [](const std::string& s) {
    std::stringstream in(s);
    return load_model(in);
  };
  EXPECT_THROW(load("GDAE-MODEL v2\nmultinomial\n1 0.1\n0\n"), DataError);
  EXPECT_THROW(load("GDAE-MODEL v1\nunknown\n"), DataError);
  EXPECT_THROW(load("GDAE-MODEL v1\nmultinomial\n2 0.1\n1 2 3\n"), DataError);
  EXPECT_THROW(load("GDAE-MODEL v1\nmultinomial\n2 0.1\n1 2 3 x\n"), DataError);
  EXPECT_THROW(load("GDAE-MODEL v1\nmultinomial\n1 0.1\n1 2\n"), DataError);
  EXPECT_THROW(load("GDAE-MODEL v1\nmultinomial\n1 -1\n1\n"), DataError);
}

}  // namespace
}  // namespace gdae
