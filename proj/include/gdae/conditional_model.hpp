#pragma once

#include <string>
#include <variant>

#include "gdae/mlp.hpp"
#include "gdae/multinomial.hpp"
#include "gdae/parzen.hpp"
#include "gdae/sample.hpp"

namespace gdae {

// P_theta(X | X~) in one of three families. Families pair with sample
// variants: table <-> discrete, Parzen <-> real, MLP <-> binary.
using ConditionalModel = std::variant<MultinomialTable, ParzenConditional, BernoulliMlp>;

inline SampleKind sample_kind_for(const ConditionalModel& m) {
  return std::visit(overloaded{[](const MultinomialTable&) { return SampleKind::discrete; },
                               [](const ParzenConditional&) { return SampleKind::real; },
                               [](const BernoulliMlp&) { return SampleKind::binary; }},
                    m);
}

inline const char* family_name(const ConditionalModel& m) {
  return std::visit(overloaded{[](const MultinomialTable&) { return "multinomial"; },
                               [](const ParzenConditional&) { return "parzen"; },
                               [](const BernoulliMlp&) { return "mlp"; }},
                    m);
}

inline double cond_log_prob(const ConditionalModel& m, const Sample& x, const Sample& x_tilde) {
  return std::visit(
      overloaded{
          [&](const MultinomialTable& t) {
            const auto xv = expect_variant<DiscreteScalar>(x, "cond_log_prob(multinomial)").value;
            const auto xt = expect_variant<DiscreteScalar>(x_tilde, "cond_log_prob(multinomial)").value;
            detail::check_state(xv, t.states(), "cond_log_prob(multinomial)");
            detail::check_state(xt, t.states(), "cond_log_prob(multinomial)");
            return t.log_prob(xv, xt);
          },
          [&](const ParzenConditional& pz) {
            return pz.log_prob(expect_variant<RealVector>(x, "cond_log_prob(parzen)").values,
                               expect_variant<RealVector>(x_tilde, "cond_log_prob(parzen)").values);
          },
          [&](const BernoulliMlp& mlp) {
            return mlp.log_prob(expect_variant<BinaryVector>(x, "cond_log_prob(mlp)"),
                                expect_variant<BinaryVector>(x_tilde, "cond_log_prob(mlp)"));
          }},
      m);
}

inline Sample cond_sample(const ConditionalModel& m, const Sample& x_tilde, RngStream& rng) {
  return std::visit(
      overloaded{
          [&](const MultinomialTable& t) -> Sample {
            const auto xt = expect_variant<DiscreteScalar>(x_tilde, "cond_sample(multinomial)").value;
            detail::check_state(xt, t.states(), "cond_sample(multinomial)");
            return t.sample(xt, rng);
          },
          [&](const ParzenConditional& pz) -> Sample {
            return pz.sample(expect_variant<RealVector>(x_tilde, "cond_sample(parzen)").values, rng);
          },
          [&](const BernoulliMlp& mlp) -> Sample {
            const auto& xt = expect_variant<BinaryVector>(x_tilde, "cond_sample(mlp)");
            mlp.check_dim(xt.bits.size());
            return mlp.sample(xt, rng);
          }},
      m);
}

}  // namespace gdae
