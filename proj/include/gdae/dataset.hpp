#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gdae/distributions.hpp"
#include "gdae/error.hpp"
#include "gdae/rng.hpp"
#include "gdae/sample.hpp"

namespace gdae {

struct Dataset {
  std::vector<Sample> samples;
  std::string name;
  std::string source;

  std::size_t size() const { return samples.size(); }
  SampleKind kind() const { return kind_of(samples.front()); }
  std::size_t dim() const { return dimension(samples.front()); }

  // Non-empty, one variant, one dimension.
  void validate() const {
    if (samples.empty()) throw InvalidArgument("dataset '" + name + "' is empty");
    const SampleKind k = kind();
    const std::size_t d = dim();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (kind_of(samples[i]) != k || dimension(samples[i]) != d)
        throw VariantMismatch("dataset '" + name + "': sample " + std::to_string(i) +
                              " differs in variant or dimension from sample 0");
    }
  }
};

// Canonical non-uniform target over 10 states for the discrete experiments
// (a seeded Dirichlet(2) draw, frozen). Also shipped as data/discrete_target.csv.
inline ProbVector default_discrete_target() {
  return ProbVector({0.07318235040888629, 0.1232874862515547, 0.06330129571126591, 0.05887122547552039,
                     0.15562303717906623, 0.06813778114328735, 0.11650649997236746, 0.13491554156070193,
                     0.16532602572591312, 0.04084875657143677});
}

inline Dataset gen_discrete(const ProbVector& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("gen_discrete: n must be positive");
  RngStream rng(seed, 0);
  Dataset out{{}, "discrete", "gen_discrete(K=" + std::to_string(p.size()) + ", seed=" + std::to_string(seed) + ")"};
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.samples.emplace_back(sample_categorical(p, rng));
  return out;
}

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  double stddev = 1.0;
};

// Component index first, then an isotropic Gaussian draw around its mean.
inline Dataset gen_mixture(const std::vector<MixtureComponent>& components, std::size_t n, std::uint64_t seed) {
  if (components.empty()) throw InvalidArgument("gen_mixture: no components");
  if (n == 0) throw InvalidArgument("gen_mixture: n must be positive");
  std::vector<double> weights;
  const std::size_t d = components.front().mean.size();
  if (d == 0) throw InvalidArgument("gen_mixture: zero-dimensional mean");
  for (const auto& comp : components) {
    if (comp.mean.size() != d) throw InvalidArgument("gen_mixture: component means differ in dimension");
    if (!(comp.stddev > 0.0)) throw InvalidArgument("gen_mixture: stddev must be positive");
    weights.push_back(comp.weight);
  }
  const ProbVector w(weights);
  RngStream rng(seed, 0);
  Dataset out{{}, "mixture", "gen_mixture(components=" + std::to_string(components.size()) +
                                 ", seed=" + std::to_string(seed) + ")"};
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& comp = components[sample_categorical(w, rng).value];
    RealVector x{comp.mean};
    for (double& v : x.values) v += comp.stddev * rng.normal();
    out.samples.emplace_back(std::move(x));
  }
  return out;
}

// Equal-weight components whose means are uniform in [-spread, spread]^dim,
// drawn from a stream separate from the data stream.
inline std::vector<MixtureComponent> random_mixture_components(std::size_t count, std::size_t dim, double spread,
                                                               double stddev, std::uint64_t seed) {
  if (count == 0 || dim == 0) throw InvalidArgument("random_mixture_components: empty shape");
  RngStream rng(seed, 7);
  std::vector<MixtureComponent> out(count);
  for (auto& comp : out) {
    comp.weight = 1.0 / static_cast<double>(count);
    comp.stddev = stddev;
    comp.mean.resize(dim);
    for (double& v : comp.mean) v = spread * (2.0 * rng.uniform() - 1.0);
  }
  return out;
}

}  // namespace gdae
