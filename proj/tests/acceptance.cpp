// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Exit code 77 means the MNIST files were
// requested but are not available.
//
//   acceptance [--skip-mnist] [--only-mnist] [--mnist-dir DIR] [--artifacts DIR]

#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gdae/gdae.hpp"
#include "oracles.hpp"

namespace {

using namespace gdae;
namespace fs = std::filesystem;

// FNV-1a over the bytes of everything a criterion computed; two runs are
// bit-identical exactly when their fingerprints agree.
class Fingerprint {
 public:
  void add(double v) { add_bytes(&v, sizeof v); }
  void add(std::uint64_t v) { add_bytes(&v, sizeof v); }
  void add(const std::vector<double>& v) {
    for (double x : v) add(x);
  }
  void add(const Sample& s) {
    std::visit(overloaded{[&](const DiscreteScalar& v) { add(std::uint64_t{v.value}); },
                          [&](const BinaryVector& v) { add_bytes(v.bits.data(), v.bits.size()); },
                          [&](const RealVector& v) { add(v.values); }},
               s);
  }
  void add(const MlpParameters& p) {
    for (std::size_t i = 0; i < p.parameter_count(); ++i) add(p.flat(i));
  }
  std::uint64_t value() const { return h_; }

 private:
  void add_bytes(const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 1099511628211ULL;
    }
  }
  std::uint64_t h_ = 1469598103934665603ULL;
};

struct Outcome {
  bool pass = false;
  std::string detail;
  std::uint64_t fingerprint = 0;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --- 1 ------------------------------------------------------------------------

Outcome exact_oracle() {
  RngStream rng(101, 0);
  Fingerprint fp;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = std::array<std::size_t, 3>{2, 5, 10}[trial % 3];
    std::vector<double> w(k);
    for (double& v : w) v = 0.05 + rng.uniform();
    const ProbVector p = ProbVector::from_weights(w);
    const DiscreteFlip c(k, 0.05 + 0.95 * rng.uniform());
    const ProbVector pi = stationary_distribution(build_transition_matrix(build_true_conditional(p, c), c));
    worst = std::max(worst, total_variation(pi, p));
    fp.add(pi.vector());
  }
  return {worst <= 1e-9, fmt("max TV(pi, P) = %.3g over 20 instances (limit 1e-9)", worst), fp.value()};
}

// --- 2 ------------------------------------------------------------------------

Outcome discrete_replication() {
  const ProbVector p = default_discrete_target();
  const DiscreteFlip c(10, 0.5);
  const ConditionalModel m =
      fit_nonparametric(gen_discrete(p, 5000, 2013), c, {NonparametricFamily::multinomial, 0.1, 0, 0, 2013});
  RngStream rng(2013, 5);
  const ChainRun run = run_chain(m, c, {5500, 500, 1, DiscreteScalar{0}}, rng);
  const double chain_tv = histogram_compare(run.xs, p).tv;
  const ProbVector pi = stationary_distribution(build_transition_matrix(m, c));
  const double oracle_tv = total_variation(pi, p);
  Fingerprint fp;
  for (const auto& s : run.xs) fp.add(s);
  fp.add(pi.vector());
  return {run.xs.size() == 5000 && chain_tv <= 0.05 && oracle_tv <= 0.05,
          fmt("%zu chain samples: TV(hist, P) = %.4f, TV(oracle, P) = %.4f (limit 0.05)", run.xs.size(), chain_tv,
              oracle_tv),
          fp.value()};
}

// --- 3 ------------------------------------------------------------------------

Outcome consistency_trend() {
  const ProbVector p = default_discrete_target();
  const DiscreteFlip c(10, 0.5);
  Fingerprint fp;
  int improved = 0;
  std::string values;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<double> tvs;
    for (std::size_t n : {500u, 5000u, 50000u}) {
      const auto m = fit_nonparametric(gen_discrete(p, n, 3000 + seed), c,
                                       {NonparametricFamily::multinomial, 0.1, 0, 0, 3000 + seed});
      tvs.push_back(total_variation(stationary_distribution(build_transition_matrix(m, c)), p));
    }
    fp.add(tvs);
    improved += tvs[2] < tvs[0];
    values += fmt(" [%.3f %.3f %.4f]", tvs[0], tvs[1], tvs[2]);
  }
  return {improved >= 4, fmt("decreased in %d/5 seeds (need 4); TV at n=500/5000/50000:%s", improved, values.c_str()),
          fp.value()};
}

// --- 4 ------------------------------------------------------------------------

bool refuses(const ConditionalModel& m, const CorruptionProcess& c) {
  try {
    stationary_distribution(build_transition_matrix(m, c));
  } catch (const ErgodicityError&) {
    return true;
  }
  return false;
}

Outcome ergodicity_gate() {
  const ProbVector p = default_discrete_target();
  const Dataset data = gen_discrete(p, 5000, 4);
  Fingerprint fp;

  // eps = 0: identity corruption, counting table without smoothing.
  const DiscreteFlip identity(10, 0.0);
  const ConditionalModel no_noise = fit_nonparametric(data, identity, {NonparametricFamily::multinomial, 0.0, 0, 0, 4});
  const auto r0 = check_ergodicity(no_noise, identity);
  const bool case0 = r0.count(ErgodicityViolation::Kind::corruption) == 90 && refuses(no_noise, identity);

  // alpha = 0 with unseen corrupted rows: eight pairs cannot cover ten rows.
  const DiscreteFlip noisy(10, 0.5);
  Dataset few;
  few.samples.assign(data.samples.begin(), data.samples.begin() + 8);
  const ConditionalModel sparse = fit_nonparametric(few, noisy, {NonparametricFamily::multinomial, 0.0, 0, 0, 4});
  const auto r1 = check_ergodicity(sparse, noisy);
  const bool case1 = r1.count(ErgodicityViolation::Kind::model) > 0 && refuses(sparse, noisy);

  // eps > 0 and alpha > 0: clean.
  const ConditionalModel smooth = fit_nonparametric(data, noisy, {NonparametricFamily::multinomial, 0.1, 0, 0, 4});
  const auto r2 = check_ergodicity(smooth, noisy);
  bool case2 = r2.ok();
  try {
    fp.add(stationary_distribution(build_transition_matrix(smooth, noisy)).vector());
  } catch (const Error&) {
    case2 = false;
  }
  fp.add(std::uint64_t{r0.violations.size()});
  fp.add(std::uint64_t{r1.violations.size()});
  return {case0 && case1 && case2,
          fmt("eps=0: %zu violations, refused=%d; alpha=0 sparse: %zu violations, refused=%d; eps,alpha>0: %zu "
              "violations",
              r0.violations.size(), refuses(no_noise, identity), r1.violations.size(), refuses(sparse, noisy),
              r2.violations.size()),
          fp.value()};
}

// --- 5 ------------------------------------------------------------------------

Outcome energy_identity() {
  const ProbVector p = default_discrete_target();
  const DiscreteFlip c(10, 0.5);
  const ConditionalModel m = build_true_conditional(p, c);
  Fingerprint fp;
  double worst = 0.0;
  for (std::size_t a = 0; a < 10; ++a)
    for (std::size_t x1 = 0; x1 < 10; ++x1)
      for (std::size_t x2 = 0; x2 < 10; ++x2) {
        const double d = energy_difference(m, c, DiscreteScalar{x1}, DiscreteScalar{x2}, DiscreteScalar{a});
        worst = std::max(worst, std::abs(d - (std::log(p[x1]) - std::log(p[x2]))));
        fp.add(d);
      }
  // Paths x1 -> x2 -> x3 with each link anchored at its midpoint state.
  double worst_path = 0.0;
  for (std::size_t x1 = 0; x1 < 10; ++x1)
    for (std::size_t x2 = 0; x2 < 10; ++x2)
      for (std::size_t x3 = 0; x3 < 10; ++x3) {
        const std::vector<Sample> path{DiscreteScalar{x1}, DiscreteScalar{x2}, DiscreteScalar{x3}};
        const std::vector<Sample> anchors{DiscreteScalar{(x1 + x2) / 2}, DiscreteScalar{(x2 + x3) / 2}};
        const double along = path_energy_difference(m, c, path, anchors);
        const double direct = energy_difference(m, c, path.front(), path.back(), DiscreteScalar{(x1 + x3) / 2});
        worst_path = std::max(worst_path, std::abs(along - direct));
        fp.add(along);
      }
  return {worst <= 1e-9 && worst_path <= 1e-9,
          fmt("max |dE - log ratio| = %.3g over 1000 triples, max path telescoping error = %.3g (limit 1e-9)", worst,
              worst_path),
          fp.value()};
}

// --- 6 ------------------------------------------------------------------------

Outcome gradient_check() {
  RngStream rng(606, 0);
  Fingerprint fp;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + rng.uniform_int(7), h = 1 + rng.uniform_int(8);
    auto m = BernoulliMlp::initialized(d, h, rng);
    for (std::size_t i = 0; i < m.params().parameter_count(); ++i) m.mutable_params().flat(i) += 0.5 * rng.normal();
    BinaryVector x, xt;
    for (std::size_t j = 0; j < d; ++j) {
      x.bits.push_back(rng.uniform() < 0.5);
      xt.bits.push_back(rng.uniform() < 0.5);
    }
    const std::vector<double> xv(x.bits.begin(), x.bits.end()), xtv(xt.bits.begin(), xt.bits.end());
    const auto grad = mlp_grad(m, x, xt);
    const auto fd = oracle::finite_difference_gradient(
        m.params(), [&](const MlpParameters& p) { return oracle::mlp_nll_loops(p, xv, xtv); }, 1e-5);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double a = grad.flat(i), b = fd[i];
      worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3}));
    }
    fp.add(grad);
  }
  return {worst <= 1e-4, fmt("max relative error %.3g over 10 instances (limit 1e-4)", worst), fp.value()};
}

// --- 7 ------------------------------------------------------------------------

Outcome walkback_law() {
  const ConditionalModel m = MultinomialTable(10, 0.1);
  const CorruptionProcess c = DiscreteFlip(10, 0.5);
  const WalkbackConfig wb{true, 0.5, 20, 0};
  RngStream rng(707, 0);
  const int n = 100000;
  std::vector<double> observed(21, 0.0);
  double total = 0.0;
  Fingerprint fp;
  for (int i = 0; i < n; ++i) {
    const auto l = walkback_rollout(m, c, DiscreteScalar{static_cast<std::size_t>(i % 10)}, wb, rng);
    observed[l.size()] += 1.0;
    total += static_cast<double>(l.size());
    fp.add(l.back());
  }
  const double mean = total / n;

  std::vector<double> prob(21, 0.0);
  for (std::size_t k = 1; k < 20; ++k) prob[k] = std::pow(0.5, static_cast<double>(k));
  prob[20] = std::pow(0.5, 19.0);
  // Cells with expected count below 5 are pooled into one tail cell.
  double stat = 0.0, obs_tail = 0.0, exp_tail = 0.0;
  int cells = 0;
  for (std::size_t k = 1; k <= 20; ++k) {
    if (n * prob[k] >= 5.0 && k < 20) {
      stat += std::pow(observed[k] - n * prob[k], 2) / (n * prob[k]);
      ++cells;
    } else {
      obs_tail += observed[k];
      exp_tail += n * prob[k];
    }
  }
  stat += std::pow(obs_tail - exp_tail, 2) / exp_tail;
  ++cells;
  const double critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(cells - 1), 0.01));
  fp.add(mean);
  return {std::abs(mean - 2.0) <= 0.02 && stat < critical,
          fmt("mean length %.4f (2 +/- 0.02); chi-square %.2f on %d dof, critical %.2f at 0.01", mean, stat,
              cells - 1, critical),
          fp.value()};
}

// --- 8 ------------------------------------------------------------------------

Outcome continuous_replication() {
  const auto comps = random_mixture_components(3, 10, 2.0, 1.0, 808);
  const Dataset train = gen_mixture(comps, 500, 809);
  const Dataset reference = gen_mixture(comps, 20000, 810);
  const IsotropicGaussian c(10, 1.5);
  const ConditionalModel m = fit_nonparametric(train, c, {NonparametricFamily::parzen, 0.1, 0.5, 1.5, 811});
  RngStream rng(812, 5);
  const ChainRun run = run_chain(m, c, {25500, 500, 5, train.samples.front()}, rng);
  const PairwiseTvReport r = histogram_compare(run.xs, reference, 20);
  Fingerprint fp;
  for (const auto& s : run.xs) fp.add(s);
  for (const auto& pr : r.pairs) fp.add(pr.tv);
  const double frac = r.fraction_at_most(0.15);
  return {run.xs.size() == 5000 && frac >= 0.8,
          fmt("%zu chain samples vs %zu reference draws: %.1f%% of %zu pairs with TV <= 0.15 (need 80%%); mean "
              "%.3f, max %.3f",
              run.xs.size(), reference.size(), 100.0 * frac, r.pairs.size(), r.mean_tv(), r.max_tv()),
          fp.value()};
}

// --- 9 ------------------------------------------------------------------------

struct MnistRun {
  std::vector<double> nll;
  double bound = 0.0;
  bool grid_ok = false;
};

Outcome mnist_desk_scale(const std::string& dir, const std::string& artifacts) {
  const Dataset train = load_idx(dir + "/train-images-idx3-ubyte", 5000);
  const Dataset test = load_idx(dir + "/t10k-images-idx3-ubyte", 1000);
  const SaltPepper c(784, 0.5);
  Fingerprint fp;
  bool decreasing = true, finite = true, grids = true;
  int walkback_wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    MnistRun runs[2];
    for (int mode = 0; mode < 2; ++mode) {
      const bool walkback = mode == 1;
      TrainConfig cfg;
      cfg.epochs = 20;
      cfg.seed = seed;
      const auto [model, metrics] = train_dae(train, c, cfg, {walkback, 0.5, 20, 5}, {784, 256});
      RngStream rng(seed, 5);
      const ChainRun chain = run_chain(model, c, {1100, 100, 1, train.samples.front()}, rng);
      MnistRun& r = runs[mode];
      r.nll = metrics.train_nll;
      r.bound = loglik_bound(model, chain, test).mean_log_lik;
      for (std::size_t e = 1; e < 5; ++e) decreasing = decreasing && r.nll[e] < r.nll[e - 1];
      finite = finite && std::isfinite(r.bound);
      std::vector<BinaryVector> tiles;
      for (std::size_t k = 0; k < 100; ++k) tiles.push_back(std::get<BinaryVector>(chain.xs[k * 10]));
      try {
        const auto path = fs::path(artifacts) / fmt("mnist_seed%llu_%s.pgm", static_cast<unsigned long long>(seed),
                                                     walkback ? "walkback" : "plain");
        write_sample_grid(tiles, 10, 10, 28, path.string());
        r.grid_ok = read_pgm(path.string()).width == 290;
      } catch (const std::exception&) {
        r.grid_ok = false;
      }
      grids = grids && r.grid_ok;
      fp.add(model.params());
      fp.add(r.nll);
      fp.add(r.bound);
    }
    walkback_wins += runs[1].bound > runs[0].bound;
    detail += fmt(" seed %llu: plain %.2f / walkback %.2f;", static_cast<unsigned long long>(seed), runs[0].bound,
                  runs[1].bound);
  }
  return {decreasing && finite && grids && walkback_wins >= 2,
          fmt("(a) NLL decreasing over epochs 1-5: %s; (b) walkback bound higher in %d/3 (need 2), finite: %s;%s (c) "
              "grids: %s",
              decreasing ? "yes" : "no", walkback_wins, finite ? "yes" : "no", detail.c_str(), grids ? "ok" : "failed"),
          fp.value()};
}

// --- 11 -----------------------------------------------------------------------

Outcome fixtures() {
  const std::vector<std::uint8_t> idx{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 128, 127, 255, 0, 200, 1};
  const Dataset d = idx_to_dataset(parse_idx(idx), "fixture");
  const bool idx_ok = idx.size() == 24 && d.size() == 2 && d.samples[0] == Sample(BinaryVector{{0, 1, 1, 0}}) &&
                      d.samples[1] == Sample(BinaryVector{{1, 0, 1, 0}});
  const std::vector<BinaryVector> tile{BinaryVector{{1, 1, 1, 1}}};
  const auto pgm = encode_pgm(render_sample_grid(tile, 1, 1, 2));
  const std::string header = "P5\n3 3\n255\n";
  std::vector<std::uint8_t> expected(header.begin(), header.end());
  for (int px : {255, 255, 128, 255, 255, 128, 128, 128, 128}) expected.push_back(static_cast<std::uint8_t>(px));
  Fingerprint fp;
  for (auto b : pgm) fp.add(std::uint64_t{b});
  return {idx_ok && pgm == expected,
          fmt("IDX fixture bits %s; PGM %zu bytes %s", idx_ok ? "match" : "differ", pgm.size(),
              pgm == expected ? "match byte-for-byte" : "differ"),
          fp.value()};
}

// -----------------------------------------------------------------------------

struct Result {
  Outcome outcome;
  double seconds;
};

Result timed(const std::function<Outcome()>& f) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what(), 0};
  }
  return {o, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

}  // namespace

int main(int argc, char** argv) {
  bool skip_mnist = false, only_mnist = false;
  std::string mnist_dir, artifacts = (fs::temp_directory_path() / "gdae_acceptance").string();
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--skip-mnist") skip_mnist = true;
    else if (a == "--only-mnist") only_mnist = true;
    else if (a == "--mnist-dir" && i + 1 < argc) mnist_dir = argv[++i];
    else if (a == "--artifacts" && i + 1 < argc) artifacts = argv[++i];
    else {
      std::fprintf(stderr, "usage: acceptance [--skip-mnist] [--only-mnist] [--mnist-dir DIR] [--artifacts DIR]\n");
      return 1;
    }
  }

  std::vector<Criterion> criteria;
  if (!only_mnist) {
    criteria = {
        {1, "exact oracle recovers P", 1.0, exact_oracle},
        {2, "discrete replication", 10.0, discrete_replication},
        {3, "consistency trend", 30.0, consistency_trend},
        {4, "ergodicity gate", 1.0, ergodicity_gate},
        {5, "energy identity", 1.0, energy_identity},
        {6, "gradient correctness", 5.0, gradient_check},
        {7, "walkback rollout law", 5.0, walkback_law},
        {8, "continuous replication", 60.0, continuous_replication},
        {11, "IDX/PGM fixtures", 1.0, fixtures},
    };
  }
  if (!skip_mnist) {
    const bool present = !mnist_dir.empty() && fs::exists(fs::path(mnist_dir) / "train-images-idx3-ubyte") &&
                         fs::exists(fs::path(mnist_dir) / "t10k-images-idx3-ubyte");
    if (!present) {
      std::printf("[SKIP]  9 MNIST desk scale: train-images-idx3-ubyte / t10k-images-idx3-ubyte not found in '%s'\n",
                  mnist_dir.c_str());
      if (only_mnist) return 77;
    } else {
      fs::create_directories(artifacts);
      criteria.push_back({9, "MNIST desk scale", 1800.0, [=] { return mnist_desk_scale(mnist_dir, artifacts); }});
    }
  }

  bool all_pass = true;
  std::vector<std::pair<int, bool>> determinism;
  for (const auto& c : criteria) {
    const Result first = timed(c.run);
    const bool in_time = first.seconds < c.time_limit;
    const bool pass = first.outcome.pass && in_time;
    all_pass = all_pass && pass;
    std::printf("[%s] %2d %s: %s (%.2f s, limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                first.outcome.detail.c_str(), first.seconds, c.time_limit);
    std::fflush(stdout);
    const Result second = timed(c.run);
    determinism.emplace_back(c.id, first.outcome.fingerprint == second.outcome.fingerprint &&
                                       first.outcome.detail == second.outcome.detail);
  }

  if (!criteria.empty()) {
    bool same = true;
    std::string ids;
    for (auto [id, ok] : determinism) {
      same = same && ok;
      ids += fmt(" %d:%s", id, ok ? "same" : "DIFFERENT");
    }
    all_pass = all_pass && same;
    std::printf("[%s] 10 determinism: second run bit-identical for every criterion above (%s )\n",
                same ? "PASS" : "FAIL", ids.c_str());
  }
  return all_pass ? 0 : 1;
}
