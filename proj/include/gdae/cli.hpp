#pragma once

#include <CLI11.hpp>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gdae/chain.hpp"
#include "gdae/conditional_model.hpp"
#include "gdae/config.hpp"
#include "gdae/csv.hpp"
#include "gdae/dataset.hpp"
#include "gdae/error.hpp"
#include "gdae/eval.hpp"
#include "gdae/idx.hpp"
#include "gdae/model_io.hpp"
#include "gdae/pgm.hpp"
#include "gdae/training.hpp"

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data or
// validation error. Diagnostics are single lines on stderr.
namespace gdae::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Signals a usage problem detected after argument parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CorruptionFlags {
  std::string kind = "discrete_flip";
  double eps = 0.5;
  double corrupt_prob = 0.5;
  double sigma = 1.0;

  void add_to(CLI::App* app) {
    app->add_option("--corruption", kind, "discrete_flip | salt_pepper | gaussian")
        ->check(CLI::IsMember({"discrete_flip", "salt_pepper", "gaussian"}));
    app->add_option("--eps", eps, "discrete_flip replacement probability");
    app->add_option("--corrupt-prob", corrupt_prob, "salt_pepper per-bit corruption probability");
    app->add_option("--sigma", sigma, "gaussian noise standard deviation");
  }

  CorruptionProcess build(const ConditionalModel& m) const {
    return make_corruption(kind, model_size(m), eps, corrupt_prob, sigma);
  }

  // K for tables, dimension otherwise.
  static std::size_t model_size(const ConditionalModel& m) {
    return std::visit(overloaded{[](const MultinomialTable& t) { return t.states(); },
                                 [](const ParzenConditional& p) { return p.dim(); },
                                 [](const BernoulliMlp& b) { return b.visible(); }},
                      m);
  }
};

inline std::ostream& report_stream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file = csv::open_out(path);
  return file;
}

inline Sample parse_cli_sample(const std::string& text, SampleKind kind, std::size_t expected_dim) {
  std::vector<std::string_view> fields = csv::split(text);
  Sample s = csv::parse_sample(fields, kind, "sample '" + text + "'");
  if (kind != SampleKind::discrete && dimension(s) != expected_dim)
    throw DataError("sample '" + text + "' has " + std::to_string(dimension(s)) + " values, expected " +
                    std::to_string(expected_dim));
  return s;
}

inline Sample default_init(const ConditionalModel& m) {
  return std::visit(overloaded{[](const MultinomialTable&) -> Sample { return DiscreteScalar{0}; },
                               [](const ParzenConditional& p) -> Sample {
                                 const auto a = p.clean_anchor(0);
                                 return RealVector{std::vector<double>(a.begin(), a.end())};
                               },
                               [](const BernoulliMlp& b) -> Sample {
                                 return BinaryVector{std::vector<std::uint8_t>(b.visible(), 0)};
                               }},
                    m);
}

inline Dataset load_training_data(const ExperimentConfig& cfg, const std::string& path) {
  Dataset data = cfg.data_format == "idx" ? load_idx(path, cfg.data_limit) : csv::read_dataset_file(path, cfg.data_kind);
  if (cfg.data_format != "idx" && cfg.data_limit > 0 && data.size() > cfg.data_limit) data.samples.resize(cfg.data_limit);
  data.validate();
  return data;
}

inline int run_train(const std::string& config_path) {
  if (!std::filesystem::exists(config_path)) throw UsageError("config file '" + config_path + "' does not exist");
  const ExperimentConfig cfg = load_config(config_path);
  const Dataset data = load_training_data(cfg, cfg.data_path);
  std::optional<Dataset> valid;
  if (!cfg.valid_path.empty()) valid = load_training_data(cfg, cfg.valid_path);

  std::optional<ConditionalModel> model;
  std::optional<TrainingMetrics> metrics;
  if (cfg.family == "mlp") {
    if (cfg.corruption != "salt_pepper") throw DataError("config: mlp family needs salt_pepper corruption");
    const SaltPepper c(data.dim(), cfg.corrupt_prob);
    auto [mlp, m] = train_dae(data, c, cfg.train, cfg.walkback, {data.dim(), cfg.hidden}, valid ? &*valid : nullptr);
    model = std::move(mlp);
    metrics = std::move(m);
  } else {
    NonparametricOptions opts;
    opts.alpha = cfg.alpha;
    opts.sigma_x = cfg.sigma_x;
    opts.sigma_c = cfg.sigma_c;
    opts.seed = cfg.seed;
    std::optional<CorruptionProcess> c;
    if (cfg.family == "multinomial") {
      if (cfg.corruption != "discrete_flip") throw DataError("config: multinomial family needs discrete_flip corruption");
      std::size_t k = cfg.states;
      if (k == 0) {
        for (const auto& s : data.samples) k = std::max(k, std::get<DiscreteScalar>(s).value + 1);
      }
      c = DiscreteFlip(k, cfg.eps);
      opts.family = NonparametricFamily::multinomial;
    } else {
      if (cfg.corruption != "gaussian") throw DataError("config: parzen family needs gaussian corruption");
      c = IsotropicGaussian(data.dim(), cfg.sigma);
      opts.family = NonparametricFamily::parzen;
    }
    model = fit_nonparametric(data, *c, opts);
    // Single-row metrics: NLL of freshly corrupted training pairs.
    RngStream rng(cfg.seed, 6);
    double total = 0.0;
    for (const auto& s : data.samples) total -= cond_log_prob(*model, s, corrupt(*c, s, rng));
    metrics = TrainingMetrics{{total / static_cast<double>(data.size())},
                              {std::numeric_limits<double>::quiet_NaN()},
                              {0.0}};
  }
  save_model_file(cfg.model_out, *model);
  if (!cfg.metrics_out.empty()) {
    auto out = csv::open_out(cfg.metrics_out);
    csv::write_metrics(out, *metrics);
  }
  std::cerr << "trained " << family_name(*model) << " model on " << data.size() << " examples -> " << cfg.model_out
            << "\n";
  return kExitOk;
}

struct SampleArgs {
  std::string model;
  CorruptionFlags corruption;
  std::size_t steps = 5500;
  std::optional<std::size_t> burn_in;  // default: 10% of steps
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  std::string init;
  std::string out;
  std::string tilde_out;
  std::string grid;
  std::size_t grid_rows = 10;
  std::size_t grid_cols = 10;
};

inline int run_sample(const SampleArgs& a) {
  const ConditionalModel m = load_model_file(a.model);
  const CorruptionProcess c = a.corruption.build(m);
  const SampleKind kind = sample_kind_for(m);
  ChainConfig cfg{a.steps, a.burn_in.value_or(a.steps / 10), a.thin,
                  a.init.empty() ? default_init(m) : parse_cli_sample(a.init, kind, CorruptionFlags::model_size(m))};
  RngStream rng(a.seed, 5);
  const ChainRun run = run_chain(m, c, cfg, rng);
  csv::write_chain_file(a.out, run);
  if (!a.tilde_out.empty()) csv::write_chain_file(a.tilde_out, run, true);
  if (!a.grid.empty()) {
    if (kind != SampleKind::binary) throw DataError("--grid needs a binary model");
    const std::size_t d = CorruptionFlags::model_size(m);
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(d))));
    if (side * side != d) throw DataError("--grid: dimension " + std::to_string(d) + " is not a perfect square");
    std::vector<BinaryVector> tiles;
    for (std::size_t k = 0; k < run.xs.size() && tiles.size() < a.grid_rows * a.grid_cols; ++k)
      tiles.push_back(std::get<BinaryVector>(run.xs[k]));
    write_sample_grid(tiles, a.grid_rows, a.grid_cols, side, a.grid);
  }
  std::cerr << "wrote " << run.xs.size() << " chain samples -> " << a.out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string chain;
  std::string test;
  std::string samples;
  std::string target;
  std::string reference;
  std::size_t bins = 20;
  double threshold = 0.15;
  CorruptionFlags corruption;
  std::string x;
  std::string x2;
  std::string anchor;
  std::string out;
  std::uint64_t seed = 0;
};

inline int run_eval_bound(const EvalArgs& a) {
  const ConditionalModel m = load_model_file(a.model);
  const SampleKind kind = sample_kind_for(m);
  const Dataset chain = csv::read_dataset_file(a.chain, kind);
  const Dataset test = csv::read_dataset_file(a.test, kind);
  const BoundEstimate b = loglik_bound(m, std::span<const Sample>(chain.samples), test);
  std::ofstream file;
  csv::write_report(report_stream(a.out, file),
                    {{"loglik_bound", b.mean_log_lik, b.n_chain_samples, a.seed}, {"n_test", double(b.n_test), b.n_test, a.seed}});
  return kExitOk;
}

inline int run_eval_tv(const EvalArgs& a) {
  if (a.target.empty() == a.reference.empty()) throw UsageError("eval tv: give exactly one of --target or --reference");
  std::vector<csv::ReportRow> rows;
  if (!a.target.empty()) {
    const ProbVector p = csv::read_distribution_file(a.target);
    const Dataset samples = csv::read_dataset_file(a.samples, SampleKind::discrete);
    const TvReport r = histogram_compare(samples.samples, p);
    rows.push_back({"tv", r.tv, r.n_samples, a.seed});
  } else {
    const Dataset samples = csv::read_dataset_file(a.samples, SampleKind::real);
    const Dataset ref = csv::read_dataset_file(a.reference, SampleKind::real);
    const PairwiseTvReport r = histogram_compare(samples.samples, ref, a.bins);
    rows.push_back({"pair_tv_max", r.max_tv(), r.n_samples, a.seed});
    rows.push_back({"pair_tv_mean", r.mean_tv(), r.n_samples, a.seed});
    rows.push_back({"pair_tv_fraction_within_threshold", r.fraction_at_most(a.threshold), r.n_samples, a.seed});
  }
  std::ofstream file;
  csv::write_report(report_stream(a.out, file), rows);
  return kExitOk;
}

inline int run_eval_energy(const EvalArgs& a) {
  const ConditionalModel m = load_model_file(a.model);
  const CorruptionProcess c = a.corruption.build(m);
  const SampleKind kind = sample_kind_for(m);
  const std::size_t dim = CorruptionFlags::model_size(m);
  const Sample anchor = parse_cli_sample(a.anchor, kind, dim);
  const EnergyEstimate e1 = energy_estimate(m, c, parse_cli_sample(a.x, kind, dim), anchor);
  std::vector<csv::ReportRow> rows{{"energy", e1.energy, 1, a.seed}};
  if (!a.x2.empty()) {
    const EnergyEstimate e2 = energy_estimate(m, c, parse_cli_sample(a.x2, kind, dim), anchor);
    rows.push_back({"energy_x2", e2.energy, 1, a.seed});
    rows.push_back({"energy_difference", e2.energy - e1.energy, 1, a.seed});
  }
  std::ofstream file;
  csv::write_report(report_stream(a.out, file), rows);
  return kExitOk;
}

struct OracleArgs {
  std::string model;
  CorruptionFlags corruption;
  std::string out;
  std::string report;
};

inline int run_oracle(const OracleArgs& a) {
  const ConditionalModel m = load_model_file(a.model);
  const CorruptionProcess c = a.corruption.build(m);
  const ErgodicityReport report = check_ergodicity(m, c);
  if (!a.report.empty()) {
    auto out = csv::open_out(a.report);
    out << "kind,row,col\n";
    for (const auto& v : report.violations) out << violation_kind_name(v.kind) << ',' << v.row << ',' << v.col << '\n';
  }
  if (!report.ok()) {
    std::cerr << "ergodicity violations: " << report.count(ErgodicityViolation::Kind::model) << " model, "
              << report.count(ErgodicityViolation::Kind::corruption) << " corruption, "
              << report.count(ErgodicityViolation::Kind::transition) << " transition\n";
    throw ErgodicityError("oracle: model and corruption are not strictly positive; stationary distribution is not "
                          "guaranteed to match the target");
  }
  const ProbVector pi = stationary_distribution(build_transition_matrix(m, c));
  std::ofstream file;
  csv::write_distribution(report_stream(a.out, file), pi);
  return kExitOk;
}

struct GenArgs {
  std::size_t n = 5000;
  std::uint64_t seed = 0;
  std::string target;
  std::string write_target;
  std::string out;
  std::size_t dim = 10;
  std::size_t components = 3;
  double spread = 2.0;
  double stddev = 1.0;
  std::optional<std::uint64_t> means_seed;
};

inline int run_gen_discrete(const GenArgs& a) {
  const ProbVector p = a.target.empty() ? default_discrete_target() : csv::read_distribution_file(a.target);
  csv::write_dataset_file(a.out, gen_discrete(p, a.n, a.seed));
  if (!a.write_target.empty()) csv::write_distribution_file(a.write_target, p);
  return kExitOk;
}

inline int run_gen_mixture(const GenArgs& a) {
  const auto comps = random_mixture_components(a.components, a.dim, a.spread, a.stddev, a.means_seed.value_or(a.seed));
  csv::write_dataset_file(a.out, gen_mixture(comps, a.n, a.seed));
  return kExitOk;
}

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Generalized denoising auto-encoders: training, sampling, evaluation"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset as CSV");
  gen_cmd->require_subcommand(1);
  auto* gen_disc = gen_cmd->add_subcommand("discrete", "i.i.d. categorical draws");
  auto* gen_mix = gen_cmd->add_subcommand("mixture", "Isotropic Gaussian mixture");
  for (auto* c : {gen_disc, gen_mix}) {
    c->add_option("--n", gen.n, "number of samples");
    c->add_option("--seed", gen.seed, "random seed");
    c->add_option("--out", gen.out, "output CSV")->required();
  }
  gen_disc->add_option("--target", gen.target, "distribution CSV (state,prob); default: canonical 10-state target");
  gen_disc->add_option("--write-target", gen.write_target, "also write the target distribution CSV here");
  gen_mix->add_option("--dim", gen.dim, "dimension");
  gen_mix->add_option("--components", gen.components, "number of equal-weight components");
  gen_mix->add_option("--spread", gen.spread, "means uniform in [-spread, spread]^dim");
  gen_mix->add_option("--std", gen.stddev, "component standard deviation");
  gen_mix->add_option("--means-seed", gen.means_seed, "seed for the component means (default: --seed)");

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "Fit a model from an experiment config");
  train_cmd->add_option("--config", config_path, "experiment config file")->required();

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Run the pseudo-Gibbs chain of a saved model");
  sample_cmd->add_option("--model", sample.model, "model file")->required();
  sample.corruption.add_to(sample_cmd);
  sample_cmd->add_option("--steps", sample.steps, "total chain steps");
  sample_cmd->add_option("--burn-in", sample.burn_in, "steps discarded before retaining (default: 10% of --steps)");
  sample_cmd->add_option("--thin", sample.thin, "retain every thin-th step");
  sample_cmd->add_option("--seed", sample.seed, "random seed");
  sample_cmd->add_option("--init", sample.init, "initial X0, comma separated");
  sample_cmd->add_option("--out", sample.out, "chain CSV of X_t")->required();
  sample_cmd->add_option("--tilde-out", sample.tilde_out, "chain CSV of the corrupted X~_t");
  sample_cmd->add_option("--grid", sample.grid, "PGM grid of the first retained samples (binary models)");
  sample_cmd->add_option("--grid-rows", sample.grid_rows, "grid rows");
  sample_cmd->add_option("--grid-cols", sample.grid_cols, "grid columns");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate samples or a model");
  eval_cmd->require_subcommand(1);
  auto* bound_cmd = eval_cmd->add_subcommand("bound", "Non-parametric log-likelihood bound");
  bound_cmd->add_option("--model", ev.model, "model file")->required();
  bound_cmd->add_option("--chain", ev.chain, "chain CSV of corrupted samples (sample --tilde-out)")->required();
  bound_cmd->add_option("--test", ev.test, "test dataset CSV")->required();
  auto* tv_cmd = eval_cmd->add_subcommand("tv", "Histogram total variation against a target or reference");
  tv_cmd->add_option("--samples", ev.samples, "chain or dataset CSV")->required();
  tv_cmd->add_option("--target", ev.target, "discrete target distribution CSV");
  tv_cmd->add_option("--reference", ev.reference, "continuous reference dataset CSV");
  tv_cmd->add_option("--bins", ev.bins, "bins per axis (continuous)");
  tv_cmd->add_option("--threshold", ev.threshold, "per-pair TV threshold for the reported fraction");
  auto* energy_cmd = eval_cmd->add_subcommand("energy", "Anchored relative energy");
  energy_cmd->add_option("--model", ev.model, "model file")->required();
  ev.corruption.add_to(energy_cmd);
  energy_cmd->add_option("--x", ev.x, "point, comma separated")->required();
  energy_cmd->add_option("--x2", ev.x2, "second point; adds the energy difference");
  energy_cmd->add_option("--anchor", ev.anchor, "anchor X~")->required();
  for (auto* c : {bound_cmd, tv_cmd, energy_cmd}) {
    c->add_option("--out", ev.out, "report CSV (default: stdout)");
    c->add_option("--seed", ev.seed, "seed recorded in the report");
  }

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact stationary distribution of a finite-state model");
  oracle_cmd->add_option("--model", oracle.model, "model file")->required();
  oracle.corruption.add_to(oracle_cmd);
  oracle_cmd->add_option("--out", oracle.out, "stationary distribution CSV (default: stdout)");
  oracle_cmd->add_option("--report", oracle.report, "ergodicity violations CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen_disc->parsed()) return run_gen_discrete(gen);
    if (gen_mix->parsed()) return run_gen_mixture(gen);
    if (train_cmd->parsed()) return run_train(config_path);
    if (sample_cmd->parsed()) return run_sample(sample);
    if (bound_cmd->parsed()) return run_eval_bound(ev);
    if (tv_cmd->parsed()) return run_eval_tv(ev);
    if (energy_cmd->parsed()) return run_eval_energy(ev);
    if (oracle_cmd->parsed()) return run_oracle(oracle);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  std::cerr << "error: no command\n";
  return kExitUsage;
}

}  // namespace gdae::cli
