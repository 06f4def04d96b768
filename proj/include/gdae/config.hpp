#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <type_traits>
#include <string>

#include "gdae/corruption.hpp"
#include "gdae/error.hpp"
#include "gdae/sample.hpp"
#include "gdae/training.hpp"

namespace gdae {

// Experiment description read from a flat `key = value` file with
// `[section]` headers and `#` comments. Keys before the first section
// belong to the top level (only `seed`). Relative paths are resolved
// against the config file's directory.
struct ExperimentConfig {
  std::uint64_t seed = 0;

  std::string data_path;
  std::string data_format = "csv";  // csv | idx
  SampleKind data_kind = SampleKind::discrete;
  bool data_kind_set = false;
  std::size_t data_limit = 0;
  std::string valid_path;

  std::string corruption;  // discrete_flip | salt_pepper | gaussian
  double eps = 0.5;
  double corrupt_prob = 0.5;
  double sigma = 1.0;

  std::string family;  // multinomial | parzen | mlp
  std::size_t states = 0;
  double alpha = 0.1;
  double sigma_x = 0.0;
  double sigma_c = 0.0;
  std::size_t hidden = 256;

  TrainConfig train{};
  WalkbackConfig walkback{};

  std::size_t chain_steps = 5500;
  std::size_t chain_burn_in = 500;
  std::size_t chain_thin = 1;

  std::string model_out;
  std::string metrics_out;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_config_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw DataError("config key '" + key + "': cannot parse '" + value + "'");
  return out;
}

inline bool parse_config_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw DataError("config key '" + key + "': expected true or false, got '" + value + "'");
}

inline std::string unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                                     const std::string& name = "config") {
  ExperimentConfig cfg;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).string();
  };
  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  auto num = [](auto& field) {
    return Setter([&field](const std::string& k, const std::string& v) {
      field = detail::parse_config_number<std::remove_reference_t<decltype(field)>>(k, v);
    });
  };
  auto choice = [](std::string& field, std::set<std::string> allowed) {
    return Setter([&field, allowed](const std::string& k, const std::string& v) {
      if (!allowed.count(v)) throw DataError("config key '" + k + "': unsupported value '" + v + "'");
      field = v;
    });
  };
  auto path = [&](std::string& field) {
    return Setter([&field, &resolve](const std::string&, const std::string& v) { field = resolve(v); });
  };

  const std::map<std::string, Setter> setters = {
      {"seed", num(cfg.seed)},
      {"data.path", path(cfg.data_path)},
      {"data.format", choice(cfg.data_format, {"csv", "idx"})},
      {"data.kind",
       [&](const std::string& k, const std::string& v) {
         if (v == "discrete") cfg.data_kind = SampleKind::discrete;
         else if (v == "binary") cfg.data_kind = SampleKind::binary;
         else if (v == "real") cfg.data_kind = SampleKind::real;
         else throw DataError("config key '" + k + "': unsupported value '" + v + "'");
         cfg.data_kind_set = true;
       }},
      {"data.limit", num(cfg.data_limit)},
      {"data.valid_path", path(cfg.valid_path)},
      {"corruption.corruption", choice(cfg.corruption, {"discrete_flip", "salt_pepper", "gaussian"})},
      {"corruption.eps", num(cfg.eps)},
      {"corruption.corrupt_prob", num(cfg.corrupt_prob)},
      {"corruption.sigma", num(cfg.sigma)},
      {"model.family", choice(cfg.family, {"multinomial", "parzen", "mlp"})},
      {"model.states", num(cfg.states)},
      {"model.alpha", num(cfg.alpha)},
      {"model.sigma_x", num(cfg.sigma_x)},
      {"model.sigma_c", num(cfg.sigma_c)},
      {"model.hidden", num(cfg.hidden)},
      {"train.epochs", num(cfg.train.epochs)},
      {"train.minibatch", num(cfg.train.minibatch)},
      {"train.learning_rate", num(cfg.train.learning_rate)},
      {"train.momentum", num(cfg.train.momentum)},
      {"train.lr_decay", num(cfg.train.lr_decay)},
      {"train.weight_decay", num(cfg.train.weight_decay)},
      {"train.corruptions_per_example", num(cfg.train.corruptions_per_example)},
      {"walkback.enabled",
       [&](const std::string& k, const std::string& v) { cfg.walkback.enabled = detail::parse_config_bool(k, v); }},
      {"walkback.p", num(cfg.walkback.p)},
      {"walkback.max_steps", num(cfg.walkback.max_steps)},
      {"walkback.fixed_steps", num(cfg.walkback.fixed_steps)},
      {"chain.n_steps", num(cfg.chain_steps)},
      {"chain.burn_in", num(cfg.chain_burn_in)},
      {"chain.thin", num(cfg.chain_thin)},
      {"output.model", path(cfg.model_out)},
      {"output.metrics", path(cfg.metrics_out)},
  };

  std::string section;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw DataError(where + ": malformed section header '" + line + "'");
      section = detail::trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> sections = {"data",  "corruption", "model", "train",
                                                     "walkback", "chain",  "output"};
      if (!sections.count(section)) throw DataError(where + ": unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(where + ": expected 'key = value'");
    const std::string key = (section.empty() ? "" : section + ".") + detail::trim(line.substr(0, eq));
    const std::string value = detail::unquote(detail::trim(line.substr(eq + 1)));
    const auto it = setters.find(key);
    if (it == setters.end()) throw DataError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw DataError(where + ": duplicate key '" + key + "'");
    if (value.empty()) throw DataError(where + ": empty value for key '" + key + "'");
    it->second(key, value);
  }

  auto require = [&](const std::string& key, const std::string& value) {
    if (value.empty()) throw DataError(name + ": missing required key '" + key + "'");
  };
  require("data.path", cfg.data_path);
  require("corruption.corruption", cfg.corruption);
  require("model.family", cfg.family);
  require("output.model", cfg.model_out);
  if (!std::filesystem::exists(cfg.data_path))
    throw DataError(name + ": key 'data.path' names missing file '" + cfg.data_path + "'");
  if (!cfg.valid_path.empty() && !std::filesystem::exists(cfg.valid_path))
    throw DataError(name + ": key 'data.valid_path' names missing file '" + cfg.valid_path + "'");
  if (!cfg.data_kind_set) {
    if (cfg.data_format == "idx" || cfg.family == "mlp") cfg.data_kind = SampleKind::binary;
    else if (cfg.family == "parzen") cfg.data_kind = SampleKind::real;
    else cfg.data_kind = SampleKind::discrete;
  }
  cfg.train.seed = cfg.seed;
  try {
    cfg.train.validate();
    if (cfg.walkback.enabled) cfg.walkback.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(name + ": " + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  return parse_config(in, std::filesystem::path(path).parent_path(), path);
}

// Builds a corruption process from its config name. `size` is K for
// discrete_flip and the dimension otherwise.
inline CorruptionProcess make_corruption(const std::string& kind, std::size_t size, double eps, double corrupt_prob,
                                         double sigma) {
  if (kind == "discrete_flip") return DiscreteFlip(size, eps);
  if (kind == "salt_pepper") return SaltPepper(size, corrupt_prob);
  if (kind == "gaussian") return IsotropicGaussian(size, sigma);
  throw InvalidArgument("unknown corruption '" + kind + "'");
}

}  // namespace gdae
