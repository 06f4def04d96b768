#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gdae/chain.hpp"
#include "gdae/dataset.hpp"
#include "gdae/distributions.hpp"
#include "gdae/error.hpp"
#include "gdae/training.hpp"

// Comma-separated files with a header row and LF line endings. Reals are
// written with 17 significant digits.
namespace gdae::csv {

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

inline double parse_real(std::string_view field, const std::string& context) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw DataError(context + ": bad number '" + std::string(field) + "'");
  return v;
}

inline std::size_t parse_index(std::string_view field, const std::string& context) {
  std::size_t v = 0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw DataError(context + ": bad integer '" + std::string(field) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

// `x` for a scalar, `x0,...,x{d-1}` for vectors.
inline std::string value_header(const Sample& s) {
  if (std::holds_alternative<DiscreteScalar>(s)) return "x";
  std::string out;
  for (std::size_t i = 0; i < dimension(s); ++i) out += (i ? ",x" : "x") + std::to_string(i);
  return out;
}

inline std::string format_sample(const Sample& s) {
  return std::visit(overloaded{[](const DiscreteScalar& v) { return std::to_string(v.value); },
                               [](const BinaryVector& v) {
                                 std::string out;
                                 for (std::size_t i = 0; i < v.bits.size(); ++i) {
                                   if (i) out += ',';
                                   out += v.bits[i] ? '1' : '0';
                                 }
                                 return out;
                               },
                               [](const RealVector& v) {
                                 std::string out;
                                 for (std::size_t i = 0; i < v.values.size(); ++i) {
                                   if (i) out += ',';
                                   out += format_real(v.values[i]);
                                 }
                                 return out;
                               }},
                    s);
}

inline Sample parse_sample(std::span<const std::string_view> fields, SampleKind kind, const std::string& context) {
  switch (kind) {
    case SampleKind::discrete:
      if (fields.size() != 1) throw DataError(context + ": discrete rows hold one value");
      return DiscreteScalar{parse_index(fields[0], context)};
    case SampleKind::binary: {
      BinaryVector v;
      v.bits.reserve(fields.size());
      for (auto f : fields) {
        if (f != "0" && f != "1") throw DataError(context + ": binary value must be 0 or 1, got '" + std::string(f) + "'");
        v.bits.push_back(f == "1" ? 1 : 0);
      }
      return v;
    }
    case SampleKind::real: {
      RealVector v;
      v.values.reserve(fields.size());
      for (auto f : fields) v.values.push_back(parse_real(f, context));
      return v;
    }
  }
  throw DataError(context + ": unknown sample kind");
}

inline void write_dataset(std::ostream& out, const Dataset& data) {
  data.validate();
  out << value_header(data.samples.front()) << '\n';
  for (const auto& s : data.samples) out << format_sample(s) << '\n';
}

// Reads a dataset CSV. A leading `t` column (chain exports) is skipped.
inline Dataset read_dataset(std::istream& in, SampleKind kind, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": missing header");
  const std::string header = strip_cr(line);
  const bool has_t = header.rfind("t,", 0) == 0;
  const std::size_t columns = split(header).size() - (has_t ? 1 : 0);
  Dataset data{{}, name, name};
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split(line);
    const std::string ctx = name + " line " + std::to_string(row);
    if (fields.size() != columns + (has_t ? 1 : 0))
      throw DataError(ctx + ": expected " + std::to_string(columns + (has_t ? 1 : 0)) + " fields");
    data.samples.push_back(parse_sample(std::span(fields).subspan(has_t ? 1 : 0), kind, ctx));
  }
  if (data.samples.empty()) throw DataError(name + ": no rows");
  return data;
}

inline void write_dataset_file(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  write_dataset(out, data);
}

inline Dataset read_dataset_file(const std::string& path, SampleKind kind) {
  auto in = open_in(path);
  return read_dataset(in, kind, path);
}

// Chain export: `t,x...`, one row per retained step. With tildes = true the
// corrupted samples X~_t are written instead of X_t.
inline void write_chain(std::ostream& out, const ChainRun& run, bool tildes = false) {
  const auto& rows = tildes ? run.x_tildes : run.xs;
  if (rows.empty()) throw InvalidArgument("write_chain: empty run");
  out << "t," << value_header(rows.front()) << '\n';
  for (std::size_t k = 0; k < rows.size(); ++k)
    out << (run.config.burn_in + k * run.config.thin) << ',' << format_sample(rows[k]) << '\n';
}

inline void write_chain_file(const std::string& path, const ChainRun& run, bool tildes = false) {
  auto out = open_out(path);
  write_chain(out, run, tildes);
}

// `state,prob`
inline void write_distribution(std::ostream& out, const ProbVector& p) {
  out << "state,prob\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << i << ',' << format_real(p[i]) << '\n';
}

inline ProbVector read_distribution(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "state,prob") throw DataError(name + ": expected header 'state,prob'");
  std::vector<double> probs;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string ctx = name + " line " + std::to_string(row);
    if (fields.size() != 2) throw DataError(ctx + ": expected 2 fields");
    if (parse_index(fields[0], ctx) != probs.size()) throw DataError(ctx + ": states must be listed in order");
    probs.push_back(parse_real(fields[1], ctx));
  }
  try {
    return ProbVector(std::move(probs));
  } catch (const InvalidArgument& e) {
    throw DataError(name + ": " + e.what());
  }
}

inline void write_distribution_file(const std::string& path, const ProbVector& p) {
  auto out = open_out(path);
  write_distribution(out, p);
}

inline ProbVector read_distribution_file(const std::string& path) {
  auto in = open_in(path);
  return read_distribution(in, path);
}

// `epoch,train_nll,valid_nll,seconds`
inline void write_metrics(std::ostream& out, const TrainingMetrics& m) {
  out << "epoch,train_nll,valid_nll,seconds\n";
  for (std::size_t e = 0; e < m.train_nll.size(); ++e)
    out << e << ',' << format_real(m.train_nll[e]) << ',' << format_real(m.valid_nll[e]) << ','
        << format_real(m.seconds[e]) << '\n';
}

struct ReportRow {
  std::string metric;
  double value = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

// `metric,value,n_samples,seed`
inline void write_report(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "metric,value,n_samples,seed\n";
  for (const auto& r : rows) out << r.metric << ',' << format_real(r.value) << ',' << r.n_samples << ',' << r.seed << '\n';
}

inline std::vector<ReportRow> read_report(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "metric,value,n_samples,seed")
    throw DataError(name + ": expected header 'metric,value,n_samples,seed'");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 4) throw DataError(name + ": expected 4 fields");
    rows.push_back({std::string(f[0]), parse_real(f[1], name), parse_index(f[2], name), parse_index(f[3], name)});
  }
  return rows;
}

}  // namespace gdae::csv
