#pragma once

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>
#include <string>
#include <vector>

#include "gdae/conditional_model.hpp"
#include "gdae/error.hpp"

namespace gdae {

// Textual model persistence:
//
//   GDAE-MODEL v1
//   <family>                      multinomial | parzen | mlp
//   multinomial: K alpha, then K rows of K counts (row = x~)
//   parzen:      n d sigma_x sigma_c, then n lines of x_i (d values) x~_i (d values)
//   mlp:         d h, then W1 (h rows of d), b1, W2 (d rows of h), b2
//
// Reals are written with 17 significant digits so a reload is exact.
inline constexpr const char* kModelMagic = "GDAE-MODEL v1";

inline void save_model(std::ostream& out, const ConditionalModel& model) {
  out << kModelMagic << '\n' << family_name(model) << '\n';
  out << std::setprecision(17);
  std::visit(overloaded{
                 [&](const MultinomialTable& t) {
                   out << t.states() << ' ' << t.alpha() << '\n';
                   for (std::size_t r = 0; r < t.states(); ++r) {
                     for (std::size_t x = 0; x < t.states(); ++x) out << (x ? " " : "") << t.count(r, x);
                     out << '\n';
                   }
                 },
                 [&](const ParzenConditional& pz) {
                   out << pz.size() << ' ' << pz.dim() << ' ' << pz.sigma_x() << ' ' << pz.sigma_c() << '\n';
                   for (std::size_t i = 0; i < pz.size(); ++i) {
                     bool first = true;
                     for (double v : pz.clean_anchor(i)) out << (std::exchange(first, false) ? "" : " ") << v;
                     for (double v : pz.corrupted_anchor(i)) out << ' ' << v;
                     out << '\n';
                   }
                 },
                 [&](const BernoulliMlp& mlp) {
                   const auto& p = mlp.params();
                   out << mlp.visible() << ' ' << mlp.hidden() << '\n';
                   auto write_matrix = [&](const Eigen::MatrixXd& m) {
                     for (Eigen::Index i = 0; i < m.rows(); ++i) {
                       for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
                       out << '\n';
                     }
                   };
                   auto write_vector = [&](const Eigen::VectorXd& v) {
                     for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
                     out << '\n';
                   };
                   write_matrix(p.w1);
                   write_vector(p.b1);
                   write_matrix(p.w2);
                   write_vector(p.b2);
                 }},
             model);
}

namespace detail {

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  template <typename T>
  T next(const char* what) {
    std::string token;
    if (!(in_ >> token)) throw DataError(std::string("model file: unexpected end of input reading ") + what);
    std::istringstream parse(token);
    T value{};
    if (!(parse >> value) || parse.peek() != std::char_traits<char>::eof())
      throw DataError(std::string("model file: bad token '") + token + "' for " + what);
    return value;
  }

  void expect_end() {
    std::string token;
    if (in_ >> token) throw DataError("model file: trailing data '" + token + "'");
  }

 private:
  std::istream& in_;
};

}  // namespace detail

inline ConditionalModel load_model(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || (magic != kModelMagic && magic != std::string(kModelMagic) + "\r"))
    throw DataError("model file: bad magic line (expected '" + std::string(kModelMagic) + "')");
  std::string family;
  if (!(in >> family)) throw DataError("model file: missing family tag");
  detail::TokenReader tokens(in);
  try {
    if (family == "multinomial") {
      const auto k = tokens.next<std::size_t>("K");
      const auto alpha = tokens.next<double>("alpha");
      if (k == 0 || k > 65536) throw DataError("model file: K out of range");
      std::vector<double> counts(k * k);
      for (auto& c : counts) c = tokens.next<double>("count");
      tokens.expect_end();
      return MultinomialTable(k, alpha, std::move(counts));
    }
    if (family == "parzen") {
      const auto n = tokens.next<std::size_t>("n");
      const auto d = tokens.next<std::size_t>("d");
      const auto sigma_x = tokens.next<double>("sigma_x");
      const auto sigma_c = tokens.next<double>("sigma_c");
      if (n == 0 || d == 0 || d > (1u << 20) || n > (1u << 26)) throw DataError("model file: n or d out of range");
      std::vector<RealVector> clean(n), corrupted(n);
      for (std::size_t i = 0; i < n; ++i) {
        clean[i].values.resize(d);
        corrupted[i].values.resize(d);
        for (auto& v : clean[i].values) v = tokens.next<double>("anchor x");
        for (auto& v : corrupted[i].values) v = tokens.next<double>("anchor x~");
      }
      tokens.expect_end();
      return ParzenConditional(std::move(clean), std::move(corrupted), sigma_x, sigma_c);
    }
    if (family == "mlp") {
      const auto d = tokens.next<std::size_t>("d");
      const auto h = tokens.next<std::size_t>("h");
      if (d == 0 || h == 0 || d > (1u << 16) || h > (1u << 16)) throw DataError("model file: d or h out of range");
      auto params = MlpParameters::zeros(d, h);
      for (std::size_t i = 0; i < params.parameter_count(); ++i) params.flat(i) = tokens.next<double>("weight");
      tokens.expect_end();
      return BernoulliMlp(std::move(params));
    }
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  throw DataError("model file: unknown family '" + family + "'");
}

inline void save_model_file(const std::string& path, const ConditionalModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save_model(out, model);
  if (!out) throw DataError("failed writing '" + path + "'");
}

inline ConditionalModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace gdae
