#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "gdae/error.hpp"

namespace gdae {

struct DiscreteScalar {
  std::size_t value = 0;
  friend bool operator==(const DiscreteScalar&, const DiscreteScalar&) = default;
};

struct BinaryVector {
  std::vector<std::uint8_t> bits;
  friend bool operator==(const BinaryVector&, const BinaryVector&) = default;
};

struct RealVector {
  std::vector<double> values;
  friend bool operator==(const RealVector&, const RealVector&) = default;
};

// One observation X or one corrupted observation X~. The variant is fixed
// per experiment.
using Sample = std::variant<DiscreteScalar, BinaryVector, RealVector>;

enum class SampleKind { discrete, binary, real };

inline SampleKind kind_of(const Sample& s) {
  return static_cast<SampleKind>(s.index());
}

inline const char* kind_name(SampleKind k) {
  switch (k) {
    case SampleKind::discrete: return "discrete";
    case SampleKind::binary: return "binary";
    case SampleKind::real: return "real";
  }
  return "unknown";
}

// Number of coordinates; 1 for a discrete scalar.
inline std::size_t dimension(const Sample& s) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiscreteScalar>) return 1;
        else if constexpr (std::is_same_v<T, BinaryVector>) return v.bits.size();
        else return v.values.size();
      },
      s);
}

template <typename T>
const T& expect_variant(const Sample& s, const char* context) {
  if (const T* p = std::get_if<T>(&s)) return *p;
  constexpr SampleKind wanted = std::is_same_v<T, DiscreteScalar> ? SampleKind::discrete
                                : std::is_same_v<T, BinaryVector> ? SampleKind::binary
                                                                  : SampleKind::real;
  throw VariantMismatch(std::string(context) + ": expected " + kind_name(wanted) +
                        " sample, got " + kind_name(kind_of(s)));
}

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace gdae
