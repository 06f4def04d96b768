#pragma once

#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "gdae/dataset.hpp"
#include "gdae/error.hpp"

namespace gdae {

// IDX container as used by MNIST: big-endian 32-bit magic (0x00000803 for
// 3-D uint8 image stacks, 0x00000801 for 1-D uint8 label vectors), one
// big-endian 32-bit size per dimension, then the raw payload.
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

namespace detail {

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace detail

inline IdxArray parse_idx(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw DataError("idx: truncated header");
  IdxArray arr;
  arr.magic = detail::read_be32(bytes, 0);
  std::size_t rank = 0;
  if (arr.magic == kIdxImagesMagic) rank = 3;
  else if (arr.magic == kIdxLabelsMagic) rank = 1;
  else throw DataError("idx: bad magic 0x" + [&] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", arr.magic);
    return std::string(buf);
  }());
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header) throw DataError("idx: truncated header");
  std::uint64_t expected = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    const std::uint32_t dim = detail::read_be32(bytes, 4 + 4 * i);
    arr.dims.push_back(dim);
    if (dim != 0 && expected > std::numeric_limits<std::uint32_t>::max() / dim)
      throw DataError("idx: dimension overflow");
    expected *= dim;
  }
  const std::size_t actual = bytes.size() - header;
  if (actual < expected)
    throw DataError("idx: truncated payload: expected " + std::to_string(expected) + " bytes, got " +
                    std::to_string(actual));
  arr.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header),
                     bytes.begin() + static_cast<std::ptrdiff_t>(header + expected));
  return arr;
}

inline std::vector<std::uint8_t> encode_idx(const IdxArray& arr) {
  std::vector<std::uint8_t> out;
  detail::append_be32(out, arr.magic);
  for (auto d : arr.dims) detail::append_be32(out, d);
  out.insert(out.end(), arr.payload.begin(), arr.payload.end());
  return out;
}

// Images: pixel / 255 > threshold becomes bit 1, giving one BinaryVector of
// rows * cols bits per image. Labels: one DiscreteScalar per entry.
// limit > 0 keeps only the first `limit` items.
inline Dataset idx_to_dataset(const IdxArray& arr, const std::string& source, std::size_t limit = 0,
                              double threshold = 0.5) {
  Dataset out;
  out.source = source;
  const std::size_t count = arr.dims.front();
  const std::size_t take = limit > 0 ? std::min(limit, count) : count;
  if (arr.magic == kIdxLabelsMagic) {
    out.name = "idx-labels";
    for (std::size_t i = 0; i < take; ++i) out.samples.emplace_back(DiscreteScalar{arr.payload[i]});
    return out;
  }
  out.name = "idx-images";
  const std::size_t d = std::size_t{arr.dims[1]} * arr.dims[2];
  out.samples.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    BinaryVector v;
    v.bits.resize(d);
    for (std::size_t j = 0; j < d; ++j) v.bits[j] = (arr.payload[i * d + j] / 255.0) > threshold ? 1 : 0;
    out.samples.emplace_back(std::move(v));
  }
  return out;
}

inline Dataset load_idx(const std::string& path, std::size_t limit = 0) {
  const IdxArray arr = parse_idx(detail::read_file_bytes(path));
  if (arr.dims.front() == 0) throw DataError("idx: '" + path + "' holds no items");
  return idx_to_dataset(arr, path, limit);
}

inline void write_idx_images(const std::string& path, const std::vector<std::vector<std::uint8_t>>& images,
                             std::uint32_t rows, std::uint32_t cols) {
  IdxArray arr{kIdxImagesMagic, {static_cast<std::uint32_t>(images.size()), rows, cols}, {}};
  for (const auto& img : images) {
    if (img.size() != std::size_t{rows} * cols) throw InvalidArgument("write_idx_images: image size mismatch");
    arr.payload.insert(arr.payload.end(), img.begin(), img.end());
  }
  detail::write_file_bytes(path, encode_idx(arr));
}

}  // namespace gdae
