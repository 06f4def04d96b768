#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gdae/error.hpp"
#include "gdae/idx.hpp"
#include "gdae/sample.hpp"

namespace gdae {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

inline constexpr std::uint8_t kSeparatorGray = 128;

// Tiles side x side binary images into a rows x cols grid, row-major. Each
// tile is followed by a 1-pixel gray column on its right and a 1-pixel gray
// row below it, so the image is cols*(side+1) wide and rows*(side+1) tall.
// Bit 1 is white (255), bit 0 black; unused tiles stay gray.
inline GrayImage render_sample_grid(std::span<const BinaryVector> samples, std::size_t rows, std::size_t cols,
                                    std::size_t side) {
  if (samples.empty()) throw InvalidArgument("write_sample_grid: no samples");
  if (side == 0 || rows == 0 || cols == 0) throw InvalidArgument("write_sample_grid: empty grid");
  if (rows * cols < samples.size())
    throw InvalidArgument("write_sample_grid: " + std::to_string(samples.size()) + " samples do not fit a " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " grid");
  for (const auto& s : samples) {
    if (s.bits.size() != side * side)
      throw InvalidArgument("write_sample_grid: sample of " + std::to_string(s.bits.size()) +
                            " bits is not a " + std::to_string(side) + "x" + std::to_string(side) + " square");
  }
  GrayImage img;
  img.width = cols * (side + 1);
  img.height = rows * (side + 1);
  img.pixels.assign(img.width * img.height, kSeparatorGray);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::size_t top = (k / cols) * (side + 1);
    const std::size_t left = (k % cols) * (side + 1);
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c)
        img.pixels[(top + r) * img.width + left + c] = samples[k].bits[r * side + c] ? 255 : 0;
  }
  return img;
}

// Binary PGM (P5, maxval 255).
inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

inline GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (bytes[pos] == ' ' || bytes[pos] == '\n' || bytes[pos] == '\r' || bytes[pos] == '\t') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_number = [&]() -> std::size_t {
    skip_space();
    std::size_t v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') v = v * 10 + (bytes[pos++] - '0');
    if (pos == start) throw DataError("pgm: malformed header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw DataError("pgm: not a binary P5 file");
  pos = 2;
  GrayImage img;
  img.width = read_number();
  img.height = read_number();
  if (read_number() != 255) throw DataError("pgm: only maxval 255 is supported");
  ++pos;  // single whitespace before the raster
  if (bytes.size() < pos + img.width * img.height) throw DataError("pgm: truncated raster");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + img.width * img.height));
  return img;
}

// Inverse of render_sample_grid for the first `count` tiles.
inline std::vector<BinaryVector> extract_sample_grid(const GrayImage& img, std::size_t rows, std::size_t cols,
                                                     std::size_t side, std::size_t count) {
  if (img.width != cols * (side + 1) || img.height != rows * (side + 1) || count > rows * cols)
    throw DataError("pgm: grid geometry does not match the image");
  std::vector<BinaryVector> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t top = (k / cols) * (side + 1);
    const std::size_t left = (k % cols) * (side + 1);
    out[k].bits.resize(side * side);
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c)
        out[k].bits[r * side + c] = img.pixels[(top + r) * img.width + left + c] > 127 ? 1 : 0;
  }
  return out;
}

inline void write_sample_grid(std::span<const BinaryVector> samples, std::size_t rows, std::size_t cols,
                              std::size_t side, const std::string& path) {
  detail::write_file_bytes(path, encode_pgm(render_sample_grid(samples, rows, cols, side)));
}

inline GrayImage read_pgm(const std::string& path) { return decode_pgm(detail::read_file_bytes(path)); }

}  // namespace gdae
