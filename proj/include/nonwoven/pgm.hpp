#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "nonwoven/error.hpp"
#include "nonwoven/image.hpp"

namespace nonwoven {

namespace detail {

class PgmHeaderReader {
public:
  explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t read_uint(const char* field) {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (std::size_t{1} << 31)) throw ParseError(std::string("PGM ") + field + " too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw ParseError(std::string("PGM header: expected ") + field);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void consume_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw ParseError("PGM header: missing whitespace before raster");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Decodes a binary (P5) graymap with maxval 255.
inline GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ParseError("not a binary PGM (expected magic P5)");
  }
  detail::PgmHeaderReader reader(bytes);
  reader.advance(2);
  const auto width = reader.read_uint("width");
  const auto height = reader.read_uint("height");
  const auto maxval = reader.read_uint("maxval");
  if (width == 0 || height == 0) throw ParseError("PGM dimensions must be >= 1");
  if (maxval != 255) {
    throw UnsupportedFormat("PGM maxval " + std::to_string(maxval) + " (only 255 supported)");
  }
  reader.consume_single_space();
  const std::size_t n = width * height;
  if (bytes.size() - reader.pos() < n) throw ParseError("PGM raster truncated");
  std::vector<std::uint8_t> pixels(bytes.begin() + reader.pos(), bytes.begin() + reader.pos() + n);
  return GrayImage(width, height, std::move(pixels));
}

inline std::vector<std::uint8_t> save_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline GrayImage read_pgm(const std::filesystem::path& path) { return load_pgm(read_file_bytes(path)); }

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  write_file_bytes(path, save_pgm(img));
}

}  // namespace nonwoven
