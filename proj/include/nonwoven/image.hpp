#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nonwoven/error.hpp"

namespace nonwoven {

// Row-major rectangular grid with an optional physical pixel size (mm).
// `Kind` only distinguishes otherwise identical layouts at the type level.
template <typename T, typename Kind>
class Grid {
public:
  using value_type = T;

  Grid() = default;

  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {
    check_dims();
  }

  Grid(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims();
    if (data_.size() != width_ * height_) {
      throw InvalidParameter("grid data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(width_) + "x" +
                             std::to_string(height_));
    }
    Kind::validate(std::span<const T>(data_));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }

  // Clamped access (border replication).
  T clamped(std::ptrdiff_t x, std::ptrdiff_t y) const {
    x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(width_) - 1);
    y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(height_) - 1);
    return data_[static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)];
  }

  bool contains(std::ptrdiff_t x, std::ptrdiff_t y) const noexcept {
    return x >= 0 && y >= 0 && x < static_cast<std::ptrdiff_t>(width_) &&
           y < static_cast<std::ptrdiff_t>(height_);
  }

  std::span<const T> pixels() const noexcept { return data_; }
  std::span<T> pixels() noexcept { return data_; }
  const std::vector<T>& vec() const noexcept { return data_; }

  std::optional<double> pixel_pitch() const noexcept { return pitch_; }

  void set_pixel_pitch(std::optional<double> pitch) {
    if (pitch && !(*pitch > 0.0)) throw InvalidParameter("pixel_pitch must be > 0");
    pitch_ = pitch;
  }

  // Same geometry and calibration, fresh contents.
  template <typename Other>
  static Grid like(const Other& other, T fill = T{}) {
    Grid g(other.width(), other.height(), fill);
    g.pitch_ = other.pixel_pitch();
    return g;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

private:
  void check_dims() const {
    if (width_ == 0 || height_ == 0) {
      throw InvalidParameter("image dimensions must be >= 1");
    }
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
  std::optional<double> pitch_;
};

namespace detail {
struct GrayKind {
  static void validate(std::span<const std::uint8_t>) {}
};
struct BinaryKind {
  static void validate(std::span<const std::uint8_t> bits) {
    for (auto b : bits) {
      if (b > 1) throw InvalidParameter("binary image values must be 0 or 1");
    }
  }
};
struct RealKind {
  static void validate(std::span<const double>) {}
};
struct HeightKind {
  static void validate(std::span<const double> h) {
    for (double v : h) {
      if (!(v >= 0.0)) throw InvalidParameter("heights must be finite and >= 0");
    }
  }
};
}  // namespace detail

// 8-bit grayscale image, values 0..255.
using GrayImage = Grid<std::uint8_t, detail::GrayKind>;
// Foreground mask, 1 = fiber unless an operation says otherwise.
using BinaryImage = Grid<std::uint8_t, detail::BinaryKind>;
// Real-valued matrix for transforms.
using RealGrid = Grid<double, detail::RealKind>;
// Surface heights in micrometres; pixel_pitch in mm.
using HeightMap = Grid<double, detail::HeightKind>;

struct Histogram256 {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;
};

inline std::uint8_t clamp_to_gray(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

inline std::size_t count_foreground(const BinaryImage& bin) {
  return static_cast<std::size_t>(std::count(bin.pixels().begin(), bin.pixels().end(), 1));
}

inline BinaryImage complement(const BinaryImage& bin) {
  auto out = BinaryImage::like(bin);
  for (std::size_t i = 0; i < bin.size(); ++i) out.pixels()[i] = 1 - bin.pixels()[i];
  return out;
}

// 0/1 mask rendered as 0/255 gray, e.g. for writing to PGM.
inline GrayImage to_gray(const BinaryImage& bin) {
  auto out = GrayImage::like(bin);
  for (std::size_t i = 0; i < bin.size(); ++i) out.pixels()[i] = bin.pixels()[i] ? 255 : 0;
  return out;
}

inline RealGrid to_real(const GrayImage& img) {
  auto out = RealGrid::like(img);
  for (std::size_t i = 0; i < img.size(); ++i) out.pixels()[i] = img.pixels()[i];
  return out;
}

inline GrayImage crop(const GrayImage& img, std::size_t x0, std::size_t y0, std::size_t w,
                      std::size_t h) {
  if (x0 + w > img.width() || y0 + h > img.height()) {
    throw InvalidParameter("crop rectangle exceeds image");
  }
  GrayImage out(w, h);
  out.set_pixel_pitch(img.pixel_pitch());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) out(x, y) = img(x0 + x, y0 + y);
  }
  return out;
}

inline GrayImage transpose(const GrayImage& img) {
  GrayImage out(img.height(), img.width());
  out.set_pixel_pitch(img.pixel_pitch());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) out(y, x) = img(x, y);
  }
  return out;
}

// Rotates 90 degrees clockwise in display orientation (y down).
template <typename G>
G rotate90(const G& img) {
  G out(img.height(), img.width());
  out.set_pixel_pitch(img.pixel_pitch());
  const std::size_t h = img.height();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) out(h - 1 - y, x) = img(x, y);
  }
  return out;
}

}  // namespace nonwoven
