#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nonwoven/image.hpp"
#include "nonwoven/random.hpp"

namespace nonwoven::testing {

inline GrayImage random_gray(std::size_t w, std::size_t h, std::uint64_t seed) {
  SplitMix64 rng(seed);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

inline BinaryImage random_binary(std::size_t w, std::size_t h, std::uint64_t seed, double p = 0.5) {
  SplitMix64 rng(seed);
  BinaryImage img(w, h);
  for (auto& b : img.pixels()) b = rng.uniform() < p ? 1 : 0;
  return img;
}

// Random union of filled rectangles; gives blob-like shapes with holes and
// touching parts, closer to real masks than i.i.d. noise.
inline BinaryImage random_blobs(std::size_t w, std::size_t h, std::uint64_t seed, int rects = 12) {
  SplitMix64 rng(seed);
  BinaryImage img(w, h);
  for (int r = 0; r < rects; ++r) {
    const auto x0 = rng.below(w);
    const auto y0 = rng.below(h);
    const auto rw = 1 + rng.below(std::max<std::size_t>(2, w / 3));
    const auto rh = 1 + rng.below(std::max<std::size_t>(2, h / 3));
    for (std::size_t y = y0; y < std::min(h, y0 + rh); ++y) {
      for (std::size_t x = x0; x < std::min(w, x0 + rw); ++x) img(x, y) = 1;
    }
  }
  // A few holes and specks.
  for (int k = 0; k < 10; ++k) img(rng.below(w), rng.below(h)) ^= 1;
  return img;
}

inline double max_relative_error(const std::vector<double>& got, const std::vector<double>& want) {
  double scale = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    scale = std::max(scale, std::abs(want[i]));
    err = std::max(err, std::abs(got[i] - want[i]));
  }
  return scale > 0.0 ? err / scale : err;
}

}  // namespace nonwoven::testing
