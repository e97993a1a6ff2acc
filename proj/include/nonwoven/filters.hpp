#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nonwoven/error.hpp"
#include "nonwoven/image.hpp"

namespace nonwoven {

inline Histogram256 histogram(const GrayImage& img) {
  Histogram256 h;
  for (auto v : img.pixels()) ++h.counts[v];
  h.total = img.size();
  return h;
}

// CDF remap: v -> round(255 (cdf(v) - cdf_min) / (total - cdf_min)).
// A single occupied level has no spread to redistribute and is returned as is.
inline GrayImage equalize_histogram(const GrayImage& img) {
  const auto h = histogram(img);
  std::array<std::uint64_t, 256> cdf{};
  std::uint64_t run = 0;
  std::uint64_t cdf_min = 0;
  for (int v = 0; v < 256; ++v) {
    run += h.counts[v];
    cdf[v] = run;
    if (cdf_min == 0 && run > 0) cdf_min = run;
  }
  if (h.total == cdf_min) return img;
  const double span = static_cast<double>(h.total - cdf_min);
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    const double num = cdf[v] >= cdf_min ? static_cast<double>(cdf[v] - cdf_min) : 0.0;
    lut[v] = clamp_to_gray(std::round(255.0 * num / span));
  }
  auto out = GrayImage::like(img);
  for (std::size_t i = 0; i < img.size(); ++i) out.pixels()[i] = lut[img.pixels()[i]];
  return out;
}

// Unit-sum sampled Gaussian of radius ceil(3 sigma); element r is offset r - radius.
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw InvalidParameter("gaussian sigma must be > 0");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (auto& w : k) w /= sum;
  return k;
}

// Separable Gaussian blur with border replication, rounded and clamped once
// after both passes.
inline GrayImage gaussian_filter(const GrayImage& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const auto r = static_cast<std::ptrdiff_t>(k.size() / 2);
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());

  std::vector<double> rows(img.size());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -r; i <= r; ++i) {
        acc += k[static_cast<std::size_t>(i + r)] * img.clamped(x + i, y);
      }
      rows[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  auto out = GrayImage::like(img);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -r; i <= r; ++i) {
        const auto yy = std::clamp<std::ptrdiff_t>(y + i, 0, h - 1);
        acc += k[static_cast<std::size_t>(i + r)] * rows[static_cast<std::size_t>(yy * w + x)];
      }
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = clamp_to_gray(acc);
    }
  }
  return out;
}

// Adaptive Wiener denoising over a square window (border replication).
// The noise power is the mean of all local variances.
inline GrayImage wiener_filter(const GrayImage& img, std::size_t window) {
  if (window < 3 || window % 2 == 0) throw InvalidParameter("wiener window must be odd and >= 3");
  const auto r = static_cast<std::ptrdiff_t>(window / 2);
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const double n = static_cast<double>(window * window);

  std::vector<double> mean(img.size());
  std::vector<double> var(img.size());
  double noise = 0.0;
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double s = 0.0;
      double s2 = 0.0;
      for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
        for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
          const double v = img.clamped(x + dx, y + dy);
          s += v;
          s2 += v * v;
        }
      }
      const auto i = static_cast<std::size_t>(y * w + x);
      mean[i] = s / n;
      var[i] = std::max(0.0, s2 / n - mean[i] * mean[i]);
      noise += var[i];
    }
  }
  noise /= static_cast<double>(img.size());

  auto out = GrayImage::like(img);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double denom = std::max(var[i], noise);
    double v = mean[i];
    if (denom > 0.0) v += std::max(0.0, var[i] - noise) / denom * (img.pixels()[i] - mean[i]);
    out.pixels()[i] = clamp_to_gray(v);
  }
  return out;
}

// Centered running median; windows shrink at the borders.
inline std::vector<double> median_filter_1d(std::span<const double> series, std::size_t window) {
  if (window < 3 || window % 2 == 0) throw InvalidParameter("median window must be odd and >= 3");
  if (series.empty()) throw InvalidParameter("median filter needs a non-empty series");
  const std::size_t r = window / 2;
  std::vector<double> out(series.size());
  std::vector<double> buf;
  buf.reserve(window);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i >= r ? i - r : 0;
    const std::size_t hi = std::min(series.size() - 1, i + r);
    buf.assign(series.begin() + lo, series.begin() + hi + 1);
    const auto mid = buf.begin() + buf.size() / 2;
    std::nth_element(buf.begin(), mid, buf.end());
    if (buf.size() % 2 == 1) {
      out[i] = *mid;
    } else {
      // Truncated even window at a border: average the two middle values.
      const double upper = *mid;
      const double lower = *std::max_element(buf.begin(), mid);
      out[i] = 0.5 * (lower + upper);
    }
  }
  return out;
}

inline std::vector<double> histogram_series(const Histogram256& h) {
  return {h.counts.begin(), h.counts.end()};
}

// 3x3 Sobel magnitude rescaled so the strongest response is 255; the
// one-pixel frame is left at 0.
inline GrayImage edge_magnitude(const GrayImage& img) {
  if (img.width() < 3 || img.height() < 3) throw InvalidParameter("edge detection needs >= 3x3");
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  std::vector<double> mag(img.size(), 0.0);
  double peak = 0.0;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      auto p = [&](std::size_t xx, std::size_t yy) { return static_cast<double>(img(xx, yy)); };
      const double gx = (p(x + 1, y - 1) + 2 * p(x + 1, y) + p(x + 1, y + 1)) -
                        (p(x - 1, y - 1) + 2 * p(x - 1, y) + p(x - 1, y + 1));
      const double gy = (p(x - 1, y + 1) + 2 * p(x, y + 1) + p(x + 1, y + 1)) -
                        (p(x - 1, y - 1) + 2 * p(x, y - 1) + p(x + 1, y - 1));
      const double m = std::sqrt(gx * gx + gy * gy);
      mag[y * w + x] = m;
      peak = std::max(peak, m);
    }
  }
  auto out = GrayImage::like(img);
  if (peak == 0.0) return out;
  for (std::size_t i = 0; i < img.size(); ++i) out.pixels()[i] = clamp_to_gray(255.0 * mag[i] / peak);
  return out;
}

enum class Foreground { above, below };

// Foreground bit is set where the pixel lies strictly beyond t.
inline BinaryImage global_threshold(const GrayImage& img, int t, Foreground fg = Foreground::above) {
  if (t < 0 || t > 255) throw InvalidParameter("threshold must be in [0, 255]");
  auto out = BinaryImage::like(img);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const int v = img.pixels()[i];
    out.pixels()[i] = (fg == Foreground::above ? v > t : v < t) ? 1 : 0;
  }
  return out;
}

}  // namespace nonwoven
