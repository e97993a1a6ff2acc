#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "nonwoven/error.hpp"
#include "nonwoven/filters.hpp"
#include "nonwoven/image.hpp"
#include "nonwoven/synthgen.hpp"

namespace nonwoven {

// White (255) maps to the top of a 2.5 um layer.
inline constexpr double kDefaultHeightCeilingUm = 2.5;
// Wavelength and amplitude below human touch perception.
inline constexpr double kIdealWavelengthMm = 1.0;
inline constexpr double kIdealAmplitudeUm = 2.5;

inline HeightMap to_height_map(const GrayImage& img, double h_max_um = kDefaultHeightCeilingUm) {
  if (!(h_max_um > 0.0)) throw InvalidParameter("h_max must be > 0");
  if (!img.pixel_pitch()) throw MissingCalibration("image has no pixel pitch; set dpi or pitch");
  auto hm = HeightMap::like(img);
  for (std::size_t i = 0; i < img.size(); ++i) hm.pixels()[i] = img.pixels()[i] / 255.0 * h_max_um;
  return hm;
}

// Inverse of to_height_map, rounded to the nearest gray level.
inline GrayImage height_map_to_gray(const HeightMap& hm, double h_max_um = kDefaultHeightCeilingUm) {
  if (!(h_max_um > 0.0)) throw InvalidParameter("h_max must be > 0");
  auto img = GrayImage::like(hm);
  for (std::size_t i = 0; i < hm.size(); ++i) img.pixels()[i] = clamp_to_gray(255.0 * hm.pixels()[i] / h_max_um);
  return img;
}

struct Peak {
  double x = 0.0;  // centroid, px
  double y = 0.0;
  double height = 0.0;  // um
  std::size_t rep_x = 0;  // first pixel of the plateau in raster order
  std::size_t rep_y = 0;
  std::size_t area = 0;
};

// Plateau-merged local maxima: 8-connected groups of pixels that are >= all
// of their 8 neighbours, kept when some neighbour of the group is strictly
// lower. One peak per group, located at the group centroid.
inline std::vector<Peak> detect_peaks(const HeightMap& hm) {
  const auto w = static_cast<std::ptrdiff_t>(hm.width());
  const auto h = static_cast<std::ptrdiff_t>(hm.height());
  std::vector<std::uint8_t> candidate(hm.size(), 0);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      const double v = hm(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      bool ok = true;
      for (std::ptrdiff_t dy = -1; dy <= 1 && ok; ++dy) {
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
          if ((dx || dy) && hm.contains(x + dx, y + dy) &&
              hm(static_cast<std::size_t>(x + dx), static_cast<std::size_t>(y + dy)) > v) {
            ok = false;
            break;
          }
        }
      }
      candidate[static_cast<std::size_t>(y * w + x)] = ok;
    }
  }

  std::vector<Peak> peaks;
  std::vector<std::uint8_t> seen(hm.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < hm.size(); ++start) {
    if (!candidate[start] || seen[start]) continue;
    const double v = hm.pixels()[start];
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    bool has_lower = false;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      const auto x = static_cast<std::ptrdiff_t>(i) % w;
      const auto y = static_cast<std::ptrdiff_t>(i) / w;
      sx += static_cast<double>(x);
      sy += static_cast<double>(y);
      ++n;
      for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
          if ((!dx && !dy) || !hm.contains(x + dx, y + dy)) continue;
          const auto j = static_cast<std::size_t>((y + dy) * w + (x + dx));
          if (hm.pixels()[j] < v) has_lower = true;
          if (candidate[j] && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
    if (!has_lower) continue;
    Peak p;
    p.x = sx / static_cast<double>(n);
    p.y = sy / static_cast<double>(n);
    p.height = v;
    p.rep_x = start % hm.width();
    p.rep_y = start / hm.width();
    p.area = n;
    peaks.push_back(p);
  }
  return peaks;
}

struct ProfileCriteria {
  std::size_t n_peaks = 0;          // N
  double peak_spacing_var = 0.0;    // T, px^2
  double volume = 0.0;              // E, um * mm^2
  double gray_deviation_var = 0.0;  // I_d, gray^2
  double peak_value_var = 0.0;      // V, gray^2
  bool degenerate = false;          // fewer than two peaks: T and V forced to 0

  std::array<double, 5> as_array() const {
    return {static_cast<double>(n_peaks), peak_spacing_var, volume, gray_deviation_var, peak_value_var};
  }
};

namespace detail {

inline double population_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size());
}

// Distance from each point to its nearest other point (sweep over x order).
inline std::vector<double> nearest_neighbour_distances(const std::vector<Peak>& peaks) {
  std::vector<std::size_t> order(peaks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return peaks[a].x < peaks[b].x; });
  std::vector<double> best(peaks.size(), std::numeric_limits<double>::infinity());
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const auto& p = peaks[order[oi]];
    double& b = best[order[oi]];
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const auto& q = peaks[order[oj]];
      if (q.x - p.x > b) break;
      b = std::min(b, std::hypot(q.x - p.x, q.y - p.y));
    }
    for (std::size_t oj = oi; oj-- > 0;) {
      const auto& q = peaks[order[oj]];
      if (p.x - q.x > b) break;
      b = std::min(b, std::hypot(q.x - p.x, q.y - p.y));
    }
  }
  return best;
}

}  // namespace detail

// The five profile criteria of a scan and its height map.
inline ProfileCriteria profile_criteria(const GrayImage& img, const HeightMap& hm) {
  if (img.width() != hm.width() || img.height() != hm.height()) {
    throw InvalidParameter("image and height map dimensions differ");
  }
  if (!hm.pixel_pitch()) throw MissingCalibration("height map has no pixel pitch");
  const double pitch = *hm.pixel_pitch();
  ProfileCriteria c;
  const auto peaks = detect_peaks(hm);
  c.n_peaks = peaks.size();

  double vol = 0.0;
  for (double v : hm.pixels()) vol += v;
  c.volume = vol * pitch * pitch;

  std::vector<double> gray(img.pixels().begin(), img.pixels().end());
  c.gray_deviation_var = detail::population_variance(gray);

  if (peaks.size() < 2) {
    c.degenerate = true;
    return c;
  }
  c.peak_spacing_var = detail::population_variance(detail::nearest_neighbour_distances(peaks));
  std::vector<double> peak_gray;
  peak_gray.reserve(peaks.size());
  for (const auto& p : peaks) peak_gray.push_back(img(p.rep_x, p.rep_y));
  c.peak_value_var = detail::population_variance(peak_gray);
  return c;
}

using CriteriaWeights = std::array<double, 5>;
inline constexpr CriteriaWeights kUniformCriteriaWeights{0.2, 0.2, 0.2, 0.2, 0.2};

// R_s = sum_i w_i |s_i - d_i| / (|s_i| + |d_i| + 1e-12), bounded in [0, 1].
inline double surface_roughness(const ProfileCriteria& sample, const ProfileCriteria& ideal,
                                const CriteriaWeights& weights = kUniformCriteriaWeights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidParameter("criteria weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidParameter("criteria weights must sum to 1");
  const auto s = sample.as_array();
  const auto d = ideal.as_array();
  double rs = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    rs += weights[i] * std::abs(s[i] - d[i]) / (std::abs(s[i]) + std::abs(d[i]) + 1e-12);
  }
  return rs;
}

struct RoughnessOptions {
  double h_max_um = kDefaultHeightCeilingUm;
  double gaussian_sigma = 1.0;
  std::size_t wiener_window = 5;
  bool denoise = true;
  bool equalize = true;
  double ideal_wavelength_mm = kIdealWavelengthMm;
  double ideal_amplitude_um = kIdealAmplitudeUm;
  CriteriaWeights weights = kUniformCriteriaWeights;
};

struct RoughnessReport {
  ProfileCriteria sample;
  ProfileCriteria ideal;
  double surface_roughness = 0.0;
};

// Criteria of the ideal sinusoidal surface rendered at the given dpi and size.
inline ProfileCriteria ideal_criteria(double dpi, std::size_t width, std::size_t height,
                                      const RoughnessOptions& opt = {}) {
  const auto hm = gen_ideal_surface(opt.ideal_wavelength_mm, opt.ideal_amplitude_um, dpi, width, height);
  const auto gray = height_map_to_gray(hm, opt.h_max_um);
  return profile_criteria(gray, to_height_map(gray, opt.h_max_um));
}

// Scan -> (Gaussian, Wiener) -> equalization -> height map -> criteria, then
// R_s against the ideal surface at the same resolution.
inline RoughnessReport analyze_roughness(const GrayImage& scan, double dpi, const RoughnessOptions& opt = {}) {
  if (!(dpi > 0.0)) throw InvalidParameter("dpi must be > 0");
  GrayImage img = scan;
  img.set_pixel_pitch(25.4 / dpi);
  if (opt.denoise) img = wiener_filter(gaussian_filter(img, opt.gaussian_sigma), opt.wiener_window);
  if (opt.equalize) img = equalize_histogram(img);
  RoughnessReport r;
  r.sample = profile_criteria(img, to_height_map(img, opt.h_max_um));
  r.ideal = ideal_criteria(dpi, img.width(), img.height(), opt);
  r.surface_roughness = surface_roughness(r.sample, r.ideal, opt.weights);
  return r;
}

// ------------------------------------------------------------------ friction data

struct FrictionRecord {
  double surface_roughness = 0.0;     // R_s
  double friction_coefficient = 0.0;  // mu, normal force 28 cN
};

// The 30 (R_s, mu) pairs of the published nonwoven friction study.
inline std::span<const FrictionRecord> table1_dataset() {
  static constexpr std::array<FrictionRecord, 30> rows{{
      {0.410, 0.395}, {0.376, 0.362}, {0.364, 0.348}, {0.368, 0.347}, {0.384, 0.373},
      {0.398, 0.386}, {0.384, 0.378}, {0.378, 0.362}, {0.371, 0.357}, {0.403, 0.394},
      {0.369, 0.360}, {0.361, 0.354}, {0.408, 0.401}, {0.389, 0.367}, {0.391, 0.383},
      {0.381, 0.371}, {0.384, 0.363}, {0.392, 0.376}, {0.388, 0.375}, {0.387, 0.365},
      {0.392, 0.378}, {0.377, 0.359}, {0.393, 0.379}, {0.396, 0.384}, {0.385, 0.368},
      {0.397, 0.389}, {0.372, 0.364}, {0.358, 0.344}, {0.393, 0.384}, {0.363, 0.354},
  }};
  return rows;
}

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares of mu on R_s.
inline RegressionFit fit_friction_regression(std::span<const FrictionRecord> data) {
  if (data.size() < 2) throw DegenerateFit("regression needs at least two records");
  const double n = static_cast<double>(data.size());
  double mx = 0.0, my = 0.0;
  for (const auto& r : data) {
    mx += r.surface_roughness;
    my += r.friction_coefficient;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& r : data) {
    const double dx = r.surface_roughness - mx;
    const double dy = r.friction_coefficient - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw DegenerateFit("surface roughness values have zero variance");
  RegressionFit fit;
  fit.n = data.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.pearson_r = syy > 0.0 ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;
  fit.r_squared = fit.pearson_r * fit.pearson_r;
  return fit;
}

}  // namespace nonwoven
