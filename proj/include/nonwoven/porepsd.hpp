#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nonwoven/error.hpp"
#include "nonwoven/filters.hpp"
#include "nonwoven/image.hpp"
#include "nonwoven/skeleton.hpp"
#include "nonwoven/threshold.hpp"

namespace nonwoven {

inline constexpr double kPlanarPixelPitchMm = 4.83e-3;
inline constexpr double kCrossSectionPixelPitchMm = 9.43e-3;

// Square k x k element with its origin at the top-left cell; the reflected
// element has its origin at the bottom-right cell.
struct StructuringElement {
  std::size_t side = 2;
  bool reflected = false;

  StructuringElement reflect() const { return {side, !reflected}; }
};

inline constexpr StructuringElement kPlanarSe{2, false};
inline constexpr StructuringElement kCrossSectionSe{3, false};

namespace detail {

// One separable pass: out(p) = op over in(p + d), d in [lo, hi], along x or y.
// Samples outside the image read as `outside`.
inline BinaryImage morph_pass(const BinaryImage& in, std::ptrdiff_t lo, std::ptrdiff_t hi, bool along_x,
                              bool is_and, std::uint8_t outside) {
  auto out = BinaryImage::like(in);
  const auto w = static_cast<std::ptrdiff_t>(in.width()), h = static_cast<std::ptrdiff_t>(in.height());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      std::uint8_t acc = is_and ? 1 : 0;
      for (std::ptrdiff_t d = lo; d <= hi; ++d) {
        const auto sx = along_x ? x + d : x, sy = along_x ? y : y + d;
        const std::uint8_t v =
            in.contains(sx, sy) ? in(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy)) : outside;
        if (is_and ? v == 0 : v == 1) {
          acc = v;
          break;
        }
      }
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
    }
  }
  return out;
}

inline void check_se(const StructuringElement& se) {
  if (se.side < 1) throw InvalidParameter("structuring element side must be >= 1");
}

}  // namespace detail

// Erosion reads outside pixels as foreground and dilation as background, so
// that erosion and dilation are exact duals on the finite grid.
inline BinaryImage erode(const BinaryImage& bin, const StructuringElement& se) {
  detail::check_se(se);
  const auto k = static_cast<std::ptrdiff_t>(se.side) - 1;
  const std::ptrdiff_t lo = se.reflected ? -k : 0, hi = se.reflected ? 0 : k;
  return detail::morph_pass(detail::morph_pass(bin, lo, hi, true, true, 1), lo, hi, false, true, 1);
}

inline BinaryImage dilate(const BinaryImage& bin, const StructuringElement& se) {
  detail::check_se(se);
  const auto k = static_cast<std::ptrdiff_t>(se.side) - 1;
  const std::ptrdiff_t lo = se.reflected ? 0 : -k, hi = se.reflected ? k : 0;
  return detail::morph_pass(detail::morph_pass(bin, lo, hi, true, false, 0), lo, hi, false, false, 0);
}

inline BinaryImage open(const BinaryImage& bin, const StructuringElement& se) { return dilate(erode(bin, se), se); }
inline BinaryImage close(const BinaryImage& bin, const StructuringElement& se) { return erode(dilate(bin, se), se); }

// Opening removes specks, then closing fills pinholes.
inline BinaryImage denoise(const BinaryImage& bin, const StructuringElement& se) { return close(open(bin, se), se); }

// Mean fiber width: foreground area over skeleton length.
inline double estimate_fiber_thickness(const BinaryImage& bin) {
  const auto area = count_foreground(bin);
  if (area == 0) throw EmptyForeground("no fiber pixels");
  return static_cast<double>(area) / static_cast<double>(count_foreground(skeletonize(bin)));
}

// ------------------------------------------------------------------ slicing

struct SlicingOptions {
  StructuringElement se = kCrossSectionSe;  // dilation of the horizontal-fiber mask
  std::size_t kernel_length = 5;            // horizontal window, odd
  std::size_t min_hits = 4;
  std::size_t prune_length = 5;
};

// Bands are the uniform partition edges[0..n] of the rows, shifted cyclically
// down by `offset`: row y belongs to band i when (y - offset) mod H lies in
// [edges[i], edges[i+1]).
struct SlicingGrid {
  std::size_t slice_count = 1;
  std::vector<std::size_t> boundaries;  // 0 = e0 < e1 < ... < en = height
  std::size_t offset = 0;
  double fiber_thickness = 0.0;  // px
  std::size_t score = 0;

  std::size_t height() const { return boundaries.back(); }

  std::size_t band_of_row(std::size_t y) const {
    const std::size_t h = height();
    const std::size_t r = (y % h + h - offset % h) % h;
    return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), r) - boundaries.begin()) - 1;
  }

  std::size_t band_height(std::size_t i) const { return boundaries[i + 1] - boundaries[i]; }

  // Top row of each band in image coordinates.
  std::size_t boundary_row(std::size_t i) const { return (boundaries[i] + offset) % height(); }
};

inline SlicingGrid uniform_grid(std::size_t height, std::size_t slices, std::size_t offset = 0) {
  if (height == 0) throw InvalidParameter("grid height must be >= 1");
  if (slices < 1 || slices > height) throw InvalidParameter("slice count must be in [1, height]");
  SlicingGrid g;
  g.slice_count = slices;
  for (std::size_t k = 0; k <= slices; ++k) g.boundaries.push_back((k * height + slices / 2) / slices);
  g.boundaries.front() = 0;
  g.boundaries.back() = height;
  g.offset = offset % height;
  return g;
}

// Skeleton pixels lying on near-horizontal runs, grown by the element.
inline BinaryImage horizontal_fibers(const BinaryImage& bin, const SlicingOptions& opt = {}) {
  if (opt.kernel_length % 2 == 0 || opt.kernel_length == 0) throw InvalidParameter("kernel length must be odd");
  const auto skel = prune(skeletonize(bin), opt.prune_length);
  auto keep = BinaryImage::like(skel);
  const auto r = static_cast<std::ptrdiff_t>(opt.kernel_length / 2);
  for (std::size_t y = 0; y < skel.height(); ++y) {
    for (std::size_t x = 0; x < skel.width(); ++x) {
      if (!skel(x, y)) continue;
      std::size_t hits = 0;
      for (std::ptrdiff_t d = -r; d <= r; ++d) {
        const auto sx = static_cast<std::ptrdiff_t>(x) + d;
        if (skel.contains(sx, static_cast<std::ptrdiff_t>(y)) && skel(static_cast<std::size_t>(sx), y)) ++hits;
      }
      if (hits >= opt.min_hits) keep(x, y) = 1;
    }
  }
  return dilate(keep, opt.se);
}

// floor(T / (t * pitch)), clamped to [1, height]. The small relative slack keeps
// exact ratios such as 0.3 / (3 * 0.01) from flooring to one less.
inline std::size_t slice_count_for(double physical_thickness_mm, double fiber_thickness_px, double pitch_mm,
                                   std::size_t height) {
  const double ratio = physical_thickness_mm / (fiber_thickness_px * pitch_mm);
  const auto n = static_cast<std::size_t>(std::max(1.0, std::floor(ratio * (1.0 + 1e-9))));
  return std::min(n, height);
}

inline SlicingGrid build_slicing_grid(const BinaryImage& cross, double physical_thickness_mm,
                                      const SlicingOptions& opt = {}) {
  if (!cross.pixel_pitch()) throw MissingCalibration("cross-section needs a pixel pitch");
  if (!(physical_thickness_mm > 0.0)) throw InvalidParameter("physical thickness must be > 0");
  const double t = estimate_fiber_thickness(cross);
  auto grid = uniform_grid(cross.height(), slice_count_for(physical_thickness_mm, t, *cross.pixel_pitch(), cross.height()));
  grid.fiber_thickness = t;

  const auto fibers = horizontal_fibers(cross, opt);
  std::vector<std::size_t> row_count(cross.height(), 0);
  for (std::size_t y = 0; y < fibers.height(); ++y)
    for (std::size_t x = 0; x < fibers.width(); ++x) row_count[y] += fibers(x, y);

  std::size_t max_band = 0;
  for (std::size_t i = 0; i < grid.slice_count; ++i) max_band = std::max(max_band, grid.band_height(i));
  std::size_t best = 0, best_score = 0;
  for (std::size_t o = 0; o < max_band; ++o) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < grid.slice_count; ++i) s += row_count[(grid.boundaries[i] + o) % cross.height()];
    if (o == 0 || s > best_score) {
      best = o;
      best_score = s;
    }
  }
  grid.offset = best;
  grid.score = best_score;
  return grid;
}

// ------------------------------------------------------------------ porosity

namespace detail {
inline void check_grid(const BinaryImage& img, const SlicingGrid& grid) {
  if (grid.boundaries.size() != grid.slice_count + 1 || grid.height() != img.height()) {
    throw InvalidParameter("slicing grid does not span the image");
  }
}
}  // namespace detail

// Pore (background) fraction of each band.
inline std::vector<double> longitudinal_porosity(const BinaryImage& cross, const SlicingGrid& grid) {
  detail::check_grid(cross, grid);
  std::vector<std::size_t> pores(grid.slice_count, 0), total(grid.slice_count, 0);
  for (std::size_t y = 0; y < cross.height(); ++y) {
    const auto b = grid.band_of_row(y);
    for (std::size_t x = 0; x < cross.width(); ++x) pores[b] += cross(x, y) == 0;
    total[b] += cross.width();
  }
  std::vector<double> out(grid.slice_count);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(pores[i]) / static_cast<double>(total[i]);
  return out;
}

inline double planar_porosity(const BinaryImage& planar) {
  return 1.0 - static_cast<double>(count_foreground(planar)) / static_cast<double>(planar.size());
}

// Fiber mask of a backlit planar image: Chow-Kaneko threshold with fibers on
// the dark side, then denoise.
inline BinaryImage segment_planar(const GrayImage& img, const StructuringElement& se = kPlanarSe) {
  const int t = chow_kaneko_threshold(histogram(img));
  return denoise(global_threshold(img, std::min(t + 1, 255), Foreground::below), se);
}

// ------------------------------------------------------------------ openings

// Equivalent-circle diameters (mm) of the 4-connected pore segments inside
// each band; segments never cross band edges.
inline std::vector<double> measure_pore_openings(const BinaryImage& cross, const SlicingGrid& grid) {
  if (!cross.pixel_pitch()) throw MissingCalibration("pore openings need a pixel pitch");
  detail::check_grid(cross, grid);
  const double pitch = *cross.pixel_pitch();
  const std::size_t w = cross.width(), h = cross.height();
  std::vector<std::size_t> band(h);
  for (std::size_t y = 0; y < h; ++y) band[y] = grid.band_of_row(y);

  std::vector<std::uint8_t> seen(cross.size(), 0);
  std::vector<std::size_t> stack;
  std::vector<double> sizes;
  for (std::size_t start = 0; start < cross.size(); ++start) {
    if (cross.pixels()[start] != 0 || seen[start]) continue;
    std::size_t area = 0;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const auto p = stack.back();
      stack.pop_back();
      ++area;
      const std::size_t x = p % w, y = p / w;
      auto visit = [&](std::size_t q, std::size_t qy) {
        if (band[qy] == band[y] && cross.pixels()[q] == 0 && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1, y);
      if (x + 1 < w) visit(p + 1, y);
      if (y > 0) visit(p - w, y - 1);
      if (y + 1 < h) visit(p + w, y + 1);
    }
    sizes.push_back(2.0 * std::sqrt(static_cast<double>(area) / std::numbers::pi) * pitch);
  }
  return sizes;
}

// ------------------------------------------------------------------ PSD

struct PsdCurve {
  std::vector<double> sizes;       // ascending, mm
  std::vector<double> cumulative;  // fraction of openings <= size
};

inline PsdCurve psd_curve(std::vector<double> sizes) {
  if (sizes.empty()) throw EmptyDistribution("no pore openings");
  std::sort(sizes.begin(), sizes.end());
  PsdCurve c;
  c.cumulative.resize(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i)
    c.cumulative[i] = static_cast<double>(i + 1) / static_cast<double>(sizes.size());
  c.sizes = std::move(sizes);
  return c;
}

// Linear interpolation between order statistics at rank p/100 * (n - 1).
inline double percentile(const PsdCurve& curve, double p) {
  if (curve.sizes.empty()) throw EmptyDistribution("no pore openings");
  if (!(p >= 0.0 && p <= 100.0)) throw InvalidParameter("percentile must be in [0, 100]");
  const double rank = p / 100.0 * static_cast<double>(curve.sizes.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, curve.sizes.size() - 1);
  const double f = rank - static_cast<double>(lo);
  return curve.sizes[lo] + f * (curve.sizes[hi] - curve.sizes[lo]);
}

struct PoreReport {
  SlicingGrid grid;
  std::vector<double> longitudinal;
  std::vector<double> openings;
  PsdCurve curve;
  double o50 = 0.0;
  double o95 = 0.0;
};

inline PoreReport analyze_cross_section(const BinaryImage& cross, double physical_thickness_mm,
                                        const SlicingOptions& opt = {}) {
  PoreReport r;
  r.grid = build_slicing_grid(cross, physical_thickness_mm, opt);
  r.longitudinal = longitudinal_porosity(cross, r.grid);
  r.openings = measure_pore_openings(cross, r.grid);
  r.curve = psd_curve(r.openings);
  r.o50 = percentile(r.curve, 50.0);
  r.o95 = percentile(r.curve, 95.0);
  return r;
}

// ------------------------------------------------------------------ reference data

struct GeotextileRecord {
  std::string_view name;
  double grammage_gsm;
  double thickness_mm;
  double aos_min_mm;  // equal to aos_max_mm unless a range is reported
  double aos_max_mm;
  double porosity_pct;
  double permittivity_per_s;
};

inline constexpr std::array<GeotextileRecord, 5> kGeotextileCatalog{{
    {"N", 136, 0.45, 0.28, 0.28, 66.4, 0.70},
    {"P", 387, 3.0, 0.106, 0.106, 85.7, 0.80},
    {"M", 340, 2.53, 0.15, 0.15, 85.0, 1.10},
    {"C4", 401, 2.92, 0.15, 0.15, 84.7, 1.0},
    {"D1", 228, 2.21, 0.075, 0.104, 88.5, 1.35},
}};

inline std::optional<GeotextileRecord> find_geotextile(std::string_view name) {
  for (const auto& r : kGeotextileCatalog)
    if (r.name == name) return r;
  return std::nullopt;
}

}  // namespace nonwoven
