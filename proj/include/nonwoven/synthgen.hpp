#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nonwoven/error.hpp"
#include "nonwoven/image.hpp"
#include "nonwoven/random.hpp"

namespace nonwoven {

// ------------------------------------------------------------------ fiber webs

struct AngleWeight {
  double angle_deg = 0.0;  // fiber axis, image coordinates (x right, y down)
  double weight = 1.0;
};

enum class Placement {
  clip,    // centers anywhere on the canvas, lines clipped at the border
  inside,  // centers chosen so every line lies fully inside the canvas
};

struct WebSpec {
  std::size_t width = 256;
  std::size_t height = 256;
  std::size_t line_count = 0;
  std::vector<AngleWeight> angles{{0.0, 1.0}};
  double length_min = 40.0;
  double length_max = 120.0;
  std::size_t thickness = 1;
  // 0 draws straight segments; > 0 draws circular arcs with this sagitta/chord ratio.
  double curvature = 0.0;
  std::uint64_t seed = 0;
  Placement placement = Placement::clip;
};

struct LineTruth {
  double angle_deg = 0.0;   // chord direction in [0, 180)
  double arc_length = 0.0;  // px
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  bool clipped = false;
};

struct GroundTruth {
  std::vector<LineTruth> lines;
  std::vector<double> pores;  // equivalent opening sizes, mm
  double porosity_2d = 0.0;
};

struct FiberWeb {
  GrayImage image;
  GroundTruth truth;
};

namespace detail {

inline double wrap_angle_180(double deg) {
  double a = std::fmod(deg, 180.0);
  if (a < 0.0) a += 180.0;
  if (a >= 180.0) a -= 180.0;
  return a;
}

// Splits `total` into integer counts proportional to `weights` (largest remainder).
inline std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = total * weights[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    used += counts[i];
    rema.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++counts[rema[k % rema.size()].second];
  return counts;
}

class Canvas {
public:
  Canvas(GrayImage& img, std::size_t thickness) : img_(img), thickness_(thickness) {}

  // Paints a thickness x thickness square centered on (x, y); returns false
  // if any part fell outside the image.
  bool stamp(std::ptrdiff_t x, std::ptrdiff_t y, std::uint8_t value = 255) {
    const auto t = static_cast<std::ptrdiff_t>(thickness_);
    const std::ptrdiff_t lo = -(t - 1) / 2;
    bool inside = true;
    for (std::ptrdiff_t dy = lo; dy < lo + t; ++dy) {
      for (std::ptrdiff_t dx = lo; dx < lo + t; ++dx) {
        if (img_.contains(x + dx, y + dy)) {
          img_(static_cast<std::size_t>(x + dx), static_cast<std::size_t>(y + dy)) = value;
        } else {
          inside = false;
        }
      }
    }
    return inside;
  }

  // Bresenham segment between integer pixel centers, both ends included.
  bool segment(std::ptrdiff_t x0, std::ptrdiff_t y0, std::ptrdiff_t x1, std::ptrdiff_t y1) {
    bool inside = true;
    const std::ptrdiff_t dx = std::abs(x1 - x0);
    const std::ptrdiff_t dy = -std::abs(y1 - y0);
    const std::ptrdiff_t sx = x0 < x1 ? 1 : -1;
    const std::ptrdiff_t sy = y0 < y1 ? 1 : -1;
    std::ptrdiff_t err = dx + dy;
    while (true) {
      inside = stamp(x0, y0) && inside;
      if (x0 == x1 && y0 == y1) break;
      const std::ptrdiff_t e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
    return inside;
  }

private:
  GrayImage& img_;
  std::size_t thickness_;
};

inline std::ptrdiff_t round_px(double v) { return static_cast<std::ptrdiff_t>(std::lround(v)); }

}  // namespace detail

// Draws white fibers on a black canvas. Angle families are apportioned exactly
// by weight; positions, lengths and arc bulge sides come from the seed.
inline FiberWeb gen_fiber_web(const WebSpec& spec) {
  if (spec.width == 0 || spec.height == 0) throw InvalidParameter("web canvas has zero area");
  if (spec.thickness < 1) throw InvalidParameter("fiber thickness must be >= 1");
  if (spec.length_min > spec.length_max || spec.length_min < 1.0) {
    throw InvalidParameter("length range must satisfy 1 <= min <= max");
  }
  if (spec.curvature < 0.0) throw InvalidParameter("curvature must be >= 0");
  if (spec.line_count > 0 && spec.angles.empty()) throw InvalidParameter("no angle families given");
  std::vector<double> weights;
  for (const auto& a : spec.angles) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw InvalidParameter("angle weights must be > 0");
    weights.push_back(a.weight);
  }

  FiberWeb web{GrayImage(spec.width, spec.height, 0), {}};
  if (spec.line_count == 0) return web;

  SplitMix64 rng(spec.seed);
  detail::Canvas canvas(web.image, spec.thickness);
  const auto counts = detail::apportion(spec.line_count, weights);
  const double half_t = 0.5 * static_cast<double>(spec.thickness);

  for (std::size_t family = 0; family < counts.size(); ++family) {
    const double angle = detail::wrap_angle_180(spec.angles[family].angle_deg);
    const double rad = angle * std::numbers::pi / 180.0;
    const double dx = std::cos(rad);
    const double dy = std::sin(rad);
    for (std::size_t n = 0; n < counts[family]; ++n) {
      const double length = rng.uniform(spec.length_min, spec.length_max);
      const double bulge = rng.uniform() < 0.5 ? -1.0 : 1.0;

      // Centerline as a polyline of points relative to the chord midpoint.
      std::vector<std::pair<double, double>> pts;
      if (spec.curvature == 0.0) {
        const double h = 0.5 * (length - 1.0);
        pts = {{-h * dx, -h * dy}, {h * dx, h * dy}};
      } else {
        const double alpha = 2.0 * std::atan(2.0 * spec.curvature);
        const double radius = length / (2.0 * alpha);
        const double nx = -dy * bulge;
        const double ny = dx * bulge;
        const auto steps = static_cast<int>(std::ceil(2.0 * length)) + 1;
        for (int s = 0; s <= steps; ++s) {
          const double t = -alpha + 2.0 * alpha * s / steps;
          // Center of the circle sits at +n * R cos(alpha) from the chord midpoint.
          const double px = radius * std::sin(t) * dx + nx * radius * (std::cos(alpha) - std::cos(t));
          const double py = radius * std::sin(t) * dy + ny * radius * (std::cos(alpha) - std::cos(t));
          pts.emplace_back(px, py);
        }
      }
      double minx = 0, maxx = 0, miny = 0, maxy = 0;
      for (const auto& [px, py] : pts) {
        minx = std::min(minx, px);
        maxx = std::max(maxx, px);
        miny = std::min(miny, py);
        maxy = std::max(maxy, py);
      }

      double cx = 0.0;
      double cy = 0.0;
      if (spec.placement == Placement::inside) {
        const double lox = -minx + half_t + 0.5;
        const double hix = static_cast<double>(spec.width) - 1.0 - maxx - half_t - 0.5;
        const double loy = -miny + half_t + 0.5;
        const double hiy = static_cast<double>(spec.height) - 1.0 - maxy - half_t - 0.5;
        if (lox > hix || loy > hiy) throw InvalidParameter("line does not fit inside the canvas");
        cx = rng.uniform(lox, hix);
        cy = rng.uniform(loy, hiy);
      } else {
        cx = rng.uniform(0.0, static_cast<double>(spec.width));
        cy = rng.uniform(0.0, static_cast<double>(spec.height));
      }

      bool inside = true;
      for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        inside = canvas.segment(detail::round_px(cx + pts[k].first), detail::round_px(cy + pts[k].second),
                                detail::round_px(cx + pts[k + 1].first),
                                detail::round_px(cy + pts[k + 1].second)) &&
                 inside;
      }
      LineTruth truth;
      truth.angle_deg = angle;
      truth.arc_length = length;
      truth.x0 = cx + pts.front().first;
      truth.y0 = cy + pts.front().second;
      truth.x1 = cx + pts.back().first;
      truth.y1 = cy + pts.back().second;
      truth.clipped = !inside;
      web.truth.lines.push_back(truth);
    }
  }
  return web;
}

// ------------------------------------------------------------------ surfaces

// Sinusoidal ridges along x: h = (A/2)(1 + sin(2 pi x pitch / wavelength)),
// pitch = 25.4 / dpi mm. Heights in micrometres.
inline HeightMap gen_ideal_surface(double wavelength_mm, double amplitude_um, double dpi, std::size_t width,
                                   std::size_t height) {
  if (!(wavelength_mm > 0.0) || !(dpi > 0.0)) throw InvalidParameter("wavelength and dpi must be > 0");
  if (!(amplitude_um >= 0.0)) throw InvalidParameter("amplitude must be >= 0");
  const double pitch = 25.4 / dpi;
  HeightMap hm(width, height, 0.0);
  hm.set_pixel_pitch(pitch);
  for (std::size_t x = 0; x < width; ++x) {
    const double v =
        0.5 * amplitude_um * (1.0 + std::sin(2.0 * std::numbers::pi * x * pitch / wavelength_mm));
    for (std::size_t y = 0; y < height; ++y) hm(x, y) = std::max(0.0, v);
  }
  return hm;
}

// ------------------------------------------------------------------ pilling

inline constexpr std::size_t kBlobsPerGrade = 8;

inline std::size_t pilled_blob_count(int grade_level) {
  return static_cast<std::size_t>(5 - grade_level) * kBlobsPerGrade;
}

// Base texture of i.i.d. gray noise plus (5 - grade) * 8 bright Gaussian blobs
// (sigma 4-8 px). Lower grades reuse every blob of the higher grades.
inline GrayImage gen_pilled_texture(std::uint64_t seed, int grade_level, std::size_t width,
                                    std::size_t height) {
  if (grade_level < 1 || grade_level > 5) throw InvalidParameter("pilling grade must be in 1..5");
  SplitMix64 root(seed);
  SplitMix64 base_rng = root.fork(1);
  SplitMix64 blob_rng = root.fork(2);

  std::vector<double> field(width * height);
  for (auto& v : field) v = base_rng.normal(110.0, 18.0);

  const std::size_t blobs = pilled_blob_count(grade_level);
  for (std::size_t b = 0; b < blobs; ++b) {
    const double bx = blob_rng.uniform(0.0, static_cast<double>(width));
    const double by = blob_rng.uniform(0.0, static_cast<double>(height));
    const double sigma = blob_rng.uniform(4.0, 8.0);
    const double amp = blob_rng.uniform(70.0, 110.0);
    const auto r = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    const auto x0 = static_cast<std::ptrdiff_t>(bx);
    const auto y0 = static_cast<std::ptrdiff_t>(by);
    for (std::ptrdiff_t y = y0 - r; y <= y0 + r; ++y) {
      for (std::ptrdiff_t x = x0 - r; x <= x0 + r; ++x) {
        if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(width) ||
            y >= static_cast<std::ptrdiff_t>(height)) {
          continue;
        }
        const double d2 = (x + 0.5 - bx) * (x + 0.5 - bx) + (y + 0.5 - by) * (y + 0.5 - by);
        field[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] +=
            amp * std::exp(-0.5 * d2 / (sigma * sigma));
      }
    }
  }
  GrayImage img(width, height);
  for (std::size_t i = 0; i < field.size(); ++i) img.pixels()[i] = clamp_to_gray(field[i]);
  return img;
}

// ------------------------------------------------------------------ defects

enum class DefectKind { non_defect = 0, thick_spot = 1, thin_spot = 2, neps = 3 };

inline std::string_view defect_kind_name(DefectKind k) {
  switch (k) {
    case DefectKind::non_defect: return "non_defect";
    case DefectKind::thick_spot: return "thick_spot";
    case DefectKind::thin_spot: return "thin_spot";
    case DefectKind::neps: return "neps";
  }
  return "unknown";
}

inline DefectKind parse_defect_kind(std::string_view s) {
  for (int k = 0; k < 4; ++k) {
    if (defect_kind_name(static_cast<DefectKind>(k)) == s) return static_cast<DefectKind>(k);
  }
  throw InvalidParameter("unknown defect kind '" + std::string(s) + "'");
}

// Uniform web texture (gray ~81, sd ~7) with one region modification:
// thick spot = broad bright bump, thin spot = broad dark dip, neps = a tight
// cluster of small bright specks.
inline GrayImage gen_defect_web(DefectKind kind, std::uint64_t seed, std::size_t width, std::size_t height) {
  SplitMix64 root(seed);
  SplitMix64 base_rng = root.fork(1);
  SplitMix64 region_rng = root.fork(2);
  std::vector<double> field(width * height);
  for (auto& v : field) v = base_rng.normal(81.0, 7.0);

  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  auto add_bump = [&](double cx, double cy, double sigma, double amp) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (d2 > 16.0 * sigma * sigma) continue;
        field[y * width + x] += amp * std::exp(-0.5 * d2 / (sigma * sigma));
      }
    }
  };

  switch (kind) {
    case DefectKind::non_defect:
      break;
    case DefectKind::thick_spot:
      add_bump(region_rng.uniform(0.35 * w, 0.65 * w), region_rng.uniform(0.35 * h, 0.65 * h),
               0.18 * std::min(w, h), region_rng.uniform(45.0, 60.0));
      break;
    case DefectKind::thin_spot:
      add_bump(region_rng.uniform(0.35 * w, 0.65 * w), region_rng.uniform(0.35 * h, 0.65 * h),
               0.22 * std::min(w, h), -region_rng.uniform(40.0, 55.0));
      break;
    case DefectKind::neps: {
      const double cx = region_rng.uniform(0.3 * w, 0.7 * w);
      const double cy = region_rng.uniform(0.3 * h, 0.7 * h);
      const double spread = 0.06 * std::min(w, h);
      const int specks = 6 + static_cast<int>(region_rng.below(5));
      for (int s = 0; s < specks; ++s) {
        add_bump(cx + region_rng.normal(0.0, spread), cy + region_rng.normal(0.0, spread),
                 region_rng.uniform(0.6, 1.0), region_rng.uniform(120.0, 160.0));
      }
      break;
    }
  }
  GrayImage img(width, height);
  for (std::size_t i = 0; i < field.size(); ++i) img.pixels()[i] = clamp_to_gray(field[i]);
  return img;
}

// ------------------------------------------------------------------ pore media

struct PoreMedium {
  BinaryImage image;  // 1 = solid (fiber), 0 = pore
  GroundTruth truth;
};

// Solid canvas with `pore_count` non-overlapping disks punched out. Radii are
// taken cyclically from `pore_radii_mm`; disks keep `min_gap_px` of solid
// between each other and stay inside the canvas.
inline PoreMedium gen_pore_medium(std::uint64_t seed, std::size_t width, std::size_t height,
                                  double pixel_pitch_mm, const std::vector<double>& pore_radii_mm,
                                  std::size_t pore_count, double min_gap_px = 2.0) {
  if (!(pixel_pitch_mm > 0.0)) throw InvalidParameter("pixel pitch must be > 0");
  if (pore_count > 0 && pore_radii_mm.empty()) throw InvalidParameter("no pore radii given");
  for (double r : pore_radii_mm) {
    if (!(r > 0.0)) throw InvalidParameter("pore radii must be > 0");
    const double rp = r / pixel_pitch_mm;
    if (2.0 * rp + 1.0 > static_cast<double>(std::min(width, height))) {
      throw InvalidParameter("pore radius does not fit in the canvas");
    }
  }
  PoreMedium medium{BinaryImage(width, height, 1), {}};
  medium.image.set_pixel_pitch(pixel_pitch_mm);
  SplitMix64 rng(seed);

  struct Disk {
    double x, y, r;
  };
  std::vector<Disk> placed;
  double area_mm2 = 0.0;
  for (std::size_t i = 0; i < pore_count; ++i) {
    const double r_mm = pore_radii_mm[i % pore_radii_mm.size()];
    const double r = r_mm / pixel_pitch_mm;
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      const double x = rng.uniform(r, static_cast<double>(width) - 1.0 - r);
      const double y = rng.uniform(r, static_cast<double>(height) - 1.0 - r);
      ok = std::all_of(placed.begin(), placed.end(), [&](const Disk& d) {
        return std::hypot(d.x - x, d.y - y) >= d.r + r + min_gap_px;
      });
      if (ok) placed.push_back({x, y, r});
    }
    if (!ok) throw PlacementFailure("could not place pore " + std::to_string(i) + " without overlap");
    medium.truth.pores.push_back(2.0 * r_mm);
    area_mm2 += std::numbers::pi * r_mm * r_mm;
  }
  for (const auto& d : placed) {
    const auto x0 = static_cast<std::ptrdiff_t>(std::floor(d.x - d.r));
    const auto x1 = static_cast<std::ptrdiff_t>(std::ceil(d.x + d.r));
    const auto y0 = static_cast<std::ptrdiff_t>(std::floor(d.y - d.r));
    const auto y1 = static_cast<std::ptrdiff_t>(std::ceil(d.y + d.r));
    for (std::ptrdiff_t y = y0; y <= y1; ++y) {
      for (std::ptrdiff_t x = x0; x <= x1; ++x) {
        if (!medium.image.contains(x, y)) continue;
        if ((x - d.x) * (x - d.x) + (y - d.y) * (y - d.y) <= d.r * d.r) {
          medium.image(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = 0;
        }
      }
    }
  }
  medium.truth.porosity_2d =
      area_mm2 / (static_cast<double>(width) * static_cast<double>(height) * pixel_pitch_mm * pixel_pitch_mm);
  return medium;
}

// Backlit rendering of a pore medium: pores bright, solid dark, plus
// Gaussian sensor noise.
inline GrayImage render_pore_medium(const BinaryImage& medium, std::uint64_t seed, double pore_level = 225.0,
                                    double solid_level = 70.0, double noise_sd = 12.0) {
  SplitMix64 rng(seed);
  auto img = GrayImage::like(medium);
  for (std::size_t i = 0; i < medium.size(); ++i) {
    const double base = medium.pixels()[i] ? solid_level : pore_level;
    img.pixels()[i] = clamp_to_gray(rng.normal(base, noise_sd));
  }
  return img;
}

}  // namespace nonwoven
