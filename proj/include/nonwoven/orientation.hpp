#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nonwoven/error.hpp"
#include "nonwoven/filters.hpp"
#include "nonwoven/image.hpp"
#include "nonwoven/skeleton.hpp"

namespace nonwoven {

// ------------------------------------------------------------------ FFT

namespace detail {

// In-place iterative radix-2 FFT (forward, unnormalized). n must be a power of two.
inline void fft_inplace(std::span<std::complex<double>> a) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  std::vector<std::complex<double>> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * tw[k * step];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

}  // namespace detail

// 2D spectrum with the DC term at (width/2, height/2). width and height are
// the zero-padded power-of-two sizes; the source size is kept alongside.
struct Spectrum {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t source_width = 0;
  std::size_t source_height = 0;
  double norm = 1.0;  // N = sqrt(width * height); coefficients carry 1/N
  std::vector<std::complex<double>> values;

  std::complex<double> at(std::size_t u, std::size_t v) const { return values[v * width + u]; }
  double magnitude(std::size_t u, std::size_t v) const { return std::abs(at(u, v)); }
  std::size_t dc_u() const { return width / 2; }
  std::size_t dc_v() const { return height / 2; }

  RealGrid magnitudes() const {
    RealGrid g(width, height);
    for (std::size_t i = 0; i < values.size(); ++i) g.pixels()[i] = std::abs(values[i]);
    return g;
  }
};

// Row-column FFT with 1/N scaling, N = sqrt(padded area), so a constant image
// of value c on an N x N grid has DC magnitude N*c and sum |F|^2 = sum |f|^2.
inline Spectrum fft2(const RealGrid& img) {
  Spectrum s;
  s.source_width = img.width();
  s.source_height = img.height();
  s.width = std::bit_ceil(img.width());
  s.height = std::bit_ceil(img.height());
  s.norm = std::sqrt(static_cast<double>(s.width) * static_cast<double>(s.height));
  const std::size_t w = s.width, h = s.height;

  std::vector<std::complex<double>> a(w * h);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) a[y * w + x] = img(x, y);
  }
  for (std::size_t y = 0; y < h; ++y) detail::fft_inplace(std::span(a).subspan(y * w, w));
  std::vector<std::complex<double>> col(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) col[y] = a[y * w + x];
    detail::fft_inplace(col);
    for (std::size_t y = 0; y < h; ++y) a[y * w + x] = col[y];
  }

  s.values.resize(w * h);
  const double scale = 1.0 / s.norm;
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      s.values[((v + h / 2) % h) * w + (u + w / 2) % w] = a[v * w + u] * scale;
    }
  }
  return s;
}

inline Spectrum fft2(const GrayImage& img) { return fft2(to_real(img)); }

// ------------------------------------------------------------------ distributions

// Weights over fiber-axis angle classes [k*180/B, (k+1)*180/B) degrees.
struct OrientationDistribution {
  std::vector<double> weights;

  std::size_t bins() const noexcept { return weights.size(); }
  double bin_width() const { return 180.0 / static_cast<double>(bins()); }
  double bin_start(std::size_t k) const { return static_cast<double>(k) * bin_width(); }
  double bin_center(std::size_t k) const { return (static_cast<double>(k) + 0.5) * bin_width(); }

  std::size_t bin_of(double angle_deg) const {
    double a = std::fmod(angle_deg, 180.0);
    if (a < 0.0) a += 180.0;
    const auto k = static_cast<std::size_t>(a / bin_width());
    return std::min(k, bins() - 1);
  }

  // Lowest bin wins ties.
  std::size_t mode() const {
    return static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
  }
};

inline OrientationDistribution normalized_distribution(std::vector<double> raw) {
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (!(total > 0.0)) throw NoSignal("no oriented energy to distribute");
  for (auto& v : raw) v /= total;
  return OrientationDistribution{std::move(raw)};
}

inline double l1_distance(const OrientationDistribution& a, const OrientationDistribution& b) {
  if (a.bins() != b.bins()) throw InvalidParameter("distributions have different bin counts");
  double d = 0.0;
  for (std::size_t k = 0; k < a.bins(); ++k) d += std::abs(a.weights[k] - b.weights[k]);
  return d;
}

// Smallest difference between two axis angles, in [0, 90].
inline double axis_angle_difference(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 180.0);
  return std::min(d, 180.0 - d);
}

// Squared magnitudes summed into angular sectors about DC. Only the disk of
// radius 1/2 in normalized frequency is used, so every direction sees the
// same radial extent. Energy at spectral angle psi belongs to fibers running
// at psi + 90 degrees.
inline OrientationDistribution angular_distribution(const Spectrum& spec, std::size_t bins) {
  if (bins < 4) throw InvalidParameter("need at least 4 angle bins");
  std::vector<double> raw(bins, 0.0);
  const double bw = 180.0 / static_cast<double>(bins);
  for (std::size_t v = 0; v < spec.height; ++v) {
    const double fv = (static_cast<double>(v) - static_cast<double>(spec.dc_v())) / static_cast<double>(spec.height);
    for (std::size_t u = 0; u < spec.width; ++u) {
      if (u == spec.dc_u() && v == spec.dc_v()) continue;
      const double fu = (static_cast<double>(u) - static_cast<double>(spec.dc_u())) / static_cast<double>(spec.width);
      if (fu * fu + fv * fv >= 0.25) continue;
      double fiber = std::atan2(fv, fu) * 180.0 / std::numbers::pi + 90.0;
      fiber = std::fmod(fiber, 180.0);
      if (fiber < 0.0) fiber += 180.0;
      const auto k = std::min(static_cast<std::size_t>(fiber / bw), bins - 1);
      raw[k] += std::norm(spec.at(u, v));
    }
  }
  return normalized_distribution(std::move(raw));
}

// Mean-removed FFT orientation. The mean is removed in exact integer
// arithmetic, so adding a constant to every pixel gives the identical result.
inline OrientationDistribution fft_orientation(const GrayImage& img, std::size_t bins) {
  const auto n = static_cast<std::int64_t>(img.size());
  std::int64_t sum = 0;
  for (auto p : img.pixels()) sum += p;
  auto centered = RealGrid::like(img);
  for (std::size_t i = 0; i < img.size(); ++i) {
    centered.pixels()[i] = static_cast<double>(n * img.pixels()[i] - sum) / static_cast<double>(n);
  }
  return angular_distribution(fft2(centered), bins);
}

// ------------------------------------------------------------------ Hough

// Votes for rho = x cos(theta) + y sin(theta), theta in [0, 180), rho signed.
// Rho bin i holds (i - rho_offset) * delta_rho.
struct HoughAccumulator {
  std::size_t theta_bins = 0;
  std::size_t rho_bins = 0;
  std::size_t rho_offset = 0;
  double delta_rho = 1.0;
  double delta_theta = 1.0;  // degrees
  double diagonal = 0.0;
  std::vector<std::uint32_t> counts;  // theta-major: counts[t * rho_bins + r]

  std::uint32_t count(std::size_t rho_bin, std::size_t theta_bin) const {
    return counts[theta_bin * rho_bins + rho_bin];
  }
  double rho_of(std::size_t rho_bin) const {
    return (static_cast<double>(rho_bin) - static_cast<double>(rho_offset)) * delta_rho;
  }
  double theta_of(std::size_t theta_bin) const { return static_cast<double>(theta_bin) * delta_theta; }
};

inline HoughAccumulator hough_transform(const BinaryImage& bin, double delta_rho = 1.0, double delta_theta = 1.0) {
  if (!(delta_rho > 0.0) || !(delta_theta > 0.0)) throw InvalidParameter("Hough bin sizes must be > 0");
  if (delta_theta > 90.0) throw InvalidParameter("delta_theta must be <= 90 degrees");
  HoughAccumulator acc;
  acc.delta_rho = delta_rho;
  acc.delta_theta = delta_theta;
  acc.theta_bins = static_cast<std::size_t>(std::ceil(180.0 / delta_theta - 1e-9));
  acc.diagonal = std::hypot(static_cast<double>(bin.width()), static_cast<double>(bin.height()));
  acc.rho_offset = static_cast<std::size_t>(std::ceil(acc.diagonal / delta_rho));
  acc.rho_bins = 2 * acc.rho_offset + 1;
  acc.counts.assign(acc.theta_bins * acc.rho_bins, 0);

  std::vector<double> cs(acc.theta_bins), sn(acc.theta_bins);
  for (std::size_t t = 0; t < acc.theta_bins; ++t) {
    const double th = acc.theta_of(t) * std::numbers::pi / 180.0;
    cs[t] = std::cos(th);
    sn[t] = std::sin(th);
  }
  for (std::size_t y = 0; y < bin.height(); ++y) {
    for (std::size_t x = 0; x < bin.width(); ++x) {
      if (!bin(x, y)) continue;
      for (std::size_t t = 0; t < acc.theta_bins; ++t) {
        const double rho = static_cast<double>(x) * cs[t] + static_cast<double>(y) * sn[t];
        const auto r = static_cast<std::ptrdiff_t>(std::lround(rho / delta_rho)) +
                       static_cast<std::ptrdiff_t>(acc.rho_offset);
        ++acc.counts[t * acc.rho_bins + static_cast<std::size_t>(r)];
      }
    }
  }
  return acc;
}

struct DetectedLine {
  double rho = 0.0;    // px
  double theta = 0.0;  // degrees, [0, 180)
  std::size_t support = 0;
  double estimated_length = 0.0;  // px
};

struct PeakOptions {
  std::size_t max_lines = 64;
  std::size_t nms_rho = 3;    // half-window, rho bins
  std::size_t nms_theta = 3;  // half-window, theta bins
  std::size_t min_support = 10;
};

// Greedy peak picking by descending count; ties prefer the lower theta bin,
// then the lower rho bin. The suppression window wraps across theta = 180,
// where rho changes sign.
inline std::vector<DetectedLine> hough_peaks(const HoughAccumulator& acc, const PeakOptions& opt = {}) {
  if (opt.max_lines < 1) throw InvalidParameter("max_lines must be >= 1");
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < acc.counts.size(); ++i) {
    if (acc.counts[i] >= opt.min_support && acc.counts[i] > 0) cells.push_back(i);
  }
  std::sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
    if (acc.counts[a] != acc.counts[b]) return acc.counts[a] > acc.counts[b];
    return a < b;  // theta-major index order = (theta, rho) order
  });

  std::vector<std::uint8_t> suppressed(acc.counts.size(), 0);
  const auto T = static_cast<std::ptrdiff_t>(acc.theta_bins);
  const auto R = static_cast<std::ptrdiff_t>(acc.rho_bins);
  const auto off = static_cast<std::ptrdiff_t>(acc.rho_offset);
  const auto nr = static_cast<std::ptrdiff_t>(opt.nms_rho);
  const auto nt = static_cast<std::ptrdiff_t>(opt.nms_theta);

  std::vector<DetectedLine> lines;
  for (std::size_t cell : cells) {
    if (lines.size() >= opt.max_lines) break;
    if (suppressed[cell]) continue;
    const auto t0 = static_cast<std::ptrdiff_t>(cell / acc.rho_bins);
    const auto r0 = static_cast<std::ptrdiff_t>(cell % acc.rho_bins);
    lines.push_back({acc.rho_of(static_cast<std::size_t>(r0)), acc.theta_of(static_cast<std::size_t>(t0)),
                     acc.counts[cell], 0.0});
    for (std::ptrdiff_t dt = -nt; dt <= nt; ++dt) {
      std::ptrdiff_t t = t0 + dt;
      bool mirrored = false;
      if (t < 0 || t >= T) {
        t = (t + T) % T;
        mirrored = true;
      }
      for (std::ptrdiff_t dr = -nr; dr <= nr; ++dr) {
        std::ptrdiff_t r = r0 + dr;
        if (mirrored) r = 2 * off - r;
        if (r < 0 || r >= R) continue;
        suppressed[static_cast<std::size_t>(t * R + r)] = 1;
      }
    }
  }
  return lines;
}

// Consecutive pixels further apart than this along a line (a gap of more
// than 2 empty pixels) end a run.
inline constexpr double kMaxRunStep = 3.0;

// Length of each line as the longest run of foreground pixels within `band`
// of it, measured along the line; runs may skip gaps of up to 2 px.
inline std::vector<DetectedLine> estimate_line_lengths(const BinaryImage& bin, std::vector<DetectedLine> lines,
                                                       double band = 1.0) {
  if (!(band >= 1.0)) throw InvalidParameter("band must be >= 1 px");
  std::vector<std::pair<double, double>> fg;
  for (std::size_t y = 0; y < bin.height(); ++y) {
    for (std::size_t x = 0; x < bin.width(); ++x) {
      if (bin(x, y)) fg.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  std::vector<double> proj;
  for (auto& line : lines) {
    const double th = line.theta * std::numbers::pi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    proj.clear();
    for (auto [x, y] : fg) {
      if (std::abs(x * c + y * s - line.rho) <= band) proj.push_back(x * s - y * c);
    }
    line.support = proj.size();
    if (proj.empty()) {
      line.estimated_length = 0.0;
      continue;
    }
    std::sort(proj.begin(), proj.end());
    double best = 0.0, start = proj.front();
    for (std::size_t i = 1; i < proj.size(); ++i) {
      if (proj[i] - proj[i - 1] > kMaxRunStep) start = proj[i];
      best = std::max(best, proj[i] - start);
    }
    line.estimated_length = best + 1.0;
  }
  return lines;
}

enum class HoughWeighting { by_length, by_count };

// Fiber axis = theta - 90 degrees (mod 180).
inline double fiber_angle_of(const DetectedLine& line) {
  double a = std::fmod(line.theta - 90.0, 180.0);
  return a < 0.0 ? a + 180.0 : a;
}

inline OrientationDistribution orientation_from_hough(std::span<const DetectedLine> lines, std::size_t bins,
                                                      HoughWeighting weighting = HoughWeighting::by_length) {
  if (bins < 1) throw InvalidParameter("need at least one angle bin");
  if (lines.empty()) throw NoSignal("no lines detected");
  OrientationDistribution shape{std::vector<double>(bins, 0.0)};
  std::vector<double> raw(bins, 0.0);
  for (const auto& l : lines) {
    raw[shape.bin_of(fiber_angle_of(l))] += weighting == HoughWeighting::by_length ? l.estimated_length : 1.0;
  }
  return normalized_distribution(std::move(raw));
}

enum class LineExtraction {
  peaks,        // one pass of hough_peaks over the full accumulator
  progressive,  // strongest cell, remove its pixels, re-vote, repeat
};

struct HoughOptions {
  double delta_rho = 1.0;
  double delta_theta = 0.5;
  PeakOptions peaks{};
  double band = 1.0;
  LineExtraction extraction = LineExtraction::progressive;
  bool thin = false;             // skeletonize the mask before voting
  std::uint8_t threshold = 127;  // foreground = gray > threshold
  std::size_t min_length = 0;    // drop shorter lines after length estimation
};

namespace detail {

// Pixels within `band` of (rho, theta) that form the longest run along the
// line, allowing gaps up to 2 px. Returns indices into `pts`.
inline std::vector<std::size_t> longest_run(const std::vector<std::pair<double, double>>& pts,
                                            const std::vector<std::uint8_t>& alive, double rho, double theta_deg,
                                            double band, double& length) {
  const double th = theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  std::vector<std::pair<double, std::size_t>> proj;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!alive[i]) continue;
    const auto [x, y] = pts[i];
    if (std::abs(x * c + y * s - rho) <= band) proj.push_back({x * s - y * c, i});
  }
  length = 0.0;
  if (proj.empty()) return {};
  std::sort(proj.begin(), proj.end());
  std::size_t best_lo = 0, best_hi = 0, lo = 0;
  for (std::size_t i = 1; i < proj.size(); ++i) {
    if (proj[i].first - proj[i - 1].first > kMaxRunStep) lo = i;
    if (proj[i].first - proj[lo].first > proj[best_hi].first - proj[best_lo].first) {
      best_lo = lo;
      best_hi = i;
    }
  }
  length = proj[best_hi].first - proj[best_lo].first + 1.0;
  std::vector<std::size_t> run;
  for (std::size_t i = best_lo; i <= best_hi; ++i) run.push_back(proj[i].second);
  return run;
}

// Repeatedly takes the strongest accumulator cell, assigns it the longest
// run of pixels along its line, and withdraws those pixels' votes.
inline std::vector<DetectedLine> progressive_lines(const BinaryImage& mask, const HoughOptions& opt) {
  auto acc = hough_transform(mask, opt.delta_rho, opt.delta_theta);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  std::vector<std::uint8_t> alive(pts.size(), 1);
  std::vector<double> cs(acc.theta_bins), sn(acc.theta_bins);
  for (std::size_t t = 0; t < acc.theta_bins; ++t) {
    const double th = acc.theta_of(t) * std::numbers::pi / 180.0;
    cs[t] = std::cos(th);
    sn[t] = std::sin(th);
  }

  std::vector<DetectedLine> lines;
  const std::size_t min_support = std::max<std::size_t>(opt.peaks.min_support, 1);
  while (lines.size() < opt.peaks.max_lines) {
    const auto it = std::max_element(acc.counts.begin(), acc.counts.end());
    if (*it < min_support) break;
    const auto cell = static_cast<std::size_t>(it - acc.counts.begin());
    DetectedLine line;
    line.rho = acc.rho_of(cell % acc.rho_bins);
    line.theta = acc.theta_of(cell / acc.rho_bins);
    const auto run = longest_run(pts, alive, line.rho, line.theta, opt.band, line.estimated_length);
    line.support = run.size();
    if (run.empty()) {
      acc.counts[cell] = 0;  // cannot happen for band >= delta_rho / 2; guards the loop
      continue;
    }
    for (std::size_t i : run) {
      alive[i] = 0;
      const auto [x, y] = pts[i];
      for (std::size_t t = 0; t < acc.theta_bins; ++t) {
        const auto r = static_cast<std::ptrdiff_t>(std::lround((x * cs[t] + y * sn[t]) / acc.delta_rho)) +
                       static_cast<std::ptrdiff_t>(acc.rho_offset);
        --acc.counts[t * acc.rho_bins + static_cast<std::size_t>(r)];
      }
    }
    lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

struct HoughResult {
  std::vector<DetectedLine> lines;
  OrientationDistribution distribution;
};

inline HoughResult hough_orientation(const GrayImage& img, std::size_t bins, const HoughOptions& opt = {},
                                     HoughWeighting weighting = HoughWeighting::by_length) {
  auto mask = global_threshold(img, opt.threshold);
  if (opt.thin) mask = skeletonize(mask);
  std::vector<DetectedLine> lines;
  if (opt.extraction == LineExtraction::progressive) {
    lines = detail::progressive_lines(mask, opt);
  } else {
    const auto acc = hough_transform(mask, opt.delta_rho, opt.delta_theta);
    lines = estimate_line_lengths(mask, hough_peaks(acc, opt.peaks), opt.band);
  }
  std::erase_if(lines, [&](const DetectedLine& l) {
    return l.estimated_length < static_cast<double>(std::max<std::size_t>(opt.min_length, 1));
  });
  HoughResult r;
  r.distribution = orientation_from_hough(lines, bins, weighting);
  r.lines = std::move(lines);
  return r;
}

// ------------------------------------------------------------------ effect studies

enum class EffectVariant {
  magnification_30x,
  magnification_50x,
  magnification_100x,
  frame_square,
  frame_circle,
  brightness_uniform,
  brightness_gradient,
};

inline EffectVariant parse_effect_variant(std::string_view s) {
  if (s == "30x") return EffectVariant::magnification_30x;
  if (s == "50x") return EffectVariant::magnification_50x;
  if (s == "100x") return EffectVariant::magnification_100x;
  if (s == "square") return EffectVariant::frame_square;
  if (s == "circle") return EffectVariant::frame_circle;
  if (s == "uniform") return EffectVariant::brightness_uniform;
  if (s == "gradient") return EffectVariant::brightness_gradient;
  throw InvalidParameter("unknown effect variant '" + std::string(s) + "'");
}

struct EffectStudy {
  OrientationDistribution baseline;
  OrientationDistribution variant;
  double l1 = 0.0;
};

inline constexpr std::uint8_t kUniformBrightnessOffset = 40;

namespace detail {

inline GrayImage center_square(const GrayImage& img) {
  const std::size_t s = std::min(img.width(), img.height());
  return crop(img, (img.width() - s) / 2, (img.height() - s) / 2, s, s);
}

inline GrayImage magnify(const GrayImage& img, double m) {
  // 30x is the reference field of view; higher magnification sees 30/m of it.
  const double f = 30.0 / m;
  const auto w = static_cast<std::size_t>(std::lround(static_cast<double>(img.width()) * f));
  const auto h = static_cast<std::size_t>(std::lround(static_cast<double>(img.height()) * f));
  if (w < 32 || h < 32) throw InvalidParameter("magnified crop smaller than 32x32");
  return crop(img, (img.width() - w) / 2, (img.height() - h) / 2, w, h);
}

inline GrayImage circle_frame(const GrayImage& img) {
  auto out = img;
  const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
  const double r = static_cast<double>(std::min(img.width(), img.height())) / 2.0;
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      if (std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy) > r) out(x, y) = 0;
    }
  }
  return out;
}

inline GrayImage brightness_gradient(const GrayImage& img) {
  auto out = img;
  const double span = img.width() > 1 ? static_cast<double>(img.width() - 1) : 1.0;
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      out(x, y) = clamp_to_gray(img(x, y) * (0.5 + static_cast<double>(x) / span));
    }
  }
  return out;
}

inline GrayImage brightness_offset(const GrayImage& img, int offset) {
  auto out = img;
  for (auto& p : out.pixels()) p = static_cast<std::uint8_t>(std::clamp(p + offset, 0, 255));
  return out;
}

}  // namespace detail

// Baseline vs. variant FFT distributions for one acquisition effect.
inline EffectStudy study_effects(const GrayImage& web, EffectVariant variant, std::size_t bins = 18) {
  if (web.width() < 32 || web.height() < 32) throw InvalidParameter("web smaller than 32x32");
  GrayImage base = web;
  GrayImage changed;
  switch (variant) {
    case EffectVariant::magnification_30x: changed = detail::magnify(web, 30.0); break;
    case EffectVariant::magnification_50x: changed = detail::magnify(web, 50.0); break;
    case EffectVariant::magnification_100x: changed = detail::magnify(web, 100.0); break;
    case EffectVariant::frame_square:
      base = detail::center_square(web);
      changed = base;
      break;
    case EffectVariant::frame_circle:
      base = detail::center_square(web);
      changed = detail::circle_frame(base);
      break;
    case EffectVariant::brightness_uniform:
      changed = detail::brightness_offset(web, kUniformBrightnessOffset);
      break;
    case EffectVariant::brightness_gradient: changed = detail::brightness_gradient(web); break;
  }
  EffectStudy s;
  s.baseline = fft_orientation(base, bins);
  s.variant = fft_orientation(changed, bins);
  s.l1 = l1_distance(s.baseline, s.variant);
  return s;
}

}  // namespace nonwoven
