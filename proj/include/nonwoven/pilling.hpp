#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nonwoven/error.hpp"
#include "nonwoven/filters.hpp"
#include "nonwoven/image.hpp"

namespace nonwoven {

// One level of a separable orthonormal Haar analysis. With a, b the top
// pair and c, d the bottom pair of a 2x2 block:
//   cA = (a+b+c+d)/2   cH = (a+b-c-d)/2   cV = (a-b+c-d)/2   cD = (a-b-c+d)/2
struct HaarLevel {
  RealGrid cA, cH, cV, cD;
};

struct WaveletDecomposition {
  std::vector<HaarLevel> levels;  // level 1 first
  std::size_t source_width = 0;
  std::size_t source_height = 0;
};

// Odd dimensions are extended by replicating the last row/column.
inline HaarLevel haar_dwt2(const RealGrid& g) {
  if (g.empty()) throw InvalidParameter("cannot transform an empty grid");
  const std::size_t w = (g.width() + 1) / 2;
  const std::size_t h = (g.height() + 1) / 2;
  HaarLevel out{RealGrid(w, h), RealGrid(w, h), RealGrid(w, h), RealGrid(w, h)};
  const double s = 1.0 / std::numbers::sqrt2;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto x0 = static_cast<std::ptrdiff_t>(2 * x), y0 = static_cast<std::ptrdiff_t>(2 * y);
      const double a = g.clamped(x0, y0), b = g.clamped(x0 + 1, y0);
      const double c = g.clamped(x0, y0 + 1), d = g.clamped(x0 + 1, y0 + 1);
      // Rows first, then columns.
      const double top_lo = (a + b) * s, top_hi = (a - b) * s;
      const double bot_lo = (c + d) * s, bot_hi = (c - d) * s;
      out.cA(x, y) = (top_lo + bot_lo) * s;
      out.cH(x, y) = (top_lo - bot_lo) * s;
      out.cV(x, y) = (top_hi + bot_hi) * s;
      out.cD(x, y) = (top_hi - bot_hi) * s;
    }
  }
  return out;
}

// Inverse of haar_dwt2, cropped to width x height (the pre-padding size).
inline RealGrid haar_idwt2(const HaarLevel& lv, std::size_t width, std::size_t height) {
  const std::size_t w = lv.cA.width(), h = lv.cA.height();
  if (width > 2 * w || height > 2 * h || width + 1 < 2 * w || height + 1 < 2 * h) {
    throw InvalidParameter("output size does not match coefficient grids");
  }
  RealGrid out(width, height);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double A = lv.cA(x, y), H = lv.cH(x, y), V = lv.cV(x, y), D = lv.cD(x, y);
      const double px[4] = {(A + H + V + D) / 2, (A + H - V - D) / 2, (A - H + V - D) / 2, (A - H - V + D) / 2};
      for (std::size_t k = 0; k < 4; ++k) {
        const std::size_t ox = 2 * x + (k & 1), oy = 2 * y + (k >> 1);
        if (ox < width && oy < height) out(ox, oy) = px[k];
      }
    }
  }
  return out;
}

inline WaveletDecomposition wavedec2(const RealGrid& g, std::size_t levels) {
  if (levels < 1) throw InvalidParameter("need at least one decomposition level");
  WaveletDecomposition dec;
  dec.source_width = g.width();
  dec.source_height = g.height();
  const RealGrid* cur = &g;
  for (std::size_t k = 0; k < levels; ++k) {
    dec.levels.push_back(haar_dwt2(*cur));
    cur = &dec.levels.back().cA;
  }
  return dec;
}

inline RealGrid waverec2(const WaveletDecomposition& dec) {
  if (dec.levels.empty()) throw InvalidParameter("empty decomposition");
  RealGrid cur = dec.levels.back().cA;
  for (std::size_t k = dec.levels.size(); k-- > 0;) {
    const std::size_t w = k == 0 ? dec.source_width : dec.levels[k - 1].cA.width();
    const std::size_t h = k == 0 ? dec.source_height : dec.levels[k - 1].cA.height();
    HaarLevel lv = dec.levels[k];
    lv.cA = cur;
    cur = haar_idwt2(lv, w, h);
  }
  return cur;
}

inline double population_sd(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

inline constexpr std::size_t kDefaultPillingLevel = 5;

// SDcA_n: population SD of the level-n approximation of the equalized image.
inline double sd_approx(const GrayImage& img, std::size_t level = kDefaultPillingLevel) {
  if (level < 1) throw InvalidParameter("level must be >= 1");
  std::size_t w = img.width(), h = img.height();
  for (std::size_t k = 0; k < level; ++k) {
    w = (w + 1) / 2;
    h = (h + 1) / 2;
  }
  if (w * h < 4) {
    throw InvalidParameter("image too small for level " + std::to_string(level) + " (needs >= 4 coefficients)");
  }
  const auto dec = wavedec2(to_real(equalize_histogram(img)), level);
  return population_sd(dec.levels.back().cA.pixels());
}

// ------------------------------------------------------------------ calibration

inline constexpr double kAugmentCropFraction = 0.15;

// The image plus four copies, each missing 15% at one edge: top, bottom, left, right.
inline std::array<GrayImage, 5> crop_augment(const GrayImage& img) {
  if (img.width() < 20 || img.height() < 20) throw InvalidParameter("crop augmentation needs at least 20x20 px");
  const auto cy = static_cast<std::size_t>(std::lround(kAugmentCropFraction * static_cast<double>(img.height())));
  const auto cx = static_cast<std::size_t>(std::lround(kAugmentCropFraction * static_cast<double>(img.width())));
  const std::size_t w = img.width(), h = img.height();
  return {img, crop(img, 0, cy, w, h - cy), crop(img, 0, 0, w, h - cy), crop(img, cx, 0, w - cx, h),
          crop(img, 0, 0, w - cx, h)};
}

struct PillingCalibration {
  std::size_t level = kDefaultPillingLevel;
  std::array<double, 5> means{};  // mean SDcA_n for grades 1..5
  bool increasing = false;        // means rise from grade 1 to grade 5
};

struct GradedSample {
  int grade = 0;
  GrayImage image;
};

inline PillingCalibration calibrate(std::span<const GradedSample> samples, std::size_t level = kDefaultPillingLevel) {
  std::array<double, 5> sum{};
  std::array<std::size_t, 5> n{};
  for (const auto& s : samples) {
    if (s.grade < 1 || s.grade > 5) throw InvalidParameter("grade must be in 1..5");
    const auto g = static_cast<std::size_t>(s.grade - 1);
    for (const auto& variant : crop_augment(s.image)) {
      sum[g] += sd_approx(variant, level);
      ++n[g];
    }
  }
  PillingCalibration cal;
  cal.level = level;
  for (std::size_t g = 0; g < 5; ++g) {
    if (n[g] == 0) throw IncompleteCalibration("no samples for grade " + std::to_string(g + 1));
    cal.means[g] = sum[g] / static_cast<double>(n[g]);
  }
  bool up = true, down = true;
  for (std::size_t g = 1; g < 5; ++g) {
    up = up && cal.means[g] > cal.means[g - 1];
    down = down && cal.means[g] < cal.means[g - 1];
  }
  if (!up && !down) {
    throw NonMonotoneCalibration("mean SDcA is not strictly monotone in grade at level " + std::to_string(level));
  }
  cal.increasing = up;
  return cal;
}

// Piecewise-linear inverse of the calibration curve, clamped to [1, 5].
inline double grade_from_sd(double sd, const PillingCalibration& cal) {
  const auto& m = cal.means;
  // Orient so that the node values rise with the index.
  auto at = [&](std::size_t i) { return cal.increasing ? m[i] : m[4 - i]; };
  auto grade_at = [&](std::size_t i) { return cal.increasing ? static_cast<double>(i + 1) : static_cast<double>(5 - i); };
  if (sd <= at(0)) return grade_at(0);
  if (sd >= at(4)) return grade_at(4);
  for (std::size_t i = 0; i < 4; ++i) {
    if (sd <= at(i + 1)) {
      const double t = (sd - at(i)) / (at(i + 1) - at(i));
      return grade_at(i) + t * (grade_at(i + 1) - grade_at(i));
    }
  }
  return grade_at(4);
}

inline double grade(const GrayImage& img, const PillingCalibration& cal) {
  return grade_from_sd(sd_approx(img, cal.level), cal);
}

inline std::string format_calibration(const PillingCalibration& cal) {
  std::string out = "level " + std::to_string(cal.level) + "\n";
  char buf[64];
  for (std::size_t g = 0; g < 5; ++g) {
    std::snprintf(buf, sizeof buf, "grade %zu %.17g\n", g + 1, cal.means[g]);
    out += buf;
  }
  return out;
}

// Reads the format written by format_calibration; '#' starts a comment line.
inline PillingCalibration parse_calibration(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  PillingCalibration cal;
  bool have_level = false;
  std::array<bool, 5> seen{};
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "level") {
      long long lv = 0;
      if (!(ls >> lv) || lv < 1) throw ParseError("bad calibration level line: " + line);
      cal.level = static_cast<std::size_t>(lv);
      have_level = true;
    } else if (key == "grade") {
      int g = 0;
      double mean = 0.0;
      if (!(ls >> g >> mean) || g < 1 || g > 5 || !std::isfinite(mean)) {
        throw ParseError("bad calibration grade line: " + line);
      }
      cal.means[static_cast<std::size_t>(g - 1)] = mean;
      seen[static_cast<std::size_t>(g - 1)] = true;
    } else {
      throw ParseError("unknown calibration key '" + key + "'");
    }
  }
  if (!have_level) throw ParseError("calibration has no level line");
  for (std::size_t g = 0; g < 5; ++g) {
    if (!seen[g]) throw IncompleteCalibration("calibration lacks grade " + std::to_string(g + 1));
  }
  bool up = true, down = true;
  for (std::size_t g = 1; g < 5; ++g) {
    up = up && cal.means[g] > cal.means[g - 1];
    down = down && cal.means[g] < cal.means[g - 1];
  }
  if (!up && !down) throw NonMonotoneCalibration("stored calibration is not strictly monotone");
  cal.increasing = up;
  return cal;
}

}  // namespace nonwoven
