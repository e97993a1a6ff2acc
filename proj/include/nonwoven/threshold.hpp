#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Dense>

#include "nonwoven/error.hpp"
#include "nonwoven/filters.hpp"
#include "nonwoven/image.hpp"

namespace nonwoven {

struct GaussianComponent {
  double weight = 0.0;  // fraction of the histogram mass
  double mean = 0.0;
  double sd = 0.0;
};

struct MixtureFit {
  GaussianComponent low;   // smaller mean
  GaussianComponent high;  // larger mean
  double threshold = 0.0;  // continuous threshold position
  bool from_intersection = true;
  int iterations = 0;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

constexpr double kMinComponentSd = 0.05;

// Probability mass a component puts on bin k, i.e. on [k - 0.5, k + 0.5).
inline double bin_mass(double mean, double sd, int k) {
  return normal_cdf((k + 0.5 - mean) / sd) - normal_cdf((k - 0.5 - mean) / sd);
}

using Params = Eigen::Matrix<double, 6, 1>;

inline double mixture_sse(const Params& p, const std::array<double, 256>& h) {
  double sse = 0.0;
  for (int k = 0; k < 256; ++k) {
    const double m = p[0] * bin_mass(p[1], p[2], k) + p[3] * bin_mass(p[4], p[5], k);
    sse += (h[k] - m) * (h[k] - m);
  }
  return sse;
}

// Midpoint of the first run of minimal counts in [lo, hi].
inline double valley_midpoint(const std::array<double, 256>& h, int lo, int hi) {
  int best = lo;
  for (int k = lo; k <= hi; ++k) {
    if (h[k] < h[best]) best = k;
  }
  int end = best;
  while (end + 1 <= hi && h[end + 1] == h[best]) ++end;
  return 0.5 * (best + end);
}

inline double component_intersection(const GaussianComponent& a, const GaussianComponent& b) {
  // ln(wa/sa) - (x-ma)^2/(2 sa^2) = ln(wb/sb) - (x-mb)^2/(2 sb^2)
  const double qa = 1.0 / (2.0 * a.sd * a.sd);
  const double qb = 1.0 / (2.0 * b.sd * b.sd);
  const double A = qb - qa;
  const double B = 2.0 * (a.mean * qa - b.mean * qb);
  const double C = b.mean * b.mean * qb - a.mean * a.mean * qa +
                   std::log((a.weight * b.sd) / (b.weight * a.sd));
  const double scale = std::max({std::abs(qa), std::abs(qb), 1e-300});
  if (std::abs(A) <= 1e-12 * scale) {
    return B != 0.0 ? -C / B : std::numeric_limits<double>::quiet_NaN();
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -0.5 * (B + std::copysign(sq, B));
  const double r1 = q / A;
  const double r2 = q != 0.0 ? C / q : r1;
  const auto inside = [&](double x) { return x > a.mean && x < b.mean; };
  if (inside(r1)) return r1;
  if (inside(r2)) return r2;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// Two-component Gaussian mixture fitted to the histogram by Levenberg-Marquardt
// least squares on the bin masses. Initialization splits the histogram at the
// valley between its main peak and the peak maximizing distance^2 * count.
inline MixtureFit fit_bimodal_mixture(const Histogram256& hist, int max_iterations = 200) {
  if (hist.total == 0) throw NotBimodal("empty histogram");
  std::array<double, 256> h{};
  const double total = static_cast<double>(hist.total);
  for (int k = 0; k < 256; ++k) h[k] = hist.counts[k] / total;

  int p1 = 0;
  for (int k = 1; k < 256; ++k) {
    if (h[k] > h[p1]) p1 = k;
  }
  int p2 = p1;
  double best = 0.0;
  for (int k = 0; k < 256; ++k) {
    const double score = static_cast<double>((k - p1) * (k - p1)) * h[k];
    if (score > best) {
      best = score;
      p2 = k;
    }
  }
  if (p2 == p1) throw NotBimodal("histogram has a single occupied level");
  const int lo = std::min(p1, p2);
  const int hi = std::max(p1, p2);
  const auto split = static_cast<int>(std::floor(detail::valley_midpoint(h, lo, hi)));

  auto moments = [&](int from, int to) {
    GaussianComponent c;
    for (int k = from; k <= to; ++k) {
      c.weight += h[k];
      c.mean += k * h[k];
    }
    if (c.weight <= 0.0) throw NotBimodal("one side of the valley is empty");
    c.mean /= c.weight;
    for (int k = from; k <= to; ++k) c.sd += (k - c.mean) * (k - c.mean) * h[k];
    c.sd = std::max(std::sqrt(c.sd / c.weight), 0.5);
    return c;
  };
  const auto left = moments(0, split);
  const auto right = moments(split + 1, 255);

  detail::Params p;
  p << left.weight, left.mean, left.sd, right.weight, right.mean, right.sd;

  auto clamp_params = [](detail::Params& q) {
    q[0] = std::max(q[0], 1e-9);
    q[3] = std::max(q[3], 1e-9);
    q[2] = std::clamp(q[2], detail::kMinComponentSd, 256.0);
    q[5] = std::clamp(q[5], detail::kMinComponentSd, 256.0);
    q[1] = std::clamp(q[1], -64.0, 319.0);
    q[4] = std::clamp(q[4], -64.0, 319.0);
  };

  double sse = detail::mixture_sse(p, h);
  double lambda = 1e-3;
  int it = 0;
  for (; it < max_iterations; ++it) {
    Eigen::Matrix<double, 256, 6> J;
    Eigen::Matrix<double, 256, 1> r;
    for (int k = 0; k < 256; ++k) {
      double model = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double w = p[3 * c];
        const double mu = p[3 * c + 1];
        const double sd = p[3 * c + 2];
        const double za = (k - 0.5 - mu) / sd;
        const double zb = (k + 0.5 - mu) / sd;
        const double mass = detail::normal_cdf(zb) - detail::normal_cdf(za);
        const double fa = detail::normal_pdf(za);
        const double fb = detail::normal_pdf(zb);
        model += w * mass;
        J(k, 3 * c) = mass;
        J(k, 3 * c + 1) = w * (fa - fb) / sd;
        J(k, 3 * c + 2) = w * (fa * za - fb * zb) / sd;
      }
      r[k] = h[k] - model;
    }
    const Eigen::Matrix<double, 6, 6> JtJ = J.transpose() * J;
    const Eigen::Matrix<double, 6, 1> Jtr = J.transpose() * r;

    bool improved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::Matrix<double, 6, 6> A = JtJ;
      for (int d = 0; d < 6; ++d) A(d, d) += lambda * std::max(JtJ(d, d), 1e-12);
      const detail::Params step = A.ldlt().solve(Jtr);
      detail::Params cand = p + step;
      clamp_params(cand);
      const double cand_sse = detail::mixture_sse(cand, h);
      if (std::isfinite(cand_sse) && cand_sse < sse) {
        const double gain = sse - cand_sse;
        p = cand;
        sse = cand_sse;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (gain <= 1e-14 * std::max(sse, 1e-300)) it = max_iterations;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }

  MixtureFit fit;
  fit.iterations = std::min(it, max_iterations);
  GaussianComponent a{p[0], p[1], p[2]};
  GaussianComponent b{p[3], p[4], p[5]};
  if (a.mean > b.mean) std::swap(a, b);
  fit.low = a;
  fit.high = b;

  const int lo_bin = static_cast<int>(std::floor(a.mean)) + 1;
  const int hi_bin = static_cast<int>(std::ceil(b.mean)) - 1;
  bool interior_valley = false;
  const auto at = [&](double m) { return h[std::clamp(static_cast<int>(std::lround(m)), 0, 255)]; };
  const double rim = std::min(at(a.mean), at(b.mean));
  for (int k = std::max(lo_bin, 0); k <= std::min(hi_bin, 255); ++k) {
    if (h[k] < rim) {
      interior_valley = true;
      break;
    }
  }
  if (b.mean - a.mean < 2.0 * std::max(a.sd, b.sd) && !interior_valley) {
    throw NotBimodal("fitted components overlap without a valley");
  }

  const double x = detail::component_intersection(a, b);
  if (std::isfinite(x)) {
    fit.threshold = x;
  } else {
    fit.from_intersection = false;
    const int from = std::clamp(lo_bin, 0, 255);
    const int to = std::clamp(hi_bin, from, 255);
    fit.threshold = detail::valley_midpoint(h, from, to);
  }
  return fit;
}

// Optimal threshold intensity of a bimodal histogram.
inline int chow_kaneko_threshold(const Histogram256& hist) {
  const auto fit = fit_bimodal_mixture(hist);
  return std::clamp(static_cast<int>(std::lround(fit.threshold)), 0, 255);
}

}  // namespace nonwoven
