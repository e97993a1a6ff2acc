#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nonwoven/error.hpp"
#include "nonwoven/filters.hpp"
#include "nonwoven/image.hpp"
#include "nonwoven/random.hpp"
#include "nonwoven/synthgen.hpp"
#include "nonwoven/threshold.hpp"

namespace nonwoven {

inline constexpr std::size_t kPatchSide = 128;

// Nearest-neighbour resample: output (x, y) takes source (floor(x*W/side), floor(y*H/side)).
template <typename G>
G resample_nearest(const G& img, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0) throw InvalidParameter("resample target must be non-empty");
  G out(out_w, out_h);
  for (std::size_t y = 0; y < out_h; ++y) {
    const std::size_t sy = y * img.height() / out_h;
    for (std::size_t x = 0; x < out_w; ++x) out(x, y) = img(x * img.width() / out_w, sy);
  }
  return out;
}

inline GrayImage normalize_patch(const GrayImage& img) {
  if (img.width() == kPatchSide && img.height() == kPatchSide) return img;
  return resample_nearest(img, kPatchSide, kPatchSide);
}

// ------------------------------------------------------------------ fractal

namespace detail {
inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
}  // namespace detail

// Box-counting dimension. Inputs that are not square with a power-of-two side
// are resampled to the largest power of two not above their longer side.
inline double box_count_dimension(const BinaryImage& input) {
  BinaryImage resampled;
  const BinaryImage* bin = &input;
  if (input.width() != input.height() || !detail::is_pow2(input.width())) {
    std::size_t side = 1;
    while (2 * side <= std::max(input.width(), input.height())) side *= 2;
    resampled = resample_nearest(input, side, side);
    bin = &resampled;
  }
  const std::size_t side = bin->width();
  if (side < 2 || count_foreground(*bin) == 0) return 0.0;

  std::vector<double> xs, ys;
  for (std::size_t s = side; s >= 2; s /= 2) {
    const std::size_t n = side / s;
    std::vector<std::uint8_t> occupied(n * n, 0);
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x)
        if ((*bin)(x, y)) occupied[(y / s) * n + x / s] = 1;
    const auto count = std::count(occupied.begin(), occupied.end(), std::uint8_t{1});
    xs.push_back(std::log(1.0 / static_cast<double>(s)));
    ys.push_back(std::log(static_cast<double>(count)));
  }
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

// ------------------------------------------------------------------ features

struct FeatureVector {
  double mean_gray = 0.0;
  double variance_gray = 0.0;
  double std_gray = 0.0;
  double density_pct = 0.0;  // % of pixels above the threshold
  double fractal_dim = 0.0;

  std::array<double, 5> as_array() const { return {mean_gray, variance_gray, std_gray, density_pct, fractal_dim}; }
};

inline constexpr std::size_t kFeatureCount = 5;

// Chow-Kaneko threshold of the histogram, or the floor of the mean gray when
// the histogram does not admit a two-component fit.
inline int feature_threshold(const GrayImage& img, double mean_gray) {
  try {
    return chow_kaneko_threshold(histogram(img));
  } catch (const NotBimodal&) {
    return std::clamp(static_cast<int>(std::floor(mean_gray)), 0, 255);
  }
}

inline FeatureVector extract_features(const GrayImage& img) {
  const auto patch = normalize_patch(img);
  FeatureVector f;
  const double n = static_cast<double>(patch.size());
  double sum = 0.0;
  for (auto v : patch.pixels()) sum += v;
  f.mean_gray = sum / n;
  double ss = 0.0;
  for (auto v : patch.pixels()) ss += (v - f.mean_gray) * (v - f.mean_gray);
  f.variance_gray = ss / n;
  f.std_gray = std::sqrt(f.variance_gray);

  const auto bin = global_threshold(patch, feature_threshold(patch, f.mean_gray));
  f.density_pct = 100.0 * static_cast<double>(count_foreground(bin)) / n;
  f.fractal_dim = f.density_pct == 0.0 ? 0.0 : box_count_dimension(bin);
  return f;
}

// ------------------------------------------------------------------ MLP

struct MlpLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // row-major, outputs x inputs
  std::vector<double> biases;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct MlpNetwork {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  std::vector<MlpLayer> layers;
  std::vector<double> input_mean;   // z-score parameters from the training set
  std::vector<double> input_scale;
  std::uint64_t seed = 0;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }

  // Activations of every layer for a raw (unstandardized) input; [0] is the
  // standardized input.
  std::vector<std::vector<double>> activations(std::span<const double> x) const {
    if (x.size() != input_size()) throw InvalidParameter("input has wrong dimension");
    std::vector<std::vector<double>> acts(layers.size() + 1);
    acts[0].resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) acts[0][i] = (x[i] - input_mean[i]) / input_scale[i];
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      acts[l + 1].resize(L.outputs);
      for (std::size_t o = 0; o < L.outputs; ++o) {
        double z = L.biases[o];
        for (std::size_t i = 0; i < L.inputs; ++i) z += L.weights[o * L.inputs + i] * acts[l][i];
        acts[l + 1][o] = sigmoid(z);
      }
    }
    return acts;
  }

  std::vector<double> forward(std::span<const double> x) const { return activations(x).back(); }
};

struct TrainReport {
  std::size_t epochs = 0;
  std::vector<double> mse_curve;  // after each epoch's update
  double final_mse = 0.0;
};

struct TrainOptions {
  std::vector<std::size_t> hidden{8, 6};
  double learning_rate = 0.1;
  std::size_t epochs = 2000;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpNetwork network;
  TrainReport report;
};

namespace detail {

inline MlpNetwork init_network(std::size_t n_in, std::size_t n_out, const std::vector<std::size_t>& hidden,
                               std::uint64_t seed) {
  MlpNetwork net;
  net.seed = seed;
  net.layer_sizes.push_back(n_in);
  for (auto h : hidden) {
    if (h == 0) throw InvalidParameter("hidden layers must have at least one unit");
    net.layer_sizes.push_back(h);
  }
  net.layer_sizes.push_back(n_out);
  SplitMix64 rng(seed);
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    MlpLayer L;
    L.inputs = net.layer_sizes[l];
    L.outputs = net.layer_sizes[l + 1];
    const double r = 1.0 / std::sqrt(static_cast<double>(L.inputs));
    L.weights.resize(L.inputs * L.outputs);
    L.biases.resize(L.outputs);
    for (auto& w : L.weights) w = rng.uniform(-r, r);
    for (auto& b : L.biases) b = rng.uniform(-r, r);
    net.layers.push_back(std::move(L));
  }
  return net;
}

// Mean over samples and outputs of the squared error.
inline double mean_squared_error(const MlpNetwork& net, const std::vector<std::vector<double>>& x,
                                 const std::vector<std::vector<double>>& t) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto y = net.forward(x[k]);
    for (std::size_t o = 0; o < y.size(); ++o) s += (y[o] - t[k][o]) * (y[o] - t[k][o]);
  }
  return s / static_cast<double>(x.size() * net.output_size());
}

}  // namespace detail

// Full-batch gradient descent on the total error 1/2 sum_k sum_o (y - t)^2.
// The step is not divided by the sample count, so larger training sets need a
// proportionally smaller learning rate. Inputs are z-scored with statistics of `inputs`; constant dimensions keep scale 1.
inline TrainResult train_mlp(const std::vector<std::vector<double>>& inputs,
                             const std::vector<std::vector<double>>& targets, const TrainOptions& opt) {
  if (!(opt.learning_rate > 0.0)) throw InvalidParameter("learning rate must be > 0");
  if (opt.epochs < 1) throw InvalidParameter("epochs must be >= 1");
  if (inputs.empty() || inputs.size() != targets.size()) throw InvalidParameter("inputs and targets must pair up");
  const std::size_t n_in = inputs[0].size(), n_out = targets[0].size();
  if (n_in == 0 || n_out == 0) throw InvalidParameter("empty input or target vectors");
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != n_in || targets[k].size() != n_out) throw InvalidParameter("ragged training data");
  }

  TrainResult res{detail::init_network(n_in, n_out, opt.hidden, opt.seed), {}};
  auto& net = res.network;
  const double n = static_cast<double>(inputs.size());
  net.input_mean.assign(n_in, 0.0);
  net.input_scale.assign(n_in, 0.0);
  for (const auto& x : inputs)
    for (std::size_t i = 0; i < n_in; ++i) net.input_mean[i] += x[i] / n;
  for (const auto& x : inputs)
    for (std::size_t i = 0; i < n_in; ++i) net.input_scale[i] += (x[i] - net.input_mean[i]) * (x[i] - net.input_mean[i]) / n;
  for (auto& s : net.input_scale) s = s > 0.0 ? std::sqrt(s) : 1.0;

  const std::size_t nl = net.layers.size();
  std::vector<std::vector<double>> gw(nl), gb(nl), delta(nl);
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t l = 0; l < nl; ++l) {
      gw[l].assign(net.layers[l].weights.size(), 0.0);
      gb[l].assign(net.layers[l].biases.size(), 0.0);
    }
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const auto acts = net.activations(inputs[k]);
      for (std::size_t l = nl; l-- > 0;) {
        const auto& L = net.layers[l];
        const auto& y = acts[l + 1];
        delta[l].assign(L.outputs, 0.0);
        for (std::size_t o = 0; o < L.outputs; ++o) {
          double e;
          if (l + 1 == nl) {
            e = y[o] - targets[k][o];
          } else {
            const auto& U = net.layers[l + 1];
            e = 0.0;
            for (std::size_t j = 0; j < U.outputs; ++j) e += U.weights[j * U.inputs + o] * delta[l + 1][j];
          }
          delta[l][o] = e * y[o] * (1.0 - y[o]);
          gb[l][o] += delta[l][o];
          for (std::size_t i = 0; i < L.inputs; ++i) gw[l][o * L.inputs + i] += delta[l][o] * acts[l][i];
        }
      }
    }
    const double step = opt.learning_rate;
    for (std::size_t l = 0; l < nl; ++l) {
      auto& L = net.layers[l];
      for (std::size_t i = 0; i < L.weights.size(); ++i) L.weights[i] -= step * gw[l][i];
      for (std::size_t i = 0; i < L.biases.size(); ++i) L.biases[i] -= step * gb[l][i];
    }
    const double mse = detail::mean_squared_error(net, inputs, targets);
    if (!std::isfinite(mse)) throw DivergenceError("loss became non-finite at epoch " + std::to_string(epoch + 1));
    res.report.mse_curve.push_back(mse);
  }
  res.report.epochs = opt.epochs;
  res.report.final_mse = res.report.mse_curve.back();
  return res;
}

// ------------------------------------------------------------------ defect classes

inline constexpr std::size_t kDefectClassCount = 4;

struct LabeledFeatures {
  FeatureVector features;
  DefectKind kind = DefectKind::non_defect;
};

// Per-class feature centroids of the reference study (mean, variance, std,
// density %, fractal dimension), in class-code order.
inline const std::array<LabeledFeatures, kDefectClassCount>& table3_centroids() {
  static const std::array<LabeledFeatures, kDefectClassCount> rows{{
      {{81.04, 48.28, 6.95, 0.0, 0.0}, DefectKind::non_defect},
      {{89.45, 92.92, 9.64, 25.18, 1.6812}, DefectKind::thick_spot},
      {{67.16, 75.51, 8.69, 42.11, 1.8266}, DefectKind::thin_spot},
      {{84.65, 60.84, 7.79, 0.23, 0.4101}, DefectKind::neps},
  }};
  return rows;
}

// Gaussian clusters around the centroids, sd = sigma_frac * |centroid| per dimension.
inline std::vector<LabeledFeatures> gen_feature_clusters(std::uint64_t seed, std::size_t per_class,
                                                         double sigma_frac = 0.05) {
  SplitMix64 rng(seed);
  std::vector<LabeledFeatures> out;
  out.reserve(per_class * kDefectClassCount);
  for (std::size_t i = 0; i < per_class; ++i) {
    for (const auto& c : table3_centroids()) {
      const auto m = c.features.as_array();
      std::array<double, kFeatureCount> v{};
      for (std::size_t d = 0; d < kFeatureCount; ++d) v[d] = rng.normal(m[d], sigma_frac * std::abs(m[d]));
      out.push_back({{v[0], v[1], v[2], v[3], v[4]}, c.kind});
    }
  }
  return out;
}

inline std::string defect_code(DefectKind k) {
  std::string code(kDefectClassCount, '0');
  code[static_cast<std::size_t>(k)] = '1';
  return code;
}

inline TrainResult mlp_train(std::span<const LabeledFeatures> data, const TrainOptions& opt = {}) {
  std::array<bool, kDefectClassCount> present{};
  std::vector<std::vector<double>> x, t;
  for (const auto& d : data) {
    const auto k = static_cast<std::size_t>(d.kind);
    present[k] = true;
    const auto a = d.features.as_array();
    x.emplace_back(a.begin(), a.end());
    std::vector<double> target(kDefectClassCount, 0.0);
    target[k] = 1.0;
    t.push_back(std::move(target));
  }
  for (std::size_t k = 0; k < kDefectClassCount; ++k) {
    if (!present[k]) {
      throw IncompleteDataset("training data has no '" + std::string(defect_kind_name(static_cast<DefectKind>(k))) +
                              "' samples");
    }
  }
  return train_mlp(x, t, opt);
}

struct Classification {
  DefectKind kind = DefectKind::non_defect;
  std::string code;
  std::array<double, kDefectClassCount> confidences{};
};

// Argmax with ties to the lowest class index.
inline Classification classify_outputs(const std::array<double, kDefectClassCount>& y) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kDefectClassCount; ++k)
    if (y[k] > y[best]) best = k;
  const auto kind = static_cast<DefectKind>(best);
  return {kind, defect_code(kind), y};
}

inline Classification mlp_classify(const MlpNetwork& net, const FeatureVector& f) {
  if (net.input_size() != kFeatureCount || net.output_size() != kDefectClassCount) {
    throw InvalidParameter("network is not a 5-feature / 4-class defect classifier");
  }
  const auto a = f.as_array();
  const auto y = net.forward(a);
  return classify_outputs({y[0], y[1], y[2], y[3]});
}

// ------------------------------------------------------------------ persistence

// Line-oriented text:
//   mlp 1
//   layers n0 n1 ... nk
//   seed s
//   mean ...          (n0 values)
//   scale ...         (n0 values)
//   weights ...       (per layer: row-major, then)
//   biases ...
inline std::string format_network(const MlpNetwork& net) {
  std::string out = "mlp 1\nlayers";
  for (auto s : net.layer_sizes) out += " " + std::to_string(s);
  out += "\nseed " + std::to_string(net.seed) + "\n";
  char buf[40];
  auto row = [&](const char* key, const std::vector<double>& v) {
    out += key;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      out += buf;
    }
    out += "\n";
  };
  row("mean", net.input_mean);
  row("scale", net.input_scale);
  for (const auto& L : net.layers) {
    row("weights", L.weights);
    row("biases", L.biases);
  }
  return out;
}

inline MlpNetwork parse_network(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&](const std::string& key) {
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string k;
      ls >> k;
      if (k != key) throw ParseError("expected '" + key + "' line, got: " + line);
      return line.substr(k.size());
    }
    throw ParseError("network text ends before '" + key + "'");
  };
  auto reals = [&](const std::string& key, std::size_t n) {
    std::istringstream ls(next_line(key));
    std::vector<double> v;
    double x;
    while (ls >> x) {
      if (!std::isfinite(x)) throw ParseError("non-finite value in '" + key + "'");
      v.push_back(x);
    }
    if (!ls.eof() || v.size() != n) throw ParseError("'" + key + "' needs " + std::to_string(n) + " values");
    return v;
  };

  {
    std::istringstream ls(next_line("mlp"));
    int version = 0;
    if (!(ls >> version) || version != 1) throw ParseError("unsupported network format version");
  }
  MlpNetwork net;
  {
    std::istringstream ls(next_line("layers"));
    long long s;
    while (ls >> s) {
      if (s < 1) throw ParseError("layer sizes must be >= 1");
      net.layer_sizes.push_back(static_cast<std::size_t>(s));
    }
    if (!ls.eof() || net.layer_sizes.size() < 2) throw ParseError("bad layers line");
  }
  {
    std::istringstream ls(next_line("seed"));
    if (!(ls >> net.seed)) throw ParseError("bad seed line");
  }
  const std::size_t n0 = net.layer_sizes.front();
  net.input_mean = reals("mean", n0);
  net.input_scale = reals("scale", n0);
  for (double s : net.input_scale)
    if (!(s > 0.0)) throw ParseError("input scales must be > 0");
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    MlpLayer L;
    L.inputs = net.layer_sizes[l];
    L.outputs = net.layer_sizes[l + 1];
    L.weights = reals("weights", L.inputs * L.outputs);
    L.biases = reals("biases", L.outputs);
    net.layers.push_back(std::move(L));
  }
  return net;
}

}  // namespace nonwoven
