#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nonwoven/defectnet.hpp"
#include "nonwoven/synthgen.hpp"
#include "test_support.hpp"

namespace nonwoven {
namespace {

// Sierpinski carpet on a 3^depth grid, 1 = kept.
BinaryImage carpet(int depth) {
  std::size_t n = 1;
  for (int i = 0; i < depth; ++i) n *= 3;
  BinaryImage b(n, n, 1);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t a = x, c = y; a || c; a /= 3, c /= 3) {
        if (a % 3 == 1 && c % 3 == 1) {
          b(x, y) = 0;
          break;
        }
      }
    }
  }
  return b;
}

BinaryImage place(const BinaryImage& s, std::size_t side, std::size_t dx, std::size_t dy) {
  BinaryImage out(side, side, 0);
  for (std::size_t y = 0; y < s.height(); ++y)
    for (std::size_t x = 0; x < s.width(); ++x) out(x + dx, y + dy) = s(x, y);
  return out;
}

TEST(NormalizePatch, IdentityAt128) {
  const auto img = testing::random_gray(128, 128, 1);
  EXPECT_EQ(normalize_patch(img), img);
}

TEST(NormalizePatch, HalvesExactly) {
  const auto img = testing::random_gray(256, 256, 2);
  const auto out = normalize_patch(img);
  ASSERT_EQ(out.width(), 128u);
  ASSERT_EQ(out.height(), 128u);
  for (std::size_t y = 0; y < 128; ++y)
    for (std::size_t x = 0; x < 128; ++x) ASSERT_EQ(out(x, y), img(2 * x, 2 * y));
}

TEST(NormalizePatch, NonSquareInput) {
  const auto img = testing::random_gray(100, 300, 3);
  const auto out = normalize_patch(img);
  ASSERT_EQ(out.width(), 128u);
  ASSERT_EQ(out.height(), 128u);
  EXPECT_EQ(out(0, 0), img(0, 0));
  // Last output cell samples the last source block: floor(127*100/128), floor(127*300/128).
  EXPECT_EQ(out(127, 127), img(99, 297));
  EXPECT_EQ(out(127, 0), img(99, 0));
}

TEST(BoxCount, FilledPlane) {
  EXPECT_NEAR(box_count_dimension(BinaryImage(256, 256, 1)), 2.0, 0.05);
  EXPECT_NEAR(box_count_dimension(BinaryImage(64, 64, 1)), 2.0, 0.05);
}

TEST(BoxCount, StraightLines) {
  BinaryImage h(256, 256), v(256, 256), d(256, 256);
  for (std::size_t i = 0; i < 256; ++i) {
    h(i, 77) = 1;
    v(140, i) = 1;
    d(i, i) = 1;
  }
  EXPECT_NEAR(box_count_dimension(h), 1.0, 0.1);
  EXPECT_NEAR(box_count_dimension(v), 1.0, 0.1);
  EXPECT_NEAR(box_count_dimension(d), 1.0, 0.1);
}

TEST(BoxCount, SierpinskiCarpet) {
  const double want = std::log(8.0) / std::log(3.0);
  EXPECT_NEAR(box_count_dimension(carpet(6)), want, 0.05);  // 729 -> 512
}

TEST(BoxCount, EmptyIsZero) {
  EXPECT_EQ(box_count_dimension(BinaryImage(128, 128, 0)), 0.0);
  EXPECT_EQ(box_count_dimension(BinaryImage(100, 37, 0)), 0.0);
}

TEST(BoxCount, RangeOnRandomMasks) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double d = box_count_dimension(testing::random_blobs(128, 128, seed));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0 + 1e-12);
  }
}

TEST(BoxCount, RotationInvariant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = testing::random_blobs(128, 128, seed);
    EXPECT_NEAR(box_count_dimension(rotate90(b)), box_count_dimension(b), 0.02);
  }
}

TEST(BoxCount, TranslationInvariant) {
  const auto c = carpet(5);  // 243 px
  const double base = box_count_dimension(place(c, 256, 0, 0));
  for (std::size_t dx = 0; dx <= 13; dx += 3)
    for (std::size_t dy = 0; dy <= 13; dy += 2) EXPECT_NEAR(box_count_dimension(place(c, 256, dx, dy)), base, 0.02);
  const BinaryImage square(200, 200, 1);
  const double sq = box_count_dimension(place(square, 256, 0, 0));
  for (std::size_t dx = 0; dx <= 56; dx += 7)
    for (std::size_t dy = 0; dy <= 56; dy += 5) EXPECT_NEAR(box_count_dimension(place(square, 256, dx, dy)), sq, 0.02);
}

TEST(Features, ConstantBlack) {
  const auto f = extract_features(GrayImage(90, 90, 0));
  EXPECT_EQ(f.mean_gray, 0.0);
  EXPECT_EQ(f.variance_gray, 0.0);
  EXPECT_EQ(f.density_pct, 0.0);
  EXPECT_EQ(f.fractal_dim, 0.0);
}

TEST(Features, Invariants) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto kind = static_cast<DefectKind>(seed % 4);
    const auto f = extract_features(gen_defect_web(kind, seed, 128, 128));
    EXPECT_NEAR(f.std_gray * f.std_gray, f.variance_gray, 1e-6);
    EXPECT_GE(f.density_pct, 0.0);
    EXPECT_LE(f.density_pct, 100.0);
    EXPECT_GE(f.fractal_dim, 0.0);
    EXPECT_LE(f.fractal_dim, 2.0 + 1e-12);
  }
}

TEST(Features, MeanAndVarianceByHand) {
  GrayImage img(128, 128, 10);
  for (std::size_t y = 0; y < 128; ++y)
    for (std::size_t x = 64; x < 128; ++x) img(x, y) = 30;
  const auto f = extract_features(img);
  EXPECT_DOUBLE_EQ(f.mean_gray, 20.0);
  EXPECT_DOUBLE_EQ(f.variance_gray, 100.0);
  EXPECT_DOUBLE_EQ(f.std_gray, 10.0);
  EXPECT_DOUBLE_EQ(f.density_pct, 50.0);  // the bright half
  // Box counts of a half plane at s = 128..2: 1, 2, 8, 32, 128, 512, 2048.
  const double counts[] = {1, 2, 8, 32, 128, 512, 2048};
  double mx = 0, my = 0;
  for (int i = 0; i < 7; ++i) {
    mx += std::log(std::ldexp(1.0, i - 7)) / 7;
    my += std::log(counts[i]) / 7;
  }
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 7; ++i) {
    const double x = std::log(std::ldexp(1.0, i - 7)) - mx;
    sxy += x * (std::log(counts[i]) - my);
    sxx += x * x;
  }
  EXPECT_NEAR(f.fractal_dim, sxy / sxx, 1e-12);
}

TEST(Features, DeterministicAndScaleNormalized) {
  const auto small = gen_defect_web(DefectKind::thick_spot, 4, 128, 128);
  GrayImage big(256, 256);
  for (std::size_t y = 0; y < 256; ++y)
    for (std::size_t x = 0; x < 256; ++x) big(x, y) = small(x / 2, y / 2);
  const auto a = extract_features(small).as_array();
  EXPECT_EQ(extract_features(small).as_array(), a);
  EXPECT_EQ(extract_features(big).as_array(), a);
  const auto odd = extract_features(gen_defect_web(DefectKind::neps, 4, 200, 90));
  EXPECT_TRUE(std::isfinite(odd.fractal_dim));
}

TEST(Features, ThinSpotDarkerThanClean) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto clean = extract_features(gen_defect_web(DefectKind::non_defect, seed, 128, 128));
    const auto thin = extract_features(gen_defect_web(DefectKind::thin_spot, seed, 128, 128));
    EXPECT_LT(thin.mean_gray, clean.mean_gray) << "seed " << seed;
  }
}

// ------------------------------------------------------------------ MLP

TEST(Mlp, OneEpochCurve) {
  const auto data = gen_feature_clusters(1, 5);
  TrainOptions opt;
  opt.epochs = 1;
  const auto r = mlp_train(data, opt);
  ASSERT_EQ(r.report.mse_curve.size(), 1u);
  EXPECT_EQ(r.report.epochs, 1u);
  EXPECT_EQ(r.report.final_mse, r.report.mse_curve.back());
}

TEST(Mlp, ArchitectureAndOutputRange) {
  const auto r = mlp_train(gen_feature_clusters(2, 5), TrainOptions{{8, 6}, 0.1, 20, 3});
  EXPECT_EQ(r.network.layer_sizes, (std::vector<std::size_t>{5, 8, 6, 4}));
  for (const auto& d : gen_feature_clusters(9, 5)) {
    const auto a = d.features.as_array();
    for (double y : r.network.forward(a)) {
      EXPECT_GT(y, 0.0);
      EXPECT_LT(y, 1.0);
    }
  }
  for (const auto& L : r.network.layers)
    for (double w : L.weights) EXPECT_TRUE(std::isfinite(w));
}

TEST(Mlp, Xor) {
  const std::vector<std::vector<double>> x{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const std::vector<std::vector<double>> t{{1, 0}, {0, 1}, {0, 1}, {1, 0}};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = train_mlp(x, t, TrainOptions{{4}, 0.5, 5000, seed});
    EXPECT_LT(r.report.final_mse, 0.05) << "seed " << seed;
  }
}

TEST(Mlp, DeterministicPerSeed) {
  const auto data = gen_feature_clusters(3, 10);
  const TrainOptions opt{{8, 6}, 0.1, 50, 11};
  const auto a = mlp_train(data, opt), b = mlp_train(data, opt);
  EXPECT_EQ(a.report.mse_curve, b.report.mse_curve);
  EXPECT_EQ(format_network(a.network), format_network(b.network));
  auto other = opt;
  other.seed = 12;
  EXPECT_NE(mlp_train(data, other).report.mse_curve, a.report.mse_curve);
}

TEST(Mlp, ClusterHoldout) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto train = gen_feature_clusters(seed, 25);
    const auto test = gen_feature_clusters(1000 + seed, 100);
    const auto r = mlp_train(train, TrainOptions{{8, 6}, 0.1, 2000, seed});
    std::size_t ok = 0;
    for (const auto& d : test) ok += mlp_classify(r.network, d.features).kind == d.kind;
    EXPECT_GE(static_cast<double>(ok) / static_cast<double>(test.size()), 0.95) << "seed " << seed;
  }
}

TEST(Mlp, LossNonIncreasingAtSmallRate) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = mlp_train(gen_feature_clusters(seed, 25), TrainOptions{{8, 6}, 0.01, 2000, seed});
    for (std::size_t e = 1; e < r.report.mse_curve.size(); ++e) {
      ASSERT_LE(r.report.mse_curve[e], r.report.mse_curve[e - 1]) << "seed " << seed << " epoch " << e;
    }
  }
}

TEST(Mlp, Errors) {
  auto data = gen_feature_clusters(4, 5);
  std::erase_if(data, [](const LabeledFeatures& d) { return d.kind == DefectKind::neps; });
  EXPECT_THROW(mlp_train(data), IncompleteDataset);
  const auto full = gen_feature_clusters(4, 5);
  EXPECT_THROW(mlp_train(full, TrainOptions{{8}, 0.0, 10, 0}), InvalidParameter);
  EXPECT_THROW(mlp_train(full, TrainOptions{{8}, 0.1, 0, 0}), InvalidParameter);
  auto bad = full;
  bad[0].features.variance_gray = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(mlp_train(bad, TrainOptions{{8}, 0.1, 10, 0}), DivergenceError);
}

TEST(Classify, ArgmaxAndCodes) {
  auto c = classify_outputs({0.9, 0.1, 0.1, 0.1});
  EXPECT_EQ(c.kind, DefectKind::non_defect);
  EXPECT_EQ(c.code, "1000");
  c = classify_outputs({0.2, 0.2, 0.7, 0.1});
  EXPECT_EQ(c.kind, DefectKind::thin_spot);
  EXPECT_EQ(c.code, "0010");
  c = classify_outputs({0.5, 0.5, 0.1, 0.1});
  EXPECT_EQ(c.kind, DefectKind::non_defect);
  EXPECT_EQ(c.code, "1000");
  EXPECT_EQ(defect_code(DefectKind::thick_spot), "0100");
  EXPECT_EQ(defect_code(DefectKind::neps), "0001");
}

TEST(Classify, MonotoneTransformInvariant) {
  SplitMix64 rng(5);
  for (int i = 0; i < 200; ++i) {
    std::array<double, 4> p{}, logit{}, cubed{};
    for (std::size_t k = 0; k < 4; ++k) {
      p[k] = rng.uniform(0.01, 0.99);
      logit[k] = std::log(p[k] / (1.0 - p[k]));
      cubed[k] = p[k] * p[k] * p[k];
    }
    const auto want = classify_outputs(p).kind;
    EXPECT_EQ(classify_outputs(logit).kind, want);
    EXPECT_EQ(classify_outputs(cubed).kind, want);
  }
}

TEST(Classify, CentroidsClassifyAsThemselves) {
  const auto r = mlp_train(gen_feature_clusters(7, 25), TrainOptions{});
  for (const auto& c : table3_centroids()) EXPECT_EQ(mlp_classify(r.network, c.features).kind, c.kind);
}

TEST(NetworkText, RoundTrip) {
  const auto r = mlp_train(gen_feature_clusters(8, 10), TrainOptions{{8, 6}, 0.1, 30, 8});
  const auto text = format_network(r.network);
  const auto back = parse_network(text);
  EXPECT_EQ(back.layer_sizes, r.network.layer_sizes);
  EXPECT_EQ(back.input_mean, r.network.input_mean);
  EXPECT_EQ(back.input_scale, r.network.input_scale);
  EXPECT_EQ(back.seed, r.network.seed);
  for (std::size_t l = 0; l < back.layers.size(); ++l) {
    EXPECT_EQ(back.layers[l].weights, r.network.layers[l].weights);
    EXPECT_EQ(back.layers[l].biases, r.network.layers[l].biases);
  }
  EXPECT_EQ(format_network(back), text);
}

TEST(NetworkText, Malformed) {
  EXPECT_THROW(parse_network(""), ParseError);
  EXPECT_THROW(parse_network("mlp 2\n"), ParseError);
  EXPECT_THROW(parse_network("mlp 1\nlayers 2 1\nseed 0\nmean 0 0\nscale 1 1\nweights 1\nbiases 0\n"), ParseError);
  EXPECT_THROW(parse_network("mlp 1\nlayers 1 1\nseed 0\nmean 0\nscale 0\nweights 1\nbiases 0\n"), ParseError);
  EXPECT_NO_THROW(parse_network("mlp 1\nlayers 1 1\nseed 0\nmean 0\nscale 1\nweights 1\nbiases 0\n"));
}

}  // namespace
}  // namespace nonwoven
