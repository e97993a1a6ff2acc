#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nonwoven/pilling.hpp"
#include "nonwoven/synthgen.hpp"
#include "test_support.hpp"

namespace nonwoven {
namespace {

RealGrid random_real(std::size_t w, std::size_t h, std::uint64_t seed) {
  SplitMix64 rng(seed);
  RealGrid g(w, h);
  for (auto& v : g.pixels()) v = rng.uniform(-100.0, 100.0);
  return g;
}

double energy(const RealGrid& g) {
  double e = 0.0;
  for (double v : g.pixels()) e += v * v;
  return e;
}

TEST(Haar, ConstantGrid) {
  const auto lv = haar_dwt2(RealGrid(6, 4, 3.0));
  EXPECT_EQ(lv.cA.width(), 3u);
  EXPECT_EQ(lv.cA.height(), 2u);
  for (double v : lv.cA.pixels()) EXPECT_NEAR(v, 6.0, 1e-12);
  for (const auto* d : {&lv.cH, &lv.cV, &lv.cD})
    for (double v : d->pixels()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Haar, TwoByTwoByHand) {
  // [[a, b], [c, d]] = [[1, 2], [3, 4]]
  const auto lv = haar_dwt2(RealGrid(2, 2, std::vector<double>{1, 2, 3, 4}));
  EXPECT_NEAR(lv.cA(0, 0), (1 + 2 + 3 + 4) / 2.0, 1e-12);
  EXPECT_NEAR(lv.cH(0, 0), (1 + 2 - 3 - 4) / 2.0, 1e-12);
  EXPECT_NEAR(lv.cV(0, 0), (1 - 2 + 3 - 4) / 2.0, 1e-12);
  EXPECT_NEAR(lv.cD(0, 0), (1 - 2 - 3 + 4) / 2.0, 1e-12);
}

TEST(Haar, PerfectReconstructionAndEnergy) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SplitMix64 dims(seed);
    const std::size_t w = 2 * (1 + dims.below(16)), h = 2 * (1 + dims.below(16));
    const auto g = random_real(w, h, seed);
    const auto lv = haar_dwt2(g);
    const double e = energy(g);
    EXPECT_NEAR(energy(lv.cA) + energy(lv.cH) + energy(lv.cV) + energy(lv.cD), e, 1e-9 * e);
    const auto back = haar_idwt2(lv, w, h);
    EXPECT_LT(testing::max_relative_error(back.vec(), g.vec()), 1e-9);
  }
}

TEST(Haar, OddSizesReplicateEdges) {
  const auto g = random_real(5, 3, 9);
  const auto lv = haar_dwt2(g);
  EXPECT_EQ(lv.cA.width(), 3u);
  EXPECT_EQ(lv.cA.height(), 2u);
  // Last column pairs with itself: no horizontal-difference energy there.
  EXPECT_NEAR(lv.cV(2, 0), 0.0, 1e-12);
  EXPECT_NEAR(lv.cD(2, 1), 0.0, 1e-12);
  EXPECT_LT(testing::max_relative_error(haar_idwt2(lv, 5, 3).vec(), g.vec()), 1e-9);
}

TEST(Haar, MultiLevelRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_real(37, 50, seed);
    const auto dec = wavedec2(g, 4);
    ASSERT_EQ(dec.levels.size(), 4u);
    EXPECT_EQ(dec.levels[3].cA.width(), 3u);  // 37 -> 19 -> 10 -> 5 -> 3
    EXPECT_EQ(dec.levels[3].cA.height(), 4u);  // 50 -> 25 -> 13 -> 7 -> 4
    EXPECT_LT(testing::max_relative_error(waverec2(dec).vec(), g.vec()), 1e-9);
  }
}

TEST(SdApprox, ConstantImageIsZero) {
  for (std::size_t level = 1; level <= 5; ++level) EXPECT_NEAR(sd_approx(GrayImage(64, 64, 77), level), 0.0, 1e-9);
}

TEST(SdApprox, MatchesBlockSumOracle) {
  // n cascaded orthonormal low-pass steps equal a 2^n x 2^n block sum / 2^n.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto img = testing::random_gray(64, 64, seed);
    const auto eq = equalize_histogram(img);
    for (std::size_t level = 1; level <= 5; ++level) {
      const std::size_t b = std::size_t{1} << level;
      std::vector<double> cA;
      for (std::size_t by = 0; by < 64; by += b) {
        for (std::size_t bx = 0; bx < 64; bx += b) {
          double s = 0;
          for (std::size_t y = by; y < by + b; ++y)
            for (std::size_t x = bx; x < bx + b; ++x) s += eq(x, y);
          cA.push_back(s / static_cast<double>(b));
        }
      }
      double m = 0;
      for (double v : cA) m += v;
      m /= cA.size();
      double ss = 0;
      for (double v : cA) ss += (v - m) * (v - m);
      const double want = std::sqrt(ss / cA.size());
      EXPECT_NEAR(sd_approx(img, level), want, 1e-9 * want) << "level " << level;
    }
  }
}

TEST(SdApprox, TransposeInvariant) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto img = testing::random_gray(48, 48, seed);
    EXPECT_NEAR(sd_approx(img, 3), sd_approx(transpose(img), 3), 1e-9);
  }
}

TEST(SdApprox, TooSmallForLevel) {
  EXPECT_NO_THROW(sd_approx(GrayImage(64, 64, 1), 5));  // 2x2 coefficients
  EXPECT_THROW(sd_approx(GrayImage(32, 32, 1), 5), InvalidParameter);
  EXPECT_THROW(sd_approx(GrayImage(64, 64, 1), 0), InvalidParameter);
}

TEST(SdApprox, PilledSeriesIsMonotone) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    double prev = -1.0;
    for (int g = 5; g >= 1; --g) {
      const double v = sd_approx(gen_pilled_texture(seed, g, 256, 256), 5);
      EXPECT_GT(v, prev) << "seed " << seed << " grade " << g;
      prev = v;
    }
  }
}

TEST(CropAugment, FourEdgeCrops) {
  const auto img = testing::random_gray(100, 100, 1);
  const auto out = crop_augment(img);
  EXPECT_EQ(out[0], img);
  EXPECT_EQ(out[1], crop(img, 0, 15, 100, 85));
  EXPECT_EQ(out[2], crop(img, 0, 0, 100, 85));
  EXPECT_EQ(out[3], crop(img, 15, 0, 85, 100));
  EXPECT_EQ(out[4], crop(img, 0, 0, 85, 100));
  // Direct pixel check for the top crop.
  EXPECT_EQ(out[1](7, 0), img(7, 15));
  EXPECT_THROW(crop_augment(GrayImage(19, 40)), InvalidParameter);
}

TEST(CropAugment, RoundedFraction) {
  const auto out = crop_augment(GrayImage(30, 50));
  EXPECT_EQ(out[1].height(), 42u);  // 15% of 50 = 7.5 -> 8
  EXPECT_EQ(out[3].width(), 25u);   // 15% of 30 = 4.5 -> 5
}

TEST(CropAugment, TwentyInputsGiveHundred) {
  std::size_t n = 0;
  for (int i = 0; i < 20; ++i) n += crop_augment(GrayImage(40, 40)).size();
  EXPECT_EQ(n, 100u);
}

std::vector<GradedSample> pilled_series(std::size_t per_grade, std::size_t side = 128) {
  std::vector<GradedSample> s;
  for (int g = 1; g <= 5; ++g)
    for (std::size_t i = 0; i < per_grade; ++i) s.push_back({g, gen_pilled_texture(100 + i, g, side, side)});
  return s;
}

TEST(Calibrate, SyntheticSeriesIsMonotone) {
  const auto cal = calibrate(pilled_series(4), 5);
  EXPECT_EQ(cal.level, 5u);
  EXPECT_FALSE(cal.increasing);  // more pills, larger SDcA
  for (std::size_t g = 1; g < 5; ++g) EXPECT_LT(cal.means[g], cal.means[g - 1]);
}

TEST(Calibrate, Errors) {
  auto s = pilled_series(1, 64);
  std::erase_if(s, [](const GradedSample& x) { return x.grade == 3; });
  EXPECT_THROW(calibrate(s, 1), IncompleteCalibration);
  auto same = pilled_series(1, 64);
  same[1].image = same[0].image;
  EXPECT_THROW(calibrate(same, 1), NonMonotoneCalibration);
  same[1].grade = 9;
  EXPECT_THROW(calibrate(same, 1), InvalidParameter);
}

PillingCalibration fixed_calibration() {
  PillingCalibration cal;
  cal.level = 5;
  cal.means = {50.0, 40.0, 30.0, 20.0, 10.0};
  cal.increasing = false;
  return cal;
}

TEST(Grade, InterpolatesAndClamps) {
  const auto cal = fixed_calibration();
  EXPECT_DOUBLE_EQ(grade_from_sd(30.0, cal), 3.0);
  EXPECT_DOUBLE_EQ(grade_from_sd(15.0, cal), 4.5);
  EXPECT_DOUBLE_EQ(grade_from_sd(99.0, cal), 1.0);
  EXPECT_DOUBLE_EQ(grade_from_sd(0.0, cal), 5.0);
  auto up = cal;
  up.means = {10.0, 20.0, 30.0, 40.0, 50.0};
  up.increasing = true;
  EXPECT_DOUBLE_EQ(grade_from_sd(45.0, up), 4.5);
  EXPECT_DOUBLE_EQ(grade_from_sd(5.0, up), 1.0);
}

TEST(Grade, MonotoneInSd) {
  const auto cal = fixed_calibration();
  double prev = 6.0;
  for (double sd = 0.0; sd <= 60.0; sd += 0.25) {
    const double g = grade_from_sd(sd, cal);
    EXPECT_LE(g, prev);
    EXPECT_GE(g, 1.0);
    EXPECT_LE(g, 5.0);
    prev = g;
  }
}

TEST(Grade, RecoversGradeOfTrainingImage) {
  const auto cal = calibrate(pilled_series(2, 256), 5);
  for (int g = 1; g <= 5; ++g) {
    const double est = grade(gen_pilled_texture(500, g, 256, 256), cal);
    EXPECT_NEAR(est, g, 0.75) << "grade " << g;
  }
}

TEST(CalibrationText, RoundTrip) {
  const auto cal = fixed_calibration();
  const auto back = parse_calibration(format_calibration(cal));
  EXPECT_EQ(back.level, cal.level);
  EXPECT_EQ(back.means, cal.means);
  EXPECT_EQ(back.increasing, cal.increasing);
  EXPECT_THROW(parse_calibration("level 5\ngrade 1 2\n"), IncompleteCalibration);
  EXPECT_THROW(parse_calibration("level x\n"), ParseError);
  EXPECT_THROW(parse_calibration("grade 1 1\n"), ParseError);
  EXPECT_THROW(parse_calibration("level 2\ngrade 1 1\ngrade 2 2\ngrade 3 2\ngrade 4 4\ngrade 5 5\n"),
               NonMonotoneCalibration);
}

}  // namespace
}  // namespace nonwoven
