#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nonwoven/cli.hpp"

namespace nonwoven {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out, err;
};

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nonwoven_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Result run(std::vector<std::string> args) const {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  void ok(const std::vector<std::string>& args) const {
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

std::vector<std::string> csv_cells(const std::string& line) { return cli::detail::split(line, ','); }

TEST_F(Cli, RegressEmbeddedDatasetMatchesOracle) {
  const auto r = run({"regress", "--table1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "slope,intercept,r,n");
  const auto c = csv_cells(row);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_NEAR(std::stod(c[0]), 1.0271369435232032, 1e-12);
  EXPECT_NEAR(std::stod(c[1]), -0.02348001646130383, 1e-12);
  EXPECT_NEAR(std::stod(c[2]), 0.9492598117989012, 1e-12);
  EXPECT_EQ(c[3], "30");
}

TEST_F(Cli, RegressFromCsv) {
  std::ofstream(path("mu.csv")) << "surface_roughness,friction_coefficient\n0.1,0.3\n0.2,0.5\n0.3,0.7\n";
  const auto r = run({"regress", "--data", path("mu.csv"), "-o", path("fit.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto c = csv_cells(slurp("fit.csv").substr(std::string("slope,intercept,r,n\n").size()));
  EXPECT_NEAR(std::stod(c[0]), 2.0, 1e-12);
  EXPECT_NEAR(std::stod(c[1]), 0.1, 1e-12);
  std::ofstream(path("one.csv")) << "surface_roughness,friction_coefficient\n0.1,0.3\n";
  const auto bad = run({"regress", "--data", path("one.csv")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("DegenerateFit"), std::string::npos);
}

TEST_F(Cli, EmptyWebIsBlackPgm) {
  ok({"synth", "web", "--lines", "0", "--width", "40", "--height", "30", "-o", path("black.pgm")});
  const auto img = read_pgm(path("black.pgm"));
  EXPECT_EQ(img.width(), 40u);
  EXPECT_EQ(img.height(), 30u);
  for (auto v : img.pixels()) EXPECT_EQ(v, 0);
}

TEST_F(Cli, MissingInputWritesNothing) {
  const auto r = run({"roughness", path("absent.pgm"), "-o", path("report.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("IoError"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("report.json")));
}

TEST_F(Cli, DataErrorWritesNothing) {
  ok({"synth", "pilled", "--grade", "2", "--width", "128", "--height", "128", "-o", path("p.pgm")});
  const auto r = run({"pilling", "calibrate", "--sample", "1:" + path("p.pgm"), "-o", path("cal.txt"), "--curve",
                      path("curve.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("IncompleteCalibration"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("cal.txt")));
  EXPECT_FALSE(fs::exists(path("curve.csv")));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"synth", "web"}).code, 1);  // -o missing
  EXPECT_EQ(run({"orient", "x.pgm", "--method", "wavelet"}).code, 1);
  EXPECT_EQ(run({"regress"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, ModuleErrorNamesOnStderr) {
  const auto r = run({"synth", "defect", "--kind", "hole", "-o", path("d.pgm")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: InvalidParameter:", 0), 0u) << r.err;
}

TEST_F(Cli, DeterministicOutputs) {
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    ok({"synth", "web", "--lines", "60", "--angles", "30:0.7,120:0.3", "--seed", "5", "--width", "128", "--height",
        "128", "-o", path("web_" + t + ".pgm"), "--truth", path("web_" + t + ".json")});
    ok({"orient", path("web_a.pgm"), "--method", "hough", "-o", path("dist_" + t + ".csv"), "--lines",
        path("lines_" + t + ".csv")});
    ok({"defect", "train", "--synthetic", "5", "--epochs", "50", "--seed", "2", "-o", path("net_" + t + ".txt")});
  }
  EXPECT_EQ(slurp("web_a.pgm"), slurp("web_b.pgm"));
  EXPECT_EQ(slurp("web_a.json"), slurp("web_b.json"));
  EXPECT_EQ(slurp("dist_a.csv"), slurp("dist_b.csv"));
  EXPECT_EQ(slurp("lines_a.csv"), slurp("lines_b.csv"));
  EXPECT_EQ(slurp("net_a.txt"), slurp("net_b.txt"));
}

TEST_F(Cli, ConfigFile) {
  std::ofstream(path("web.ini")) << "[synth.web]\nlines = 0\nwidth = 12\nheight = 9\noutput = \"" << path("cfg.pgm")
                                 << "\"\n";
  ok({"--config", path("web.ini"), "synth", "web"});
  const auto img = read_pgm(path("cfg.pgm"));
  EXPECT_EQ(img.width(), 12u);
  EXPECT_EQ(img.height(), 9u);
}

// One pass over every command so each pipeline is reachable from the CLI.
TEST_F(Cli, EveryCommandPath) {
  ok({"synth", "surface", "--dpi", "600", "--width", "128", "--height", "64", "-o", path("surf.pgm")});
  {
    const auto r = run({"roughness", path("surf.pgm"), "--dpi", "600", "--peaks", path("peaks.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = cli::Json::parse(r.out);
    EXPECT_TRUE(j.contains("surface_roughness"));
    EXPECT_EQ(j.begin().key(), "input");  // stable key order
    EXPECT_EQ(slurp("peaks.csv").rfind("x,y,height_um\n", 0), 0u);
  }

  ok({"synth", "web", "--lines", "80", "--angles", "45", "--width", "128", "--height", "128", "-o", path("w.pgm")});
  for (const char* m : {"fft", "hough"}) {
    const auto r = run({"orient", path("w.pgm"), "--method", m, "--bins", "12"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 13);
  }
  ok({"orient", path("w.pgm"), "--method", "hough", "--extraction", "peaks", "--weighting", "count"});
  for (const char* v : {"30x", "50x", "100x", "square", "circle", "uniform", "gradient"}) {
    const auto r = run({"orient", path("w.pgm"), "--effect", v, "-o", path(std::string("eff_") + v + ".csv")});
    ASSERT_EQ(r.code, 0) << v << ": " << r.err;
    EXPECT_EQ(r.out.rfind("l1,", 0), 0u);
  }

  std::vector<std::string> cal{"pilling", "calibrate", "-o", path("cal.txt"), "--curve", path("curve.csv")};
  for (int g = 1; g <= 5; ++g) {
    const auto p = path("pill" + std::to_string(g) + ".pgm");
    ok({"synth", "pilled", "--grade", std::to_string(g), "--seed", "9", "--width", "256", "--height", "256", "-o", p});
    cal.push_back("--sample");
    cal.push_back(std::to_string(g) + ":" + p);
  }
  ok(cal);
  {
    const auto r = run({"pilling", "grade", path("pill2.pgm"), "--calibration", path("cal.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("file,sd_approx,grade\n", 0), 0u);
  }

  std::vector<std::string> feats{"defect", "features", "-o", path("feat.csv")};
  for (const char* k : {"non_defect", "thick_spot", "thin_spot", "neps"}) {
    const auto p = path(std::string(k) + ".pgm");
    ok({"synth", "defect", "--kind", k, "--width", "128", "--height", "128", "-o", p});
    ok({"defect", "features", p, "--label", k, "-o", path(std::string(k) + ".csv")});
    feats.push_back(p);
  }
  ok(feats);
  {
    std::ofstream data(path("train.csv"));
    data << "file," << cli::detail::features_header() << ",class\n";
    for (const char* k : {"non_defect", "thick_spot", "thin_spot", "neps"}) {
      const auto text = slurp(std::string(k) + ".csv");
      data << text.substr(text.find('\n') + 1);
    }
  }
  ok({"defect", "train", "--data", path("train.csv"), "--epochs", "3000", "--lr", "0.5", "-o", path("net.txt"), "--curve",
      path("mse.csv")});
  {
    const auto r = run({"defect", "classify", "--network", path("net.txt"), path("neps.pgm")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find(",neps,0001,"), std::string::npos) << r.out;
  }

  ok({"synth", "pores", "--width", "256", "--height", "256", "--radii", "0.04,0.06", "--count", "15", "--gap", "3",
      "-o", path("pores.pgm"), "--truth", path("pores.json")});
  {
    const auto r = run({"pores", path("pores.pgm"), "--psd", path("psd.csv"), "--mask", path("mask.pgm")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = cli::Json::parse(r.out);
    const auto truth = cli::Json::parse(slurp("pores.json"));
    EXPECT_NEAR(j["porosity"].get<double>(), truth["porosity_2d"].get<double>(), 0.02);
    EXPECT_EQ(j["openings"].get<std::size_t>(), 15u);
    EXPECT_EQ(slurp("psd.csv").rfind("size_mm,cumulative_fraction\n", 0), 0u);
  }
  ok({"synth", "pores", "--binary", "--width", "200", "--height", "150", "--pitch", "0.00943", "--radii", "0.08",
      "--count", "8", "--gap", "3", "-o", path("cross.pgm")});
  {
    const auto r = run({"pores", path("cross.pgm"), "--mode", "cross", "--geotextile", "C4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = cli::Json::parse(r.out);
    EXPECT_EQ(j["longitudinal_porosity"].size(), j["slice_count"].get<std::size_t>());
    EXPECT_EQ(j["reference"]["name"], "C4");
    EXPECT_TRUE(j.contains("offset"));
  }
  ok({"pores", path("pores.pgm"), "--edges", "--se", "2"});
  EXPECT_EQ(run({"pores", path("cross.pgm"), "--mode", "cross"}).code, 2);  // no thickness
}

}  // namespace
}  // namespace nonwoven
