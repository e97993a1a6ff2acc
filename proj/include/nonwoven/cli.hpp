#pragma once

// Command-line front end. Needs the vendored CLI11 and nlohmann/json headers
// on the include path (target nonwoven_vendor).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nonwoven/defectnet.hpp"
#include "nonwoven/error.hpp"
#include "nonwoven/filters.hpp"
#include "nonwoven/image.hpp"
#include "nonwoven/orientation.hpp"
#include "nonwoven/pgm.hpp"
#include "nonwoven/pilling.hpp"
#include "nonwoven/porepsd.hpp"
#include "nonwoven/roughness.hpp"
#include "nonwoven/synthgen.hpp"

namespace nonwoven::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Files are staged here and written only once the command has succeeded.
// An empty path means the standard output stream.
class Outputs {
public:
  void add(const std::string& path, std::string bytes) { files_.emplace_back(path, std::move(bytes)); }
  void add(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    add(path, std::string(bytes.begin(), bytes.end()));
  }

  void commit(std::ostream& out) const {
    for (const auto& [path, bytes] : files_) {
      if (path.empty() || path == "-") {
        out << bytes;
      } else {
        write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
      }
    }
  }

private:
  std::vector<std::pair<std::string, std::string>> files_;
};

inline std::string read_text(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "' in " + what);
  }
}

// Comma-separated table with a header row. Returns rows keyed by column name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    for (auto& c : cells) c = trim(c);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size()) throw ParseError("CSV row has wrong number of cells: " + line);
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw ParseError("CSV is empty");
  return t;
}

inline std::string distribution_csv(const OrientationDistribution& d) {
  std::string out = "angle_bin_start_deg,weight\n";
  for (std::size_t i = 0; i < d.bins(); ++i) out += num(d.bin_start(i)) + "," + num(d.weights[i]) + "\n";
  return out;
}

inline Json criteria_json(const ProfileCriteria& c) {
  return Json{{"n_peaks", c.n_peaks},
              {"peak_spacing_var", c.peak_spacing_var},
              {"volume", c.volume},
              {"gray_deviation_var", c.gray_deviation_var},
              {"peak_value_var", c.peak_value_var},
              {"degenerate", c.degenerate}};
}

inline std::string features_header() { return "mean_gray,variance_gray,std_gray,density_pct,fractal_dim"; }

inline std::string features_row(const FeatureVector& f) {
  std::string out;
  for (double v : f.as_array()) out += (out.empty() ? "" : ",") + num(v);
  return out;
}

// Segments a gray image into a fiber mask: optional edge map, Chow-Kaneko
// threshold, fiber on the dark or bright side, then denoise.
inline BinaryImage segment(const GrayImage& img, bool fiber_bright, bool edges, const StructuringElement& se) {
  const GrayImage src = edges ? edge_magnitude(img) : img;
  const int t = chow_kaneko_threshold(histogram(src));
  const auto mask = fiber_bright || edges ? global_threshold(src, t, Foreground::above)
                                          : global_threshold(src, std::min(t + 1, 255), Foreground::below);
  return denoise(mask, se);
}

}  // namespace detail

// Runs one command line (without the program name). Usage errors return 1,
// library errors return 2 with "error: <Name>: message" on `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using detail::num;
  CLI::App app{"Image analysis of nonwoven structures", "nonwoven"};
  app.set_config("--config", "", "Read options from a TOML/INI config file");
  app.require_subcommand(1);
  detail::Outputs outputs;

  std::uint64_t seed = 0;
  std::size_t width = 256, height = 256;
  std::string output;

  // ---------------------------------------------------------------- synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic test images");
  synth->require_subcommand(1);
  auto add_geometry = [&](CLI::App* c) {
    c->add_option("--seed", seed, "Random seed")->capture_default_str();
    c->add_option("--width", width, "Width in px")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--height", height, "Height in px")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("-o,--output", output, "Output PGM")->required();
  };

  WebSpec web;
  std::vector<std::string> angle_specs{"0:1"};
  std::string placement = "clip";
  std::string truth_path;
  auto* s_web = synth->add_subcommand("web", "Straight or curved fiber web");
  add_geometry(s_web);
  s_web->add_option("--lines", web.line_count, "Number of fibers")->capture_default_str();
  s_web->add_option("--angles", angle_specs, "Angle families as deg:weight, comma separated")->delimiter(',');
  s_web->add_option("--length-min", web.length_min, "Minimum fiber length (px)")->capture_default_str();
  s_web->add_option("--length-max", web.length_max, "Maximum fiber length (px)")->capture_default_str();
  s_web->add_option("--thickness", web.thickness, "Stroke width (px)")->capture_default_str();
  s_web->add_option("--curvature", web.curvature, "Sagitta/chord ratio, 0 = straight")->capture_default_str();
  s_web->add_option("--placement", placement, "clip or inside")->check(CLI::IsMember({"clip", "inside"}));
  s_web->add_option("--truth", truth_path, "Ground-truth JSON");

  double wavelength = kIdealWavelengthMm, amplitude = kIdealAmplitudeUm, dpi = 600.0,
         h_max = kDefaultHeightCeilingUm;
  auto* s_surface = synth->add_subcommand("surface", "Ideal sinusoidal surface rendered as gray");
  add_geometry(s_surface);
  s_surface->add_option("--wavelength", wavelength, "Wavelength (mm)")->capture_default_str();
  s_surface->add_option("--amplitude", amplitude, "Peak-to-trough amplitude (um)")->capture_default_str();
  s_surface->add_option("--dpi", dpi, "Scan resolution")->capture_default_str();
  s_surface->add_option("--hmax", h_max, "Height of gray 255 (um)")->capture_default_str();

  int grade_level = 3;
  auto* s_pilled = synth->add_subcommand("pilled", "Pilled fabric texture");
  add_geometry(s_pilled);
  s_pilled->add_option("--grade", grade_level, "Pilling grade 1..5")->capture_default_str();

  std::string kind_name = "non_defect";
  auto* s_defect = synth->add_subcommand("defect", "Web patch with a defect");
  add_geometry(s_defect);
  s_defect->add_option("--kind", kind_name, "non_defect, thick_spot, thin_spot or neps")->capture_default_str();

  double pitch = 0.0, min_gap = 2.0;
  std::vector<double> radii{0.05};
  std::size_t pore_count = 20;
  bool binary_out = false;
  auto* s_pores = synth->add_subcommand("pores", "Porous medium with disk pores (backlit: pores bright)");
  add_geometry(s_pores);
  s_pores->add_option("--pitch", pitch, "Pixel pitch (mm), default planar preset");
  s_pores->add_option("--radii", radii, "Pore radii (mm), used cyclically")->delimiter(',');
  s_pores->add_option("--count", pore_count, "Number of pores")->capture_default_str();
  s_pores->add_option("--gap", min_gap, "Minimum solid gap between pores (px)")->capture_default_str();
  s_pores->add_flag("--binary", binary_out, "Write the exact mask (pore 255, solid 0) without sensor noise");
  s_pores->add_option("--truth", truth_path, "Ground-truth JSON");

  // ---------------------------------------------------------------- roughness
  std::string input;
  RoughnessOptions rough;
  std::vector<double> weights;
  bool no_denoise = false, no_equalize = false;
  std::string peaks_path;
  auto* c_rough = app.add_subcommand("roughness", "Surface roughness factor of a scanned surface");
  c_rough->add_option("image", input, "Input PGM")->required();
  c_rough->add_option("--dpi", dpi, "Scan resolution")->capture_default_str();
  c_rough->add_option("--hmax", rough.h_max_um, "Height of gray 255 (um)")->capture_default_str();
  c_rough->add_option("--sigma", rough.gaussian_sigma, "Gaussian sigma (px)")->capture_default_str();
  c_rough->add_option("--wiener", rough.wiener_window, "Wiener window (odd px)")->capture_default_str();
  c_rough->add_flag("--no-denoise", no_denoise, "Skip Gaussian and Wiener filtering");
  c_rough->add_flag("--no-equalize", no_equalize, "Skip histogram equalization");
  c_rough->add_option("--weights", weights, "Five criterion weights summing to 1")->delimiter(',')->expected(5);
  c_rough->add_option("-o,--output", output, "Report JSON (default stdout)");
  c_rough->add_option("--peaks", peaks_path, "Peak list CSV");

  // ---------------------------------------------------------------- orient
  std::string method = "fft", effect, lines_path, extraction = "progressive", weighting = "length";
  std::size_t bins = 18;
  HoughOptions hough;
  int threshold = 127;
  auto* c_orient = app.add_subcommand("orient", "Fiber orientation distribution");
  c_orient->add_option("image", input, "Input PGM")->required();
  c_orient->add_option("--method", method, "fft or hough")->check(CLI::IsMember({"fft", "hough"}));
  c_orient->add_option("--bins", bins, "Angular bins over 180 deg")->capture_default_str();
  c_orient->add_option("--delta-rho", hough.delta_rho, "Hough rho step (px)")->capture_default_str();
  c_orient->add_option("--delta-theta", hough.delta_theta, "Hough theta step (deg)")->capture_default_str();
  c_orient->add_option("--max-lines", hough.peaks.max_lines, "Maximum detected lines")->capture_default_str();
  c_orient->add_option("--min-support", hough.peaks.min_support, "Minimum votes per line")->capture_default_str();
  c_orient->add_option("--min-length", hough.min_length, "Drop shorter lines (px)")->capture_default_str();
  c_orient->add_option("--band", hough.band, "Line band half-width (px)")->capture_default_str();
  c_orient->add_option("--threshold", threshold, "Fiber = gray above this")->capture_default_str()->check(
      CLI::Range(0, 255));
  c_orient->add_flag("--thin", hough.thin, "Skeletonize before voting");
  c_orient->add_option("--extraction", extraction, "progressive or peaks")
      ->check(CLI::IsMember({"progressive", "peaks"}));
  c_orient->add_option("--weighting", weighting, "length or count")->check(CLI::IsMember({"length", "count"}));
  c_orient->add_option("--effect", effect, "Effect study: 30x, 50x, 100x, square, circle, uniform, gradient");
  c_orient->add_option("-o,--output", output, "Distribution CSV (default stdout)");
  c_orient->add_option("--lines", lines_path, "Detected lines CSV (hough)");

  // ---------------------------------------------------------------- pilling
  auto* c_pill = app.add_subcommand("pilling", "Wavelet pilling grading");
  c_pill->require_subcommand(1);
  std::size_t level = kDefaultPillingLevel;
  std::vector<std::string> samples, images;
  std::string calibration_path, curve_path;
  auto* p_cal = c_pill->add_subcommand("calibrate", "Build a calibration from graded images");
  p_cal->add_option("--sample", samples, "grade:path, repeatable")->required();
  p_cal->add_option("--level", level, "Wavelet level")->capture_default_str();
  p_cal->add_option("-o,--output", output, "Calibration text (default stdout)");
  p_cal->add_option("--curve", curve_path, "Calibration curve CSV (grade,mean_sd)");
  auto* p_grade = c_pill->add_subcommand("grade", "Grade images with a calibration");
  p_grade->add_option("images", images, "Input PGMs")->required();
  p_grade->add_option("--calibration", calibration_path, "Calibration text")->required();
  p_grade->add_option("-o,--output", output, "Grades CSV (default stdout)");

  // ---------------------------------------------------------------- defect
  auto* c_def = app.add_subcommand("defect", "Defect features and classifier");
  c_def->require_subcommand(1);
  std::string label, data_path, network_path;
  std::size_t synthetic = 0;
  TrainOptions train;
  std::vector<std::size_t> hidden{8, 6};
  auto* d_feat = c_def->add_subcommand("features", "Feature vectors of image patches");
  d_feat->add_option("images", images, "Input PGMs")->required();
  d_feat->add_option("--label", label, "Append a class column with this kind");
  d_feat->add_option("-o,--output", output, "Features CSV (default stdout)");
  auto* d_train = c_def->add_subcommand("train", "Train the classifier");
  auto* data_opt = d_train->add_option("--data", data_path, "Labeled features CSV");
  auto* syn_opt = d_train->add_option("--synthetic", synthetic, "Samples per class around reference centroids");
  data_opt->excludes(syn_opt);
  d_train->add_option("--hidden", hidden, "Hidden layer sizes")->delimiter(',');
  d_train->add_option("--lr", train.learning_rate, "Learning rate")->capture_default_str();
  d_train->add_option("--epochs", train.epochs, "Epochs")->capture_default_str();
  d_train->add_option("--seed", seed, "Initialization / data seed")->capture_default_str();
  d_train->add_option("-o,--output", output, "Network text")->required();
  d_train->add_option("--curve", curve_path, "MSE curve CSV (epoch,mse)");
  auto* d_class = c_def->add_subcommand("classify", "Classify image patches");
  d_class->add_option("images", images, "Input PGMs")->required();
  d_class->add_option("--network", network_path, "Network text")->required();
  d_class->add_option("-o,--output", output, "Classes CSV (default stdout)");

  // ---------------------------------------------------------------- pores
  std::string mode = "planar", fiber = "dark", geotextile, psd_path, mask_path;
  std::size_t se_side = 0;
  double thickness_mm = 0.0;
  bool edges = false;
  auto* c_pores = app.add_subcommand("pores", "Porosity and pore size distribution");
  c_pores->add_option("image", input, "Input PGM")->required();
  c_pores->add_option("--mode", mode, "planar or cross")->check(CLI::IsMember({"planar", "cross"}));
  c_pores->add_option("--pitch", pitch, "Pixel pitch (mm), default per mode");
  c_pores->add_option("--se", se_side, "Structuring element side, default 2 planar / 3 cross");
  c_pores->add_option("--fiber", fiber, "Fiber polarity: dark or bright")->check(CLI::IsMember({"dark", "bright"}));
  c_pores->add_flag("--edges", edges, "Threshold the edge-magnitude map (fibers bright)");
  c_pores->add_option("--thickness", thickness_mm, "Physical thickness (mm), cross mode");
  c_pores->add_option("--geotextile", geotextile, "Reference sample name (N, P, M, C4, D1)");
  c_pores->add_option("-o,--output", output, "Report JSON (default stdout)");
  c_pores->add_option("--psd", psd_path, "PSD CSV (size_mm,cumulative_fraction)");
  c_pores->add_option("--mask", mask_path, "Fiber mask PGM (fiber 255)");

  // ---------------------------------------------------------------- regress
  bool table1 = false;
  auto* c_reg = app.add_subcommand("regress", "Friction vs roughness regression");
  auto* t1 = c_reg->add_flag("--table1", table1, "Use the embedded 30-row dataset");
  auto* d1 = c_reg->add_option("--data", data_path, "CSV with surface_roughness,friction_coefficient");
  t1->excludes(d1);
  c_reg->add_option("-o,--output", output, "Result CSV (default stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      if (s_web->parsed()) {
        web.width = width;
        web.height = height;
        web.seed = seed;
        web.placement = placement == "inside" ? Placement::inside : Placement::clip;
        web.angles.clear();
        for (const auto& a : angle_specs) {
          const auto parts = detail::split(a, ':');
          if (parts.empty() || parts.size() > 2) throw InvalidParameter("angle family must be deg[:weight]: " + a);
          web.angles.push_back({detail::parse_real(parts[0], "--angles"),
                                parts.size() == 2 ? detail::parse_real(parts[1], "--angles") : 1.0});
        }
        const auto fw = gen_fiber_web(web);
        outputs.add(output, save_pgm(fw.image));
        if (!truth_path.empty()) {
          Json lines = Json::array();
          for (const auto& l : fw.truth.lines) {
            lines.push_back({{"angle_deg", l.angle_deg},
                             {"arc_length", l.arc_length},
                             {"x0", l.x0},
                             {"y0", l.y0},
                             {"x1", l.x1},
                             {"y1", l.y1},
                             {"clipped", l.clipped}});
          }
          outputs.add(truth_path, Json{{"lines", lines}}.dump(2) + "\n");
        }
      } else if (s_surface->parsed()) {
        const auto hm = gen_ideal_surface(wavelength, amplitude, dpi, width, height);
        outputs.add(output, save_pgm(height_map_to_gray(hm, h_max)));
      } else if (s_pilled->parsed()) {
        outputs.add(output, save_pgm(gen_pilled_texture(seed, grade_level, width, height)));
      } else if (s_defect->parsed()) {
        outputs.add(output, save_pgm(gen_defect_web(parse_defect_kind(kind_name), seed, width, height)));
      } else if (s_pores->parsed()) {
        const double p = pitch > 0.0 ? pitch : kPlanarPixelPitchMm;
        const auto m = gen_pore_medium(seed, width, height, p, radii, pore_count, min_gap);
        GrayImage img = binary_out ? to_gray(complement(m.image)) : render_pore_medium(m.image, seed);
        outputs.add(output, save_pgm(img));
        if (!truth_path.empty()) {
          outputs.add(truth_path,
                      Json{{"pixel_pitch_mm", p}, {"porosity_2d", m.truth.porosity_2d}, {"pores_mm", m.truth.pores}}
                              .dump(2) +
                          "\n");
        }
      }
    } else if (c_rough->parsed()) {
      rough.denoise = !no_denoise;
      rough.equalize = !no_equalize;
      if (!weights.empty()) std::copy(weights.begin(), weights.end(), rough.weights.begin());
      const auto img = read_pgm(input);
      const auto r = analyze_roughness(img, dpi, rough);
      Json j{{"input", input},
             {"dpi", dpi},
             {"surface_roughness", r.surface_roughness},
             {"weights", rough.weights},
             {"sample", detail::criteria_json(r.sample)},
             {"ideal", detail::criteria_json(r.ideal)}};
      outputs.add(output, j.dump(2) + "\n");
      if (!peaks_path.empty()) {
        GrayImage work = img;
        work.set_pixel_pitch(25.4 / dpi);
        if (rough.denoise) work = wiener_filter(gaussian_filter(work, rough.gaussian_sigma), rough.wiener_window);
        if (rough.equalize) work = equalize_histogram(work);
        std::string csv = "x,y,height_um\n";
        for (const auto& pk : detect_peaks(to_height_map(work, rough.h_max_um)))
          csv += num(pk.x) + "," + num(pk.y) + "," + num(pk.height) + "\n";
        outputs.add(peaks_path, csv);
      }
    } else if (c_orient->parsed()) {
      const auto img = read_pgm(input);
      if (!effect.empty()) {
        const auto study = study_effects(img, parse_effect_variant(effect), bins);
        std::string csv = "angle_bin_start_deg,baseline,variant\n";
        for (std::size_t i = 0; i < study.baseline.bins(); ++i) {
          csv += num(study.baseline.bin_start(i)) + "," + num(study.baseline.weights[i]) + "," +
                 num(study.variant.weights[i]) + "\n";
        }
        outputs.add(output, csv);
        if (!output.empty()) outputs.add("", "l1," + num(study.l1) + "\n");
      } else if (method == "fft") {
        outputs.add(output, detail::distribution_csv(fft_orientation(img, bins)));
      } else {
        hough.threshold = static_cast<std::uint8_t>(threshold);
        hough.extraction = extraction == "peaks" ? LineExtraction::peaks : LineExtraction::progressive;
        const auto r = hough_orientation(img, bins, hough,
                                         weighting == "count" ? HoughWeighting::by_count : HoughWeighting::by_length);
        outputs.add(output, detail::distribution_csv(r.distribution));
        if (!lines_path.empty()) {
          std::string csv = "rho,theta_deg,fiber_angle_deg,support,estimated_length\n";
          for (const auto& l : r.lines) {
            csv += num(l.rho) + "," + num(l.theta) + "," + num(fiber_angle_of(l)) + "," + std::to_string(l.support) +
                   "," + num(l.estimated_length) + "\n";
          }
          outputs.add(lines_path, csv);
        }
      }
    } else if (c_pill->parsed()) {
      if (p_cal->parsed()) {
        std::vector<GradedSample> graded;
        for (const auto& s : samples) {
          const auto colon = s.find(':');
          if (colon == std::string::npos) throw InvalidParameter("sample must be grade:path: " + s);
          const double g = detail::parse_real(s.substr(0, colon), "--sample");
          if (g != std::floor(g)) throw InvalidParameter("grade must be an integer: " + s);
          graded.push_back({static_cast<int>(g), read_pgm(s.substr(colon + 1))});
        }
        const auto cal = calibrate(graded, level);
        outputs.add(output, format_calibration(cal));
        if (!curve_path.empty()) {
          std::string csv = "grade,mean_sd\n";
          for (std::size_t g = 0; g < 5; ++g) csv += std::to_string(g + 1) + "," + num(cal.means[g]) + "\n";
          outputs.add(curve_path, csv);
        }
      } else {
        const auto cal = parse_calibration(detail::read_text(calibration_path));
        std::string csv = "file,sd_approx,grade\n";
        for (const auto& path : images) {
          const auto img = read_pgm(path);
          const double sd = sd_approx(img, cal.level);
          csv += path + "," + num(sd) + "," + num(grade_from_sd(sd, cal)) + "\n";
        }
        outputs.add(output, csv);
      }
    } else if (c_def->parsed()) {
      if (d_feat->parsed()) {
        if (!label.empty()) parse_defect_kind(label);
        std::string csv = "file," + detail::features_header() + (label.empty() ? "" : ",class") + "\n";
        for (const auto& path : images) {
          csv += path + "," + detail::features_row(extract_features(read_pgm(path))) +
                 (label.empty() ? "" : "," + label) + "\n";
        }
        outputs.add(output, csv);
      } else if (d_train->parsed()) {
        std::vector<LabeledFeatures> data;
        if (!data_path.empty()) {
          const auto t = detail::parse_csv(detail::read_text(data_path));
          const std::array<std::size_t, 5> cols{t.column("mean_gray"), t.column("variance_gray"),
                                                t.column("std_gray"), t.column("density_pct"),
                                                t.column("fractal_dim")};
          const auto cls = t.column("class");
          for (const auto& row : t.rows) {
            std::array<double, 5> v{};
            for (std::size_t d = 0; d < 5; ++d) v[d] = detail::parse_real(row[cols[d]], data_path);
            data.push_back({{v[0], v[1], v[2], v[3], v[4]}, parse_defect_kind(row[cls])});
          }
        } else if (synthetic > 0) {
          data = gen_feature_clusters(seed, synthetic);
        } else {
          throw InvalidParameter("train needs --data or --synthetic");
        }
        train.hidden = hidden;
        train.seed = seed;
        const auto r = mlp_train(data, train);
        outputs.add(output, format_network(r.network));
        if (!curve_path.empty()) {
          std::string csv = "epoch,mse\n";
          for (std::size_t e = 0; e < r.report.mse_curve.size(); ++e)
            csv += std::to_string(e + 1) + "," + num(r.report.mse_curve[e]) + "\n";
          outputs.add(curve_path, csv);
        }
      } else {
        const auto net = parse_network(detail::read_text(network_path));
        std::string csv = "file,class,code,c0,c1,c2,c3\n";
        for (const auto& path : images) {
          const auto c = mlp_classify(net, extract_features(read_pgm(path)));
          csv += path + "," + std::string(defect_kind_name(c.kind)) + "," + c.code;
          for (double v : c.confidences) csv += "," + num(v);
          csv += "\n";
        }
        outputs.add(output, csv);
      }
    } else if (c_pores->parsed()) {
      const bool cross = mode == "cross";
      auto img = read_pgm(input);
      const double p = pitch > 0.0 ? pitch : (cross ? kCrossSectionPixelPitchMm : kPlanarPixelPitchMm);
      const StructuringElement se{se_side > 0 ? se_side : (cross ? kCrossSectionSe.side : kPlanarSe.side), false};
      std::optional<GeotextileRecord> ref;
      if (!geotextile.empty()) {
        ref = find_geotextile(geotextile);
        if (!ref) throw InvalidParameter("unknown geotextile '" + geotextile + "'");
      }
      auto mask = detail::segment(img, fiber == "bright", edges, se);
      mask.set_pixel_pitch(p);
      Json j{{"input", input}, {"mode", mode}, {"pixel_pitch_mm", p}, {"se_side", se.side}};
      j["porosity"] = planar_porosity(mask);
      PsdCurve curve;
      if (cross) {
        double t = thickness_mm;
        if (!(t > 0.0) && ref) t = ref->thickness_mm;
        if (!(t > 0.0)) throw InvalidParameter("cross mode needs --thickness or --geotextile");
        const auto r = analyze_cross_section(mask, t);
        j["physical_thickness_mm"] = t;
        j["fiber_thickness_px"] = r.grid.fiber_thickness;
        j["slice_count"] = r.grid.slice_count;
        j["offset"] = r.grid.offset;
        j["longitudinal_porosity"] = r.longitudinal;
        j["openings"] = r.openings.size();
        j["o50_mm"] = r.o50;
        j["o95_mm"] = r.o95;
        curve = r.curve;
      } else {
        curve = psd_curve(measure_pore_openings(mask, uniform_grid(mask.height(), 1)));
        j["openings"] = curve.sizes.size();
        j["o50_mm"] = percentile(curve, 50.0);
        j["o95_mm"] = percentile(curve, 95.0);
      }
      if (ref) {
        j["reference"] = Json{{"name", ref->name},
                              {"grammage_gsm", ref->grammage_gsm},
                              {"thickness_mm", ref->thickness_mm},
                              {"aos_min_mm", ref->aos_min_mm},
                              {"aos_max_mm", ref->aos_max_mm},
                              {"porosity_pct", ref->porosity_pct},
                              {"permittivity_per_s", ref->permittivity_per_s}};
      }
      outputs.add(output, j.dump(2) + "\n");
      if (!psd_path.empty()) {
        std::string csv = "size_mm,cumulative_fraction\n";
        for (std::size_t i = 0; i < curve.sizes.size(); ++i)
          csv += num(curve.sizes[i]) + "," + num(curve.cumulative[i]) + "\n";
        outputs.add(psd_path, csv);
      }
      if (!mask_path.empty()) outputs.add(mask_path, save_pgm(to_gray(mask)));
    } else if (c_reg->parsed()) {
      std::vector<FrictionRecord> rows;
      if (table1) {
        const auto t = table1_dataset();
        rows.assign(t.begin(), t.end());
      } else if (!data_path.empty()) {
        const auto t = detail::parse_csv(detail::read_text(data_path));
        const auto rs = t.column("surface_roughness"), mu = t.column("friction_coefficient");
        for (const auto& row : t.rows)
          rows.push_back({detail::parse_real(row[rs], data_path), detail::parse_real(row[mu], data_path)});
      } else {
        err << "regress needs --table1 or --data\n";
        return kExitUsage;
      }
      const auto fit = fit_friction_regression(rows);
      outputs.add(output, "slope,intercept,r,n\n" + num(fit.slope) + "," + num(fit.intercept) + "," +
                              num(fit.pearson_r) + "," + std::to_string(fit.n) + "\n");
    }
    outputs.commit(out);
  } catch (const Error& e) {
    err << "error: " << e.name() << ": " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nonwoven::cli
