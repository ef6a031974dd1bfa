// Copyright 2026 The lightflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration and the command drivers behind the `lightflow` binary.
//
// Run files are `key = value` text. Paths are relative to the run file.
//   rig = rig.txt                  # required
//   scene = scene.txt              # simulate, sweep
//   output = out
//   seed = 7                       # optional; overrides the scene seed
//   lut.z_range = 0.4 1.2
//   lut.samples = 256
//   lut.stride = 16
//   detect.window = 61             detect.offset = 0.1
//   detect.min_threshold = 0.04    detect.b_range = 12 60
//   detect.max_asymmetry = 0.3     detect.min_gap = 3
//   detect.min_width = 1           detect.max_gap_floor = 0.3
//   detect.max_occupancy = 0.95
//   flow.sigma = 2                 flow.max_gap = 100
//   flow.floor = 1e-6
//   sweep.exposures = 100 200 300 400 500    # milliseconds
//   sweep.sigmas = 2 30 60
//   input.frame = frame.ppm        input.lut = lut.bin
//   input.depth = depth.pfm        input.truth = truth_depth.pfm
//   evaluate.mode = plane | truth

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lightflow/band_flow.hpp"
#include "lightflow/blur_sim.hpp"
#include "lightflow/depth_recon.hpp"
#include "lightflow/error.hpp"
#include "lightflow/image_io.hpp"
#include "lightflow/keyvalue.hpp"
#include "lightflow/ratio_lut.hpp"
#include "lightflow/rig_io.hpp"

namespace lightflow {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitDegenerateRig = 3,
  kExitInput = 4,
  kExitEmpty = 5,
};

struct RunConfig {
  /// Directory relative paths are resolved against.
  std::filesystem::path base_dir = ".";

  // Paths as written in the file.
  std::string rig;
  std::string scene;
  std::string output = "out";
  std::string input_frame;
  std::string input_lut;
  std::string input_depth;
  std::string input_truth;

  std::optional<std::uint64_t> seed;
  LutBuildOptions lut;
  DetectionConfig detection;
  InterpolationOptions interpolation;
  double flow_floor = kFlowFloor;
  std::vector<double> sweep_exposures_ms{100, 200, 300, 400, 500};
  std::vector<double> sweep_sigmas{2, 30, 60};
  std::string evaluate_mode = "plane";

  std::filesystem::path resolve(const std::string& raw) const {
    const std::filesystem::path p(raw);
    return p.is_absolute() ? p : base_dir / p;
  }

  void validate() const {
    if (rig.empty()) throw ConfigError("`rig` is required");
    if (!(lut.z_min > 0.0) || !(lut.z_max > lut.z_min)) throw ConfigError("lut.z_range needs 0 < min < max");
    if (lut.n_samples < 8) throw ConfigError("lut.samples must be at least 8");
    if (lut.grid_stride < 1) throw ConfigError("lut.stride must be positive");
    detection.validate();
    if (!(interpolation.sigma >= 0.0)) throw ConfigError("flow.sigma must be non-negative");
    if (!(interpolation.max_gap > 0.0)) throw ConfigError("flow.max_gap must be positive");
    if (!(flow_floor > 0.0)) throw ConfigError("flow.floor must be positive");
    for (double e : sweep_exposures_ms) {
      if (!(e > 0.0)) throw ConfigError("sweep exposures must be positive");
    }
    for (double s : sweep_sigmas) {
      if (!(s >= 0.0)) throw ConfigError("sweep sigmas must be non-negative");
    }
    if (evaluate_mode != "plane" && evaluate_mode != "truth") {
      throw ConfigError("evaluate.mode must be `plane` or `truth`");
    }
  }
};

inline RunConfig run_config_from_keyvalue(const KeyValueFile& kv, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  c.rig = kv.get_string("rig");
  c.scene = kv.find_string("scene").value_or("");
  c.output = kv.find_string("output").value_or(c.output);
  c.input_frame = kv.find_string("input.frame").value_or("");
  c.input_lut = kv.find_string("input.lut").value_or("");
  c.input_depth = kv.find_string("input.depth").value_or("");
  c.input_truth = kv.find_string("input.truth").value_or("");
  if (kv.has("seed")) {
    const auto seed = kv.get_int("seed");
    if (seed < 0) throw ConfigError(kv.source() + ": seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  if (kv.has("lut.z_range")) {
    const auto r = kv.get_doubles("lut.z_range", 2);
    c.lut.z_min = r[0];
    c.lut.z_max = r[1];
  }
  c.lut.n_samples = static_cast<int>(kv.get_int("lut.samples", c.lut.n_samples));
  c.lut.grid_stride = static_cast<int>(kv.get_int("lut.stride", c.lut.grid_stride));

  DetectionConfig& d = c.detection;
  d.binarize.window = static_cast<int>(kv.get_int("detect.window", d.binarize.window));
  d.binarize.offset = kv.get_double("detect.offset", d.binarize.offset);
  d.binarize.min_threshold = kv.get_double("detect.min_threshold", d.binarize.min_threshold);
  if (kv.has("detect.b_range")) {
    const auto r = kv.get_doubles("detect.b_range", 2);
    d.b_min = r[0];
    d.b_max = r[1];
  }
  d.max_interval_asymmetry = kv.get_double("detect.max_asymmetry", d.max_interval_asymmetry);
  d.min_gap = kv.get_double("detect.min_gap", d.min_gap);
  d.min_band_width = kv.get_double("detect.min_width", d.min_band_width);
  d.max_gap_floor = kv.get_double("detect.max_gap_floor", d.max_gap_floor);
  d.max_occupancy = kv.get_double("detect.max_occupancy", d.max_occupancy);

  c.interpolation.sigma = kv.get_double("flow.sigma", c.interpolation.sigma);
  c.interpolation.max_gap = kv.get_double("flow.max_gap", c.interpolation.max_gap);
  c.flow_floor = kv.get_double("flow.floor", c.flow_floor);
  if (kv.has("sweep.exposures")) c.sweep_exposures_ms = kv.get_doubles("sweep.exposures");
  if (kv.has("sweep.sigmas")) c.sweep_sigmas = kv.get_doubles("sweep.sigmas");
  c.evaluate_mode = kv.find_string("evaluate.mode").value_or(c.evaluate_mode);
  kv.reject_unread_keys();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(kv.source() + ": " + e.what());
  }

  auto require = [&](const std::string& key, const std::string& raw) {
    if (!raw.empty() && !std::filesystem::exists(c.resolve(raw))) {
      throw ConfigError(kv.source() + ": `" + key + "` refers to a missing file: " + raw);
    }
  };
  require("rig", c.rig);
  require("scene", c.scene);
  require("input.frame", c.input_frame);
  require("input.lut", c.input_lut);
  require("input.depth", c.input_depth);
  require("input.truth", c.input_truth);
  return c;
}

inline KeyValueFile run_config_to_keyvalue(const RunConfig& c) {
  KeyValueFile kv;
  kv.set("rig", c.rig);
  if (!c.scene.empty()) kv.set("scene", c.scene);
  kv.set("output", c.output);
  if (c.seed) kv.set("seed", std::to_string(*c.seed));
  kv.set("lut.z_range", std::vector<double>{c.lut.z_min, c.lut.z_max});
  kv.set("lut.samples", std::to_string(c.lut.n_samples));
  kv.set("lut.stride", std::to_string(c.lut.grid_stride));
  const DetectionConfig& d = c.detection;
  kv.set("detect.window", std::to_string(d.binarize.window));
  kv.set("detect.offset", d.binarize.offset);
  kv.set("detect.min_threshold", d.binarize.min_threshold);
  kv.set("detect.b_range", std::vector<double>{d.b_min, d.b_max});
  kv.set("detect.max_asymmetry", d.max_interval_asymmetry);
  kv.set("detect.min_gap", d.min_gap);
  kv.set("detect.min_width", d.min_band_width);
  kv.set("detect.max_gap_floor", d.max_gap_floor);
  kv.set("detect.max_occupancy", d.max_occupancy);
  kv.set("flow.sigma", c.interpolation.sigma);
  kv.set("flow.max_gap", c.interpolation.max_gap);
  kv.set("flow.floor", c.flow_floor);
  kv.set("sweep.exposures", c.sweep_exposures_ms);
  kv.set("sweep.sigmas", c.sweep_sigmas);
  if (!c.input_frame.empty()) kv.set("input.frame", c.input_frame);
  if (!c.input_lut.empty()) kv.set("input.lut", c.input_lut);
  if (!c.input_depth.empty()) kv.set("input.depth", c.input_depth);
  if (!c.input_truth.empty()) kv.set("input.truth", c.input_truth);
  kv.set("evaluate.mode", c.evaluate_mode);
  return kv;
}

/// A missing run file is a configuration error, not an input error.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("cannot open run file " + path.string());
  const auto kv = KeyValueFile::load(path);
  return run_config_from_keyvalue(kv, path.has_parent_path() ? path.parent_path() : ".");
}

namespace pipeline_detail {

inline RigCalibration load_rig_checked(const RunConfig& config) {
  const auto path = config.resolve(config.rig);
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("missing rig file " + path.string());
  try {
    return load_rig(path);
  } catch (const DomainError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline SceneSpec load_scene_checked(const RunConfig& config) {
  if (config.scene.empty()) throw ConfigError("`scene` is required for this command");
  const auto path = config.resolve(config.scene);
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("missing scene file " + path.string());
  SceneSpec scene = load_scene(path);
  if (config.seed) scene.seed = *config.seed;
  return scene;
}

inline std::filesystem::path input_path(const RunConfig& config, const std::string& raw, const char* what) {
  if (raw.empty()) throw ConfigError(std::string("no ") + what + " given");
  const auto path = config.resolve(raw);
  if (!std::filesystem::is_regular_file(path)) throw IoError(std::string("missing ") + what + " " + path.string());
  return path;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::filesystem::path prepare_output(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

/// Three-channel field: red-pattern flow in R, blue-pattern flow in B, NaN
/// where a field is masked.
inline Image<float> flow_image(const FlowField& a, const FlowField& b) {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  Image<float> out(a.width(), a.height(), 3, 0.0f);
  for (const FlowField* f : {&a, &b}) {
    const int c = f->channel == Channel::Red ? 0 : 2;
    for (int y = 0; y < f->height(); ++y) {
      for (int x = 0; x < f->width(); ++x) {
        out(x, y, c) = f->valid(x, y) ? static_cast<float>(f->flow(x, y)) : nan;
      }
    }
  }
  return out;
}

/// Surface translated so its mid-exposure pose is kept for a new exposure.
inline SceneSpec with_exposure(SceneSpec scene, double exposure) {
  const Vec3 shift = scene.velocity * (0.5 * (scene.exposure - exposure));
  if (auto* p = std::get_if<PlaneSurface>(&scene.surface)) {
    p->offset += p->normal.normalized().dot(shift);  // offset is along the unit normal
  } else {
    std::get<SphereSurface>(scene.surface).center += shift;
  }
  scene.exposure = exposure;
  return scene;
}

inline std::string exposure_label(double ms) {
  std::ostringstream s;
  s << "exposure_" << format_number(ms) << "ms";
  return s.str();
}

}  // namespace pipeline_detail

struct ReconstructResult {
  Reconstruction reconstruction;
  std::array<ChannelFlow, 2> flows;
};

/// Bands, flow and depth for one frame. flows follow the rig's ratio order.
inline ReconstructResult reconstruct_frame(const Image<float>& frame, const RigCalibration& rig,
                                           const DepthRatioLUT& lut, const DetectionConfig& detection,
                                           const InterpolationOptions& interpolation, double flow_floor) {
  if (frame.channels() != 3) throw DomainError("frames must carry both pattern channels (RGB)");
  if (frame.width() != lut.image_size().x() || frame.height() != lut.image_size().y()) {
    throw DomainError("frame size does not match the LUT");
  }
  const auto sources = rig.sources();
  ReconstructResult out;
  for (int i = 0; i < 2; ++i) {
    const PatternSpec& pattern = *sources[i].pattern;
    out.flows[i] = measure_flow(extract_channel(frame, pattern.channel), pattern, detection, interpolation);
  }
  out.reconstruction = reconstruct_depth(out.flows[0].field, out.flows[1].field, lut, flow_floor);
  out.reconstruction.diagnostics.band_outliers =
      out.flows[0].invalid_band_count() + out.flows[1].invalid_band_count();
  return out;
}

// Commands. Each writes into `out_dir` and returns an exit code; errors
// propagate as exceptions and are mapped by run_command.

inline int cmd_build_lut(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const RigCalibration rig = pipeline_detail::load_rig_checked(config);
  pipeline_detail::prepare_output(out_dir);
  const DepthRatioLUT lut = build_lut(rig, config.lut);
  const MonotonicityReport report = validate_monotonic(lut);
  std::ostringstream text;
  text << "rig = " << rig.id << "\n";
  write_report(text, report);
  text << "degenerate_fraction = " << format_number(report.degenerate_fraction()) << "\n";
  pipeline_detail::write_text(out_dir / "lut_report.txt", text.str());
  save_lut(lut, out_dir / "lut.bin");
  log << text.str();
  if (report.valid_nodes == 0 || report.all_degenerate()) {
    log << "rig is degenerate: no node has an invertible ratio\n";
    return kExitDegenerateRig;
  }
  return kExitOk;
}

inline int cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const RigCalibration rig = pipeline_detail::load_rig_checked(config);
  const SceneSpec scene = pipeline_detail::load_scene_checked(config);
  pipeline_detail::prepare_output(out_dir);
  const RenderOutput r = render_frame(scene, rig);
  save_ppm(r.rgb, out_dir / "frame.ppm");
  save_pfm(depth_to_image(r.truth_depth), out_dir / "truth_depth.pfm");
  save_pfm(pipeline_detail::flow_image(r.truth_flow[0], r.truth_flow[1]), out_dir / "truth_flow.pfm");
  log << "rendered " << r.rgb.width() << "x" << r.rgb.height() << ", surface pixels "
      << r.truth_depth.valid_count() << "\n";
  return kExitOk;
}

inline int cmd_reconstruct(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const RigCalibration rig = pipeline_detail::load_rig_checked(config);
  const Image<float> frame = load_ppm(pipeline_detail::input_path(config, config.input_frame, "frame"));
  const DepthRatioLUT lut = config.input_lut.empty()
                                ? build_lut(rig, config.lut)
                                : load_lut(pipeline_detail::input_path(config, config.input_lut, "LUT"));
  pipeline_detail::prepare_output(out_dir);
  const ReconstructResult r =
      reconstruct_frame(frame, rig, lut, config.detection, config.interpolation, config.flow_floor);
  const DepthMap& depth = r.reconstruction.depth;
  save_pfm(depth_to_image(depth), out_dir / "depth.pfm");
  save_pfm(pipeline_detail::flow_image(r.flows[0].field, r.flows[1].field), out_dir / "flow.pfm");

  std::ostringstream diag;
  write_diagnostics(diag, r.reconstruction.diagnostics);
  diag << "coverage = " << format_number(depth.coverage()) << "\n";
  pipeline_detail::write_text(out_dir / "diagnostics.txt", diag.str());

  std::ostringstream points;
  write_points_csv(points, depth);
  pipeline_detail::write_text(out_dir / "points.csv", points.str());
  const auto sources = rig.sources();
  for (int i = 0; i < 2; ++i) {
    std::ostringstream bands;
    write_bands_text(bands, r.flows[i].bands);
    pipeline_detail::write_text(out_dir / ("bands_" + rig_io_detail::to_string(sources[i].pattern->channel) + ".txt"),
                                bands.str());
  }
  log << diag.str();
  return kExitOk;
}

inline int cmd_evaluate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const DepthMap depth =
      depth_from_image(load_pfm(pipeline_detail::input_path(config, config.input_depth, "depth map")));
  std::ostringstream metrics;
  metrics << "mode = " << config.evaluate_mode << "\n";
  metrics << "valid_pixels = " << depth.valid_count() << "\n";
  metrics << "coverage = " << format_number(depth.coverage()) << "\n";
  if (config.evaluate_mode == "plane") {
    const RigCalibration rig = pipeline_detail::load_rig_checked(config);
    if (depth.width() != rig.camera.width() || depth.height() != rig.camera.height()) {
      throw DomainError("depth map does not match the camera resolution");
    }
    const auto points = depth_to_points(depth, rig.camera);
    if (points.size() < 3) throw EmptyComparisonError("too few depth samples for a plane fit");
    const PlaneFit fit = fit_plane_rmse(points);
    metrics << "plane_rmse = " << format_number(fit.rmse) << "\n";
    metrics << "plane_normal = " << format_numbers({fit.normal.x(), fit.normal.y(), fit.normal.z()}) << "\n";
    metrics << "plane_offset = " << format_number(fit.offset) << "\n";
  } else {
    const DepthMap truth =
        depth_from_image(load_pfm(pipeline_detail::input_path(config, config.input_truth, "truth depth")));
    const GroundTruthStats stats = compare_to_ground_truth(depth, truth);
    metrics << "compared = " << stats.compared << "\n";
    metrics << "median_abs_err = " << format_number(stats.median_abs_err) << "\n";
    metrics << "rmse = " << format_number(stats.rmse) << "\n";
    metrics << "joint_coverage = " << format_number(stats.coverage) << "\n";
  }
  pipeline_detail::prepare_output(out_dir);
  pipeline_detail::write_text(out_dir / "metrics.txt", metrics.str());
  save_pgm(visualize_depth(depth), out_dir / "depth_vis.pgm");
  log << metrics.str();
  return kExitOk;
}

struct SweepRow {
  double exposure_ms = 0.0;
  double sigma = 0.0;
  double coverage = 0.0;
  /// NaN when the reconstruction is too sparse to measure.
  double plane_rmse = std::numeric_limits<double>::quiet_NaN();
  double median_abs_err = std::numeric_limits<double>::quiet_NaN();
};

inline void write_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "# exposure_ms sigma coverage plane_rmse median_abs_err\n";
  for (const SweepRow& r : rows) {
    out << format_number(r.exposure_ms) << " " << format_number(r.sigma) << " " << format_number(r.coverage)
        << " " << format_number(r.plane_rmse) << " " << format_number(r.median_abs_err) << "\n";
  }
}

/// Renders one frame per exposure (surface centred at the same mid-exposure
/// pose as the scene file), reconstructs it from the 8-bit frame with every
/// smoothing sigma, and measures it. Frames go to out_dir when it is set.
inline std::vector<SweepRow> run_sweep(const RigCalibration& rig, const SceneSpec& scene,
                                       const RunConfig& config,
                                       const std::optional<std::filesystem::path>& out_dir) {
  const DepthRatioLUT lut = build_lut(rig, config.lut);
  std::vector<SweepRow> rows;
  for (double ms : config.sweep_exposures_ms) {
    const SceneSpec s = pipeline_detail::with_exposure(scene, ms / 1000.0);
    const RenderOutput r = render_frame(s, rig);
    const Image<float> frame = quantize_8bit(r.rgb);
    if (out_dir) {
      const auto dir = pipeline_detail::prepare_output(*out_dir / pipeline_detail::exposure_label(ms));
      save_ppm(r.rgb, dir / "frame.ppm");
      save_pfm(depth_to_image(r.truth_depth), dir / "truth_depth.pfm");
      save_pfm(pipeline_detail::flow_image(r.truth_flow[0], r.truth_flow[1]), dir / "truth_flow.pfm");
    }
    for (double sigma : config.sweep_sigmas) {
      InterpolationOptions interpolation = config.interpolation;
      interpolation.sigma = sigma;
      const ReconstructResult rec =
          reconstruct_frame(frame, rig, lut, config.detection, interpolation, config.flow_floor);
      const DepthMap& depth = rec.reconstruction.depth;
      SweepRow row;
      row.exposure_ms = ms;
      row.sigma = sigma;
      row.coverage = depth.coverage();
      const auto points = depth_to_points(depth, rig.camera);
      if (points.size() >= 3) {
        try {
          row.plane_rmse = fit_plane_rmse(points).rmse;
        } catch (const FitError&) {
        }
      }
      try {
        row.median_abs_err = compare_to_ground_truth(depth, r.truth_depth).median_abs_err;
      } catch (const EmptyComparisonError&) {
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline int cmd_sweep(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const RigCalibration rig = pipeline_detail::load_rig_checked(config);
  const SceneSpec scene = pipeline_detail::load_scene_checked(config);
  pipeline_detail::prepare_output(out_dir);
  const auto rows = run_sweep(rig, scene, config, out_dir);
  std::ostringstream table;
  write_sweep_table(table, rows);
  pipeline_detail::write_text(out_dir / "sweep_metrics.txt", table.str());
  log << table.str();
  return kExitOk;
}

/// Runs a command and maps failures onto the documented exit codes.
template <typename Command>
int run_command(Command&& command, std::ostream& err) {
  try {
    return command();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DegenerateGeometryError& e) {
    err << "degenerate rig: " << e.what() << "\n";
    return kExitDegenerateRig;
  } catch (const BuildError& e) {
    err << "degenerate rig: " << e.what() << "\n";
    return kExitDegenerateRig;
  } catch (const EmptyComparisonError& e) {
    err << "empty reconstruction: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const FitError& e) {
    err << "empty reconstruction: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnexpected;
  }
}

}  // namespace lightflow
