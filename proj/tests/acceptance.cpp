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


// Acceptance checks. Prints one PASS/FAIL line per criterion; with
// --criterion N only that one runs. The exit status is non-zero when any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lightflow/band_flow.hpp"
#include "lightflow/blur_sim.hpp"
#include "lightflow/depth_recon.hpp"
#include "lightflow/pipeline.hpp"
#include "lightflow/presets.hpp"
#include "lightflow/ratio_lut.hpp"
#include "test_support.hpp"

namespace lf = lightflow;
using lf::Vec2;
using lf::Vec3;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

// The board of the plane criteria: 600 x 400 mm at 0.6 m mid-exposure,
// moving away at 78 mm/s for 200 ms.
constexpr double kSpeed = 0.078;
constexpr double kExposure = 0.2;

lf::SceneSpec board_scene(double noise) {
  lf::SceneSpec s;
  s.surface = lf::PlaneSurface{Vec3(0, 0, 1), 0.6 - kSpeed * kExposure / 2, Vec2(0.6, 0.4)};
  s.velocity = Vec3(0, 0, kSpeed);
  s.exposure = kExposure;
  s.noise_std = noise;
  return s;
}

struct PlaneRun {
  double median_rel = NAN;
  double plane_rmse = NAN;
  double board_coverage = 0.0;
};

// Render, write to 8 bits as the CLI does, reconstruct and score.
PlaneRun run_plane(const lf::RigCalibration& rig, const lf::SceneSpec& scene, const lf::DepthRatioLUT& lut) {
  const lf::RenderOutput r = lf::render_frame(scene, rig);
  const auto rec = lf::reconstruct_frame(lf::quantize_8bit(r.rgb), rig, lut, lf::DetectionConfig{},
                                         lf::InterpolationOptions{}, lf::kFlowFloor);
  const lf::DepthMap& depth = rec.reconstruction.depth;
  PlaneRun out;
  std::vector<double> rel;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(x, y) && r.truth_depth.valid(x, y)) {
        rel.push_back(std::abs(depth.depth(x, y) - r.truth_depth.depth(x, y)) / r.truth_depth.depth(x, y));
      }
    }
  }
  if (!rel.empty()) {
    std::nth_element(rel.begin(), rel.begin() + rel.size() / 2, rel.end());
    out.median_rel = rel[rel.size() / 2];
    out.board_coverage = static_cast<double>(rel.size()) / r.truth_depth.valid_count();
  }
  const auto points = lf::depth_to_points(depth, rig.camera);
  if (points.size() >= 3) out.plane_rmse = lf::fit_plane_rmse(points).rmse;
  return out;
}

// ln|dL1/dz| - ln|dL2/dz| for a two-projector uniform rig from finite
// differences of the independent projection.
double oracle_h(const lf::RigCalibration& rig, const Vec2& pixel, double z) {
  const lf::Ray ray = lf::camera_ray(rig.camera, pixel);
  double logs[2];
  for (int i = 0; i < 2; ++i) {
    const lf::ProjectorModel& p = rig.projectors[i];
    const double dq = lf::testing::central_difference(
        [&](double d) { return lf::testing::oracle_q_h(p.rotation, p.center(), ray.direction(), d); }, z);
    logs[i] = std::log(std::abs(dq * p.focal_px / p.patterns[0].interval));
  }
  return logs[0] - logs[1];
}

Outcome criterion1() {
  Outcome o;
  const double sigma = lf::log_ratio_error(10, 30, 0.25);
  const lf::DepthRatioLUT lut = lf::build_lut(lf::presets::converging_rig(), lf::LutBuildOptions{});
  const Vec2 center(400, 300);
  const double e05 = lf::error_budget(lut, center, 0.5, 10, 30, 0.25);
  const double e10 = lf::error_budget(lut, center, 1.0, 10, 30, 0.25);
  o.detail << "log-ratio error " << sigma << ", depth error " << e05 << " m at 0.5 m, " << e10
           << " m at 1.0 m (x" << e10 / e05 << ") ";
  o.require(std::abs(sigma - 0.049) <= 0.005, "log-ratio error 0.049 +- 0.005");
  o.require(e05 >= 0.01 && e05 <= 0.06, "0.5 m error in [0.01, 0.06] m");
  o.require(e10 / e05 >= 2.0 && e10 / e05 <= 3.0, "1.0 m error 2-3x the 0.5 m error");
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::mt19937_64 rng(2026);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), depth(0.4, 1.2);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    lf::ProjectorModel p;
    p.focal_px = 600;
    p.resolution = lf::Size2(1280, 800);
    p.principal_point = Vec2(640, 400);
    const Vec3 axis = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    p.rotation = Eigen::AngleAxisd(0.8 * unit(rng), axis).toRotationMatrix();
    p.translation = Vec3(0.5 * unit(rng), 0.5 * unit(rng), 0.1 * unit(rng));
    const lf::Ray ray(0.6 * unit(rng), 0.6 * unit(rng));
    const double z = depth(rng);
    if (p.to_projector(ray.at_depth(z)).z() < 0.1) continue;  // not a valid triple
    const double fd = lf::testing::central_difference(
        [&](double d) { return lf::testing::oracle_q_h(p.rotation, p.center(), ray.direction(), d); }, z);
    if (std::abs(fd) < 1e-3) continue;
    worst = std::max(worst, std::abs(lf::g_derivative(p, ray, z) - fd) / std::abs(fd));
    ++checked;
  }
  o.detail << "worst relative deviation " << worst << " over " << checked << " triples ";
  o.require(worst < 1e-6, "relative 1e-6");
  return o;
}

// Worst relative error of inverting the exact h at every valid node and 50
// interior depths.
double lut_round_trip_error(const lf::RigCalibration& rig, int samples) {
  lf::LutBuildOptions options;
  options.n_samples = samples;
  const lf::DepthRatioLUT lut = lf::build_lut(rig, options);
  double worst = 0.0;
  for (std::size_t i = 0; i < lut.node_count(); ++i) {
    if (lut.node(i).status != lf::NodeStatus::Valid) continue;
    const Vec2 p = lut.node_pixel(i);
    for (int k = 0; k < 50; ++k) {
      const double z = lut.z_min() + (lut.z_max() - lut.z_min()) * (k + 0.5) / 50.0;
      const double back = lf::h_invert(lut, p, oracle_h(rig, p, z));
      worst = std::max(worst, std::abs(back - z) / z);
    }
  }
  return worst;
}

Outcome criterion3() {
  Outcome o;
  const lf::RigCalibration rig = lf::presets::converging_rig();
  const double e256 = lut_round_trip_error(rig, 256);
  const double e512 = lut_round_trip_error(rig, 512);
  o.detail << "worst relative error " << e256 << " (256 samples), " << e512 << " (512), factor "
           << e256 / e512 << " ";
  o.require(e256 < 1e-3, "round trip below 1e-3");
  o.require(e256 / e512 >= 1.5, "doubling samples improves by 1.5x");
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto parallel = lf::validate_monotonic(lf::build_lut(lf::presets::parallel_rig(), {}));
  const auto fronto = lf::validate_monotonic(lf::build_lut(lf::presets::fronto_parallel_rig(), {}));
  const auto conv = lf::validate_monotonic(lf::build_lut(lf::presets::converging_rig(), {}));
  o.detail << "degenerate fraction: parallel " << parallel.degenerate_fraction() << ", fronto-parallel "
           << fronto.degenerate_fraction() << ", converging " << conv.degenerate_fraction()
           << " (non-monotone " << conv.nonmonotone_nodes << ") ";
  o.require(parallel.degenerate_fraction() == 1.0, "parallel rig fully degenerate");
  o.require(fronto.degenerate_fraction() == 1.0, "fronto-parallel rig fully degenerate");
  o.require(conv.degenerate_nodes == 0 && conv.nonmonotone_nodes == 0 && conv.valid_nodes == conv.total_nodes,
            "converging rig valid and monotone everywhere");
  return o;
}

Outcome criterion5() {
  Outcome o;
  const lf::RigCalibration rig = lf::presets::converging_rig();
  const lf::DepthRatioLUT lut = lf::build_lut(rig, lf::LutBuildOptions{});
  const PlaneRun clean = run_plane(rig, board_scene(0.0), lut);
  const PlaneRun noisy = run_plane(rig, board_scene(0.01), lut);
  o.detail << "noise-free: median error " << 100 * clean.median_rel << "%, plane RMSE " << 1000 * clean.plane_rmse
           << " mm, board coverage " << 100 * clean.board_coverage << "%; noise 0.01: plane RMSE "
           << 1000 * noisy.plane_rmse << " mm ";
  o.require(clean.median_rel < 0.01, "median error below 1%");
  o.require(clean.plane_rmse < 0.005, "plane RMSE below 5 mm");
  o.require(noisy.plane_rmse < 0.020, "noisy plane RMSE below 20 mm");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const lf::RigCalibration rig = lf::presets::converging_rig();
  // A strip taller than the view: every row sees the board edge to edge.
  lf::SceneSpec scene = board_scene(0.01);
  scene.surface = lf::PlaneSurface{Vec3(0, 0, 1), 0.6 - kSpeed * kExposure / 2, Vec2(0.3, 0.8)};
  lf::RunConfig config;
  config.sweep_exposures_ms = {100, 200, 300, 400, 500};
  config.sweep_sigmas = {2};
  const auto rows = lf::run_sweep(rig, scene, config, std::nullopt);
  for (const auto& r : rows) {
    o.detail << r.exposure_ms << " ms: RMSE " << 1000 * r.plane_rmse << " mm, coverage " << 100 * r.coverage
             << "%; ";
  }
  o.require(rows[0].plane_rmse >= rows[1].plane_rmse && rows[1].plane_rmse >= rows[2].plane_rmse,
            "RMSE non-increasing from 100 to 300 ms");
  o.require(rows[4].coverage < 0.5 * rows[3].coverage, "coverage drops by more than half at 500 ms");
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u(rng);
    for (lf::Modulation m : {lf::Modulation::WideRight, lf::Modulation::WideLeft}) {
      worst = std::max(worst, std::abs(lf::demodulate(lf::modulate(x, m), m) - x));
    }
  }
  const lf::RigCalibration rig = lf::presets::single_projector_rig();
  const lf::DepthRatioLUT lut = lf::build_lut(rig, lf::LutBuildOptions{});
  const auto report = lf::validate_monotonic(lut);
  double min_span = INFINITY;
  for (std::size_t i = 0; i < lut.node_count(); ++i) {
    if (lut.node(i).status != lf::NodeStatus::Valid) continue;
    const auto h = lut.h_values(i);
    const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
    min_span = std::min(min_span, *hi - *lo);
  }
  const PlaneRun plane = run_plane(rig, board_scene(0.0), lut);
  o.detail << "round trip " << worst << ", valid nodes " << report.valid_nodes << "/" << report.total_nodes
           << " (non-monotone " << report.nonmonotone_nodes << ", degenerate " << report.degenerate_nodes
           << "), smallest h span " << min_span << ", plane median error " << 100 * plane.median_rel << "% ";
  o.require(worst < 1e-12, "modulation round trip below 1e-12");
  o.require(report.valid_nodes > 0 && report.nonmonotone_nodes == 0 && report.degenerate_nodes == 0,
            "monotone, non-degenerate h");
  o.require(min_span > 0.1, "h span above 0.1");
  o.require(plane.median_rel < 0.03, "plane median error below 3%");
  return o;
}

// Trapezoid band train along u = x cos(theta) + y sin(theta): line width w,
// motion m, interval b (all in u units), box-filtered over each pixel.
lf::Image<float> slanted_bands(double theta, double b, double w, double m) {
  const int width = 400, height = 40, sub = 32;
  lf::Image<float> img(width, height, 1, 0.0f);
  const double c = std::cos(theta), s = std::sin(theta);
  auto profile = [&](double u) {
    // Convolution of a width-w box with a length-m box, height min(w, m)/m.
    const double d = std::abs(u - b * std::round(u / b));
    const double lo = std::abs(w - m) / 2, hi = (w + m) / 2;
    const double top = std::min(w, m) / m;
    if (d <= lo) return top;
    if (d >= hi) return 0.0;
    return top * (hi - d) / (hi - lo);
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = 0; k < sub; ++k) acc += profile((x - 0.5 + (k + 0.5) / sub) * c + y * s);
      img(x, y) = static_cast<float>(0.8 * acc / sub);
    }
  }
  return img;
}

double mean_flow(const lf::Image<float>& img, const lf::PatternSpec& pattern) {
  const lf::DetectionConfig config;
  const auto samples =
      lf::flow_from_bands(lf::detect_bands(img, config), lf::flow_model_for(pattern, config));
  double sum = 0.0;
  for (const auto& s : samples) sum += s.flow;
  return samples.empty() ? NAN : sum / samples.size();
}

Outcome criterion8() {
  Outcome o;
  // Common scaling of both flow fields.
  const lf::RigCalibration rig = lf::presets::converging_rig();
  lf::LutBuildOptions options;
  const lf::DepthRatioLUT lut = lf::build_lut(rig, options);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 0.5);
  lf::FlowField f1(800, 600, lf::Channel::Red), f2(800, 600, lf::Channel::Blue);
  for (int y = 0; y < 600; ++y) {
    for (int x = 0; x < 800; ++x) {
      f1.flow(x, y) = u(rng);
      f2.flow(x, y) = u(rng);
      f1.mask(x, y) = f2.mask(x, y) = 1;
    }
  }
  const auto base = lf::reconstruct_depth(f1, f2, lut);
  bool identical = true;
  for (double c : {0.125, 0.5, 2.0, 4.0}) {
    lf::FlowField g1 = f1, g2 = f2;
    for (double& v : g1.flow.data()) v *= c;
    for (double& v : g2.flow.data()) v *= c;
    const auto scaled = lf::reconstruct_depth(g1, g2, lut);
    identical = identical && scaled.depth.mask.data() == base.depth.mask.data();
    for (std::size_t i = 0; i < base.depth.depth.data().size(); ++i) {
      const double a = base.depth.depth.data()[i], b = scaled.depth.depth.data()[i];
      identical = identical && ((std::isnan(a) && std::isnan(b)) || a == b);
    }
  }
  o.require(identical, "bit-identical depth under common flow scaling");

  // Translating a rendered scanline translates every band edge.
  lf::SceneSpec scene = board_scene(0.01);
  scene.surface = lf::PlaneSurface{Vec3(0, 0, 1), 0.6 - kSpeed * kExposure / 2, Vec2(0.3, 0.8)};
  const lf::RigCalibration strip = lf::testing::cropped_rig(rig, 3);
  const lf::RenderOutput r = lf::render_frame(scene, strip);
  const auto row = lf::extract_channel(r.rgb, lf::Channel::Red).row(1);
  const std::vector<double> base_row(row.begin(), row.end());
  double worst_shift = 0.0;
  bool same_count = true;
  for (int delta : {1, 5, 23}) {
    std::vector<double> moved(base_row.size(), 0.0);
    for (std::size_t x = 0; x + delta < base_row.size(); ++x) moved[x + delta] = base_row[x];
    const auto a = lf::detect_bands_in_row(base_row, 1, lf::DetectionConfig{});
    const auto b = lf::detect_bands_in_row(moved, 1, lf::DetectionConfig{});
    same_count = same_count && a.size() == b.size() && !a.empty();
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
      worst_shift = std::max({worst_shift, std::abs(b[k].left_edge - a[k].left_edge - delta),
                              std::abs(b[k].right_edge - a[k].right_edge - delta)});
    }
  }
  o.require(same_count && worst_shift < 1e-9, "edge translation equivariance below 1e-9 px");

  // Pattern slant: horizontal scanlines cut the bands obliquely.
  const lf::PatternSpec pattern = lf::presets::uniform_lines(30.0, 3.0, lf::Channel::Red);
  const double straight = mean_flow(slanted_bands(0.0, 30.0, 3.0, 10.0), pattern);
  const double slanted = mean_flow(slanted_bands(20.0 * std::numbers::pi / 180.0, 30.0, 3.0, 10.0), pattern);
  const double change = std::abs(slanted - straight) / straight;
  o.detail << "bit-identical " << (identical ? "yes" : "no") << ", worst edge shift error " << worst_shift
           << " px, flow " << straight << " straight vs " << slanted << " at 20 deg (change " << 100 * change
           << "%) ";
  o.require(change < 0.01, "slant changes flow by less than 1%");
  return o;
}

Outcome criterion9() {
  Outcome o;
  const lf::RigCalibration rig = lf::presets::converging_rig();
  lf::SceneSpec scene;
  scene.surface = lf::SphereSurface{Vec3(0, 0, 0.8 - kSpeed * kExposure / 2), 0.3};
  scene.velocity = Vec3(0, 0, kSpeed);
  scene.exposure = kExposure;
  scene.noise_std = 0.01;
  const lf::RenderOutput r = lf::render_frame(scene, rig);
  const lf::DepthRatioLUT lut = lf::build_lut(rig, lf::LutBuildOptions{});
  const auto rec = lf::reconstruct_frame(lf::quantize_8bit(r.rgb), rig, lut, lf::DetectionConfig{},
                                         lf::InterpolationOptions{}, lf::kFlowFloor);
  const lf::DepthMap& depth = rec.reconstruction.depth;

  // Band centers: the pixels carrying a flow sample.
  std::size_t good = 0, total = 0;
  for (const auto& flow : rec.flows) {
    for (const auto& s : flow.samples) {
      const int x = static_cast<int>(std::lround(s.x));
      if (!depth.valid(x, s.row) || !r.truth_depth.valid(x, s.row)) continue;
      ++total;
      good += std::abs(depth.depth(x, s.row) / r.truth_depth.depth(x, s.row) - 1.0) < 0.03;
    }
  }
  const double within = total ? static_cast<double>(good) / total : 0.0;

  // Boundary handling: the outermost bands of each row on the sphere are
  // rejected, and no depth appears off the silhouette.
  std::size_t rows_checked = 0, outer_valid = 0;
  for (const auto& flow : rec.flows) {
    for (const auto& row : flow.bands) {
      if (row.size() < 4) continue;
      ++rows_checked;
      outer_valid += row.front().valid + row.back().valid;
    }
  }
  std::size_t off_silhouette = 0;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) off_silhouette += depth.valid(x, y) && !r.truth_depth.valid(x, y);
  }
  o.detail << 100 * within << "% of " << total << " band-center pixels within 3%, " << depth.valid_count()
           << " pixels reconstructed, " << outer_valid << " outermost bands accepted over " << rows_checked
           << " rows, " << off_silhouette << " pixels off the silhouette ";
  o.require(within > 0.8, "more than 80% within 3%");
  o.require(outer_valid == 0 && rows_checked > 0, "outermost bands masked");
  o.require(off_silhouette == 0, "no depth off the silhouette");
  return o;
}

struct Criterion {
  std::function<Outcome()> run;
  double budget_s;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lightflow acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {criterion1, 1.0},  {criterion2, 1.0},  {criterion3, 10.0}, {criterion4, 10.0}, {criterion5, 60.0},
      {criterion6, 300.0}, {criterion7, 120.0}, {criterion8, 30.0}, {criterion9, 60.0},
  };
  bool all = true;
  for (int n = 1; n <= 9; ++n) {
    if (only != 0 && n != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[n - 1].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what() << " ";
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(elapsed < criteria[n - 1].budget_s, "runtime budget");
    std::printf("criterion %d: %s - %s(%.2f s of %.0f s)\n", n, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(),
                elapsed, criteria[n - 1].budget_s);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
