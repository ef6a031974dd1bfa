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


#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lightflow/band_flow.hpp"
#include "lightflow/blur_sim.hpp"
#include "lightflow/presets.hpp"
#include "test_support.hpp"

namespace lightflow {
namespace {

TEST(Binarize, FlatProfileHasNoCrossings) {
  const std::vector<double> zeros(50, 0.0);
  EXPECT_TRUE(adaptive_binarize(zeros, BinarizeOptions{5, 0.1, 0.0}).empty());
}

TEST(Binarize, RectangularPulse) {
  const std::vector<double> pulse{0, 0, 1, 1, 0, 0};
  const auto c = adaptive_binarize(pulse, BinarizeOptions{5, 0.1, 0.0});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].polarity, Polarity::Rise);
  EXPECT_GT(c[0].position, 1.0);
  EXPECT_LT(c[0].position, 2.0);
  EXPECT_EQ(c[1].polarity, Polarity::Fall);
  EXPECT_GT(c[1].position, 3.0);
  EXPECT_LT(c[1].position, 4.0);
}

TEST(Binarize, IntegerTranslationShiftsCrossings) {
  std::vector<double> base(200, 0.0);
  for (int i = 60; i < 140; ++i) base[i] = 0.5 + 0.4 * std::sin(i * 0.7) * std::sin(i * 0.7);
  const BinarizeOptions o{15, 0.1, 0.0};
  const auto ref = adaptive_binarize(base, o);
  ASSERT_FALSE(ref.empty());
  for (int delta : {1, 7, 13}) {
    std::vector<double> shifted(200, 0.0);
    for (int i = 0; i + delta < 200; ++i) shifted[i + delta] = base[i];
    const auto c = adaptive_binarize(shifted, o);
    ASSERT_EQ(c.size(), ref.size());
    for (std::size_t k = 0; k < c.size(); ++k) EXPECT_NEAR(c[k].position - ref[k].position, delta, 1e-9);
  }
}

TEST(Binarize, EvenWindowIsRejected) {
  const std::vector<double> v(10, 1.0);
  EXPECT_THROW(adaptive_binarize(v, BinarizeOptions{4, 0.1, 0.0}), DomainError);
}

BlurBand band_at(double left, double width, double interval) {
  BlurBand b;
  b.left_edge = left;
  b.right_edge = left + width;
  b.local_interval = interval;
  b.valid = true;
  return b;
}

TEST(FlowFromBands, PaperWorkingPoint) {
  const FlowModel model{0.1, 0.0, false, 1.0};
  const std::vector<BlurBand> bands{band_at(100, 3.0 + 10.0, 30.0)};
  const auto s = flow_from_bands(bands, model);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0].flow, 1.0 / 3.0, 1e-12);
}

TEST(FlowFromBands, StaticWidthGivesZeroFlow) {
  const FlowModel model{0.1, 0.1, true, 0.95};
  const std::vector<BlurBand> bands{band_at(10, 3.0, 30.0)};
  const auto s = flow_from_bands(bands, model);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].flow, 0.0);
}

TEST(FlowFromBands, SlantScalesWidthAndIntervalAlike) {
  const FlowModel model{0.1, 0.1, true, 0.95};
  const double k = 1.0 / std::cos(20.0 * std::numbers::pi / 180.0);
  const auto a = flow_from_bands(std::vector<BlurBand>{band_at(0, 12.0, 30.0)}, model);
  const auto b = flow_from_bands(std::vector<BlurBand>{band_at(0, 12.0 * k, 30.0 * k)}, model);
  ASSERT_EQ(a.size(), 1u);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_NEAR(a[0].flow, b[0].flow, 1e-12);
}

TEST(FlowFromBands, ThresholdCompensation) {
  // A line of width w swept over m pixels blurs into a trapezoid with ramps
  // of length min(m, w) and height proportional to min(m, w) / m. With the
  // period mean as reference, the threshold sits (1 + o) * duty of the way
  // up each ramp in units of m, so the measured width is
  // m + w - 2 (1 + o) duty m for either ordering of m and w.
  const double duty = 0.1, offset = 0.1, b = 30.0;
  const FlowModel model{duty, offset, true, 0.95};
  for (double m : {1.5, 3.0, 12.0}) {
    const double measured = m + duty * b - 2.0 * (1.0 + offset) * duty * m;
    const auto s = flow_from_bands(std::vector<BlurBand>{band_at(0, measured, b)}, model);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(s[0].flow, m / b, 1e-12);
  }
}

TEST(FlowFromBands, InvalidAndOverfullBandsAreSkipped) {
  const FlowModel model{0.1, 0.0, false, 0.95};
  BlurBand invalid = band_at(0, 10, 30);
  invalid.valid = false;
  const BlurBand overfull = band_at(50, 29.5, 30);
  EXPECT_TRUE(flow_from_bands(std::vector<BlurBand>{invalid, overfull}, model).empty());
}

TEST(Interpolation, LinearMidpoint) {
  const std::vector<FlowSample> s{{0, 10.0, 0.2}, {0, 50.0, 0.4}};
  const FlowField f = interpolate_flow(s, Size2(64, 1), InterpolationOptions{0.0, 100.0});
  EXPECT_TRUE(f.valid(30, 0));
  EXPECT_NEAR(f.flow(30, 0), 0.3, 1e-12);
  EXPECT_FALSE(f.valid(5, 0));
  EXPECT_FALSE(f.valid(51, 0));
}

TEST(Interpolation, ConstantStaysConstantUnderSmoothing) {
  std::vector<FlowSample> s;
  for (int y = 0; y < 40; ++y) {
    for (int x = 3; x < 80; x += 11) s.push_back({y, x + 0.3 * (y % 3), 0.25});
  }
  for (double sigma : {0.0, 2.0, 30.0, 60.0}) {
    const FlowField f = interpolate_flow(s, Size2(90, 40), InterpolationOptions{sigma, 100.0});
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 90; ++x) {
        if (f.valid(x, y)) EXPECT_NEAR(f.flow(x, y), 0.25, 1e-12);
      }
    }
  }
}

TEST(Interpolation, WideGapsAreNotBridged) {
  const std::vector<FlowSample> s{{0, 10.0, 0.2}, {0, 150.0, 0.4}};
  const FlowField f = interpolate_flow(s, Size2(200, 1), InterpolationOptions{0.0, 100.0});
  EXPECT_FALSE(f.valid(80, 0));
}

// Static plane: one band per visible line, each as wide as the projected
// line.
TEST(DetectBands, StaticPlaneBandsMatchProjectedLines) {
  const RigCalibration rig = testing::cropped_rig(presets::converging_rig(), 20);
  SceneSpec scene;
  scene.surface = PlaneSurface{Vec3(0, 0, 1), 0.6, Vec2::Zero()};
  scene.noise_std = 0.0;
  scene.time_samples = 4;
  const RenderOutput r = render_frame(scene, rig);
  const auto sources = rig.sources();
  for (int i = 0; i < 2; ++i) {
    const PatternSpec& pattern = *sources[i].pattern;
    const Image<float> channel = extract_channel(r.rgb, pattern.channel);
    const auto rows = detect_bands(channel, DetectionConfig{});
    const int y = 10;
    // Lines whose center lies between the first and last pixel centers.
    auto L = [&](double x) { return line_index_at(sources[i], camera_ray(rig.camera, Vec2(x, y)), 0.6); };
    auto on_pattern = [&](double x) {
      try {
        L(x);
        return true;
      } catch (const OffPatternError&) {
        return false;
      }
    };
    double x0 = 0.0, x1 = rig.camera.width() - 1.0;
    while (!on_pattern(x0)) x0 += 1.0;
    while (!on_pattern(x1)) x1 -= 1.0;
    const double l0 = L(x0), l1 = L(x1);
    const int expected = static_cast<int>(std::floor(std::max(l0, l1)) - std::ceil(std::min(l0, l1))) + 1;
    EXPECT_NEAR(static_cast<double>(rows[y].size()), expected, 1.0);
    std::size_t checked = 0;
    for (const BlurBand& b : rows[y]) {
      if (!b.valid) continue;
      const double local_b = 1.0 / std::abs(L(b.center() + 0.5) - L(b.center() - 0.5));
      // Pixel integration widens a thin line by up to its one-pixel footprint
      // plus the sub-pixel placement of both crossings.
      EXPECT_GT(b.width(), pattern.duty() * local_b - 0.5);
      EXPECT_LT(b.width(), pattern.duty() * local_b + 1.5);
      EXPECT_NEAR(b.local_interval, local_b, 0.5);
      ++checked;
    }
    EXPECT_GT(checked, rows[y].size() / 2);
  }
}

TEST(DetectBands, MovingPlaneFlowMatchesTruth) {
  const RigCalibration rig = testing::cropped_rig(presets::converging_rig(), 20);
  SceneSpec scene;
  scene.surface = PlaneSurface{Vec3(0, 0, 1), 0.6 - 0.0078, Vec2::Zero()};
  scene.velocity = Vec3(0, 0, 0.078);
  scene.exposure = 0.2;
  scene.noise_std = 0.0;
  const RenderOutput r = render_frame(scene, rig);
  const auto sources = rig.sources();
  for (int i = 0; i < 2; ++i) {
    const PatternSpec& pattern = *sources[i].pattern;
    const DetectionConfig config;
    const auto rows = detect_bands(extract_channel(r.rgb, pattern.channel), config);
    const auto samples = flow_from_bands(rows, flow_model_for(pattern, config));
    ASSERT_GT(samples.size(), 100u);
    std::vector<double> rel;
    for (const FlowSample& s : samples) {
      const int x = static_cast<int>(std::lround(s.x));
      if (r.truth_flow[i].valid(x, s.row)) rel.push_back(std::abs(s.flow / r.truth_flow[i].flow(x, s.row) - 1.0));
    }
    std::sort(rel.begin(), rel.end());
    EXPECT_LT(rel[rel.size() / 2], 0.02);
  }
}

TEST(DetectBands, OverlappingBandsAreInvalid) {
  const RigCalibration rig = testing::cropped_rig(presets::converging_rig(), 10);
  SceneSpec scene;
  scene.surface = PlaneSurface{Vec3(0, 0, 1), 0.6 - 0.078 * 0.25, Vec2::Zero()};
  scene.velocity = Vec3(0, 0, 0.078);
  scene.exposure = 0.5;
  scene.noise_std = 0.01;
  const RenderOutput r = render_frame(scene, rig);
  std::size_t valid = 0, total = 0;
  for (const auto& s : rig.sources()) {
    for (const auto& row : detect_bands(extract_channel(r.rgb, s.pattern->channel), DetectionConfig{})) {
      for (const BlurBand& b : row) {
        ++total;
        valid += b.valid ? 1 : 0;
      }
    }
  }
  EXPECT_LT(static_cast<double>(valid), 0.2 * static_cast<double>(total));
}

TEST(DetectBands, BandsAtSilhouetteAreInvalid) {
  const RigCalibration rig = testing::cropped_rig(presets::converging_rig(), 10);
  SceneSpec scene;
  // A 0.3 m wide board at 0.6 m spans about x in [250, 550].
  scene.surface = PlaneSurface{Vec3(0, 0, 1), 0.6 - 0.0078, Vec2(0.3, 1.0)};
  scene.velocity = Vec3(0, 0, 0.078);
  scene.exposure = 0.2;
  scene.noise_std = 0.0;
  const RenderOutput r = render_frame(scene, rig);
  for (const auto& s : rig.sources()) {
    const auto rows = detect_bands(extract_channel(r.rgb, s.pattern->channel), DetectionConfig{});
    for (const auto& row : rows) {
      ASSERT_GE(row.size(), 4u);
      EXPECT_FALSE(row.front().valid);
      EXPECT_FALSE(row.back().valid);
      EXPECT_FALSE(row[1].valid);
      EXPECT_FALSE(row[row.size() - 2].valid);
    }
  }
}

TEST(ExtractChannel, PicksPlane) {
  Image<float> rgb(2, 1, 3, 0.0f);
  rgb(0, 0, 0) = 0.25f;
  rgb(1, 0, 2) = 0.75f;
  EXPECT_EQ(extract_channel(rgb, Channel::Red)(0, 0), 0.25f);
  EXPECT_EQ(extract_channel(rgb, Channel::Blue)(1, 0), 0.75f);
}

}  // namespace
}  // namespace lightflow
