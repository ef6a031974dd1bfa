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

// Reference rigs used by the tests, the acceptance suite and configs/.

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "lightflow/rig_geometry.hpp"

namespace lightflow::presets {

/// Camera to projector rotation for a projector at `center` whose optical
/// axis points along `axis` (camera coordinates) with image rows kept
/// horizontal.
inline Mat3 look_along(const Vec3& axis) {
  const Vec3 z = axis.normalized();
  const Vec3 x = Vec3::UnitY().cross(z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  return r;
}

/// Projector at `center` yawed by `yaw_deg` about the vertical axis;
/// positive yaw turns the optical axis toward +x.
inline ProjectorModel projector(const Vec3& center, double yaw_deg, double focal_px,
                                PatternSpec pattern) {
  const double yaw = yaw_deg * std::numbers::pi / 180.0;
  ProjectorModel p;
  p.focal_px = focal_px;
  p.resolution = Size2(1280, 800);
  p.principal_point = Vec2(640.0, 400.0);
  p.rotation = look_along(Vec3(std::sin(yaw), 0.0, std::cos(yaw)));
  p.translation = -p.rotation * center;
  p.patterns = {pattern};
  return p;
}

inline CameraModel camera() {
  CameraModel c;
  c.focal_px = 600.0;
  c.resolution = Size2(800, 600);
  c.principal_point = Vec2(400.0, 300.0);
  return c;
}

inline PatternSpec uniform_lines(double interval, double line_width, Channel channel) {
  return {PatternKind::UniformLines, interval, line_width, Modulation::None, channel};
}

inline PatternSpec modulated_lines(double interval, double line_width, Modulation modulation,
                                   Channel channel) {
  return {PatternKind::ModulatedLines, interval, line_width, modulation, channel};
}

/// Two projectors 0.4 m either side of the camera: the left one converges
/// strongly (48 degrees), the right one only slightly (7 degrees), so the
/// flow ratio changes with depth over the whole image.
inline RigCalibration converging_rig() {
  RigCalibration rig;
  rig.id = "converging";
  rig.camera = camera();
  rig.projectors = {
      projector(Vec3(-0.4, 0.0, 0.0), 48.0, 600.0, uniform_lines(24.0, 2.4, Channel::Red)),
      projector(Vec3(0.4, 0.0, 0.0), -7.0, 600.0, uniform_lines(24.0, 2.4, Channel::Blue)),
  };
  return rig;
}

/// Both projectors parallel to the camera axis with centers on the camera's
/// x axis: the flow ratio is the same at every depth.
inline RigCalibration parallel_rig(double baseline = 0.4) {
  RigCalibration rig;
  rig.id = "parallel";
  rig.camera = camera();
  rig.projectors = {
      projector(Vec3(baseline, 0.0, 0.0), 0.0, 600.0, uniform_lines(24.0, 2.4, Channel::Red)),
      projector(Vec3(-baseline, 0.0, 0.0), 0.0, 600.0, uniform_lines(24.0, 2.4, Channel::Blue)),
  };
  return rig;
}

/// Camera and projectors share one image plane, with unequal and partly
/// vertical offsets.
inline RigCalibration fronto_parallel_rig() {
  RigCalibration rig;
  rig.id = "fronto_parallel";
  rig.camera = camera();
  rig.projectors = {
      projector(Vec3(-0.25, 0.05, 0.0), 0.0, 600.0, uniform_lines(24.0, 2.4, Channel::Red)),
      projector(Vec3(0.45, -0.03, 0.0), 0.0, 700.0, uniform_lines(30.0, 3.0, Channel::Blue)),
  };
  return rig;
}

/// One projector with two oppositely modulated line sets in red and blue.
inline RigCalibration single_projector_rig() {
  RigCalibration rig;
  rig.id = "single_projector";
  rig.camera = camera();
  ProjectorModel p = projector(Vec3(0.4, 0.0, 0.0), -30.0, 700.0,
                               modulated_lines(24.0, 2.4, Modulation::WideRight, Channel::Red));
  p.patterns.push_back(modulated_lines(24.0, 2.4, Modulation::WideLeft, Channel::Blue));
  rig.projectors = {p};
  return rig;
}

}  // namespace lightflow::presets
