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

// Camera and projector models of a projector-camera rig.
//
// Coordinates follow the normalized-camera convention: a camera pixel p maps
// to the ray r = ((px - cx) / f, (py - cy) / f, 1), and a surface point on
// that ray is s = z * r. A projector is an inverse camera with rigid
// transform (R, t) from camera to projector coordinates; its horizontal
// pattern coordinate is q_h = f_h(R s + t) with f_h((x, y, z)) = -x / z.
// Only the horizontal projector coordinate is modelled; patterns are
// vertical lines.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "lightflow/error.hpp"

namespace lightflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Size2 = Eigen::Vector2i;

/// Smallest projector-frame depth accepted before a point counts as behind
/// the projector.
inline constexpr double kMinDeviceDepth = 1e-9;

enum class PatternKind { UniformLines, ModulatedLines };
enum class Modulation { None, WideRight, WideLeft };
enum class Channel { Red, Blue };

/// Index of a pattern channel inside an interleaved RGB frame.
inline constexpr int rgb_index(Channel channel) { return channel == Channel::Red ? 0 : 2; }

struct CameraModel {
  double focal_px = 0.0;
  Vec2 principal_point = Vec2::Zero();
  Size2 resolution = Size2::Zero();

  int width() const { return resolution.x(); }
  int height() const { return resolution.y(); }

  bool contains(const Vec2& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() <= resolution.x() - 1 &&
           pixel.y() <= resolution.y() - 1;
  }

  void validate() const {
    if (!(focal_px > 0.0)) throw DomainError("camera focal length must be positive");
    if (resolution.x() < 1 || resolution.y() < 1) {
      throw DomainError("camera resolution must be at least 1x1");
    }
    if (principal_point.x() < 0.0 || principal_point.x() > resolution.x() ||
        principal_point.y() < 0.0 || principal_point.y() > resolution.y()) {
      throw DomainError("camera principal point lies outside the image");
    }
  }
};

/// Viewing ray of one camera pixel, in normalized camera coordinates.
class Ray {
 public:
  Ray(double x, double y) : direction_(x, y, 1.0) {}
  explicit Ray(const Vec2& normalized) : Ray(normalized.x(), normalized.y()) {}

  /// Always has a third component of exactly one.
  const Vec3& direction() const { return direction_; }
  Vec3 at_depth(double z) const { return z * direction_; }

 private:
  Vec3 direction_;
};

struct PatternSpec {
  PatternKind kind = PatternKind::UniformLines;
  /// Projector pixels between adjacent lines. For modulated patterns this is
  /// the spacing before the modulation warp is applied.
  double interval = 0.0;
  /// Projector pixels, measured at `interval` spacing.
  double line_width = 0.0;
  Modulation modulation = Modulation::None;
  Channel channel = Channel::Red;

  /// Fraction of one line period that is lit.
  double duty() const { return line_width / interval; }

  void validate() const {
    if (!(line_width > 0.0) || !(interval > line_width)) {
      throw DomainError("pattern requires interval > line_width > 0");
    }
    const bool modulated = kind == PatternKind::ModulatedLines;
    if (modulated != (modulation != Modulation::None)) {
      throw DomainError("modulation must be set exactly for modulated patterns");
    }
  }

  bool operator==(const PatternSpec&) const = default;
};

struct ProjectorModel {
  double focal_px = 0.0;
  Vec2 principal_point = Vec2::Zero();
  Size2 resolution = Size2::Zero();
  /// Camera to projector rotation.
  Mat3 rotation = Mat3::Identity();
  /// Camera to projector translation, in meters.
  Vec3 translation = Vec3::Zero();
  std::vector<PatternSpec> patterns;

  double pattern_width() const { return static_cast<double>(resolution.x()); }

  Vec3 to_projector(const Vec3& camera_point) const {
    return rotation * camera_point + translation;
  }

  /// Projector optical center expressed in camera coordinates.
  Vec3 center() const { return -rotation.transpose() * translation; }

  void validate() const {
    if (!(focal_px > 0.0)) throw DomainError("projector focal length must be positive");
    if (resolution.x() < 1 || resolution.y() < 1) {
      throw DomainError("projector resolution must be at least 1x1");
    }
    const double orthogonality = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (!(orthogonality <= 1e-9) || !(std::abs(rotation.determinant() - 1.0) <= 1e-9)) {
      throw DomainError("projector rotation must be orthonormal with determinant +1");
    }
    if (patterns.empty() || patterns.size() > 2) {
      throw DomainError("a projector carries one or two patterns");
    }
    for (const auto& p : patterns) p.validate();
  }
};

/// A pattern together with the projector that emits it.
struct PatternSource {
  const ProjectorModel* projector = nullptr;
  const PatternSpec* pattern = nullptr;
};

struct RigCalibration {
  std::string id = "rig";
  CameraModel camera;
  std::vector<ProjectorModel> projectors;

  /// The two patterns in ratio order: pattern 1 is the numerator of the flow
  /// ratio. With two projectors this is (projector 1, projector 2); with one
  /// projector it is the projector's patterns in declaration order.
  std::array<PatternSource, 2> sources() const {
    validate();
    if (projectors.size() == 2) {
      return {PatternSource{&projectors[0], &projectors[0].patterns[0]},
              PatternSource{&projectors[1], &projectors[1].patterns[0]}};
    }
    return {PatternSource{&projectors[0], &projectors[0].patterns[0]},
            PatternSource{&projectors[0], &projectors[0].patterns[1]}};
  }

  void validate() const {
    camera.validate();
    if (projectors.empty() || projectors.size() > 2) {
      throw DomainError("a rig has one or two projectors");
    }
    for (const auto& p : projectors) p.validate();
    std::vector<const PatternSpec*> all;
    for (const auto& p : projectors) {
      for (const auto& s : p.patterns) all.push_back(&s);
    }
    if (all.size() != 2) throw DomainError("a rig carries exactly two patterns");
    if (all[0]->channel == all[1]->channel) {
      throw DomainError("the two patterns must use distinct channels");
    }
    if (projectors.size() == 1) {
      const auto& a = *all[0];
      const auto& b = *all[1];
      if (a.kind != PatternKind::ModulatedLines || b.kind != PatternKind::ModulatedLines ||
          a.modulation == b.modulation) {
        throw DomainError("a single-projector rig needs two oppositely modulated patterns");
      }
    } else {
      for (const auto* s : all) {
        if (s->kind != PatternKind::UniformLines) {
          throw DomainError("a two-projector rig uses uniform line patterns");
        }
      }
    }
  }
};

/// Normalized camera ray of a pixel; no bounds check.
inline Ray camera_ray(const CameraModel& camera, const Vec2& pixel) {
  return Ray((pixel.x() - camera.principal_point.x()) / camera.focal_px,
             (pixel.y() - camera.principal_point.y()) / camera.focal_px);
}

inline Ray pixel_ray(const CameraModel& camera, const Vec2& pixel) {
  if (!camera.contains(pixel)) throw DomainError("pixel lies outside the camera image");
  return camera_ray(camera, pixel);
}

/// Pixel coordinates of a camera-frame point.
inline Vec2 project_to_camera(const CameraModel& camera, const Vec3& point) {
  if (point.z() <= kMinDeviceDepth) throw DegenerateGeometryError("point lies behind the camera");
  return {camera.focal_px * point.x() / point.z() + camera.principal_point.x(),
          camera.focal_px * point.y() / point.z() + camera.principal_point.y()};
}

/// Normalized horizontal projector coordinate q_h = g(z) illuminating the
/// point at depth z on `ray`.
inline double g_eval(const ProjectorModel& proj, const Ray& ray, double z) {
  if (!(z > 0.0)) throw DomainError("depth must be positive");
  const Vec3 p = proj.to_projector(ray.at_depth(z));
  if (p.z() <= kMinDeviceDepth) {
    throw DegenerateGeometryError("point lies at or behind the projector principal plane");
  }
  return -p.x() / p.z();
}

/// Analytic dq_h/dz of g_eval, sign preserved.
inline double g_derivative(const ProjectorModel& proj, const Ray& ray, double z) {
  if (!(z > 0.0)) throw DomainError("depth must be positive");
  const Vec3 a = proj.rotation * ray.direction();
  const Vec3 p = z * a + proj.translation;
  if (p.z() <= kMinDeviceDepth) {
    throw DegenerateGeometryError("point lies at or behind the projector principal plane");
  }
  // d/dz (-(a_x z + t_x) / (a_z z + t_z)), quotient rule.
  return -(a.x() * p.z() - a.z() * p.x()) / (p.z() * p.z());
}

inline void check_unit_interval(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("pattern coordinate must lie in [0, 1]");
}

/// Interval modulation of a pattern coordinate in [0, 1]. WideRight doubles
/// line spacing from the left edge to the right edge, WideLeft mirrors it.
inline double modulate(double u, Modulation modulation) {
  check_unit_interval(u);
  switch (modulation) {
    case Modulation::WideRight:
      return std::exp2(u) - 1.0;
    case Modulation::WideLeft:
      return 2.0 - std::exp2(1.0 - u);
    case Modulation::None:
      break;
  }
  return u;
}

inline double demodulate(double v, Modulation modulation) {
  check_unit_interval(v);
  switch (modulation) {
    case Modulation::WideRight:
      return std::log2(v + 1.0);
    case Modulation::WideLeft:
      return 1.0 - std::log2(2.0 - v);
    case Modulation::None:
      break;
  }
  return v;
}

/// d demodulate(v) / dv.
inline double demodulate_slope(double v, Modulation modulation) {
  check_unit_interval(v);
  switch (modulation) {
    case Modulation::WideRight:
      return 1.0 / ((v + 1.0) * std::numbers::ln2);
    case Modulation::WideLeft:
      return 1.0 / ((2.0 - v) * std::numbers::ln2);
    case Modulation::None:
      break;
  }
  return 1.0;
}

/// Projector pixel column of a normalized horizontal coordinate.
inline double projector_column(const ProjectorModel& proj, double q_h) {
  return q_h * proj.focal_px + proj.principal_point.x();
}

/// Position of q_h in line-index space, where line k sits at exactly k and
/// one unit is one line spacing.
inline double line_index_coord(const ProjectorModel& proj, const PatternSpec& pattern, double q_h) {
  const double column = projector_column(proj, q_h);
  const double width = proj.pattern_width();
  if (!(column >= 0.0 && column <= width)) throw OffPatternError("coordinate lies off the pattern");
  if (pattern.kind == PatternKind::UniformLines) return column / pattern.interval;
  return demodulate(column / width, pattern.modulation) * width / pattern.interval;
}

/// dL/dq_h of line_index_coord. Uniform patterns have a constant slope that
/// is defined off the pattern as well.
inline double line_index_slope(const ProjectorModel& proj, const PatternSpec& pattern, double q_h) {
  if (pattern.kind == PatternKind::UniformLines) return proj.focal_px / pattern.interval;
  const double width = proj.pattern_width();
  const double v = projector_column(proj, q_h) / width;
  if (!(v >= 0.0 && v <= 1.0)) throw OffPatternError("coordinate lies off the pattern");
  return demodulate_slope(v, pattern.modulation) * proj.focal_px / pattern.interval;
}

/// dL/dz along a camera ray: the pattern flow per unit depth change.
inline double line_index_rate(const PatternSource& source, const Ray& ray, double z) {
  const double q_h = g_eval(*source.projector, ray, z);
  return line_index_slope(*source.projector, *source.pattern, q_h) *
         g_derivative(*source.projector, ray, z);
}

/// Line-index coordinate of the point at depth z on `ray`.
inline double line_index_at(const PatternSource& source, const Ray& ray, double z) {
  return line_index_coord(*source.projector, *source.pattern, g_eval(*source.projector, ray, z));
}

}  // namespace lightflow
