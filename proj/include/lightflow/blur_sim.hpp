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

// Motion-blur renderer for rigidly translating analytic surfaces lit by the
// rig's line patterns. Each pixel averages the pattern seen along its ray
// over uniformly spaced time segments of a global-shutter exposure, which
// gives the blurred bands together with exact ground-truth depth and flow.
//
// Scene files are `key = value` text:
//   surface = plane | sphere
//   plane.normal = 0 0 1        plane.offset = 0.6     plane.size = 0.6 0.4
//   sphere.center = 0 0 0.6     sphere.radius = 0.15
//   velocity = 0 0 0.05         # m/s
//   exposure = 0.3              # s
//   samples = 64                # time samples per exposure
//   albedo = 0.8
//   background = 0
//   noise = 0.01                # std of additive Gaussian noise
//   seed = 1

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "lightflow/band_flow.hpp"
#include "lightflow/depth_recon.hpp"
#include "lightflow/error.hpp"
#include "lightflow/image.hpp"
#include "lightflow/keyvalue.hpp"
#include "lightflow/parallel.hpp"
#include "lightflow/rig_geometry.hpp"

namespace lightflow {

/// Plane normal . X = offset at time 0. A non-zero extent bounds it to a
/// rectangle of that width and height centred on offset * normal, with
/// width measured along the horizontal in-plane axis.
struct PlaneSurface {
  Vec3 normal = Vec3::UnitZ();
  double offset = 1.0;
  Vec2 extent = Vec2::Zero();
};

struct SphereSurface {
  Vec3 center = Vec3(0.0, 0.0, 1.0);
  double radius = 0.1;
};

using Surface = std::variant<PlaneSurface, SphereSurface>;

struct SceneSpec {
  Surface surface = PlaneSurface{};
  /// Rigid translation velocity, m/s.
  Vec3 velocity = Vec3::Zero();
  /// Exposure time, s; the shutter opens at t = 0.
  double exposure = 0.1;
  int time_samples = 64;
  double albedo = 0.8;
  double background = 0.0;
  double noise_std = 0.01;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(exposure > 0.0)) throw DomainError("exposure must be positive");
    if (time_samples < 2) throw DomainError("at least two time samples are needed");
    if (!(noise_std >= 0.0)) throw DomainError("noise std must be non-negative");
    if (!(albedo >= 0.0 && albedo <= 1.0)) throw DomainError("albedo must lie in [0, 1]");
    if (const auto* s = std::get_if<SphereSurface>(&surface); s && !(s->radius > 0.0)) {
      throw DomainError("sphere radius must be positive");
    }
    if (const auto* p = std::get_if<PlaneSurface>(&surface)) {
      if (!(p->normal.norm() > 0.0)) throw DomainError("plane normal must be non-zero");
      if (p->extent.x() < 0.0 || p->extent.y() < 0.0) throw DomainError("plane extent must be non-negative");
    }
  }
};

namespace sim_detail {

inline std::optional<double> intersect_plane(const PlaneSurface& plane, const Vec3& shift, const Ray& ray) {
  const Vec3 n = plane.normal.normalized();
  const double denom = n.dot(ray.direction());
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double z = (plane.offset + n.dot(shift)) / denom;
  if (!(z > 0.0)) return std::nullopt;
  if (plane.extent.x() > 0.0 && plane.extent.y() > 0.0) {
    Vec3 u = Vec3::UnitY().cross(n);
    if (u.norm() < 1e-9) u = Vec3::UnitX();
    u.normalize();
    const Vec3 v = n.cross(u);
    const Vec3 local = ray.at_depth(z) - (plane.offset * n + shift);
    if (std::abs(local.dot(u)) > 0.5 * plane.extent.x() || std::abs(local.dot(v)) > 0.5 * plane.extent.y()) {
      return std::nullopt;
    }
  }
  return z;
}

inline std::optional<double> intersect_sphere(const SphereSurface& sphere, const Vec3& shift, const Ray& ray) {
  const Vec3& r = ray.direction();
  const Vec3 c = sphere.center + shift;
  const double a = r.dot(r);
  const double b = -2.0 * r.dot(c);
  const double k = c.dot(c) - sphere.radius * sphere.radius;
  const double disc = b * b - 4.0 * a * k;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double near = (-b - root) / (2.0 * a);
  if (near > 0.0) return near;
  const double far = (-b + root) / (2.0 * a);
  if (far > 0.0) return far;
  return std::nullopt;
}

}  // namespace sim_detail

/// Depth along `ray` of the first hit with the surface translated by
/// velocity * time, or nothing on a miss.
inline std::optional<double> intersect(const Surface& surface, const Vec3& velocity, const Ray& ray,
                                       double time) {
  const Vec3 shift = velocity * time;
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, PlaneSurface>) {
          return sim_detail::intersect_plane(s, shift, ray);
        } else {
          return sim_detail::intersect_sphere(s, shift, ray);
        }
      },
      surface);
}

namespace sim_detail {

// Line-index coordinate of a camera-frame point, or nothing when the point
// is behind the projector or outside its pattern.
inline std::optional<double> pattern_coord(const ProjectorModel& proj, const PatternSpec& pattern,
                                           const Vec3& point) {
  const Vec3 p = proj.to_projector(point);
  if (p.z() <= kMinDeviceDepth) return std::nullopt;
  const double q_h = -p.x() / p.z();
  const double column = projector_column(proj, q_h);
  if (!(column >= 0.0 && column <= proj.pattern_width())) return std::nullopt;
  return line_index_coord(proj, pattern, q_h);
}

// Lit length of [0, u) for lines covering [k - duty/2, k + duty/2].
inline double lit_length(double u, double duty) {
  const double shifted = u + 0.5 * duty;
  const double whole = std::floor(shifted);
  return whole * duty + std::min(shifted - whole, duty);
}

}  // namespace sim_detail

/// 1 where `point` (camera frame) is lit by a line of `pattern`, else 0.
/// Lines sit at integer line-index positions and cover duty / 2 on either
/// side, so modulated patterns widen their lines together with the spacing.
inline double pattern_intensity(const ProjectorModel& proj, const PatternSpec& pattern, const Vec3& point) {
  const auto index = sim_detail::pattern_coord(proj, pattern, point);
  if (!index) return 0.0;
  return std::abs(*index - std::round(*index)) <= 0.5 * pattern.duty() ? 1.0 : 0.0;
}

/// Lit fraction while the line index sweeps linearly from `from` to `to`.
inline double swept_intensity(double from, double to, double duty) {
  if (std::abs(to - from) < 1e-12) {
    return std::abs(from - std::round(from)) <= 0.5 * duty ? 1.0 : 0.0;
  }
  return (sim_detail::lit_length(to, duty) - sim_detail::lit_length(from, duty)) / (to - from);
}

struct RenderOutput {
  /// RGB frame in [0, 1]: pattern 1 and 2 in their colour planes.
  Image<float> rgb;
  /// Depth at mid-exposure.
  DepthMap truth_depth;
  /// Analytic pattern displacement over the exposure, in rig pattern order.
  std::array<FlowField, 2> truth_flow;
};

inline RenderOutput render_frame(const SceneSpec& scene, const RigCalibration& rig) {
  scene.validate();
  const auto sources = rig.sources();
  const CameraModel& camera = rig.camera;
  const int w = camera.width();
  const int h = camera.height();

  RenderOutput out;
  out.rgb = Image<float>(w, h, 3, 0.0f);
  out.truth_depth = DepthMap(w, h);
  out.truth_depth.metadata = {rig.id, scene.exposure, "mid-exposure"};
  for (int i = 0; i < 2; ++i) out.truth_flow[i] = FlowField(w, h, sources[i].pattern->channel);

  const int n = scene.time_samples;
  parallel_for_rows(h, [&](int y) {
    // Seeded per (seed, row) so any row schedule yields the same frame.
    std::seed_seq seq{static_cast<std::uint32_t>(scene.seed), static_cast<std::uint32_t>(scene.seed >> 32),
                      static_cast<std::uint32_t>(y)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, scene.noise_std);

    std::vector<std::optional<double>> z_at(n + 1);
    std::array<std::vector<std::optional<double>>, 2> coord_at{std::vector<std::optional<double>>(n + 1),
                                                             std::vector<std::optional<double>>(n + 1)};
    for (int x = 0; x < w; ++x) {
      const Ray ray = camera_ray(camera, Vec2(x, y));
      for (int j = 0; j <= n; ++j) {
        z_at[j] = intersect(scene.surface, scene.velocity, ray, static_cast<double>(j) / n * scene.exposure);
        for (int i = 0; i < 2; ++i) {
          coord_at[i][j] = z_at[j] ? sim_detail::pattern_coord(*sources[i].projector, *sources[i].pattern,
                                                               ray.at_depth(*z_at[j]))
                                   : std::nullopt;
        }
      }
      // Between consecutive samples the line index is taken as linear in
      // time and the stripe indicator is integrated exactly; segments that
      // cross a silhouette or the pattern border fall back to their midpoint.
      std::array<double, 3> acc{0.0, 0.0, 0.0};
      for (int j = 0; j < n; ++j) {
        if (!z_at[j] || !z_at[j + 1]) {
          const double t = (j + 0.5) / n * scene.exposure;
          const auto z = intersect(scene.surface, scene.velocity, ray, t);
          if (!z) {
            for (double& a : acc) a += scene.background;
            continue;
          }
          for (const auto& source : sources) {
            acc[rgb_index(source.pattern->channel)] +=
                scene.albedo * pattern_intensity(*source.projector, *source.pattern, ray.at_depth(*z));
          }
          continue;
        }
        for (int i = 0; i < 2; ++i) {
          const auto& from = coord_at[i][j];
          const auto& to = coord_at[i][j + 1];
          double lit = 0.0;
          if (from && to) {
            lit = swept_intensity(*from, *to, sources[i].pattern->duty());
          } else if (from || to) {
            const double t = (j + 0.5) / n * scene.exposure;
            const auto z = intersect(scene.surface, scene.velocity, ray, t);
            if (z) lit = pattern_intensity(*sources[i].projector, *sources[i].pattern, ray.at_depth(*z));
          }
          acc[rgb_index(sources[i].pattern->channel)] += scene.albedo * lit;
        }
      }
      for (int c = 0; c < 3; ++c) {
        double v = acc[c] / n;
        if (scene.noise_std > 0.0) v += noise(rng);
        out.rgb(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }

      if (const auto z_mid = intersect(scene.surface, scene.velocity, ray, 0.5 * scene.exposure)) {
        out.truth_depth.depth(x, y) = *z_mid;
        out.truth_depth.mask(x, y) = 1;
      }
      const auto z_start = intersect(scene.surface, scene.velocity, ray, 0.0);
      const auto z_end = intersect(scene.surface, scene.velocity, ray, scene.exposure);
      if (!z_start || !z_end) continue;
      for (int i = 0; i < 2; ++i) {
        try {
          const double flow = std::abs(line_index_at(sources[i], ray, *z_end) -
                                       line_index_at(sources[i], ray, *z_start));
          out.truth_flow[i].flow(x, y) = flow;
          out.truth_flow[i].mask(x, y) = 1;
        } catch (const OffPatternError&) {
        } catch (const DegenerateGeometryError&) {
        }
      }
    }
  });
  return out;
}

inline SceneSpec scene_from_keyvalue(const KeyValueFile& kv) {
  SceneSpec scene;
  const std::string kind = kv.get_string("surface");
  auto vec3 = [&](const std::string& key) {
    const auto v = kv.get_doubles(key, 3);
    return Vec3(v[0], v[1], v[2]);
  };
  if (kind == "plane") {
    PlaneSurface plane;
    plane.normal = vec3("plane.normal");
    plane.offset = kv.get_double("plane.offset");
    if (kv.has("plane.size")) {
      const auto s = kv.get_doubles("plane.size", 2);
      plane.extent = Vec2(s[0], s[1]);
    }
    scene.surface = plane;
  } else if (kind == "sphere") {
    scene.surface = SphereSurface{vec3("sphere.center"), kv.get_double("sphere.radius")};
  } else {
    throw ConfigError(kv.source() + ": unknown surface `" + kind + "`");
  }
  scene.velocity = vec3("velocity");
  scene.exposure = kv.get_double("exposure");
  scene.time_samples = static_cast<int>(kv.get_int("samples", scene.time_samples));
  scene.albedo = kv.get_double("albedo", scene.albedo);
  scene.background = kv.get_double("background", scene.background);
  scene.noise_std = kv.get_double("noise", scene.noise_std);
  const auto seed = kv.get_int("seed", 1);
  if (seed < 0) throw ConfigError(kv.source() + ": seed must be non-negative");
  scene.seed = static_cast<std::uint64_t>(seed);
  kv.reject_unread_keys();
  try {
    scene.validate();
  } catch (const DomainError& e) {
    throw ConfigError(kv.source() + ": " + e.what());
  }
  return scene;
}

inline KeyValueFile scene_to_keyvalue(const SceneSpec& scene) {
  KeyValueFile kv;
  if (const auto* p = std::get_if<PlaneSurface>(&scene.surface)) {
    kv.set("surface", std::string("plane"));
    kv.set("plane.normal", std::vector<double>{p->normal.x(), p->normal.y(), p->normal.z()});
    kv.set("plane.offset", p->offset);
    if (p->extent.x() > 0.0 || p->extent.y() > 0.0) {
      kv.set("plane.size", std::vector<double>{p->extent.x(), p->extent.y()});
    }
  } else {
    const auto& s = std::get<SphereSurface>(scene.surface);
    kv.set("surface", std::string("sphere"));
    kv.set("sphere.center", std::vector<double>{s.center.x(), s.center.y(), s.center.z()});
    kv.set("sphere.radius", s.radius);
  }
  kv.set("velocity", std::vector<double>{scene.velocity.x(), scene.velocity.y(), scene.velocity.z()});
  kv.set("exposure", scene.exposure);
  kv.set("samples", std::to_string(scene.time_samples));
  kv.set("albedo", scene.albedo);
  kv.set("background", scene.background);
  kv.set("noise", scene.noise_std);
  kv.set("seed", std::to_string(scene.seed));
  return kv;
}

inline SceneSpec load_scene(const std::filesystem::path& path) {
  return scene_from_keyvalue(KeyValueFile::load(path));
}

}  // namespace lightflow
