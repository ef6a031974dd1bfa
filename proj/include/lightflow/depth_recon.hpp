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

// Depth from the ratio of two pattern flows, and evaluation helpers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "lightflow/band_flow.hpp"
#include "lightflow/error.hpp"
#include "lightflow/image.hpp"
#include "lightflow/parallel.hpp"
#include "lightflow/ratio_lut.hpp"
#include "lightflow/rig_geometry.hpp"

namespace lightflow {

struct DepthMetadata {
  std::string rig_id;
  double exposure = 0.0;
  /// Instant of the exposure the depth refers to.
  std::string anchor = "mid-exposure";
};

struct DepthMap {
  Image<double> depth;
  Mask mask;
  DepthMetadata metadata;

  DepthMap() = default;
  DepthMap(int width, int height)
      : depth(width, height, 1, std::numeric_limits<double>::quiet_NaN()), mask(width, height, 1, 0) {}

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
  bool valid(int x, int y) const { return mask(x, y) != 0; }
  std::size_t valid_count() const { return count_set(mask); }
  double coverage() const {
    return mask.pixel_count() ? static_cast<double>(valid_count()) / mask.pixel_count() : 0.0;
  }
};

/// Flow magnitudes below this are treated as no motion.
inline constexpr double kFlowFloor = 1e-6;

struct ReconstructionDiagnostics {
  std::size_t pixels = 0;
  std::size_t reconstructed = 0;
  /// Missing in at least one flow field (no bands, outlier bands, gaps).
  std::size_t no_flow = 0;
  std::size_t below_flow_floor = 0;
  std::size_t lut_out_of_range = 0;
  std::size_t lut_invalid_node = 0;
  /// Set by the pipeline: bands rejected by the interval rules.
  std::size_t band_outliers = 0;
};

inline void write_diagnostics(std::ostream& out, const ReconstructionDiagnostics& d) {
  out << "pixels = " << d.pixels << "\n"
      << "reconstructed = " << d.reconstructed << "\n"
      << "no_flow = " << d.no_flow << "\n"
      << "below_flow_floor = " << d.below_flow_floor << "\n"
      << "lut_out_of_range = " << d.lut_out_of_range << "\n"
      << "lut_invalid_node = " << d.lut_invalid_node << "\n"
      << "band_outliers = " << d.band_outliers << "\n";
}

struct Reconstruction {
  DepthMap depth;
  ReconstructionDiagnostics diagnostics;
};

/// z = h^-1(ln(flow1 / flow2)) per pixel. flow1 belongs to pattern 1 of the
/// rig (the numerator of the LUT ratio).
inline Reconstruction reconstruct_depth(const FlowField& flow1, const FlowField& flow2,
                                        const DepthRatioLUT& lut, double flow_floor = kFlowFloor) {
  if (flow1.width() != flow2.width() || flow1.height() != flow2.height()) {
    throw DomainError("flow fields differ in size");
  }
  if (flow1.width() != lut.image_size().x() || flow1.height() != lut.image_size().y()) {
    throw DomainError("flow fields do not match the LUT image size");
  }
  Reconstruction out;
  out.depth = DepthMap(flow1.width(), flow1.height());
  const int w = flow1.width();
  const int h = flow1.height();
  std::vector<ReconstructionDiagnostics> per_row(h);
  parallel_for_rows(h, [&](int y) {
    ReconstructionDiagnostics& d = per_row[y];
    for (int x = 0; x < w; ++x) {
      ++d.pixels;
      if (!flow1.valid(x, y) || !flow2.valid(x, y)) {
        ++d.no_flow;
        continue;
      }
      const double f1 = flow1.flow(x, y);
      const double f2 = flow2.flow(x, y);
      if (!(f1 >= flow_floor) || !(f2 >= flow_floor)) {
        ++d.below_flow_floor;
        continue;
      }
      // A single log of the quotient: scaling both flows by a power of two
      // leaves the argument, and so the depth, bit-identical.
      const Inversion inv = invert_log_ratio(lut, Vec2(x, y), std::log(f1 / f2));
      if (inv.status == InversionStatus::OutOfRange) {
        ++d.lut_out_of_range;
      } else if (inv.status == InversionStatus::InvalidNode) {
        ++d.lut_invalid_node;
      } else {
        out.depth.depth(x, y) = inv.z;
        out.depth.mask(x, y) = 1;
        ++d.reconstructed;
      }
    }
  });
  for (const auto& d : per_row) {
    out.diagnostics.pixels += d.pixels;
    out.diagnostics.reconstructed += d.reconstructed;
    out.diagnostics.no_flow += d.no_flow;
    out.diagnostics.below_flow_floor += d.below_flow_floor;
    out.diagnostics.lut_out_of_range += d.lut_out_of_range;
    out.diagnostics.lut_invalid_node += d.lut_invalid_node;
  }
  return out;
}

/// Camera-frame point z * r(p) of every valid pixel, in row-major order.
inline std::vector<Vec3> depth_to_points(const DepthMap& depth, const CameraModel& camera) {
  std::vector<Vec3> points;
  points.reserve(depth.valid_count());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(x, y)) points.push_back(camera_ray(camera, Vec2(x, y)).at_depth(depth.depth(x, y)));
    }
  }
  return points;
}

/// CSV export of the valid pixels: x, y, z with x, y in camera pixels.
inline void write_points_csv(std::ostream& out, const DepthMap& depth) {
  out << "x,y,z\n";
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(x, y)) out << x << "," << y << "," << depth.depth(x, y) << "\n";
    }
  }
}

struct PlaneFit {
  Vec3 normal = Vec3::UnitZ();
  /// normal . X = offset for points X on the plane.
  double offset = 0.0;
  double rmse = 0.0;
  std::size_t inlier_count = 0;

  double distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Total-least-squares plane and the RMS of orthogonal distances to it.
inline PlaneFit fit_plane_rmse(std::span<const Vec3> points) {
  if (points.size() < 3) throw FitError("plane fit needs at least three points");
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Mat3 scatter = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    scatter += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> solver(scatter);
  if (solver.info() != Eigen::Success) throw FitError("eigen decomposition failed");
  const Vec3 values = solver.eigenvalues();  // ascending
  if (!(values(1) > 1e-12 * std::max(values(2), std::numeric_limits<double>::min()))) {
    throw FitError("points are collinear or coincident");
  }
  PlaneFit fit;
  fit.normal = solver.eigenvectors().col(0).normalized();
  if (fit.normal.z() < 0.0) fit.normal = -fit.normal;
  fit.offset = fit.normal.dot(centroid);
  double sum = 0.0;
  for (const Vec3& p : points) sum += fit.distance(p) * fit.distance(p);
  fit.rmse = std::sqrt(sum / static_cast<double>(points.size()));
  fit.inlier_count = points.size();
  return fit;
}

struct GroundTruthStats {
  double median_abs_err = 0.0;
  double rmse = 0.0;
  /// Jointly valid pixels over all pixels.
  double coverage = 0.0;
  std::size_t compared = 0;
};

inline GroundTruthStats compare_to_ground_truth(const DepthMap& depth, const DepthMap& truth) {
  if (depth.width() != truth.width() || depth.height() != truth.height()) {
    throw DomainError("depth maps differ in size");
  }
  std::vector<double> errors;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(x, y) && truth.valid(x, y)) {
        errors.push_back(std::abs(depth.depth(x, y) - truth.depth(x, y)));
      }
    }
  }
  if (errors.empty()) throw EmptyComparisonError("depth maps share no valid pixel");
  GroundTruthStats stats;
  stats.compared = errors.size();
  stats.coverage = static_cast<double>(errors.size()) / depth.depth.pixel_count();
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  stats.rmse = std::sqrt(sum / errors.size());
  const auto mid = errors.begin() + errors.size() / 2;
  std::nth_element(errors.begin(), mid, errors.end());
  stats.median_abs_err = *mid;
  if (errors.size() % 2 == 0) {
    const double lower = *std::max_element(errors.begin(), mid);
    stats.median_abs_err = 0.5 * (stats.median_abs_err + lower);
  }
  return stats;
}

/// Depth map as a float image with NaN where masked.
inline Image<float> depth_to_image(const DepthMap& depth) {
  Image<float> out(depth.width(), depth.height(), 1, std::numeric_limits<float>::quiet_NaN());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(x, y)) out(x, y) = static_cast<float>(depth.depth(x, y));
    }
  }
  return out;
}

/// Inverse of depth_to_image: finite pixels become valid.
inline DepthMap depth_from_image(const Image<float>& image) {
  if (image.channels() != 1) throw DomainError("depth images have one channel");
  DepthMap depth(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (std::isfinite(image(x, y))) {
        depth.depth(x, y) = image(x, y);
        depth.mask(x, y) = 1;
      }
    }
  }
  return depth;
}

/// Grey visualization: near is bright, far is dark, masked pixels black.
inline Image<float> visualize_depth(const DepthMap& depth) {
  Image<float> out(depth.width(), depth.height(), 1, 0.0f);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      lo = std::min(lo, depth.depth(x, y));
      hi = std::max(hi, depth.depth(x, y));
    }
  }
  if (!(hi >= lo)) return out;
  const double span = hi > lo ? hi - lo : 1.0;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(x, y)) out(x, y) = static_cast<float>(1.0 - 0.8 * (depth.depth(x, y) - lo) / span);
    }
  }
  return out;
}

}  // namespace lightflow
