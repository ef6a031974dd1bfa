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

// Per-pixel depth to log-flow-ratio function h_p(z) and its inverse.
//
// For a camera pixel p and a depth z, each pattern i moves through
// line-index space at rate dL_i/dz. Their log ratio
//     h_p(z) = ln|dL_1/dz| - ln|dL_2/dz|
// is independent of how fast the surface moves, so a measured ratio of the
// two pattern flows identifies z wherever h_p is monotone. h_p is tabulated
// on a coarse pixel grid at n depths and inverted by monotone piecewise
// linear interpolation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lightflow/binary_io.hpp"
#include "lightflow/error.hpp"
#include "lightflow/parallel.hpp"
#include "lightflow/rig_geometry.hpp"

namespace lightflow {

/// h spans below this (log units) count as constant.
inline constexpr double kFlatEpsilon = 1e-6;

enum class NodeStatus : std::int32_t {
  Valid = 0,
  Degenerate = 1,   // h is constant over the working range
  NonMonotone = 2,  // h is not strictly monotone
  SignFlip = 3,     // a pattern flow changes direction within the range
  Unmapped = 4,     // some depth is behind a projector or off a pattern
};

inline const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Valid:
      return "valid";
    case NodeStatus::Degenerate:
      return "degenerate";
    case NodeStatus::NonMonotone:
      return "nonmonotone";
    case NodeStatus::SignFlip:
      return "sign_flip";
    case NodeStatus::Unmapped:
      return "unmapped";
  }
  return "unknown";
}

struct LutBuildOptions {
  double z_min = 0.4;
  double z_max = 1.2;
  int n_samples = 256;
  int grid_stride = 16;
  double flat_epsilon = kFlatEpsilon;
};

struct LutNode {
  /// Sign of dL_i/dz for pattern 1 and 2.
  int sign1 = 0;
  int sign2 = 0;
  /// +1 if h increases with z, -1 if it decreases, 0 if undetermined.
  int monotone_dir = 0;
  NodeStatus status = NodeStatus::Unmapped;

  bool operator==(const LutNode&) const = default;
};

class DepthRatioLUT {
 public:
  DepthRatioLUT() = default;

  /// Assembles a LUT from its parts, checking shape invariants.
  DepthRatioLUT(Size2 image_size, int grid_stride, std::vector<double> node_x,
                std::vector<double> node_y, std::vector<double> z_samples,
                std::vector<LutNode> nodes, std::vector<double> h_values)
      : image_size_(image_size),
        grid_stride_(grid_stride),
        node_x_(std::move(node_x)),
        node_y_(std::move(node_y)),
        z_(std::move(z_samples)),
        nodes_(std::move(nodes)),
        h_(std::move(h_values)) {
    if (node_x_.empty() || node_y_.empty() || z_.size() < 2) {
      throw DomainError("LUT needs a non-empty grid and at least two depth samples");
    }
    for (std::size_t k = 1; k < z_.size(); ++k) {
      if (!(z_[k] > z_[k - 1])) throw DomainError("LUT depth samples must increase strictly");
    }
    if (nodes_.size() != node_x_.size() * node_y_.size() ||
        h_.size() != nodes_.size() * z_.size()) {
      throw DomainError("LUT node table does not match its grid");
    }
  }

  Size2 image_size() const { return image_size_; }
  int grid_stride() const { return grid_stride_; }
  int grid_width() const { return static_cast<int>(node_x_.size()); }
  int grid_height() const { return static_cast<int>(node_y_.size()); }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<double>& node_x() const { return node_x_; }
  const std::vector<double>& node_y() const { return node_y_; }
  const std::vector<double>& z_samples() const { return z_; }
  double z_min() const { return z_.front(); }
  double z_max() const { return z_.back(); }

  std::size_t node_index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * node_x_.size() + ix;
  }
  Vec2 node_pixel(std::size_t index) const {
    return {node_x_[index % node_x_.size()], node_y_[index / node_x_.size()]};
  }
  const LutNode& node(std::size_t index) const { return nodes_[index]; }
  const std::vector<LutNode>& nodes() const { return nodes_; }
  std::span<const double> h_values(std::size_t index) const {
    return {h_.data() + index * z_.size(), z_.size()};
  }
  const std::vector<double>& raw_h() const { return h_; }

  /// Bilinear weights of the (up to) four grid nodes around a pixel.
  struct Blend {
    std::array<std::size_t, 4> node{};
    std::array<double, 4> weight{};
  };

  Blend blend_at(const Vec2& pixel) const {
    if (!(pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() <= image_size_.x() - 1 &&
          pixel.y() <= image_size_.y() - 1)) {
      throw DomainError("pixel lies outside the LUT image");
    }
    const auto [ix, tx] = locate(node_x_, pixel.x());
    const auto [iy, ty] = locate(node_y_, pixel.y());
    const int ix1 = std::min(ix + 1, grid_width() - 1);
    const int iy1 = std::min(iy + 1, grid_height() - 1);
    Blend b;
    b.node = {node_index(ix, iy), node_index(ix1, iy), node_index(ix, iy1), node_index(ix1, iy1)};
    b.weight = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    return b;
  }

  /// Blended h at depth sample k.
  double blended_h(const Blend& b, std::size_t k) const {
    double value = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (b.weight[j] != 0.0) value += b.weight[j] * h_[b.node[j] * z_.size() + k];
    }
    return value;
  }

  bool operator==(const DepthRatioLUT&) const = default;

 private:
  static std::pair<int, double> locate(const std::vector<double>& nodes, double v) {
    if (nodes.size() == 1) return {0, 0.0};
    const auto upper = std::upper_bound(nodes.begin(), nodes.end(), v);
    int i = static_cast<int>(upper - nodes.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(nodes.size()) - 2);
    const double t = (v - nodes[i]) / (nodes[i + 1] - nodes[i]);
    return {i, std::clamp(t, 0.0, 1.0)};
  }

  Size2 image_size_ = Size2::Zero();
  int grid_stride_ = 0;
  std::vector<double> node_x_;
  std::vector<double> node_y_;
  std::vector<double> z_;
  std::vector<LutNode> nodes_;
  std::vector<double> h_;
};

namespace lut_detail {

inline std::vector<double> grid_axis(int extent, int stride) {
  std::vector<double> axis;
  for (int v = 0; v < extent - 1; v += stride) axis.push_back(v);
  axis.push_back(extent - 1);
  if (axis.size() > 1 && axis[axis.size() - 2] == axis.back()) axis.pop_back();
  return axis;
}

/// Classifies a node from its tabulated h values. Geometry failures are
/// decided before this point.
inline LutNode classify(std::span<const double> h, int sign1, int sign2, double flat_epsilon) {
  LutNode node{sign1, sign2, 0, NodeStatus::Valid};
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  if (*hi - *lo < flat_epsilon) {
    node.status = NodeStatus::Degenerate;
    return node;
  }
  const int dir = h.back() > h.front() ? 1 : -1;
  for (std::size_t k = 1; k < h.size(); ++k) {
    if (!((h[k] - h[k - 1]) * dir > 0.0)) {
      node.status = NodeStatus::NonMonotone;
      return node;
    }
  }
  node.monotone_dir = dir;
  return node;
}

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace lut_detail

/// Tabulates h_p(z) for every grid node of the camera image.
inline DepthRatioLUT build_lut(const RigCalibration& rig, const LutBuildOptions& options) {
  if (!(options.z_min > 0.0) || !(options.z_max > options.z_min)) {
    throw DomainError("LUT depth range must satisfy 0 < z_min < z_max");
  }
  if (options.n_samples < 8) throw DomainError("LUT needs at least 8 depth samples");
  if (options.grid_stride < 1) throw DomainError("LUT grid stride must be positive");
  const auto sources = rig.sources();
  const CameraModel& camera = rig.camera;
  const auto node_x = lut_detail::grid_axis(camera.width(), options.grid_stride);
  const auto node_y = lut_detail::grid_axis(camera.height(), options.grid_stride);
  const std::size_t n = static_cast<std::size_t>(options.n_samples);

  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    z[k] = options.z_min + (options.z_max - options.z_min) * static_cast<double>(k) / (n - 1);
  }
  z.back() = options.z_max;

  const std::size_t nx = node_x.size();
  std::vector<LutNode> nodes(nx * node_y.size());
  std::vector<double> h(nodes.size() * n, 0.0);

  parallel_for_rows(static_cast<int>(node_y.size()), [&](int iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t index = iy * nx + ix;
      const Ray ray = camera_ray(camera, Vec2(node_x[ix], node_y[iy]));
      double* out = h.data() + index * n;
      int sign1 = 0;
      int sign2 = 0;
      LutNode& node = nodes[index];
      node.status = NodeStatus::Valid;
      try {
        for (std::size_t k = 0; k < n; ++k) {
          const double rate1 = line_index_rate(sources[0], ray, z[k]);
          const double rate2 = line_index_rate(sources[1], ray, z[k]);
          const int s1 = lut_detail::sign_of(rate1);
          const int s2 = lut_detail::sign_of(rate2);
          if (s1 == 0 || s2 == 0) {
            node.status = NodeStatus::Unmapped;
            break;
          }
          if (k == 0) {
            sign1 = s1;
            sign2 = s2;
          } else if (s1 != sign1 || s2 != sign2) {
            node.status = NodeStatus::SignFlip;
          }
          out[k] = std::log(std::abs(rate1)) - std::log(std::abs(rate2));
        }
      } catch (const DegenerateGeometryError&) {
        node.status = NodeStatus::Unmapped;
      } catch (const OffPatternError&) {
        node.status = NodeStatus::Unmapped;
      }
      if (node.status == NodeStatus::Valid) {
        node = lut_detail::classify({out, n}, sign1, sign2, options.flat_epsilon);
      } else {
        node.sign1 = sign1;
        node.sign2 = sign2;
        std::fill(out, out + n, 0.0);
      }
    }
  });

  const bool any_mapped = std::any_of(nodes.begin(), nodes.end(), [](const LutNode& node) {
    return node.status != NodeStatus::Unmapped && node.status != NodeStatus::SignFlip;
  });
  if (!any_mapped) throw BuildError("no LUT node has a usable flow ratio over the depth range");

  return DepthRatioLUT(camera.resolution, options.grid_stride, node_x, node_y, std::move(z),
                       std::move(nodes), std::move(h));
}

struct MonotonicityReport {
  std::size_t total_nodes = 0;
  std::size_t valid_nodes = 0;
  std::size_t degenerate_nodes = 0;
  std::size_t nonmonotone_nodes = 0;
  /// Nodes without a finite, sign-stable ratio (behind a projector, off a
  /// modulated pattern, or with a flow changing direction).
  std::size_t unmapped_nodes = 0;

  bool all_degenerate() const { return total_nodes > 0 && degenerate_nodes == total_nodes; }
  double degenerate_fraction() const {
    return total_nodes ? static_cast<double>(degenerate_nodes) / total_nodes : 0.0;
  }
};

inline MonotonicityReport validate_monotonic(const DepthRatioLUT& lut,
                                             double flat_epsilon = kFlatEpsilon) {
  MonotonicityReport report;
  report.total_nodes = lut.node_count();
  for (std::size_t i = 0; i < lut.node_count(); ++i) {
    const LutNode& stored = lut.node(i);
    if (stored.status == NodeStatus::Unmapped || stored.status == NodeStatus::SignFlip) {
      ++report.unmapped_nodes;
      continue;
    }
    switch (lut_detail::classify(lut.h_values(i), stored.sign1, stored.sign2, flat_epsilon).status) {
      case NodeStatus::Valid:
        ++report.valid_nodes;
        break;
      case NodeStatus::Degenerate:
        ++report.degenerate_nodes;
        break;
      default:
        ++report.nonmonotone_nodes;
        break;
    }
  }
  return report;
}

inline void write_report(std::ostream& out, const MonotonicityReport& r) {
  out << "total_nodes = " << r.total_nodes << "\n"
      << "valid_nodes = " << r.valid_nodes << "\n"
      << "degenerate_nodes = " << r.degenerate_nodes << "\n"
      << "nonmonotone_nodes = " << r.nonmonotone_nodes << "\n"
      << "unmapped_nodes = " << r.unmapped_nodes << "\n";
}

namespace lut_detail {

inline void require_valid(const DepthRatioLUT& lut, const DepthRatioLUT::Blend& b) {
  for (int j = 0; j < 4; ++j) {
    if (b.weight[j] != 0.0 && lut.node(b.node[j]).status != NodeStatus::Valid) {
      throw InvalidNodeError(std::string("LUT node is ") + to_string(lut.node(b.node[j]).status));
    }
  }
}

/// Piecewise-linear blended h at depth z; z must lie within the samples.
inline double blended_h_at(const DepthRatioLUT& lut, const DepthRatioLUT::Blend& b, double z) {
  const auto& zs = lut.z_samples();
  const auto upper = std::upper_bound(zs.begin(), zs.end(), z);
  std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(upper - zs.begin(), 1)) - 1;
  k = std::min(k, zs.size() - 2);
  const double t = (z - zs[k]) / (zs[k + 1] - zs[k]);
  return (1.0 - t) * lut.blended_h(b, k) + t * lut.blended_h(b, k + 1);
}

}  // namespace lut_detail

/// h_p(z) at an arbitrary pixel: bilinear blend of the surrounding nodes,
/// piecewise linear in z.
inline double h_eval(const DepthRatioLUT& lut, const Vec2& pixel, double z) {
  const auto blend = lut.blend_at(pixel);
  lut_detail::require_valid(lut, blend);
  if (!(z >= lut.z_min() && z <= lut.z_max())) throw RangeError("depth lies outside the LUT range");
  return lut_detail::blended_h_at(lut, blend, z);
}

enum class InversionStatus { Ok, InvalidNode, OutOfRange };

struct Inversion {
  double z = std::numeric_limits<double>::quiet_NaN();
  InversionStatus status = InversionStatus::InvalidNode;
};

/// Non-throwing inverse of h_eval at a pixel inside the image.
inline Inversion invert_log_ratio(const DepthRatioLUT& lut, const Vec2& pixel, double log_ratio) {
  const auto blend = lut.blend_at(pixel);
  int dir = 0;
  for (int j = 0; j < 4; ++j) {
    if (blend.weight[j] == 0.0) continue;
    const LutNode& node = lut.node(blend.node[j]);
    if (node.status != NodeStatus::Valid || (dir != 0 && node.monotone_dir != dir)) return {};
    dir = node.monotone_dir;
  }
  const auto& zs = lut.z_samples();
  const std::size_t n = zs.size();
  // Work on dir * h, which increases with k.
  const double target = dir * log_ratio;
  const double first = dir * lut.blended_h(blend, 0);
  const double last = dir * lut.blended_h(blend, n - 1);
  if (!(target >= first && target <= last)) {
    return {std::numeric_limits<double>::quiet_NaN(), InversionStatus::OutOfRange};
  }
  std::size_t lo = 0;
  std::size_t hi = n - 1;
  double h_lo = first;
  double h_hi = last;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    const double h_mid = dir * lut.blended_h(blend, mid);
    if (h_mid <= target) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
      h_hi = h_mid;
    }
  }
  const double t = h_hi > h_lo ? (target - h_lo) / (h_hi - h_lo) : 0.0;
  return {zs[lo] + t * (zs[hi] - zs[lo]), InversionStatus::Ok};
}

/// Depth whose tabulated log flow ratio at `pixel` equals `log_ratio`.
inline double h_invert(const DepthRatioLUT& lut, const Vec2& pixel, double log_ratio) {
  const Inversion inv = invert_log_ratio(lut, pixel, log_ratio);
  switch (inv.status) {
    case InversionStatus::Ok:
      return inv.z;
    case InversionStatus::OutOfRange:
      throw RangeError("log flow ratio lies outside the LUT range at this pixel");
    case InversionStatus::InvalidNode:
      break;
  }
  throw InvalidNodeError("LUT nodes around this pixel are not invertible");
}

/// Coarse one-sigma error of the measured log flow ratio. Each flow is
/// Δr / B, with Δr and B each read from two crossings located to
/// `precision` pixels; the two channel errors add in quadrature.
inline double log_ratio_error(double dr, double b, double precision) {
  if (!(dr > 0.0) || !(b > 0.0) || !(precision >= 0.0)) {
    throw DomainError("blur width and interval must be positive");
  }
  const double relative = std::hypot(precision / dr, precision / b);
  const double per_channel = std::sqrt(2.0) * relative;
  return std::sqrt(2.0) * per_channel;
}

/// Local slope dh/dz at a pixel, by central differences over one sample
/// spacing of the tabulated h.
inline double h_slope(const DepthRatioLUT& lut, const Vec2& pixel, double z) {
  const auto blend = lut.blend_at(pixel);
  lut_detail::require_valid(lut, blend);
  if (!(z >= lut.z_min() && z <= lut.z_max())) throw RangeError("depth lies outside the LUT range");
  const auto& zs = lut.z_samples();
  const double step = (zs.back() - zs.front()) / static_cast<double>(zs.size() - 1);
  const double lo = std::max(lut.z_min(), z - step);
  const double hi = std::min(lut.z_max(), z + step);
  return (lut_detail::blended_h_at(lut, blend, hi) - lut_detail::blended_h_at(lut, blend, lo)) /
         (hi - lo);
}

/// Expected depth error (meters) for blur width `dr` and line interval `b`
/// measured to `precision` pixels. Degenerate nodes give +infinity.
inline double error_budget(const DepthRatioLUT& lut, const Vec2& pixel, double z, double dr,
                           double b, double precision) {
  const double sigma = log_ratio_error(dr, b, precision);
  const auto blend = lut.blend_at(pixel);
  for (int j = 0; j < 4; ++j) {
    if (blend.weight[j] != 0.0 && lut.node(blend.node[j]).status == NodeStatus::Degenerate) {
      return std::numeric_limits<double>::infinity();
    }
  }
  const double slope = h_slope(lut, pixel, z);
  if (slope == 0.0) return std::numeric_limits<double>::infinity();
  return sigma / std::abs(slope);
}

// Binary layout, all little-endian:
//   char[8]  "LFLOWLUT"
//   u32      version (1)
//   u32      image width, image height, grid stride
//   u32      grid width (nx), grid height (ny), depth samples (n)
//   f64[nx]  node x pixels;  f64[ny] node y pixels;  f64[n] depths
//   per node, row-major: f64 status, sign1, sign2, monotone_dir, then f64[n] h
inline constexpr char kLutMagic[8] = {'L', 'F', 'L', 'O', 'W', 'L', 'U', 'T'};
inline constexpr std::uint32_t kLutVersion = 1;

inline void write_lut(std::ostream& out, const DepthRatioLUT& lut) {
  using binary::put;
  out.write(kLutMagic, sizeof(kLutMagic));
  put<std::uint32_t>(out, kLutVersion);
  put<std::uint32_t>(out, lut.image_size().x());
  put<std::uint32_t>(out, lut.image_size().y());
  put<std::uint32_t>(out, lut.grid_stride());
  put<std::uint32_t>(out, lut.grid_width());
  put<std::uint32_t>(out, lut.grid_height());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(lut.z_samples().size()));
  for (double v : lut.node_x()) put(out, v);
  for (double v : lut.node_y()) put(out, v);
  for (double v : lut.z_samples()) put(out, v);
  for (std::size_t i = 0; i < lut.node_count(); ++i) {
    const LutNode& node = lut.node(i);
    put<double>(out, static_cast<double>(node.status));
    put<double>(out, node.sign1);
    put<double>(out, node.sign2);
    put<double>(out, node.monotone_dir);
    for (double v : lut.h_values(i)) put(out, v);
  }
}

inline DepthRatioLUT read_lut(std::istream& in) {
  using binary::get;
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kLutMagic)) throw IoError("not a LUT file");
  if (get<std::uint32_t>(in) != kLutVersion) throw IoError("unsupported LUT version");
  // Separate statements: argument evaluation order is unspecified.
  const int width = static_cast<int>(get<std::uint32_t>(in));
  const int height = static_cast<int>(get<std::uint32_t>(in));
  const Size2 size(width, height);
  const int stride = static_cast<int>(get<std::uint32_t>(in));
  const std::uint32_t nx = get<std::uint32_t>(in);
  const std::uint32_t ny = get<std::uint32_t>(in);
  const std::uint32_t n = get<std::uint32_t>(in);
  constexpr std::uint32_t kMaxEntries = 1u << 28;
  if (nx == 0 || ny == 0 || n < 2 || std::uint64_t(nx) * ny * n > kMaxEntries) {
    throw IoError("LUT header has implausible dimensions");
  }
  auto read_doubles = [&](std::size_t count) {
    std::vector<double> v(count);
    for (auto& x : v) x = get<double>(in);
    return v;
  };
  auto node_x = read_doubles(nx);
  auto node_y = read_doubles(ny);
  auto z = read_doubles(n);
  std::vector<LutNode> nodes(std::size_t(nx) * ny);
  std::vector<double> h(nodes.size() * n);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double status = get<double>(in);
    if (!(status >= 0.0 && status <= 4.0) || status != std::floor(status)) {
      throw IoError("LUT node has an invalid status");
    }
    nodes[i].status = static_cast<NodeStatus>(static_cast<int>(status));
    nodes[i].sign1 = static_cast<int>(get<double>(in));
    nodes[i].sign2 = static_cast<int>(get<double>(in));
    nodes[i].monotone_dir = static_cast<int>(get<double>(in));
    for (std::size_t k = 0; k < n; ++k) h[i * n + k] = get<double>(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after LUT data");
  try {
    return DepthRatioLUT(size, stride, std::move(node_x), std::move(node_y), std::move(z),
                         std::move(nodes), std::move(h));
  } catch (const DomainError& e) {
    throw IoError(std::string("corrupt LUT: ") + e.what());
  }
}

inline void save_lut(const DepthRatioLUT& lut, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_lut(out, lut);
  if (!out) throw IoError("failed writing " + path.string());
}

inline DepthRatioLUT load_lut(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_lut(in);
}

/// Human-readable dump: one header block, then one line per node.
inline void write_lut_text(std::ostream& out, const DepthRatioLUT& lut) {
  out << "# image " << lut.image_size().x() << " " << lut.image_size().y() << " stride "
      << lut.grid_stride() << " grid " << lut.grid_width() << " " << lut.grid_height() << "\n";
  out << "# z";
  out << std::setprecision(17);
  for (double z : lut.z_samples()) out << " " << z;
  out << "\n# x y status sign1 sign2 dir h...\n";
  for (std::size_t i = 0; i < lut.node_count(); ++i) {
    const Vec2 p = lut.node_pixel(i);
    const LutNode& node = lut.node(i);
    out << p.x() << " " << p.y() << " " << to_string(node.status) << " " << node.sign1 << " "
        << node.sign2 << " " << node.monotone_dir;
    for (double v : lut.h_values(i)) out << " " << v;
    out << "\n";
  }
}

}  // namespace lightflow
