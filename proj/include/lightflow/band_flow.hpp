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

// Light flow from blurred line patterns.
//
// A projected line that sweeps across the surface during the exposure leaves
// a band in the image. Along a scanline the band width Δr, less the static
// apparent line width, divided by the local line interval B is the distance
// the pattern moved in line-index units. Bands are found per scanline by
// adaptive thresholding with sub-pixel crossings, then the sparse per-band
// flows are interpolated along rows and smoothed into a dense field.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lightflow/error.hpp"
#include "lightflow/image.hpp"
#include "lightflow/parallel.hpp"
#include "lightflow/rig_geometry.hpp"

namespace lightflow {

struct ScanProfile {
  int row = 0;
  Channel channel = Channel::Red;
  std::vector<double> intensities;
};

enum class Polarity { Rise, Fall };

struct Crossing {
  double position = 0.0;
  Polarity polarity = Polarity::Rise;
};

struct BinarizeOptions {
  /// Local-mean window in pixels (odd, >= 3). The mean is Gaussian weighted
  /// with standard deviation window / 2, which averages a periodic line
  /// train without ripple once the window spans about two intervals.
  int window = 61;
  /// Threshold = local mean * (1 + offset).
  double offset = 0.1;
  /// Absolute floor on the threshold; keeps sensor noise in dark regions
  /// from producing crossings.
  double min_threshold = 0.0;
};

/// Gaussian-weighted local mean, normalized over in-bounds samples.
inline std::vector<double> local_mean(std::span<const double> profile, int window) {
  const int n = static_cast<int>(profile.size());
  const double sigma = window / 2.0;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(radius + 1);
  for (int d = 0; d <= radius; ++d) kernel[d] = std::exp(-0.5 * d * d / (sigma * sigma));
  std::vector<double> mean(n);
  for (int x = 0; x < n; ++x) {
    double sum = 0.0;
    double weight = 0.0;
    const int lo = std::max(0, x - radius);
    const int hi = std::min(n - 1, x + radius);
    for (int i = lo; i <= hi; ++i) {
      const double w = kernel[std::abs(i - x)];
      sum += w * profile[i];
      weight += w;
    }
    mean[x] = sum / weight;
  }
  return mean;
}

/// Threshold crossings of a scanline, alternating rise/fall, located by
/// linear interpolation between the two straddling samples.
inline std::vector<Crossing> adaptive_binarize(std::span<const double> profile,
                                               const BinarizeOptions& options) {
  if (options.window < 3 || options.window % 2 == 0) {
    throw DomainError("binarization window must be odd and at least 3");
  }
  std::vector<Crossing> crossings;
  if (profile.size() < 2) return crossings;
  const auto mean = local_mean(profile, options.window);
  const std::size_t n = profile.size();
  std::vector<double> excess(n);
  for (std::size_t x = 0; x < n; ++x) {
    excess[x] = profile[x] - std::max(mean[x] * (1.0 + options.offset), options.min_threshold);
  }
  for (std::size_t x = 0; x + 1 < n; ++x) {
    const bool above = excess[x] > 0.0;
    const bool next_above = excess[x + 1] > 0.0;
    if (above == next_above) continue;
    const double t = excess[x] / (excess[x] - excess[x + 1]);
    crossings.push_back({static_cast<double>(x) + t, next_above ? Polarity::Rise : Polarity::Fall});
  }
  return crossings;
}

inline std::vector<Crossing> adaptive_binarize(const ScanProfile& profile, int window, double offset) {
  return adaptive_binarize(profile.intensities, BinarizeOptions{window, offset, 0.0});
}

struct BlurBand {
  int row = 0;
  double left_edge = 0.0;
  double right_edge = 0.0;
  /// Center-to-center distance to the next band on the row; NaN for the last.
  double interval_to_next = std::numeric_limits<double>::quiet_NaN();
  /// Center-to-center distance to the previous band; NaN for the first.
  double interval_to_prev = std::numeric_limits<double>::quiet_NaN();
  /// Apparent line interval B at this band: half the distance between its
  /// two neighbours' centers.
  double local_interval = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;

  double center() const { return 0.5 * (left_edge + right_edge); }
  double width() const { return right_edge - left_edge; }
};

struct DetectionConfig {
  BinarizeOptions binarize{61, 0.1, 0.04};
  /// Accepted range of the apparent line interval B, in camera pixels.
  double b_min = 12.0;
  double b_max = 60.0;
  /// Largest accepted |B_next - B_prev| / B. Bands beside a truncated or
  /// missing neighbour fail this test.
  double max_interval_asymmetry = 0.3;
  /// Gaps narrower than this between two bands are closed.
  double min_gap = 3.0;
  /// Bands narrower than this are discarded as noise.
  double min_band_width = 1.0;
  /// Re-threshold interior bands against the mean light of their own period.
  bool refine_threshold = true;
  /// Largest accepted darkest-gap level beside a band, as a fraction of the
  /// band's peak; higher gaps mean overlapping bands. 1 disables the test.
  double max_gap_floor = 0.3;
  /// Also require both neighbours to pass the interval and gap tests.
  bool require_sound_neighbours = true;
  /// See FlowModel::max_occupancy.
  double max_occupancy = 0.95;

  void validate() const {
    if (!(b_min > 0.0) || !(b_max > b_min)) throw ConfigError("band interval range needs 0 < B_min < B_max");
    if (binarize.window < 3 || binarize.window % 2 == 0) {
      throw ConfigError("binarization window must be odd and at least 3");
    }
    if (!(max_interval_asymmetry > 0.0)) throw ConfigError("interval asymmetry bound must be positive");
  }
};

namespace band_detail {

inline void assign_intervals(std::vector<BlurBand>& bands) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < bands.size(); ++k) {
    BlurBand& band = bands[k];
    band.interval_to_next = k + 1 < bands.size() ? bands[k + 1].center() - band.center() : nan;
    band.interval_to_prev = k > 0 ? band.center() - bands[k - 1].center() : nan;
    band.local_interval = 0.5 * (band.interval_to_next + band.interval_to_prev);
  }
}

// Re-thresholds each interior band against the mean of its own period: the
// light between the two gap midpoints around it, divided by the local
// interval. Unlike a windowed mean this ignores anything beyond the
// neighbours, such as a dark background next to the surface.
inline void refine_edges(std::span<const double> row, std::vector<BlurBand>& bands,
                         const DetectionConfig& config) {
  const int n = static_cast<int>(row.size());
  std::vector<BlurBand> refined = bands;
  for (std::size_t k = 1; k + 1 < bands.size(); ++k) {
    const BlurBand& band = bands[k];
    if (!(band.local_interval > 0.0)) continue;
    const double m1 = 0.5 * (bands[k - 1].right_edge + band.left_edge);
    const double m2 = 0.5 * (band.right_edge + bands[k + 1].left_edge);
    const int lo = std::max(0, static_cast<int>(std::ceil(m1)));
    const int hi = std::min(n - 1, static_cast<int>(std::floor(m2)));
    if (hi - lo < 2) continue;
    double energy = 0.0;
    for (int i = lo; i <= hi; ++i) energy += row[i];
    const double threshold = std::max((1.0 + config.binarize.offset) * energy / band.local_interval,
                                      config.binarize.min_threshold);
    auto crossing = [&](int i) { return i + (threshold - row[i]) / (row[i + 1] - row[i]); };
    int rise = -1;
    for (int i = lo; i < hi; ++i) {
      if (row[i] <= threshold && row[i + 1] > threshold) {
        rise = i;
        break;
      }
    }
    int fall = -1;
    for (int i = hi - 1; i >= lo; --i) {
      if (row[i] > threshold && row[i + 1] <= threshold) {
        fall = i;
        break;
      }
    }
    if (rise < 0 || fall < 0 || fall < rise) continue;
    refined[k].left_edge = crossing(rise);
    refined[k].right_edge = crossing(fall);
  }
  bands = std::move(refined);
}

// A band is sound when both its intervals are in range and agree, and the
// gaps beside it fall back to the dark level. Once blur plus line width exceeds one
// interval, neighbouring bands run into each other and the gaps stay lit;
// such bands still threshold into a regular train, but their widths no
// longer measure the motion. A band is valid when it and both neighbours
// are sound; a neighbour cut short by a silhouette or merged with another
// shifts its center and so skews B.
inline void classify(std::span<const double> row, std::vector<BlurBand>& bands,
                     const DetectionConfig& config) {
  const int n = static_cast<int>(row.size());
  auto extreme = [&](double from, double to, bool want_max) {
    const int lo = std::clamp(static_cast<int>(std::floor(from)), 0, n - 1);
    const int hi = std::clamp(static_cast<int>(std::ceil(to)), 0, n - 1);
    double v = row[lo];
    for (int i = lo; i <= hi; ++i) v = want_max ? std::max(v, row[i]) : std::min(v, row[i]);
    return v;
  };
  auto in_range = [&](double b) { return b >= config.b_min && b <= config.b_max; };
  std::vector<bool> sound(bands.size(), false);
  for (std::size_t k = 1; k + 1 < bands.size(); ++k) {
    const BlurBand& band = bands[k];
    if (!in_range(band.interval_to_next) || !in_range(band.interval_to_prev)) continue;
    const double peak = extreme(band.left_edge, band.right_edge, true);
    const double floor_left = extreme(bands[k - 1].right_edge, band.left_edge, false);
    const double floor_right = extreme(band.right_edge, bands[k + 1].left_edge, false);
    const double asymmetry = std::abs(band.interval_to_next - band.interval_to_prev) / band.local_interval;
    sound[k] = asymmetry <= config.max_interval_asymmetry &&
               std::max(floor_left, floor_right) <= config.max_gap_floor * peak;
  }
  for (std::size_t k = 0; k < bands.size(); ++k) {
    bands[k].valid = sound[k];
    if (sound[k] && config.require_sound_neighbours) bands[k].valid = sound[k - 1] && sound[k + 1];
  }
}

}  // namespace band_detail

/// Pairs the crossings of one scanline into bands and applies the interval
/// outlier rules. Unpaired crossings at either end of the row are dropped.
inline std::vector<BlurBand> detect_bands_in_row(std::span<const double> intensities, int row,
                                                 const DetectionConfig& config) {
  const auto crossings = adaptive_binarize(intensities, config.binarize);
  std::vector<BlurBand> bands;
  std::size_t i = 0;
  if (!crossings.empty() && crossings.front().polarity == Polarity::Fall) i = 1;
  for (; i + 1 < crossings.size(); i += 2) {
    BlurBand band;
    band.row = row;
    band.left_edge = crossings[i].position;
    band.right_edge = crossings[i + 1].position;
    if (!bands.empty() && band.left_edge - bands.back().right_edge < config.min_gap) {
      bands.back().right_edge = band.right_edge;
    } else {
      bands.push_back(band);
    }
  }
  std::erase_if(bands, [&](const BlurBand& b) { return b.width() < config.min_band_width; });

  band_detail::assign_intervals(bands);
  if (config.refine_threshold && bands.size() >= 3) {
    band_detail::refine_edges(intensities, bands, config);
    band_detail::assign_intervals(bands);
  }
  band_detail::classify(intensities, bands, config);
  return bands;
}

/// Bands of every row of a single-channel image.
inline std::vector<std::vector<BlurBand>> detect_bands(const Image<float>& channel,
                                                       const DetectionConfig& config) {
  if (channel.channels() != 1) throw DomainError("band detection needs a single-channel image");
  config.validate();
  std::vector<std::vector<BlurBand>> rows(channel.height());
  parallel_for_rows(channel.height(), [&](int y) {
    const auto source = channel.row(y);
    const std::vector<double> profile(source.begin(), source.end());
    rows[y] = detect_bands_in_row(profile, y, config);
  });
  return rows;
}

/// One pattern's plane of an RGB frame. `unmix`, when given, maps the
/// observed (red, blue) pair to the (red, blue) pattern intensities.
inline Image<float> extract_channel(const Image<float>& rgb, Channel channel,
                                    const std::optional<Eigen::Matrix2d>& unmix = std::nullopt) {
  if (rgb.channels() != 3) throw DomainError("expected an RGB frame");
  if (!unmix) return rgb.channel(rgb_index(channel));
  const int out_row = channel == Channel::Red ? 0 : 1;
  Image<float> out(rgb.width(), rgb.height(), 1);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      const double v = (*unmix)(out_row, 0) * rgb(x, y, 0) + (*unmix)(out_row, 1) * rgb(x, y, 2);
      out(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

struct FlowSample {
  int row = 0;
  double x = 0.0;
  /// Pattern displacement over the exposure, in line-index units.
  double flow = 0.0;
};

/// How a band's width relates to the pattern motion.
struct FlowModel {
  /// Lit fraction of one line period (line width / interval); the static
  /// apparent line width is duty * B.
  double duty = 0.0;
  /// Threshold offset used during detection. Thresholding at a fraction of
  /// the band height trims both ramps of a blurred band by an amount
  /// proportional to the motion; when set, that trimming is undone.
  double threshold_offset = 0.0;
  bool compensate_threshold = true;
  /// Samples whose blur plus line width covers more than this fraction of
  /// the interval are dropped: their bands touch, so the gaps carry no edge.
  double max_occupancy = 0.95;

  /// Factor restoring the full motion extent from the thresholded width.
  double width_gain() const {
    if (!compensate_threshold) return 1.0;
    const double trimmed = 2.0 * (1.0 + threshold_offset) * duty;
    if (!(trimmed < 1.0)) throw DomainError("line duty too large for threshold compensation");
    return 1.0 / (1.0 - trimmed);
  }
};

inline FlowModel flow_model_for(const PatternSpec& pattern, const DetectionConfig& config) {
  return {pattern.duty(), config.binarize.offset, true, config.max_occupancy};
}

/// Sparse flow Δr_net / B at each valid band center.
inline std::vector<FlowSample> flow_from_bands(std::span<const BlurBand> bands, const FlowModel& model) {
  const double gain = model.width_gain();
  std::vector<FlowSample> samples;
  for (const BlurBand& band : bands) {
    const double b = band.local_interval;
    if (!band.valid || !(b > 0.0)) continue;
    const double static_width = model.duty * b;
    const double net = std::max(band.width() - static_width, 0.0) * gain;
    if (net / b + model.duty > model.max_occupancy) continue;
    samples.push_back({band.row, band.center(), net / b});
  }
  return samples;
}

inline std::vector<FlowSample> flow_from_bands(const std::vector<std::vector<BlurBand>>& rows,
                                               const FlowModel& model) {
  std::vector<FlowSample> samples;
  for (const auto& row : rows) {
    auto part = flow_from_bands(std::span<const BlurBand>(row), model);
    samples.insert(samples.end(), part.begin(), part.end());
  }
  return samples;
}

struct FlowField {
  Image<double> flow;
  Mask mask;
  Channel channel = Channel::Red;

  FlowField() = default;
  FlowField(int width, int height, Channel c)
      : flow(width, height, 1, 0.0), mask(width, height, 1, 0), channel(c) {}

  int width() const { return flow.width(); }
  int height() const { return flow.height(); }
  bool valid(int x, int y) const { return mask(x, y) != 0; }
};

struct InterpolationOptions {
  /// Standard deviation of the Gaussian smoothing, pixels; 0 disables it.
  double sigma = 2.0;
  /// Samples further apart than this along a row are not joined.
  double max_gap = 100.0;
};

/// Gaussian smoothing normalized over the mask; values outside the mask are
/// ignored and stay untouched.
inline void smooth_masked(Image<double>& field, const Mask& mask, double sigma) {
  if (!(sigma > 0.0)) return;
  const int w = field.width();
  const int h = field.height();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(radius + 1);
  for (int d = 0; d <= radius; ++d) kernel[d] = std::exp(-0.5 * d * d / (sigma * sigma));

  Image<double> num(w, h, 1, 0.0);
  Image<double> den(w, h, 1, 0.0);
  parallel_for_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      double m = 0.0;
      for (int i = std::max(0, x - radius); i <= std::min(w - 1, x + radius); ++i) {
        if (!mask(i, y)) continue;
        const double k = kernel[std::abs(i - x)];
        s += k * field(i, y);
        m += k;
      }
      num(x, y) = s;
      den(x, y) = m;
    }
  });
  parallel_for_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      double s = 0.0;
      double m = 0.0;
      for (int j = std::max(0, y - radius); j <= std::min(h - 1, y + radius); ++j) {
        const double k = kernel[std::abs(j - y)];
        s += k * num(x, j);
        m += k * den(x, j);
      }
      field(x, y) = s / m;
    }
  });
}

/// Dense flow from sparse band samples: piecewise linear along each row
/// between neighbouring samples, no extrapolation, then masked smoothing.
inline FlowField interpolate_flow(std::span<const FlowSample> samples, Size2 image_size,
                                  const InterpolationOptions& options, Channel channel = Channel::Red) {
  FlowField field(image_size.x(), image_size.y(), channel);
  std::vector<std::vector<FlowSample>> rows(image_size.y());
  for (const FlowSample& s : samples) {
    if (s.row >= 0 && s.row < image_size.y() && std::isfinite(s.flow)) rows[s.row].push_back(s);
  }
  const int width = image_size.x();
  parallel_for_rows(image_size.y(), [&](int y) {
    auto& row = rows[y];
    if (row.size() < 2) return;
    std::sort(row.begin(), row.end(), [](const FlowSample& a, const FlowSample& b) { return a.x < b.x; });
    for (std::size_t k = 0; k + 1 < row.size(); ++k) {
      const FlowSample& a = row[k];
      const FlowSample& b = row[k + 1];
      const double span = b.x - a.x;
      if (!(span > 0.0) || span > options.max_gap) continue;
      const int x0 = std::max(0, static_cast<int>(std::ceil(a.x)));
      const int x1 = std::min(width - 1, static_cast<int>(std::floor(b.x)));
      for (int x = x0; x <= x1; ++x) {
        const double t = (x - a.x) / span;
        field.flow(x, y) = (1.0 - t) * a.flow + t * b.flow;
        field.mask(x, y) = 1;
      }
    }
  });
  smooth_masked(field.flow, field.mask, options.sigma);
  return field;
}

struct ChannelFlow {
  std::vector<std::vector<BlurBand>> bands;
  std::vector<FlowSample> samples;
  FlowField field;

  std::size_t band_count() const {
    std::size_t n = 0;
    for (const auto& r : bands) n += r.size();
    return n;
  }
  std::size_t invalid_band_count() const {
    std::size_t n = 0;
    for (const auto& r : bands) {
      for (const auto& b : r) n += b.valid ? 0 : 1;
    }
    return n;
  }
};

/// Band detection, per-band flow and dense interpolation for one channel.
inline ChannelFlow measure_flow(const Image<float>& channel, const PatternSpec& pattern,
                                const DetectionConfig& detection,
                                const InterpolationOptions& interpolation) {
  ChannelFlow out;
  out.bands = detect_bands(channel, detection);
  out.samples = flow_from_bands(out.bands, flow_model_for(pattern, detection));
  out.field = interpolate_flow(out.samples, Size2(channel.width(), channel.height()), interpolation,
                               pattern.channel);
  return out;
}

/// Text table of detected bands: row, left, right, B, valid.
inline void write_bands_text(std::ostream& out, const std::vector<std::vector<BlurBand>>& rows) {
  out << "# row left right B valid\n";
  for (const auto& row : rows) {
    for (const BlurBand& b : row) {
      out << b.row << " " << b.left_edge << " " << b.right_edge << " " << b.local_interval << " "
          << (b.valid ? 1 : 0) << "\n";
    }
  }
}

}  // namespace lightflow
