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

// Rig calibration files.
//
//   rig.id = converging            # optional
//   units = m                      # required; only meters are accepted
//   camera.focal_px = 600
//   camera.principal = 400 300     # optional, defaults to the image center
//   camera.resolution = 800 600
//   projector1.focal_px = 600
//   projector1.principal = 640 400
//   projector1.resolution = 1280 800
//   projector1.rotation = r00 r01 r02 r10 r11 r12 r20 r21 r22   # row-major
//   projector1.translation = tx ty tz
//   projector1.pattern.kind = uniform | modulated
//   projector1.pattern.interval = 24
//   projector1.pattern.line_width = 3
//   projector1.pattern.modulation = none | wide_right | wide_left
//   projector1.pattern.channel = red | blue
//
// A projector carrying two patterns uses `patternN.` prefixes
// (`projector1.pattern1.kind`, `projector1.pattern2.kind`, ...). Unknown keys
// are rejected.

#include <filesystem>
#include <string>

#include "lightflow/keyvalue.hpp"
#include "lightflow/rig_geometry.hpp"

namespace lightflow {

namespace rig_io_detail {

inline std::string to_string(PatternKind kind) {
  return kind == PatternKind::UniformLines ? "uniform" : "modulated";
}

inline std::string to_string(Modulation m) {
  switch (m) {
    case Modulation::WideRight:
      return "wide_right";
    case Modulation::WideLeft:
      return "wide_left";
    case Modulation::None:
      break;
  }
  return "none";
}

inline std::string to_string(Channel c) { return c == Channel::Red ? "red" : "blue"; }

inline PatternKind parse_kind(const std::string& s) {
  if (s == "uniform") return PatternKind::UniformLines;
  if (s == "modulated") return PatternKind::ModulatedLines;
  throw ConfigError("unknown pattern kind `" + s + "`");
}

inline Modulation parse_modulation(const std::string& s) {
  if (s == "none") return Modulation::None;
  if (s == "wide_right") return Modulation::WideRight;
  if (s == "wide_left") return Modulation::WideLeft;
  throw ConfigError("unknown modulation `" + s + "`");
}

inline Channel parse_channel(const std::string& s) {
  if (s == "red") return Channel::Red;
  if (s == "blue") return Channel::Blue;
  throw ConfigError("unknown channel `" + s + "`");
}

inline Size2 read_size(const KeyValueFile& kv, const std::string& key) {
  const auto v = kv.get_doubles(key, 2);
  if (v[0] != static_cast<int>(v[0]) || v[1] != static_cast<int>(v[1])) {
    throw ConfigError("`" + key + "` expects integers");
  }
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

inline Vec2 read_principal(const KeyValueFile& kv, const std::string& key, const Size2& size) {
  if (!kv.has(key)) return {size.x() / 2.0, size.y() / 2.0};
  const auto v = kv.get_doubles(key, 2);
  return {v[0], v[1]};
}

inline PatternSpec read_pattern(const KeyValueFile& kv, const std::string& prefix) {
  PatternSpec p;
  p.kind = parse_kind(kv.get_string(prefix + "kind"));
  p.interval = kv.get_double(prefix + "interval");
  p.line_width = kv.get_double(prefix + "line_width");
  if (const auto m = kv.find_string(prefix + "modulation")) p.modulation = parse_modulation(*m);
  p.channel = parse_channel(kv.get_string(prefix + "channel"));
  return p;
}

inline void write_pattern(KeyValueFile& kv, const std::string& prefix, const PatternSpec& p) {
  kv.set(prefix + "kind", to_string(p.kind));
  kv.set(prefix + "interval", p.interval);
  kv.set(prefix + "line_width", p.line_width);
  kv.set(prefix + "modulation", to_string(p.modulation));
  kv.set(prefix + "channel", to_string(p.channel));
}

}  // namespace rig_io_detail

inline RigCalibration rig_from_keyvalue(const KeyValueFile& kv) {
  using namespace rig_io_detail;
  RigCalibration rig;
  if (const auto id = kv.find_string("rig.id")) rig.id = *id;
  if (kv.get_string("units") != "m") throw ConfigError(kv.source() + ": units must be `m`");

  rig.camera.focal_px = kv.get_double("camera.focal_px");
  rig.camera.resolution = read_size(kv, "camera.resolution");
  rig.camera.principal_point = read_principal(kv, "camera.principal", rig.camera.resolution);

  for (int n = 1; n <= 2; ++n) {
    const std::string prefix = "projector" + std::to_string(n) + ".";
    if (!kv.has(prefix + "focal_px")) {
      if (n == 1) throw ConfigError(kv.source() + ": missing projector1");
      break;
    }
    ProjectorModel proj;
    proj.focal_px = kv.get_double(prefix + "focal_px");
    proj.resolution = read_size(kv, prefix + "resolution");
    proj.principal_point = read_principal(kv, prefix + "principal", proj.resolution);
    const auto r = kv.get_doubles(prefix + "rotation", 9);
    proj.rotation << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
    const auto t = kv.get_doubles(prefix + "translation", 3);
    proj.translation = Vec3(t[0], t[1], t[2]);
    const bool single = kv.has(prefix + "pattern.kind");
    const bool dual = kv.has(prefix + "pattern1.kind");
    if (single == dual) {
      throw ConfigError(kv.source() + ": " + prefix + " needs either `pattern.` or `pattern1.`/`pattern2.` keys");
    }
    if (single) {
      proj.patterns.push_back(read_pattern(kv, prefix + "pattern."));
    } else {
      proj.patterns.push_back(read_pattern(kv, prefix + "pattern1."));
      proj.patterns.push_back(read_pattern(kv, prefix + "pattern2."));
    }
    rig.projectors.push_back(std::move(proj));
  }
  kv.reject_unread_keys();
  try {
    rig.validate();
  } catch (const DomainError& e) {
    throw ConfigError(kv.source() + ": " + e.what());
  }
  return rig;
}

inline KeyValueFile rig_to_keyvalue(const RigCalibration& rig) {
  using namespace rig_io_detail;
  KeyValueFile kv;
  kv.set("rig.id", rig.id);
  kv.set("units", std::string("m"));
  kv.set("camera.focal_px", rig.camera.focal_px);
  kv.set("camera.principal", {rig.camera.principal_point.x(), rig.camera.principal_point.y()});
  kv.set("camera.resolution",
         {double(rig.camera.resolution.x()), double(rig.camera.resolution.y())});
  for (std::size_t n = 0; n < rig.projectors.size(); ++n) {
    const auto& proj = rig.projectors[n];
    const std::string prefix = "projector" + std::to_string(n + 1) + ".";
    kv.set(prefix + "focal_px", proj.focal_px);
    kv.set(prefix + "principal", {proj.principal_point.x(), proj.principal_point.y()});
    kv.set(prefix + "resolution", {double(proj.resolution.x()), double(proj.resolution.y())});
    std::vector<double> r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) r.push_back(proj.rotation(i, j));
    }
    kv.set(prefix + "rotation", r);
    kv.set(prefix + "translation", {proj.translation.x(), proj.translation.y(), proj.translation.z()});
    if (proj.patterns.size() == 1) {
      write_pattern(kv, prefix + "pattern.", proj.patterns[0]);
    } else {
      for (std::size_t k = 0; k < proj.patterns.size(); ++k) {
        write_pattern(kv, prefix + "pattern" + std::to_string(k + 1) + ".", proj.patterns[k]);
      }
    }
  }
  return kv;
}

inline RigCalibration load_rig(const std::filesystem::path& path) {
  return rig_from_keyvalue(KeyValueFile::load(path));
}

inline void save_rig(const RigCalibration& rig, const std::filesystem::path& path) {
  rig_to_keyvalue(rig).save(path);
}

}  // namespace lightflow
