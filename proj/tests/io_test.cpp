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


#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "lightflow/image_io.hpp"
#include "lightflow/keyvalue.hpp"
#include "lightflow/presets.hpp"
#include "lightflow/rig_io.hpp"
#include "test_support.hpp"

namespace lightflow {
namespace {

TEST(KeyValue, ParseCommentsAndTypes) {
  const auto kv = KeyValueFile::parse_string("# header\na = 1.5  # trailing\nb = 1 2 3\n\nname = plane\n");
  EXPECT_DOUBLE_EQ(kv.get_double("a"), 1.5);
  EXPECT_EQ(kv.get_doubles("b", 3), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(kv.get_string("name"), "plane");
  EXPECT_EQ(kv.get_double("missing", 4.0), 4.0);
}

TEST(KeyValue, Errors) {
  EXPECT_THROW(KeyValueFile::parse_string("novalue\n"), ConfigError);
  EXPECT_THROW(KeyValueFile::parse_string("a = 1\na = 2\n"), ConfigError);
  const auto kv = KeyValueFile::parse_string("a = x\nb = 1.5\nc = 1\n");
  EXPECT_THROW(kv.get_double("a"), ConfigError);
  EXPECT_THROW(kv.get_int("b"), ConfigError);
  EXPECT_THROW(kv.get_doubles("c", 2), ConfigError);
  EXPECT_THROW(kv.get_string("zzz"), ConfigError);
  kv.reject_unread_keys();
  const auto partial = KeyValueFile::parse_string("a = 1\nb = 2\n");
  partial.get_double("a");
  EXPECT_THROW(partial.reject_unread_keys(), ConfigError);
}

TEST(KeyValue, NumbersSurviveSerialization) {
  KeyValueFile kv;
  kv.set("x", 0.1 + 0.2);
  kv.set("v", {1e-300, -2.5, 1.0 / 3.0});
  const auto back = KeyValueFile::parse_string(kv.serialize());
  EXPECT_EQ(back.get_double("x"), 0.1 + 0.2);
  EXPECT_EQ(back.get_doubles("v"), (std::vector<double>{1e-300, -2.5, 1.0 / 3.0}));
}

TEST(RigFile, RoundTripForEveryPreset) {
  for (const RigCalibration& rig : {presets::converging_rig(), presets::parallel_rig(),
                                    presets::fronto_parallel_rig(), presets::single_projector_rig()}) {
    const RigCalibration back = rig_from_keyvalue(KeyValueFile::parse_string(rig_to_keyvalue(rig).serialize()));
    EXPECT_EQ(back.id, rig.id);
    EXPECT_EQ(back.camera.resolution, rig.camera.resolution);
    ASSERT_EQ(back.projectors.size(), rig.projectors.size());
    for (std::size_t i = 0; i < rig.projectors.size(); ++i) {
      EXPECT_EQ(back.projectors[i].rotation, rig.projectors[i].rotation);
      EXPECT_EQ(back.projectors[i].translation, rig.projectors[i].translation);
      EXPECT_EQ(back.projectors[i].patterns, rig.projectors[i].patterns);
    }
  }
}

TEST(RigFile, RejectsUnknownKeysAndUnits) {
  std::string text = rig_to_keyvalue(presets::converging_rig()).serialize();
  EXPECT_THROW(rig_from_keyvalue(KeyValueFile::parse_string(text + "camera.skew = 0\n")), ConfigError);
  const auto pos = text.find("units = m");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "units = mm");
  EXPECT_THROW(rig_from_keyvalue(KeyValueFile::parse_string(text)), ConfigError);
}

TEST(RigFile, ShippedConfigsLoad) {
  const std::filesystem::path dir = LIGHTFLOW_CONFIG_DIR;
  EXPECT_EQ(load_rig(dir / "converging_rig.txt").id, "converging");
  EXPECT_EQ(load_rig(dir / "single_projector_rig.txt").projectors.size(), 1u);
}

TEST(Netpbm, PpmAndPgmRoundTrip) {
  Image<float> rgb(7, 5, 3);
  for (std::size_t i = 0; i < rgb.data().size(); ++i) rgb.data()[i] = static_cast<float>(i % 256) / 255.0f;
  std::stringstream s;
  write_ppm(s, rgb);
  EXPECT_EQ(s.str().substr(0, 2), "P6");
  const Image<float> back = read_ppm(s);
  EXPECT_EQ(back.data(), rgb.data());

  Image<float> grey(4, 3, 1, 0.5f);
  std::stringstream g;
  write_pgm(g, grey);
  EXPECT_EQ(read_pgm(g).data(), quantize_8bit(grey).data());
}

TEST(Netpbm, RejectsWrongMagicAndTruncation) {
  std::stringstream pgm("P5\n2 2\n255\n\x01\x02\x03\x04");
  EXPECT_THROW(read_ppm(pgm), IoError);
  std::stringstream cut("P6\n4 4\n255\nabc");
  EXPECT_THROW(read_ppm(cut), IoError);
}

TEST(Pfm, RoundTripKeepsNaNAndIsLittleEndian) {
  Image<float> img(3, 2, 1, 0.25f);
  img(1, 0) = std::numeric_limits<float>::quiet_NaN();
  img(2, 1) = -7.5f;
  std::stringstream s;
  write_pfm(s, img);
  const std::string bytes = s.str();
  EXPECT_NE(bytes.find("-1"), std::string::npos);
  // Bottom row first: pixel (0, 1) = 0.25f = 0x3e800000 stored little-endian.
  const std::size_t payload = bytes.size() - 3 * 2 * 4;
  EXPECT_EQ(static_cast<unsigned char>(bytes[payload + 3]), 0x3e);
  EXPECT_EQ(static_cast<unsigned char>(bytes[payload + 2]), 0x80);
  const Image<float> back = read_pfm(s);
  EXPECT_TRUE(std::isnan(back(1, 0)));
  EXPECT_EQ(back(2, 1), -7.5f);
  EXPECT_EQ(back(0, 0), 0.25f);
}

TEST(Pfm, ThreeChannelRoundTrip) {
  Image<float> img(2, 2, 3, 0.0f);
  img(1, 1, 2) = 3.0f;
  std::stringstream s;
  write_pfm(s, img);
  EXPECT_EQ(s.str().substr(0, 2), "PF");
  EXPECT_EQ(read_pfm(s)(1, 1, 2), 3.0f);
}

}  // namespace
}  // namespace lightflow
