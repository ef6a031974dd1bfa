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

// Netpbm-family image files: binary PPM (P6) and PGM (P5) with 8-bit
// samples, and PFM float maps (Pf grey, PF colour). PFM files are written
// little-endian (negative scale) with rows stored bottom to top, per the
// format's convention. Masked pixels of float maps are stored as NaN.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "lightflow/binary_io.hpp"
#include "lightflow/error.hpp"
#include "lightflow/image.hpp"

namespace lightflow {

namespace netpbm_detail {

inline void skip_space_and_comments(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      in.get();
    } else {
      return;
    }
  }
}

inline long read_header_int(std::istream& in) {
  skip_space_and_comments(in);
  long value = -1;
  if (!(in >> value) || value < 0) throw IoError("malformed netpbm header");
  return value;
}

inline std::uint8_t to_byte(float v) {
  if (!(v > 0.0f)) return 0;
  if (v >= 1.0f) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

inline Image<float> read_8bit(std::istream& in, const std::string& expected_magic, int channels) {
  std::string magic;
  in >> magic;
  if (magic != expected_magic) throw IoError("expected a " + expected_magic + " file");
  const long width = read_header_int(in);
  const long height = read_header_int(in);
  const long maxval = read_header_int(in);
  if (width == 0 || height == 0 || width > 65535 || height > 65535) {
    throw IoError("unsupported image dimensions");
  }
  if (maxval == 0 || maxval > 255) throw IoError("only 8-bit netpbm files are supported");
  in.get();  // single whitespace before raster
  Image<float> image(static_cast<int>(width), static_cast<int>(height), channels);
  std::vector<unsigned char> raster(image.data().size());
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) {
    throw IoError("truncated netpbm raster");
  }
  for (std::size_t i = 0; i < raster.size(); ++i) {
    image.data()[i] = static_cast<float>(raster[i]) / static_cast<float>(maxval);
  }
  return image;
}

inline void write_8bit(std::ostream& out, const Image<float>& image, const char* magic) {
  out << magic << "\n" << image.width() << " " << image.height() << "\n255\n";
  std::vector<unsigned char> raster(image.data().size());
  for (std::size_t i = 0; i < raster.size(); ++i) raster[i] = to_byte(image.data()[i]);
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
}

template <typename Fn>
void with_output(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  fn(out);
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename Fn>
auto with_input(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return fn(in);
}

}  // namespace netpbm_detail

/// Reads an 8-bit binary PPM into a 3-channel image scaled to [0, 1].
inline Image<float> read_ppm(std::istream& in) { return netpbm_detail::read_8bit(in, "P6", 3); }

/// Reads an 8-bit binary PGM into a 1-channel image scaled to [0, 1].
inline Image<float> read_pgm(std::istream& in) { return netpbm_detail::read_8bit(in, "P5", 1); }

/// Writes a 3-channel [0, 1] image as 8-bit P6, rounding to nearest.
inline void write_ppm(std::ostream& out, const Image<float>& rgb) {
  if (rgb.channels() != 3) throw DomainError("PPM needs a 3-channel image");
  netpbm_detail::write_8bit(out, rgb, "P6");
}

inline void write_pgm(std::ostream& out, const Image<float>& grey) {
  if (grey.channels() != 1) throw DomainError("PGM needs a 1-channel image");
  netpbm_detail::write_8bit(out, grey, "P5");
}

inline void write_pfm(std::ostream& out, const Image<float>& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DomainError("PFM stores 1 or 3 channels");
  }
  out << (image.channels() == 3 ? "PF" : "Pf") << "\n"
      << image.width() << " " << image.height() << "\n-1.0\n";
  for (int y = image.height() - 1; y >= 0; --y) {
    for (float v : image.row(y)) binary::put(out, v);
  }
}

inline Image<float> read_pfm(std::istream& in) {
  std::string magic;
  in >> magic;
  int channels = 0;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw IoError("not a PFM file");
  }
  const long width = netpbm_detail::read_header_int(in);
  const long height = netpbm_detail::read_header_int(in);
  netpbm_detail::skip_space_and_comments(in);
  double scale = 0.0;
  if (!(in >> scale) || scale == 0.0) throw IoError("malformed PFM scale");
  in.get();
  if (width == 0 || height == 0 || width > 65535 || height > 65535) {
    throw IoError("unsupported image dimensions");
  }
  Image<float> image(static_cast<int>(width), static_cast<int>(height), channels);
  const bool little = scale < 0.0;
  for (int y = image.height() - 1; y >= 0; --y) {
    for (float& v : image.row(y)) {
      std::uint32_t bits = binary::get<std::uint32_t>(in);
      if (!little) bits = __builtin_bswap32(bits);
      std::memcpy(&v, &bits, sizeof(v));
    }
  }
  return image;
}

inline Image<float> load_ppm(const std::filesystem::path& path) {
  return netpbm_detail::with_input(path, [](std::istream& in) { return read_ppm(in); });
}
inline Image<float> load_pgm(const std::filesystem::path& path) {
  return netpbm_detail::with_input(path, [](std::istream& in) { return read_pgm(in); });
}
inline Image<float> load_pfm(const std::filesystem::path& path) {
  return netpbm_detail::with_input(path, [](std::istream& in) { return read_pfm(in); });
}
inline void save_ppm(const Image<float>& rgb, const std::filesystem::path& path) {
  netpbm_detail::with_output(path, [&](std::ostream& out) { write_ppm(out, rgb); });
}
inline void save_pgm(const Image<float>& grey, const std::filesystem::path& path) {
  netpbm_detail::with_output(path, [&](std::ostream& out) { write_pgm(out, grey); });
}
inline void save_pfm(const Image<float>& image, const std::filesystem::path& path) {
  netpbm_detail::with_output(path, [&](std::ostream& out) { write_pfm(out, image); });
}

/// 8-bit quantization as it happens when a frame goes through a PPM file.
inline Image<float> quantize_8bit(const Image<float>& image) {
  Image<float> out = image;
  for (float& v : out.data()) v = static_cast<float>(netpbm_detail::to_byte(v)) / 255.0f;
  return out;
}

}  // namespace lightflow
