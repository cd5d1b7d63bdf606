// Copyright 2026 ecgpipe contributors
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

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ecgpipe/error.hpp"
#include "ecgpipe/image.hpp"

namespace ecgpipe {

// Readers accept 8-bit PNG (gray / RGB, non-interlaced) and binary PGM (P5) /
// PPM (P6) with maxval <= 255. 16-bit sources are rejected outright rather
// than truncated.

namespace io_detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::FileNotFound, "cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return data;
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), Errc::FileNotFound, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  require(static_cast<bool>(out), Errc::Internal, "short write to " + path.string());
}

inline std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

inline std::vector<std::uint8_t> zlib_inflate(const std::vector<std::uint8_t>& in,
                                              std::size_t expected_size) {
  std::vector<std::uint8_t> out(expected_size);
  z_stream zs{};
  require(inflateInit(&zs) == Z_OK, Errc::Internal, "inflateInit failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const std::size_t produced = out.size() - zs.avail_out;
  inflateEnd(&zs);
  require(rc == Z_STREAM_END && produced == expected_size, Errc::CorruptImage,
          "compressed image data is truncated or invalid");
  return out;
}

inline std::vector<std::uint8_t> zlib_deflate(const std::vector<std::uint8_t>& in) {
  uLongf bound = compressBound(static_cast<uLong>(in.size()));
  std::vector<std::uint8_t> out(bound);
  const int rc = compress2(out.data(), &bound, in.data(), static_cast<uLong>(in.size()),
                           Z_DEFAULT_COMPRESSION);
  require(rc == Z_OK, Errc::Internal, "deflate failed");
  out.resize(bound);
  return out;
}

// ---- PNG ----

inline bool is_png(const std::vector<std::uint8_t>& d) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  return d.size() >= 8 && std::memcmp(d.data(), sig, 8) == 0;
}

inline ImageU8 decode_png(const std::vector<std::uint8_t>& d) {
  require(d.size() >= 8 + 12, Errc::CorruptImage, "PNG stream too short");
  std::size_t pos = 8;
  int width = 0, height = 0, channels = 0;
  bool seen_ihdr = false, seen_iend = false;
  std::vector<std::uint8_t> idat;

  while (pos + 12 <= d.size() && !seen_iend) {
    const std::uint32_t len = be32(&d[pos]);
    require(pos + 12 + len <= d.size(), Errc::CorruptImage, "PNG chunk exceeds stream");
    const char* type = reinterpret_cast<const char*>(&d[pos + 4]);
    const std::uint8_t* payload = &d[pos + 8];
    const std::uint32_t stored_crc = be32(&d[pos + 8 + len]);
    std::uint32_t crc = crc32(0L, &d[pos + 4], 4);
    if (len > 0) crc = crc32(crc, payload, len);
    require(crc == stored_crc, Errc::CorruptImage, "PNG chunk CRC mismatch");

    if (std::memcmp(type, "IHDR", 4) == 0) {
      require(len == 13, Errc::CorruptImage, "bad IHDR length");
      width = static_cast<int>(be32(payload));
      height = static_cast<int>(be32(payload + 4));
      const int bit_depth = payload[8];
      const int color_type = payload[9];
      const int interlace = payload[12];
      require(width > 0 && height > 0, Errc::CorruptImage, "bad PNG dimensions");
      require(bit_depth == 8, Errc::UnsupportedFormat,
              "only 8-bit PNG is supported (got bit depth " + std::to_string(bit_depth) + ")");
      if (color_type == 0)
        channels = 1;
      else if (color_type == 2)
        channels = 3;
      else
        raise(Errc::UnsupportedFormat,
              "only grayscale or RGB PNG is supported (color type " + std::to_string(color_type) +
                  ")");
      require(payload[10] == 0 && payload[11] == 0, Errc::UnsupportedFormat,
              "unknown PNG compression/filter method");
      require(interlace == 0, Errc::UnsupportedFormat, "interlaced PNG is not supported");
      seen_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      require(seen_ihdr, Errc::CorruptImage, "IDAT before IHDR");
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      seen_iend = true;
    }
    pos += 12 + len;
  }
  require(seen_ihdr && seen_iend && !idat.empty(), Errc::CorruptImage,
          "PNG stream is missing required chunks");

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  const std::vector<std::uint8_t> raw = zlib_inflate(idat, (stride + 1) * height);

  ImageU8 img(width, height, channels);
  std::vector<std::uint8_t> prior(stride, 0);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* src = &raw[static_cast<std::size_t>(y) * (stride + 1)];
    const int filter = src[0];
    std::uint8_t* dst = &img.pixels[static_cast<std::size_t>(y) * stride];
    for (std::size_t i = 0; i < stride; ++i) {
      const int x = src[1 + i];
      const int left = i >= static_cast<std::size_t>(channels) ? dst[i - channels] : 0;
      const int up = prior[i];
      const int upleft = i >= static_cast<std::size_t>(channels) ? prior[i - channels] : 0;
      int v = 0;
      switch (filter) {
        case 0: v = x; break;
        case 1: v = x + left; break;
        case 2: v = x + up; break;
        case 3: v = x + (left + up) / 2; break;
        case 4: v = x + paeth(left, up, upleft); break;
        default: raise(Errc::CorruptImage, "unknown PNG filter type");
      }
      dst[i] = static_cast<std::uint8_t>(v & 0xff);
    }
    std::memcpy(prior.data(), dst, stride);
  }
  return img;
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::vector<std::uint8_t>& payload) {
  put_be32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const std::uint32_t crc = crc32(0L, &out[type_at], static_cast<uInt>(4 + payload.size()));
  put_be32(out, crc);
}

inline std::vector<std::uint8_t> encode_png(const ImageU8& img) {
  img.validate();
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);                                  // bit depth
  ihdr.push_back(img.channels == 1 ? 0 : 2);          // color type
  ihdr.push_back(0);                                  // compression
  ihdr.push_back(0);                                  // filter method
  ihdr.push_back(0);                                  // no interlace
  append_chunk(out, "IHDR", ihdr);

  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    const std::uint8_t* row = &img.pixels[static_cast<std::size_t>(y) * stride];
    raw.insert(raw.end(), row, row + stride);
  }
  append_chunk(out, "IDAT", zlib_deflate(raw));
  append_chunk(out, "IEND", {});
  return out;
}

// ---- PNM (binary PGM/PPM) ----

inline bool is_pnm(const std::vector<std::uint8_t>& d) {
  return d.size() >= 2 && d[0] == 'P' && (d[1] == '5' || d[1] == '6');
}

inline long pnm_token(const std::vector<std::uint8_t>& d, std::size_t& pos) {
  // skip whitespace and '#' comments
  while (pos < d.size()) {
    if (d[pos] == '#') {
      while (pos < d.size() && d[pos] != '\n') ++pos;
    } else if (std::isspace(d[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  require(pos < d.size() && std::isdigit(d[pos]), Errc::CorruptImage, "bad PNM header");
  long v = 0;
  while (pos < d.size() && std::isdigit(d[pos])) {
    v = v * 10 + (d[pos] - '0');
    require(v <= 1 << 30, Errc::CorruptImage, "PNM header value out of range");
    ++pos;
  }
  return v;
}

inline ImageU8 decode_pnm(const std::vector<std::uint8_t>& d) {
  const int channels = d[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const long w = pnm_token(d, pos);
  const long h = pnm_token(d, pos);
  const long maxval = pnm_token(d, pos);
  require(w > 0 && h > 0, Errc::CorruptImage, "bad PNM dimensions");
  require(maxval > 0, Errc::CorruptImage, "bad PNM maxval");
  require(maxval <= 255, Errc::UnsupportedFormat,
          "16-bit PNM is not supported (maxval " + std::to_string(maxval) + ")");
  require(pos < d.size() && std::isspace(d[pos]), Errc::CorruptImage, "bad PNM header");
  ++pos;  // single whitespace byte before raster data

  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  require(d.size() - pos >= need, Errc::CorruptImage, "PNM raster data is truncated");
  ImageU8 img(static_cast<int>(w), static_cast<int>(h), channels);
  std::memcpy(img.pixels.data(), &d[pos], need);
  return img;
}

inline std::vector<std::uint8_t> encode_pnm(const ImageU8& img) {
  img.validate();
  std::string header = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

}  // namespace io_detail

inline ImageU8 load_image(const std::filesystem::path& path) {
  const auto data = io_detail::read_file(path);
  if (io_detail::is_png(data)) return io_detail::decode_png(data);
  if (io_detail::is_pnm(data)) return io_detail::decode_pnm(data);
  raise(Errc::UnsupportedFormat, path.string() + " is not a PNG or binary PGM/PPM image");
}

/// Writes PNG for ".png", PGM for ".pgm" (1 channel), PPM for ".ppm" (3 channels).
inline void save_image(const ImageU8& img, const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") {
    io_detail::write_file(path, io_detail::encode_png(img));
  } else if (ext == ".pgm") {
    require(img.channels == 1, Errc::UnsupportedFormat, "PGM requires a 1-channel image");
    io_detail::write_file(path, io_detail::encode_pnm(img));
  } else if (ext == ".ppm") {
    require(img.channels == 3, Errc::UnsupportedFormat, "PPM requires a 3-channel image");
    io_detail::write_file(path, io_detail::encode_pnm(img));
  } else {
    raise(Errc::UnsupportedFormat, "unsupported output extension " + ext);
  }
}

}  // namespace ecgpipe
