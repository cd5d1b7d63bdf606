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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "ecgpipe/error.hpp"
#include "ecgpipe/image.hpp"
#include "ecgpipe/tensor.hpp"

namespace ecgpipe {

// round half away from zero, clamp to [0,255]
inline std::uint8_t round_clamp_u8(double v) {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

/// Rec.601 luma. 1-channel input is returned unchanged.
inline ImageU8 to_grayscale(const ImageU8& img) {
  img.validate();
  if (img.channels == 1) return img;
  ImageU8 out(img.width, img.height, 1);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = img.pixels[3 * i + 0];
    const double g = img.pixels[3 * i + 1];
    const double b = img.pixels[3 * i + 2];
    out.pixels[i] = round_clamp_u8(0.299 * r + 0.587 * g + 0.114 * b);
  }
  return out;
}

/// Per-intensity gamma enhancement table.
///
/// For input intensity X the exponent is derived from the intensity itself:
///   phi(X)   = pi * X / (2 * Xm), Xm = 127.5 (midpoint of [0, 255])
///   gamma(X) = 1 + acos(clamp(phi(X), 0, 1))
///   s(X)     = 255 * (X / 255)^(1 / gamma(X))
///
/// phi(X) exceeds 1 for X >= 82, where acos is undefined; the argument is
/// clamped to [0, 1] there, which makes the table brighten dark intensities
/// and map every X in [82, 255] to itself. Entries are monotone
/// non-decreasing and fix 0 and 255.
inline std::array<std::uint8_t, 256> gamma_lut() {
  constexpr double kMidpoint = 127.5;
  constexpr double kPi = 3.14159265358979323846;
  std::array<std::uint8_t, 256> lut{};
  for (int x = 0; x < 256; ++x) {
    const double phi = kPi * x / (2.0 * kMidpoint);
    const double c = std::clamp(phi, 0.0, 1.0);
    const double gamma = 1.0 + std::acos(c);
    const double s = 255.0 * std::pow(x / 255.0, 1.0 / gamma);
    lut[static_cast<std::size_t>(x)] = round_clamp_u8(s);
  }
  return lut;
}

/// Applies gamma_lut to every pixel, per channel. Dimensions unchanged.
inline ImageU8 gamma_correct(const ImageU8& img) {
  img.validate();
  static const std::array<std::uint8_t, 256> lut = gamma_lut();
  ImageU8 out = img;
  for (auto& p : out.pixels) p = lut[p];
  return out;
}

/// Bilinear resize with half-pixel-center sampling and edge clamping.
/// Resizing to the source dimensions reproduces the input exactly.
inline ImageU8 resize_bilinear(const ImageU8& img, int out_w, int out_h) {
  img.validate();
  require(out_w > 0 && out_h > 0, Errc::ZeroDimension, "resize target must be positive");
  ImageU8 out(out_w, out_h, img.channels);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(img.height - 1));
    const int y0 = static_cast<int>(src_y);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = src_y - y0;
    for (int x = 0; x < out_w; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(img.width - 1));
      const int x0 = static_cast<int>(src_x);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = src_x - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
        const double bot = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
        out.at(x, y, c) = round_clamp_u8((1.0 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

struct ChannelStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

inline ChannelStats channel_stats(const ImageU8& img, int channel) {
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = img.pixels[i * img.channels + channel];
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
  return {mean, std::sqrt(var)};
}

inline constexpr double kZscoreEpsilon = 1e-7;

/// Per-channel standardization: (x - mean) / max(stddev, 1e-7). A constant
/// channel comes out all zero. Output layout is planar [channels, height, width].
inline TensorF zscore(const ImageU8& img) {
  img.validate();
  TensorF out({img.channels, img.height, img.width});
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  for (int c = 0; c < img.channels; ++c) {
    const ChannelStats st = channel_stats(img, c);
    const double denom = std::max(st.stddev, kZscoreEpsilon);
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = img.pixels[i * img.channels + c];
      out.values[c * plane + i] = static_cast<float>((v - st.mean) / denom);
    }
  }
  return out;
}

/// Standardization with externally supplied statistics (one entry per
/// channel), for dataset-global normalization.
inline TensorF zscore_with_stats(const ImageU8& img, const std::vector<ChannelStats>& stats) {
  img.validate();
  require(static_cast<int>(stats.size()) == img.channels, Errc::ShapeMismatch,
          "one ChannelStats per channel required");
  TensorF out({img.channels, img.height, img.width});
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  for (int c = 0; c < img.channels; ++c) {
    const double denom = std::max(stats[c].stddev, kZscoreEpsilon);
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = img.pixels[i * img.channels + c];
      out.values[c * plane + i] = static_cast<float>((v - stats[c].mean) / denom);
    }
  }
  return out;
}

}  // namespace ecgpipe
