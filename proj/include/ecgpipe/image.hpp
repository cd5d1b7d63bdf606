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

#include <cstdint>
#include <vector>

#include "ecgpipe/error.hpp"

namespace ecgpipe {

/// 8-bit raster image, row-major, channels interleaved (1 = gray, 3 = RGB).
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  ImageU8() = default;
  ImageU8(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {
    validate();
  }

  std::size_t size() const { return pixels.size(); }

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  void validate() const {
    require(width > 0 && height > 0, Errc::ZeroDimension, "image dimensions must be positive");
    require(channels == 1 || channels == 3, Errc::ShapeMismatch, "channels must be 1 or 3");
    require(pixels.size() == static_cast<std::size_t>(width) * height * channels,
            Errc::ShapeMismatch, "pixel buffer length must equal width*height*channels");
  }

  bool operator==(const ImageU8& o) const {
    return width == o.width && height == o.height && channels == o.channels && pixels == o.pixels;
  }
};

}  // namespace ecgpipe
