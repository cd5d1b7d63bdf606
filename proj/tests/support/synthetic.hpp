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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ecgpipe/dataset.hpp"
#include "ecgpipe/image.hpp"
#include "ecgpipe/image_io.hpp"
#include "ecgpipe/rng.hpp"

namespace ecgpipe::testsupport {

/// Flat horizontal trace on white paper: the "normal" texture.
inline ImageU8 make_line_image(int size, Rng& rng) {
  ImageU8 img(size, size, 1, 255);
  const int row = static_cast<int>(rng.uniform_int(size / 4, 3 * size / 4));
  for (int x = 0; x < size; ++x) {
    img.at(x, row) = 30;
    if (row + 1 < size) img.at(x, row + 1) = 60;
  }
  for (int i = 0; i < size / 4; ++i) {
    const int x = static_cast<int>(rng.uniform_int(0, size - 1));
    const int y = static_cast<int>(rng.uniform_int(0, size - 1));
    img.at(x, y) = static_cast<std::uint8_t>(rng.uniform_int(200, 240));
  }
  return img;
}

/// Zigzag spike trace: the "abnormal" texture.
inline ImageU8 make_spike_image(int size, Rng& rng) {
  ImageU8 img(size, size, 1, 255);
  const int base = static_cast<int>(rng.uniform_int(size / 3, 2 * size / 3));
  const int amp = std::max(2, size / 5);
  const int period = std::max(4, size / 8);
  const int phase = static_cast<int>(rng.uniform_int(0, period - 1));
  int prev_y = base;
  for (int x = 0; x < size; ++x) {
    const int t = (x + phase) % period;
    const int offset = t < period / 2 ? t : period - t;
    int y = base - amp * offset / std::max(1, period / 2);
    y = std::clamp(y, 0, size - 1);
    const int lo = std::min(prev_y, y), hi = std::max(prev_y, y);
    for (int yy = lo; yy <= hi; ++yy) img.at(x, yy) = 30;
    prev_y = y;
  }
  for (int i = 0; i < size / 4; ++i) {
    const int x = static_cast<int>(rng.uniform_int(0, size - 1));
    const int y = static_cast<int>(rng.uniform_int(0, size - 1));
    img.at(x, y) = static_cast<std::uint8_t>(rng.uniform_int(200, 240));
  }
  return img;
}

inline ImageU8 make_trace_image(int label, int size, Rng& rng) {
  return label == 0 ? make_line_image(size, rng) : make_spike_image(size, rng);
}

/// Writes a five-class corpus in the root/<ClassName>/*.pgm layout (one .png
/// per class to exercise both decoders). Normal uses the line texture, the
/// rest use spikes.
inline void write_corpus(const std::filesystem::path& root,
                         const std::map<RawClass, int>& per_class, int size, std::uint64_t seed) {
  namespace fs = std::filesystem;
  Rng rng(seed);
  for (const auto& [cls, n] : per_class) {
    const fs::path dir = root / raw_class_name(cls);
    fs::create_directories(dir);
    for (int i = 0; i < n; ++i) {
      const ImageU8 img = make_trace_image(cls == RawClass::Normal ? 0 : 1, size, rng);
      char name[32];
      std::snprintf(name, sizeof name, "img_%03d.%s", i, i == 0 ? "png" : "pgm");
      save_image(img, dir / name);
    }
  }
}

/// In-memory labeled manifest with the given per-class record counts; paths
/// are synthetic and never touched.
inline Manifest make_synthetic_manifest(const std::map<RawClass, int>& per_class) {
  Manifest m;
  m.root = "<synthetic>";
  for (const auto& [cls, n] : per_class) {
    for (int i = 0; i < n; ++i) {
      char name[48];
      std::snprintf(name, sizeof name, "%s/img_%04d.pgm", raw_class_name(cls), i);
      m.records.push_back({name, name, cls});
    }
  }
  std::sort(m.records.begin(), m.records.end(),
            [](const ManifestRecord& a, const ManifestRecord& b) { return a.id < b.id; });
  return m;
}

/// The full-corpus class sizes used across the split tests.
inline std::map<RawClass, int> paper_scale_counts() {
  return {{RawClass::Normal, 859},
          {RawClass::COVID19, 250},
          {RawClass::MI, 77},
          {RawClass::AHB, 548},
          {RawClass::RecoveredMI, 203}};
}

}  // namespace ecgpipe::testsupport
