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
#include <chrono>
#include <vector>

#include "ecgpipe/backend.hpp"
#include "ecgpipe/tensor.hpp"

namespace ecgpipe {

struct TimingResult {
  double median_seconds = 0.0;
  double variance = 0.0;
  std::vector<double> samples;
};

/// Times single-image prediction with a monotonic clock: one untimed warm-up
/// pass, then `repeats` timed passes. Reports the median and the sample
/// variance of the repeats.
inline TimingResult time_inference(const Backend& backend, const TensorF& image, int repeats = 10) {
  require(image.shape.size() == 3, Errc::ShapeMismatch, "image tensor must be [C,H,W]");
  require(repeats >= 1, Errc::BadConfig, "repeats must be >= 1");
  TensorF batch({1, image.shape[0], image.shape[1], image.shape[2]}, image.values);
  const std::vector<std::string> ids = {"timing"};

  (void)backend.predict_proba(ids, batch);  // warm-up, excluded

  TimingResult r;
  for (int i = 0; i < repeats; ++i) {
    const auto t1 = std::chrono::steady_clock::now();
    (void)backend.predict_proba(ids, batch);
    const auto t2 = std::chrono::steady_clock::now();
    r.samples.push_back(std::chrono::duration<double>(t2 - t1).count());
  }

  std::vector<double> sorted = r.samples;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.median_seconds = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;

  double mean = 0.0;
  for (double s : r.samples) mean += s;
  mean /= static_cast<double>(n);
  for (double s : r.samples) r.variance += (s - mean) * (s - mean);
  r.variance /= static_cast<double>(n);
  return r;
}

}  // namespace ecgpipe
