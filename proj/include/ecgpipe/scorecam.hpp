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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgpipe/backend.hpp"
#include "ecgpipe/error.hpp"
#include "ecgpipe/image.hpp"
#include "ecgpipe/image_io.hpp"
#include "ecgpipe/imgproc.hpp"
#include "ecgpipe/tensor.hpp"

namespace ecgpipe {

/// Saliency map at input resolution, values in [0, 1].
struct HeatMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

namespace scorecam_detail {

inline std::vector<double> upsample_bilinear(const std::vector<double>& src, int sw, int sh,
                                             int dw, int dh) {
  std::vector<double> dst(static_cast<std::size_t>(dw) * dh);
  const double sx = static_cast<double>(sw) / dw;
  const double sy = static_cast<double>(sh) / dh;
  for (int y = 0; y < dh; ++y) {
    const double fy_pos = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(sh - 1));
    const int y0 = static_cast<int>(fy_pos);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double fy = fy_pos - y0;
    for (int x = 0; x < dw; ++x) {
      const double fx_pos = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(sw - 1));
      const int x0 = static_cast<int>(fx_pos);
      const int x1 = std::min(x0 + 1, sw - 1);
      const double fx = fx_pos - x0;
      const double top = (1.0 - fx) * src[static_cast<std::size_t>(y0) * sw + x0] +
                         fx * src[static_cast<std::size_t>(y0) * sw + x1];
      const double bot = (1.0 - fx) * src[static_cast<std::size_t>(y1) * sw + x0] +
                         fx * src[static_cast<std::size_t>(y1) * sw + x1];
      dst[static_cast<std::size_t>(y) * dw + x] = (1.0 - fy) * top + fy * bot;
    }
  }
  return dst;
}

// min-max to [0,1]; returns false when the map is constant
inline bool minmax_normalize(std::vector<double>& v) {
  double lo = v.front(), hi = v.front();
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (hi - lo <= 0.0) return false;
  const double span = hi - lo;
  for (double& x : v) x = (x - lo) / span;
  return true;
}

}  // namespace scorecam_detail

/// Gradient-free class activation map. Each channel of the chosen layer
/// masks the input; the channel's weight is the softmax over the target-class
/// logit gains those masked inputs achieve against an all-zero baseline; the
/// map is the ReLU of the weighted channel sum, min-max normalized.
///
/// Channels whose activation map is constant carry no spatial information and
/// are skipped. If every channel is constant the result is all zero (a
/// warning is emitted).
inline HeatMap scorecam(const Backend& backend, const TensorF& input, int target_class,
                        int layer_id, std::ostream* warn = &std::cerr) {
  require(backend.has_activations(), Errc::NoActivationCapability,
          "scorecam needs a backend with activation taps");
  require(backend.has_logits(), Errc::NoActivationCapability,
          "scorecam needs a backend with logit access");
  require(input.shape.size() == 3, Errc::ShapeMismatch, "input must be [C,H,W]");
  require(target_class >= 0 && target_class < backend.num_classes(), Errc::ClassOutOfRange,
          "target class out of range");

  const int in_c = input.shape[0], in_h = input.shape[1], in_w = input.shape[2];
  TensorF batch({1, in_c, in_h, in_w}, input.values);

  const TensorF acts = backend.activations(batch, layer_id);
  require(acts.shape.size() == 4, Errc::LayerNotFound,
          "activation layer must produce [N,C,H,W] maps");
  const int ch = acts.shape[1], ah = acts.shape[2], aw = acts.shape[3];

  HeatMap heat;
  heat.height = in_h;
  heat.width = in_w;
  heat.values.assign(static_cast<std::size_t>(in_h) * in_w, 0.0);

  // upsample + normalize every channel; constant channels are skipped
  std::vector<std::vector<double>> maps;
  for (int k = 0; k < ch; ++k) {
    std::vector<double> plane(static_cast<std::size_t>(ah) * aw);
    const std::size_t base = static_cast<std::size_t>(k) * ah * aw;
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = acts.values[base + i];
    std::vector<double> up = scorecam_detail::upsample_bilinear(plane, aw, ah, in_w, in_h);
    if (scorecam_detail::minmax_normalize(up)) maps.push_back(std::move(up));
  }
  if (maps.empty()) {
    if (warn) *warn << "warning: all activation channels are constant; heatmap is all zero\n";
    return heat;
  }

  const TensorF zero_batch({1, in_c, in_h, in_w});
  const double baseline =
      backend.predict_logits(zero_batch)[0][static_cast<std::size_t>(target_class)];

  std::vector<double> scores;
  scores.reserve(maps.size());
  const std::size_t plane_sz = static_cast<std::size_t>(in_h) * in_w;
  for (const auto& m : maps) {
    TensorF masked = batch;
    for (int c = 0; c < in_c; ++c)
      for (std::size_t i = 0; i < plane_sz; ++i)
        masked.values[static_cast<std::size_t>(c) * plane_sz + i] *= static_cast<float>(m[i]);
    const double logit =
        backend.predict_logits(masked)[0][static_cast<std::size_t>(target_class)];
    scores.push_back(logit - baseline);
  }

  // softmax over channel scores (shift-invariant)
  double mx = scores.front();
  for (double s : scores) mx = std::max(mx, s);
  double denom = 0.0;
  std::vector<double> weights(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp(scores[i] - mx);
    denom += weights[i];
  }
  for (double& w : weights) w /= denom;

  for (std::size_t k = 0; k < maps.size(); ++k)
    for (std::size_t i = 0; i < plane_sz; ++i) heat.values[i] += weights[k] * maps[k][i];
  for (double& v : heat.values) v = std::max(v, 0.0);
  if (!scorecam_detail::minmax_normalize(heat.values))
    std::fill(heat.values.begin(), heat.values.end(), 0.0);
  return heat;
}

namespace scorecam_detail {
inline double jet_channel(double t, double center) {
  return std::clamp(1.5 - std::abs(4.0 * t - center), 0.0, 1.0);
}
}  // namespace scorecam_detail

/// Jet-style colormap rendering of the map alpha-blended over the grayscale
/// base. alpha 0 reproduces the (gray) base promoted to RGB.
inline ImageU8 overlay(const ImageU8& base, const HeatMap& map, double alpha) {
  require(map.width == base.width && map.height == base.height, Errc::DimensionMismatch,
          "heatmap dimensions must match the base image");
  require(alpha >= 0.0 && alpha <= 1.0, Errc::BadConfig, "alpha must be in [0,1]");
  const ImageU8 gray = to_grayscale(base);
  ImageU8 out(base.width, base.height, 3);
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      const double t = map.at(x, y);
      const double g = gray.at(x, y);
      const double r = scorecam_detail::jet_channel(t, 3.0);
      const double gg = scorecam_detail::jet_channel(t, 2.0);
      const double b = scorecam_detail::jet_channel(t, 1.0);
      out.at(x, y, 0) = round_clamp_u8((1.0 - alpha) * g + alpha * 255.0 * r);
      out.at(x, y, 1) = round_clamp_u8((1.0 - alpha) * g + alpha * 255.0 * gg);
      out.at(x, y, 2) = round_clamp_u8((1.0 - alpha) * g + alpha * 255.0 * b);
    }
  }
  return out;
}

inline ImageU8 heatmap_to_image(const HeatMap& map) {
  ImageU8 img(map.width, map.height, 1);
  for (std::size_t i = 0; i < map.values.size(); ++i)
    img.pixels[i] = round_clamp_u8(map.values[i] * 255.0);
  return img;
}

struct CamSample {
  std::string id;
  ImageU8 base;    // preprocessed image for display, heatmap resolution
  TensorF input;   // normalized tensor the backend consumes
  int true_class = 0;
};

struct CamRecord {
  std::string id;
  int true_class = 0;
  int predicted_class = 0;
  int target_class = 0;
  int layer = 0;
  std::string heatmap_file;
  std::string overlay_file;
};

inline std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  return out;
}

/// For every sample: a raw heatmap (PGM), a colored overlay (PNG), and a JSON
/// record. By default the map targets the backend's predicted class;
/// target_override >= 0 forces one class for all samples.
inline std::vector<CamRecord> cam_report(const Backend& backend,
                                         const std::vector<CamSample>& samples, int layer_id,
                                         const std::filesystem::path& out_dir,
                                         double overlay_alpha = 0.4, int target_override = -1) {
  std::filesystem::create_directories(out_dir);
  std::vector<CamRecord> records;
  for (const auto& s : samples) {
    TensorF batch({1, s.input.shape[0], s.input.shape[1], s.input.shape[2]}, s.input.values);
    const auto probs = backend.predict_proba({s.id}, batch);
    const int predicted = argmax_rows(probs).front();
    const int target = target_override >= 0 ? target_override : predicted;

    const HeatMap heat = scorecam(backend, s.input, target, layer_id);
    CamRecord rec;
    rec.id = s.id;
    rec.true_class = s.true_class;
    rec.predicted_class = predicted;
    rec.target_class = target;
    rec.layer = layer_id;

    const std::string stem = sanitize_id(s.id);
    const auto heat_path = out_dir / (stem + "_heatmap.pgm");
    const auto over_path = out_dir / (stem + "_overlay.png");
    save_image(heatmap_to_image(heat), heat_path);
    save_image(overlay(s.base, heat, overlay_alpha), over_path);
    rec.heatmap_file = heat_path.string();
    rec.overlay_file = over_path.string();

    nlohmann::ordered_json j;
    j["sample_id"] = rec.id;
    j["true_class"] = rec.true_class;
    j["predicted_class"] = rec.predicted_class;
    j["target_class"] = rec.target_class;
    j["layer"] = rec.layer;
    j["heatmap_file"] = rec.heatmap_file;
    j["overlay_file"] = rec.overlay_file;
    std::ofstream out(out_dir / (stem + "_record.json"), std::ios::trunc);
    require(static_cast<bool>(out), Errc::FileNotFound, "cannot write record for " + s.id);
    out << j.dump(2) << "\n";

    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace ecgpipe
