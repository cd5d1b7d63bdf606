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
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgpipe/error.hpp"
#include "ecgpipe/rng.hpp"
#include "ecgpipe/tensor.hpp"

namespace ecgpipe {

// Layer vocabulary: Conv2D is fixed at 3x3 kernels, stride 1, same padding;
// MaxPool is fixed at 2x2 windows, stride 2. Scalar type is a template
// parameter: float for training, double for gradient verification.

enum class LayerKind { Conv2D, ReLU, MaxPool, Dropout, Flatten, Dense, Softmax };

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::ReLU: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
    case LayerKind::Softmax: return "softmax";
  }
  return "?";
}

inline LayerKind layer_kind_from_name(const std::string& s) {
  for (LayerKind k : {LayerKind::Conv2D, LayerKind::ReLU, LayerKind::MaxPool, LayerKind::Dropout,
                      LayerKind::Flatten, LayerKind::Dense, LayerKind::Softmax})
    if (s == layer_kind_name(k)) return k;
  raise(Errc::BadConfig, "unknown layer kind " + s);
}

struct LayerDef {
  LayerKind kind = LayerKind::ReLU;
  int out_channels = 0;  // Conv2D
  int out_features = 0;  // Dense
  double rate = 0.0;     // Dropout

  static LayerDef conv2d(int oc) { return {LayerKind::Conv2D, oc, 0, 0.0}; }
  static LayerDef relu() { return {LayerKind::ReLU, 0, 0, 0.0}; }
  static LayerDef maxpool() { return {LayerKind::MaxPool, 0, 0, 0.0}; }
  static LayerDef dropout(double rate) { return {LayerKind::Dropout, 0, 0, rate}; }
  static LayerDef flatten() { return {LayerKind::Flatten, 0, 0, 0.0}; }
  static LayerDef dense(int of) { return {LayerKind::Dense, 0, of, 0.0}; }
  static LayerDef softmax() { return {LayerKind::Softmax, 0, 0, 0.0}; }
};

struct ModelSpec {
  std::vector<int> input_shape;  // [channels, height, width]
  int num_classes = 2;
  std::vector<LayerDef> layers;

  /// Shape-checks the chain end to end and returns each layer's output shape
  /// (batch dim excluded). The last layer must be the only Softmax and its
  /// width must equal num_classes.
  std::vector<std::vector<int>> layer_shapes() const {
    require(input_shape.size() == 3, Errc::BadSpec, "input shape must be [C,H,W]");
    for (int d : input_shape) require(d > 0, Errc::BadSpec, "input dims must be positive");
    require(num_classes >= 2, Errc::BadSpec, "need at least 2 classes");
    require(!layers.empty(), Errc::BadSpec, "empty layer list");

    std::vector<std::vector<int>> shapes;
    std::vector<int> cur = input_shape;
    int softmax_count = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const LayerDef& l = layers[i];
      switch (l.kind) {
        case LayerKind::Conv2D:
          require(cur.size() == 3, Errc::BadSpec, "conv2d needs a [C,H,W] input");
          require(l.out_channels > 0, Errc::BadSpec, "conv2d out_channels must be positive");
          cur = {l.out_channels, cur[1], cur[2]};
          break;
        case LayerKind::MaxPool:
          require(cur.size() == 3, Errc::BadSpec, "maxpool needs a [C,H,W] input");
          require(cur[1] >= 2 && cur[2] >= 2, Errc::BadSpec, "maxpool input too small");
          cur = {cur[0], cur[1] / 2, cur[2] / 2};
          break;
        case LayerKind::ReLU:
          break;
        case LayerKind::Dropout:
          require(l.rate >= 0.0 && l.rate < 1.0, Errc::BadSpec, "dropout rate must be in [0,1)");
          break;
        case LayerKind::Flatten: {
          require(cur.size() == 3, Errc::BadSpec, "flatten needs a [C,H,W] input");
          cur = {cur[0] * cur[1] * cur[2]};
          break;
        }
        case LayerKind::Dense:
          require(cur.size() == 1, Errc::BadSpec, "dense needs a flat input");
          require(l.out_features > 0, Errc::BadSpec, "dense out_features must be positive");
          cur = {l.out_features};
          break;
        case LayerKind::Softmax:
          require(cur.size() == 1, Errc::BadSpec, "softmax needs a flat input");
          require(i + 1 == layers.size(), Errc::BadSpec, "softmax must be the terminal layer");
          require(cur[0] == num_classes, Errc::BadSpec,
                  "softmax width must equal the class count");
          ++softmax_count;
          break;
      }
      shapes.push_back(cur);
    }
    require(softmax_count == 1 && layers.back().kind == LayerKind::Softmax, Errc::BadSpec,
            "model must end in exactly one softmax");
    return shapes;
  }

  int last_conv_layer() const {
    for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i)
      if (layers[static_cast<std::size_t>(i)].kind == LayerKind::Conv2D) return i;
    return -1;
  }
};

/// Conv16-ReLU-Pool blocks, then Flatten, Dropout, Dense(K), Softmax.
inline ModelSpec reference_model_spec(int in_channels, int image_size, int num_classes,
                                      const std::vector<int>& conv_channels = {16, 16, 16},
                                      double dropout_rate = 0.2) {
  ModelSpec spec;
  spec.input_shape = {in_channels, image_size, image_size};
  spec.num_classes = num_classes;
  for (int oc : conv_channels) {
    spec.layers.push_back(LayerDef::conv2d(oc));
    spec.layers.push_back(LayerDef::relu());
    spec.layers.push_back(LayerDef::maxpool());
  }
  spec.layers.push_back(LayerDef::flatten());
  if (dropout_rate > 0.0) spec.layers.push_back(LayerDef::dropout(dropout_rate));
  spec.layers.push_back(LayerDef::dense(num_classes));
  spec.layers.push_back(LayerDef::softmax());
  spec.layer_shapes();
  return spec;
}

template <typename T>
struct LayerParams {
  std::vector<T> weight;
  std::vector<int> weight_shape;
  std::vector<T> bias;
};

template <typename T>
struct Params {
  std::vector<LayerParams<T>> layers;  // aligned with ModelSpec::layers

  template <typename U>
  Params<U> cast() const {
    Params<U> out;
    out.layers.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      out.layers[i].weight_shape = layers[i].weight_shape;
      out.layers[i].weight.assign(layers[i].weight.begin(), layers[i].weight.end());
      out.layers[i].bias.assign(layers[i].bias.begin(), layers[i].bias.end());
    }
    return out;
  }

  bool all_finite() const {
    for (const auto& l : layers) {
      for (T v : l.weight)
        if (!std::isfinite(static_cast<double>(v))) return false;
      for (T v : l.bias)
        if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }
};

/// He initialization: weights ~ N(0, 2/fan_in), biases zero. Deterministic
/// per (spec, seed); every layer draws from its own stream.
template <typename T = float>
Params<T> init_params(const ModelSpec& spec, std::uint64_t seed) {
  const auto shapes = spec.layer_shapes();
  Params<T> params;
  params.layers.resize(spec.layers.size());
  std::vector<int> cur = spec.input_shape;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerDef& l = spec.layers[i];
    LayerParams<T>& lp = params.layers[i];
    if (l.kind == LayerKind::Conv2D) {
      const int in_c = cur[0];
      const int fan_in = in_c * 9;
      const double stddev = std::sqrt(2.0 / fan_in);
      lp.weight_shape = {l.out_channels, in_c, 3, 3};
      lp.weight.resize(static_cast<std::size_t>(l.out_channels) * in_c * 9);
      Rng rng(mix_seed(seed, i));
      for (auto& w : lp.weight) w = static_cast<T>(rng.gaussian() * stddev);
      lp.bias.assign(static_cast<std::size_t>(l.out_channels), T(0));
    } else if (l.kind == LayerKind::Dense) {
      const int fan_in = cur[0];
      const double stddev = std::sqrt(2.0 / fan_in);
      lp.weight_shape = {l.out_features, fan_in};
      lp.weight.resize(static_cast<std::size_t>(l.out_features) * fan_in);
      Rng rng(mix_seed(seed, i));
      for (auto& w : lp.weight) w = static_cast<T>(rng.gaussian() * stddev);
      lp.bias.assign(static_cast<std::size_t>(l.out_features), T(0));
    }
    cur = shapes[i];
  }
  return params;
}

template <typename T>
struct ForwardCache {
  Tensor<T> input;
  std::vector<Tensor<T>> outputs;            // per layer
  std::vector<std::vector<std::int64_t>> pool_src;  // per layer; MaxPool argmax (flat input index)
  std::vector<std::vector<T>> drop_mask;     // per layer; Dropout multiplier per element
};

template <typename T>
struct ForwardResult {
  Tensor<T> logits;  // [N, K]
  Tensor<T> probs;   // [N, K]
  ForwardCache<T> cache;
};

namespace model_detail {

template <typename T>
void conv2d_forward(const Tensor<T>& in, const LayerParams<T>& p, int out_c, Tensor<T>& out) {
  const int n = in.shape[0], in_c = in.shape[1], h = in.shape[2], w = in.shape[3];
  out = Tensor<T>({n, out_c, h, w});
  const std::size_t in_plane = static_cast<std::size_t>(h) * w;
  for (int b = 0; b < n; ++b) {
    for (int oc = 0; oc < out_c; ++oc) {
      T* dst = &out.values[((static_cast<std::size_t>(b) * out_c) + oc) * in_plane];
      const T bias = p.bias[static_cast<std::size_t>(oc)];
      for (std::size_t i = 0; i < in_plane; ++i) dst[i] = bias;
      for (int ic = 0; ic < in_c; ++ic) {
        const T* src = &in.values[((static_cast<std::size_t>(b) * in_c) + ic) * in_plane];
        const T* ker = &p.weight[((static_cast<std::size_t>(oc) * in_c) + ic) * 9];
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const T wv = ker[ky * 3 + kx];
            const int y0 = std::max(0, -dy), y1 = h - std::max(0, dy);
            const int x0 = std::max(0, -dx), x1 = w - std::max(0, dx);
            for (int y = y0; y < y1; ++y) {
              T* drow = dst + static_cast<std::size_t>(y) * w;
              const T* srow = src + static_cast<std::size_t>(y + dy) * w + dx;
              for (int x = x0; x < x1; ++x) drow[x] += wv * srow[x];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const Tensor<T>& in, const LayerParams<T>& p, const Tensor<T>& grad_out,
                     LayerParams<T>& grad_p, Tensor<T>& grad_in) {
  const int n = in.shape[0], in_c = in.shape[1], h = in.shape[2], w = in.shape[3];
  const int out_c = grad_out.shape[1];
  grad_in = Tensor<T>(in.shape);
  grad_p.weight_shape = p.weight_shape;
  grad_p.weight.assign(p.weight.size(), T(0));
  grad_p.bias.assign(p.bias.size(), T(0));
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int b = 0; b < n; ++b) {
    for (int oc = 0; oc < out_c; ++oc) {
      const T* gout = &grad_out.values[((static_cast<std::size_t>(b) * out_c) + oc) * plane];
      T gb = 0;
      for (std::size_t i = 0; i < plane; ++i) gb += gout[i];
      grad_p.bias[static_cast<std::size_t>(oc)] += gb;
      for (int ic = 0; ic < in_c; ++ic) {
        const T* src = &in.values[((static_cast<std::size_t>(b) * in_c) + ic) * plane];
        T* gin = &grad_in.values[((static_cast<std::size_t>(b) * in_c) + ic) * plane];
        const T* ker = &p.weight[((static_cast<std::size_t>(oc) * in_c) + ic) * 9];
        T* gker = &grad_p.weight[((static_cast<std::size_t>(oc) * in_c) + ic) * 9];
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const T wv = ker[ky * 3 + kx];
            T gw = 0;
            const int y0 = std::max(0, -dy), y1 = h - std::max(0, dy);
            const int x0 = std::max(0, -dx), x1 = w - std::max(0, dx);
            for (int y = y0; y < y1; ++y) {
              const T* grow = gout + static_cast<std::size_t>(y) * w;
              const T* srow = src + static_cast<std::size_t>(y + dy) * w + dx;
              T* girow = gin + static_cast<std::size_t>(y + dy) * w + dx;
              for (int x = x0; x < x1; ++x) {
                gw += grow[x] * srow[x];
                girow[x] += wv * grow[x];
              }
            }
            gker[ky * 3 + kx] += gw;
          }
        }
      }
    }
  }
}

template <typename T>
void maxpool_forward(const Tensor<T>& in, Tensor<T>& out, std::vector<std::int64_t>& src_idx) {
  const int n = in.shape[0], c = in.shape[1], h = in.shape[2], w = in.shape[3];
  const int oh = h / 2, ow = w / 2;
  out = Tensor<T>({n, c, oh, ow});
  src_idx.assign(out.numel(), 0);
  std::size_t o = 0;
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t base = ((static_cast<std::size_t>(b) * c) + ch) * h * w;
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x, ++o) {
          std::size_t best = base + static_cast<std::size_t>(2 * y) * w + 2 * x;
          T bv = in.values[best];
          const std::size_t cands[3] = {best + 1, best + static_cast<std::size_t>(w),
                                        best + static_cast<std::size_t>(w) + 1};
          for (std::size_t cand : cands) {
            if (in.values[cand] > bv) {
              bv = in.values[cand];
              best = cand;
            }
          }
          out.values[o] = bv;
          src_idx[o] = static_cast<std::int64_t>(best);
        }
      }
    }
  }
}

template <typename T>
void softmax_rows(const Tensor<T>& logits, Tensor<T>& probs) {
  const int n = logits.shape[0], k = logits.shape[1];
  probs = Tensor<T>(logits.shape);
  for (int b = 0; b < n; ++b) {
    const T* row = &logits.values[static_cast<std::size_t>(b) * k];
    T* prow = &probs.values[static_cast<std::size_t>(b) * k];
    T mx = row[0];
    for (int i = 1; i < k; ++i) mx = std::max(mx, row[i]);
    T sum = 0;
    for (int i = 0; i < k; ++i) {
      prow[i] = std::exp(row[i] - mx);
      sum += prow[i];
    }
    for (int i = 0; i < k; ++i) prow[i] /= sum;
  }
}

}  // namespace model_detail

/// Runs the stack on a [N, C, H, W] batch. In train mode dropout draws a
/// seeded mask scaled by 1/(1-rate); in eval mode dropout is the identity.
/// The cache keeps every layer output for backward and for activation taps.
template <typename T>
ForwardResult<T> forward(const ModelSpec& spec, const Params<T>& params, const Tensor<T>& batch,
                         bool train_mode = false, std::uint64_t dropout_seed = 0) {
  const auto shapes = spec.layer_shapes();
  require(batch.shape.size() == 4, Errc::ShapeMismatch, "batch must be [N,C,H,W]");
  require(batch.shape[1] == spec.input_shape[0] && batch.shape[2] == spec.input_shape[1] &&
              batch.shape[3] == spec.input_shape[2],
          Errc::ShapeMismatch, "batch shape does not match the model input shape");
  require(params.layers.size() == spec.layers.size(), Errc::ShapeMismatch,
          "params do not match the layer list");

  ForwardResult<T> res;
  res.cache.input = batch;
  res.cache.outputs.resize(spec.layers.size());
  res.cache.pool_src.resize(spec.layers.size());
  res.cache.drop_mask.resize(spec.layers.size());

  const int n = batch.shape[0];
  Tensor<T> cur = batch;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerDef& l = spec.layers[i];
    Tensor<T> next;
    switch (l.kind) {
      case LayerKind::Conv2D:
        model_detail::conv2d_forward(cur, params.layers[i], l.out_channels, next);
        break;
      case LayerKind::ReLU:
        next = cur;
        for (auto& v : next.values) v = std::max(v, T(0));
        break;
      case LayerKind::MaxPool:
        model_detail::maxpool_forward(cur, next, res.cache.pool_src[i]);
        break;
      case LayerKind::Dropout: {
        next = cur;
        if (train_mode && l.rate > 0.0) {
          auto& mask = res.cache.drop_mask[i];
          mask.resize(cur.numel());
          Rng rng(mix_seed(dropout_seed, i));
          const T scale = static_cast<T>(1.0 / (1.0 - l.rate));
          for (std::size_t e = 0; e < mask.size(); ++e) {
            mask[e] = rng.uniform() < l.rate ? T(0) : scale;
            next.values[e] = cur.values[e] * mask[e];
          }
        }
        break;
      }
      case LayerKind::Flatten: {
        next = cur;
        next.shape = {n, shapes[i][0]};
        break;
      }
      case LayerKind::Dense: {
        const int in_f = cur.shape[1];
        const int out_f = l.out_features;
        next = Tensor<T>({n, out_f});
        const LayerParams<T>& p = params.layers[i];
        for (int b = 0; b < n; ++b) {
          const T* src = &cur.values[static_cast<std::size_t>(b) * in_f];
          T* dst = &next.values[static_cast<std::size_t>(b) * out_f];
          for (int o = 0; o < out_f; ++o) {
            T acc = p.bias[static_cast<std::size_t>(o)];
            const T* wrow = &p.weight[static_cast<std::size_t>(o) * in_f];
            for (int f = 0; f < in_f; ++f) acc += wrow[f] * src[f];
            dst[o] = acc;
          }
        }
        break;
      }
      case LayerKind::Softmax:
        res.logits = cur;
        model_detail::softmax_rows(cur, next);
        break;
    }
    res.cache.outputs[i] = next;
    cur = std::move(next);
  }
  res.probs = cur;
  return res;
}

struct LossResult {
  double loss = 0.0;
};

/// Mean cross-entropy over the batch with a 1e-12 probability floor, plus the
/// fused gradient with respect to the logits: (p - onehot) / N.
template <typename T>
std::pair<double, Tensor<T>> loss_ce(const Tensor<T>& probs, const std::vector<int>& labels) {
  const int n = probs.shape[0], k = probs.shape[1];
  require(static_cast<std::size_t>(n) == labels.size(), Errc::LengthMismatch,
          "labels must match the batch size");
  Tensor<T> grad(probs.shape);
  double loss = 0.0;
  for (int b = 0; b < n; ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    require(y >= 0 && y < k, Errc::LabelOutOfRange, "label outside [0, K)");
    const T* prow = &probs.values[static_cast<std::size_t>(b) * k];
    T* grow = &grad.values[static_cast<std::size_t>(b) * k];
    loss -= std::log(std::max(static_cast<double>(prow[y]), 1e-12));
    for (int i = 0; i < k; ++i)
      grow[i] = (prow[i] - (i == y ? T(1) : T(0))) / static_cast<T>(n);
  }
  return {loss / n, std::move(grad)};
}

/// Backpropagates from the loss gradient w.r.t. the logits down to every
/// learnable array. The returned structure mirrors Params.
template <typename T>
Params<T> backward(const ModelSpec& spec, const Params<T>& params, const ForwardCache<T>& cache,
                   const Tensor<T>& grad_logits) {
  Params<T> grads;
  grads.layers.resize(spec.layers.size());
  const int last = static_cast<int>(spec.layers.size()) - 1;  // softmax (fused with the loss)

  Tensor<T> g = grad_logits;
  for (int i = last - 1; i >= 0; --i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    const LayerDef& l = spec.layers[ui];
    const Tensor<T>& in = i == 0 ? cache.input : cache.outputs[ui - 1];
    switch (l.kind) {
      case LayerKind::Conv2D: {
        Tensor<T> gin;
        model_detail::conv2d_backward(in, params.layers[ui], g, grads.layers[ui], gin);
        g = std::move(gin);
        break;
      }
      case LayerKind::ReLU: {
        const Tensor<T>& out = cache.outputs[ui];
        for (std::size_t e = 0; e < g.values.size(); ++e)
          if (!(out.values[e] > T(0))) g.values[e] = T(0);
        break;
      }
      case LayerKind::MaxPool: {
        Tensor<T> gin(in.shape);
        const auto& src = cache.pool_src[ui];
        for (std::size_t e = 0; e < g.values.size(); ++e)
          gin.values[static_cast<std::size_t>(src[e])] += g.values[e];
        g = std::move(gin);
        break;
      }
      case LayerKind::Dropout: {
        const auto& mask = cache.drop_mask[ui];
        if (!mask.empty())
          for (std::size_t e = 0; e < g.values.size(); ++e) g.values[e] *= mask[e];
        break;
      }
      case LayerKind::Flatten:
        g.shape = in.shape;
        break;
      case LayerKind::Dense: {
        const int n = in.shape[0], in_f = in.shape[1], out_f = l.out_features;
        const LayerParams<T>& p = params.layers[ui];
        LayerParams<T>& gp = grads.layers[ui];
        gp.weight_shape = p.weight_shape;
        gp.weight.assign(p.weight.size(), T(0));
        gp.bias.assign(p.bias.size(), T(0));
        Tensor<T> gin({n, in_f});
        for (int b = 0; b < n; ++b) {
          const T* src = &in.values[static_cast<std::size_t>(b) * in_f];
          const T* grow = &g.values[static_cast<std::size_t>(b) * out_f];
          T* girow = &gin.values[static_cast<std::size_t>(b) * in_f];
          for (int o = 0; o < out_f; ++o) {
            const T go = grow[o];
            gp.bias[static_cast<std::size_t>(o)] += go;
            const T* wrow = &p.weight[static_cast<std::size_t>(o) * in_f];
            T* gwrow = &gp.weight[static_cast<std::size_t>(o) * in_f];
            for (int f = 0; f < in_f; ++f) {
              gwrow[f] += go * src[f];
              girow[f] += go * wrow[f];
            }
          }
        }
        g = std::move(gin);
        break;
      }
      case LayerKind::Softmax:
        raise(Errc::Internal, "softmax must be terminal");
    }
  }
  return grads;
}

// ---- spec serialization ----

inline nlohmann::ordered_json model_spec_to_json(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["input"] = spec.input_shape;
  j["num_classes"] = spec.num_classes;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : spec.layers) {
    nlohmann::ordered_json jl;
    jl["kind"] = layer_kind_name(l.kind);
    if (l.kind == LayerKind::Conv2D) jl["out_channels"] = l.out_channels;
    if (l.kind == LayerKind::Dense) jl["out_features"] = l.out_features;
    if (l.kind == LayerKind::Dropout) jl["rate"] = l.rate;
    j["layers"].push_back(std::move(jl));
  }
  return j;
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.input_shape = j.at("input").get<std::vector<int>>();
  spec.num_classes = j.at("num_classes").get<int>();
  for (const auto& jl : j.at("layers")) {
    LayerDef l;
    l.kind = layer_kind_from_name(jl.at("kind").get<std::string>());
    if (l.kind == LayerKind::Conv2D) l.out_channels = jl.at("out_channels").get<int>();
    if (l.kind == LayerKind::Dense) l.out_features = jl.at("out_features").get<int>();
    if (l.kind == LayerKind::Dropout) l.rate = jl.at("rate").get<double>();
    spec.layers.push_back(l);
  }
  spec.layer_shapes();
  return spec;
}

inline std::string model_spec_hash(const ModelSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(model_spec_to_json(spec).dump())));
  return buf;
}

}  // namespace ecgpipe
