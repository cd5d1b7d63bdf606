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

#include <cmath>
#include <cstdint>
#include <vector>

#include "ecgpipe/error.hpp"
#include "ecgpipe/model.hpp"

namespace ecgpipe {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  Params<T> m;  // first moment
  Params<T> v;  // second moment

  static AdamState zeros_like(const Params<T>& params) {
    AdamState s;
    s.m.layers.resize(params.layers.size());
    s.v.layers.resize(params.layers.size());
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
      s.m.layers[i].weight.assign(params.layers[i].weight.size(), T(0));
      s.m.layers[i].bias.assign(params.layers[i].bias.size(), T(0));
      s.v.layers[i].weight.assign(params.layers[i].weight.size(), T(0));
      s.v.layers[i].bias.assign(params.layers[i].bias.size(), T(0));
    }
    return s;
  }
};

namespace optim_detail {
template <typename T>
void adam_update(std::vector<T>& p, const std::vector<T>& g, std::vector<T>& m, std::vector<T>& v,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gi = static_cast<double>(g[i]);
    const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
    const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double mhat = mi / bc1;
    const double vhat = vi / bc2;
    p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + eps));
  }
}
}  // namespace optim_detail

/// One bias-corrected Adam step; t counts from 1.
template <typename T>
void adam_step(Params<T>& params, const Params<T>& grads, AdamState<T>& state, int t,
               const AdamConfig& cfg) {
  require(t >= 1, Errc::BadConfig, "Adam step counter starts at 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    if (params.layers[i].weight.empty()) continue;
    require(grads.layers[i].weight.size() == params.layers[i].weight.size(), Errc::ShapeMismatch,
            "gradient shape mismatch");
    optim_detail::adam_update(params.layers[i].weight, grads.layers[i].weight,
                              state.m.layers[i].weight, state.v.layers[i].weight,
                              cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon, bc1, bc2);
    optim_detail::adam_update(params.layers[i].bias, grads.layers[i].bias,
                              state.m.layers[i].bias, state.v.layers[i].bias, cfg.learning_rate,
                              cfg.beta1, cfg.beta2, cfg.epsilon, bc1, bc2);
  }
}

}  // namespace ecgpipe
