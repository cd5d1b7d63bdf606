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

#include "ecgpipe/model.hpp"
#include "ecgpipe/tensor.hpp"

namespace ecgpipe {

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t max_params = 1000;  // coordinates sampled, stride-spaced
  bool train_mode = false;        // true freezes dropout masks via dropout_seed
  std::uint64_t dropout_seed = 0;
};

/// Compares analytic backprop against central finite differences in double
/// precision. Returns the max of |analytic - numeric| / max(|analytic|,
/// |numeric|, 1e-8) over the sampled coordinates.
inline double grad_check(const ModelSpec& spec, const Params<double>& params,
                         const Tensor<double>& batch, const std::vector<int>& labels,
                         const GradCheckOptions& opt = {}) {
  const auto eval_loss = [&](const Params<double>& p) {
    const auto res = forward(spec, p, batch, opt.train_mode, opt.dropout_seed);
    return loss_ce(res.probs, labels).first;
  };

  const auto res = forward(spec, params, batch, opt.train_mode, opt.dropout_seed);
  const auto [loss, grad_logits] = loss_ce(res.probs, labels);
  const Params<double> analytic = backward(spec, params, res.cache, grad_logits);

  // flat coordinate space over all learnable arrays
  struct Coord {
    std::size_t layer;
    bool is_bias;
    std::size_t index;
  };
  std::vector<Coord> coords;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    for (std::size_t e = 0; e < params.layers[i].weight.size(); ++e)
      coords.push_back({i, false, e});
    for (std::size_t e = 0; e < params.layers[i].bias.size(); ++e) coords.push_back({i, true, e});
  }

  const std::size_t total = coords.size();
  const std::size_t n_check = std::min(opt.max_params, total);
  double max_rel = 0.0;
  Params<double> perturbed = params;
  for (std::size_t s = 0; s < n_check; ++s) {
    const Coord& c = coords[s * total / n_check];
    auto& slot = c.is_bias ? perturbed.layers[c.layer].bias[c.index]
                           : perturbed.layers[c.layer].weight[c.index];
    const double orig = slot;
    slot = orig + opt.eps;
    const double lp = eval_loss(perturbed);
    slot = orig - opt.eps;
    const double lm = eval_loss(perturbed);
    slot = orig;

    const double numeric = (lp - lm) / (2.0 * opt.eps);
    const double a = c.is_bias ? analytic.layers[c.layer].bias[c.index]
                               : analytic.layers[c.layer].weight[c.index];
    const double rel =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace ecgpipe
