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
#include <limits>
#include <vector>

#include "ecgpipe/error.hpp"
#include "ecgpipe/model.hpp"
#include "ecgpipe/optimizer.hpp"
#include "ecgpipe/rng.hpp"
#include "ecgpipe/tensor.hpp"

namespace ecgpipe {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 16;
  int max_epochs = 15;
  int patience = 8;
  double dropout = 0.2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    require(learning_rate > 0.0, Errc::BadConfig, "learning_rate must be positive");
    require(batch_size >= 1, Errc::BadConfig, "batch_size must be >= 1");
    require(max_epochs >= 1, Errc::BadConfig, "max_epochs must be >= 1");
    require(patience >= 1 && patience <= max_epochs, Errc::BadConfig,
            "patience must be in [1, max_epochs]");
  }

  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

/// Stops after `patience` consecutive epochs without strict improvement.
/// Kept separate from the loop so the rule is testable on a bare loss trace.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  /// Feed one epoch's validation loss; returns true when this epoch is a new best.
  bool observe(double val_loss) {
    if (val_loss < best_) {
      best_ = val_loss;
      streak_ = 0;
      return true;
    }
    ++streak_;
    return false;
  }

  bool should_stop() const { return streak_ >= patience_; }
  double best() const { return best_; }

 private:
  int patience_;
  int streak_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

template <typename T>
struct TrainResult {
  Params<T> best_params;
  int best_epoch = 0;  // 1-based
  std::vector<EpochStats> history;
};

/// Stacks [C,H,W] sample tensors (indices `which` into `samples`) into one
/// [N,C,H,W] batch.
template <typename T>
Tensor<T> stack_batch(const std::vector<Tensor<T>>& samples, const std::vector<int>& which) {
  require(!which.empty(), Errc::EmptySplit, "empty batch");
  const auto& s0 = samples[static_cast<std::size_t>(which.front())];
  require(s0.shape.size() == 3, Errc::ShapeMismatch, "sample tensors must be [C,H,W]");
  Tensor<T> out({static_cast<int>(which.size()), s0.shape[0], s0.shape[1], s0.shape[2]});
  const std::size_t stride = s0.numel();
  for (std::size_t i = 0; i < which.size(); ++i) {
    const auto& s = samples[static_cast<std::size_t>(which[i])];
    require(s.shape == s0.shape, Errc::ShapeMismatch, "inconsistent sample shapes");
    std::copy(s.values.begin(), s.values.end(), out.values.begin() + i * stride);
  }
  return out;
}

template <typename T>
std::pair<double, double> evaluate_loss_accuracy(const ModelSpec& spec, const Params<T>& params,
                                                 const std::vector<Tensor<T>>& x,
                                                 const std::vector<int>& y, int batch_size) {
  double loss_sum = 0.0;
  std::int64_t correct = 0;
  std::size_t at = 0;
  while (at < x.size()) {
    const std::size_t n = std::min<std::size_t>(batch_size, x.size() - at);
    std::vector<int> idx(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = static_cast<int>(at + i);
      labels[i] = y[at + i];
    }
    const auto res = forward(spec, params, stack_batch(x, idx), /*train_mode=*/false);
    const auto [loss, grad] = loss_ce(res.probs, labels);
    loss_sum += loss * static_cast<double>(n);
    const int k = res.probs.shape[1];
    for (std::size_t i = 0; i < n; ++i) {
      const T* row = &res.probs.values[i * static_cast<std::size_t>(k)];
      int arg = 0;
      for (int c = 1; c < k; ++c)
        if (row[c] > row[arg]) arg = c;
      if (arg == labels[i]) ++correct;
    }
    at += n;
  }
  return {loss_sum / static_cast<double>(x.size()),
          static_cast<double>(correct) / static_cast<double>(x.size())};
}

/// Minibatch Adam training with per-epoch seeded shuffling and early stopping
/// on validation loss. Returns the parameters from the best validation epoch
/// and the full per-epoch history. Fully deterministic for a fixed config.
template <typename T>
TrainResult<T> train(const ModelSpec& spec, const Params<T>& initial,
                     const std::vector<Tensor<T>>& train_x, const std::vector<int>& train_y,
                     const std::vector<Tensor<T>>& val_x, const std::vector<int>& val_y,
                     const TrainConfig& cfg) {
  cfg.validate();
  require(!train_x.empty() && !val_x.empty(), Errc::EmptySplit,
          "training and validation sets must be non-empty");
  require(train_x.size() == train_y.size() && val_x.size() == val_y.size(), Errc::LengthMismatch,
          "sample/label count mismatch");

  Params<T> params = initial;
  AdamState<T> state = AdamState<T>::zeros_like(params);
  EarlyStopper stopper(cfg.patience);
  TrainResult<T> result;
  result.best_params = params;
  int t = 0;  // Adam step counter

  std::vector<int> order(train_x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(cfg.seed, 0x5u, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

    double loss_sum = 0.0;
    std::size_t at = 0;
    int step_in_epoch = 0;
    while (at < order.size()) {
      const std::size_t n = std::min<std::size_t>(cfg.batch_size, order.size() - at);
      std::vector<int> idx(order.begin() + at, order.begin() + at + n);
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) labels[i] = train_y[static_cast<std::size_t>(idx[i])];

      const std::uint64_t step_seed =
          mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(step_in_epoch));
      auto res = forward(spec, params, stack_batch(train_x, idx), /*train_mode=*/true, step_seed);
      const auto [loss, grad_logits] = loss_ce(res.probs, labels);
      loss_sum += loss * static_cast<double>(n);
      const Params<T> grads = backward(spec, params, res.cache, grad_logits);
      adam_step(params, grads, state, ++t, cfg.adam());
      at += n;
      ++step_in_epoch;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    const auto [vl, va] = evaluate_loss_accuracy(spec, params, val_x, val_y, cfg.batch_size);
    stats.val_loss = vl;
    stats.val_accuracy = va;
    result.history.push_back(stats);

    if (stopper.observe(vl)) {
      result.best_params = params;
      result.best_epoch = epoch;
    }
    if (stopper.should_stop()) break;
  }
  return result;
}

}  // namespace ecgpipe
