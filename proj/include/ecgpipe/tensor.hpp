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
#include <numeric>
#include <vector>

#include "ecgpipe/error.hpp"

namespace ecgpipe {

/// Dense row-major tensor. Plain value type; the shape is not encoded in the
/// static type because layer stacks are assembled at run time.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> values;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), values(numel_of(shape), T(0)) {}
  Tensor(std::vector<int> s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
    require(values.size() == numel_of(shape), Errc::ShapeMismatch,
            "tensor value count must equal the product of its dims");
  }

  static std::size_t numel_of(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) {
      require(d > 0, Errc::ShapeMismatch, "tensor dims must be positive");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t numel() const { return values.size(); }
  int dim(std::size_t i) const { return shape.at(i); }

  bool all_finite() const {
    for (T v : values)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.values.reserve(values.size());
    for (T v : values) out.values.push_back(static_cast<U>(v));
    return out;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace ecgpipe
