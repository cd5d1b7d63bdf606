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
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ecgpipe/error.hpp"
#include "ecgpipe/model.hpp"
#include "ecgpipe/tensor.hpp"

namespace ecgpipe {

/// Classifier abstraction consumed by evaluation and explanation. Compute
/// backends score the pixel batch and ignore the ids; replay backends look
/// probabilities up by id and ignore the pixels. Activation and logit taps
/// are optional capabilities.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual int num_classes() const = 0;

  /// Per-sample probability vectors (non-negative, sum 1 within 1e-6).
  /// ids run parallel to the batch rows.
  virtual std::vector<std::vector<double>> predict_proba(const std::vector<std::string>& ids,
                                                         const TensorF& batch) const = 0;

  virtual bool has_activations() const { return false; }

  /// Layer output for a [N,C,H,W] batch.
  virtual TensorF activations(const TensorF& /*batch*/, int /*layer_id*/) const {
    raise(Errc::NoActivationCapability, "backend does not expose activations");
  }

  virtual bool has_logits() const { return false; }

  virtual std::vector<std::vector<double>> predict_logits(const TensorF& /*batch*/) const {
    raise(Errc::NoActivationCapability, "backend does not expose logits");
  }
};

inline std::vector<int> argmax_rows(const std::vector<std::vector<double>>& probs) {
  std::vector<int> out;
  out.reserve(probs.size());
  for (const auto& row : probs) {
    int arg = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[static_cast<std::size_t>(arg)]) arg = static_cast<int>(c);
    out.push_back(arg);
  }
  return out;
}

/// Backend over an in-process CNN (eval mode).
class ModelBackend : public Backend {
 public:
  ModelBackend(ModelSpec spec, Params<float> params)
      : spec_(std::move(spec)), params_(std::move(params)) {
    spec_.layer_shapes();
  }

  const ModelSpec& spec() const { return spec_; }
  const Params<float>& params() const { return params_; }

  int num_classes() const override { return spec_.num_classes; }

  std::vector<std::vector<double>> predict_proba(const std::vector<std::string>& ids,
                                                 const TensorF& batch) const override {
    (void)ids;
    const auto res = forward(spec_, params_, batch);
    return rows_of(res.probs);
  }

  bool has_activations() const override { return true; }

  TensorF activations(const TensorF& batch, int layer_id) const override {
    require(layer_id >= 0 && layer_id < static_cast<int>(spec_.layers.size()), Errc::LayerNotFound,
            "no layer with id " + std::to_string(layer_id));
    const auto res = forward(spec_, params_, batch);
    return res.cache.outputs[static_cast<std::size_t>(layer_id)];
  }

  bool has_logits() const override { return true; }

  std::vector<std::vector<double>> predict_logits(const TensorF& batch) const override {
    const auto res = forward(spec_, params_, batch);
    return rows_of(res.logits);
  }

 private:
  static std::vector<std::vector<double>> rows_of(const TensorF& t) {
    const int n = t.shape[0], k = t.shape[1];
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
      rows[static_cast<std::size_t>(b)].assign(
          t.values.begin() + static_cast<std::size_t>(b) * k,
          t.values.begin() + static_cast<std::size_t>(b + 1) * k);
    }
    return rows;
  }

  ModelSpec spec_;
  Params<float> params_;
};

/// Backend that replays a per-sample probability table, so externally trained
/// models can be evaluated through the same reporting path. Rows whose sum
/// strays from 1 by more than 1e-4 are renormalized with a warning.
class PredictionsBackend : public Backend {
 public:
  PredictionsBackend(std::map<std::string, std::vector<double>> table, int num_classes,
                     std::ostream* warn = &std::cerr)
      : table_(std::move(table)), num_classes_(num_classes) {
    for (auto& [id, row] : table_) {
      require(static_cast<int>(row.size()) == num_classes_, Errc::LengthMismatch,
              "prediction row for " + id + " has the wrong class count");
      double sum = 0.0;
      for (double v : row) {
        require(v >= 0.0 && std::isfinite(v), Errc::BadConfig,
                "prediction row for " + id + " has a negative or non-finite entry");
        sum += v;
      }
      require(sum > 0.0, Errc::BadConfig, "prediction row for " + id + " sums to zero");
      if (std::abs(sum - 1.0) > 1e-4 && warn)
        *warn << "warning: prediction row " << id << " sums to " << sum << "; renormalizing\n";
      for (double& v : row) v /= sum;
    }
  }

  int num_classes() const override { return num_classes_; }

  std::vector<std::vector<double>> predict_proba(const std::vector<std::string>& ids,
                                                 const TensorF& batch) const override {
    (void)batch;
    std::vector<std::vector<double>> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      auto it = table_.find(id);
      require(it != table_.end(), Errc::MissingSample, "no prediction row for sample " + id);
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::map<std::string, std::vector<double>> table_;
  int num_classes_;
};

// ---- predictions CSV: sample_id,p_0,...,p_{K-1} ----

inline std::pair<std::map<std::string, std::vector<double>>, int> read_predictions_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::FileNotFound, "cannot open " + path.string());
  std::map<std::string, std::vector<double>> table;
  int num_classes = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("sample_id", 0) == 0) continue;  // header
    std::stringstream ss(line);
    std::string id, cell;
    require(static_cast<bool>(std::getline(ss, id, ',')), Errc::BadConfig,
            "malformed predictions row at line " + std::to_string(lineno));
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        raise(Errc::BadConfig, "non-numeric probability at line " + std::to_string(lineno));
      }
    }
    require(!row.empty(), Errc::BadConfig, "empty predictions row at line " + std::to_string(lineno));
    if (num_classes < 0) num_classes = static_cast<int>(row.size());
    require(static_cast<int>(row.size()) == num_classes, Errc::LengthMismatch,
            "inconsistent column count at line " + std::to_string(lineno));
    require(table.emplace(id, std::move(row)).second, Errc::DuplicatePath,
            "duplicate sample id " + id);
  }
  require(num_classes >= 2, Errc::BadConfig, "predictions table is empty");
  return {std::move(table), num_classes};
}

inline void write_predictions_csv(const std::filesystem::path& path,
                                  const std::vector<std::string>& ids,
                                  const std::vector<std::vector<double>>& probs) {
  require(ids.size() == probs.size(), Errc::LengthMismatch, "ids/probs length mismatch");
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), Errc::FileNotFound, "cannot write " + path.string());
  const int k = probs.empty() ? 0 : static_cast<int>(probs.front().size());
  out << "sample_id";
  for (int c = 0; c < k; ++c) out << ",p_" << c;
  out << "\n";
  out.precision(10);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (double v : probs[i]) out << "," << v;
    out << "\n";
  }
}

}  // namespace ecgpipe
