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

#include <fstream>
#include <string>

#include <json.hpp>

#include "ecgpipe/error.hpp"
#include "ecgpipe/model.hpp"

namespace ecgpipe {

/// Input preprocessing recorded next to the weights so a checkpoint is
/// self-contained.
struct PreprocSpec {
  int image_size = 64;
  bool grayscale = true;
  bool gamma = true;
  std::string zscore = "image";  // "image" or "dataset"
  // training-split statistics, meaningful only when zscore == "dataset"
  double dataset_mean = 0.0;
  double dataset_stddev = 0.0;
};

struct Checkpoint {
  ModelSpec spec;
  Params<float> params;
  PreprocSpec preproc;
};

inline constexpr int kCheckpointFormatVersion = 1;

inline nlohmann::ordered_json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::ordered_json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["spec"] = model_spec_to_json(ckpt.spec);
  j["spec_hash"] = model_spec_hash(ckpt.spec);
  j["preproc"] = {{"image_size", ckpt.preproc.image_size},
                  {"grayscale", ckpt.preproc.grayscale},
                  {"gamma", ckpt.preproc.gamma},
                  {"zscore", ckpt.preproc.zscore}};
  if (ckpt.preproc.zscore == "dataset") {
    j["preproc"]["dataset_mean"] = ckpt.preproc.dataset_mean;
    j["preproc"]["dataset_stddev"] = ckpt.preproc.dataset_stddev;
  }
  j["params"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ckpt.params.layers.size(); ++i) {
    const auto& lp = ckpt.params.layers[i];
    if (lp.weight.empty()) continue;
    nlohmann::ordered_json jl;
    jl["layer"] = i;
    jl["name"] = std::string(layer_kind_name(ckpt.spec.layers[i].kind)) + "_" + std::to_string(i);
    jl["weight_shape"] = lp.weight_shape;
    jl["weight"] = lp.weight;
    jl["bias"] = lp.bias;
    j["params"].push_back(std::move(jl));
  }
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  require(j.at("format_version").get<int>() == kCheckpointFormatVersion, Errc::BadConfig,
          "unsupported checkpoint format version");
  Checkpoint ckpt;
  ckpt.spec = model_spec_from_json(j.at("spec"));
  require(j.at("spec_hash").get<std::string>() == model_spec_hash(ckpt.spec), Errc::BadConfig,
          "checkpoint spec hash mismatch");
  const auto& jp = j.at("preproc");
  ckpt.preproc.image_size = jp.at("image_size").get<int>();
  ckpt.preproc.grayscale = jp.at("grayscale").get<bool>();
  ckpt.preproc.gamma = jp.at("gamma").get<bool>();
  ckpt.preproc.zscore = jp.at("zscore").get<std::string>();
  if (jp.contains("dataset_mean")) ckpt.preproc.dataset_mean = jp.at("dataset_mean").get<double>();
  if (jp.contains("dataset_stddev"))
    ckpt.preproc.dataset_stddev = jp.at("dataset_stddev").get<double>();

  ckpt.params.layers.resize(ckpt.spec.layers.size());
  for (const auto& jl : j.at("params")) {
    const std::size_t i = jl.at("layer").get<std::size_t>();
    require(i < ckpt.params.layers.size(), Errc::BadConfig, "checkpoint layer index out of range");
    auto& lp = ckpt.params.layers[i];
    lp.weight_shape = jl.at("weight_shape").get<std::vector<int>>();
    lp.weight = jl.at("weight").get<std::vector<float>>();
    lp.bias = jl.at("bias").get<std::vector<float>>();
  }
  // round-trips through forward() will shape-check against the spec
  require(ckpt.params.all_finite(), Errc::BadConfig, "checkpoint holds non-finite values");
  return ckpt;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), Errc::FileNotFound, "cannot write " + path.string());
  out << checkpoint_to_json(ckpt).dump(2) << "\n";
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::FileNotFound, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    raise(Errc::BadConfig, "invalid checkpoint JSON: " + std::string(e.what()));
  }
  return checkpoint_from_json(j);
}

}  // namespace ecgpipe
