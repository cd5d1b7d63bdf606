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

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecgpipe/backend.hpp"
#include "ecgpipe/checkpoint.hpp"
#include "ecgpipe/dataset.hpp"
#include "ecgpipe/image_io.hpp"
#include "ecgpipe/imgproc.hpp"
#include "ecgpipe/pipeline.hpp"
#include "ecgpipe/scorecam.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUserError = 2;

ecgpipe::RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  ecgpipe::require(static_cast<bool>(in), ecgpipe::Errc::FileNotFound,
                   "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    ecgpipe::raise(ecgpipe::Errc::BadConfig, std::string("invalid config JSON: ") + e.what());
  }
  return ecgpipe::run_config_from_json(j);
}

int cmd_ingest(const std::string& root, const std::string& out) {
  const ecgpipe::Manifest m = ecgpipe::ingest(root);
  ecgpipe::pipeline_detail::write_json(out, ecgpipe::manifest_to_json(m));
  std::cout << "wrote " << out << " (" << m.records.size() << " records)\n";
  for (const auto& [name, count] : m.counts()) std::cout << "  " << name << ": " << count << "\n";
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& seed_override,
            const std::string& out_override, const std::string& scheme_override,
            int folds_override, int image_size_override) {
  ecgpipe::RunConfig cfg = load_config(config_path);
  if (!seed_override.empty()) {
    try {
      cfg.seed = std::stoull(seed_override);
    } catch (const std::exception&) {
      ecgpipe::raise(ecgpipe::Errc::BadConfig, "--seed must be an unsigned integer");
    }
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (!scheme_override.empty()) cfg.scheme = ecgpipe::scheme_from_name(scheme_override);
  if (folds_override > 0) cfg.folds = folds_override;
  if (image_size_override > 0) cfg.image_size = image_size_override;

  const ecgpipe::RunResult result = ecgpipe::run_experiment(cfg);
  std::cout << "pooled accuracy: " << 100.0 * result.pooled.accuracy << "% +/- "
            << 100.0 * result.pooled.accuracy_ci << " over " << result.pooled.n << " samples\n"
            << "reports in " << result.out_dir.string() << "\n";
  return kExitOk;
}

int cmd_eval_external(const std::string& predictions, const std::string& plan,
                      const std::string& out) {
  const ecgpipe::RunResult result = ecgpipe::eval_external(predictions, plan, out);
  std::cout << "pooled accuracy: " << 100.0 * result.pooled.accuracy << "% +/- "
            << 100.0 * result.pooled.accuracy_ci << " over " << result.pooled.n << " samples\n"
            << "reports in " << result.out_dir.string() << "\n";
  return kExitOk;
}

int cmd_scorecam(const std::string& checkpoint_path, const std::vector<std::string>& images,
                 const std::vector<int>& labels, int layer, const std::string& out,
                 double alpha) {
  const ecgpipe::Checkpoint ckpt = ecgpipe::load_checkpoint(checkpoint_path);
  ecgpipe::require(labels.empty() || labels.size() == images.size(), ecgpipe::Errc::LengthMismatch,
                   "--labels must match --images");
  const ecgpipe::ModelBackend backend(ckpt.spec, ckpt.params);
  int layer_id = layer;
  if (layer_id < 0) {
    layer_id = ckpt.spec.last_conv_layer();
    ecgpipe::require(layer_id >= 0, ecgpipe::Errc::LayerNotFound,
                     "model has no convolution layer; pass --layer explicitly");
  }

  std::vector<ecgpipe::CamSample> samples;
  for (std::size_t i = 0; i < images.size(); ++i) {
    ecgpipe::ImageU8 img = ecgpipe::load_image(images[i]);
    if (ckpt.preproc.grayscale) img = ecgpipe::to_grayscale(img);
    if (ckpt.preproc.gamma) img = ecgpipe::gamma_correct(img);
    img = ecgpipe::resize_bilinear(img, ckpt.preproc.image_size, ckpt.preproc.image_size);
    ecgpipe::CamSample s;
    s.id = std::filesystem::path(images[i]).filename().string();
    s.base = img;
    s.input = ckpt.preproc.zscore == "dataset"
                  ? ecgpipe::zscore_with_stats(
                        img, {{ckpt.preproc.dataset_mean, ckpt.preproc.dataset_stddev}})
                  : ecgpipe::zscore(img);
    s.true_class = labels.empty() ? -1 : labels[i];
    samples.push_back(std::move(s));
  }

  const auto records = ecgpipe::cam_report(backend, samples, layer_id, out, alpha);
  for (const auto& r : records)
    std::cout << r.id << ": predicted=" << r.predicted_class << " target=" << r.target_class
              << " -> " << r.heatmap_file << "\n";
  return kExitOk;
}

int cmd_preview(const std::string& image, const std::string& out) {
  const auto [orig, corrected] = ecgpipe::preview_gamma(image, out);
  std::cout << "wrote " << orig.string() << " and " << corrected.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ECG trace image classification pipeline"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_root, ingest_out = "manifest.json";
  auto* ingest = app.add_subcommand("ingest", "scan a class-per-directory corpus into a manifest");
  ingest->add_option("--root", ingest_root, "dataset root directory")->required();
  ingest->add_option("--out", ingest_out, "output manifest path");

  // run
  std::string run_config, run_seed, run_out, run_scheme;
  int run_folds = 0, run_image_size = 0;
  auto* run = app.add_subcommand("run", "run the full cross-validated experiment");
  run->add_option("--config", run_config, "run config JSON")->required();
  run->add_option("--seed", run_seed, "override the master seed");
  run->add_option("--out", run_out, "override the output directory");
  run->add_option("--scheme", run_scheme, "override the label scheme (two/three/five)");
  run->add_option("--folds", run_folds, "override the fold count");
  run->add_option("--image-size", run_image_size, "override the input image size");

  // eval-external
  std::string ee_pred, ee_plan, ee_out = "eval_out";
  auto* ee = app.add_subcommand("eval-external",
                                "evaluate an external predictions table against a fold plan");
  ee->add_option("--predictions", ee_pred, "CSV: sample_id,p_0..p_{K-1}")->required();
  ee->add_option("--plan", ee_plan, "fold plan JSON from a run")->required();
  ee->add_option("--out", ee_out, "output directory");

  // scorecam
  std::string sc_ckpt, sc_out = "cam_out";
  std::vector<std::string> sc_images;
  std::vector<int> sc_labels;
  int sc_layer = -1;
  double sc_alpha = 0.4;
  auto* sc = app.add_subcommand("scorecam", "emit activation heatmaps and overlays");
  sc->add_option("--checkpoint", sc_ckpt, "trained checkpoint JSON")->required();
  sc->add_option("--images", sc_images, "input image paths")->required();
  sc->add_option("--labels", sc_labels, "true class per image (optional)");
  sc->add_option("--layer", sc_layer, "activation layer id (default: last conv)");
  sc->add_option("--out", sc_out, "output directory");
  sc->add_option("--alpha", sc_alpha, "overlay blend factor in [0,1]");

  // preview
  std::string pv_image, pv_out = "preview_out";
  auto* pv = app.add_subcommand("preview", "write an original/gamma-corrected image pair");
  pv->add_option("--image", pv_image, "input image")->required();
  pv->add_option("--out", pv_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(ingest_root, ingest_out);
    if (*run)
      return cmd_run(run_config, run_seed, run_out, run_scheme, run_folds, run_image_size);
    if (*ee) return cmd_eval_external(ee_pred, ee_plan, ee_out);
    if (*sc) return cmd_scorecam(sc_ckpt, sc_images, sc_labels, sc_layer, sc_out, sc_alpha);
    if (*pv) return cmd_preview(pv_image, pv_out);
  } catch (const ecgpipe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ecgpipe::errc_is_user_error(e.code()) ? kExitUserError : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUserError;
}
