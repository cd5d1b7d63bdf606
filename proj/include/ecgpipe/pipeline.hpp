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

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgpipe/augment.hpp"
#include "ecgpipe/backend.hpp"
#include "ecgpipe/checkpoint.hpp"
#include "ecgpipe/dataset.hpp"
#include "ecgpipe/image_io.hpp"
#include "ecgpipe/imgproc.hpp"
#include "ecgpipe/metrics.hpp"
#include "ecgpipe/model.hpp"
#include "ecgpipe/roc.hpp"
#include "ecgpipe/scorecam.hpp"
#include "ecgpipe/timing.hpp"
#include "ecgpipe/train.hpp"

namespace ecgpipe {

struct AugmentSettings {
  bool enabled = true;
  int target = 2500;
  std::map<std::string, int> overrides;  // class name -> replication factor
};

struct RunConfig {
  std::string dataset_root;
  LabelScheme scheme = LabelScheme::TwoClass;
  int image_size = 64;
  int folds = 5;
  double val_frac = 0.10;
  bool gamma = true;
  std::string zscore = "image";  // "image" or "dataset"
  AugmentSettings augment;
  std::vector<int> conv_channels = {16, 16, 16};
  TrainConfig train;
  std::uint64_t seed = 42;
  std::string out_dir = "run_out";

  void validate() const {
    require(!dataset_root.empty(), Errc::BadConfig, "dataset_root is required");
    require(image_size >= 8, Errc::BadConfig, "image_size must be at least 8");
    require(folds >= 2, Errc::BadConfig, "folds must be at least 2");
    require(zscore == "image" || zscore == "dataset", Errc::BadConfig,
            "zscore must be \"image\" or \"dataset\"");
    require(!conv_channels.empty(), Errc::BadConfig, "at least one conv block is required");
    train.validate();
  }
};

inline nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["dataset_root"] = c.dataset_root;
  j["scheme"] = scheme_name(c.scheme);
  j["image_size"] = c.image_size;
  j["folds"] = c.folds;
  j["val_frac"] = c.val_frac;
  j["gamma"] = c.gamma;
  j["zscore"] = c.zscore;
  j["augment"] = {{"enabled", c.augment.enabled},
                  {"target", c.augment.target},
                  {"overrides", c.augment.overrides}};
  j["model"] = {{"conv_channels", c.conv_channels}};
  j["train"] = {{"learning_rate", c.train.learning_rate}, {"batch_size", c.train.batch_size},
                {"max_epochs", c.train.max_epochs},       {"patience", c.train.patience},
                {"dropout", c.train.dropout},             {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},                 {"epsilon", c.train.epsilon}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.dataset_root = j.at("dataset_root").get<std::string>();
    if (j.contains("scheme")) c.scheme = scheme_from_name(j.at("scheme").get<std::string>());
    if (j.contains("image_size")) c.image_size = j.at("image_size").get<int>();
    if (j.contains("folds")) c.folds = j.at("folds").get<int>();
    if (j.contains("val_frac")) c.val_frac = j.at("val_frac").get<double>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<bool>();
    if (j.contains("zscore")) c.zscore = j.at("zscore").get<std::string>();
    if (j.contains("augment")) {
      const auto& ja = j.at("augment");
      if (ja.contains("enabled")) c.augment.enabled = ja.at("enabled").get<bool>();
      if (ja.contains("target")) c.augment.target = ja.at("target").get<int>();
      if (ja.contains("overrides"))
        c.augment.overrides = ja.at("overrides").get<std::map<std::string, int>>();
    }
    if (j.contains("model") && j.at("model").contains("conv_channels"))
      c.conv_channels = j.at("model").at("conv_channels").get<std::vector<int>>();
    if (j.contains("train")) {
      const auto& jt = j.at("train");
      if (jt.contains("learning_rate")) c.train.learning_rate = jt.at("learning_rate").get<double>();
      if (jt.contains("batch_size")) c.train.batch_size = jt.at("batch_size").get<int>();
      if (jt.contains("max_epochs")) c.train.max_epochs = jt.at("max_epochs").get<int>();
      if (jt.contains("patience")) c.train.patience = jt.at("patience").get<int>();
      if (jt.contains("dropout")) c.train.dropout = jt.at("dropout").get<double>();
      if (jt.contains("beta1")) c.train.beta1 = jt.at("beta1").get<double>();
      if (jt.contains("beta2")) c.train.beta2 = jt.at("beta2").get<double>();
      if (jt.contains("epsilon")) c.train.epsilon = jt.at("epsilon").get<double>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::BadConfig, std::string("invalid run config: ") + e.what());
  }
  c.validate();
  return c;
}

// seed streams derived from the master seed
struct DerivedSeeds {
  std::uint64_t split, augment, init, train;
  static DerivedSeeds from(std::uint64_t master) {
    return {mix_seed(master, 1), mix_seed(master, 2), mix_seed(master, 3), mix_seed(master, 4)};
  }
};

namespace pipeline_detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), Errc::FileNotFound, "cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace pipeline_detail

/// One fold's test-set evaluation: ids, true labels, probability rows.
struct FoldEval {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<std::vector<double>> probs;

  ConfusionMatrix confusion_matrix(int num_classes) const {
    return confusion(labels, argmax_rows(probs), num_classes);
  }
};

struct RunResult {
  MetricsReport pooled;
  std::vector<MetricsReport> per_fold;
  std::filesystem::path out_dir;
};

namespace pipeline_detail {

inline void write_fold_bundle(const std::filesystem::path& dir, const FoldEval& ev,
                              int num_classes) {
  std::filesystem::create_directories(dir);
  const ConfusionMatrix cm = ev.confusion_matrix(num_classes);
  write_json(dir / "metrics.json", metrics_report_to_json(make_report(cm)));
  write_text(dir / "confusion.csv", confusion_to_csv(cm));
  write_text(dir / "roc.csv", roc_to_csv(roc_one_vs_rest(ev.probs, ev.labels, num_classes)));
  write_predictions_csv(dir / "predictions.csv", ev.ids, ev.probs);
}

inline MetricsReport write_report_bundle(const std::filesystem::path& out_dir,
                                         const std::vector<FoldEval>& folds, int num_classes,
                                         std::vector<MetricsReport>* fold_reports) {
  std::vector<ConfusionMatrix> cms;
  FoldEval pooled_ev;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const FoldEval& ev = folds[f];
    write_fold_bundle(out_dir / ("fold_" + std::to_string(f)), ev, num_classes);
    cms.push_back(ev.confusion_matrix(num_classes));
    if (fold_reports) fold_reports->push_back(make_report(cms.back()));
    pooled_ev.ids.insert(pooled_ev.ids.end(), ev.ids.begin(), ev.ids.end());
    pooled_ev.labels.insert(pooled_ev.labels.end(), ev.labels.begin(), ev.labels.end());
    pooled_ev.probs.insert(pooled_ev.probs.end(), ev.probs.begin(), ev.probs.end());
  }
  const MetricsReport pooled = aggregate_folds(cms);
  const auto pooled_dir = out_dir / "pooled";
  std::filesystem::create_directories(pooled_dir);
  write_json(pooled_dir / "metrics.json", metrics_report_to_json(pooled));
  write_text(pooled_dir / "confusion.csv", confusion_to_csv(pooled.cm));
  write_text(pooled_dir / "roc.csv",
             roc_to_csv(roc_one_vs_rest(pooled_ev.probs, pooled_ev.labels, num_classes)));
  return pooled;
}

inline std::string summary_text(const MetricsReport& pooled,
                                const std::vector<MetricsReport>& per_fold, LabelScheme scheme) {
  std::ostringstream out;
  out.precision(4);
  out << std::fixed;
  out << "scheme: " << scheme_name(scheme) << "\n";
  out << "pooled test samples: " << pooled.n << "\n\n";
  out << "pooled accuracy: " << 100.0 * pooled.accuracy << "% +/- "
      << 100.0 * pooled.accuracy_ci << " (95% CI)\n";
  out << "weighted precision:   " << 100.0 * pooled.weighted.precision << "% +/- "
      << 100.0 * pooled.weighted_ci.precision << "\n";
  out << "weighted sensitivity: " << 100.0 * pooled.weighted.sensitivity << "% +/- "
      << 100.0 * pooled.weighted_ci.sensitivity << "\n";
  out << "weighted specificity: " << 100.0 * pooled.weighted.specificity << "% +/- "
      << 100.0 * pooled.weighted_ci.specificity << "\n";
  out << "weighted F1:          " << 100.0 * pooled.weighted.f1 << "% +/- "
      << 100.0 * pooled.weighted_ci.f1 << "\n\n";
  out << "per class (pooled):\n";
  for (std::size_t c = 0; c < pooled.per_class.size(); ++c) {
    const auto& m = pooled.per_class[c];
    out << "  " << scheme_class_name(scheme, static_cast<int>(c)) << ": support=" << m.support
        << " precision=" << m.precision << " sensitivity=" << m.sensitivity
        << " specificity=" << m.specificity << " f1=" << m.f1 << "\n";
  }
  out << "\nper fold accuracy:";
  for (const auto& r : per_fold) out << " " << r.accuracy;
  out << "\n";
  return out.str();
}

}  // namespace pipeline_detail

/// Full experiment: ingest, label, stratified split, per fold (augment the
/// training split only, train, evaluate), then pooled aggregation. All
/// artifacts land under cfg.out_dir. Deterministic given the config.
inline RunResult run_experiment(const RunConfig& cfg, std::ostream* log = &std::cerr) {
  namespace fs = std::filesystem;
  cfg.validate();
  const DerivedSeeds seeds = DerivedSeeds::from(cfg.seed);
  const fs::path out_dir = cfg.out_dir;
  fs::create_directories(out_dir);

  {
    nlohmann::ordered_json snap = run_config_to_json(cfg);
    snap["derived_seeds"] = {{"split", seeds.split},
                             {"augment", seeds.augment},
                             {"init", seeds.init},
                             {"train", seeds.train}};
    pipeline_detail::write_json(out_dir / "config_snapshot.json", snap);
  }

  const Manifest manifest = ingest(cfg.dataset_root);
  pipeline_detail::write_json(out_dir / "manifest.json", manifest_to_json(manifest));

  const LabeledSet labeled = map_labels(manifest, cfg.scheme);
  const int num_classes = labeled.num_classes();
  const FoldPlan plan = split_kfold(labeled, cfg.folds, cfg.val_frac, seeds.split);
  pipeline_detail::write_json(out_dir / "fold_plan.json", fold_plan_to_json(plan, labeled));

  {
    const SplitCounts counts = fold_counts(plan, labeled);
    std::ostringstream csv;
    csv << "fold,class,train,val,test\n";
    for (int f = 0; f < plan.k; ++f)
      for (int c = 0; c < num_classes; ++c)
        csv << f << "," << scheme_class_name(cfg.scheme, c) << ","
            << counts.train[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)] << ","
            << counts.val[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)] << ","
            << counts.test[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)] << "\n";
    pipeline_detail::write_text(out_dir / "fold_counts.csv", csv.str());
  }

  // shared preprocessing: grayscale -> gamma -> resize
  if (log) *log << "preprocessing " << labeled.samples.size() << " images\n";
  std::vector<ImageU8> preprocessed;
  preprocessed.reserve(labeled.samples.size());
  for (const auto& s : labeled.samples) {
    ImageU8 img = to_grayscale(load_image(s.path));
    if (cfg.gamma) img = gamma_correct(img);
    preprocessed.push_back(resize_bilinear(img, cfg.image_size, cfg.image_size));
  }

  const ModelSpec spec = reference_model_spec(1, cfg.image_size, num_classes, cfg.conv_channels,
                                              cfg.train.dropout);
  const PreprocSpec preproc{cfg.image_size, true, cfg.gamma, cfg.zscore};

  std::ostringstream loss_csv;
  loss_csv << "fold,epoch,train_loss,val_loss,val_accuracy\n";
  std::vector<FoldEval> fold_evals;
  nlohmann::ordered_json timing_json = nlohmann::ordered_json::array();

  for (int f = 0; f < plan.k; ++f) {
    const Fold& fold = plan.folds[static_cast<std::size_t>(f)];
    if (log) *log << "fold " << f << ": train=" << fold.train.size()
                  << " val=" << fold.val.size() << " test=" << fold.test.size() << "\n";

    // augmentation planning over the fold's training split only
    std::map<std::string, int> class_counts;
    std::map<std::string, std::vector<int>> train_by_class;
    for (int i : fold.train) {
      const auto& s = labeled.samples[static_cast<std::size_t>(i)];
      const std::string name = scheme_class_name(cfg.scheme, s.label);
      class_counts[name]++;
      train_by_class[name].push_back(i);
    }
    const int target = cfg.augment.enabled ? cfg.augment.target : 1;
    const AugmentPlan aug_plan =
        plan_balance(class_counts, target, cfg.augment.enabled ? cfg.augment.overrides
                                                               : std::map<std::string, int>{},
                     mix_seed(seeds.augment, static_cast<std::uint64_t>(f)));

    // replicas must trace back to training indices only
    std::set<int> train_set(fold.train.begin(), fold.train.end());
    for (int i : fold.val)
      require(!train_set.count(i), Errc::Internal, "validation index inside the training split");
    for (int i : fold.test)
      require(!train_set.count(i), Errc::Internal, "test index inside the training split");

    std::vector<ImageU8> train_images;
    std::vector<int> train_labels;
    for (const auto& cp : aug_plan.classes) {
      const auto& idx = train_by_class.at(cp.class_name);
      std::vector<ImageU8> originals;
      originals.reserve(idx.size());
      int label = -1;
      for (int i : idx) {
        require(train_set.count(i), Errc::Internal,
                "augmentation source outside the training split");
        originals.push_back(preprocessed[static_cast<std::size_t>(i)]);
        label = labeled.samples[static_cast<std::size_t>(i)].label;
      }
      std::vector<ImageU8> expanded = augment_class(originals, cp);
      for (auto& img : expanded) {
        train_images.push_back(std::move(img));
        train_labels.push_back(label);
      }
    }

    const fs::path fold_dir = out_dir / ("fold_" + std::to_string(f));
    fs::create_directories(fold_dir);
    pipeline_detail::write_json(fold_dir / "augment_plan.json", augment_plan_to_json(aug_plan));

    // normalization: per-image stats, or per-channel stats of the fold's
    // original (pre-augmentation) training images
    std::vector<ChannelStats> global_stats;
    if (cfg.zscore == "dataset") {
      double sum = 0.0, sumsq = 0.0;
      std::size_t n = 0;
      for (int i : fold.train) {
        const ImageU8& img = preprocessed[static_cast<std::size_t>(i)];
        for (std::uint8_t p : img.pixels) {
          sum += p;
          sumsq += static_cast<double>(p) * p;
        }
        n += img.pixels.size();
      }
      const double mean = sum / static_cast<double>(n);
      const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
      global_stats = {{mean, std::sqrt(var)}};
    }
    const auto normalize = [&](const ImageU8& img) {
      return cfg.zscore == "dataset" ? zscore_with_stats(img, global_stats) : zscore(img);
    };

    std::vector<TensorF> train_x;
    train_x.reserve(train_images.size());
    for (const auto& img : train_images) train_x.push_back(normalize(img));

    std::vector<TensorF> val_x, test_x;
    std::vector<int> val_y;
    FoldEval ev;
    for (int i : fold.val) {
      val_x.push_back(normalize(preprocessed[static_cast<std::size_t>(i)]));
      val_y.push_back(labeled.samples[static_cast<std::size_t>(i)].label);
    }
    for (int i : fold.test) {
      const auto& s = labeled.samples[static_cast<std::size_t>(i)];
      test_x.push_back(normalize(preprocessed[static_cast<std::size_t>(i)]));
      ev.ids.push_back(s.id);
      ev.labels.push_back(s.label);
    }

    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(seeds.train, static_cast<std::uint64_t>(f));
    const Params<float> initial = init_params<float>(spec, mix_seed(seeds.init, static_cast<std::uint64_t>(f)));
    const TrainResult<float> tr = train(spec, initial, train_x, train_labels, val_x, val_y, tc);
    for (const auto& st : tr.history)
      loss_csv << f << "," << st.epoch << "," << st.train_loss << "," << st.val_loss << ","
               << st.val_accuracy << "\n";
    if (log) *log << "fold " << f << ": best epoch " << tr.best_epoch << " of "
                  << tr.history.size() << "\n";

    PreprocSpec fold_preproc = preproc;
    if (cfg.zscore == "dataset") {
      fold_preproc.dataset_mean = global_stats[0].mean;
      fold_preproc.dataset_stddev = global_stats[0].stddev;
    }
    save_checkpoint({spec, tr.best_params, fold_preproc}, fold_dir / "checkpoint.json");

    const ModelBackend backend(spec, tr.best_params);
    std::size_t at = 0;
    while (at < test_x.size()) {
      const std::size_t n = std::min<std::size_t>(cfg.train.batch_size, test_x.size() - at);
      std::vector<int> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(at + i);
      std::vector<std::string> ids(ev.ids.begin() + at, ev.ids.begin() + at + n);
      auto rows = backend.predict_proba(ids, stack_batch(test_x, idx));
      ev.probs.insert(ev.probs.end(), rows.begin(), rows.end());
      at += n;
    }
    require(ev.probs.size() == ev.ids.size(), Errc::Internal, "prediction count mismatch");

    const TimingResult tim = time_inference(backend, test_x.front());
    timing_json.push_back({{"fold", f},
                           {"median_seconds_per_image", tim.median_seconds},
                           {"variance", tim.variance}});
    fold_evals.push_back(std::move(ev));
  }

  pipeline_detail::write_text(out_dir / "loss_history.csv", loss_csv.str());
  pipeline_detail::write_json(out_dir / "timing.json", timing_json);

  RunResult result;
  result.out_dir = out_dir;
  result.pooled =
      pipeline_detail::write_report_bundle(out_dir, fold_evals, num_classes, &result.per_fold);
  pipeline_detail::write_text(
      out_dir / "summary.txt",
      pipeline_detail::summary_text(result.pooled, result.per_fold, cfg.scheme));
  return result;
}

/// Replays an external predictions table over an existing fold plan and emits
/// the same report bundle as run_experiment (training skipped, so there is no
/// loss history).
inline RunResult eval_external(const std::filesystem::path& predictions_csv,
                               const std::filesystem::path& fold_plan_json,
                               const std::filesystem::path& out_dir) {
  std::ifstream in(fold_plan_json);
  require(static_cast<bool>(in), Errc::FileNotFound, "cannot open " + fold_plan_json.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    raise(Errc::BadConfig, std::string("invalid fold plan JSON: ") + e.what());
  }
  const auto [plan, labeled] = fold_plan_from_json(j);
  const int num_classes = scheme_num_classes(plan.scheme);

  auto [table, k_pred] = read_predictions_csv(predictions_csv);
  require(k_pred == num_classes, Errc::LengthMismatch,
          "predictions have " + std::to_string(k_pred) + " classes, plan expects " +
              std::to_string(num_classes));
  const PredictionsBackend backend(std::move(table), num_classes);
  const TensorF dummy({1, 1, 1, 1});

  std::filesystem::create_directories(out_dir);
  std::vector<FoldEval> fold_evals;
  for (const Fold& fold : plan.folds) {
    FoldEval ev;
    for (int i : fold.test) {
      const auto& s = labeled.samples[static_cast<std::size_t>(i)];
      ev.ids.push_back(s.id);
      ev.labels.push_back(s.label);
    }
    ev.probs = backend.predict_proba(ev.ids, dummy);
    fold_evals.push_back(std::move(ev));
  }

  RunResult result;
  result.out_dir = out_dir;
  result.pooled =
      pipeline_detail::write_report_bundle(out_dir, fold_evals, num_classes, &result.per_fold);
  pipeline_detail::write_text(
      out_dir / "summary.txt",
      pipeline_detail::summary_text(result.pooled, result.per_fold, plan.scheme));
  return result;
}

/// Writes <stem>_original and <stem>_gamma next to each other for visual
/// inspection of the enhancement.
inline std::pair<std::filesystem::path, std::filesystem::path> preview_gamma(
    const std::filesystem::path& image_path, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const ImageU8 img = load_image(image_path);
  const std::string stem = image_path.stem().string();
  const auto orig_path = out_dir / (stem + "_original.png");
  const auto gamma_path = out_dir / (stem + "_gamma.png");
  save_image(img, orig_path);
  save_image(gamma_correct(img), gamma_path);
  return {orig_path, gamma_path};
}

}  // namespace ecgpipe
