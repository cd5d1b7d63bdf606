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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecgpipe/checkpoint.hpp"
#include "ecgpipe/pipeline.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ecgpipe;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ecgpipe_pipe_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  EXPECT_TRUE(static_cast<bool>(in)) << p;
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(ECGPIPE_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  CliResult r;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path make_fixture_corpus(const std::string& name) {
  const fs::path root = fresh_dir(name);
  testsupport::write_corpus(root, {{RawClass::Normal, 8},
                                   {RawClass::COVID19, 8},
                                   {RawClass::MI, 8},
                                   {RawClass::AHB, 8},
                                   {RawClass::RecoveredMI, 8}},
                            24, 77);
  return root;
}

RunConfig small_config(const fs::path& root, const fs::path& out) {
  RunConfig cfg;
  cfg.dataset_root = root.string();
  cfg.scheme = LabelScheme::TwoClass;
  cfg.image_size = 16;
  cfg.folds = 5;
  cfg.val_frac = 0.10;
  cfg.augment.target = 12;  // roughly doubles each training class
  cfg.conv_channels = {4};
  cfg.train.batch_size = 4;
  cfg.train.max_epochs = 2;
  cfg.train.patience = 2;
  cfg.seed = 404;
  cfg.out_dir = out.string();
  return cfg;
}

// fold plan + predictions reproducing the headline two-class result:
// every Normal correct, exactly 10 COVID19 samples called Normal
struct HeadlineFixture {
  fs::path plan_path;
  fs::path predictions_path;
};

HeadlineFixture make_headline_fixture(const fs::path& dir, bool perfect, bool drop_one = false) {
  const Manifest m = testsupport::make_synthetic_manifest(
      {{RawClass::Normal, 859}, {RawClass::COVID19, 250}, {RawClass::MI, 1},
       {RawClass::AHB, 1}, {RawClass::RecoveredMI, 1}});
  const LabeledSet set = map_labels(m, LabelScheme::TwoClass);
  const FoldPlan plan = split_kfold(set, 5, 0.10, 17);

  HeadlineFixture fx;
  fx.plan_path = dir / "plan.json";
  std::ofstream(fx.plan_path) << fold_plan_to_json(plan, set).dump(2);

  std::vector<std::string> ids;
  std::vector<std::vector<double>> probs;
  int covid_errors = 0;
  for (const auto& s : set.samples) {
    if (drop_one && ids.size() == 3) {
      // leave a hole in the table
    } else {
      ids.push_back(s.id);
      if (s.label == 0) {
        probs.push_back({0.95, 0.05});
      } else if (!perfect && covid_errors < 10) {
        probs.push_back({0.7, 0.3});
        ++covid_errors;
      } else {
        probs.push_back({0.02, 0.98});
      }
    }
  }
  fx.predictions_path = dir / "predictions.csv";
  write_predictions_csv(fx.predictions_path, ids, probs);
  return fx;
}

}  // namespace

TEST(RunExperiment, EmitsFullBundle) {
  const fs::path root = make_fixture_corpus("bundle_corpus");
  const fs::path out = fresh_dir("bundle_out");
  std::ostringstream quiet;
  const RunResult result = run_experiment(small_config(root, out), &quiet);

  for (const char* f : {"config_snapshot.json", "manifest.json", "fold_plan.json",
                        "fold_counts.csv", "loss_history.csv", "timing.json", "summary.txt"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  for (int f = 0; f < 5; ++f) {
    const fs::path fd = out / ("fold_" + std::to_string(f));
    for (const char* name :
         {"metrics.json", "confusion.csv", "roc.csv", "predictions.csv", "augment_plan.json",
          "checkpoint.json"})
      EXPECT_TRUE(fs::exists(fd / name)) << fd / name;
  }
  for (const char* name : {"metrics.json", "confusion.csv", "roc.csv"})
    EXPECT_TRUE(fs::exists(out / "pooled" / name)) << name;

  EXPECT_EQ(result.per_fold.size(), 5u);
  EXPECT_EQ(result.pooled.n, 16);  // two-class labeled set is 8 + 8

  // seeds recorded in the snapshot
  const auto snap = nlohmann::json::parse(slurp(out / "config_snapshot.json"));
  EXPECT_EQ(snap.at("seed").get<std::uint64_t>(), 404u);
  EXPECT_TRUE(snap.contains("derived_seeds"));
}

TEST(RunExperiment, RepeatedRunsAreByteIdentical) {
  const fs::path root = make_fixture_corpus("det_corpus");
  const fs::path out_a = fresh_dir("det_a");
  const fs::path out_b = fresh_dir("det_b");
  std::ostringstream quiet;
  RunConfig cfg_a = small_config(root, out_a);
  RunConfig cfg_b = small_config(root, out_b);
  run_experiment(cfg_a, &quiet);
  run_experiment(cfg_b, &quiet);
  EXPECT_EQ(slurp(out_a / "pooled" / "metrics.json"), slurp(out_b / "pooled" / "metrics.json"));
  EXPECT_EQ(slurp(out_a / "loss_history.csv"), slurp(out_b / "loss_history.csv"));
  EXPECT_EQ(slurp(out_a / "fold_plan.json"), slurp(out_b / "fold_plan.json"));
}

TEST(RunExperiment, BundleReproducibleFromItsSnapshot) {
  const fs::path root = make_fixture_corpus("snap_corpus");
  const fs::path out = fresh_dir("snap_out");
  std::ostringstream quiet;
  run_experiment(small_config(root, out), &quiet);

  RunConfig from_snap =
      run_config_from_json(nlohmann::json::parse(slurp(out / "config_snapshot.json")));
  from_snap.out_dir = fresh_dir("snap_replay").string();
  run_experiment(from_snap, &quiet);
  EXPECT_EQ(slurp(out / "pooled" / "metrics.json"),
            slurp(fs::path(from_snap.out_dir) / "pooled" / "metrics.json"));
  EXPECT_EQ(slurp(out / "loss_history.csv"),
            slurp(fs::path(from_snap.out_dir) / "loss_history.csv"));
}

TEST(RunExperiment, AugmentPlansCoverTrainSplitOnly) {
  const fs::path root = make_fixture_corpus("aug_corpus");
  const fs::path out = fresh_dir("aug_out");
  std::ostringstream quiet;
  run_experiment(small_config(root, out), &quiet);

  const auto plan_json = nlohmann::json::parse(slurp(out / "fold_plan.json"));
  const auto aug = nlohmann::json::parse(slurp(out / "fold_0" / "augment_plan.json"));
  const auto& fold0 = plan_json.at("folds").at(0);
  // per class, the plan's source_count equals the fold's training count
  std::map<std::string, int> train_counts;
  for (int idx : fold0.at("train").get<std::vector<int>>()) {
    const auto& sample = plan_json.at("samples").at(static_cast<std::size_t>(idx));
    const int label = sample.at("label").get<int>();
    train_counts[label == 0 ? "Normal" : "COVID19"]++;
  }
  for (const auto& jc : aug.at("classes"))
    EXPECT_EQ(jc.at("source_count").get<int>(), train_counts.at(jc.at("class").get<std::string>()));
}

TEST(RunExperiment, DatasetScopedNormalizationStoresFoldStats) {
  const fs::path root = make_fixture_corpus("zscope_corpus");
  const fs::path out = fresh_dir("zscope_out");
  RunConfig cfg = small_config(root, out);
  cfg.zscore = "dataset";
  std::ostringstream quiet;
  run_experiment(cfg, &quiet);

  const Checkpoint ckpt = load_checkpoint(out / "fold_0" / "checkpoint.json");
  EXPECT_EQ(ckpt.preproc.zscore, "dataset");
  EXPECT_GT(ckpt.preproc.dataset_stddev, 0.0);
  EXPECT_GT(ckpt.preproc.dataset_mean, 0.0);
  EXPECT_LT(ckpt.preproc.dataset_mean, 255.0);

  // the stored statistics come from fold 0's training split only
  const auto plan_json = nlohmann::json::parse(slurp(out / "fold_plan.json"));
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  for (int idx : plan_json.at("folds").at(0).at("train").get<std::vector<int>>()) {
    const auto& sample = plan_json.at("samples").at(static_cast<std::size_t>(idx));
    ImageU8 img = to_grayscale(load_image(sample.at("path").get<std::string>()));
    img = gamma_correct(img);
    img = resize_bilinear(img, 16, 16);
    for (std::uint8_t p : img.pixels) {
      sum += p;
      sumsq += static_cast<double>(p) * p;
    }
    n += img.pixels.size();
  }
  const double mean = sum / static_cast<double>(n);
  const double stddev = std::sqrt(std::max(0.0, sumsq / static_cast<double>(n) - mean * mean));
  EXPECT_NEAR(ckpt.preproc.dataset_mean, mean, 1e-9);
  EXPECT_NEAR(ckpt.preproc.dataset_stddev, stddev, 1e-9);
}

TEST(EvalExternal, ReproducesHeadlineAccuracy) {
  const fs::path dir = fresh_dir("headline");
  const HeadlineFixture fx = make_headline_fixture(dir, /*perfect=*/false);
  const RunResult result = eval_external(fx.predictions_path, fx.plan_path, dir / "out");
  EXPECT_EQ(result.pooled.n, 1109);
  EXPECT_EQ(result.pooled.cm.at(1, 0), 10);
  EXPECT_NEAR(result.pooled.accuracy, 1099.0 / 1109.0, 1e-12);
  EXPECT_NEAR(result.pooled.accuracy, 0.9910, 5e-4);
}

TEST(EvalExternal, PerfectPredictionsScoreOne) {
  const fs::path dir = fresh_dir("perfect");
  const HeadlineFixture fx = make_headline_fixture(dir, /*perfect=*/true);
  const RunResult result = eval_external(fx.predictions_path, fx.plan_path, dir / "out");
  EXPECT_EQ(result.pooled.accuracy, 1.0);
  for (const auto& m : result.pooled.per_class) {
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.sensitivity, 1.0);
    EXPECT_EQ(m.f1, 1.0);
  }
}

TEST(EvalExternal, MissingSampleRejected) {
  const fs::path dir = fresh_dir("missing");
  const HeadlineFixture fx = make_headline_fixture(dir, true, /*drop_one=*/true);
  try {
    eval_external(fx.predictions_path, fx.plan_path, dir / "out");
    FAIL() << "expected MissingSample";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingSample);
  }
}

TEST(Preview, WhiteAndBlackImagesAreFixedPoints) {
  const fs::path dir = fresh_dir("preview");
  for (int value : {0, 255}) {
    const ImageU8 img(10, 6, 1, static_cast<std::uint8_t>(value));
    const fs::path p = dir / ("v" + std::to_string(value) + ".pgm");
    save_image(img, p);
    const auto [orig, corrected] = preview_gamma(p, dir / "out");
    EXPECT_EQ(load_image(orig), img);
    EXPECT_EQ(load_image(corrected), img);
  }
}

TEST(Preview, GradientStripMatchesLutPerPixel) {
  const fs::path dir = fresh_dir("preview_grad");
  ImageU8 strip(256, 1, 1);
  for (int x = 0; x < 256; ++x) strip.pixels[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(x);
  const fs::path p = dir / "strip.pgm";
  save_image(strip, p);
  const auto [orig, corrected] = preview_gamma(p, dir / "out");
  const ImageU8 got = load_image(corrected);
  const auto lut = gamma_lut();
  for (int x = 0; x < 256; ++x)
    EXPECT_EQ(got.pixels[static_cast<std::size_t>(x)], lut[static_cast<std::size_t>(x)]) << x;
}

TEST(Cli, IngestWritesManifestAndIsStable) {
  const fs::path root = make_fixture_corpus("cli_ingest");
  const fs::path out = fresh_dir("cli_ingest_out");
  const auto a = run_cli("ingest --root " + root.string() + " --out " + (out / "m.json").string());
  EXPECT_EQ(a.exit_code, 0) << a.output;
  EXPECT_TRUE(fs::exists(out / "m.json"));
  const std::string first = slurp(out / "m.json");
  const auto b = run_cli("ingest --root " + root.string() + " --out " + (out / "m.json").string());
  EXPECT_EQ(b.exit_code, 0);
  EXPECT_EQ(slurp(out / "m.json"), first);
}

TEST(Cli, IngestMissingClassExitsTwoAndNamesIt) {
  const fs::path root = fresh_dir("cli_empty_root");
  const auto r = run_cli("ingest --root " + root.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("Normal"), std::string::npos) << r.output;
}

TEST(Cli, RunEvalExternalAndScorecamEndToEnd) {
  const fs::path root = make_fixture_corpus("cli_run");
  const fs::path out = fresh_dir("cli_run_out");
  const RunConfig cfg = small_config(root, out / "run");
  const fs::path cfg_path = out / "config.json";
  std::ofstream(cfg_path) << run_config_to_json(cfg).dump(2);

  const auto run = run_cli("run --config " + cfg_path.string());
  EXPECT_EQ(run.exit_code, 0) << run.output;
  EXPECT_TRUE(fs::exists(out / "run" / "pooled" / "metrics.json"));

  const auto ee = run_cli("eval-external --predictions " +
                          (out / "run" / "fold_0" / "predictions.csv").string() + " --plan " +
                          (out / "run" / "fold_plan.json").string() + " --out " +
                          (out / "ee").string());
  // fold 0 predictions only cover fold 0's test samples
  EXPECT_EQ(ee.exit_code, 2) << ee.output;
  EXPECT_NE(ee.output.find("MissingSample"), std::string::npos);

  // a complete table built from the fold plan works
  const auto plan_json = nlohmann::json::parse(slurp(out / "run" / "fold_plan.json"));
  std::vector<std::string> ids;
  std::vector<std::vector<double>> probs;
  for (const auto& s : plan_json.at("samples")) {
    ids.push_back(s.at("id").get<std::string>());
    probs.push_back(s.at("label").get<int>() == 0 ? std::vector<double>{1.0, 0.0}
                                                  : std::vector<double>{0.0, 1.0});
  }
  write_predictions_csv(out / "full_preds.csv", ids, probs);
  const auto ee2 = run_cli("eval-external --predictions " + (out / "full_preds.csv").string() +
                           " --plan " + (out / "run" / "fold_plan.json").string() + " --out " +
                           (out / "ee2").string());
  EXPECT_EQ(ee2.exit_code, 0) << ee2.output;
  EXPECT_NE(ee2.output.find("pooled accuracy: 100%"), std::string::npos) << ee2.output;

  // scorecam from the fold-0 checkpoint over a corpus image
  const fs::path sample = root / "Normal" / "img_001.pgm";
  const auto sc = run_cli("scorecam --checkpoint " +
                          (out / "run" / "fold_0" / "checkpoint.json").string() + " --images " +
                          sample.string() + " --labels 0 --out " + (out / "cam").string());
  EXPECT_EQ(sc.exit_code, 0) << sc.output;
  EXPECT_TRUE(fs::exists(out / "cam" / "img_001.pgm_heatmap.pgm"));
  EXPECT_TRUE(fs::exists(out / "cam" / "img_001.pgm_overlay.png"));
  EXPECT_TRUE(fs::exists(out / "cam" / "img_001.pgm_record.json"));

  // preview
  const auto pv = run_cli("preview --image " + sample.string() + " --out " + (out / "pv").string());
  EXPECT_EQ(pv.exit_code, 0) << pv.output;
  EXPECT_TRUE(fs::exists(out / "pv" / "img_001_original.png"));
  EXPECT_TRUE(fs::exists(out / "pv" / "img_001_gamma.png"));
}

TEST(Cli, MissingConfigExitsTwo) {
  const auto r = run_cli("run --config /nonexistent/config.json");
  EXPECT_EQ(r.exit_code, 2);
}
