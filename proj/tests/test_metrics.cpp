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

#include <cmath>

#include "ecgpipe/metrics.hpp"
#include "ecgpipe/rng.hpp"

using namespace ecgpipe;

namespace {

// Brute-force reference: expand the matrix into per-sample (true, pred)
// pairs, then count TP/FP/FN/TN per class with plain loops. No shared code
// with the engine.
struct BruteClass {
  double precision = 0, sensitivity = 0, specificity = 0, f1 = 0;
};

struct Brute {
  double accuracy = 0;
  std::vector<BruteClass> per_class;
};

Brute brute_force(const ConfusionMatrix& cm) {
  std::vector<std::pair<int, int>> samples;
  for (int t = 0; t < cm.num_classes; ++t)
    for (int p = 0; p < cm.num_classes; ++p)
      for (std::int64_t i = 0; i < cm.at(t, p); ++i) samples.emplace_back(t, p);

  Brute out;
  std::int64_t correct = 0;
  for (const auto& [t, p] : samples)
    if (t == p) ++correct;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());

  for (int c = 0; c < cm.num_classes; ++c) {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const auto& [t, p] : samples) {
      const bool is_pos = t == c, said_pos = p == c;
      if (is_pos && said_pos) ++tp;
      if (!is_pos && said_pos) ++fp;
      if (is_pos && !said_pos) ++fn;
      if (!is_pos && !said_pos) ++tn;
    }
    BruteClass bc;
    bc.sensitivity = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
    bc.specificity = tn + fp == 0 ? 0.0 : double(tn) / double(tn + fp);
    bc.precision = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
    bc.f1 = 2 * tp + fn + fp == 0 ? 0.0 : double(2 * tp) / double(2 * tp + fn + fp);
    out.per_class.push_back(bc);
  }
  return out;
}

// the two-class matrix behind the headline result: 10 of 250 positives
// called negative, every negative correct
ConfusionMatrix headline_two_class() {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 859;
  cm.at(1, 0) = 10;
  cm.at(1, 1) = 240;
  return cm;
}

}  // namespace

TEST(Confusion, PerfectPredictionsAreDiagonal) {
  const std::vector<int> y = {0, 1, 2, 1, 0, 2, 2};
  const ConfusionMatrix cm = confusion(y, y, 3);
  EXPECT_EQ(cm.trace(), 7);
  EXPECT_EQ(cm.total(), 7);
}

TEST(Confusion, HeadlineMatrixCounts) {
  std::vector<int> y_true, y_pred;
  for (int i = 0; i < 859; ++i) {
    y_true.push_back(0);
    y_pred.push_back(0);
  }
  for (int i = 0; i < 250; ++i) {
    y_true.push_back(1);
    y_pred.push_back(i < 10 ? 0 : 1);
  }
  const ConfusionMatrix cm = confusion(y_true, y_pred, 2);
  EXPECT_EQ(cm.at(1, 0), 10);
  EXPECT_EQ(cm.trace(), 1099);
}

TEST(Confusion, LengthMismatchRejected) {
  try {
    confusion({0, 1}, {0}, 2);
    FAIL() << "expected LengthMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
}

TEST(Confusion, LabelOutOfRangeRejected) {
  try {
    confusion({0, 2}, {0, 1}, 2);
    FAIL() << "expected LabelOutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LabelOutOfRange);
  }
}

TEST(PerClassMetrics, HeadlineAccuracyAndCovidColumns) {
  const ConfusionMatrix cm = headline_two_class();
  EXPECT_NEAR(overall_accuracy(cm), 1099.0 / 1109.0, 1e-15);
  EXPECT_NEAR(overall_accuracy(cm), 0.9910, 5e-4);
  const auto pc = per_class_metrics(cm);
  EXPECT_NEAR(pc[1].sensitivity, 240.0 / 250.0, 1e-15);  // 0.96
  EXPECT_NEAR(pc[1].precision, 1.0, 1e-15);              // 240/240
  EXPECT_NEAR(pc[0].specificity, 240.0 / 250.0, 1e-15);
}

TEST(PerClassMetrics, IdentityPredictionsScoreOne) {
  ConfusionMatrix cm(3);
  cm.at(0, 0) = 5;
  cm.at(1, 1) = 9;
  cm.at(2, 2) = 2;
  const auto pc = per_class_metrics(cm);
  EXPECT_EQ(overall_accuracy(cm), 1.0);
  for (const auto& m : pc) {
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.sensitivity, 1.0);
    EXPECT_EQ(m.specificity, 1.0);
    EXPECT_EQ(m.f1, 1.0);
    EXPECT_FALSE(m.degenerate);
  }
}

TEST(PerClassMetrics, EmptyMatrixRejected) {
  const ConfusionMatrix cm(2);
  try {
    per_class_metrics(cm);
    FAIL() << "expected EmptyMatrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyMatrix);
  }
}

TEST(PerClassMetrics, ZeroDenominatorFlagsDegenerate) {
  // nothing ever predicted as class 1 and no true class-1 samples
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 4;
  const auto pc = per_class_metrics(cm);
  EXPECT_TRUE(pc[1].degenerate);
  EXPECT_EQ(pc[1].precision, 0.0);
  EXPECT_EQ(pc[1].sensitivity, 0.0);
  EXPECT_EQ(pc[1].f1, 0.0);
}

TEST(PerClassMetrics, AgreesWithBruteForceOnRandomMatrices) {
  Rng rng(2024);
  for (int iter = 0; iter < 1000; ++iter) {
    const int k = std::vector<int>{2, 3, 5}[static_cast<std::size_t>(rng.uniform_int(0, 2))];
    ConfusionMatrix cm(k);
    for (auto& v : cm.counts) v = rng.uniform_int(0, 12);
    if (cm.total() == 0) cm.at(0, 0) = 1;
    const auto engine = per_class_metrics(cm);
    const Brute ref = brute_force(cm);
    ASSERT_NEAR(overall_accuracy(cm), ref.accuracy, 1e-12);
    for (int c = 0; c < k; ++c) {
      ASSERT_NEAR(engine[static_cast<std::size_t>(c)].precision, ref.per_class[static_cast<std::size_t>(c)].precision, 1e-12);
      ASSERT_NEAR(engine[static_cast<std::size_t>(c)].sensitivity, ref.per_class[static_cast<std::size_t>(c)].sensitivity, 1e-12);
      ASSERT_NEAR(engine[static_cast<std::size_t>(c)].specificity, ref.per_class[static_cast<std::size_t>(c)].specificity, 1e-12);
      ASSERT_NEAR(engine[static_cast<std::size_t>(c)].f1, ref.per_class[static_cast<std::size_t>(c)].f1, 1e-12);
    }
  }
}

TEST(PerClassMetrics, TwoClassSensitivitySpecificityDuality) {
  Rng rng(7);
  for (int iter = 0; iter < 50; ++iter) {
    ConfusionMatrix cm(2);
    for (auto& v : cm.counts) v = rng.uniform_int(1, 40);
    const auto pc = per_class_metrics(cm);
    EXPECT_NEAR(pc[1].sensitivity, pc[0].specificity, 1e-15);
    EXPECT_NEAR(pc[0].sensitivity, pc[1].specificity, 1e-15);
  }
}

TEST(PerClassMetrics, AccuracyInvariantUnderClassPermutation) {
  Rng rng(8);
  ConfusionMatrix cm(3);
  for (auto& v : cm.counts) v = rng.uniform_int(0, 20);
  cm.at(0, 0) += 1;
  const std::vector<int> perm = {2, 0, 1};
  ConfusionMatrix pcm(3);
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p)
      pcm.at(perm[static_cast<std::size_t>(t)], perm[static_cast<std::size_t>(p)]) = cm.at(t, p);
  EXPECT_NEAR(overall_accuracy(cm), overall_accuracy(pcm), 1e-15);
}

TEST(WeightedMetrics, EqualValuesPassThrough) {
  std::vector<ClassMetrics> pc(3);
  for (auto& m : pc) {
    m.support = 10;
    m.precision = m.sensitivity = m.specificity = m.f1 = 0.75;
  }
  pc[1].support = 31;
  const WeightedMetrics w = weighted_metrics(pc);
  EXPECT_NEAR(w.precision, 0.75, 1e-15);
  EXPECT_NEAR(w.f1, 0.75, 1e-15);
}

TEST(WeightedMetrics, NineToOneSplit) {
  std::vector<ClassMetrics> pc(2);
  pc[0].support = 9;
  pc[0].precision = pc[0].sensitivity = pc[0].specificity = pc[0].f1 = 1.0;
  pc[1].support = 1;
  const WeightedMetrics w = weighted_metrics(pc);
  EXPECT_NEAR(w.precision, 0.9, 1e-15);
}

TEST(WeightedMetrics, SingleClassIsItsOwnAverage) {
  std::vector<ClassMetrics> pc(1);
  pc[0].support = 5;
  pc[0].f1 = 0.42;
  EXPECT_NEAR(weighted_metrics(pc).f1, 0.42, 1e-15);
}

TEST(CiHalfwidth, ZeroAtDegenerateMetric) {
  EXPECT_EQ(ci_halfwidth(0.0, 50), 0.0);
  EXPECT_EQ(ci_halfwidth(1.0, 50), 0.0);
}

TEST(CiHalfwidth, HalfAtHundredSamples) {
  EXPECT_NEAR(ci_halfwidth(0.5, 100), 0.098, 1e-12);
}

TEST(CiHalfwidth, HeadlineAccuracyInterval) {
  const double acc = 1099.0 / 1109.0;
  const double expected = 1.96 * std::sqrt(acc * (1.0 - acc) / 1109.0);
  EXPECT_NEAR(ci_halfwidth(acc, 1109), expected, 1e-15);
  EXPECT_NEAR(expected, 0.0056, 2e-4);
}

TEST(CiHalfwidth, ZeroSamplesRejected) {
  try {
    ci_halfwidth(0.5, 0);
    FAIL() << "expected ZeroN";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroN);
  }
}

TEST(CiHalfwidth, MaximalAtOneHalf) {
  const double at_half = ci_halfwidth(0.5, 64);
  for (double m : {0.1, 0.3, 0.45, 0.55, 0.8, 0.99})
    EXPECT_LT(ci_halfwidth(m, 64), at_half + 1e-15);
}

TEST(AggregateFolds, IdenticalFoldsKeepMetrics) {
  const ConfusionMatrix cm = headline_two_class();
  const MetricsReport single = make_report(cm);
  const MetricsReport pooled = aggregate_folds({cm, cm, cm, cm, cm});
  EXPECT_NEAR(pooled.accuracy, single.accuracy, 1e-15);
  EXPECT_NEAR(pooled.weighted.f1, single.weighted.f1, 1e-15);
  EXPECT_EQ(pooled.n, 5 * single.n);
}

TEST(AggregateFolds, PooledAccuracyEqualsRecount) {
  Rng rng(99);
  std::vector<ConfusionMatrix> folds;
  std::int64_t correct = 0, total = 0;
  for (int f = 0; f < 5; ++f) {
    ConfusionMatrix cm(3);
    for (auto& v : cm.counts) v = rng.uniform_int(0, 30);
    correct += cm.trace();
    total += cm.total();
    folds.push_back(std::move(cm));
  }
  const MetricsReport pooled = aggregate_folds(folds);
  EXPECT_NEAR(pooled.accuracy, static_cast<double>(correct) / static_cast<double>(total), 1e-15);
  EXPECT_EQ(pooled.n, total);
}

TEST(AggregateFolds, MismatchedClassCountsRejected) {
  try {
    aggregate_folds({ConfusionMatrix(2), ConfusionMatrix(3)});
    FAIL() << "expected FoldCountMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::FoldCountMismatch);
  }
}

TEST(MetricsReport, AllValuesInUnitIntervalAndJsonStable) {
  Rng rng(55);
  ConfusionMatrix cm(5);
  for (auto& v : cm.counts) v = rng.uniform_int(0, 25);
  cm.at(0, 0) += 1;
  const MetricsReport r = make_report(cm);
  EXPECT_GE(r.accuracy, 0.0);
  EXPECT_LE(r.accuracy, 1.0);
  for (const auto& m : r.per_class) {
    for (double v : {m.precision, m.sensitivity, m.specificity, m.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(metrics_report_to_json(r).dump(), metrics_report_to_json(make_report(cm)).dump());
}
