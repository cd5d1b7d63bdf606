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
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgpipe/error.hpp"

namespace ecgpipe {

/// counts[true][pred]. The diagonal holds the correct decisions.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::int64_t> counts;  // row-major K*K

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int k)
      : num_classes(k), counts(static_cast<std::size_t>(k) * k, 0) {
    require(k >= 2, Errc::BadConfig, "confusion matrix needs at least 2 classes");
  }

  std::int64_t& at(int t, int p) {
    return counts[static_cast<std::size_t>(t) * num_classes + p];
  }
  std::int64_t at(int t, int p) const {
    return counts[static_cast<std::size_t>(t) * num_classes + p];
  }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : counts) s += v;
    return s;
  }
  std::int64_t trace() const {
    std::int64_t s = 0;
    for (int i = 0; i < num_classes; ++i) s += at(i, i);
    return s;
  }
  std::int64_t row_sum(int t) const {
    std::int64_t s = 0;
    for (int p = 0; p < num_classes; ++p) s += at(t, p);
    return s;
  }
  std::int64_t col_sum(int p) const {
    std::int64_t s = 0;
    for (int t = 0; t < num_classes; ++t) s += at(t, p);
    return s;
  }
};

inline ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 int num_classes) {
  require(y_true.size() == y_pred.size(), Errc::LengthMismatch,
          "label vectors must have equal length");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    require(t >= 0 && t < num_classes && p >= 0 && p < num_classes, Errc::LabelOutOfRange,
            "label outside [0, K)");
    cm.at(t, p)++;
  }
  return cm;
}

/// One-vs-rest binary reduction for a single class.
struct OneVsRest {
  std::int64_t tp = 0, fn = 0, fp = 0, tn = 0;
};

inline OneVsRest one_vs_rest(const ConfusionMatrix& cm, int cls) {
  OneVsRest r;
  r.tp = cm.at(cls, cls);
  r.fn = cm.row_sum(cls) - r.tp;
  r.fp = cm.col_sum(cls) - r.tp;
  r.tn = cm.total() - r.tp - r.fn - r.fp;
  return r;
}

struct ClassMetrics {
  std::int64_t support = 0;  // true-class sample count
  double precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some denominator was zero; affected metrics read 0
};

namespace metrics_detail {
inline double safe_div(std::int64_t num, std::int64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace metrics_detail

/// sensitivity = TP/(TP+FN), specificity = TN/(TN+FP), precision = TP/(TP+FP),
/// F1 = 2TP/(2TP+FN+FP), each one-vs-rest per class. A zero denominator
/// yields 0 and sets the degenerate flag.
inline std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  require(cm.total() > 0, Errc::EmptyMatrix, "confusion matrix has no samples");
  std::vector<ClassMetrics> out(static_cast<std::size_t>(cm.num_classes));
  for (int c = 0; c < cm.num_classes; ++c) {
    const OneVsRest r = one_vs_rest(cm, c);
    ClassMetrics& m = out[static_cast<std::size_t>(c)];
    m.support = r.tp + r.fn;
    m.sensitivity = metrics_detail::safe_div(r.tp, r.tp + r.fn, m.degenerate);
    m.specificity = metrics_detail::safe_div(r.tn, r.tn + r.fp, m.degenerate);
    m.precision = metrics_detail::safe_div(r.tp, r.tp + r.fp, m.degenerate);
    m.f1 = metrics_detail::safe_div(2 * r.tp, 2 * r.tp + r.fn + r.fp, m.degenerate);
  }
  return out;
}

inline double overall_accuracy(const ConfusionMatrix& cm) {
  require(cm.total() > 0, Errc::EmptyMatrix, "confusion matrix has no samples");
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

struct WeightedMetrics {
  double precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
};

/// Support-weighted average of per-class metrics.
inline WeightedMetrics weighted_metrics(const std::vector<ClassMetrics>& per_class) {
  std::int64_t total = 0;
  for (const auto& m : per_class) total += m.support;
  require(total > 0, Errc::EmptyMatrix, "supports sum to zero");
  WeightedMetrics w;
  for (const auto& m : per_class) {
    const double frac = static_cast<double>(m.support) / static_cast<double>(total);
    w.precision += frac * m.precision;
    w.sensitivity += frac * m.sensitivity;
    w.specificity += frac * m.specificity;
    w.f1 += frac * m.f1;
  }
  return w;
}

/// 95% CI half-width: r = z * sqrt(metric * (1 - metric) / N).
inline double ci_halfwidth(double metric, std::int64_t n, double z = 1.96) {
  require(n > 0, Errc::ZeroN, "CI requires N > 0");
  require(metric >= 0.0 && metric <= 1.0, Errc::BadConfig, "metric must lie in [0,1]");
  return z * std::sqrt(metric * (1.0 - metric) / static_cast<double>(n));
}

struct MetricsReport {
  int num_classes = 0;
  std::int64_t n = 0;
  ConfusionMatrix cm;
  double accuracy = 0.0;
  double accuracy_ci = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<double> per_class_f1_ci;
  WeightedMetrics weighted;
  WeightedMetrics weighted_ci;
};

inline MetricsReport make_report(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.num_classes = cm.num_classes;
  r.n = cm.total();
  r.cm = cm;
  r.accuracy = overall_accuracy(cm);
  r.accuracy_ci = ci_halfwidth(r.accuracy, r.n);
  r.per_class = per_class_metrics(cm);
  for (const auto& m : r.per_class) r.per_class_f1_ci.push_back(ci_halfwidth(m.f1, r.n));
  r.weighted = weighted_metrics(r.per_class);
  r.weighted_ci.precision = ci_halfwidth(r.weighted.precision, r.n);
  r.weighted_ci.sensitivity = ci_halfwidth(r.weighted.sensitivity, r.n);
  r.weighted_ci.specificity = ci_halfwidth(r.weighted.specificity, r.n);
  r.weighted_ci.f1 = ci_halfwidth(r.weighted.f1, r.n);
  return r;
}

/// Pools fold results by summing confusion matrices element-wise and
/// recomputing every metric from the pooled matrix; N for the CI becomes the
/// pooled test count.
inline MetricsReport aggregate_folds(const std::vector<ConfusionMatrix>& folds) {
  require(!folds.empty(), Errc::FoldCountMismatch, "no fold reports to aggregate");
  ConfusionMatrix pooled(folds.front().num_classes);
  for (const auto& cm : folds) {
    require(cm.num_classes == pooled.num_classes, Errc::FoldCountMismatch,
            "fold confusion matrices disagree on class count");
    for (std::size_t i = 0; i < pooled.counts.size(); ++i) pooled.counts[i] += cm.counts[i];
  }
  return make_report(pooled);
}

// ---- serialization ----

inline nlohmann::ordered_json metrics_report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["num_classes"] = r.num_classes;
  j["accuracy"] = r.accuracy;
  j["accuracy_ci95"] = r.accuracy_ci;
  j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    j["per_class"].push_back({{"class", c},
                              {"support", m.support},
                              {"precision", m.precision},
                              {"sensitivity", m.sensitivity},
                              {"specificity", m.specificity},
                              {"f1", m.f1},
                              {"f1_ci95", r.per_class_f1_ci[c]},
                              {"degenerate", m.degenerate}});
  }
  j["weighted"] = {{"precision", r.weighted.precision},
                   {"sensitivity", r.weighted.sensitivity},
                   {"specificity", r.weighted.specificity},
                   {"f1", r.weighted.f1}};
  j["weighted_ci95"] = {{"precision", r.weighted_ci.precision},
                        {"sensitivity", r.weighted_ci.sensitivity},
                        {"specificity", r.weighted_ci.specificity},
                        {"f1", r.weighted_ci.f1}};
  j["confusion"] = nlohmann::ordered_json::array();
  for (int t = 0; t < r.num_classes; ++t) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int p = 0; p < r.num_classes; ++p) row.push_back(r.cm.at(t, p));
    j["confusion"].push_back(std::move(row));
  }
  return j;
}

inline std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true_class\\pred_class";
  for (int p = 0; p < cm.num_classes; ++p) out << "," << p;
  out << "\n";
  for (int t = 0; t < cm.num_classes; ++t) {
    out << t;
    for (int p = 0; p < cm.num_classes; ++p) out << "," << cm.at(t, p);
    out << "\n";
  }
  return out.str();
}

}  // namespace ecgpipe
