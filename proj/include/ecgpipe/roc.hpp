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

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ecgpipe/error.hpp"

namespace ecgpipe {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1), non-decreasing
  double auc = 0.0;
};

/// ROC over binary labels. Thresholds are taken at distinct score values with
/// ties grouped, so the trapezoidal AUC equals the pairwise rank statistic
/// P(score+ > score-) + 0.5 * P(tie). With higher_is_positive=false the score
/// ordering is reversed.
inline RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels,
                        bool higher_is_positive = true) {
  require(scores.size() == labels.size(), Errc::LengthMismatch,
          "scores and labels must have equal length");
  std::int64_t pos = 0, neg = 0;
  for (int l : labels) {
    require(l == 0 || l == 1, Errc::LabelOutOfRange, "labels must be 0/1");
    (l == 1 ? pos : neg)++;
  }
  require(pos > 0 && neg > 0, Errc::SingleClass, "both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_positive ? scores[a] > scores[b] : scores[a] < scores[b];
  });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // consume the whole tie group at this threshold
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp)++;
      ++j;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
    i = j;
  }

  double auc = 0.0;
  for (std::size_t p = 1; p < curve.points.size(); ++p) {
    const auto& a = curve.points[p - 1];
    const auto& b = curve.points[p];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

struct MultiClassRoc {
  std::vector<RocCurve> per_class;  // one-vs-rest, class c positive
  RocCurve micro;                   // all (prob, indicator) pairs pooled
};

/// probs[i] is the K-vector for sample i.
inline MultiClassRoc roc_one_vs_rest(const std::vector<std::vector<double>>& probs,
                                     const std::vector<int>& labels, int num_classes) {
  require(probs.size() == labels.size(), Errc::LengthMismatch,
          "probs and labels must have equal length");
  MultiClassRoc out;
  std::vector<double> micro_scores;
  std::vector<int> micro_labels;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<double> s(probs.size());
    std::vector<int> l(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      s[i] = probs[i][static_cast<std::size_t>(c)];
      l[i] = labels[i] == c ? 1 : 0;
      micro_scores.push_back(s[i]);
      micro_labels.push_back(l[i]);
    }
    out.per_class.push_back(roc_auc(s, l));
  }
  out.micro = roc_auc(micro_scores, micro_labels);
  return out;
}

inline std::string roc_to_csv(const MultiClassRoc& roc) {
  std::ostringstream out;
  out << "class,fpr,tpr\n";
  for (std::size_t c = 0; c < roc.per_class.size(); ++c)
    for (const auto& p : roc.per_class[c].points) out << c << "," << p.fpr << "," << p.tpr << "\n";
  for (const auto& p : roc.micro.points) out << "micro," << p.fpr << "," << p.tpr << "\n";
  return out.str();
}

}  // namespace ecgpipe
