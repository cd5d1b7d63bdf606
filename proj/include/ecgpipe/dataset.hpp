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
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgpipe/error.hpp"
#include "ecgpipe/rng.hpp"

namespace ecgpipe {

// The corpus has five raw categories; classification runs on one of three
// label schemes derived from them.
enum class RawClass { Normal = 0, COVID19, MI, AHB, RecoveredMI };

inline constexpr std::array<RawClass, 5> kAllRawClasses = {
    RawClass::Normal, RawClass::COVID19, RawClass::MI, RawClass::AHB, RawClass::RecoveredMI};

inline const char* raw_class_name(RawClass c) {
  switch (c) {
    case RawClass::Normal: return "Normal";
    case RawClass::COVID19: return "COVID19";
    case RawClass::MI: return "MI";
    case RawClass::AHB: return "AHB";
    case RawClass::RecoveredMI: return "RecoveredMI";
  }
  return "?";
}

inline RawClass raw_class_from_name(const std::string& name) {
  for (RawClass c : kAllRawClasses)
    if (name == raw_class_name(c)) return c;
  raise(Errc::BadConfig, "unknown class name " + name);
}

enum class LabelScheme { TwoClass, ThreeClass, FiveClass };

inline const char* scheme_name(LabelScheme s) {
  switch (s) {
    case LabelScheme::TwoClass: return "two_class";
    case LabelScheme::ThreeClass: return "three_class";
    case LabelScheme::FiveClass: return "five_class";
  }
  return "?";
}

inline LabelScheme scheme_from_name(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "two" || s == "two_class" || s == "2") return LabelScheme::TwoClass;
  if (s == "three" || s == "three_class" || s == "3") return LabelScheme::ThreeClass;
  if (s == "five" || s == "five_class" || s == "5") return LabelScheme::FiveClass;
  raise(Errc::BadConfig, "unknown scheme \"" + s + "\" (expected two/three/five)");
}

inline int scheme_num_classes(LabelScheme s) {
  switch (s) {
    case LabelScheme::TwoClass: return 2;
    case LabelScheme::ThreeClass: return 3;
    case LabelScheme::FiveClass: return 5;
  }
  return 0;
}

inline constexpr int kDropLabel = -1;

/// Class index for a raw category under a scheme, or kDropLabel for records
/// the scheme excludes.
inline int map_raw_class(RawClass c, LabelScheme s) {
  switch (s) {
    case LabelScheme::TwoClass:
      if (c == RawClass::Normal) return 0;
      if (c == RawClass::COVID19) return 1;
      return kDropLabel;
    case LabelScheme::ThreeClass:
      if (c == RawClass::Normal) return 0;
      if (c == RawClass::COVID19) return 1;
      return 2;
    case LabelScheme::FiveClass:
      return static_cast<int>(c);
  }
  return kDropLabel;
}

/// Display name of class index `label` under a scheme.
inline std::string scheme_class_name(LabelScheme s, int label) {
  if (s == LabelScheme::ThreeClass && label == 2) return "Abnormal";
  if (s == LabelScheme::FiveClass) return raw_class_name(static_cast<RawClass>(label));
  return label == 0 ? "Normal" : "COVID19";
}

struct ManifestRecord {
  std::string id;    // "<ClassName>/<filename>", unique and stable
  std::string path;  // path on disk
  RawClass raw_class = RawClass::Normal;
};

struct Manifest {
  std::string root;
  std::vector<ManifestRecord> records;  // sorted by id

  std::map<std::string, int> counts() const {
    std::map<std::string, int> c;
    for (RawClass rc : kAllRawClasses) c[raw_class_name(rc)] = 0;
    for (const auto& r : records) c[raw_class_name(r.raw_class)]++;
    return c;
  }
};

inline bool has_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm" || ext == ".pgm";
}

/// Scans root/<ClassName>/*.{png,ppm,pgm} for all five class directories.
/// Record order is lexicographic by id, so repeated ingests are identical.
inline Manifest ingest(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  require(fs::is_directory(root), Errc::FileNotFound, root.string() + " is not a directory");
  Manifest m;
  m.root = root.string();
  std::set<std::string> seen;
  for (RawClass rc : kAllRawClasses) {
    const fs::path dir = root / raw_class_name(rc);
    require(fs::is_directory(dir), Errc::MissingClassDir,
            "missing class directory " + dir.string());
    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
      ManifestRecord rec;
      rec.id = std::string(raw_class_name(rc)) + "/" + entry.path().filename().string();
      rec.path = entry.path().string();
      rec.raw_class = rc;
      require(seen.insert(rec.id).second, Errc::DuplicatePath, "duplicate record id " + rec.id);
      m.records.push_back(std::move(rec));
      ++count;
    }
    require(count > 0, Errc::EmptyClass,
            std::string("class directory has no images: ") + dir.string());
  }
  std::sort(m.records.begin(), m.records.end(),
            [](const ManifestRecord& a, const ManifestRecord& b) { return a.id < b.id; });
  return m;
}

struct LabeledSample {
  std::string id;
  std::string path;
  RawClass raw_class = RawClass::Normal;
  int label = 0;
};

struct LabeledSet {
  LabelScheme scheme = LabelScheme::TwoClass;
  std::vector<LabeledSample> samples;

  int num_classes() const { return scheme_num_classes(scheme); }

  std::vector<int> class_counts() const {
    std::vector<int> c(static_cast<std::size_t>(num_classes()), 0);
    for (const auto& s : samples) c[static_cast<std::size_t>(s.label)]++;
    return c;
  }
};

/// Applies a label scheme; records the scheme drops are removed.
inline LabeledSet map_labels(const Manifest& m, LabelScheme scheme) {
  LabeledSet out;
  out.scheme = scheme;
  for (const auto& rec : m.records) {
    const int label = map_raw_class(rec.raw_class, scheme);
    if (label == kDropLabel) continue;
    out.samples.push_back({rec.id, rec.path, rec.raw_class, label});
  }
  return out;
}

struct Fold {
  std::vector<int> train;  // indices into LabeledSet::samples
  std::vector<int> val;
  std::vector<int> test;
};

struct FoldPlan {
  int k = 5;
  double val_frac = 0.10;
  std::uint64_t seed = 0;
  LabelScheme scheme = LabelScheme::TwoClass;
  std::vector<Fold> folds;
};

/// Stratified k-fold split. Per class: seeded shuffle, partition into k
/// near-equal folds (sizes differ by at most one). Fold f tests on part f;
/// the remaining pool contributes its first round(val_frac * pool) samples
/// to validation and the rest to training. Each sample is tested exactly
/// once across the k folds.
inline FoldPlan split_kfold(const LabeledSet& set, int k, double val_frac, std::uint64_t seed) {
  require(k >= 2, Errc::BadConfig, "k must be at least 2");
  require(val_frac >= 0.0 && val_frac < 1.0, Errc::BadConfig, "val_frac must be in [0,1)");
  FoldPlan plan;
  plan.k = k;
  plan.val_frac = val_frac;
  plan.seed = seed;
  plan.scheme = set.scheme;
  plan.folds.resize(static_cast<std::size_t>(k));

  const int num_classes = set.num_classes();
  for (int cls = 0; cls < num_classes; ++cls) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(set.samples.size()); ++i)
      if (set.samples[static_cast<std::size_t>(i)].label == cls) idx.push_back(i);
    require(static_cast<int>(idx.size()) >= k, Errc::ClassTooSmall,
            "class " + std::to_string(cls) + " has fewer samples than folds");

    // seeded Fisher-Yates; input order is lexicographic by id already
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

    const int n = static_cast<int>(idx.size());
    const int base = n / k;
    const int extra = n % k;  // first `extra` parts get one more
    std::vector<std::pair<int, int>> part(static_cast<std::size_t>(k));  // [begin, end)
    int at = 0;
    for (int f = 0; f < k; ++f) {
      const int len = base + (f < extra ? 1 : 0);
      part[static_cast<std::size_t>(f)] = {at, at + len};
      at += len;
    }

    for (int f = 0; f < k; ++f) {
      Fold& fold = plan.folds[static_cast<std::size_t>(f)];
      const auto [tb, te] = part[static_cast<std::size_t>(f)];
      for (int i = tb; i < te; ++i) fold.test.push_back(idx[static_cast<std::size_t>(i)]);
      std::vector<int> pool;
      for (int g = 0; g < k; ++g) {
        if (g == f) continue;
        const auto [pb, pe] = part[static_cast<std::size_t>(g)];
        for (int i = pb; i < pe; ++i) pool.push_back(idx[static_cast<std::size_t>(i)]);
      }
      const int n_val =
          static_cast<int>(std::llround(val_frac * static_cast<double>(pool.size())));
      for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
        if (i < n_val)
          fold.val.push_back(pool[static_cast<std::size_t>(i)]);
        else
          fold.train.push_back(pool[static_cast<std::size_t>(i)]);
      }
    }
  }
  return plan;
}

struct SplitCounts {
  // [fold][class] -> count
  std::vector<std::vector<int>> train, val, test;
};

/// Per-fold per-class count table; verifies the partition invariants.
inline SplitCounts fold_counts(const FoldPlan& plan, const LabeledSet& set) {
  const int k = plan.k;
  const int nc = set.num_classes();
  SplitCounts c;
  c.train.assign(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(nc), 0));
  c.val = c.train;
  c.test = c.train;

  std::vector<int> tested(set.samples.size(), 0);
  for (int f = 0; f < k; ++f) {
    const Fold& fold = plan.folds[static_cast<std::size_t>(f)];
    std::set<int> seen;
    auto tally = [&](const std::vector<int>& part, std::vector<std::vector<int>>& table) {
      for (int i : part) {
        require(i >= 0 && i < static_cast<int>(set.samples.size()), Errc::Internal,
                "fold index out of range");
        require(seen.insert(i).second, Errc::Internal,
                "index appears in more than one split within a fold");
        table[static_cast<std::size_t>(f)]
             [static_cast<std::size_t>(set.samples[static_cast<std::size_t>(i)].label)]++;
      }
    };
    tally(fold.train, c.train);
    tally(fold.val, c.val);
    tally(fold.test, c.test);
    require(seen.size() == set.samples.size(), Errc::Internal,
            "train/val/test must partition the labeled set within each fold");
    for (int i : fold.test) tested[static_cast<std::size_t>(i)]++;
  }
  for (int t : tested)
    require(t == 1, Errc::Internal, "every sample must be tested exactly once across folds");
  return c;
}

// ---- JSON ----

inline nlohmann::ordered_json manifest_to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["root"] = m.root;
  j["counts"] = nlohmann::ordered_json::object();
  for (const auto& [name, count] : m.counts()) j["counts"][name] = count;
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : m.records) {
    j["records"].push_back(
        {{"id", r.id}, {"path", r.path}, {"class", raw_class_name(r.raw_class)}});
  }
  return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  m.root = j.at("root").get<std::string>();
  for (const auto& jr : j.at("records")) {
    ManifestRecord rec;
    rec.id = jr.at("id").get<std::string>();
    rec.path = jr.at("path").get<std::string>();
    rec.raw_class = raw_class_from_name(jr.at("class").get<std::string>());
    m.records.push_back(std::move(rec));
  }
  return m;
}

inline nlohmann::ordered_json fold_plan_to_json(const FoldPlan& plan, const LabeledSet& set) {
  nlohmann::ordered_json j;
  j["k"] = plan.k;
  j["val_frac"] = plan.val_frac;
  j["seed"] = plan.seed;
  j["scheme"] = scheme_name(plan.scheme);
  j["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : set.samples)
    j["samples"].push_back({{"id", s.id}, {"label", s.label}, {"path", s.path}});
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : plan.folds)
    j["folds"].push_back({{"train", f.train}, {"val", f.val}, {"test", f.test}});
  return j;
}

inline std::pair<FoldPlan, LabeledSet> fold_plan_from_json(const nlohmann::json& j) {
  FoldPlan plan;
  plan.k = j.at("k").get<int>();
  plan.val_frac = j.at("val_frac").get<double>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  LabeledSet set;
  set.scheme = plan.scheme;
  for (const auto& js : j.at("samples")) {
    LabeledSample s;
    s.id = js.at("id").get<std::string>();
    s.label = js.at("label").get<int>();
    if (js.contains("path")) s.path = js.at("path").get<std::string>();
    require(s.label >= 0 && s.label < set.num_classes(), Errc::LabelOutOfRange,
            "sample label out of range for scheme");
    set.samples.push_back(std::move(s));
  }
  for (const auto& jf : j.at("folds")) {
    Fold f;
    f.train = jf.at("train").get<std::vector<int>>();
    f.val = jf.at("val").get<std::vector<int>>();
    f.test = jf.at("test").get<std::vector<int>>();
    for (const auto* part : {&f.train, &f.val, &f.test})
      for (int i : *part)
        require(i >= 0 && i < static_cast<int>(set.samples.size()), Errc::BadConfig,
                "fold plan index out of range: " + std::to_string(i));
    plan.folds.push_back(std::move(f));
  }
  require(static_cast<int>(plan.folds.size()) == plan.k, Errc::BadConfig,
          "fold plan fold count mismatch");
  return {plan, set};
}

}  // namespace ecgpipe
