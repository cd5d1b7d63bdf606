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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgpipe/error.hpp"
#include "ecgpipe/image.hpp"
#include "ecgpipe/imgproc.hpp"
#include "ecgpipe/rng.hpp"

namespace ecgpipe {

enum class TransformKind { Rotate, Scale, Translate };

inline const char* transform_kind_name(TransformKind k) {
  switch (k) {
    case TransformKind::Rotate: return "rotate";
    case TransformKind::Scale: return "scale";
    case TransformKind::Translate: return "translate";
  }
  return "?";
}

/// One geometric perturbation. Legal parameter ranges:
///   rotate:    |angle_deg| in [5, 10]
///   scale:     factor in [1.025, 1.10] (center zoom-in, cropped back)
///   translate: |dx|, |dy| in [0.05, 0.20], fractions of width/height
struct TransformSpec {
  TransformKind kind = TransformKind::Rotate;
  double angle_deg = 0.0;
  double scale = 1.0;
  double dx = 0.0;
  double dy = 0.0;

  static TransformSpec rotate(double deg) { return {TransformKind::Rotate, deg, 1.0, 0.0, 0.0}; }
  static TransformSpec zoom(double s) { return {TransformKind::Scale, 0.0, s, 0.0, 0.0}; }
  static TransformSpec translate(double x, double y) {
    return {TransformKind::Translate, 0.0, 1.0, x, y};
  }

  bool in_legal_range() const {
    switch (kind) {
      case TransformKind::Rotate: {
        const double a = std::abs(angle_deg);
        return a >= 5.0 && a <= 10.0;
      }
      case TransformKind::Scale:
        return scale >= 1.025 && scale <= 1.10;
      case TransformKind::Translate: {
        const double ax = std::abs(dx), ay = std::abs(dy);
        return ax >= 0.05 && ax <= 0.20 && ay >= 0.05 && ay <= 0.20;
      }
    }
    return false;
  }
};

struct ReplicaSpec {
  int source_index = 0;
  TransformSpec transform;
};

struct ClassPlan {
  std::string class_name;
  int source_count = 0;
  int factor = 1;  // total images after augmentation = source_count * factor
  std::vector<ReplicaSpec> replicas;
};

struct AugmentPlan {
  std::uint64_t seed = 0;
  int target = 0;
  std::vector<ClassPlan> classes;  // sorted by class name

  const ClassPlan& for_class(const std::string& name) const {
    for (const auto& c : classes)
      if (c.class_name == name) return c;
    raise(Errc::Internal, "no plan entry for class " + name);
  }
};

namespace augment_detail {

// Pure function of (seed, class, replica index): kind cycles
// rotate -> scale -> translate, parameters come from a per-replica stream.
inline TransformSpec replica_transform(std::uint64_t seed, const std::string& class_name,
                                       std::int64_t replica_index) {
  Rng rng(mix_seed(seed, fnv1a64(class_name), static_cast<std::uint64_t>(replica_index)));
  TransformSpec t;
  switch (replica_index % 3) {
    case 0:
      t.kind = TransformKind::Rotate;
      t.angle_deg = rng.uniform(5.0, 10.0) * (rng.coin() ? 1.0 : -1.0);
      break;
    case 1:
      t.kind = TransformKind::Scale;
      t.scale = rng.uniform(1.025, 1.10);
      break;
    default:
      t.kind = TransformKind::Translate;
      t.dx = rng.uniform(0.05, 0.20) * (rng.coin() ? 1.0 : -1.0);
      t.dy = rng.uniform(0.05, 0.20) * (rng.coin() ? 1.0 : -1.0);
      break;
  }
  return t;
}

}  // namespace augment_detail

/// Builds the per-class replication plan that balances class sizes.
/// factor = override when given, otherwise max(1, round(target / count)).
/// Identical inputs always produce an identical plan.
inline AugmentPlan plan_balance(const std::map<std::string, int>& class_counts, int target,
                                const std::map<std::string, int>& overrides, std::uint64_t seed) {
  require(target > 0, Errc::BadConfig, "augmentation target must be positive");
  AugmentPlan plan;
  plan.seed = seed;
  plan.target = target;
  for (const auto& [name, count] : class_counts) {
    require(count > 0, Errc::EmptyClass, "class " + name + " has no images");
    ClassPlan cp;
    cp.class_name = name;
    cp.source_count = count;
    if (auto it = overrides.find(name); it != overrides.end()) {
      require(it->second >= 1, Errc::BadConfig, "override factor must be >= 1");
      cp.factor = it->second;
    } else {
      cp.factor = std::max<long long>(
          1, std::llround(static_cast<double>(target) / static_cast<double>(count)));
    }
    const std::int64_t n_replicas = static_cast<std::int64_t>(count) * (cp.factor - 1);
    cp.replicas.reserve(static_cast<std::size_t>(n_replicas));
    for (std::int64_t r = 0; r < n_replicas; ++r) {
      ReplicaSpec rep;
      rep.source_index = static_cast<int>(r % count);
      rep.transform = augment_detail::replica_transform(seed, name, r);
      cp.replicas.push_back(rep);
    }
    plan.classes.push_back(std::move(cp));
  }
  return plan;
}

namespace augment_detail {

inline double sample_fill(const ImageU8& img, int x, int y, int c, double fill) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return fill;
  return img.at(x, y, c);
}

inline double bilinear_fill(const ImageU8& img, double sx, double sy, int c, double fill) {
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const double fx = sx - x0;
  const double fy = sy - y0;
  const double top = (1.0 - fx) * sample_fill(img, x0, y0, c, fill) +
                     fx * sample_fill(img, x0 + 1, y0, c, fill);
  const double bot = (1.0 - fx) * sample_fill(img, x0, y0 + 1, c, fill) +
                     fx * sample_fill(img, x0 + 1, y0 + 1, c, fill);
  return (1.0 - fy) * top + fy * bot;
}

}  // namespace augment_detail

/// Applies one transform by inverse mapping about the image center with
/// bilinear resampling. Samples that fall outside the source are filled with
/// 255 (white paper background). Output dimensions equal the input's.
///
/// Conventions: rotation turns the sampling grid by angle_deg about the
/// center; scale > 1 zooms in; translate samples at dst + (dx*w, dy*h), so a
/// positive offset pulls content toward the origin.
inline ImageU8 apply_transform(const ImageU8& img, const TransformSpec& t) {
  img.validate();
  constexpr double kFill = 255.0;
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;
  ImageU8 out(img.width, img.height, img.channels);

  double cos_a = 1.0, sin_a = 0.0, inv_s = 1.0, tx = 0.0, ty = 0.0;
  switch (t.kind) {
    case TransformKind::Rotate: {
      const double a = t.angle_deg * 3.14159265358979323846 / 180.0;
      cos_a = std::cos(a);
      sin_a = std::sin(a);
      break;
    }
    case TransformKind::Scale:
      require(t.scale > 0.0, Errc::BadConfig, "scale factor must be positive");
      inv_s = 1.0 / t.scale;
      break;
    case TransformKind::Translate:
      tx = t.dx * img.width;
      ty = t.dy * img.height;
      break;
  }

  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double sx = x, sy = y;
      switch (t.kind) {
        case TransformKind::Rotate:
          sx = cx + cos_a * (x - cx) - sin_a * (y - cy);
          sy = cy + sin_a * (x - cx) + cos_a * (y - cy);
          break;
        case TransformKind::Scale:
          sx = cx + (x - cx) * inv_s;
          sy = cy + (y - cy) * inv_s;
          break;
        case TransformKind::Translate:
          sx = x + tx;
          sy = y + ty;
          break;
      }
      for (int c = 0; c < img.channels; ++c)
        out.at(x, y, c) = round_clamp_u8(augment_detail::bilinear_fill(img, sx, sy, c, kFill));
    }
  }
  return out;
}

/// Returns the originals followed by the plan's replicas, in plan order.
inline std::vector<ImageU8> augment_class(const std::vector<ImageU8>& images,
                                          const ClassPlan& plan) {
  require(static_cast<int>(images.size()) == plan.source_count, Errc::CountMismatch,
          "class " + plan.class_name + ": expected " + std::to_string(plan.source_count) +
              " images, got " + std::to_string(images.size()));
  std::vector<ImageU8> out;
  out.reserve(images.size() * static_cast<std::size_t>(plan.factor));
  out.insert(out.end(), images.begin(), images.end());
  for (const auto& rep : plan.replicas)
    out.push_back(apply_transform(images[static_cast<std::size_t>(rep.source_index)], rep.transform));
  return out;
}

// ---- JSON ----

inline nlohmann::ordered_json transform_to_json(const TransformSpec& t) {
  nlohmann::ordered_json j;
  j["kind"] = transform_kind_name(t.kind);
  switch (t.kind) {
    case TransformKind::Rotate: j["angle_deg"] = t.angle_deg; break;
    case TransformKind::Scale: j["scale"] = t.scale; break;
    case TransformKind::Translate:
      j["dx"] = t.dx;
      j["dy"] = t.dy;
      break;
  }
  return j;
}

inline TransformSpec transform_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rotate") return TransformSpec::rotate(j.at("angle_deg").get<double>());
  if (kind == "scale") return TransformSpec::zoom(j.at("scale").get<double>());
  if (kind == "translate")
    return TransformSpec::translate(j.at("dx").get<double>(), j.at("dy").get<double>());
  raise(Errc::BadConfig, "unknown transform kind " + kind);
}

inline nlohmann::ordered_json augment_plan_to_json(const AugmentPlan& plan) {
  nlohmann::ordered_json j;
  j["seed"] = plan.seed;
  j["target"] = plan.target;
  j["classes"] = nlohmann::ordered_json::array();
  for (const auto& cp : plan.classes) {
    nlohmann::ordered_json jc;
    jc["class"] = cp.class_name;
    jc["source_count"] = cp.source_count;
    jc["factor"] = cp.factor;
    jc["total"] = static_cast<std::int64_t>(cp.source_count) * cp.factor;
    jc["replicas"] = nlohmann::ordered_json::array();
    for (const auto& rep : cp.replicas) {
      nlohmann::ordered_json jr = transform_to_json(rep.transform);
      jr["source_index"] = rep.source_index;
      jc["replicas"].push_back(std::move(jr));
    }
    j["classes"].push_back(std::move(jc));
  }
  return j;
}

inline AugmentPlan augment_plan_from_json(const nlohmann::json& j) {
  AugmentPlan plan;
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.target = j.at("target").get<int>();
  for (const auto& jc : j.at("classes")) {
    ClassPlan cp;
    cp.class_name = jc.at("class").get<std::string>();
    cp.source_count = jc.at("source_count").get<int>();
    cp.factor = jc.at("factor").get<int>();
    for (const auto& jr : jc.at("replicas")) {
      ReplicaSpec rep;
      rep.source_index = jr.at("source_index").get<int>();
      rep.transform = transform_from_json(jr);
      cp.replicas.push_back(rep);
    }
    plan.classes.push_back(std::move(cp));
  }
  return plan;
}

}  // namespace ecgpipe
