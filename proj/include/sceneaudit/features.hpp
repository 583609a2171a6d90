#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sceneaudit/errors.hpp"
#include "sceneaudit/geometry.hpp"
#include "sceneaudit/scene.hpp"

namespace sceneaudit {

/// What a feature is computed over. Observation features look at one box,
/// bundle features at one frame's bundle, transition features at two
/// adjacent bundles of a track, track features at a whole track.
enum class FeatureKind { observation, bundle, transition, track };

inline const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::observation: return "observation";
    case FeatureKind::bundle: return "bundle";
    case FeatureKind::transition: return "transition";
    case FeatureKind::track: return "track";
  }
  return "observation";
}

enum class DistFamily { kde, categorical, bernoulli, manual };

inline const char* to_string(DistFamily f) {
  switch (f) {
    case DistFamily::kde: return "kde";
    case DistFamily::categorical: return "categorical";
    case DistFamily::bernoulli: return "bernoulli";
    case DistFamily::manual: return "manual";
  }
  return "kde";
}

inline DistFamily dist_family_from_string(const std::string& s) {
  if (s == "kde") return DistFamily::kde;
  if (s == "categorical") return DistFamily::categorical;
  if (s == "bernoulli") return DistFamily::bernoulli;
  if (s == "manual") return DistFamily::manual;
  throw FormatError("unknown distribution family '" + s + "'");
}

// ---- built-in extractors ----

inline double feature_volume(const Observation& o) { return volume(o.box()); }

/// Distance from the box center to the ego position of the observation's frame.
inline double feature_distance(const Observation& o, const Scene& scene) {
  return distance(o.box().center(), scene.ego_at(o.frame_index()));
}

/// Representative-center displacement between two bundles divided by the
/// elapsed time from the scene's frame clock. Rejects non-increasing time.
inline double feature_velocity(const ObservationBundle& a, const ObservationBundle& b,
                               const Scene& scene) {
  double dt = scene.timestamp_at(b.frame_index()) - scene.timestamp_at(a.frame_index());
  if (!(dt > 0.0))
    throw ValidationError("velocity requires strictly increasing timestamps between frames " +
                          std::to_string(a.frame_index()) + " and " +
                          std::to_string(b.frame_index()));
  return center_distance(a.representative().box(), b.representative().box()) / dt;
}

/// 1.0 when the bundle holds model observations only, 0.0 when any trusted
/// (human or auditor) source contributed.
inline double feature_model_only(const ObservationBundle& b) {
  return b.has_trusted_source() ? 0.0 : 1.0;
}

inline double feature_track_count(const Track& t) {
  return static_cast<double>(t.observation_count());
}

/// 0.0 when every member of the bundle agrees on the class label, 1.0
/// otherwise. Singleton bundles agree trivially.
inline double feature_class_agreement(const ObservationBundle& b) {
  for (const Observation& o : b.members()) {
    if (o.class_label() != b.members().front().class_label()) return 1.0;
  }
  return 0.0;
}

// ---- feature specs ----

/// A named scalar feature: its scope, how its distribution is modeled, and
/// the extractor for that scope. Exactly one extractor is set, matching
/// `kind`. class_conditional features are fitted and looked up per class
/// label (observation class, bundle majority, or track majority).
struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::observation;
  DistFamily family = DistFamily::kde;
  bool class_conditional = false;

  std::function<double(const Observation&, const Scene&)> obs_fn;
  std::function<double(const ObservationBundle&, const Scene&)> bundle_fn;
  std::function<double(const ObservationBundle&, const ObservationBundle&, const Track&,
                       const Scene&)>
      transition_fn;
  std::function<double(const Track&, const Scene&)> track_fn;

  void validate() const {
    if (name.empty()) throw ConfigError("feature spec requires a name", "name");
    bool ok = false;
    switch (kind) {
      case FeatureKind::observation: ok = static_cast<bool>(obs_fn); break;
      case FeatureKind::bundle: ok = static_cast<bool>(bundle_fn); break;
      case FeatureKind::transition: ok = static_cast<bool>(transition_fn); break;
      case FeatureKind::track: ok = static_cast<bool>(track_fn); break;
    }
    if (!ok)
      throw ConfigError("feature '" + name + "' lacks an extractor for its kind", "extractor");
  }
};

/// The class key under which a feature value is filed. Empty string is the
/// pooled (class-free) key.
inline std::string class_key_for(const FeatureSpec& spec, const Observation& o) {
  return spec.class_conditional ? o.class_label() : std::string{};
}
inline std::string class_key_for(const FeatureSpec& spec, const ObservationBundle& b) {
  return spec.class_conditional ? b.majority_class() : std::string{};
}
inline std::string class_key_for(const FeatureSpec& spec, const Track& t) {
  return spec.class_conditional ? t.majority_class() : std::string{};
}

/// Name-keyed collection of feature specs.
class FeatureRegistry {
public:
  void add(FeatureSpec spec) {
    spec.validate();
    if (specs_.count(spec.name))
      throw ConfigError("feature '" + spec.name + "' is already registered", "name");
    specs_.emplace(spec.name, std::move(spec));
  }

  bool contains(const std::string& name) const { return specs_.count(name) != 0; }

  const FeatureSpec& get(const std::string& name) const {
    auto it = specs_.find(name);
    if (it == specs_.end()) throw ConfigError("unknown feature '" + name + "'", "features");
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(specs_.size());
    for (const auto& [name, spec] : specs_) out.push_back(name);
    return out;
  }

  /// The stock feature set.
  static FeatureRegistry builtins() {
    FeatureRegistry r;
    {
      FeatureSpec s;
      s.name = "volume";
      s.kind = FeatureKind::observation;
      s.family = DistFamily::kde;
      s.class_conditional = true;
      s.obs_fn = [](const Observation& o, const Scene&) { return feature_volume(o); };
      r.add(std::move(s));
    }
    {
      FeatureSpec s;
      s.name = "distance";
      s.kind = FeatureKind::observation;
      s.family = DistFamily::kde;
      s.class_conditional = false;
      s.obs_fn = [](const Observation& o, const Scene& scene) { return feature_distance(o, scene); };
      r.add(std::move(s));
    }
    {
      FeatureSpec s;
      s.name = "velocity";
      s.kind = FeatureKind::transition;
      s.family = DistFamily::kde;
      s.class_conditional = true;
      s.transition_fn = [](const ObservationBundle& a, const ObservationBundle& b, const Track&,
                           const Scene& scene) { return feature_velocity(a, b, scene); };
      r.add(std::move(s));
    }
    {
      FeatureSpec s;
      s.name = "class_agreement";
      s.kind = FeatureKind::bundle;
      s.family = DistFamily::bernoulli;
      s.class_conditional = false;
      s.bundle_fn = [](const ObservationBundle& b, const Scene&) {
        return feature_class_agreement(b);
      };
      r.add(std::move(s));
    }
    {
      FeatureSpec s;
      s.name = "model_only";
      s.kind = FeatureKind::bundle;
      s.family = DistFamily::manual;
      s.class_conditional = false;
      s.bundle_fn = [](const ObservationBundle& b, const Scene&) { return feature_model_only(b); };
      r.add(std::move(s));
    }
    {
      FeatureSpec s;
      s.name = "count";
      s.kind = FeatureKind::track;
      s.family = DistFamily::manual;
      s.class_conditional = false;
      s.track_fn = [](const Track& t, const Scene&) { return feature_track_count(t); };
      r.add(std::move(s));
    }
    return r;
  }

private:
  std::map<std::string, FeatureSpec> specs_;
};

}  // namespace sceneaudit
