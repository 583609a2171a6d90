#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sceneaudit/errors.hpp"
#include "sceneaudit/geometry.hpp"

namespace sceneaudit {

enum class SourceKind { model, human, auditor };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::model: return "model";
    case SourceKind::human: return "human";
    case SourceKind::auditor: return "auditor";
  }
  return "model";
}

inline SourceKind source_kind_from_string(const std::string& s) {
  if (s == "model") return SourceKind::model;
  if (s == "human") return SourceKind::human;
  if (s == "auditor") return SourceKind::auditor;
  throw ValidationError("unknown source kind '" + s + "'");
}

/// Where a labeled box came from: the kind of labeler plus a name that
/// distinguishes sources of the same kind (e.g. two detection models).
struct Source {
  SourceKind kind = SourceKind::model;
  std::string name;

  bool operator==(const Source&) const = default;
  bool trusted() const { return kind == SourceKind::human || kind == SourceKind::auditor; }
};

/// A single labeled box: one source's claim that an object of some class
/// occupies a region of space at one frame. Immutable after construction.
/// Human and auditor labels carry no calibrated confidence, so theirs is
/// normalized to 1.0.
class Observation {
public:
  Observation(std::string id, std::string scene_id, std::size_t frame_index, double timestamp,
              Source source, std::string class_label, Box3D box, double confidence)
      : id_(std::move(id)),
        scene_id_(std::move(scene_id)),
        frame_index_(frame_index),
        timestamp_(timestamp),
        source_(std::move(source)),
        class_label_(std::move(class_label)),
        box_(box),
        confidence_(confidence) {
    if (id_.empty()) throw ValidationError("observation id must be non-empty");
    if (!std::isfinite(timestamp_)) throw ValidationError("observation timestamp must be finite");
    if (class_label_.empty())
      throw ValidationError("observation '" + id_ + "' has an empty class label");
    if (source_.name.empty())
      throw ValidationError("observation '" + id_ + "' has an empty source name");
    if (source_.trusted()) {
      confidence_ = 1.0;
    } else if (!(confidence_ >= 0.0 && confidence_ <= 1.0)) {
      throw ValidationError("observation '" + id_ + "' confidence must be in [0, 1]");
    }
  }

  const std::string& id() const { return id_; }
  const std::string& scene_id() const { return scene_id_; }
  std::size_t frame_index() const { return frame_index_; }
  double timestamp() const { return timestamp_; }
  const Source& source() const { return source_; }
  const std::string& class_label() const { return class_label_; }
  const Box3D& box() const { return box_; }
  double confidence() const { return confidence_; }

private:
  std::string id_;
  std::string scene_id_;
  std::size_t frame_index_;
  double timestamp_;
  Source source_;
  std::string class_label_;
  Box3D box_;
  double confidence_;
};

/// The observations that describe one object in one frame, at most one per
/// source. Members are kept sorted by id; the bundle id is the smallest
/// member id, which makes ids independent of input order.
class ObservationBundle {
public:
  explicit ObservationBundle(std::vector<Observation> members) : members_(std::move(members)) {
    if (members_.empty()) throw ValidationError("bundle must have at least one member");
    std::sort(members_.begin(), members_.end(),
              [](const Observation& a, const Observation& b) { return a.id() < b.id(); });
    std::set<std::string> names;
    for (const Observation& m : members_) {
      if (m.frame_index() != members_.front().frame_index())
        throw ValidationError("bundle members must share a frame (observation '" + m.id() + "')");
      if (!names.insert(m.source().name).second)
        throw ValidationError("bundle has two observations from source '" + m.source().name + "'");
    }
    representative_ = 0;
    for (std::size_t i = 1; i < members_.size(); ++i) {
      if (preferred(members_[i], members_[representative_])) representative_ = i;
    }
  }

  const std::vector<Observation>& members() const { return members_; }
  std::size_t frame_index() const { return members_.front().frame_index(); }
  const std::string& id() const { return members_.front().id(); }

  /// Best single description of the object: highest confidence, ties broken
  /// toward trusted sources (human before auditor), then by id.
  const Observation& representative() const { return members_[representative_]; }

  bool has_trusted_source() const {
    return std::any_of(members_.begin(), members_.end(),
                       [](const Observation& m) { return m.source().trusted(); });
  }

  /// Most frequent class label among members; ties go to the smallest label.
  std::string majority_class() const { return majority_class_of(members_); }

  static std::string majority_class_of(const std::vector<Observation>& obs) {
    std::map<std::string, std::size_t> counts;
    for (const Observation& o : obs) ++counts[o.class_label()];
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts) {
      if (count > best_count) {
        best = label;
        best_count = count;
      }
    }
    return best;
  }

private:
  static int kind_rank(SourceKind k) {
    switch (k) {
      case SourceKind::human: return 0;
      case SourceKind::auditor: return 1;
      case SourceKind::model: return 2;
    }
    return 2;
  }

  static bool preferred(const Observation& a, const Observation& b) {
    if (a.confidence() != b.confidence()) return a.confidence() > b.confidence();
    int ra = kind_rank(a.source().kind), rb = kind_rank(b.source().kind);
    if (ra != rb) return ra < rb;
    return a.id() < b.id();
  }

  std::vector<Observation> members_;
  std::size_t representative_;
};

/// One object's bundles over time. Frames are strictly increasing and
/// consecutive bundles may be at most `max_gap` frames apart; both are
/// checked at construction. The track id is the smallest observation id
/// across all members.
class Track {
public:
  Track(std::vector<ObservationBundle> bundles, std::size_t max_gap)
      : bundles_(std::move(bundles)) {
    if (bundles_.empty()) throw ValidationError("track must have at least one bundle");
    for (std::size_t i = 1; i < bundles_.size(); ++i) {
      std::size_t prev = bundles_[i - 1].frame_index();
      std::size_t cur = bundles_[i].frame_index();
      if (cur <= prev)
        throw ValidationError("track bundle frames must be strictly increasing");
      if (cur - prev > max_gap)
        throw ValidationError("track gap of " + std::to_string(cur - prev) +
                              " frames exceeds max_gap " + std::to_string(max_gap));
    }
    id_ = bundles_.front().id();
    for (const ObservationBundle& b : bundles_) id_ = std::min(id_, b.id());
    std::vector<Observation> all;
    for (const ObservationBundle& b : bundles_)
      all.insert(all.end(), b.members().begin(), b.members().end());
    majority_class_ = ObservationBundle::majority_class_of(all);
    observation_count_ = all.size();
  }

  const std::vector<ObservationBundle>& bundles() const { return bundles_; }
  const std::string& id() const { return id_; }
  const std::string& majority_class() const { return majority_class_; }
  std::size_t observation_count() const { return observation_count_; }
  std::size_t first_frame() const { return bundles_.front().frame_index(); }
  std::size_t last_frame() const { return bundles_.back().frame_index(); }

  bool has_trusted_source() const {
    return std::any_of(bundles_.begin(), bundles_.end(),
                       [](const ObservationBundle& b) { return b.has_trusted_source(); });
  }

private:
  std::vector<ObservationBundle> bundles_;
  std::string id_;
  std::string majority_class_;
  std::size_t observation_count_;
};

/// A recorded clip: frame clock, ego trajectory, the label classes in play,
/// and the associated tracks. Plain aggregate; validate_scene reports
/// integrity problems without rejecting the value.
struct Scene {
  std::string scene_id;
  std::vector<double> frame_timestamps;
  std::vector<Vec3> ego_positions;  // empty means the ego sits at the origin
  std::vector<std::string> class_set;
  std::vector<Track> tracks;

  std::size_t frame_count() const { return frame_timestamps.size(); }

  double timestamp_at(std::size_t frame) const { return frame_timestamps.at(frame); }

  Vec3 ego_at(std::size_t frame) const {
    if (ego_positions.empty()) return {};
    return ego_positions.at(frame);
  }
};

struct Diagnostic {
  std::string code;
  std::string message;
};

/// Integrity check over an assembled scene. Returns one diagnostic per
/// problem found; an empty result means the scene is well-formed.
inline std::vector<Diagnostic> validate_scene(const Scene& scene) {
  std::vector<Diagnostic> out;
  for (std::size_t i = 0; i + 1 < scene.frame_timestamps.size(); ++i) {
    if (!(scene.frame_timestamps[i + 1] > scene.frame_timestamps[i]))
      out.push_back({"timestamps_not_increasing",
                     "frame " + std::to_string(i) + " -> " + std::to_string(i + 1) +
                         " timestamps do not increase"});
  }
  if (!scene.ego_positions.empty() && scene.ego_positions.size() != scene.frame_count())
    out.push_back({"ego_positions_size_mismatch",
                   "ego positions cover " + std::to_string(scene.ego_positions.size()) +
                       " frames, scene has " + std::to_string(scene.frame_count())});
  std::set<std::string> classes(scene.class_set.begin(), scene.class_set.end());
  std::set<std::string> seen_ids;
  for (const Track& t : scene.tracks) {
    for (const ObservationBundle& b : t.bundles()) {
      for (const Observation& o : b.members()) {
        if (!seen_ids.insert(o.id()).second)
          out.push_back({"duplicate_observation_id",
                         "observation id '" + o.id() + "' appears more than once"});
        if (o.frame_index() >= scene.frame_count())
          out.push_back({"frame_index_out_of_range",
                         "observation '" + o.id() + "' references frame " +
                             std::to_string(o.frame_index()) + " of " +
                             std::to_string(scene.frame_count())});
        if (!scene.scene_id.empty() && !o.scene_id().empty() && o.scene_id() != scene.scene_id)
          out.push_back({"scene_id_mismatch", "observation '" + o.id() + "' belongs to scene '" +
                                                  o.scene_id() + "'"});
        if (!classes.empty() && classes.count(o.class_label()) == 0)
          out.push_back({"class_not_in_set", "observation '" + o.id() + "' has class '" +
                                                 o.class_label() +
                                                 "' outside the scene's class set"});
      }
    }
  }
  return out;
}

}  // namespace sceneaudit
