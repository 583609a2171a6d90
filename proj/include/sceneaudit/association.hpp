#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "sceneaudit/errors.hpp"
#include "sceneaudit/geometry.hpp"
#include "sceneaudit/scene.hpp"

namespace sceneaudit {

struct AssociationParams {
  double iou_threshold = 0.5;  // in (0, 1]; overlap counts when IOU >= threshold
  std::size_t max_gap = 1;     // largest frame gap a track may bridge

  void validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
      throw ConfigError("iou_threshold must be in (0, 1]", "iou_threshold");
    if (max_gap < 1) throw ConfigError("max_gap must be >= 1", "max_gap");
  }
};

namespace detail {

/// Union-find over observation indices, tracking the source names present in
/// each group so no group ever holds two observations from one source.
class SourceGroups {
public:
  explicit SourceGroups(const std::vector<Observation>& obs) : parent_(obs.size()) {
    std::iota(parent_.begin(), parent_.end(), 0);
    names_.resize(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) names_[i].insert(obs[i].source().name);
  }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  bool try_merge(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    for (const std::string& n : names_[b])
      if (names_[a].count(n)) return false;
    parent_[b] = a;
    names_[a].insert(names_[b].begin(), names_[b].end());
    names_[b].clear();
    return true;
  }

private:
  std::vector<std::size_t> parent_;
  std::vector<std::set<std::string>> names_;
};

}  // namespace detail

/// Group one frame's observations into bundles: candidate pairs are
/// observations from distinct sources whose boxes overlap at or above the
/// IOU threshold, merged greedily in order of descending IOU. Ties are
/// broken by the lexicographically smallest (id, id) pair, so the result
/// does not depend on input order. Every observation lands in exactly one
/// bundle; bundles come back sorted by id.
inline std::vector<ObservationBundle> bundle_frame(const std::vector<Observation>& observations,
                                                   double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw ConfigError("iou_threshold must be in (0, 1]", "iou_threshold");
  if (observations.empty()) return {};
  for (const Observation& o : observations) {
    if (o.frame_index() != observations.front().frame_index())
      throw ValidationError("bundle_frame requires observations from a single frame");
  }

  struct Candidate {
    double iou;
    std::string lo, hi;
    std::size_t a, b;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    for (std::size_t j = i + 1; j < observations.size(); ++j) {
      if (observations[i].source().name == observations[j].source().name) continue;
      double iou = iou3d(observations[i].box(), observations[j].box());
      if (iou >= iou_threshold) {
        Candidate c{iou, observations[i].id(), observations[j].id(), i, j};
        if (c.hi < c.lo) {
          std::swap(c.lo, c.hi);
          std::swap(c.a, c.b);
        }
        cands.push_back(std::move(c));
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.iou != y.iou) return x.iou > y.iou;
    if (x.lo != y.lo) return x.lo < y.lo;
    return x.hi < y.hi;
  });

  detail::SourceGroups groups(observations);
  for (const Candidate& c : cands) groups.try_merge(c.a, c.b);

  std::map<std::size_t, std::vector<Observation>> members;
  for (std::size_t i = 0; i < observations.size(); ++i)
    members[groups.find(i)].push_back(observations[i]);

  std::vector<ObservationBundle> out;
  out.reserve(members.size());
  for (auto& [root, obs] : members) out.emplace_back(std::move(obs));
  std::sort(out.begin(), out.end(),
            [](const ObservationBundle& a, const ObservationBundle& b) { return a.id() < b.id(); });
  return out;
}

/// Link per-frame bundles into tracks. Frames must arrive in strictly
/// increasing frame order. A bundle may extend a track whose last bundle is
/// at most max_gap frames back and whose representative box overlaps the
/// bundle's representative at or above the IOU threshold; matches are taken
/// greedily by descending IOU with lexicographic id tie-breaks. Each bundle
/// joins exactly one track. Tracks come back sorted by id.
inline std::vector<Track> build_tracks(const std::vector<std::vector<ObservationBundle>>& frames,
                                       const AssociationParams& params = {}) {
  params.validate();
  struct Open {
    std::vector<ObservationBundle> bundles;
    std::size_t last_frame;
  };
  std::vector<Open> open;
  std::size_t prev_frame = 0;
  bool have_prev = false;

  for (const std::vector<ObservationBundle>& frame : frames) {
    if (frame.empty()) continue;
    std::size_t f = frame.front().frame_index();
    for (const ObservationBundle& b : frame) {
      if (b.frame_index() != f)
        throw ValidationError("build_tracks: a frame's bundles must share a frame index");
    }
    if (have_prev && f <= prev_frame)
      throw ValidationError("build_tracks: frames must arrive in increasing order");
    prev_frame = f;
    have_prev = true;

    struct Candidate {
      double iou;
      std::string track_key, bundle_key;
      std::size_t track, bundle;
    };
    std::vector<Candidate> cands;
    for (std::size_t ti = 0; ti < open.size(); ++ti) {
      if (f - open[ti].last_frame > params.max_gap) continue;
      const Box3D& prev_box = open[ti].bundles.back().representative().box();
      for (std::size_t bi = 0; bi < frame.size(); ++bi) {
        double iou = iou3d(prev_box, frame[bi].representative().box());
        if (iou >= params.iou_threshold)
          cands.push_back({iou, open[ti].bundles.back().id(), frame[bi].id(), ti, bi});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
      if (x.iou != y.iou) return x.iou > y.iou;
      if (x.track_key != y.track_key) return x.track_key < y.track_key;
      return x.bundle_key < y.bundle_key;
    });

    std::vector<bool> track_used(open.size(), false);
    std::vector<bool> bundle_used(frame.size(), false);
    for (const Candidate& c : cands) {
      if (track_used[c.track] || bundle_used[c.bundle]) continue;
      track_used[c.track] = true;
      bundle_used[c.bundle] = true;
      open[c.track].bundles.push_back(frame[c.bundle]);
      open[c.track].last_frame = f;
    }
    for (std::size_t bi = 0; bi < frame.size(); ++bi) {
      if (!bundle_used[bi]) open.push_back({{frame[bi]}, f});
    }
  }

  std::vector<Track> out;
  out.reserve(open.size());
  for (Open& o : open) out.emplace_back(std::move(o.bundles), params.max_gap);
  std::sort(out.begin(), out.end(), [](const Track& a, const Track& b) { return a.id() < b.id(); });
  return out;
}

/// Scene-level metadata that travels with the raw observations.
struct SceneInfo {
  std::string scene_id;
  std::vector<double> frame_timestamps;
  std::vector<Vec3> ego_positions;
  std::vector<std::string> class_set;
};

/// Run the full association pipeline: per-frame bundling, then track
/// linking, producing a Scene. Observations referencing frames outside the
/// timestamp range are rejected.
inline Scene assemble_scene(const SceneInfo& info, const std::vector<Observation>& observations,
                            const AssociationParams& params = {}) {
  params.validate();
  std::map<std::size_t, std::vector<Observation>> by_frame;
  for (const Observation& o : observations) {
    if (o.frame_index() >= info.frame_timestamps.size())
      throw ValidationError("observation '" + o.id() + "' references frame " +
                            std::to_string(o.frame_index()) + " but the scene has " +
                            std::to_string(info.frame_timestamps.size()) + " frames");
    by_frame[o.frame_index()].push_back(o);
  }
  std::vector<std::vector<ObservationBundle>> frames;
  frames.reserve(by_frame.size());
  for (const auto& [f, obs] : by_frame) frames.push_back(bundle_frame(obs, params.iou_threshold));

  Scene scene;
  scene.scene_id = info.scene_id;
  scene.frame_timestamps = info.frame_timestamps;
  scene.ego_positions = info.ego_positions;
  scene.class_set = info.class_set;
  scene.tracks = build_tracks(frames, params);
  return scene;
}

}  // namespace sceneaudit
