#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sceneaudit/geometry.hpp"
#include "sceneaudit/scene.hpp"

namespace sceneaudit {

/// What the hand-written consistency checks flagged in a scene. These are
/// the classic rule-based assertions, kept as a comparison baseline: each
/// one is a black-box predicate over the associated structure, with no
/// learned component and no ranking of its own.
struct AdHocFlags {
  /// Tracks that exist for at most two frames: objects should not pop in
  /// and out of existence.
  std::vector<std::string> appear_tracks;
  /// Tracks whose frame-presence bitmap contains a gap between two covered
  /// frames (a 1-0-1 pattern): objects should not blink.
  std::vector<std::string> flicker_tracks;
  /// Observations in a frame where three boxes mutually overlap with IOU
  /// above 0.1: three boxes should not stack on one spot.
  std::vector<std::string> multibox_observations;
};

inline AdHocFlags baseline_mas(const Scene& scene) {
  AdHocFlags out;

  for (const Track& t : scene.tracks) {
    if (t.bundles().size() <= 2) out.appear_tracks.push_back(t.id());
    bool gap = false;
    for (std::size_t i = 1; i < t.bundles().size(); ++i) {
      if (t.bundles()[i].frame_index() - t.bundles()[i - 1].frame_index() > 1) gap = true;
    }
    if (gap) out.flicker_tracks.push_back(t.id());
  }

  // Mutual-overlap check, per frame over every observation in the frame.
  std::vector<std::vector<const Observation*>> by_frame(scene.frame_count());
  for (const Track& t : scene.tracks)
    for (const ObservationBundle& b : t.bundles())
      for (const Observation& o : b.members())
        if (o.frame_index() < by_frame.size()) by_frame[o.frame_index()].push_back(&o);

  for (const std::vector<const Observation*>& frame : by_frame) {
    std::size_t n = frame.size();
    if (n < 3) continue;
    std::vector<std::vector<bool>> over(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        over[i][j] = over[j][i] = iou3d(frame[i]->box(), frame[j]->box()) > 0.1;
    std::vector<bool> flagged(n, false);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!over[i][j]) continue;
        for (std::size_t k = j + 1; k < n; ++k) {
          if (over[i][k] && over[j][k]) flagged[i] = flagged[j] = flagged[k] = true;
        }
      }
    for (std::size_t i = 0; i < n; ++i)
      if (flagged[i]) out.multibox_observations.push_back(frame[i]->id());
  }
  return out;
}

/// A model observation whose confidence sits within `band` of the decision
/// threshold, the classic uncertainty-sampling pick.
struct UncertaintyHit {
  std::string observation_id;
  std::string track_id;
  double confidence = 0.0;
  double distance_to_threshold = 0.0;
};

inline std::vector<UncertaintyHit> uncertainty_sample(const Scene& scene, double threshold,
                                                      double band) {
  std::vector<UncertaintyHit> out;
  for (const Track& t : scene.tracks)
    for (const ObservationBundle& b : t.bundles())
      for (const Observation& o : b.members()) {
        if (o.source().kind != SourceKind::model) continue;
        double d = std::abs(o.confidence() - threshold);
        if (d <= band) out.push_back({o.id(), t.id(), o.confidence(), d});
      }
  return out;
}

}  // namespace sceneaudit
