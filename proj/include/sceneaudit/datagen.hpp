#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sceneaudit/association.hpp"
#include "sceneaudit/errors.hpp"
#include "sceneaudit/geometry.hpp"
#include "sceneaudit/random.hpp"
#include "sceneaudit/scene.hpp"

namespace sceneaudit {

/// Shape and motion statistics for one object class. Volumes and speeds are
/// drawn from normals truncated at three standard deviations, so classes
/// whose means sit far enough apart produce disjoint volume ranges.
struct ClassProfile {
  std::string label;
  double weight = 1.0;
  double volume_mean = 10.0;
  double volume_std = 1.0;
  double speed_mean = 5.0;
  double speed_std = 1.0;
  // Relative box dimensions; scaled uniformly to match the drawn volume.
  double aspect_length = 2.0;
  double aspect_width = 1.0;
  double aspect_height = 0.8;
};

struct SensorProfile {
  std::string name = "det";
  SourceKind kind = SourceKind::model;
  double detection_prob = 0.98;
  double center_noise = 0.08;   // per-axis stddev, meters
  double extent_noise = 0.03;   // per-axis relative stddev
  double confidence_mean = 0.92;
  double confidence_std = 0.04;
};

/// Error injection knobs, all off by default.
struct InjectionRates {
  double human_track_drop = 0.0;  // chance an object gets no trusted labels at all
  double human_box_drop = 0.0;    // chance a single trusted label goes missing
  double ghost_rate = 0.0;        // expected ghost tracks per real object
  double ghost_jitter = 0.6;      // ghost volume swing, fraction of the base volume
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::string scene_id_prefix = "synth";
  std::size_t frame_count = 150;
  double frame_period = 0.1;
  std::size_t object_count = 40;
  std::vector<ClassProfile> classes;  // empty: use default_classes()
  SensorProfile model_sensor{};
  SensorProfile human_sensor{"vendor", SourceKind::human, 1.0, 0.0, 0.0, 1.0, 0.0};
  InjectionRates injections{};
  AssociationParams association{};
  /// All-model tracks need at least this many observations to count as a
  /// recordable missing-track error; shorter fragments carry too little
  /// signal to stand as components of their own.
  std::size_t min_truth_observations = 3;

  void validate() const {
    if (frame_count < 2) throw ConfigError("frame_count must be >= 2", "frame_count");
    if (!(frame_period > 0.0)) throw ConfigError("frame_period must be > 0", "frame_period");
    for (const ClassProfile& c : effective_classes()) {
      if (c.label.empty()) throw ConfigError("class label must be non-empty", "classes.label");
      if (!(c.weight > 0.0)) throw ConfigError("class weight must be > 0", "classes.weight");
      if (!(c.volume_mean > 0.0))
        throw ConfigError("volume_mean must be > 0", "classes.volume_mean");
      if (c.volume_std < 0.0) throw ConfigError("volume_std must be >= 0", "classes.volume_std");
      if (c.speed_mean < 0.0) throw ConfigError("speed_mean must be >= 0", "classes.speed_mean");
      if (c.speed_std < 0.0) throw ConfigError("speed_std must be >= 0", "classes.speed_std");
      if (!(c.aspect_length > 0.0 && c.aspect_width > 0.0 && c.aspect_height > 0.0))
        throw ConfigError("aspect dimensions must be > 0", "classes.aspect");
    }
    auto check_sensor = [](const SensorProfile& s, const std::string& key) {
      if (s.name.empty()) throw ConfigError("sensor name must be non-empty", key + ".name");
      if (!(s.detection_prob >= 0.0 && s.detection_prob <= 1.0))
        throw ConfigError("detection_prob must be in [0, 1]", key + ".detection_prob");
      if (s.center_noise < 0.0) throw ConfigError("center_noise must be >= 0", key + ".center_noise");
      if (s.extent_noise < 0.0) throw ConfigError("extent_noise must be >= 0", key + ".extent_noise");
    };
    check_sensor(model_sensor, "model_sensor");
    check_sensor(human_sensor, "human_sensor");
    if (model_sensor.name == human_sensor.name)
      throw ConfigError("sensor names must differ", "human_sensor.name");
    auto check_rate = [](double r, const std::string& key) {
      if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("rate must be in [0, 1]", key);
    };
    check_rate(injections.human_track_drop, "injections.human_track_drop");
    check_rate(injections.human_box_drop, "injections.human_box_drop");
    check_rate(injections.ghost_rate, "injections.ghost_rate");
    if (!(injections.ghost_jitter >= 0.0 && injections.ghost_jitter < 1.0))
      throw ConfigError("ghost_jitter must be in [0, 1)", "injections.ghost_jitter");
    association.validate();
    if (min_truth_observations < 1)
      throw ConfigError("min_truth_observations must be >= 1", "min_truth_observations");
  }

  std::vector<ClassProfile> effective_classes() const {
    return classes.empty() ? default_classes() : classes;
  }

  /// Four classes with volume ranges that stay disjoint even at the
  /// three-sigma truncation edges.
  static std::vector<ClassProfile> default_classes() {
    return {
        {"car", 0.55, 9.0, 1.2, 8.0, 2.0, 4.5, 1.9, 1.6},
        {"truck", 0.15, 45.0, 4.0, 6.0, 2.0, 8.0, 2.8, 2.0},
        {"pedestrian", 0.20, 0.30, 0.05, 1.4, 0.4, 0.5, 0.6, 1.7},
        {"cyclist", 0.10, 2.0, 0.35, 4.0, 1.5, 1.8, 0.7, 1.4},
    };
  }
};

/// The ids of the errors a generated scene actually contains, derived from
/// the injection bookkeeping after association. The three kinds are
/// disjoint and every id resolves to a component of the emitted scene.
struct GroundTruthErrors {
  std::string scene_id;
  std::vector<std::string> missing_tracks;        // all-model tracks of label-dropped objects
  std::vector<std::string> missing_observations;  // all-model bundles at dropped trusted labels
  std::vector<std::string> ghost_tracks;          // tracks made of fabricated boxes

  std::set<std::string> all_ids() const {
    std::set<std::string> out(missing_tracks.begin(), missing_tracks.end());
    out.insert(missing_observations.begin(), missing_observations.end());
    out.insert(ghost_tracks.begin(), ghost_tracks.end());
    return out;
  }

  bool empty() const {
    return missing_tracks.empty() && missing_observations.empty() && ghost_tracks.empty();
  }
};

struct GeneratedScene {
  Scene scene;
  std::vector<Observation> observations;  // flat, id-sorted; what a scene file stores
  GroundTruthErrors truth;
};

namespace detail {

inline std::string obs_id(std::size_t frame, std::size_t object, const std::string& source) {
  std::ostringstream os;
  os << "f";
  os.width(4);
  os.fill('0');
  os << frame;
  os << "-x";
  os.width(3);
  os.fill('0');
  os << object;
  os << "-" << source;
  return os.str();
}

inline std::string scene_id_for(const GeneratorConfig& cfg) {
  std::ostringstream os;
  os << cfg.scene_id_prefix << "-";
  os.width(6);
  os.fill('0');
  os << cfg.seed;
  return os.str();
}

inline double truncated_normal(Rng& rng, double mean, double std, double floor_value) {
  double v = rng.normal(mean, std);
  v = std::clamp(v, mean - 3.0 * std, mean + 3.0 * std);
  return std::max(v, floor_value);
}

/// Lanes fan out on both sides of the ego: 4 m between neighboring lanes,
/// nothing closer than 4 m. Objects never share a lane, so boxes from
/// different objects can never overlap.
inline double lane_y(std::size_t index) {
  double offset = 4.0 + 4.0 * static_cast<double>(index / 2);
  return (index % 2 == 0) ? offset : -offset;
}

}  // namespace detail

/// Generate one scene: objects moving along straight per-object lanes,
/// observed by a model sensor (noisy, fallible) and a trusted sensor
/// (exact), with errors injected at the configured rates. The emitted
/// observations are associated with the config's own parameters and the
/// ground truth ids are read off the resulting structure, so truth ids
/// always resolve. Identical configs produce identical scenes.
inline GeneratedScene generate(const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<ClassProfile> classes = cfg.effective_classes();
  std::vector<double> weights;
  weights.reserve(classes.size());
  for (const ClassProfile& c : classes) weights.push_back(c.weight);

  std::string scene_id = detail::scene_id_for(cfg);

  struct ObjectState {
    const ClassProfile* cls;
    double x0, y, z;
    double speed;
    double l, w, h;
    double yaw;
    bool trusted_dropped;
  };
  std::vector<ObjectState> objects;
  objects.reserve(cfg.object_count);
  for (std::size_t i = 0; i < cfg.object_count; ++i) {
    ObjectState o;
    o.cls = &classes[rng.weighted_index(weights)];
    double vol = detail::truncated_normal(rng, o.cls->volume_mean, o.cls->volume_std, 0.05);
    double k = std::cbrt(vol / (o.cls->aspect_length * o.cls->aspect_width * o.cls->aspect_height));
    o.l = o.cls->aspect_length * k;
    o.w = o.cls->aspect_width * k;
    o.h = o.cls->aspect_height * k;
    o.speed = detail::truncated_normal(rng, o.cls->speed_mean, o.cls->speed_std, 0.0);
    o.x0 = rng.uniform(-80.0, -20.0);
    o.y = detail::lane_y(i);
    o.z = 0.5 * o.h;
    o.yaw = rng.normal(0.0, 0.05);
    o.trusted_dropped = rng.bernoulli(cfg.injections.human_track_drop);
    objects.push_back(o);
  }

  struct GhostState {
    const ClassProfile* cls;
    std::size_t start, length;
    double cx, y, z;
    double l, w, h;  // base dimensions at scale 1
    double log_lo, log_hi, log_scale;
    double step;
  };
  std::vector<GhostState> ghosts;
  for (std::size_t i = 0; i < cfg.object_count; ++i) {
    if (!rng.bernoulli(cfg.injections.ghost_rate)) continue;
    GhostState gst;
    gst.cls = &classes[rng.weighted_index(weights)];
    double vol = detail::truncated_normal(rng, gst.cls->volume_mean, gst.cls->volume_std, 0.05);
    double k =
        std::cbrt(vol / (gst.cls->aspect_length * gst.cls->aspect_width * gst.cls->aspect_height));
    gst.l = gst.cls->aspect_length * k;
    gst.w = gst.cls->aspect_width * k;
    gst.h = gst.cls->aspect_height * k;
    gst.length = 8 + rng.uniform_index(13);  // 8..20 frames
    gst.length = std::min(gst.length, cfg.frame_count);
    gst.start = rng.uniform_index(cfg.frame_count - gst.length + 1);
    gst.cx = rng.uniform(-80.0, 60.0);
    gst.y = detail::lane_y(cfg.object_count + ghosts.size());
    gst.z = 0.5 * gst.h;
    if (cfg.injections.ghost_jitter > 0.0) {
      gst.log_lo = std::log(1.0 - cfg.injections.ghost_jitter);
      gst.log_hi = std::log(1.0 + cfg.injections.ghost_jitter);
    } else {
      gst.log_lo = gst.log_hi = 0.0;
    }
    gst.log_scale = rng.uniform(gst.log_lo, gst.log_hi);
    gst.step = 0.1 * std::min({gst.l, gst.w, gst.h});
    ghosts.push_back(gst);
  }

  std::vector<Observation> observations;
  std::map<std::string, std::size_t> obs_object;        // model/human obs id -> object index
  std::set<std::string> ghost_obs;                      // ids of fabricated boxes
  std::vector<std::pair<std::size_t, std::size_t>> dropped_boxes;  // (object, frame)

  std::vector<double> timestamps(cfg.frame_count);
  for (std::size_t f = 0; f < cfg.frame_count; ++f)
    timestamps[f] = static_cast<double>(f) * cfg.frame_period;

  for (std::size_t f = 0; f < cfg.frame_count; ++f) {
    double t = timestamps[f];
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const ObjectState& o = objects[i];
      Vec3 center{o.x0 + o.speed * t, o.y, o.z};

      if (rng.bernoulli(cfg.model_sensor.detection_prob)) {
        Vec3 noisy = center + Vec3{rng.normal(0.0, cfg.model_sensor.center_noise),
                                   rng.normal(0.0, cfg.model_sensor.center_noise),
                                   rng.normal(0.0, cfg.model_sensor.center_noise)};
        double sl = std::clamp(1.0 + rng.normal(0.0, cfg.model_sensor.extent_noise), 0.5, 2.0);
        double sw = std::clamp(1.0 + rng.normal(0.0, cfg.model_sensor.extent_noise), 0.5, 2.0);
        double sh = std::clamp(1.0 + rng.normal(0.0, cfg.model_sensor.extent_noise), 0.5, 2.0);
        double conf = std::clamp(
            rng.normal(cfg.model_sensor.confidence_mean, cfg.model_sensor.confidence_std), 0.05,
            0.999);
        std::string id = detail::obs_id(f, i, cfg.model_sensor.name);
        obs_object[id] = i;
        observations.emplace_back(id, scene_id, f, t,
                                  Source{cfg.model_sensor.kind, cfg.model_sensor.name},
                                  o.cls->label,
                                  Box3D{noisy, o.l * sl, o.w * sw, o.h * sh, o.yaw}, conf);
      }

      if (!o.trusted_dropped && rng.bernoulli(cfg.human_sensor.detection_prob)) {
        if (cfg.injections.human_box_drop > 0.0 && rng.bernoulli(cfg.injections.human_box_drop)) {
          dropped_boxes.emplace_back(i, f);
        } else {
          Vec3 hcenter = center;
          if (cfg.human_sensor.center_noise > 0.0) {
            hcenter = center + Vec3{rng.normal(0.0, cfg.human_sensor.center_noise),
                                    rng.normal(0.0, cfg.human_sensor.center_noise),
                                    rng.normal(0.0, cfg.human_sensor.center_noise)};
          }
          std::string id = detail::obs_id(f, i, cfg.human_sensor.name);
          obs_object[id] = i;
          observations.emplace_back(id, scene_id, f, t,
                                    Source{cfg.human_sensor.kind, cfg.human_sensor.name},
                                    o.cls->label, Box3D{hcenter, o.l, o.w, o.h, o.yaw}, 1.0);
        }
      }
    }

    for (std::size_t gi = 0; gi < ghosts.size(); ++gi) {
      GhostState& gst = ghosts[gi];
      if (f < gst.start || f >= gst.start + gst.length) continue;
      if (f > gst.start) {
        double delta = std::clamp(rng.normal(0.0, 0.25 * (gst.log_hi - gst.log_lo)), -0.4, 0.4);
        gst.log_scale += delta;
        if (gst.log_scale > gst.log_hi) gst.log_scale = 2.0 * gst.log_hi - gst.log_scale;
        if (gst.log_scale < gst.log_lo) gst.log_scale = 2.0 * gst.log_lo - gst.log_scale;
        gst.cx += rng.uniform(-gst.step, gst.step);
      }
      double dim_scale = std::cbrt(std::exp(gst.log_scale));
      double conf = rng.uniform(0.75, 0.98);
      std::string id = detail::obs_id(f, cfg.object_count + gi, cfg.model_sensor.name);
      ghost_obs.insert(id);
      observations.emplace_back(
          id, scene_id, f, t, Source{cfg.model_sensor.kind, cfg.model_sensor.name},
          gst.cls->label,
          Box3D{{gst.cx, gst.y, gst.z}, gst.l * dim_scale, gst.w * dim_scale, gst.h * dim_scale,
                0.0},
          conf);
    }
  }

  std::sort(observations.begin(), observations.end(),
            [](const Observation& a, const Observation& b) { return a.id() < b.id(); });

  SceneInfo info;
  info.scene_id = scene_id;
  info.frame_timestamps = timestamps;
  for (const ClassProfile& c : classes) info.class_set.push_back(c.label);

  GeneratedScene out;
  out.scene = assemble_scene(info, observations, cfg.association);
  out.observations = std::move(observations);
  out.truth.scene_id = scene_id;

  // Read truth ids off the associated structure.
  std::map<std::string, std::pair<std::string, bool>> obs_bundle;  // obs -> (bundle id, trusted track)
  for (const Track& tr : out.scene.tracks) {
    bool ghost = false;
    bool dropped_member = false;
    for (const ObservationBundle& b : tr.bundles()) {
      for (const Observation& o : b.members()) {
        if (ghost_obs.count(o.id())) ghost = true;
        auto it = obs_object.find(o.id());
        if (it != obs_object.end() && objects[it->second].trusted_dropped) dropped_member = true;
        obs_bundle[o.id()] = {b.id(), tr.has_trusted_source()};
      }
    }
    if (ghost) {
      out.truth.ghost_tracks.push_back(tr.id());
    } else if (dropped_member && !tr.has_trusted_source() &&
               tr.observation_count() >= cfg.min_truth_observations) {
      out.truth.missing_tracks.push_back(tr.id());
    }
  }
  for (const auto& [obj, frame] : dropped_boxes) {
    auto it = obs_bundle.find(detail::obs_id(frame, obj, cfg.model_sensor.name));
    if (it == obs_bundle.end()) continue;  // the model missed that frame too
    if (it->second.second) out.truth.missing_observations.push_back(it->second.first);
  }
  std::sort(out.truth.missing_observations.begin(), out.truth.missing_observations.end());
  return out;
}

}  // namespace sceneaudit
