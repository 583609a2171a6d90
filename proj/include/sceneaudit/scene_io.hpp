#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sceneaudit/association.hpp"
#include "sceneaudit/datagen.hpp"
#include "sceneaudit/dists.hpp"
#include "sceneaudit/engine.hpp"
#include "sceneaudit/errors.hpp"
#include "sceneaudit/scene.hpp"

namespace sceneaudit {

// Scene, truth, and report files are JSON Lines: one header record, then one
// record per item. Writers emit keys in sorted order and shortest
// round-trip numbers, so identical inputs give byte-identical files.
// Readers skip unknown fields and unknown record types with a warning.

inline constexpr const char* kSceneFormat = "sceneaudit-scene";
inline constexpr const char* kTruthFormat = "sceneaudit-truth";
inline constexpr const char* kReportFormat = "sceneaudit-report";
inline constexpr int kFileFormatVersion = 1;

namespace detail {

inline void warn_unknown_fields(const nlohmann::json& rec, const std::set<std::string>& known,
                                const std::string& where, std::vector<std::string>* warnings) {
  if (!warnings) return;
  for (const auto& [key, value] : rec.items()) {
    if (!known.count(key))
      warnings->push_back(where + ": unknown field '" + key + "' ignored");
  }
}

template <typename T>
T require_field(const nlohmann::json& rec, const std::string& key, const std::string& where) {
  if (!rec.contains(key)) throw FormatError(where + ": missing field '" + key + "'");
  try {
    return rec.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(where + ": field '" + key + "' has the wrong type");
  }
}

inline Vec3 vec3_from(const nlohmann::json& a, const std::string& where) {
  if (!a.is_array() || a.size() != 3)
    throw FormatError(where + ": expected a [x, y, z] triple");
  try {
    return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
  } catch (const nlohmann::json::exception&) {
    throw FormatError(where + ": expected a [x, y, z] triple of numbers");
  }
}

inline nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void check_header(const nlohmann::json& rec, const char* format,
                         const std::string& where) {
  if (require_field<std::string>(rec, "format", where) != format)
    throw FormatError(where + ": expected format '" + format + "'");
  if (require_field<int>(rec, "format_version", where) != kFileFormatVersion)
    throw FormatError(where + ": unsupported format version " + rec.at("format_version").dump());
}

}  // namespace detail

// ---- scene files ----

struct SceneFileContent {
  SceneInfo info;
  std::vector<Observation> observations;
  std::vector<std::string> warnings;
};

inline SceneInfo scene_info_of(const Scene& s) {
  return {s.scene_id, s.frame_timestamps, s.ego_positions, s.class_set};
}

inline void write_scene_file(const std::filesystem::path& path, const SceneInfo& info,
                             const std::vector<Observation>& observations) {
  std::ofstream out = detail::open_output(path);
  nlohmann::json header;
  header["record"] = "scene_header";
  header["format"] = kSceneFormat;
  header["format_version"] = kFileFormatVersion;
  header["scene_id"] = info.scene_id;
  header["frame_timestamps"] = info.frame_timestamps;
  if (info.ego_positions.empty()) {
    header["ego_positions"] = nullptr;
  } else {
    nlohmann::json ego = nlohmann::json::array();
    for (const Vec3& p : info.ego_positions) ego.push_back(detail::vec3_json(p));
    header["ego_positions"] = std::move(ego);
  }
  header["class_set"] = info.class_set;
  out << header.dump() << "\n";

  for (const Observation& o : observations) {
    nlohmann::json rec;
    rec["record"] = "observation";
    rec["id"] = o.id();
    rec["frame_index"] = o.frame_index();
    rec["timestamp"] = o.timestamp();
    rec["source_kind"] = to_string(o.source().kind);
    rec["source_name"] = o.source().name;
    rec["class_label"] = o.class_label();
    rec["center"] = detail::vec3_json(o.box().center());
    rec["size"] = nlohmann::json::array({o.box().length(), o.box().width(), o.box().height()});
    rec["yaw"] = o.box().yaw();
    rec["confidence"] = o.confidence();
    out << rec.dump() << "\n";
  }
  if (!out) throw IoError("failed writing scene to '" + path.string() + "'");
}

inline SceneFileContent read_scene_file(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  SceneFileContent content;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = path.filename().string() + ":" + std::to_string(lineno);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    std::string kind = detail::require_field<std::string>(rec, "record", where);

    if (!have_header) {
      if (kind != "scene_header")
        throw FormatError(where + ": first record must be the scene header");
      detail::check_header(rec, kSceneFormat, where);
      content.info.scene_id = detail::require_field<std::string>(rec, "scene_id", where);
      content.info.frame_timestamps =
          detail::require_field<std::vector<double>>(rec, "frame_timestamps", where);
      if (rec.contains("ego_positions") && !rec.at("ego_positions").is_null()) {
        for (const auto& p : rec.at("ego_positions"))
          content.info.ego_positions.push_back(detail::vec3_from(p, where));
      }
      content.info.class_set =
          detail::require_field<std::vector<std::string>>(rec, "class_set", where);
      detail::warn_unknown_fields(rec,
                                  {"record", "format", "format_version", "scene_id",
                                   "frame_timestamps", "ego_positions", "class_set"},
                                  where, &content.warnings);
      have_header = true;
      continue;
    }

    if (kind == "scene_header") throw FormatError(where + ": duplicate scene header");
    if (kind != "observation") {
      content.warnings.push_back(where + ": unknown record type '" + kind + "' skipped");
      continue;
    }
    detail::warn_unknown_fields(rec,
                                {"record", "id", "frame_index", "timestamp", "source_kind",
                                 "source_name", "class_label", "center", "size", "yaw",
                                 "confidence"},
                                where, &content.warnings);
    try {
      if (!rec.contains("center") || !rec.contains("size"))
        throw FormatError(where + ": observation needs 'center' and 'size'");
      Vec3 center = detail::vec3_from(rec.at("center"), where);
      Vec3 size = detail::vec3_from(rec.at("size"), where);
      Box3D box{center, size.x, size.y, size.z,
                rec.contains("yaw") ? detail::require_field<double>(rec, "yaw", where) : 0.0};
      Source source{source_kind_from_string(
                        detail::require_field<std::string>(rec, "source_kind", where)),
                    detail::require_field<std::string>(rec, "source_name", where)};
      content.observations.emplace_back(
          detail::require_field<std::string>(rec, "id", where), content.info.scene_id,
          detail::require_field<std::size_t>(rec, "frame_index", where),
          detail::require_field<double>(rec, "timestamp", where), source,
          detail::require_field<std::string>(rec, "class_label", where), box,
          detail::require_field<double>(rec, "confidence", where));
    } catch (const ValidationError& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  if (!have_header) throw FormatError(path.string() + ": no scene header found");
  return content;
}

/// Read a scene file and run association over its observations.
inline Scene load_scene(const std::filesystem::path& path, const AssociationParams& params = {},
                        std::vector<std::string>* warnings = nullptr) {
  SceneFileContent content = read_scene_file(path);
  if (warnings)
    warnings->insert(warnings->end(), content.warnings.begin(), content.warnings.end());
  return assemble_scene(content.info, content.observations, params);
}

// ---- truth files ----

inline void write_truth_file(const std::filesystem::path& path, const GroundTruthErrors& truth) {
  std::ofstream out = detail::open_output(path);
  nlohmann::json header;
  header["record"] = "truth_header";
  header["format"] = kTruthFormat;
  header["format_version"] = kFileFormatVersion;
  header["scene_id"] = truth.scene_id;
  out << header.dump() << "\n";
  auto write_kind = [&](const std::vector<std::string>& ids, const char* kind) {
    for (const std::string& id : ids) {
      nlohmann::json rec;
      rec["record"] = "error";
      rec["kind"] = kind;
      rec["id"] = id;
      out << rec.dump() << "\n";
    }
  };
  write_kind(truth.missing_tracks, "missing_track");
  write_kind(truth.missing_observations, "missing_observation");
  write_kind(truth.ghost_tracks, "ghost_track");
  if (!out) throw IoError("failed writing truth to '" + path.string() + "'");
}

inline GroundTruthErrors read_truth_file(const std::filesystem::path& path,
                                         std::vector<std::string>* warnings = nullptr) {
  std::ifstream in = detail::open_input(path);
  GroundTruthErrors truth;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::set<std::string> seen;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = path.filename().string() + ":" + std::to_string(lineno);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    std::string kind = detail::require_field<std::string>(rec, "record", where);
    if (!have_header) {
      if (kind != "truth_header")
        throw FormatError(where + ": first record must be the truth header");
      detail::check_header(rec, kTruthFormat, where);
      truth.scene_id = detail::require_field<std::string>(rec, "scene_id", where);
      detail::warn_unknown_fields(rec, {"record", "format", "format_version", "scene_id"}, where,
                                  warnings);
      have_header = true;
      continue;
    }
    if (kind != "error") {
      if (warnings) warnings->push_back(where + ": unknown record type '" + kind + "' skipped");
      continue;
    }
    detail::warn_unknown_fields(rec, {"record", "kind", "id"}, where, warnings);
    std::string error_kind = detail::require_field<std::string>(rec, "kind", where);
    std::string id = detail::require_field<std::string>(rec, "id", where);
    if (!seen.insert(id).second)
      throw FormatError(where + ": error id '" + id + "' listed twice");
    if (error_kind == "missing_track") {
      truth.missing_tracks.push_back(id);
    } else if (error_kind == "missing_observation") {
      truth.missing_observations.push_back(id);
    } else if (error_kind == "ghost_track") {
      truth.ghost_tracks.push_back(id);
    } else {
      if (warnings)
        warnings->push_back(where + ": unknown error kind '" + error_kind + "' skipped");
    }
  }
  if (!have_header) throw FormatError(path.string() + ": no truth header found");
  return truth;
}

// ---- report files ----

inline void write_report_file(const std::filesystem::path& path, const ErrorReport& report) {
  std::ofstream out = detail::open_output(path);
  nlohmann::json header;
  header["record"] = "report_header";
  header["format"] = kReportFormat;
  header["format_version"] = kFileFormatVersion;
  header["application"] = report.application;
  header["component_kind"] = to_string(report.component_kind);
  header["scene_ids"] = report.scene_ids;
  header["model_hash"] = report.model_hash;
  header["excluded_count"] = report.excluded_count;
  out << header.dump() << "\n";

  std::size_t rank_no = 0;
  for (const ScoredComponent& c : report.ranked) {
    nlohmann::json rec;
    rec["record"] = "component";
    rec["rank"] = ++rank_no;
    rec["kind"] = to_string(c.kind);
    rec["id"] = c.id;
    rec["scene_id"] = c.scene_id;
    rec["class_key"] = c.class_key;
    rec["score"] = c.score;
    rec["factor_edges"] = c.factor_edges;
    rec["first_frame"] = c.first_frame;
    nlohmann::json breakdown = nlohmann::json::array();
    for (const FactorContribution& f : c.breakdown) {
      nlohmann::json b;
      b["feature"] = f.feature;
      b["element"] = f.element;
      b["value"] = f.value;
      b["plausibility"] = f.plausibility;
      b["aof_value"] = f.aof_value;
      b["edges"] = f.edges;
      breakdown.push_back(std::move(b));
    }
    rec["breakdown"] = std::move(breakdown);
    out << rec.dump() << "\n";
  }
  if (!out) throw IoError("failed writing report to '" + path.string() + "'");
}

inline ErrorReport read_report_file(const std::filesystem::path& path,
                                    std::vector<std::string>* warnings = nullptr) {
  std::ifstream in = detail::open_input(path);
  ErrorReport report;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = path.filename().string() + ":" + std::to_string(lineno);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    std::string kind = detail::require_field<std::string>(rec, "record", where);
    if (!have_header) {
      if (kind != "report_header")
        throw FormatError(where + ": first record must be the report header");
      detail::check_header(rec, kReportFormat, where);
      report.application = detail::require_field<std::string>(rec, "application", where);
      report.component_kind = component_kind_from_string(
          detail::require_field<std::string>(rec, "component_kind", where));
      report.scene_ids = detail::require_field<std::vector<std::string>>(rec, "scene_ids", where);
      report.model_hash = detail::require_field<std::string>(rec, "model_hash", where);
      report.excluded_count = detail::require_field<std::size_t>(rec, "excluded_count", where);
      detail::warn_unknown_fields(rec,
                                  {"record", "format", "format_version", "application",
                                   "component_kind", "scene_ids", "model_hash", "excluded_count"},
                                  where, warnings);
      have_header = true;
      continue;
    }
    if (kind != "component") {
      if (warnings) warnings->push_back(where + ": unknown record type '" + kind + "' skipped");
      continue;
    }
    detail::warn_unknown_fields(rec,
                                {"record", "rank", "kind", "id", "scene_id", "class_key", "score",
                                 "factor_edges", "first_frame", "breakdown"},
                                where, warnings);
    ScoredComponent c;
    c.kind = component_kind_from_string(detail::require_field<std::string>(rec, "kind", where));
    c.id = detail::require_field<std::string>(rec, "id", where);
    c.scene_id = detail::require_field<std::string>(rec, "scene_id", where);
    c.class_key = detail::require_field<std::string>(rec, "class_key", where);
    c.score = detail::require_field<double>(rec, "score", where);
    c.factor_edges = detail::require_field<std::size_t>(rec, "factor_edges", where);
    c.first_frame = detail::require_field<std::size_t>(rec, "first_frame", where);
    if (rec.contains("breakdown")) {
      for (const auto& b : rec.at("breakdown")) {
        FactorContribution f;
        f.feature = detail::require_field<std::string>(b, "feature", where);
        f.element = detail::require_field<std::string>(b, "element", where);
        f.value = detail::require_field<double>(b, "value", where);
        f.plausibility = detail::require_field<double>(b, "plausibility", where);
        f.aof_value = detail::require_field<double>(b, "aof_value", where);
        f.edges = detail::require_field<std::size_t>(b, "edges", where);
        c.breakdown.push_back(std::move(f));
      }
    }
    report.ranked.push_back(std::move(c));
  }
  if (!have_header) throw FormatError(path.string() + ": no report header found");
  return report;
}

// ---- run configuration ----

/// Everything the command-line tools read from a config file. Flags
/// override these; every key is optional and falls back to the defaults
/// shown here.
struct RunConfig {
  AssociationParams association{};
  FitOptions fit{};
  std::vector<std::string> fit_features;   // empty: every learnable built-in
  std::vector<std::string> rank_features;  // empty: the application's preset set
  std::map<std::string, ManualTable> manual_tables;
  std::string app;
  std::size_t k = 10;
  std::uint64_t seed = 7;
  double uncertainty_threshold = 0.5;
  double uncertainty_band = 0.05;
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config value has the wrong type", key);
  }
}

inline nlohmann::json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline AssociationParams association_from(const nlohmann::json& obj) {
  AssociationParams p;
  p.iou_threshold = get_or<double>(obj, "iou_threshold", p.iou_threshold);
  p.max_gap = get_or<std::size_t>(obj, "max_gap", p.max_gap);
  p.validate();
  return p;
}

}  // namespace detail

inline RunConfig load_run_config(const std::filesystem::path& path,
                                 std::vector<std::string>* warnings = nullptr) {
  nlohmann::json doc = detail::parse_json_file(path);
  if (!doc.is_object()) throw ConfigError("run config must be a JSON object", path.string());
  detail::warn_unknown_fields(doc, {"association", "fit", "rank", "k", "seed", "eval"},
                              path.filename().string(), warnings);
  RunConfig cfg;
  if (doc.contains("association")) cfg.association = detail::association_from(doc.at("association"));
  if (doc.contains("fit")) {
    const nlohmann::json& fit = doc.at("fit");
    detail::warn_unknown_fields(
        fit, {"min_samples", "max_stored_samples", "bandwidth", "bandwidth_overrides", "epsilon",
              "features"},
        path.filename().string() + ":fit", warnings);
    cfg.fit.min_samples = detail::get_or<std::size_t>(fit, "min_samples", cfg.fit.min_samples);
    cfg.fit.max_stored_samples =
        detail::get_or<std::size_t>(fit, "max_stored_samples", cfg.fit.max_stored_samples);
    if (fit.contains("bandwidth") && !fit.at("bandwidth").is_null())
      cfg.fit.bandwidth = detail::get_or<double>(fit, "bandwidth", 0.0);
    cfg.fit.bandwidth_overrides = detail::get_or<std::map<std::string, double>>(
        fit, "bandwidth_overrides", cfg.fit.bandwidth_overrides);
    cfg.fit.epsilon = detail::get_or<double>(fit, "epsilon", cfg.fit.epsilon);
    cfg.fit_features =
        detail::get_or<std::vector<std::string>>(fit, "features", cfg.fit_features);
    cfg.fit.validate();
  }
  if (doc.contains("rank")) {
    const nlohmann::json& rank = doc.at("rank");
    detail::warn_unknown_fields(rank, {"app", "features", "manual_tables"},
                                path.filename().string() + ":rank", warnings);
    cfg.app = detail::get_or<std::string>(rank, "app", cfg.app);
    cfg.rank_features =
        detail::get_or<std::vector<std::string>>(rank, "features", cfg.rank_features);
    if (rank.contains("manual_tables")) {
      for (const auto& [feature, spec] : rank.at("manual_tables").items()) {
        ManualTable t;
        if (spec.contains("table")) {
          for (const auto& row : spec.at("table")) {
            if (!row.is_array() || row.size() != 2)
              throw ConfigError("manual table rows are [value, plausibility] pairs",
                                "rank.manual_tables." + feature);
            t.table[row.at(0).get<double>()] = row.at(1).get<double>();
          }
        }
        t.default_value = detail::get_or<double>(spec, "default", t.default_value);
        cfg.manual_tables[feature] = std::move(t);
      }
    }
  }
  cfg.k = detail::get_or<std::size_t>(doc, "k", cfg.k);
  if (cfg.k < 1) throw ConfigError("k must be >= 1", "k");
  cfg.seed = detail::get_or<std::uint64_t>(doc, "seed", cfg.seed);
  if (doc.contains("eval")) {
    const nlohmann::json& eval = doc.at("eval");
    detail::warn_unknown_fields(eval, {"uncertainty_threshold", "uncertainty_band"},
                                path.filename().string() + ":eval", warnings);
    cfg.uncertainty_threshold =
        detail::get_or<double>(eval, "uncertainty_threshold", cfg.uncertainty_threshold);
    cfg.uncertainty_band = detail::get_or<double>(eval, "uncertainty_band", cfg.uncertainty_band);
  }
  return cfg;
}

// ---- generator configuration ----

struct SynthConfig {
  std::size_t scene_count = 1;
  std::uint64_t base_seed = 1;
  GeneratorConfig generator{};
};

inline SynthConfig load_synth_config(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings = nullptr) {
  nlohmann::json doc = detail::parse_json_file(path);
  if (!doc.is_object()) throw ConfigError("generator config must be a JSON object", path.string());
  detail::warn_unknown_fields(doc, {"scene_count", "base_seed", "generator"},
                              path.filename().string(), warnings);
  SynthConfig cfg;
  if (doc.contains("scene_count")) {
    if (!doc.at("scene_count").is_number_unsigned())
      throw ConfigError("scene_count must be a non-negative integer", "scene_count");
    cfg.scene_count = doc.at("scene_count").get<std::size_t>();
  }
  cfg.base_seed = detail::get_or<std::uint64_t>(doc, "base_seed", cfg.base_seed);

  if (doc.contains("generator")) {
    const nlohmann::json& g = doc.at("generator");
    detail::warn_unknown_fields(
        g,
        {"scene_id_prefix", "frame_count", "frame_period", "object_count", "classes",
         "model_sensor", "human_sensor", "injections", "association", "min_truth_observations"},
        path.filename().string() + ":generator", warnings);
    GeneratorConfig& gen = cfg.generator;
    gen.scene_id_prefix = detail::get_or<std::string>(g, "scene_id_prefix", gen.scene_id_prefix);
    if (g.contains("frame_count") && !g.at("frame_count").is_number_unsigned())
      throw ConfigError("frame_count must be a non-negative integer", "generator.frame_count");
    gen.frame_count = detail::get_or<std::size_t>(g, "frame_count", gen.frame_count);
    gen.frame_period = detail::get_or<double>(g, "frame_period", gen.frame_period);
    if (g.contains("object_count") && !g.at("object_count").is_number_unsigned())
      throw ConfigError("object_count must be a non-negative integer", "generator.object_count");
    gen.object_count = detail::get_or<std::size_t>(g, "object_count", gen.object_count);
    if (g.contains("classes")) {
      gen.classes.clear();
      for (const auto& c : g.at("classes")) {
        ClassProfile p;
        p.label = detail::get_or<std::string>(c, "label", "");
        p.weight = detail::get_or<double>(c, "weight", p.weight);
        p.volume_mean = detail::get_or<double>(c, "volume_mean", p.volume_mean);
        p.volume_std = detail::get_or<double>(c, "volume_std", p.volume_std);
        p.speed_mean = detail::get_or<double>(c, "speed_mean", p.speed_mean);
        p.speed_std = detail::get_or<double>(c, "speed_std", p.speed_std);
        p.aspect_length = detail::get_or<double>(c, "aspect_length", p.aspect_length);
        p.aspect_width = detail::get_or<double>(c, "aspect_width", p.aspect_width);
        p.aspect_height = detail::get_or<double>(c, "aspect_height", p.aspect_height);
        gen.classes.push_back(std::move(p));
      }
    }
    auto sensor_from = [&](const nlohmann::json& s, SensorProfile base) {
      base.name = detail::get_or<std::string>(s, "name", base.name);
      if (s.contains("kind"))
        base.kind = source_kind_from_string(s.at("kind").get<std::string>());
      base.detection_prob = detail::get_or<double>(s, "detection_prob", base.detection_prob);
      base.center_noise = detail::get_or<double>(s, "center_noise", base.center_noise);
      base.extent_noise = detail::get_or<double>(s, "extent_noise", base.extent_noise);
      base.confidence_mean = detail::get_or<double>(s, "confidence_mean", base.confidence_mean);
      base.confidence_std = detail::get_or<double>(s, "confidence_std", base.confidence_std);
      return base;
    };
    if (g.contains("model_sensor")) gen.model_sensor = sensor_from(g.at("model_sensor"), gen.model_sensor);
    if (g.contains("human_sensor")) gen.human_sensor = sensor_from(g.at("human_sensor"), gen.human_sensor);
    if (g.contains("injections")) {
      const nlohmann::json& inj = g.at("injections");
      gen.injections.human_track_drop =
          detail::get_or<double>(inj, "human_track_drop", gen.injections.human_track_drop);
      gen.injections.human_box_drop =
          detail::get_or<double>(inj, "human_box_drop", gen.injections.human_box_drop);
      gen.injections.ghost_rate = detail::get_or<double>(inj, "ghost_rate", gen.injections.ghost_rate);
      gen.injections.ghost_jitter =
          detail::get_or<double>(inj, "ghost_jitter", gen.injections.ghost_jitter);
    }
    if (g.contains("association")) gen.association = detail::association_from(g.at("association"));
    gen.min_truth_observations =
        detail::get_or<std::size_t>(g, "min_truth_observations", gen.min_truth_observations);
    gen.validate();
  }
  return cfg;
}

}  // namespace sceneaudit
