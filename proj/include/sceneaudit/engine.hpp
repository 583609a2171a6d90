#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sceneaudit/dists.hpp"
#include "sceneaudit/errors.hpp"
#include "sceneaudit/features.hpp"
#include "sceneaudit/scene.hpp"

namespace sceneaudit {

// ---- assertion output functions ----

/// Everything a factor's assertion output function may look at when it
/// rewrites a plausibility. Pointers are set according to the factor's
/// scope; unset ones are null.
struct FactorContext {
  const Scene* scene = nullptr;
  const Track* track = nullptr;
  const ObservationBundle* bundle = nullptr;
  const ObservationBundle* bundle_b = nullptr;  // transition factors: the later bundle
  const Observation* observation = nullptr;
};

enum class AofKind { identity, complement, zero_if, one_if };

using AofPredicate = std::function<bool(const FactorContext&)>;

/// One step of a factor's output chain: pass the plausibility through,
/// invert it, or pin it to 0/1 when a predicate holds. An exact 0 output
/// later excludes the surrounding component from the report.
struct Aof {
  AofKind kind = AofKind::identity;
  AofPredicate predicate;  // required for zero_if / one_if
  std::string label;
};

inline double apply_aof(const Aof& aof, double p, const FactorContext& ctx) {
  switch (aof.kind) {
    case AofKind::identity: return p;
    case AofKind::complement: return 1.0 - p;
    case AofKind::zero_if:
      if (!aof.predicate) throw ConfigError("zero_if requires a predicate", "aof");
      return aof.predicate(ctx) ? 0.0 : p;
    case AofKind::one_if:
      if (!aof.predicate) throw ConfigError("one_if requires a predicate", "aof");
      return aof.predicate(ctx) ? 1.0 : p;
  }
  return p;
}

inline bool pred_track_has_trusted(const FactorContext& ctx) {
  return ctx.track != nullptr && ctx.track->has_trusted_source();
}

inline bool pred_track_all_model(const FactorContext& ctx) {
  return ctx.track != nullptr && !ctx.track->has_trusted_source();
}

inline bool pred_bundle_has_trusted(const FactorContext& ctx) {
  if (ctx.bundle && ctx.bundle->has_trusted_source()) return true;
  if (ctx.bundle_b && ctx.bundle_b->has_trusted_source()) return true;
  return false;
}

// ---- applications ----

enum class ComponentKind { observation, bundle, track };

inline const char* to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::observation: return "observation";
    case ComponentKind::bundle: return "bundle";
    case ComponentKind::track: return "track";
  }
  return "track";
}

inline ComponentKind component_kind_from_string(const std::string& s) {
  if (s == "observation") return ComponentKind::observation;
  if (s == "bundle") return ComponentKind::bundle;
  if (s == "track") return ComponentKind::track;
  throw FormatError("unknown component kind '" + s + "'");
}

/// A hand-written plausibility table for a manual-family feature.
struct ManualTable {
  std::map<double, double> table;
  double default_value = 1.0;
};

/// One feature's role inside an application: the spec, the output chain
/// applied to its plausibilities, and (for manual-family features) the
/// fallback table used when the model file carries no entry for it.
struct FactorPlan {
  FeatureSpec spec;
  std::vector<Aof> aofs;
  std::optional<FittedDistribution> manual_dist;
};

/// A named error-finding configuration: which component kind gets ranked
/// and which factors participate.
struct Application {
  std::string name;
  ComponentKind target = ComponentKind::track;
  std::vector<FactorPlan> factors;
};

struct ApplicationOptions {
  std::vector<std::string> features;                 // empty: use the preset's default set
  std::map<std::string, ManualTable> manual_tables;  // per-feature table overrides
};

/// Built-in table for a manual-family feature, if one exists.
inline std::optional<ManualTable> default_manual_table(const std::string& feature) {
  if (feature == "count") {
    // Tracks of one or two observations carry too little signal to assess.
    return ManualTable{{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}, 1.0};
  }
  if (feature == "model_only") {
    return ManualTable{{{0.0, 0.0}, {1.0, 1.0}}, 0.0};
  }
  return std::nullopt;
}

namespace detail {

inline std::string normalize_app_name(std::string name) {
  for (char& c : name) {
    if (c == '-') c = '_';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return name;
}

}  // namespace detail

/// Build one of the three stock applications. `missing_tracks` ranks
/// all-model tracks (ones a trusted source should have labeled),
/// `missing_observations` ranks all-model bundles inside trusted tracks,
/// `model_errors` ranks tracks by implausibility via complemented factors.
inline Application make_application(const std::string& raw_name, const FeatureRegistry& registry,
                                    const ApplicationOptions& options = {}) {
  std::string name = detail::normalize_app_name(raw_name);
  Application app;
  app.name = name;

  std::vector<std::string> features = options.features;
  if (name == "missing_tracks") {
    app.target = ComponentKind::track;
    if (features.empty()) features = {"volume", "velocity", "count"};
  } else if (name == "missing_observations") {
    app.target = ComponentKind::bundle;
    if (features.empty()) features = {"volume", "velocity"};
  } else if (name == "model_errors") {
    app.target = ComponentKind::track;
    if (features.empty()) features = {"volume", "velocity", "count"};
  } else {
    throw ConfigError("unknown application '" + raw_name + "'", "app");
  }

  for (const std::string& fname : features) {
    FactorPlan plan;
    plan.spec = registry.get(fname);

    bool manual = plan.spec.family == DistFamily::manual;
    auto table_it = options.manual_tables.find(fname);
    if (table_it != options.manual_tables.end()) {
      manual = true;
      plan.manual_dist = FittedDistribution::manual(table_it->second.table,
                                                    table_it->second.default_value);
    } else if (manual) {
      std::optional<ManualTable> t = default_manual_table(fname);
      if (!t)
        throw ConfigError("manual feature '" + fname + "' needs a table", "manual_tables");
      plan.manual_dist = FittedDistribution::manual(t->table, t->default_value);
    }

    if (name == "missing_tracks") {
      // A track any trusted source touched is, by definition, not missing.
      plan.aofs.push_back({AofKind::zero_if, pred_track_has_trusted, "zero_if_track_has_trusted"});
    } else if (name == "missing_observations") {
      // Candidate bundles are the all-model ones, but only inside tracks a
      // trusted source labeled elsewhere; bundle-level gates stay off
      // transition factors so a candidate is not masked by its neighbors.
      if (plan.spec.kind == FeatureKind::observation || plan.spec.kind == FeatureKind::bundle)
        plan.aofs.push_back(
            {AofKind::zero_if, pred_bundle_has_trusted, "zero_if_bundle_has_trusted"});
      plan.aofs.push_back({AofKind::zero_if, pred_track_all_model, "zero_if_track_all_model"});
    } else if (name == "model_errors") {
      if (!manual) plan.aofs.push_back({AofKind::complement, nullptr, "complement"});
    }
    app.factors.push_back(std::move(plan));
  }
  if (app.factors.empty()) throw ConfigError("application has no features", "features");
  return app;
}

// ---- the factor graph ----

struct EngineOptions {
  /// Optional strictly increasing transform applied to every non-zero factor
  /// output before the log. Hook for calibration experiments; identity when
  /// unset.
  std::function<double(double)> plausibility_transform;
};

/// Bipartite graph over one scene: variable nodes are observations, factor
/// nodes carry a feature's fitted distribution evaluated on one element
/// (observation, bundle, transition, or track) and connect to every
/// observation of that element. All values are computed at compile time;
/// the graph itself is immutable afterwards.
struct FactorGraph {
  struct Var {
    std::size_t track, bundle, member;
    const Observation* obs;
  };
  struct Range {
    std::size_t begin = 0, end = 0;  // [begin, end) into variables
    std::size_t size() const { return end - begin; }
  };
  struct Factor {
    std::string feature;
    FeatureKind kind;
    std::string class_key;   // model key the distribution was found under
    std::string element_id;  // id of the element the value came from
    double value = 0.0;
    double plausibility = 0.0;
    double aof_value = 0.0;     // after the output chain
    double scored_value = 0.0;  // after the optional report-level transform
    std::vector<std::size_t> edges;  // variable indices
  };

  const Scene* scene = nullptr;
  std::vector<Var> variables;
  std::vector<Range> track_vars;               // per track
  std::vector<std::vector<Range>> bundle_vars;  // per track, per bundle
  std::vector<Factor> factors;
  std::vector<std::vector<std::size_t>> incident;  // per variable: factor indices

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const Factor& f : factors) n += f.edges.size();
    return n;
  }
};

/// Evaluate every factor of the application against one scene. Each factor
/// resolves its distribution from the model by (feature, class key) with
/// pooled fallback; manual-family factors without a model entry use the
/// plan's table. A feature with neither is an error.
inline FactorGraph compile(const Scene& scene, const FittedModel& model, const Application& app,
                           const EngineOptions& opts = {}) {
  FactorGraph g;
  g.scene = &scene;

  g.track_vars.resize(scene.tracks.size());
  g.bundle_vars.resize(scene.tracks.size());
  for (std::size_t ti = 0; ti < scene.tracks.size(); ++ti) {
    const Track& t = scene.tracks[ti];
    g.track_vars[ti].begin = g.variables.size();
    g.bundle_vars[ti].resize(t.bundles().size());
    for (std::size_t bi = 0; bi < t.bundles().size(); ++bi) {
      g.bundle_vars[ti][bi].begin = g.variables.size();
      const ObservationBundle& b = t.bundles()[bi];
      for (std::size_t mi = 0; mi < b.members().size(); ++mi)
        g.variables.push_back({ti, bi, mi, &b.members()[mi]});
      g.bundle_vars[ti][bi].end = g.variables.size();
    }
    g.track_vars[ti].end = g.variables.size();
  }
  g.incident.resize(g.variables.size());

  auto resolve = [&](const FactorPlan& plan, const std::string& key,
                     std::string* used) -> const FittedDistribution* {
    if (const FittedDistribution* d = model.lookup(plan.spec.name, key, used)) return d;
    if (plan.manual_dist) {
      *used = "";
      return &*plan.manual_dist;
    }
    throw EngineError("no fitted distribution for feature '" + plan.spec.name + "'" +
                      (key.empty() ? "" : " (class '" + key + "')"));
  };

  auto emit = [&](const FactorPlan& plan, const std::string& key, const std::string& element_id,
                  double value, const FactorContext& ctx, std::vector<std::size_t> edges) {
    FactorGraph::Factor f;
    f.feature = plan.spec.name;
    f.kind = plan.spec.kind;
    f.element_id = element_id;
    f.value = value;
    const FittedDistribution* dist = resolve(plan, key, &f.class_key);
    f.plausibility = dist->plausibility(value);
    double p = f.plausibility;
    for (const Aof& aof : plan.aofs) p = apply_aof(aof, p, ctx);
    f.aof_value = p;
    f.scored_value =
        (opts.plausibility_transform && p > 0.0)
            ? std::clamp(opts.plausibility_transform(p), 0.0, 1.0)
            : p;
    f.edges = std::move(edges);
    std::size_t fi = g.factors.size();
    for (std::size_t v : f.edges) g.incident[v].push_back(fi);
    g.factors.push_back(std::move(f));
  };

  for (const FactorPlan& plan : app.factors) {
    plan.spec.validate();
    for (std::size_t ti = 0; ti < scene.tracks.size(); ++ti) {
      const Track& t = scene.tracks[ti];
      FactorContext ctx;
      ctx.scene = &scene;
      ctx.track = &t;
      switch (plan.spec.kind) {
        case FeatureKind::observation:
          for (std::size_t bi = 0; bi < t.bundles().size(); ++bi) {
            const ObservationBundle& b = t.bundles()[bi];
            ctx.bundle = &b;
            for (std::size_t mi = 0; mi < b.members().size(); ++mi) {
              const Observation& o = b.members()[mi];
              ctx.observation = &o;
              emit(plan, class_key_for(plan.spec, o), o.id(), plan.spec.obs_fn(o, scene), ctx,
                   {g.bundle_vars[ti][bi].begin + mi});
            }
            ctx.observation = nullptr;
          }
          break;
        case FeatureKind::bundle:
          for (std::size_t bi = 0; bi < t.bundles().size(); ++bi) {
            const ObservationBundle& b = t.bundles()[bi];
            ctx.bundle = &b;
            std::vector<std::size_t> edges;
            for (std::size_t v = g.bundle_vars[ti][bi].begin; v < g.bundle_vars[ti][bi].end; ++v)
              edges.push_back(v);
            emit(plan, class_key_for(plan.spec, b), b.id(), plan.spec.bundle_fn(b, scene), ctx,
                 std::move(edges));
          }
          break;
        case FeatureKind::transition:
          for (std::size_t bi = 0; bi + 1 < t.bundles().size(); ++bi) {
            const ObservationBundle& a = t.bundles()[bi];
            const ObservationBundle& b = t.bundles()[bi + 1];
            ctx.bundle = &a;
            ctx.bundle_b = &b;
            std::vector<std::size_t> edges;
            for (std::size_t v = g.bundle_vars[ti][bi].begin; v < g.bundle_vars[ti][bi].end; ++v)
              edges.push_back(v);
            for (std::size_t v = g.bundle_vars[ti][bi + 1].begin;
                 v < g.bundle_vars[ti][bi + 1].end; ++v)
              edges.push_back(v);
            emit(plan, class_key_for(plan.spec, t), a.id() + "->" + b.id(),
                 plan.spec.transition_fn(a, b, t, scene), ctx, std::move(edges));
          }
          ctx.bundle = nullptr;
          ctx.bundle_b = nullptr;
          break;
        case FeatureKind::track: {
          std::vector<std::size_t> edges;
          for (std::size_t v = g.track_vars[ti].begin; v < g.track_vars[ti].end; ++v)
            edges.push_back(v);
          emit(plan, class_key_for(plan.spec, t), t.id(), plan.spec.track_fn(t, scene), ctx,
               std::move(edges));
          break;
        }
      }
    }
  }
  return g;
}

// ---- scoring ----

struct FactorContribution {
  std::string feature;
  std::string element;
  double value = 0.0;
  double plausibility = 0.0;
  double aof_value = 0.0;
  std::size_t edges = 0;  // edges between this factor and the component
};

struct ScoredComponent {
  ComponentKind kind = ComponentKind::track;
  std::string id;
  std::string scene_id;
  std::string class_key;  // majority class, for per-class reporting
  double score = 0.0;
  std::size_t factor_edges = 0;
  bool excluded = false;  // some incident factor output an exact 0
  std::size_t first_frame = 0;
  std::vector<FactorContribution> breakdown;
};

/// Sum of ln(factor output) over the factors incident to one observation.
/// The building block of component scores.
inline double observation_log_sum(const FactorGraph& g, std::size_t var_index) {
  double sum = 0.0;
  for (std::size_t fi : g.incident.at(var_index)) {
    const FactorGraph::Factor& f = g.factors[fi];
    if (f.scored_value == 0.0) return -std::numeric_limits<double>::infinity();
    sum += std::log(f.scored_value);
  }
  return sum;
}

namespace detail {

inline ScoredComponent score_vars(const FactorGraph& g, ComponentKind kind,
                                  FactorGraph::Range range, std::string id, std::string class_key,
                                  std::size_t first_frame) {
  ScoredComponent out;
  out.kind = kind;
  out.id = std::move(id);
  out.scene_id = g.scene->scene_id;
  out.class_key = std::move(class_key);
  out.first_frame = first_frame;

  std::map<std::size_t, std::size_t> touched;  // factor index -> edge multiplicity
  for (std::size_t v = range.begin; v < range.end; ++v)
    for (std::size_t fi : g.incident[v]) ++touched[fi];

  double sum = 0.0;
  for (const auto& [fi, mult] : touched) {
    const FactorGraph::Factor& f = g.factors[fi];
    out.factor_edges += mult;
    if (f.scored_value == 0.0)
      out.excluded = true;
    else
      sum += static_cast<double>(mult) * std::log(f.scored_value);
    out.breakdown.push_back(
        {f.feature, f.element_id, f.value, f.plausibility, f.aof_value, mult});
  }
  if (out.factor_edges == 0) {
    out.excluded = true;  // nothing to assess
  } else if (!out.excluded) {
    out.score = sum / static_cast<double>(out.factor_edges);
  }
  return out;
}

}  // namespace detail

/// Mean log factor output per edge over the component's observations:
/// sum of ln(output) across all (observation, factor) incidences divided by
/// the number of factor edges incident to the component. Components touching
/// a factor that output exactly 0 come back marked excluded.
inline ScoredComponent score_track(const FactorGraph& g, std::size_t track_index) {
  const Track& t = g.scene->tracks.at(track_index);
  return detail::score_vars(g, ComponentKind::track, g.track_vars.at(track_index), t.id(),
                            t.majority_class(), t.first_frame());
}

inline ScoredComponent score_bundle(const FactorGraph& g, std::size_t track_index,
                                    std::size_t bundle_index) {
  const ObservationBundle& b = g.scene->tracks.at(track_index).bundles().at(bundle_index);
  return detail::score_vars(g, ComponentKind::bundle, g.bundle_vars.at(track_index).at(bundle_index),
                            b.id(), b.majority_class(), b.frame_index());
}

inline ScoredComponent score_observation(const FactorGraph& g, std::size_t var_index) {
  const FactorGraph::Var& v = g.variables.at(var_index);
  return detail::score_vars(g, ComponentKind::observation, {var_index, var_index + 1},
                            v.obs->id(), v.obs->class_label(), v.obs->frame_index());
}

// ---- ranking ----

struct ErrorReport {
  std::string application;
  ComponentKind component_kind = ComponentKind::track;
  std::vector<std::string> scene_ids;
  std::string model_hash;
  std::size_t excluded_count = 0;
  std::vector<ScoredComponent> ranked;  // descending score
};

/// Score every component of the application's target kind across the given
/// scenes and rank the non-excluded ones by descending score. Ties break by
/// (scene id, first frame, component id), so reports are deterministic.
inline ErrorReport rank(const std::vector<Scene>& scenes, const FittedModel& model,
                        const Application& app, const EngineOptions& opts = {}) {
  ErrorReport report;
  report.application = app.name;
  report.component_kind = app.target;
  report.model_hash = model.config_hash;

  for (const Scene& scene : scenes) {
    report.scene_ids.push_back(scene.scene_id);
    FactorGraph g = compile(scene, model, app, opts);
    std::vector<ScoredComponent> scored;
    switch (app.target) {
      case ComponentKind::track:
        for (std::size_t ti = 0; ti < scene.tracks.size(); ++ti)
          scored.push_back(score_track(g, ti));
        break;
      case ComponentKind::bundle:
        for (std::size_t ti = 0; ti < scene.tracks.size(); ++ti)
          for (std::size_t bi = 0; bi < scene.tracks[ti].bundles().size(); ++bi)
            scored.push_back(score_bundle(g, ti, bi));
        break;
      case ComponentKind::observation:
        for (std::size_t v = 0; v < g.variables.size(); ++v)
          scored.push_back(score_observation(g, v));
        break;
    }
    for (ScoredComponent& c : scored) {
      if (c.excluded)
        ++report.excluded_count;
      else
        report.ranked.push_back(std::move(c));
    }
  }

  std::sort(report.ranked.begin(), report.ranked.end(),
            [](const ScoredComponent& a, const ScoredComponent& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.scene_id != b.scene_id) return a.scene_id < b.scene_id;
              if (a.first_frame != b.first_frame) return a.first_frame < b.first_frame;
              return a.id < b.id;
            });
  return report;
}

}  // namespace sceneaudit
