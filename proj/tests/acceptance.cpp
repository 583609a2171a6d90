// Acceptance gate. Runs each headline requirement end to end and prints one
// PASS/FAIL line per criterion; the process exits nonzero if any fail. The
// checks here are intentionally coarse and slow compared to the unit suite:
// they exercise the whole pipeline on realistic volumes with fixed seeds.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sceneaudit/sceneaudit.hpp"
#include "support/oracles.hpp"

using namespace sceneaudit;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct Criterion {
  int number;
  std::string label;
  double time_budget_s;
  std::function<std::string()> body;  // returns detail text; throws on failure
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

int run_cli(const std::string& args, const std::filesystem::path& out,
            const std::filesystem::path& err) {
  std::string cmd = "\"" SCENEAUDIT_CLI_PATH "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                    err.string() + "\"";
  int raw = std::system(cmd.c_str());
  if (raw == -1) return -1;
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : 128;
}

// Batch generator: 40 objects over 150 frames, four classes with volume bands
// separated by more than three standard deviations, steady speeds, and a tight
// detector. max_gap 2 lets a track ride over a single missed frame, so a
// dropped object leaves one model-only track rather than a pile of fragments.
GeneratorConfig batch_base(std::uint64_t seed, const std::string& prefix) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.scene_id_prefix = prefix;
  cfg.classes = {
      {"car", 0.55, 9.0, 1.2, 3.0, 0.5, 4.5, 1.9, 1.6},
      {"truck", 0.15, 45.0, 4.0, 2.5, 0.5, 8.0, 2.8, 2.0},
      {"pedestrian", 0.20, 0.30, 0.05, 0.3, 0.08, 0.5, 0.6, 1.7},
      {"cyclist", 0.10, 2.0, 0.35, 1.5, 0.3, 1.8, 0.7, 1.4},
  };
  cfg.model_sensor.center_noise = 0.01;
  cfg.model_sensor.extent_noise = 0.005;
  cfg.association.max_gap = 2;
  cfg.injections.human_track_drop = 0.0;
  cfg.injections.human_box_drop = 0.0;
  cfg.injections.ghost_rate = 0.0;
  return cfg;
}

GeneratorConfig clean_batch_config(std::uint64_t seed, const std::string& prefix) {
  return batch_base(seed, prefix);
}

GeneratorConfig corrupted_batch_config(std::uint64_t seed, const std::string& prefix) {
  GeneratorConfig cfg = batch_base(seed, prefix);
  cfg.injections.human_track_drop = 0.10;
  cfg.injections.ghost_rate = 0.05;
  return cfg;
}

GeneratorConfig small_config(std::uint64_t seed, std::size_t objects, std::size_t frames,
                             double drop, double ghost, double box_drop) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.scene_id_prefix = "small";
  cfg.object_count = objects;
  cfg.frame_count = frames;
  cfg.injections.human_track_drop = drop;
  cfg.injections.human_box_drop = box_drop;
  cfg.injections.ghost_rate = ghost;
  return cfg;
}

FittedModel fit_volume_velocity(const std::vector<Scene>& scenes, std::size_t min_samples = 20) {
  const FeatureRegistry& reg = FeatureRegistry::builtins();
  std::vector<FeatureSpec> specs = {reg.get("volume"), reg.get("velocity")};
  FitOptions opts;
  opts.min_samples = min_samples;
  return fit_from_scenes(scenes, specs, opts);
}

// Passthrough model for structural checks: every learned feature resolves to
// a manual table that accepts any value.
FittedModel passthrough_model(double volume_p = 1.0, double velocity_p = 1.0) {
  FittedModel m;
  m.config_hash = "passthrough";
  m.insert("volume", "", FittedDistribution::manual({}, volume_p));
  m.insert("velocity", "", FittedDistribution::manual({}, velocity_p));
  m.insert("distance", "", FittedDistribution::manual({}, 1.0));
  m.insert("class_agreement", "", FittedDistribution::manual({}, 1.0));
  return m;
}

const char* kApps[] = {"missing_tracks", "missing_observations", "model_errors"};

// ---- criterion bodies ----

std::string worked_example() {
  std::vector<Observation> obs;
  for (int f = 0; f < 3; ++f) {
    obs.push_back(oracle::obs("m" + std::to_string(f), f, SourceKind::model, "det", "car",
                              {0.0, 0.0, 0.0}, {10.0 * (f + 1), 1.0, 1.0}, 0.9, 0.0, "w"));
  }
  SceneInfo info;
  info.scene_id = "w";
  info.frame_timestamps = {0.0, 0.1, 0.2};
  info.class_set = {"car"};

  FittedModel model;
  model.config_hash = "fixture";
  model.insert("volume", "",
               FittedDistribution::manual({{10.0, 0.37}, {20.0, 0.39}, {30.0, 0.21}}, 1.0));

  const double expected = (std::log(0.37) + std::log(0.39) + std::log(0.21)) / 3.0;

  // Engine path.
  Scene scene = assemble_scene(info, obs, AssociationParams{});
  require(scene.tracks.size() == 1, "fixture should assemble into one track");
  ApplicationOptions ao;
  ao.features = {"volume"};
  Application app = make_application("missing_tracks", FeatureRegistry::builtins(), ao);
  ErrorReport report = rank({scene}, model, app);
  require(report.ranked.size() == 1, "fixture should yield one candidate");
  double engine_score = report.ranked[0].score;
  require(std::abs(engine_score - expected) < 1e-9, "engine score drifted from the formula");
  require(std::abs(engine_score - (-1.17)) <= 0.005, "engine score outside -1.17 +/- 0.005");

  // Command line path.
  oracle::TempDir td;
  std::filesystem::path scene_path = td.file("w.scene.jsonl");
  std::filesystem::path model_path = td.file("model.json");
  std::filesystem::path report_path = td.file("report.json");
  write_scene_file(scene_path, info, obs);
  save_model(model, model_path);
  int rc = run_cli("rank \"" + scene_path.string() + "\" -m \"" + model_path.string() +
                       "\" -a missing_tracks --features volume -o \"" + report_path.string() +
                       "\"",
                   td.file("out.txt"), td.file("err.txt"));
  require(rc == 0, "rank subprocess failed: " + oracle::slurp(td.file("err.txt")));
  ErrorReport cli_report = read_report_file(report_path);
  require(cli_report.ranked.size() == 1, "cli report should hold one candidate");
  double cli_score = cli_report.ranked[0].score;
  require(std::abs(cli_score - (-1.17)) <= 0.005, "cli score outside -1.17 +/- 0.005");
  require(cli_score == engine_score, "cli score differs from the engine score");

  return "score " + fmt(engine_score, 5) + " vs -1.17";
}

std::string synthetic_batch() {
  std::vector<Scene> training;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    training.push_back(generate(clean_batch_config(seed, "train")).scene);
  FittedModel model = fit_volume_velocity(training);

  Application app = make_application("missing_tracks", FeatureRegistry::builtins());

  double precision_sum = 0.0;
  double ma_precision_sum = 0.0;
  std::size_t missing_total = 0;
  std::size_t missing_found = 0;
  std::size_t scenes_with_truth = 0;

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorConfig cfg = corrupted_batch_config(seed, "batch");
    GeneratedScene gen = generate(cfg);
    ErrorReport report = rank({gen.scene}, model, app);
    precision_sum += precision_at_k(report, gen.truth, 10);

    if (!gen.truth.missing_tracks.empty()) {
      ++scenes_with_truth;
      std::set<std::string> missing(gen.truth.missing_tracks.begin(),
                                    gen.truth.missing_tracks.end());
      std::set<std::string> selection = top_k_per_class(report, 10);
      for (const std::string& id : selection)
        if (missing.count(id)) ++missing_found;
      missing_total += missing.size();
    }

    // Rule-based baseline. The checks see only model predictions, so they run
    // on a model-only assembly of the same observations; flags map back to the
    // evaluated tracks and are scored in a random order.
    std::vector<Observation> model_obs;
    for (const Observation& o : gen.observations)
      if (o.source().kind == SourceKind::model) model_obs.push_back(o);
    Scene model_view = assemble_scene(scene_info_of(gen.scene), model_obs, cfg.association);
    AdHocFlags flags = baseline_mas(model_view);
    std::set<std::string> tracklets(flags.appear_tracks.begin(), flags.appear_tracks.end());
    tracklets.insert(flags.flicker_tracks.begin(), flags.flicker_tracks.end());
    std::set<std::string> flagged_obs(flags.multibox_observations.begin(),
                                      flags.multibox_observations.end());
    for (const Track& t : model_view.tracks) {
      if (!tracklets.count(t.id())) continue;
      for (const ObservationBundle& b : t.bundles())
        for (const Observation& o : b.members()) flagged_obs.insert(o.id());
    }
    std::map<std::string, std::string> obs_track;
    for (const Track& t : gen.scene.tracks)
      for (const ObservationBundle& b : t.bundles())
        for (const Observation& o : b.members()) obs_track[o.id()] = t.id();
    std::vector<std::string> candidates;
    std::set<std::string> seen;
    for (const std::string& oid : flagged_obs) {
      auto it = obs_track.find(oid);
      if (it != obs_track.end() && seen.insert(it->second).second)
        candidates.push_back(it->second);
    }
    std::sort(candidates.begin(), candidates.end());
    Rng rng(1000 + seed);
    rng.shuffle(candidates);
    ma_precision_sum += precision_at_k(candidates, gen.truth.all_ids(), 10);
  }

  double precision = precision_sum / 20.0;
  double ma_precision = ma_precision_sum / 20.0;
  require(missing_total > 0, "batch produced no missing-track truths");
  double selection_recall = static_cast<double>(missing_found) / static_cast<double>(missing_total);

  require(precision >= 0.80,
          "precision@10 " + fmt(precision) + " below 0.80");
  require(selection_recall >= 0.75,
          "top-10-per-class recall " + fmt(selection_recall) + " below 0.75");
  require(ma_precision <= 0.6 * precision,
          "rule-based baseline precision " + fmt(ma_precision) + " above 0.6 x " + fmt(precision));

  return "precision@10 " + fmt(precision) + ", recall " + fmt(selection_recall) + " (" +
         std::to_string(missing_found) + "/" + std::to_string(missing_total) + " over " +
         std::to_string(scenes_with_truth) + " scenes), baseline precision " + fmt(ma_precision);
}

std::string oracle_equivalence() {
  std::vector<Scene> training;
  for (std::uint64_t seed = 301; seed <= 303; ++seed)
    training.push_back(generate(small_config(seed, 6, 12, 0.0, 0.0, 0.0)).scene);
  FittedModel model = fit_volume_velocity(training, 10);

  std::size_t checked = 0;
  std::size_t nonempty = 0;
  for (std::uint64_t seed = 201; seed <= 250; ++seed) {
    GeneratedScene gen = generate(small_config(seed, 6, 12, 0.3, 0.2, 0.1));
    std::size_t obs_count = gen.observations.size();
    require(obs_count <= 200, "scene exceeds the 200-observation bound");

    Application app =
        make_application(kApps[seed % 3], FeatureRegistry::builtins());
    ErrorReport engine = rank({gen.scene}, model, app);
    std::vector<oracle::OracleRanked> reference = oracle::rank({gen.scene}, model, app);

    require(engine.ranked.size() == reference.size(),
            "candidate count mismatch on seed " + std::to_string(seed));
    for (std::size_t i = 0; i < reference.size(); ++i) {
      require(engine.ranked[i].id == reference[i].id,
              "ordering mismatch on seed " + std::to_string(seed) + " at position " +
                  std::to_string(i));
      require(std::abs(engine.ranked[i].score - reference[i].score) <= 1e-9,
              "score mismatch on seed " + std::to_string(seed));
    }
    ++checked;
    if (!reference.empty()) ++nonempty;
  }
  require(nonempty >= 10, "too few scenes produced candidates to be meaningful");
  return std::to_string(checked) + " scenes, " + std::to_string(nonempty) + " with candidates";
}

std::string kde_correctness() {
  Rng rng(99);
  FitOptions opts;
  opts.min_samples = 20;
  std::size_t fits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 20 + rng.uniform_index(381);
    std::vector<double> values;
    values.reserve(n);
    int shape = static_cast<int>(rng.uniform_index(3));
    double mu = rng.uniform(-5.0, 5.0);
    double sigma = rng.uniform(0.1, 3.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (shape == 0)
        values.push_back(rng.normal(mu, sigma));
      else if (shape == 1)
        values.push_back(rng.uniform(mu - 2.0 * sigma, mu + 2.0 * sigma));
      else
        values.push_back(rng.bernoulli(0.5) ? rng.normal(mu - 3.0 * sigma, sigma)
                                            : rng.normal(mu + 3.0 * sigma, sigma));
    }
    FittedDistribution dist = FittedDistribution::fit_kde(values, opts);
    double lo = *std::min_element(values.begin(), values.end()) - 6.0 * dist.bandwidth();
    double hi = *std::max_element(values.begin(), values.end()) + 6.0 * dist.bandwidth();
    for (int probe = 0; probe < 50; ++probe) {
      double x = rng.uniform(lo, hi);
      require(dist.density(x) >= 0.0, "negative density");
    }
    double integral = oracle::trapezoid_integral(dist, lo, hi, 4000);
    require(std::abs(integral - 1.0) <= 1e-3,
            "integral " + fmt(integral, 5) + " off unit mass on trial " + std::to_string(trial));
    ++fits;
  }

  std::vector<double> normal_draws;
  normal_draws.reserve(10000);
  Rng nrng(7);
  for (int i = 0; i < 10000; ++i) normal_draws.push_back(nrng.normal(0.0, 1.0));
  FittedDistribution normal_fit = FittedDistribution::fit_kde(normal_draws, opts);
  double peak = normal_fit.density(0.0);
  require(std::abs(peak - 0.3989) <= 0.05,
          "standard normal density(0) " + fmt(peak, 4) + " outside 0.3989 +/- 0.05");

  return std::to_string(fits) + " fits, normal density(0) " + fmt(peak, 4);
}

std::string graph_structure() {
  FittedModel model = passthrough_model();
  std::size_t scenes_checked = 0;
  std::size_t factors_total = 0;
  for (std::uint64_t seed = 600; seed < 700; ++seed) {
    GeneratedScene gen = generate(small_config(seed, 6, 10, 0.2, 0.15, 0.05));
    Application app = make_application(kApps[seed % 3], FeatureRegistry::builtins());
    FactorGraph graph = compile(gen.scene, model, app);

    // Expected factor count per plan kind.
    std::size_t n_obs = 0, n_bundles = 0, n_transitions = 0;
    std::size_t n_tracks = gen.scene.tracks.size();
    for (const Track& t : gen.scene.tracks) {
      n_bundles += t.bundles().size();
      n_transitions += t.bundles().size() - 1;
      for (const ObservationBundle& b : t.bundles()) n_obs += b.members().size();
    }
    std::size_t expected_factors = 0;
    for (const FactorPlan& plan : app.factors) {
      switch (plan.spec.kind) {
        case FeatureKind::observation: expected_factors += n_obs; break;
        case FeatureKind::bundle: expected_factors += n_bundles; break;
        case FeatureKind::transition: expected_factors += n_transitions; break;
        case FeatureKind::track: expected_factors += n_tracks; break;
      }
    }
    require(graph.factors.size() == expected_factors, "factor count mismatch");
    require(graph.variables.size() == n_obs, "variable count mismatch");

    // Bipartite consistency: edges join factors to valid, distinct variables,
    // and the variable-side incidence lists mirror the factor-side edges.
    std::size_t arity_sum = 0;
    std::vector<std::vector<std::size_t>> mirror(graph.variables.size());
    for (std::size_t fi = 0; fi < graph.factors.size(); ++fi) {
      const auto& factor = graph.factors[fi];
      require(!factor.edges.empty(), "factor with no edges");
      std::set<std::size_t> seen;
      for (std::size_t vi : factor.edges) {
        require(vi < graph.variables.size(), "edge to a nonexistent variable");
        require(seen.insert(vi).second, "duplicate edge within a factor");
        mirror[vi].push_back(fi);
      }
      arity_sum += factor.edges.size();
    }
    require(arity_sum == graph.edge_count(), "edge count differs from the arity sum");
    for (std::size_t vi = 0; vi < graph.variables.size(); ++vi) {
      std::vector<std::size_t> listed = graph.incident[vi];
      std::sort(listed.begin(), listed.end());
      std::sort(mirror[vi].begin(), mirror[vi].end());
      require(listed == mirror[vi], "incidence list does not mirror the edges");
    }
    factors_total += graph.factors.size();
    ++scenes_checked;
  }
  return std::to_string(scenes_checked) + " scenes, " + std::to_string(factors_total) +
         " factors checked";
}

std::string aof_semantics() {
  // (a) Fired gates keep components out of every report.
  FittedModel pass = passthrough_model();
  std::size_t gated_seen = 0;
  for (std::uint64_t seed = 700; seed < 730; ++seed) {
    GeneratedScene gen = generate(small_config(seed, 6, 10, 0.3, 0.1, 0.1));
    std::map<std::string, const Track*> track_by_id;
    std::map<std::string, const ObservationBundle*> bundle_by_id;
    std::map<std::string, const Track*> bundle_track;
    for (const Track& t : gen.scene.tracks) {
      track_by_id[t.id()] = &t;
      for (const ObservationBundle& b : t.bundles()) {
        bundle_by_id[b.id()] = &b;
        bundle_track[b.id()] = &t;
      }
    }

    ErrorReport tracks = rank({gen.scene}, pass,
                              make_application("missing_tracks", FeatureRegistry::builtins()));
    for (const auto& row : tracks.ranked) {
      require(!track_by_id.at(row.id)->has_trusted_source(),
              "a trusted track escaped the gate");
    }
    if (tracks.excluded_count > 0) ++gated_seen;

    ErrorReport bundles =
        rank({gen.scene}, pass,
             make_application("missing_observations", FeatureRegistry::builtins()));
    for (const auto& row : bundles.ranked) {
      require(!bundle_by_id.at(row.id)->has_trusted_source(),
              "a trusted bundle escaped the gate");
      require(bundle_track.at(row.id)->has_trusted_source(),
              "an all-model track escaped the track-level gate");
    }
  }
  require(gated_seen > 0, "no scene exercised the gates");

  // (b) The complement chain reverses a two-track order.
  std::vector<Observation> obs = {
      oracle::obs("a0", 0, SourceKind::model, "det", "car", {0.0, 0.0, 1.0}, {2.0, 2.0, 2.0},
                  0.9, 0.0, "pair"),
      oracle::obs("b0", 0, SourceKind::model, "det", "car", {0.0, 40.0, 0.5}, {1.0, 1.0, 1.0},
                  0.9, 0.0, "pair")};
  SceneInfo info;
  info.scene_id = "pair";
  info.frame_timestamps = {0.0};
  info.class_set = {"car"};
  Scene pair = assemble_scene(info, obs, AssociationParams{});
  FittedModel table;
  table.config_hash = "pair";
  table.insert("volume", "", FittedDistribution::manual({{8.0, 0.9}, {1.0, 0.2}}, 1.0));
  ApplicationOptions volume_only;
  volume_only.features = {"volume"};
  ErrorReport identity = rank({pair}, table,
                              make_application("missing_tracks", FeatureRegistry::builtins(),
                                               volume_only));
  ErrorReport complement = rank({pair}, table,
                                make_application("model_errors", FeatureRegistry::builtins(),
                                                 volume_only));
  require(identity.ranked.size() == 2 && complement.ranked.size() == 2,
          "reversal fixture should rank both tracks");
  require(identity.ranked[0].id == "a0" && identity.ranked[1].id == "b0",
          "identity order should favor the plausible track");
  require(complement.ranked[0].id == "b0" && complement.ranked[1].id == "a0",
          "complement order should favor the implausible track");

  // (c) A uniform power applied after the chain leaves every ranking alone.
  std::vector<Scene> training;
  for (std::uint64_t seed = 301; seed <= 303; ++seed)
    training.push_back(generate(small_config(seed, 6, 12, 0.0, 0.0, 0.0)).scene);
  FittedModel fitted = fit_volume_velocity(training, 10);
  std::size_t compared = 0;
  for (std::uint64_t seed = 800; seed < 820; ++seed) {
    GeneratedScene gen = generate(small_config(seed, 6, 12, 0.25, 0.15, 0.05));
    Application app = make_application(kApps[seed % 3], FeatureRegistry::builtins());
    ErrorReport base = rank({gen.scene}, fitted, app);
    for (double power : {0.5, 2.0, 3.0}) {
      EngineOptions eo;
      eo.plausibility_transform = [power](double x) { return std::pow(x, power); };
      ErrorReport transformed = rank({gen.scene}, fitted, app, eo);
      require(ranked_ids(transformed) == ranked_ids(base),
              "power " + fmt(power, 1) + " changed the order on seed " + std::to_string(seed));
    }
    if (!base.ranked.empty()) ++compared;
  }
  require(compared > 0, "transform check never saw a nonempty ranking");

  return "gates, reversal, and " + std::to_string(compared) + " transform scenes";
}

std::string determinism_round_trips() {
  oracle::TempDir td;

  // Library round trips.
  GeneratedScene gen = generate(small_config(42, 5, 10, 0.25, 0.2, 0.1));
  SceneInfo info = scene_info_of(gen.scene);
  std::filesystem::path scene_a = td.file("a.scene.jsonl");
  std::filesystem::path scene_b = td.file("b.scene.jsonl");
  write_scene_file(scene_a, info, gen.observations);
  auto [read_info, read_obs, warnings] = read_scene_file(scene_a);
  require(warnings.empty(), "clean scene file should read without warnings");
  write_scene_file(scene_b, read_info, read_obs);
  require(oracle::slurp(scene_a) == oracle::slurp(scene_b), "scene file round trip drifted");

  GeneratedScene again = generate(small_config(42, 5, 10, 0.25, 0.2, 0.1));
  std::filesystem::path scene_c = td.file("c.scene.jsonl");
  write_scene_file(scene_c, scene_info_of(again.scene), again.observations);
  require(oracle::slurp(scene_a) == oracle::slurp(scene_c), "generation is not deterministic");

  FittedModel model = fit_volume_velocity({gen.scene}, 5);
  std::filesystem::path model_a = td.file("a.model.json");
  std::filesystem::path model_b = td.file("b.model.json");
  save_model(model, model_a);
  FittedModel loaded = load_model(model_a);
  require(loaded == model, "model round trip changed the fitted state");
  save_model(loaded, model_b);
  require(oracle::slurp(model_a) == oracle::slurp(model_b), "model file round trip drifted");

  Application app = make_application("missing_tracks", FeatureRegistry::builtins());
  ErrorReport report = rank({gen.scene}, model, app);
  std::filesystem::path report_a = td.file("a.report.json");
  std::filesystem::path report_b = td.file("b.report.json");
  write_report_file(report_a, report);
  write_report_file(report_b, read_report_file(report_a));
  require(oracle::slurp(report_a) == oracle::slurp(report_b), "report round trip drifted");

  // Command round trips under a fixed seed.
  std::filesystem::path cfg = td.file("synth.json");
  {
    std::ofstream f(cfg);
    f << "{\"scene_count\": 2, \"base_seed\": 11, \"generator\": {"
      << "\"object_count\": 5, \"frame_count\": 10, "
      << "\"injections\": {\"human_track_drop\": 0.25, \"ghost_rate\": 0.2}}}\n";
  }
  std::filesystem::path out = td.file("cmd_out.txt");
  std::filesystem::path err = td.file("cmd_err.txt");
  std::filesystem::path dir1 = td.file("run1");
  std::filesystem::path dir2 = td.file("run2");
  require(run_cli("synth \"" + cfg.string() + "\" -o \"" + dir1.string() + "\"", out, err) == 0,
          "synth run 1 failed");
  require(run_cli("synth \"" + cfg.string() + "\" -o \"" + dir2.string() + "\"", out, err) == 0,
          "synth run 2 failed");
  for (const char* name : {"synth-000011.scene.jsonl", "synth-000011.truth.jsonl",
                           "synth-000012.scene.jsonl", "synth-000012.truth.jsonl"}) {
    require(oracle::slurp(dir1 / name) == oracle::slurp(dir2 / name),
            std::string("synth output differs: ") + name);
  }

  std::string scene_args = "\"" + (dir1 / "synth-000011.scene.jsonl").string() + "\" \"" +
                           (dir1 / "synth-000012.scene.jsonl").string() + "\"";
  std::filesystem::path m1 = td.file("m1.json");
  std::filesystem::path m2 = td.file("m2.json");
  std::string fit_tail = " --features volume,velocity --min-samples 5 -o ";
  require(run_cli("fit " + scene_args + fit_tail + "\"" + m1.string() + "\"", out, err) == 0,
          "fit run 1 failed");
  require(run_cli("fit " + scene_args + fit_tail + "\"" + m2.string() + "\"", out, err) == 0,
          "fit run 2 failed");
  require(oracle::slurp(m1) == oracle::slurp(m2), "fit output differs between runs");

  std::filesystem::path r1 = td.file("r1.json");
  std::filesystem::path r2 = td.file("r2.json");
  std::string rank_tail = " -a missing_tracks -m \"" + m1.string() + "\" -o ";
  require(run_cli("rank " + scene_args + rank_tail + "\"" + r1.string() + "\"", out, err) == 0,
          "rank run 1 failed");
  require(run_cli("rank " + scene_args + rank_tail + "\"" + r2.string() + "\"", out, err) == 0,
          "rank run 2 failed");
  require(oracle::slurp(r1) == oracle::slurp(r2), "rank output differs between runs");

  std::string eval_args = "eval \"" + r1.string() + "\" \"" +
                          (dir1 / "synth-000011.truth.jsonl").string() + "\" \"" +
                          (dir1 / "synth-000012.truth.jsonl").string() + "\"";
  std::filesystem::path eval_out1 = td.file("eval1.txt");
  std::filesystem::path eval_out2 = td.file("eval2.txt");
  require(run_cli(eval_args, eval_out1, err) == 0, "eval run 1 failed");
  require(run_cli(eval_args, eval_out2, err) == 0, "eval run 2 failed");
  require(oracle::slurp(eval_out1) == oracle::slurp(eval_out2),
          "eval output differs between runs");

  return "library and command outputs stable";
}

std::string throughput() {
  GeneratorConfig cfg;
  cfg.seed = 9001;
  cfg.scene_id_prefix = "load";
  cfg.object_count = 25;  // two sources per object: ~50 boxes per frame
  cfg.frame_count = 150;
  cfg.injections.human_track_drop = 0.0;
  cfg.injections.human_box_drop = 0.0;
  cfg.injections.ghost_rate = 0.0;
  GeneratedScene gen = generate(cfg);
  double per_frame =
      static_cast<double>(gen.observations.size()) / static_cast<double>(cfg.frame_count);
  require(per_frame >= 45.0, "load scene too sparse: " + fmt(per_frame, 1) + " boxes/frame");

  FittedModel model = fit_volume_velocity({gen.scene});
  Application app = make_application("missing_tracks", FeatureRegistry::builtins());
  SceneInfo info = scene_info_of(gen.scene);

  Timer timer;
  Scene assembled = assemble_scene(info, gen.observations, cfg.association);
  ErrorReport report = rank({assembled}, model, app);
  double elapsed = timer.seconds();
  require(elapsed < 5.0, "association + scoring took " + fmt(elapsed, 2) + "s");
  (void)report;
  return fmt(per_frame, 1) + " boxes/frame, scored in " + fmt(elapsed, 2) + "s";
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "worked example, engine and command line", 1.0, worked_example},
      {2, "synthetic batch precision, recall, baseline margin", 120.0, synthetic_batch},
      {3, "ranking matches the brute-force scorer", 60.0, oracle_equivalence},
      {4, "density estimates are nonnegative and integrate to one", 30.0, kde_correctness},
      {5, "compiled graphs are bipartite with consistent edges", 30.0, graph_structure},
      {6, "output chain gating, reversal, and transform invariance", 30.0, aof_semantics},
      {7, "determinism and file round trips", 30.0, determinism_round_trips},
      {8, "full-rate scene scores inside the latency budget", 5.0, throughput},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    Timer timer;
    std::string detail;
    bool ok = true;
    try {
      detail = c.body();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    double elapsed = timer.seconds();
    if (ok && elapsed >= c.time_budget_s) {
      ok = false;
      detail += " [exceeded " + fmt(c.time_budget_s, 0) + "s budget]";
    }
    std::cout << (ok ? "PASS" : "FAIL") << "  " << c.number << ". " << c.label << "  (" << detail
              << "; " << fmt(elapsed, 1) << "s)\n";
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 8 criteria passed\n";
  return 0;
}
