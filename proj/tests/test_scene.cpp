#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "sceneaudit/association.hpp"
#include "sceneaudit/random.hpp"
#include "sceneaudit/scene.hpp"
#include "support/oracles.hpp"

using namespace sceneaudit;
using Catch::Approx;
using oracle::obs;

TEST_CASE("observation validation") {
  CHECK_THROWS_AS(obs("", 0, SourceKind::model, "det", "car", {0, 0, 0}, {1, 1, 1}),
                  ValidationError);
  CHECK_THROWS_AS(obs("a", 0, SourceKind::model, "", "car", {0, 0, 0}, {1, 1, 1}),
                  ValidationError);
  CHECK_THROWS_AS(obs("a", 0, SourceKind::model, "det", "", {0, 0, 0}, {1, 1, 1}),
                  ValidationError);
  CHECK_THROWS_AS(
      Observation("a", "s", 0, std::nan(""), Source{SourceKind::model, "det"}, "car",
                  Box3D{{0, 0, 0}, 1, 1, 1, 0}, 0.5),
      ValidationError);

  SECTION("model confidence must lie in [0, 1]") {
    CHECK_THROWS_AS(obs("a", 0, SourceKind::model, "det", "car", {0, 0, 0}, {1, 1, 1}, 1.2),
                    ValidationError);
    CHECK_THROWS_AS(obs("a", 0, SourceKind::model, "det", "car", {0, 0, 0}, {1, 1, 1}, -0.1),
                    ValidationError);
    CHECK(obs("a", 0, SourceKind::model, "det", "car", {0, 0, 0}, {1, 1, 1}, 0.0).confidence() ==
          0.0);
  }
  SECTION("trusted sources carry full confidence regardless of input") {
    CHECK(obs("a", 0, SourceKind::human, "vendor", "car", {0, 0, 0}, {1, 1, 1}, 0.3)
              .confidence() == 1.0);
    CHECK(obs("a", 0, SourceKind::auditor, "qa", "car", {0, 0, 0}, {1, 1, 1}, 7.0)
              .confidence() == 1.0);
  }
  SECTION("trust follows source kind") {
    CHECK_FALSE(Source{SourceKind::model, "det"}.trusted());
    CHECK(Source{SourceKind::human, "vendor"}.trusted());
    CHECK(Source{SourceKind::auditor, "qa"}.trusted());
  }
  CHECK_THROWS_AS(source_kind_from_string("robot"), ValidationError);
  CHECK(source_kind_from_string("auditor") == SourceKind::auditor);
}

TEST_CASE("bundle invariants") {
  Observation m = obs("b", 2, SourceKind::model, "det", "car", {0, 0, 0}, {4, 2, 1.5}, 0.8);
  Observation h = obs("a", 2, SourceKind::human, "vendor", "car", {0.1, 0, 0}, {4, 2, 1.5});

  SECTION("members are sorted by id and the bundle takes the smallest id") {
    ObservationBundle b({m, h});
    REQUIRE(b.members().size() == 2);
    CHECK(b.members()[0].id() == "a");
    CHECK(b.id() == "a");
    CHECK(b.frame_index() == 2);
    CHECK(b.has_trusted_source());
  }
  SECTION("empty, mixed-frame, and same-source bundles are rejected") {
    CHECK_THROWS_AS(ObservationBundle({}), ValidationError);
    Observation other = obs("c", 3, SourceKind::model, "det2", "car", {0, 0, 0}, {4, 2, 1.5});
    CHECK_THROWS_AS(ObservationBundle({m, other}), ValidationError);
    Observation dup = obs("c", 2, SourceKind::model, "det", "car", {0, 0, 0}, {4, 2, 1.5});
    CHECK_THROWS_AS(ObservationBundle({m, dup}), ValidationError);
  }
  SECTION("representative prefers confidence, then human over auditor over model") {
    CHECK(ObservationBundle({m, h}).representative().id() == "a");  // 1.0 beats 0.8
    Observation q = obs("q", 2, SourceKind::auditor, "qa", "car", {0, 0, 0}, {4, 2, 1.5});
    CHECK(ObservationBundle({q, h}).representative().source().kind == SourceKind::human);
    Observation h2 = obs("z", 2, SourceKind::human, "vendor2", "car", {0, 0, 0}, {4, 2, 1.5});
    CHECK(ObservationBundle({h2, h}).representative().id() == "a");  // id breaks the tie
  }
  SECTION("majority class, smallest label on ties") {
    Observation t1 = obs("a", 0, SourceKind::model, "s1", "car", {0, 0, 0}, {1, 1, 1});
    Observation t2 = obs("b", 0, SourceKind::model, "s2", "truck", {0, 0, 0}, {1, 1, 1});
    Observation t3 = obs("c", 0, SourceKind::model, "s3", "truck", {0, 0, 0}, {1, 1, 1});
    CHECK(ObservationBundle({t1, t2, t3}).majority_class() == "truck");
    CHECK(ObservationBundle({t1, t2}).majority_class() == "car");
    CHECK(ObservationBundle({t1}).majority_class() == "car");
  }
}

TEST_CASE("track invariants") {
  auto bundle_at = [](const std::string& id, std::size_t frame) {
    return ObservationBundle(
        {obs(id, frame, SourceKind::model, "det", "car", {0, 0, 0}, {4, 2, 1.5})});
  };

  SECTION("strictly increasing frames within the gap limit") {
    Track t({bundle_at("b", 0), bundle_at("a", 1), bundle_at("c", 3)}, 2);
    CHECK(t.id() == "a");  // smallest member id, not first frame
    CHECK(t.first_frame() == 0);
    CHECK(t.last_frame() == 3);
    CHECK(t.observation_count() == 3);
    CHECK_FALSE(t.has_trusted_source());
  }
  SECTION("violations are rejected") {
    CHECK_THROWS_AS(Track({}, 1), ValidationError);
    CHECK_THROWS_AS(Track({bundle_at("a", 1), bundle_at("b", 1)}, 1), ValidationError);
    CHECK_THROWS_AS(Track({bundle_at("a", 2), bundle_at("b", 1)}, 1), ValidationError);
    CHECK_THROWS_AS(Track({bundle_at("a", 0), bundle_at("b", 2)}, 1), ValidationError);
  }
  SECTION("majority class over member observations") {
    ObservationBundle two(
        {obs("a", 0, SourceKind::model, "det", "truck", {0, 0, 0}, {1, 1, 1}),
         obs("b", 0, SourceKind::human, "vendor", "truck", {0, 0, 0}, {1, 1, 1})});
    Track t({two, bundle_at("c", 1)}, 1);
    CHECK(t.majority_class() == "truck");  // 2 truck vs 1 car
    CHECK(t.has_trusted_source());
  }
}

TEST_CASE("bundle_frame on worked examples") {
  SECTION("empty input") { CHECK(bundle_frame({}, 0.5).empty()); }
  SECTION("overlapping boxes from distinct sources merge") {
    std::vector<Observation> in = {
        obs("m1", 0, SourceKind::model, "det", "car", {0, 0, 0}, {4, 2, 1.5}, 0.9),
        obs("h1", 0, SourceKind::human, "vendor", "car", {0.2, 0, 0}, {4, 2, 1.5}),
        obs("m2", 0, SourceKind::model, "det", "car", {30, 0, 0}, {4, 2, 1.5}, 0.8),
    };
    auto bundles = bundle_frame(in, 0.5);
    REQUIRE(bundles.size() == 2);
    CHECK(bundles[0].id() == "h1");
    CHECK(bundles[0].members().size() == 2);
    CHECK(bundles[1].id() == "m2");
  }
  SECTION("same-source boxes never merge however much they overlap") {
    std::vector<Observation> in = {
        obs("a", 0, SourceKind::model, "det", "car", {0, 0, 0}, {4, 2, 1.5}, 0.9),
        obs("b", 0, SourceKind::model, "det", "car", {0, 0, 0}, {4, 2, 1.5}, 0.9),
    };
    CHECK(bundle_frame(in, 0.5).size() == 2);
  }
  SECTION("threshold is inclusive") {
    // Unit cubes offset by 0.5 share IOU exactly 1/3.
    std::vector<Observation> in = {
        obs("a", 0, SourceKind::model, "det", "car", {0, 0, 0}, {1, 1, 1}),
        obs("b", 0, SourceKind::human, "vendor", "car", {0.5, 0, 0}, {1, 1, 1}),
    };
    CHECK(bundle_frame(in, 1.0 / 3.0).size() == 1);
    CHECK(bundle_frame(in, 0.34).size() == 2);
  }
  SECTION("greedy merge prefers the strongest overlap under source conflicts") {
    // h1 overlaps m1 strongly and m2 weakly; m1 and m2 share a source, so
    // only one can join. The stronger pair wins.
    std::vector<Observation> in = {
        obs("m1", 0, SourceKind::model, "det", "car", {0.05, 0, 0}, {4, 2, 1.5}, 0.9),
        obs("m2", 0, SourceKind::model, "det", "car", {1.5, 0, 0}, {4, 2, 1.5}, 0.9),
        obs("h1", 0, SourceKind::human, "vendor", "car", {0, 0, 0}, {4, 2, 1.5}),
    };
    auto bundles = bundle_frame(in, 0.3);
    REQUIRE(bundles.size() == 2);
    std::vector<std::string> merged;
    for (const Observation& o : bundles[0].members()) merged.push_back(o.id());
    CHECK(merged == std::vector<std::string>{"h1", "m1"});
  }
  SECTION("mixed frames are rejected") {
    std::vector<Observation> in = {
        obs("a", 0, SourceKind::model, "det", "car", {0, 0, 0}, {1, 1, 1}),
        obs("b", 1, SourceKind::human, "vendor", "car", {0, 0, 0}, {1, 1, 1}),
    };
    CHECK_THROWS_AS(bundle_frame(in, 0.5), ValidationError);
  }
}

TEST_CASE("bundle_frame matches the exhaustive oracle and ignores input order") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    // Up to 6 observations clustered so overlaps actually occur.
    std::size_t n = 1 + rng.uniform_index(6);
    std::vector<std::string> sources = {"det", "vendor", "qa", "det2"};
    std::vector<SourceKind> kinds = {SourceKind::model, SourceKind::human, SourceKind::auditor,
                                     SourceKind::model};
    std::vector<Observation> in;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t s = rng.uniform_index(sources.size());
      in.push_back(obs("o" + std::to_string(i), 0, kinds[s], sources[s], "car",
                       {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), 0},
                       {rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0), 1.5},
                       kinds[s] == SourceKind::model ? 0.9 : 1.0));
    }
    double threshold = rng.uniform(0.1, 0.9);

    auto expected = oracle::bundle_partition(in, threshold);
    auto got = oracle::partition_of(bundle_frame(in, threshold));
    CHECK(got == expected);

    std::vector<Observation> shuffled = in;
    rng.shuffle(shuffled);
    CHECK(oracle::partition_of(bundle_frame(shuffled, threshold)) == expected);
  }
}

TEST_CASE("bundle_frame partitions its input") {
  Rng rng(23);
  std::vector<Observation> in;
  for (std::size_t i = 0; i < 50; ++i) {
    bool human = i % 2 == 0;
    in.push_back(obs("o" + std::to_string(100 + i), 0,
                     human ? SourceKind::human : SourceKind::model, human ? "vendor" : "det",
                     "car", {rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0), 0},
                     {rng.uniform(1.0, 5.0), rng.uniform(1.0, 5.0), 1.5}, human ? 1.0 : 0.7));
  }
  auto bundles = bundle_frame(in, 0.4);
  std::multiset<std::string> seen;
  for (const ObservationBundle& b : bundles)
    for (const Observation& o : b.members()) seen.insert(o.id());
  std::multiset<std::string> want;
  for (const Observation& o : in) want.insert(o.id());
  CHECK(seen == want);
}

namespace {

ObservationBundle single(const std::string& id, std::size_t frame, double x,
                         const std::string& source = "det",
                         SourceKind kind = SourceKind::model) {
  return ObservationBundle({obs(id, frame, kind, source, "car", {x, 0, 0}, {4, 2, 1.5},
                                kind == SourceKind::model ? 0.9 : 1.0)});
}

}  // namespace

TEST_CASE("build_tracks on worked examples") {
  SECTION("a stationary object forms one track") {
    std::vector<std::vector<ObservationBundle>> frames;
    for (std::size_t f = 0; f < 10; ++f) frames.push_back({single("o" + std::to_string(f), f, 0)});
    auto tracks = build_tracks(frames, {});
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].bundles().size() == 10);
  }
  SECTION("distant objects stay apart") {
    std::vector<std::vector<ObservationBundle>> frames;
    for (std::size_t f = 0; f < 5; ++f)
      frames.push_back({single("a" + std::to_string(f), f, 0), single("b" + std::to_string(f), f, 40)});
    auto tracks = build_tracks(frames, {});
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[0].bundles().size() == 5);
    CHECK(tracks[1].bundles().size() == 5);
  }
  SECTION("gaps beyond max_gap split tracks") {
    std::vector<std::vector<ObservationBundle>> frames = {
        {single("a", 0, 0)}, {single("b", 1, 0)}, {single("c", 3, 0)}};
    CHECK(build_tracks(frames, {0.5, 1}).size() == 2);
    CHECK(build_tracks(frames, {0.5, 2}).size() == 1);
  }
  SECTION("the better overlap wins a contested bundle") {
    // Two open tracks, one new bundle halfway between but nearer track a.
    std::vector<std::vector<ObservationBundle>> frames = {
        {single("a", 0, 0.0), single("b", 0, 2.0)}, {single("c", 1, 0.5)}};
    auto tracks = build_tracks(frames, {0.1, 1});
    REQUIRE(tracks.size() == 2);
    // Track "a" is the one "c" joined.
    for (const Track& t : tracks) {
      if (t.id() == "a") CHECK(t.bundles().size() == 2);
      if (t.id() == "b") CHECK(t.bundles().size() == 1);
    }
  }
  SECTION("decreasing frame order is rejected") {
    std::vector<std::vector<ObservationBundle>> frames = {{single("a", 1, 0)}, {single("b", 0, 0)}};
    CHECK_THROWS_AS(build_tracks(frames, {}), ValidationError);
  }
  SECTION("the IOU threshold gates linking") {
    std::vector<std::vector<ObservationBundle>> frames = {{single("a", 0, 0)},
                                                          {single("b", 1, 3.0)}};
    // 4-long boxes offset 3.0: inter 1, union 7, IOU 1/7.
    CHECK(build_tracks(frames, {0.2, 1}).size() == 2);
    CHECK(build_tracks(frames, {0.1, 1}).size() == 1);
  }
}

TEST_CASE("build_tracks partitions the bundles it is given") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<ObservationBundle>> frames;
    std::size_t next_id = 0;
    for (std::size_t f = 0; f < 8; ++f) {
      std::vector<Observation> frame_obs;
      std::size_t n = rng.uniform_index(5);
      for (std::size_t i = 0; i < n; ++i)
        frame_obs.push_back(obs("o" + std::to_string(1000 + next_id++), f, SourceKind::model,
                                "det", "car", {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), 0},
                                {3, 2, 1.5}, 0.9));
      if (!frame_obs.empty()) frames.push_back(bundle_frame(frame_obs, 0.5));
    }
    std::multiset<std::string> in_ids, out_ids;
    for (const auto& frame : frames)
      for (const ObservationBundle& b : frame) in_ids.insert(b.id());
    auto tracks = build_tracks(frames, {0.3, 2});
    for (const Track& t : tracks)
      for (const ObservationBundle& b : t.bundles()) out_ids.insert(b.id());
    CHECK(out_ids == in_ids);

    auto again = build_tracks(frames, {0.3, 2});
    REQUIRE(again.size() == tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      CHECK(again[i].id() == tracks[i].id());
      CHECK(again[i].bundles().size() == tracks[i].bundles().size());
    }
  }
}

TEST_CASE("assemble_scene wires the pipeline together") {
  SceneInfo info;
  info.scene_id = "s";
  info.frame_timestamps = {0.0, 0.1, 0.2};
  info.class_set = {"car"};

  SECTION("happy path") {
    std::vector<Observation> in;
    for (std::size_t f = 0; f < 3; ++f) {
      in.push_back(obs("m" + std::to_string(f), f, SourceKind::model, "det", "car",
                       {0.2 * static_cast<double>(f), 0, 0}, {4, 2, 1.5}, 0.9));
      in.push_back(obs("h" + std::to_string(f), f, SourceKind::human, "vendor", "car",
                       {0.2 * static_cast<double>(f), 0, 0}, {4, 2, 1.5}));
    }
    Scene scene = assemble_scene(info, in, {});
    REQUIRE(scene.tracks.size() == 1);
    CHECK(scene.tracks[0].bundles().size() == 3);
    CHECK(scene.tracks[0].observation_count() == 6);
    CHECK(validate_scene(scene).empty());
  }
  SECTION("out-of-range frames are rejected") {
    std::vector<Observation> in = {
        obs("a", 7, SourceKind::model, "det", "car", {0, 0, 0}, {1, 1, 1})};
    CHECK_THROWS_AS(assemble_scene(info, in, {}), ValidationError);
  }
  SECTION("bad association params are rejected") {
    CHECK_THROWS_AS(assemble_scene(info, {}, {0.0, 1}), ConfigError);
    CHECK_THROWS_AS(assemble_scene(info, {}, {1.5, 1}), ConfigError);
    CHECK_THROWS_AS(assemble_scene(info, {}, {0.5, 0}), ConfigError);
  }
}

TEST_CASE("validate_scene reports integrity problems") {
  auto diag_codes = [](const Scene& s) {
    std::multiset<std::string> codes;
    for (const Diagnostic& d : validate_scene(s)) codes.insert(d.code);
    return codes;
  };

  Scene scene;
  scene.scene_id = "s";
  scene.frame_timestamps = {0.0, 0.1, 0.2, 0.3, 0.25};
  scene.class_set = {"car"};
  scene.tracks.push_back(
      Track({ObservationBundle({obs("a", 0, SourceKind::model, "det", "car", {0, 0, 0},
                                    {4, 2, 1.5}, 0.9)})},
            1));

  SECTION("non-increasing timestamps name the offending frames") {
    auto diags = validate_scene(scene);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "timestamps_not_increasing");
    CHECK(diags[0].message.find("3 -> 4") != std::string::npos);
  }
  SECTION("ego coverage must match the frame count") {
    scene.frame_timestamps = {0.0, 0.1};
    scene.ego_positions = {{0, 0, 0}};
    CHECK(diag_codes(scene) == std::multiset<std::string>{"ego_positions_size_mismatch"});
  }
  SECTION("duplicate ids, foreign scenes, unknown classes") {
    scene.frame_timestamps = {0.0, 0.1};
    scene.tracks.push_back(
        Track({ObservationBundle({obs("a", 1, SourceKind::model, "det2", "truck", {10, 0, 0},
                                      {4, 2, 1.5}, 0.9, 0.0, "other")})},
              1));
    auto codes = diag_codes(scene);
    CHECK(codes.count("duplicate_observation_id") == 1);
    CHECK(codes.count("scene_id_mismatch") == 1);
    CHECK(codes.count("class_not_in_set") == 1);
  }
}
