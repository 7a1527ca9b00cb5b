#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stabest/c3.hpp"
#include "stabest/error.hpp"
#include "stabest/pipeline.hpp"
#include "stabest/rng.hpp"
#include "stabest/sim.hpp"
#include "stabest/types.hpp"

using namespace stabest;

namespace {

std::vector<GpsFix> linear_track(int n, double dt, double vx, double vy) {
  std::vector<GpsFix> gps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    gps[static_cast<std::size_t>(i)] = {i * dt, vx * i * dt, vy * i * dt};
  }
  return gps;
}

// RunLog with deterministic channel fingerprints: imu channel values encode
// the sample index so window slicing mistakes show up as value mismatches.
RunLog fingerprint_log(int n_imu) {
  RunLog log;
  log.meta.terrain = Terrain::dirt;
  log.meta.commanded_speed = 1.0;
  log.meta.trial_id = "fp";
  for (int i = 0; i < n_imu; ++i) {
    ImuSample s;
    s.t = i / 200.0;
    s.gyro_x = i;
    s.gyro_y = 1000 + i;
    s.gyro_z = 2000 + i;
    s.accel_x = 3000 + i;
    s.accel_y = 4000 + i;
    s.accel_z = 5000 + i;
    log.imu.push_back(s);
  }
  const double t_end = (n_imu - 1) / 200.0;
  log.gps = linear_track(static_cast<int>(t_end * 10) + 2, 0.1, 2.0, -1.0);
  log.marker.push_back({0.0, 320.0, 240.0, true});
  log.marker.push_back({t_end > 0 ? t_end : 0.01, 321.0, 240.0, true});
  log.marker_x = 25.0;
  return log;
}

ScoredWindow labeled(double gt, Terrain terrain, double speed, const std::string& trial,
                     int index) {
  ScoredWindow w;
  w.gt = gt;
  w.c3_raw = gt;
  w.meta.terrain = terrain;
  w.meta.commanded_speed = speed;
  w.meta.trial_id = trial;
  w.window_index = index;
  return w;
}

ScoredWindow with_speed(double vx, double vy, int index) {
  ScoredWindow w;
  for (int c = 0; c < DataFrame::kCols; ++c) {
    w.frame.at(6, c) = vx;
    w.frame.at(7, c) = vy;
  }
  w.meta.trial_id = "spd";
  w.window_index = index;
  return w;
}

std::set<std::string> ids_of(const std::vector<ScoredWindow>& ws) {
  std::set<std::string> out;
  for (const auto& w : ws) out.insert(w.id());
  return out;
}

}  // namespace

TEST_CASE("central-difference velocity is exact on straight-line motion") {
  auto gps = linear_track(41, 0.1, 2.0, -1.0);
  auto vel = derive_velocity(gps);
  REQUIRE(vel.size() == gps.size());
  for (std::size_t i = 0; i < vel.size(); ++i) {
    CHECK(vel[i].t == gps[i].t);
    CHECK(vel[i].vx == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(vel[i].vy == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("central differences recover the slope of a parabola at interior points") {
  std::vector<GpsFix> gps;
  for (int i = 0; i <= 20; ++i) {
    const double t = i * 0.1;
    gps.push_back({t, t * t, 0.0});
  }
  auto vel = derive_velocity(gps);
  // (x(t+h) - x(t-h)) / 2h = 2t exactly for a quadratic.
  for (std::size_t i = 1; i + 1 < vel.size(); ++i) {
    CHECK(vel[i].vx == doctest::Approx(2.0 * gps[i].t).epsilon(1e-12));
  }
  // One-sided ends: (x1 - x0)/h = h at the left edge.
  CHECK(vel.front().vx == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(vel.back().vx == doctest::Approx(2.0 * 2.0 - 0.1).epsilon(1e-12));
}

TEST_CASE("velocity derivation rejects degenerate input") {
  CHECK_THROWS_AS(derive_velocity({}), DataError);
  CHECK_THROWS_AS(derive_velocity({{0.0, 0.0, 0.0}}), DataError);
  std::vector<GpsFix> dup = {{0.0, 0.0, 0.0}, {0.1, 1.0, 0.0}, {0.1, 2.0, 0.0}};
  CHECK_THROWS_AS(derive_velocity(dup), DataError);
}

TEST_CASE("interpolation hits midpoints exactly and clamps the edges") {
  std::vector<VelocitySample> vel = {{1.0, 10.0, -2.0}, {2.0, 20.0, 2.0}};
  std::vector<ImuSample> imu(5);
  imu[0].t = 0.5;
  imu[1].t = 1.0;
  imu[2].t = 1.5;
  imu[3].t = 2.0;
  imu[4].t = 2.5;

  auto res = interpolate_to(vel, imu);
  REQUIRE(res.samples.size() == 5);
  CHECK(res.samples[0].vx == 10.0);  // clamped to front
  CHECK(res.samples[1].vx == 10.0);
  CHECK(res.samples[2].vx == doctest::Approx(15.0).epsilon(1e-15));
  CHECK(res.samples[2].vy == doctest::Approx(0.0).scale(1.0));
  CHECK(res.samples[3].vx == 20.0);
  CHECK(res.samples[4].vx == 20.0);  // clamped to back
  CHECK(res.n_clamped == 2);

  CHECK_THROWS_AS(interpolate_to({}, imu), DataError);
}

TEST_CASE("windowing drops the remainder and never pads") {
  CHECK(make_windows(fingerprint_log(1000)).size() == 5);
  CHECK(make_windows(fingerprint_log(399)).size() == 1);
  CHECK(make_windows(fingerprint_log(199)).empty());
  CHECK(make_windows(fingerprint_log(200)).size() == 1);
}

TEST_CASE("windows carry the channels in the documented order") {
  auto log = fingerprint_log(450);
  auto frames = make_windows(log);
  REQUIRE(frames.size() == 2);

  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& f = frames[k];
    const int base = static_cast<int>(k) * DataFrame::kCols;
    CHECK(f.t_start == log.imu[static_cast<std::size_t>(base)].t);
    CHECK(f.t_end == log.imu[static_cast<std::size_t>(base + 199)].t);
    for (int c = 0; c < DataFrame::kCols; c += 37) {
      CHECK(f.at(0, c) == base + c);
      CHECK(f.at(1, c) == 1000 + base + c);
      CHECK(f.at(2, c) == 2000 + base + c);
      CHECK(f.at(3, c) == 3000 + base + c);
      CHECK(f.at(4, c) == 4000 + base + c);
      CHECK(f.at(5, c) == 5000 + base + c);
      // Linear gps track: interpolated velocity is constant.
      CHECK(f.at(6, c) == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(f.at(7, c) == doctest::Approx(-1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("mean planar speed is the average 2d magnitude") {
  auto w = with_speed(3.0, 4.0, 0);
  CHECK(mean_planar_speed(w.frame) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(mean_planar_speed(with_speed(0.0, 0.0, 0).frame) == 0.0);
}

TEST_CASE("pruning removes near-stationary windows and reports them") {
  std::vector<ScoredWindow> ws = {with_speed(0.0, 0.0, 0), with_speed(0.05, 0.0, 1),
                                  with_speed(0.2, 0.0, 2), with_speed(0.0, 0.11, 3)};
  auto res = prune_outliers(ws, 0.1);
  REQUIRE(res.kept.size() == 2);
  CHECK(res.kept[0].window_index == 2);
  CHECK(res.kept[1].window_index == 3);
  REQUIRE(res.removed.size() == 2);
  CHECK(res.removed[0].id == "spd#0");
  CHECK(res.removed[0].mean_speed == 0.0);
  CHECK(res.removed[1].id == "spd#1");
  CHECK(res.removed[1].mean_speed == doctest::Approx(0.05));
}

TEST_CASE("balancing equalizes speed classes within each terrain") {
  std::vector<ScoredWindow> ws;
  int idx = 0;
  for (int i = 0; i < 50; ++i) ws.push_back(labeled(0.1, Terrain::dirt, 0.5, "d05", idx++));
  for (int i = 0; i < 30; ++i) ws.push_back(labeled(0.2, Terrain::dirt, 1.0, "d10", idx++));
  for (int i = 0; i < 20; ++i) ws.push_back(labeled(0.3, Terrain::dirt, 1.5, "d15", idx++));
  for (int i = 0; i < 7; ++i) ws.push_back(labeled(0.4, Terrain::pavement, 0.5, "p05", idx++));
  for (int i = 0; i < 9; ++i) ws.push_back(labeled(0.5, Terrain::pavement, 1.5, "p15", idx++));

  auto out = balance_classes(ws, 42);

  std::map<std::pair<Terrain, double>, int> counts;
  for (const auto& w : out) counts[{w.meta.terrain, w.meta.commanded_speed}]++;
  CHECK(counts[{Terrain::dirt, 0.5}] == 20);
  CHECK(counts[{Terrain::dirt, 1.0}] == 20);
  CHECK(counts[{Terrain::dirt, 1.5}] == 20);
  CHECK(counts[{Terrain::pavement, 0.5}] == 7);
  CHECK(counts[{Terrain::pavement, 1.5}] == 7);
  CHECK(out.size() == 74);

  // Survivors keep their original relative order.
  for (std::size_t i = 1; i < out.size(); ++i) {
    const bool same_trial = out[i - 1].meta.trial_id == out[i].meta.trial_id;
    if (same_trial) CHECK(out[i - 1].window_index < out[i].window_index);
  }

  // Every survivor came from the input.
  auto in_ids = ids_of(ws);
  for (const auto& w : out) CHECK(in_ids.count(w.id()) == 1);
}

TEST_CASE("balancing is deterministic in its seed") {
  std::vector<ScoredWindow> ws;
  int idx = 0;
  for (int i = 0; i < 40; ++i) ws.push_back(labeled(0.1, Terrain::grass, 0.5, "g05", idx++));
  for (int i = 0; i < 10; ++i) ws.push_back(labeled(0.2, Terrain::grass, 1.0, "g10", idx++));

  auto a = balance_classes(ws, 7);
  auto b = balance_classes(ws, 7);
  auto c = balance_classes(ws, 8);
  CHECK(ids_of(a) == ids_of(b));
  CHECK(ids_of(a) != ids_of(c));  // 10-of-40 subsets almost surely differ
  CHECK(a.size() == 20);
  CHECK(c.size() == 20);
}

TEST_CASE("a terrain with a single class passes through balancing whole") {
  std::vector<ScoredWindow> ws;
  for (int i = 0; i < 13; ++i) ws.push_back(labeled(0.1, Terrain::dirt, 1.0, "d", i));
  auto out = balance_classes(ws, 1);
  CHECK(out.size() == 13);
}

TEST_CASE("stratified split takes the ceiling share of every populated bin") {
  std::vector<ScoredWindow> ws;
  int idx = 0;
  // 5 populated bins, 20 windows each: bins 0..4 via labels 0.05..0.45.
  for (int b = 0; b < 5; ++b) {
    for (int i = 0; i < 20; ++i) {
      ws.push_back(labeled(0.05 + 0.1 * b, Terrain::dirt, 1.0, "t" + std::to_string(b), idx++));
    }
  }
  SplitSpec spec;  // 0.15, 10 bins
  auto res = stratified_split(ws, spec);

  CHECK(res.val.size() == 15);  // ceil(0.15 * 20) = 3 per bin
  CHECK(res.train.size() == 85);

  // Per-bin counts are exact.
  std::map<std::string, int> val_per_trial;
  for (const auto& w : res.val) val_per_trial[w.meta.trial_id]++;
  for (const auto& [trial, n] : val_per_trial) CHECK(n == 3);

  // The split partitions the input.
  auto train_ids = ids_of(res.train);
  auto val_ids = ids_of(res.val);
  CHECK(train_ids.size() + val_ids.size() == ws.size());
  for (const auto& id : val_ids) CHECK(train_ids.count(id) == 0);

  // Order preserved on both sides.
  for (std::size_t i = 1; i < res.train.size(); ++i) {
    if (res.train[i - 1].meta.trial_id == res.train[i].meta.trial_id)
      CHECK(res.train[i - 1].window_index < res.train[i].window_index);
  }
}

TEST_CASE("a populated bin always contributes at least one validation window") {
  std::vector<ScoredWindow> ws;
  ws.push_back(labeled(0.95, Terrain::dirt, 1.0, "solo", 0));  // bin 9, alone
  for (int i = 0; i < 30; ++i) ws.push_back(labeled(0.05, Terrain::dirt, 1.0, "bulk", i + 1));

  SplitSpec spec;
  auto res = stratified_split(ws, spec);
  bool solo_in_val = false;
  for (const auto& w : res.val) {
    if (w.meta.trial_id == "solo") solo_in_val = true;
  }
  CHECK(solo_in_val);
}

TEST_CASE("labels on the bin edges land in the last bin, not out of range") {
  std::vector<ScoredWindow> ws;
  for (int i = 0; i < 4; ++i) ws.push_back(labeled(1.0, Terrain::dirt, 1.0, "edge", i));
  SplitSpec spec;
  auto res = stratified_split(ws, spec);
  CHECK(res.val.size() == 1);  // ceil(0.15 * 4) = 1, all from bin 9
  CHECK(res.train.size() == 3);
}

TEST_CASE("split rejects labels outside the unit interval") {
  std::vector<ScoredWindow> ws = {labeled(1.25, Terrain::dirt, 1.0, "bad", 0)};
  SplitSpec spec;
  CHECK_THROWS_AS(stratified_split(ws, spec), DataError);
}

TEST_CASE("split is deterministic in its seed") {
  std::vector<ScoredWindow> ws;
  for (int i = 0; i < 60; ++i)
    ws.push_back(labeled((i % 10) * 0.1 + 0.05, Terrain::dirt, 1.0, "t", i));
  SplitSpec spec;
  auto a = stratified_split(ws, spec);
  auto b = stratified_split(ws, spec);
  CHECK(ids_of(a.val) == ids_of(b.val));

  spec.seed += 1;
  auto c = stratified_split(ws, spec);
  CHECK(ids_of(a.val) != ids_of(c.val));
}

TEST_CASE("split spec validation") {
  SplitSpec spec;
  spec.val_fraction = -0.1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SplitSpec{};
  spec.n_bins = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

namespace {

// Small but fully populated campaign: every terrain at two speeds, one trial
// each, long enough that moving windows survive pruning.
std::vector<RunLog> mini_campaign(double duration = 8.0, std::uint64_t seed = 99) {
  SimConfig cfg;
  cfg.duration_s = duration;
  cfg.seed = seed;
  std::vector<CampaignEntry> entries;
  for (const TerrainProfile& p : default_terrains()) {
    entries.push_back({p, 0.5, 1});
    entries.push_back({p, 1.5, 1});
  }
  return generate_campaign(entries, cfg);
}

}  // namespace

TEST_CASE("build_dataset wires the stages together with holdout discipline") {
  auto logs = mini_campaign();
  C3Config c3;
  PipelineConfig cfg;  // holdout grass

  auto bundle = build_dataset(logs, c3, cfg);

  // c3_max is the pre-prune max over non-holdout windows.
  double expect_max = 0.0;
  for (const auto& log : logs) {
    if (log.meta.terrain == Terrain::grass) continue;
    for (const auto& w : assemble_windows(log, c3)) expect_max = std::max(expect_max, w.c3_raw);
  }
  REQUIRE(expect_max > 0.0);
  CHECK(bundle.c3_max == expect_max);
  CHECK(!bundle.c3_max_fallback);

  // The test set is exactly the pruned grass windows, normalized by the
  // training c3_max and never rebalanced.
  CHECK(!bundle.test.empty());
  for (const auto& w : bundle.test) {
    CHECK(w.meta.terrain == Terrain::grass);
    CHECK(w.gt == std::clamp(w.c3_raw / bundle.c3_max, 0.0, 1.0));
    CHECK(mean_planar_speed(w.frame) >= cfg.min_mean_speed);
  }
  for (const auto& w : bundle.train) CHECK(w.meta.terrain != Terrain::grass);
  for (const auto& w : bundle.val) CHECK(w.meta.terrain != Terrain::grass);

  // Stationary prefixes are pruned: 8 s trials have 8 windows, the first two
  // of which cover the parked prefix.
  CHECK(!bundle.removed.empty());
  for (const auto& r : bundle.removed) CHECK(r.mean_speed < cfg.min_mean_speed);

  // Class accounting: balanced counts are equal within each non-holdout
  // terrain and zero for the holdout.
  std::map<Terrain, std::set<std::size_t>> balanced_by_terrain;
  for (const auto& c : bundle.class_counts) {
    CHECK(c.windowed >= c.pruned);
    if (c.terrain == cfg.holdout_terrain) {
      CHECK(c.balanced == 0);
    } else {
      CHECK(c.balanced > 0);
      balanced_by_terrain[c.terrain].insert(c.balanced);
    }
  }
  for (const auto& [terrain, sizes] : balanced_by_terrain) CHECK(sizes.size() == 1);

  // train + val partition the balanced set.
  std::size_t balanced_total = 0;
  for (const auto& c : bundle.class_counts) balanced_total += c.balanced;
  CHECK(bundle.train.size() + bundle.val.size() == balanced_total);
  CHECK(!bundle.val.empty());

  // Labels live in [0, 1] everywhere.
  for (const auto* part : {&bundle.train, &bundle.val, &bundle.test}) {
    for (const auto& w : *part) {
      CHECK(w.gt >= 0.0);
      CHECK(w.gt <= 1.0);
    }
  }
}

TEST_CASE("build_dataset falls back to unit c3_max when nothing scores") {
  // Zero roughness and zero noise: the marker never moves, so every raw
  // score is exactly zero and normalization cannot divide by the max.
  SimConfig cfg;
  cfg.duration_s = 6.0;
  cfg.noise_floor = 0.0;
  cfg.marker_dropout = 0.0;
  cfg.seed = 5;
  std::vector<CampaignEntry> entries;
  for (const TerrainProfile& p : default_terrains()) {
    entries.push_back({{p.terrain, 0.0}, 1.0, 1});
  }
  auto logs = generate_campaign(entries, cfg);

  C3Config c3;
  PipelineConfig pcfg;
  auto bundle = build_dataset(logs, c3, pcfg);
  CHECK(bundle.c3_max == 1.0);
  CHECK(bundle.c3_max_fallback);
  for (const auto& w : bundle.train) CHECK(w.gt == 0.0);
}

TEST_CASE("build_dataset refuses to erase a class with no usable windows") {
  auto logs = mini_campaign(8.0, 123);
  // Replace the pavement@1.5 trial with one that never moves: duration below
  // the stationary prefix, so its only windows are parked and get pruned.
  SimConfig cfg;
  cfg.duration_s = 1.5;
  cfg.stationary_prefix_s = 1.4;
  cfg.seed = 77;
  for (auto& log : logs) {
    if (log.meta.terrain == Terrain::pavement && log.meta.commanded_speed == 1.5) {
      log = simulate_trial(terrain_profile(Terrain::pavement), 1.5, cfg, log.meta.trial_id);
    }
  }

  C3Config c3;
  PipelineConfig pcfg;
  CHECK_THROWS_AS(build_dataset(logs, c3, pcfg), ConfigError);
}

TEST_CASE("holdout trials may be absent entirely") {
  auto logs = mini_campaign();
  std::vector<RunLog> no_grass;
  for (auto& log : logs) {
    if (log.meta.terrain != Terrain::grass) no_grass.push_back(std::move(log));
  }
  C3Config c3;
  PipelineConfig cfg;
  auto bundle = build_dataset(no_grass, c3, cfg);
  CHECK(bundle.test.empty());
  CHECK(!bundle.train.empty());
}
