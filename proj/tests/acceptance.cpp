// Acceptance harness. Each criterion prints one PASS or FAIL line with a
// short detail string; the process exits nonzero if any criterion fails.
// Checks are built against independent restatements of the contracts
// (brute-force oracles, hand-worked examples, finite differences), not
// against the library's own helpers, wherever that is possible.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabest/c3.hpp"
#include "stabest/config.hpp"
#include "stabest/model.hpp"
#include "stabest/numio.hpp"
#include "stabest/pipeline.hpp"
#include "stabest/rng.hpp"
#include "stabest/sim.hpp"
#include "stabest/types.hpp"

namespace fs = std::filesystem;
using namespace stabest;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: crossing counts match a brute-force oracle.
//
// The oracle restates the rule from scratch: radii are n equally spaced
// values from r_min to r_max inclusive, the displacement is the Euclidean
// distance between consecutive marker centers, and a circle counts as
// crossed when the displacement exceeds its radius (ties configurable).

int oracle_crossings(double du, double dv, const C3Config& cfg) {
  const double dist = std::sqrt(du * du + dv * dv);
  int crossed = 0;
  for (int i = 0; i < cfg.n_circles; ++i) {
    const double frac = cfg.n_circles == 1 ? 0.0 : static_cast<double>(i) / (cfg.n_circles - 1);
    const double r = cfg.r_min + frac * (cfg.r_max - cfg.r_min);
    if (cfg.tie_counts_as_crossed ? dist >= r : dist > r) ++crossed;
  }
  return crossed;
}

std::string criterion_crossing_oracle() {
  Rng rng(20250819);
  const int kTrials = 10000;
  int mismatches = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < kTrials; ++trial) {
    C3Config cfg;
    if (trial % 3 == 1) {
      cfg.n_circles = 1 + static_cast<int>(rng.below(40));
      cfg.r_min = rng.uniform(0.1, 10.0);
      cfg.r_max = cfg.n_circles == 1 ? cfg.r_min : cfg.r_min + rng.uniform(0.5, 60.0);
    } else if (trial % 3 == 2) {
      cfg.r_min = rng.uniform(0.5, 5.0);
      cfg.r_max = cfg.r_min + rng.uniform(1.0, 80.0);
    }
    cfg.tie_counts_as_crossed = trial % 2 == 1;

    const double pu = rng.uniform(0.0, 640.0);
    const double pv = rng.uniform(0.0, 480.0);
    const double ang = rng.uniform(0.0, 6.283185307179586);
    const double mag = rng.uniform(0.0, 1.2 * cfg.r_max);
    const double cu = pu + mag * std::cos(ang);
    const double cv = pv + mag * std::sin(ang);

    const int got = cc_score(pu, pv, cu, cv, cfg);
    const int want = oracle_crossings(cu - pu, cv - pv, cfg);
    if (got != want) ++mismatches;
  }
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  require(mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(kTrials) +
                               " random pairs disagree with the oracle");

  // Exact ties on the default radii (integers 2, 4, ..., 40), checked against
  // hand counts rather than the oracle so both radius formulas stay honest.
  C3Config strict;
  C3Config tie;
  tie.tie_counts_as_crossed = true;
  require(cc_score(0, 0, 22, 0, strict) == 10, "d=22 strict should cross 10 circles");
  require(cc_score(0, 0, 22, 0, tie) == 11, "d=22 with ties should cross 11 circles");
  require(cc_score(0, 0, 40, 0, strict) == 19, "d=40 strict should cross 19 circles");
  require(cc_score(0, 0, 40, 0, tie) == 20, "d=40 with ties should cross all 20");
  require(cc_score(5, 7, 5, 7, strict) == 0, "zero displacement crosses nothing");
  require(cc_score(5, 7, 5, 7, tie) == 0, "zero displacement crosses nothing with ties");
  require(cc_score(0, 0, 0, 41, strict) == 20, "d=41 crosses all 20 circles");

  return std::to_string(kTrials) + " random pairs match exactly in " + fmt(ms) +
         " ms, tie cases agree with hand counts";
}

// ---------------------------------------------------------------------------
// Criterion 2: the windowed score reproduces a hand-worked example.
//
// Four frames at 0.05 s spacing with displacements 9, 12, and 20 px cross
// 4, 5, and 9 of the default circles (radii 2, 4, ..., 40). Distance factors
// 0.8, 1.0, and 0.25 give 4*0.8 + 5*1.0 + 9*0.25 = 10.45. Displacements 12
// and 20 land exactly on a radius, so counting ties adds one crossing to
// each of those pairs: 4*0.8 + 6*1.0 + 10*0.25 = 11.7.

std::string criterion_worked_example() {
  const std::vector<MarkerObservation> frames = {
      {0.00, 50.0, 60.0, true},
      {0.05, 50.0, 69.0, true},   // d = 9: crosses radii 2, 4, 6, 8
      {0.10, 62.0, 69.0, true},   // d = 12: crosses radii 2..10
      {0.15, 62.0, 89.0, true},   // d = 20: crosses radii 2..18 strictly
  };
  const std::vector<DistanceContext> contexts = {
      {7.0, 10.0},   // paired with the first frame, never used
      {8.0, 10.0},   // factor 0.8
      {10.0, 10.0},  // factor 1.0
      {2.5, 10.0},   // factor 0.25
  };

  C3Config strict;
  const double got = c3_score(frames, contexts, strict);
  require(std::abs(got - 10.45) < 1e-12,
          "strict score " + fmt(got) + " differs from hand value 10.45");

  C3Config tie;
  tie.tie_counts_as_crossed = true;
  const double got_tie = c3_score(frames, contexts, tie);
  require(std::abs(got_tie - 11.7) < 1e-12,
          "tie score " + fmt(got_tie) + " differs from hand value 11.7");

  return "strict 10.45 and tie 11.7 both reproduced";
}

// ---------------------------------------------------------------------------
// Criterion 3: raw window scores rank terrain and speed classes correctly.
//
// Over 30 independent campaign seeds, the mean raw score of the moving
// windows must increase with commanded speed within each terrain and with
// terrain roughness within each speed, for at least 20 of the 30 seeds per
// adjacent class pair. Two 30 s trials per class give every class around
// 56 moving windows; with fewer, the smooth pavement classes score zero so
// often that adjacent means tie instead of ordering.

std::string criterion_class_ordering() {
  const int kSeeds = 30;
  const int kNeeded = 20;
  const C3Config c3;

  // means[seed][terrain][speed index]
  std::vector<std::array<std::array<double, 3>, 4>> means(kSeeds);
  for (int s = 0; s < kSeeds; ++s) {
    SimConfig scfg;
    scfg.duration_s = 30.0;
    scfg.seed = derive_seed(777, static_cast<std::uint64_t>(s));
    std::vector<CampaignEntry> entries;
    for (Terrain t : kAllTerrains) {
      for (double speed : kNominalSpeeds) entries.push_back({terrain_profile(t), speed, 2});
    }
    const auto logs = generate_campaign(entries, scfg);
    require(logs.size() == 24, "expected 24 trials per campaign");
    std::array<std::array<double, 3>, 4> sums{};
    std::array<std::array<std::size_t, 3>, 4> counts{};
    for (const RunLog& log : logs) {
      const auto windows = assemble_windows(log, c3);
      const auto pruned = prune_outliers(windows, 0.1);
      require(!pruned.kept.empty(), "no moving windows for " + log.meta.trial_id);
      const auto ti = static_cast<std::size_t>(log.meta.terrain);
      std::size_t si = 0;
      while (kNominalSpeeds[si] != log.meta.commanded_speed) ++si;
      for (const ScoredWindow& w : pruned.kept) sums[ti][si] += w.c3_raw;
      counts[ti][si] += pruned.kept.size();
    }
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t sp = 0; sp < 3; ++sp) {
        means[static_cast<std::size_t>(s)][t][sp] =
            sums[t][sp] / static_cast<double>(counts[t][sp]);
      }
    }
  }

  int n_pairs = 0;
  int min_wins = kSeeds + 1;
  std::string worst = "none";
  auto tally = [&](std::size_t t_lo, std::size_t s_lo, std::size_t t_hi, std::size_t s_hi,
                   const std::string& label) {
    int wins = 0;
    for (int s = 0; s < kSeeds; ++s) {
      const auto& m = means[static_cast<std::size_t>(s)];
      if (m[t_hi][s_hi] > m[t_lo][s_lo]) ++wins;
    }
    ++n_pairs;
    if (wins < min_wins) {
      min_wins = wins;
      worst = label;
    }
    require(wins >= kNeeded, label + " ordered in only " + std::to_string(wins) + "/" +
                                 std::to_string(kSeeds) + " seeds");
  };

  for (std::size_t t = 0; t < 4; ++t) {
    const std::string name = to_string(kAllTerrains[t]);
    tally(t, 0, t, 1, name + " 0.5 vs 1.0");
    tally(t, 1, t, 2, name + " 1.0 vs 1.5");
  }
  for (std::size_t s = 0; s < 3; ++s) {
    const std::string sp = " at " + fmt(kNominalSpeeds[s]) + " m/s";
    tally(0, s, 1, s, "pavement vs grass" + sp);
    tally(1, s, 2, s, "grass vs dirt" + sp);
    tally(2, s, 3, s, "dirt vs rocks" + sp);
  }

  return std::to_string(n_pairs) + " adjacent class pairs ordered, weakest " + worst + " at " +
         std::to_string(min_wins) + "/" + std::to_string(kSeeds) + " seeds";
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic gradients of the default architecture match central
// finite differences of the training-mode loss.

std::string criterion_gradcheck() {
  ArchitectureSpec spec;
  TrainConfig tcfg;
  ModelCheckpoint ckpt = init_weights(spec, tcfg, 97);
  const ParamTable table = param_table(spec);
  require(table.total == ckpt.params.size(), "parameter table does not cover the checkpoint");

  const int batch = 4;
  Rng data_rng(555);
  std::vector<double> inputs(static_cast<std::size_t>(batch) * spec.input_channels *
                             spec.input_length);
  for (double& x : inputs) x = 0.5 * data_rng.gaussian();
  std::vector<double> targets(batch);
  for (double& y : targets) y = data_rng.uniform01();
  const std::uint64_t drop_seed = 1234;

  const Gradients analytic = backward(ckpt, inputs, batch, targets, drop_seed);
  require(analytic.grads.size() == table.total, "gradient vector size mismatch");

  // The dropout masks depend only on the seed, so the training-mode loss is
  // a fixed differentiable function of the weights.
  auto loss_at = [&](std::size_t idx, double value) {
    ModelCheckpoint probe = ckpt;
    probe.params[idx] = value;
    const auto preds = forward(probe, inputs, batch, true, drop_seed);
    return mse(preds, targets);
  };

  // First and last element of every named tensor, plus random fill-in.
  std::set<std::size_t> indices;
  for (const ParamEntry& e : table.entries) {
    indices.insert(e.offset);
    indices.insert(e.offset + e.count - 1);
  }
  Rng idx_rng(808);
  while (indices.size() < 220) indices.insert(idx_rng.below(table.total));

  // A perturbation of h can push one of the thousands of downstream ReLU
  // preactivations across zero, which makes the central difference for that
  // one coordinate meaningless. Shrinking h moves the probe off the kink, so
  // a coordinate passes if it agrees at any of the step sizes; a genuinely
  // wrong gradient disagrees at all of them.
  const std::array<double, 3> steps = {1e-4, 1e-5, 1e-6};
  double worst_rel = 0.0;
  int violations = 0;
  int retried = 0;
  for (std::size_t idx : indices) {
    const double w = ckpt.params[idx];
    const double a = analytic.grads[idx];
    bool ok = false;
    double best_rel = 1e300;
    for (std::size_t k = 0; k < steps.size() && !ok; ++k) {
      const double h = steps[k];
      const double numeric = (loss_at(idx, w + h) - loss_at(idx, w - h)) / (2.0 * h);
      const double err = std::abs(a - numeric);
      ok = err <= 1e-6 + 1e-4 * std::max(std::abs(a), std::abs(numeric));
      best_rel = std::min(best_rel, err / std::max({std::abs(a), std::abs(numeric), 1e-6}));
      if (k > 0 && ok) ++retried;
    }
    if (!ok) ++violations;
    worst_rel = std::max(worst_rel, best_rel);
  }
  require(violations == 0,
          std::to_string(violations) + " of " + std::to_string(indices.size()) +
              " sampled parameters disagree with finite differences at every step size");

  // The loss reported by the backward pass must be the same batch-mean
  // squared error the forward pass produces.
  const auto preds = forward(ckpt, inputs, batch, true, drop_seed);
  require(std::abs(analytic.loss - mse(preds, targets)) < 1e-15,
          "backward loss disagrees with forward + mse");

  return std::to_string(indices.size()) + " of " + std::to_string(table.total) +
         " parameters checked, worst relative error " + fmt(worst_rel) + ", " +
         std::to_string(retried) + " needed a smaller step to clear a relu kink";
}

// ---------------------------------------------------------------------------
// Criterion 5: at the default configuration, the model trained on the
// non-holdout terrains predicts the held-out terrain clearly better than
// predicting the training-label mean, within the time budget.

std::string criterion_holdout_learning() {
  RunConfig cfg;
  const auto logs = generate_campaign(campaign_entries(cfg), cfg.sim);
  const auto bundle = build_dataset(logs, cfg.c3, cfg.pipeline);
  require(!bundle.train.empty() && !bundle.val.empty() && !bundle.test.empty(),
          "default dataset has an empty partition");
  require(!bundle.c3_max_fallback, "normalizer fell back to 1.0 on the default campaign");

  const auto t0 = std::chrono::steady_clock::now();
  const ModelCheckpoint ckpt = train(bundle.train, bundle.val, cfg.model, cfg.train);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(secs < 600.0, "training took " + fmt(secs) + " s, budget is 600 s");

  const auto preds = predict(ckpt, bundle.test);
  std::vector<double> targets(bundle.test.size());
  for (std::size_t i = 0; i < bundle.test.size(); ++i) targets[i] = bundle.test[i].gt;
  const double model_mse = mse(preds, targets);

  double label_sum = 0.0;
  for (const auto& w : bundle.train) label_sum += w.gt;
  for (const auto& w : bundle.val) label_sum += w.gt;
  const double train_mean =
      label_sum / static_cast<double>(bundle.train.size() + bundle.val.size());
  double base = 0.0;
  for (double t : targets) base += (train_mean - t) * (train_mean - t);
  const double baseline_mse = base / static_cast<double>(targets.size());

  require(model_mse <= 0.02,
          "holdout mse " + fmt(model_mse) + " exceeds the 0.02 ceiling");
  require(baseline_mse >= 2.0 * model_mse,
          "holdout mse " + fmt(model_mse) + " is not 2x better than the mean baseline " +
              fmt(baseline_mse));

  return "holdout mse " + fmt(model_mse) + " vs mean baseline " + fmt(baseline_mse) + " (" +
         fmt(baseline_mse / model_mse) + "x), " + std::to_string(cfg.train.epochs) +
         " epochs in " + fmt(secs) + " s";
}

// ---------------------------------------------------------------------------
// Criterion 6: the stratified split takes the expected count from every
// label bin and partitions the input, across seeds.

ScoredWindow labeled_window(const std::string& trial, int index, double gt) {
  ScoredWindow w;
  w.meta.trial_id = trial;
  w.window_index = index;
  w.gt = gt;
  return w;
}

std::string criterion_split_fidelity() {
  // Bin sizes chosen so the expected validation counts are easy to state:
  // ceil(0.15 * {50, 80, 120, 200}) = {8, 12, 18, 30}; the singleton and the
  // three-window bin both contribute exactly one.
  const std::vector<std::pair<int, double>> bins = {{50, 0.05}, {80, 0.15}, {120, 0.25},
                                                    {200, 0.35}, {1, 0.45},  {3, 0.55}};
  const std::map<int, std::size_t> expected = {{0, 8}, {1, 12}, {2, 18}, {3, 30}, {4, 1}, {5, 1}};

  std::vector<ScoredWindow> windows;
  int index = 0;
  for (const auto& [count, gt] : bins) {
    for (int i = 0; i < count; ++i) windows.push_back(labeled_window("synth", index++, gt));
  }

  std::set<std::string> all_ids;
  for (const auto& w : windows) all_ids.insert(w.id());

  std::set<std::string> first_val_ids;
  bool membership_varies = false;
  for (int s = 0; s < 10; ++s) {
    SplitSpec spec;
    spec.seed = 1000 + static_cast<std::uint64_t>(s);
    const SplitResult res = stratified_split(windows, spec);

    require(res.train.size() + res.val.size() == windows.size(),
            "split does not preserve the window count");
    std::set<std::string> seen;
    for (const auto& w : res.train) seen.insert(w.id());
    for (const auto& w : res.val) {
      require(seen.insert(w.id()).second, "window " + w.id() + " appears in both partitions");
    }
    require(seen == all_ids, "split loses or invents windows");

    std::map<int, std::size_t> val_counts;
    for (const auto& w : res.val) val_counts[static_cast<int>(w.gt * 10.0)]++;
    for (const auto& [bin, want] : expected) {
      const std::size_t got = val_counts.count(bin) ? val_counts.at(bin) : 0;
      require(got == want, "seed " + std::to_string(s) + " bin " + std::to_string(bin) +
                               " contributed " + std::to_string(got) + " validation windows, " +
                               "expected " + std::to_string(want));
    }
    for (std::size_t b = 0; b < 4; ++b) {
      const double frac = static_cast<double>(expected.at(static_cast<int>(b))) /
                          static_cast<double>(bins[b].first);
      require(std::abs(frac - 0.15) <= 0.02,
              "bin " + std::to_string(b) + " validation fraction " + fmt(frac) +
                  " strays more than 2pp from 0.15");
    }

    std::set<std::string> val_ids;
    for (const auto& w : res.val) val_ids.insert(w.id());
    if (s == 0) {
      first_val_ids = val_ids;
    } else if (val_ids != first_val_ids) {
      membership_varies = true;
    }
  }
  require(membership_varies, "10 different seeds all picked the same validation windows");

  return "6 bins x 10 seeds: exact per-bin counts, clean partition, fraction within 2pp";
}

// ---------------------------------------------------------------------------
// Criterion 7: class balancing downsamples every speed class to its
// terrain's smallest class, deterministically in the seed.

std::string criterion_balance_exactness() {
  struct ClassDef {
    Terrain terrain;
    double speed;
    int count;
  };
  const std::vector<ClassDef> defs = {{Terrain::dirt, 0.5, 37},     {Terrain::dirt, 1.0, 12},
                                      {Terrain::dirt, 1.5, 58},     {Terrain::pavement, 0.5, 21},
                                      {Terrain::pavement, 1.5, 9}};

  std::vector<ScoredWindow> windows;
  for (const auto& def : defs) {
    for (int i = 0; i < def.count; ++i) {
      ScoredWindow w = labeled_window(
          to_string(def.terrain) + "_" + format_double(def.speed), i, 0.5);
      w.meta.terrain = def.terrain;
      w.meta.commanded_speed = def.speed;
      windows.push_back(w);
    }
  }
  std::set<std::string> input_ids;
  for (const auto& w : windows) input_ids.insert(w.id());

  std::vector<std::vector<std::string>> selections;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto out = balance_classes(windows, seed);

    std::map<std::pair<int, double>, std::size_t> counts;
    for (const auto& w : out) {
      counts[{static_cast<int>(w.meta.terrain), w.meta.commanded_speed}]++;
      require(input_ids.count(w.id()) == 1, "balanced output invented window " + w.id());
    }
    for (const auto& def : defs) {
      const std::size_t want = def.terrain == Terrain::dirt ? 12 : 9;
      const auto got = counts[{static_cast<int>(def.terrain), def.speed}];
      require(got == want, "seed " + std::to_string(seed) + ": " + to_string(def.terrain) +
                               " at " + fmt(def.speed) + " kept " + std::to_string(got) +
                               " windows, expected " + std::to_string(want));
    }

    std::vector<std::string> ids;
    for (const auto& w : out) ids.push_back(w.id());
    // Output must preserve input order: ids must be a subsequence.
    std::size_t cursor = 0;
    for (const auto& w : windows) {
      if (cursor < out.size() && out[cursor].id() == w.id()) ++cursor;
    }
    require(cursor == out.size(), "seed " + std::to_string(seed) +
                                      ": balanced output is not an input subsequence");

    const auto repeat = balance_classes(windows, seed);
    require(repeat.size() == out.size(), "repeat run changed the survivor count");
    for (std::size_t i = 0; i < out.size(); ++i) {
      require(repeat[i].id() == out[i].id(), "repeat run changed the survivors");
    }
    selections.push_back(ids);
  }

  bool seeds_differ = false;
  for (std::size_t i = 1; i < selections.size(); ++i) {
    if (selections[i] != selections[0]) seeds_differ = true;
  }
  require(seeds_differ, "5 different seeds all picked the same survivors");

  return "dirt classes cut to 12, pavement to 9, order preserved, seeded and repeatable";
}

// ---------------------------------------------------------------------------
// Criterion 8: the full command line chain is byte-reproducible. Run
// simulate -> build-dataset -> train -> eval -> report at fixed paths,
// snapshot every artifact, wipe, run again, and compare bytes.

const char* kPipelineConfig = R"({
  "sim": {"duration_s": 12.0, "seed": 71},
  "campaign": [
    {"terrain": "pavement", "speed": 0.5, "trials": 1},
    {"terrain": "pavement", "speed": 1.5, "trials": 1},
    {"terrain": "grass", "speed": 0.5, "trials": 1},
    {"terrain": "grass", "speed": 1.5, "trials": 1},
    {"terrain": "dirt", "speed": 0.5, "trials": 1},
    {"terrain": "dirt", "speed": 1.5, "trials": 1},
    {"terrain": "dirt_rocks", "speed": 0.5, "trials": 1},
    {"terrain": "dirt_rocks", "speed": 1.5, "trials": 1}
  ],
  "train": {"epochs": 2}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(in.good(), "missing file: " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  require(out.good(), "cannot write " + p.string());
}

int run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log =
      fs::temp_directory_path() / ("stabest_accept_" + std::to_string(counter++) + ".log");
  const std::string cmd =
      std::string(STABEST_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  const int code = (raw >= 0 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
  if (code != 0) {
    std::ifstream in(log, std::ios::binary);
    std::string output(std::istreambuf_iterator<char>(in), {});
    fs::remove(log);
    fail("command '" + args + "' exited " + std::to_string(code) + ": " +
         output.substr(0, 400));
  }
  fs::remove(log);
  return code;
}

// Collects every regular file under root, keyed by its relative path.
std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files[fs::relative(entry.path(), root).generic_string()] = slurp(entry.path());
  }
  return files;
}

fs::path g_workspace;  // populated by criterion 8, reused by criterion 9

void run_chain(const fs::path& root, const fs::path& config) {
  const std::string cfg = "--config " + config.string() + " ";
  run_cli(cfg + "simulate --out " + (root / "trials").string());
  run_cli(cfg + "build-dataset --trials " + (root / "trials").string() + " --out " +
          (root / "dataset").string());
  run_cli(cfg + "train --dataset " + (root / "dataset").string() + " --out " +
          (root / "model.ckpt").string());
  run_cli(cfg + "eval --model " + (root / "model.ckpt").string() + " --test " +
          (root / "dataset" / "test_grass.jsonl").string() + " --out " +
          (root / "report").string());
  run_cli("report --errors " + (root / "report" / "errors.csv").string() + " --out " +
          (root / "rerender").string());
}

std::string criterion_pipeline_reproducible() {
  g_workspace = fs::temp_directory_path() / "stabest_acceptance";
  fs::remove_all(g_workspace);
  fs::create_directories(g_workspace);
  const fs::path config = g_workspace / "config.json";
  write_file(config, kPipelineConfig);
  const fs::path work = g_workspace / "work";

  fs::create_directories(work);
  run_chain(work, config);
  const auto first = snapshot_tree(work);
  require(first.count("model.ckpt") == 1, "first run produced no checkpoint");
  require(first.count("dataset/dataset.jsonl") == 1, "first run produced no dataset");
  require(first.count("report/report.json") == 1, "first run produced no report");

  fs::remove_all(work);
  fs::create_directories(work);
  run_chain(work, config);
  const auto second = snapshot_tree(work);

  require(first.size() == second.size(),
          "runs produced different file sets: " + std::to_string(first.size()) + " vs " +
              std::to_string(second.size()));
  std::size_t compared = 0;
  for (const auto& [rel, bytes] : first) {
    const auto it = second.find(rel);
    require(it != second.end(), "second run is missing " + rel);
    require(it->second == bytes, "file differs between runs: " + rel);
    ++compared;
  }

  // The standalone re-render must reproduce the eval-time charts byte for
  // byte from errors.csv alone.
  require(first.at("rerender/histogram.svg") == first.at("report/histogram.svg"),
          "re-rendered histogram differs from the eval-time render");
  require(first.at("rerender/trace.svg") == first.at("report/trace.svg"),
          "re-rendered trace differs from the eval-time render");

  return std::to_string(compared) + " artifact files byte-identical across two full runs";
}

// ---------------------------------------------------------------------------
// Criterion 9: every aggregate in report.json recomputes from the rows of
// errors.csv.

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cols;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cols.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cols.push_back(cur);
  return cols;
}

std::string criterion_report_consistency() {
  require(!g_workspace.empty(), "pipeline criterion did not run");
  const fs::path report_dir = g_workspace / "work" / "report";
  const std::string csv = slurp(report_dir / "errors.csv");

  std::istringstream in(csv);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "errors.csv is empty");
  require(line == "id,terrain,speed,gt,pred,error", "unexpected errors.csv header: " + line);

  std::size_t n = 0;
  double sq = 0.0, signed_sum = 0.0;
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, double>> per_class;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    require(cols.size() == 6, "bad errors.csv row: " + line);
    const double err = std::stod(cols[5]);
    ++n;
    sq += err * err;
    signed_sum += err;
    auto& slot = per_class[{cols[1], cols[2]}];
    slot.first += 1;
    slot.second += err * err;
  }
  require(n > 0, "errors.csv has no data rows");

  const auto j = nlohmann::json::parse(slurp(report_dir / "report.json"));
  require(j.at("n").get<std::size_t>() == n,
          "report.json n disagrees with the errors.csv row count");

  const double mse_csv = sq / static_cast<double>(n);
  const double bias_csv = signed_sum / static_cast<double>(n);
  const double mse_json = j.at("mse").get<double>();
  const double bias_json = j.at("bias").get<double>();
  require(std::abs(mse_csv - mse_json) <= 1e-12,
          "mse recomputed from rows is " + fmt(mse_csv) + ", report says " + fmt(mse_json));
  require(std::abs(bias_csv - bias_json) <= 1e-12,
          "bias recomputed from rows is " + fmt(bias_csv) + ", report says " + fmt(bias_json));

  std::size_t class_total = 0;
  for (const auto& row : j.at("per_class")) {
    const std::string terrain = row.at("terrain").get<std::string>();
    const std::string speed = format_double(row.at("speed").get<double>());
    const auto it = per_class.find({terrain, speed});
    require(it != per_class.end(), "report class " + terrain + "/" + speed +
                                       " has no rows in errors.csv");
    require(it->second.first == row.at("n").get<std::size_t>(),
            "class " + terrain + "/" + speed + " row count mismatch");
    const double class_mse = it->second.second / static_cast<double>(it->second.first);
    require(std::abs(class_mse - row.at("mse").get<double>()) <= 1e-12,
            "class " + terrain + "/" + speed + " mse mismatch");
    class_total += it->second.first;
  }
  require(class_total == n, "per-class row counts do not sum to n");

  std::size_t hist_total = 0;
  for (const auto& c : j.at("histogram").at("counts")) hist_total += c.get<std::size_t>();
  require(hist_total == n, "histogram counts sum to " + std::to_string(hist_total) +
                               ", expected " + std::to_string(n));

  return std::to_string(n) + " rows: mse, bias, " +
         std::to_string(j.at("per_class").size()) + " class rows, and histogram all recompute";
}

// ---------------------------------------------------------------------------

struct Criterion {
  const char* name;
  std::function<std::string()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"crossing counts match a brute-force oracle", criterion_crossing_oracle},
      {"window score reproduces a hand-worked example", criterion_worked_example},
      {"raw scores rank terrain and speed classes", criterion_class_ordering},
      {"analytic gradients match finite differences", criterion_gradcheck},
      {"trained model beats the mean baseline on the holdout terrain",
       criterion_holdout_learning},
      {"stratified split is exact in every label bin", criterion_split_fidelity},
      {"class balancing equalizes per-terrain counts", criterion_balance_exactness},
      {"full command line chain is byte-reproducible", criterion_pipeline_reproducible},
      {"report aggregates recompute from the error rows", criterion_report_consistency},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    try {
      const std::string detail = c.body();
      std::printf("PASS: %s (%s)\n", c.name, detail.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL: %s (%s)\n", c.name, e.what());
    }
    std::fflush(stdout);
  }

  if (failures == 0) {
    std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size(), criteria.size());
  } else {
    std::printf("acceptance: %d of %zu criteria FAILED\n", failures, criteria.size());
  }
  return failures == 0 ? 0 : 1;
}
