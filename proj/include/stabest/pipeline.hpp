#pragma once

// Turns raw trial logs into labeled training windows.
//
// Stage order is part of the contract:
//   window -> score -> normalize (c3_max from the training portion, taken
//   before any pruning) -> prune near-stationary windows -> balance speed
//   classes per terrain -> stratified train/validation split.
// The holdout terrain goes through windowing, scoring, normalization, and
// pruning identically, but is never balanced or split and never contributes
// to c3_max.

#include <cstdint>
#include <string>
#include <vector>

#include "stabest/c3.hpp"
#include "stabest/types.hpp"

namespace stabest {

// Planar velocity by central differences over GPS fixes (one-sided at the
// ends). Needs at least two fixes with strictly increasing timestamps.
std::vector<VelocitySample> derive_velocity(const std::vector<GpsFix>& gps);

struct InterpolationResult {
  std::vector<VelocitySample> samples;
  int n_clamped = 0;  // query times outside the source range, held at the edge value
};

// Linear interpolation of a velocity series onto IMU timestamps.
InterpolationResult interpolate_to(const std::vector<VelocitySample>& velocity,
                                   const std::vector<ImuSample>& imu);

// Non-overlapping fixed-size windows over the IMU stream; a trailing
// remainder shorter than one window is dropped. Velocity rows come from the
// GPS stream interpolated to IMU timestamps.
std::vector<DataFrame> make_windows(const RunLog& log);

// make_windows + scoring, bundled with the trial metadata. gt is left at 0;
// normalization happens once the training portion's c3_max is known.
std::vector<ScoredWindow> assemble_windows(const RunLog& log, const C3Config& c3);

double mean_planar_speed(const DataFrame& frame);

struct PruneResult {
  std::vector<ScoredWindow> kept;
  struct Removed {
    std::string id;
    double mean_speed;
  };
  std::vector<Removed> removed;
};

// Drops windows whose mean planar speed is below the threshold (parked
// robot, no terrain excitation to learn from).
PruneResult prune_outliers(const std::vector<ScoredWindow>& windows, double min_mean_speed);

// Within each terrain, downsamples every commanded-speed class to that
// terrain's smallest class, picking survivors with a seeded shuffle.
// Output preserves the input order.
std::vector<ScoredWindow> balance_classes(const std::vector<ScoredWindow>& windows,
                                          std::uint64_t seed);

struct SplitSpec {
  double val_fraction = 0.15;
  int n_bins = 10;  // equal-width label bins over [0, 1]
  std::uint64_t seed = 5;

  void validate() const;
};

struct SplitResult {
  std::vector<ScoredWindow> train, val;
};

// Stratified split: windows are binned by label and each bin contributes
// ceil(val_fraction * bin_count) validation windows, chosen by a per-bin
// seeded shuffle. Both outputs preserve the input order.
SplitResult stratified_split(const std::vector<ScoredWindow>& windows, const SplitSpec& spec);

struct PipelineConfig {
  double min_mean_speed = 0.1;
  Terrain holdout_terrain = Terrain::grass;
  std::uint64_t balance_seed = 4;
  SplitSpec split;

  void validate() const;
};

struct ClassCount {
  Terrain terrain;
  double commanded_speed;
  std::size_t windowed = 0;  // all windows scored for this class
  std::size_t pruned = 0;    // removed as near-stationary
  std::size_t balanced = 0;  // surviving after class balancing (0 for holdout)
};

struct DatasetBundle {
  std::vector<ScoredWindow> train, val, test;
  double c3_max = 1.0;
  bool c3_max_fallback = false;  // training portion had no positive raw score
  std::vector<PruneResult::Removed> removed;
  std::vector<ClassCount> class_counts;
};

// Full pipeline over a set of trials. Throws ConfigError if a non-holdout
// (terrain, speed) class present in the trial metadata ends up with no
// usable windows, since balancing would silently erase the whole terrain.
DatasetBundle build_dataset(const std::vector<RunLog>& logs, const C3Config& c3,
                            const PipelineConfig& cfg);

}  // namespace stabest
