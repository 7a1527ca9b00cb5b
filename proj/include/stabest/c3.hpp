#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "stabest/types.hpp"

// Instability scoring from marker tracking. Between two consecutive detected
// camera frames the marker center sweeps a pixel displacement d; the score
// counts how many of a set of concentric circles (radii linearly spaced over
// [r_min, r_max]) that displacement crosses, then scales the count by
// d_aruco / d_max to cancel the pixel-per-meter sensitivity change as the
// robot approaches the marker. A window's score is the sum over its
// consecutive-frame pairs.

namespace stabest {

struct C3Config {
  int n_circles = 20;
  double r_min = 2.0;   // pixels
  double r_max = 40.0;  // pixels
  bool tie_counts_as_crossed = false;  // displacement exactly on a radius

  void validate() const;  // throws ConfigError
};

// n_circles radii linearly spaced from r_min to r_max inclusive.
std::vector<double> circle_radii(const C3Config& cfg);

// Circles crossed by the displacement between two marker centers.
int cc_score(double prev_u, double prev_v, double cur_u, double cur_v, const C3Config& cfg);

struct DistanceContext {
  double d_aruco = 0.0;  // robot-to-marker distance at the current frame, meters
  double d_max = 0.0;    // maximum distance over the whole trial, meters
};

// Distance-corrected crossing count: cc * (d_aruco / d_max).
double normalized_cc(int cc, const DistanceContext& ctx);

// Sum of normalized crossing counts over consecutive detected frames.
// contexts[i] belongs to frames[i] (the current frame of pair i-1,i); the
// first context is unused. Fewer than two frames score 0.
double c3_score(std::span<const MarkerObservation> frames,
                std::span<const DistanceContext> contexts, const C3Config& cfg);

// gt = clamp(c3 / c3_max, 0, 1)
double normalize_gt(double c3, double c3_max);

struct WindowScore {
  int window_index = 0;
  Timestamp t_start = 0.0, t_end = 0.0;
  int n_frames = 0;      // detected marker frames inside the window
  double c3_raw = 0.0;
  bool flagged = false;  // fewer than 2 detected frames
};

// Scores every window of a trial. Distances come from linear interpolation of
// the GPS track against the static marker position, sampled at each detected
// frame's timestamp; d_max is the maximum over the trial.
std::vector<WindowScore> score_windows(const RunLog& log, const std::vector<DataFrame>& windows,
                                       const C3Config& cfg);

// scores.csv: window_index,t_start,t_end,n_frames,c3_raw,flagged
void save_scores_csv(const std::vector<WindowScore>& scores, const std::filesystem::path& file);

}  // namespace stabest
