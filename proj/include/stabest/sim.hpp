#pragma once

// Synthetic trial generator. One trial drives a robot from a standstill
// straight at a wall-mounted visual marker over a terrain patch, logging
// IMU, GPS, and per-frame marker pixel positions.
//
// The world model, kept deliberately small:
//  - Terrain excitation is a band-limited latent vibration (sum of random
//    sinusoids) scaled by terrain roughness, by instantaneous speed raised
//    to speed_exponent, and by a slow log-normal envelope that makes rough
//    stretches come and go within a run.
//  - The IMU sees a fixed random mix of the three latent channels times
//    that excitation, plus a white noise floor. Accelerometer channels are
//    gravity-compensated, so a parked robot reads pure noise.
//  - The camera sees the marker jittering around its nominal pixel position
//    with amplitude proportional to the same excitation and, per the
//    pinhole model, inversely proportional to marker distance.
//  - All per-sensor noise amplitudes are expressed as multiples of
//    noise_floor, so noise_floor = 0 yields an exactly clean log.
//
// Randomness is split into tagged streams derived from the trial seed
// (construction, imu, gps, pixel, dropout), so changing one sensor's noise
// never perturbs another's draw sequence.

#include <cstdint>
#include <string>
#include <vector>

#include "stabest/rng.hpp"
#include "stabest/types.hpp"

namespace stabest {

struct TerrainProfile {
  Terrain terrain = Terrain::pavement;
  double roughness = 0.0;  // dimensionless excitation gain, pavement ~0.1, rocks ~2
};

// Roughness table used by the default campaign.
std::vector<TerrainProfile> default_terrains();
TerrainProfile terrain_profile(Terrain terrain);

struct SimConfig {
  double imu_rate_hz = 200.0;
  double gps_rate_hz = 10.0;
  double cam_rate_hz = 60.0;
  double duration_s = 50.0;

  double start_distance_m = 25.0;  // marker distance at t = 0
  double standoff_m = 2.0;         // the robot stops this far from the marker
  double stationary_prefix_s = 2.0;

  double marker_u0_px = 320.0;
  double marker_v0_px = 240.0;

  int latent_components = 8;  // sinusoids per latent vibration channel
  double latent_f_lo_hz = 0.4;
  double latent_f_hi_hz = 8.0;

  int mod_components = 4;  // sinusoids in the slow roughness envelope
  double mod_f_lo_hz = 0.03;
  double mod_f_hi_hz = 0.15;
  double mod_depth = 0.35;  // envelope = exp(mod_depth * unit-RMS signal)

  double vel_ripple = 0.05;     // relative speed oscillation while moving
  double speed_exponent = 1.5;  // excitation grows as speed^exponent

  double base_jitter_px = 4.0;  // marker jitter per unit excitation at start distance
  double imu_coupling = 0.5;    // IMU amplitude per unit excitation

  double noise_floor = 0.02;     // IMU white noise sigma; master noise knob
  double gps_noise_scale = 0.25;  // GPS sigma in metres per unit noise_floor
  double px_noise_scale = 7.5;    // detector pixel sigma per unit noise_floor
  double marker_dropout = 0.01;   // per-frame detection failure probability

  std::uint64_t seed = 1;

  void validate() const;
};

// Band-limited unit-RMS signal: n equal-amplitude sinusoids with random
// frequencies in [f_lo, f_hi] and random phases.
class BandNoise {
 public:
  BandNoise() = default;
  BandNoise(Rng& rng, int components, double f_lo, double f_hi);

  double operator()(double t) const;
  // Exact integral over [0, t]; used to turn a speed ripple into position.
  double integral(double t) const;

 private:
  struct Component {
    double amp, freq, phase;
  };
  std::vector<Component> comps_;
};

RunLog simulate_trial(const TerrainProfile& profile, double commanded_speed,
                      const SimConfig& cfg, const std::string& trial_id);

struct CampaignEntry {
  TerrainProfile profile;
  double commanded_speed = 0.0;
  int trials = 0;
};

// Runs every entry, deriving per-trial seeds from cfg.seed by global trial
// index. If out_dir is non-empty, each trial is also saved under
// out_dir/<trial_id>/.
std::vector<RunLog> generate_campaign(const std::vector<CampaignEntry>& entries,
                                      const SimConfig& cfg, const std::string& out_dir = "");

}  // namespace stabest
