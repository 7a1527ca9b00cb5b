#include "stabest/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stabest/error.hpp"
#include "stabest/io.hpp"
#include "stabest/numio.hpp"

namespace stabest {

namespace {

// RNG stream tags; each sensor gets its own stream off the trial seed.
enum : std::uint64_t {
  kStreamConstruction = 0,
  kStreamImu = 1,
  kStreamGps = 2,
  kStreamPixel = 3,
  kStreamDropout = 4,
};

int sample_count(double duration, double rate) {
  return static_cast<int>(std::ceil(duration * rate - 1e-9));
}

}  // namespace

std::vector<TerrainProfile> default_terrains() {
  return {{Terrain::pavement, 0.12},
          {Terrain::grass, 0.45},
          {Terrain::dirt, 1.0},
          {Terrain::dirt_rocks, 1.9}};
}

TerrainProfile terrain_profile(Terrain terrain) {
  for (const TerrainProfile& p : default_terrains()) {
    if (p.terrain == terrain) return p;
  }
  throw ConfigError("no default roughness for terrain");
}

void SimConfig::validate() const {
  if (!(imu_rate_hz > 0.0 && gps_rate_hz > 0.0 && cam_rate_hz > 0.0)) {
    throw ConfigError("sample rates must be positive");
  }
  if (!(duration_s > 0.0)) throw ConfigError("duration_s must be positive");
  if (!(standoff_m > 0.0) || !(start_distance_m > standoff_m)) {
    throw ConfigError("need start_distance_m > standoff_m > 0");
  }
  if (!(stationary_prefix_s >= 0.0 && stationary_prefix_s < duration_s)) {
    throw ConfigError("stationary_prefix_s must be in [0, duration_s)");
  }
  if (latent_components < 1 || mod_components < 1) {
    throw ConfigError("noise component counts must be >= 1");
  }
  if (!(latent_f_lo_hz > 0.0 && latent_f_hi_hz >= latent_f_lo_hz) ||
      !(mod_f_lo_hz > 0.0 && mod_f_hi_hz >= mod_f_lo_hz)) {
    throw ConfigError("noise bands must satisfy 0 < f_lo <= f_hi");
  }
  // Keep instantaneous speed positive: the ripple signal is a sum of
  // mod_components sinusoids of amplitude sqrt(2/n), so |ripple| never
  // exceeds sqrt(2 n).
  if (!(vel_ripple >= 0.0) || vel_ripple * std::sqrt(2.0 * mod_components) >= 1.0) {
    throw ConfigError("vel_ripple too large; the robot could move backwards");
  }
  if (!(speed_exponent >= 0.0)) throw ConfigError("speed_exponent must be >= 0");
  if (!(base_jitter_px >= 0.0) || !(imu_coupling >= 0.0)) {
    throw ConfigError("gains must be >= 0");
  }
  if (!(noise_floor >= 0.0) || !(gps_noise_scale >= 0.0) || !(px_noise_scale >= 0.0)) {
    throw ConfigError("noise scales must be >= 0");
  }
  if (!(marker_dropout >= 0.0 && marker_dropout < 1.0)) {
    throw ConfigError("marker_dropout must be in [0, 1)");
  }
}

BandNoise::BandNoise(Rng& rng, int components, double f_lo, double f_hi) {
  const double amp = std::sqrt(2.0 / components);  // unit total RMS
  comps_.resize(static_cast<std::size_t>(components));
  for (Component& c : comps_) {
    c.amp = amp;
    c.freq = rng.uniform(f_lo, f_hi);
    c.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
}

double BandNoise::operator()(double t) const {
  double s = 0.0;
  for (const Component& c : comps_) {
    s += c.amp * std::sin(2.0 * std::numbers::pi * c.freq * t + c.phase);
  }
  return s;
}

double BandNoise::integral(double t) const {
  double s = 0.0;
  for (const Component& c : comps_) {
    const double w = 2.0 * std::numbers::pi * c.freq;
    s += c.amp / w * (std::cos(c.phase) - std::cos(w * t + c.phase));
  }
  return s;
}

namespace {

// Deterministic kinematics and excitation shared by every sensor.
struct TrialWorld {
  const SimConfig& cfg;
  double roughness;
  double commanded_speed;
  double travel;  // distance from start pose to the stop pose

  BandNoise z_u, z_v, z_w;  // fast vibration latents
  BandNoise envelope;       // slow roughness modulation
  BandNoise ripple;         // speed oscillation while moving

  double mix[6][3];  // latent -> IMU channel coupling, unit-norm rows

  TrialWorld(const TerrainProfile& profile, double speed, const SimConfig& c, Rng& rng)
      : cfg(c),
        roughness(profile.roughness),
        commanded_speed(speed),
        travel(c.start_distance_m - c.standoff_m),
        z_u(rng, c.latent_components, c.latent_f_lo_hz, c.latent_f_hi_hz),
        z_v(rng, c.latent_components, c.latent_f_lo_hz, c.latent_f_hi_hz),
        z_w(rng, c.latent_components, c.latent_f_lo_hz, c.latent_f_hi_hz),
        envelope(rng, c.mod_components, c.mod_f_lo_hz, c.mod_f_hi_hz),
        ripple(rng, c.mod_components, c.mod_f_lo_hz, c.mod_f_hi_hz) {
    for (auto& row : mix) {
      double norm2 = 0.0;
      for (double& m : row) {
        m = rng.gaussian();
        norm2 += m * m;
      }
      const double norm = std::sqrt(norm2);
      if (norm < 1e-12) {
        row[0] = 1.0;
        row[1] = row[2] = 0.0;
      } else {
        for (double& m : row) m /= norm;
      }
    }
  }

  // Odometer reading ignoring the stop clamp.
  double raw_progress(double t) const {
    const double tau = t - cfg.stationary_prefix_s;
    if (tau <= 0.0) return 0.0;
    return commanded_speed * (tau + cfg.vel_ripple * ripple.integral(tau));
  }

  double progress(double t) const { return std::min(raw_progress(t), travel); }

  double speed(double t) const {
    const double tau = t - cfg.stationary_prefix_s;
    if (tau <= 0.0 || raw_progress(t) >= travel) return 0.0;
    return commanded_speed * (1.0 + cfg.vel_ripple * ripple(tau));
  }

  double marker_distance(double t) const { return cfg.start_distance_m - progress(t); }

  // Terrain excitation level; zero whenever the robot is not moving.
  double excitation(double t) const {
    const double v = speed(t);
    if (v <= 0.0) return 0.0;
    return roughness * std::pow(v, cfg.speed_exponent) * std::exp(cfg.mod_depth * envelope(t));
  }
};

}  // namespace

RunLog simulate_trial(const TerrainProfile& profile, double commanded_speed,
                      const SimConfig& cfg, const std::string& trial_id) {
  cfg.validate();
  if (!(commanded_speed > 0.0)) throw ConfigError("commanded_speed must be positive");

  Rng construction(derive_seed(cfg.seed, kStreamConstruction));
  Rng imu_rng(derive_seed(cfg.seed, kStreamImu));
  Rng gps_rng(derive_seed(cfg.seed, kStreamGps));
  Rng pixel_rng(derive_seed(cfg.seed, kStreamPixel));
  Rng dropout_rng(derive_seed(cfg.seed, kStreamDropout));

  TrialWorld world(profile, commanded_speed, cfg, construction);

  RunLog log;
  log.meta.terrain = profile.terrain;
  log.meta.commanded_speed = commanded_speed;
  log.meta.trial_id = trial_id;
  log.meta.seed = cfg.seed;
  log.marker_x = cfg.start_distance_m;
  log.marker_y = 0.0;

  const int n_imu = sample_count(cfg.duration_s, cfg.imu_rate_hz);
  log.imu.reserve(static_cast<std::size_t>(n_imu));
  for (int i = 0; i < n_imu; ++i) {
    const double t = i / cfg.imu_rate_hz;
    const double drive = cfg.imu_coupling * world.excitation(t);
    const double z[3] = {world.z_u(t), world.z_v(t), world.z_w(t)};
    ImuSample s;
    s.t = t;
    double* ch = &s.gyro_x;
    for (int row = 0; row < 6; ++row) {
      double mixed = 0.0;
      for (int j = 0; j < 3; ++j) mixed += world.mix[row][j] * z[j];
      ch[row] = drive * mixed + cfg.noise_floor * imu_rng.gaussian();
    }
    log.imu.push_back(s);
  }

  const double gps_sigma = cfg.noise_floor * cfg.gps_noise_scale;
  const int n_gps = sample_count(cfg.duration_s, cfg.gps_rate_hz);
  log.gps.reserve(static_cast<std::size_t>(n_gps));
  for (int i = 0; i < n_gps; ++i) {
    const double t = i / cfg.gps_rate_hz;
    GpsFix f;
    f.t = t;
    f.x = world.progress(t) + gps_sigma * gps_rng.gaussian();
    f.y = gps_sigma * gps_rng.gaussian();
    log.gps.push_back(f);
  }

  const double px_sigma = cfg.noise_floor * cfg.px_noise_scale;
  const int n_cam = sample_count(cfg.duration_s, cfg.cam_rate_hz);
  log.marker.reserve(static_cast<std::size_t>(n_cam));
  for (int i = 0; i < n_cam; ++i) {
    const double t = i / cfg.cam_rate_hz;
    // Pinhole projection: the same physical wobble spans more pixels the
    // closer the marker gets, normalized to 1 at the starting distance.
    const double gain = cfg.base_jitter_px * world.excitation(t) *
                        (cfg.start_distance_m / world.marker_distance(t));
    MarkerObservation m;
    m.t = t;
    m.u = cfg.marker_u0_px + gain * world.z_u(t) + px_sigma * pixel_rng.gaussian();
    m.v = cfg.marker_v0_px + gain * world.z_v(t) + px_sigma * pixel_rng.gaussian();
    m.detected = dropout_rng.uniform01() >= cfg.marker_dropout;
    log.marker.push_back(m);
  }

  return log;
}

std::vector<RunLog> generate_campaign(const std::vector<CampaignEntry>& entries,
                                      const SimConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::vector<RunLog> logs;
  std::uint64_t trial_index = 0;
  for (const CampaignEntry& e : entries) {
    if (e.trials < 0) throw ConfigError("campaign trial count must be >= 0");
    for (int k = 0; k < e.trials; ++k, ++trial_index) {
      std::string speed_label = format_double(e.commanded_speed);
      std::replace(speed_label.begin(), speed_label.end(), '.', 'p');
      const std::string trial_id = to_string(e.profile.terrain) + "_v" + speed_label + "_t" +
                                   (k < 10 ? "0" : "") + std::to_string(k);
      SimConfig trial_cfg = cfg;
      trial_cfg.seed = derive_seed(cfg.seed, trial_index);
      logs.push_back(simulate_trial(e.profile, e.commanded_speed, trial_cfg, trial_id));
      if (!out_dir.empty()) {
        save_runlog(logs.back(), out_dir + "/" + trial_id);
      }
    }
  }
  return logs;
}

}  // namespace stabest
