#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace stabest {

// Seconds. Monotonic within a trial; streams are sampled on independent grids.
using Timestamp = double;

struct ImuSample {
  Timestamp t = 0.0;
  double gyro_x = 0.0, gyro_y = 0.0, gyro_z = 0.0;     // rad/s
  double accel_x = 0.0, accel_y = 0.0, accel_z = 0.0;  // m/s^2
};

// Local planar frame, meters.
struct GpsFix {
  Timestamp t = 0.0;
  double x = 0.0, y = 0.0;
};

struct VelocitySample {
  Timestamp t = 0.0;
  double vx = 0.0, vy = 0.0;  // m/s
};

struct MarkerObservation {
  Timestamp t = 0.0;
  double u = 0.0, v = 0.0;  // marker-center pixel coordinates; meaningless unless detected
  bool detected = true;
};

enum class Terrain { pavement, grass, dirt, dirt_rocks };

inline constexpr std::array<Terrain, 4> kAllTerrains = {
    Terrain::pavement, Terrain::grass, Terrain::dirt, Terrain::dirt_rocks};

inline constexpr std::array<double, 3> kNominalSpeeds = {0.5, 1.0, 1.5};

std::string to_string(Terrain t);
Terrain terrain_from_string(const std::string& s);

struct TrialMeta {
  Terrain terrain = Terrain::pavement;
  double commanded_speed = 0.5;  // m/s
  std::string trial_id;
  std::uint64_t seed = 0;
};

// One trial's raw multi-rate recording. IMU nominally 200 Hz, GPS 10 Hz,
// camera 60 Hz; each stream carries its own timestamps.
struct RunLog {
  TrialMeta meta;
  std::vector<ImuSample> imu;
  std::vector<GpsFix> gps;
  std::vector<MarkerObservation> marker;
  double marker_x = 0.0, marker_y = 0.0;  // static marker location, meters
};

// Fixed 8 x 200 model input: gyro xyz, accel xyz, vx, vy over 200 consecutive
// IMU samples, velocity rows interpolated onto the IMU timestamps.
struct DataFrame {
  static constexpr int kRows = 8;
  static constexpr int kCols = 200;

  std::vector<double> data;
  Timestamp t_start = 0.0, t_end = 0.0;

  DataFrame() : data(static_cast<std::size_t>(kRows) * kCols, 0.0) {}

  double& at(int row, int col) { return data[static_cast<std::size_t>(row) * kCols + col]; }
  double at(int row, int col) const { return data[static_cast<std::size_t>(row) * kCols + col]; }
};

inline constexpr std::array<const char*, 8> kChannelOrder = {
    "gyro_x", "gyro_y", "gyro_z", "accel_x", "accel_y", "accel_z", "vx", "vy"};

struct ScoredWindow {
  DataFrame frame;
  double c3_raw = 0.0;  // >= 0
  double gt = 0.0;      // in [0, 1]
  TrialMeta meta;
  int window_index = 0;  // position within the source trial
  bool flagged = false;  // window had < 2 detected marker frames

  std::string id() const { return meta.trial_id + "#" + std::to_string(window_index); }
};

struct Violation {
  std::string stream;   // "imu", "gps", "marker", "meta"
  std::ptrdiff_t index; // sample index, -1 for stream-level findings
  std::string rule;
};

// Structural checks on a trial: finite values, strictly increasing timestamps
// per stream, commanded speed from the nominal set. Returns every finding.
std::vector<Violation> validate_runlog(const RunLog& log);

std::string describe(const Violation& v);

}  // namespace stabest
