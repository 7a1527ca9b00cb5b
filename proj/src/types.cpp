#include "stabest/types.hpp"

#include <cmath>

#include "stabest/error.hpp"

namespace stabest {

std::string to_string(Terrain t) {
  switch (t) {
    case Terrain::pavement: return "pavement";
    case Terrain::grass: return "grass";
    case Terrain::dirt: return "dirt";
    case Terrain::dirt_rocks: return "dirt_rocks";
  }
  return "unknown";
}

Terrain terrain_from_string(const std::string& s) {
  for (Terrain t : kAllTerrains) {
    if (s == to_string(t)) return t;
  }
  throw DataError("unknown terrain label: '" + s + "'");
}

namespace {

bool nominal_speed(double v) {
  for (double s : kNominalSpeeds) {
    if (v == s) return true;
  }
  return false;
}

// Shared timestamp discipline for all three streams.
template <typename Seq>
void check_timestamps(const char* stream, const Seq& seq, std::vector<Violation>& out) {
  double prev = -1.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double t = seq[i].t;
    if (!std::isfinite(t) || t < 0.0) {
      out.push_back({stream, static_cast<std::ptrdiff_t>(i), "timestamp not finite and non-negative"});
    } else if (t <= prev) {
      out.push_back({stream, static_cast<std::ptrdiff_t>(i), "timestamps not strictly increasing"});
    }
    prev = t;
  }
}

void check_finite(const char* stream, std::size_t i, double v, const char* field,
                  std::vector<Violation>& out) {
  if (!std::isfinite(v)) {
    out.push_back({stream, static_cast<std::ptrdiff_t>(i), std::string(field) + " not finite"});
  }
}

}  // namespace

std::vector<Violation> validate_runlog(const RunLog& log) {
  std::vector<Violation> out;

  check_timestamps("imu", log.imu, out);
  for (std::size_t i = 0; i < log.imu.size(); ++i) {
    const auto& s = log.imu[i];
    check_finite("imu", i, s.gyro_x, "gyro_x", out);
    check_finite("imu", i, s.gyro_y, "gyro_y", out);
    check_finite("imu", i, s.gyro_z, "gyro_z", out);
    check_finite("imu", i, s.accel_x, "accel_x", out);
    check_finite("imu", i, s.accel_y, "accel_y", out);
    check_finite("imu", i, s.accel_z, "accel_z", out);
  }

  check_timestamps("gps", log.gps, out);
  for (std::size_t i = 0; i < log.gps.size(); ++i) {
    check_finite("gps", i, log.gps[i].x, "x", out);
    check_finite("gps", i, log.gps[i].y, "y", out);
  }

  check_timestamps("marker", log.marker, out);
  for (std::size_t i = 0; i < log.marker.size(); ++i) {
    // u, v are undefined when not detected; only detected frames are checked.
    if (log.marker[i].detected) {
      check_finite("marker", i, log.marker[i].u, "u", out);
      check_finite("marker", i, log.marker[i].v, "v", out);
    }
  }

  if (!nominal_speed(log.meta.commanded_speed)) {
    out.push_back({"meta", -1, "commanded_speed outside {0.5, 1, 1.5}"});
  }
  if (!std::isfinite(log.marker_x) || !std::isfinite(log.marker_y)) {
    out.push_back({"meta", -1, "marker position not finite"});
  }

  return out;
}

std::string describe(const Violation& v) {
  std::string s = v.stream;
  if (v.index >= 0) {
    s += "[" + std::to_string(v.index) + "]";
  }
  return s + ": " + v.rule;
}

}  // namespace stabest
