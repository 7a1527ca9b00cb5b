#pragma once

#include <filesystem>
#include <vector>

#include "stabest/types.hpp"

// On-disk trial format: one directory per trial holding
//   meta.json   trial metadata and static marker position
//   imu.csv     t,gyro_x,gyro_y,gyro_z,accel_x,accel_y,accel_z
//   gps.csv     t,x,y
//   marker.csv  t,u,v,detected   (u,v empty when detected=0)
// CSV files carry a header row, '.' decimal separator, LF line endings, and
// shortest-round-trip number formatting, so save -> load is bit-exact.

namespace stabest {

void save_runlog(const RunLog& log, const std::filesystem::path& dir);
RunLog load_runlog(const std::filesystem::path& dir);

// Immediate subdirectories of root that contain a meta.json, sorted by name.
std::vector<std::filesystem::path> list_trial_dirs(const std::filesystem::path& root);

// dataset.jsonl: one ScoredWindow per line.
void save_dataset(const std::vector<ScoredWindow>& windows, const std::filesystem::path& file);
std::vector<ScoredWindow> load_dataset(const std::filesystem::path& file);

}  // namespace stabest
