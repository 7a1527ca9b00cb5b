#include "stabest/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "stabest/error.hpp"
#include "stabest/numio.hpp"

namespace stabest {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);  // binary: no newline translation
  if (!f) throw DataError("cannot write " + p.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot read " + p.string());
  return f;
}

std::vector<std::string_view> split_csv(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Reads one line, tolerating a trailing CR from foreign tools.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void expect_header(std::istream& in, const std::filesystem::path& p, std::string_view want) {
  std::string line;
  if (!next_line(in, line) || line != want) {
    throw DataError(p.string() + ": expected header '" + std::string(want) + "'");
  }
}

json meta_to_json(const RunLog& log) {
  return json{{"terrain", to_string(log.meta.terrain)},
              {"commanded_speed", log.meta.commanded_speed},
              {"trial_id", log.meta.trial_id},
              {"seed", log.meta.seed},
              {"marker_position", {log.marker_x, log.marker_y}}};
}

json parse_json_file(const std::filesystem::path& p) {
  auto f = open_in(p);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

void save_runlog(const RunLog& log, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  open_out(dir / "meta.json") << meta_to_json(log).dump(2) << "\n";

  {
    auto f = open_out(dir / "imu.csv");
    f << "t,gyro_x,gyro_y,gyro_z,accel_x,accel_y,accel_z\n";
    for (const auto& s : log.imu) {
      f << format_double(s.t) << ',' << format_double(s.gyro_x) << ',' << format_double(s.gyro_y)
        << ',' << format_double(s.gyro_z) << ',' << format_double(s.accel_x) << ','
        << format_double(s.accel_y) << ',' << format_double(s.accel_z) << '\n';
    }
  }
  {
    auto f = open_out(dir / "gps.csv");
    f << "t,x,y\n";
    for (const auto& s : log.gps) {
      f << format_double(s.t) << ',' << format_double(s.x) << ',' << format_double(s.y) << '\n';
    }
  }
  {
    auto f = open_out(dir / "marker.csv");
    f << "t,u,v,detected\n";
    for (const auto& s : log.marker) {
      f << format_double(s.t) << ',';
      if (s.detected) {
        f << format_double(s.u) << ',' << format_double(s.v) << ",1\n";
      } else {
        f << ",,0\n";  // u,v undefined for missed detections
      }
    }
  }
}

RunLog load_runlog(const std::filesystem::path& dir) {
  RunLog log;

  const json meta = parse_json_file(dir / "meta.json");
  try {
    log.meta.terrain = terrain_from_string(meta.at("terrain").get<std::string>());
    log.meta.commanded_speed = meta.at("commanded_speed").get<double>();
    log.meta.trial_id = meta.at("trial_id").get<std::string>();
    log.meta.seed = meta.at("seed").get<std::uint64_t>();
    log.marker_x = meta.at("marker_position").at(0).get<double>();
    log.marker_y = meta.at("marker_position").at(1).get<double>();
  } catch (const json::exception& e) {
    throw DataError((dir / "meta.json").string() + ": " + e.what());
  }

  std::string line;
  std::vector<std::string_view> cols;

  {
    auto f = open_in(dir / "imu.csv");
    expect_header(f, dir / "imu.csv", "t,gyro_x,gyro_y,gyro_z,accel_x,accel_y,accel_z");
    while (next_line(f, line)) {
      if (line.empty()) continue;
      split_csv(line, cols);
      if (cols.size() != 7) throw DataError((dir / "imu.csv").string() + ": bad row '" + line + "'");
      log.imu.push_back({parse_double(cols[0]), parse_double(cols[1]), parse_double(cols[2]),
                         parse_double(cols[3]), parse_double(cols[4]), parse_double(cols[5]),
                         parse_double(cols[6])});
    }
  }
  {
    auto f = open_in(dir / "gps.csv");
    expect_header(f, dir / "gps.csv", "t,x,y");
    while (next_line(f, line)) {
      if (line.empty()) continue;
      split_csv(line, cols);
      if (cols.size() != 3) throw DataError((dir / "gps.csv").string() + ": bad row '" + line + "'");
      log.gps.push_back({parse_double(cols[0]), parse_double(cols[1]), parse_double(cols[2])});
    }
  }
  {
    auto f = open_in(dir / "marker.csv");
    expect_header(f, dir / "marker.csv", "t,u,v,detected");
    while (next_line(f, line)) {
      if (line.empty()) continue;
      split_csv(line, cols);
      if (cols.size() != 4) {
        throw DataError((dir / "marker.csv").string() + ": bad row '" + line + "'");
      }
      MarkerObservation obs;
      obs.t = parse_double(cols[0]);
      obs.detected = parse_int(cols[3]) != 0;
      if (obs.detected) {
        obs.u = parse_double(cols[1]);
        obs.v = parse_double(cols[2]);
      }
      log.marker.push_back(obs);
    }
  }

  return log;
}

std::vector<std::filesystem::path> list_trial_dirs(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw DataError("not a directory: " + root.string());
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(root)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "meta.json")) {
      dirs.push_back(e.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

void save_dataset(const std::vector<ScoredWindow>& windows, const std::filesystem::path& file) {
  auto f = open_out(file);
  for (const auto& w : windows) {
    json j{{"id", w.id()},
           {"meta",
            {{"terrain", to_string(w.meta.terrain)},
             {"speed", w.meta.commanded_speed},
             {"trial_id", w.meta.trial_id},
             {"seed", w.meta.seed}}},
           {"window_index", w.window_index},
           {"t_start", w.frame.t_start},
           {"t_end", w.frame.t_end},
           {"c3_raw", w.c3_raw},
           {"gt", w.gt},
           {"flagged", w.flagged},
           {"channels", w.frame.data}};
    f << j.dump() << '\n';
  }
}

std::vector<ScoredWindow> load_dataset(const std::filesystem::path& file) {
  auto f = open_in(file);
  std::vector<ScoredWindow> out;
  std::string line;
  std::size_t lineno = 0;
  while (next_line(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      ScoredWindow w;
      const auto& m = j.at("meta");
      w.meta.terrain = terrain_from_string(m.at("terrain").get<std::string>());
      w.meta.commanded_speed = m.at("speed").get<double>();
      w.meta.trial_id = m.at("trial_id").get<std::string>();
      w.meta.seed = m.at("seed").get<std::uint64_t>();
      w.window_index = j.at("window_index").get<int>();
      w.frame.t_start = j.at("t_start").get<double>();
      w.frame.t_end = j.at("t_end").get<double>();
      w.c3_raw = j.at("c3_raw").get<double>();
      w.gt = j.at("gt").get<double>();
      w.flagged = j.at("flagged").get<bool>();
      const auto& ch = j.at("channels");
      if (ch.size() != w.frame.data.size()) {
        throw DataError(file.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(w.frame.data.size()) + " channel values");
      }
      for (std::size_t i = 0; i < w.frame.data.size(); ++i) {
        w.frame.data[i] = ch[i].get<double>();
      }
      out.push_back(std::move(w));
    } catch (const json::exception& e) {
      throw DataError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace stabest
