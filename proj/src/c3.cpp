#include "stabest/c3.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "stabest/error.hpp"
#include "stabest/numio.hpp"

namespace stabest {

void C3Config::validate() const {
  if (n_circles < 1) throw ConfigError("n_circles must be >= 1");
  if (!(r_min > 0.0) || !std::isfinite(r_min)) throw ConfigError("r_min must be positive");
  if (!(r_max >= r_min) || !std::isfinite(r_max)) throw ConfigError("r_max must be >= r_min");
  if (n_circles == 1 && r_min != r_max) {
    throw ConfigError("n_circles == 1 requires r_min == r_max");
  }
}

std::vector<double> circle_radii(const C3Config& cfg) {
  cfg.validate();
  std::vector<double> radii(static_cast<std::size_t>(cfg.n_circles));
  if (cfg.n_circles == 1) {
    radii[0] = cfg.r_min;
    return radii;
  }
  const double step = (cfg.r_max - cfg.r_min) / (cfg.n_circles - 1);
  for (int i = 0; i < cfg.n_circles; ++i) {
    radii[static_cast<std::size_t>(i)] = cfg.r_min + i * step;
  }
  return radii;
}

int cc_score(double prev_u, double prev_v, double cur_u, double cur_v, const C3Config& cfg) {
  if (!std::isfinite(prev_u) || !std::isfinite(prev_v) || !std::isfinite(cur_u) ||
      !std::isfinite(cur_v)) {
    throw DataError("cc_score: non-finite marker coordinates");
  }
  const double d = std::hypot(cur_u - prev_u, cur_v - prev_v);
  int crossed = 0;
  for (double r : circle_radii(cfg)) {
    if (r < d || (cfg.tie_counts_as_crossed && r == d)) ++crossed;
  }
  return crossed;
}

double normalized_cc(int cc, const DistanceContext& ctx) {
  if (cc < 0) throw DataError("normalized_cc: negative crossing count");
  if (!(ctx.d_max > 0.0) || !std::isfinite(ctx.d_max)) {
    throw DataError("normalized_cc: d_max must be positive");
  }
  if (!(ctx.d_aruco >= 0.0) || !std::isfinite(ctx.d_aruco)) {
    throw DataError("normalized_cc: d_aruco must be non-negative");
  }
  if (ctx.d_aruco > ctx.d_max) {
    throw DataError("normalized_cc: d_aruco exceeds d_max");
  }
  return cc * (ctx.d_aruco / ctx.d_max);
}

double c3_score(std::span<const MarkerObservation> frames,
                std::span<const DistanceContext> contexts, const C3Config& cfg) {
  if (frames.size() != contexts.size()) {
    throw DataError("c3_score: frames and contexts differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].t <= frames[i - 1].t) {
      throw DataError("c3_score: frame timestamps not strictly increasing");
    }
    const int cc = cc_score(frames[i - 1].u, frames[i - 1].v, frames[i].u, frames[i].v, cfg);
    total += normalized_cc(cc, contexts[i]);
  }
  return total;
}

double normalize_gt(double c3, double c3_max) {
  if (!(c3 >= 0.0) || !std::isfinite(c3)) throw DataError("normalize_gt: c3 must be >= 0");
  if (!(c3_max > 0.0) || !std::isfinite(c3_max)) {
    throw DataError("normalize_gt: c3_max must be positive");
  }
  return std::clamp(c3 / c3_max, 0.0, 1.0);
}

namespace {

// Linear interpolation of the GPS track at time t, clamped to the endpoints.
void gps_position_at(const std::vector<GpsFix>& gps, double t, double& x, double& y) {
  if (t <= gps.front().t) {
    x = gps.front().x;
    y = gps.front().y;
    return;
  }
  if (t >= gps.back().t) {
    x = gps.back().x;
    y = gps.back().y;
    return;
  }
  auto it = std::upper_bound(gps.begin(), gps.end(), t,
                             [](double q, const GpsFix& g) { return q < g.t; });
  const GpsFix& hi = *it;
  const GpsFix& lo = *(it - 1);
  const double u = (t - lo.t) / (hi.t - lo.t);
  x = lo.x + u * (hi.x - lo.x);
  y = lo.y + u * (hi.y - lo.y);
}

}  // namespace

std::vector<WindowScore> score_windows(const RunLog& log, const std::vector<DataFrame>& windows,
                                       const C3Config& cfg) {
  cfg.validate();
  if (log.gps.size() < 2) throw DataError("score_windows: need at least 2 GPS fixes");

  std::vector<MarkerObservation> detected;
  detected.reserve(log.marker.size());
  for (const auto& m : log.marker) {
    if (m.detected) detected.push_back(m);
  }

  // Distance to the marker at every detected frame; d_max spans the trial.
  std::vector<double> dist(detected.size());
  double d_max = 0.0;
  for (std::size_t i = 0; i < detected.size(); ++i) {
    double x, y;
    gps_position_at(log.gps, detected[i].t, x, y);
    dist[i] = std::hypot(log.marker_x - x, log.marker_y - y);
    d_max = std::max(d_max, dist[i]);
  }

  std::vector<WindowScore> out;
  out.reserve(windows.size());
  std::size_t lo = 0;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    WindowScore ws;
    ws.window_index = static_cast<int>(w);
    ws.t_start = windows[w].t_start;
    ws.t_end = windows[w].t_end;

    while (lo < detected.size() && detected[lo].t < ws.t_start) ++lo;
    std::size_t hi = lo;
    while (hi < detected.size() && detected[hi].t <= ws.t_end) ++hi;
    ws.n_frames = static_cast<int>(hi - lo);

    if (ws.n_frames < 2) {
      ws.flagged = true;  // not enough tracking evidence; scored 0
    } else {
      std::vector<DistanceContext> ctx(static_cast<std::size_t>(ws.n_frames));
      for (std::size_t i = 0; i < ctx.size(); ++i) {
        ctx[i] = {std::min(dist[lo + i], d_max), d_max};
      }
      ws.c3_raw = c3_score({detected.data() + lo, static_cast<std::size_t>(ws.n_frames)},
                           {ctx.data(), ctx.size()}, cfg);
    }
    out.push_back(ws);
    lo = hi;  // windows are disjoint and ordered
  }
  return out;
}

void save_scores_csv(const std::vector<WindowScore>& scores, const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw DataError("cannot write " + file.string());
  f << "window_index,t_start,t_end,n_frames,c3_raw,flagged\n";
  for (const auto& s : scores) {
    f << s.window_index << ',' << format_double(s.t_start) << ',' << format_double(s.t_end) << ','
      << s.n_frames << ',' << format_double(s.c3_raw) << ',' << (s.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace stabest
