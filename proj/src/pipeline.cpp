#include "stabest/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stabest/error.hpp"
#include "stabest/numio.hpp"
#include "stabest/rng.hpp"

namespace stabest {

std::vector<VelocitySample> derive_velocity(const std::vector<GpsFix>& gps) {
  if (gps.size() < 2) throw DataError("need at least 2 gps fixes to derive velocity");
  for (std::size_t i = 1; i < gps.size(); ++i) {
    if (!(gps[i].t > gps[i - 1].t)) {
      throw DataError("gps timestamps must be strictly increasing");
    }
  }
  const std::size_t n = gps.size();
  std::vector<VelocitySample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i == n - 1 ? n - 1 : i + 1;
    const double dt = gps[hi].t - gps[lo].t;
    out[i].t = gps[i].t;
    out[i].vx = (gps[hi].x - gps[lo].x) / dt;
    out[i].vy = (gps[hi].y - gps[lo].y) / dt;
  }
  return out;
}

InterpolationResult interpolate_to(const std::vector<VelocitySample>& velocity,
                                   const std::vector<ImuSample>& imu) {
  if (velocity.empty()) throw DataError("cannot interpolate an empty velocity series");
  InterpolationResult res;
  res.samples.resize(imu.size());
  for (std::size_t i = 0; i < imu.size(); ++i) {
    const double t = imu[i].t;
    VelocitySample& s = res.samples[i];
    s.t = t;
    const auto it = std::upper_bound(
        velocity.begin(), velocity.end(), t,
        [](double q, const VelocitySample& v) { return q < v.t; });
    if (it == velocity.begin()) {
      s.vx = velocity.front().vx;
      s.vy = velocity.front().vy;
      ++res.n_clamped;
    } else if (it == velocity.end()) {
      s.vx = velocity.back().vx;
      s.vy = velocity.back().vy;
      if (t > velocity.back().t) ++res.n_clamped;
    } else {
      const VelocitySample& b = *it;
      const VelocitySample& a = *(it - 1);
      const double alpha = (t - a.t) / (b.t - a.t);
      s.vx = a.vx + alpha * (b.vx - a.vx);
      s.vy = a.vy + alpha * (b.vy - a.vy);
    }
  }
  return res;
}

std::vector<DataFrame> make_windows(const RunLog& log) {
  const std::size_t w = DataFrame::kCols;
  if (log.imu.size() < w) return {};

  const InterpolationResult vel = interpolate_to(derive_velocity(log.gps), log.imu);
  const std::size_t n_windows = log.imu.size() / w;
  std::vector<DataFrame> frames(n_windows);
  for (std::size_t k = 0; k < n_windows; ++k) {
    DataFrame& f = frames[k];
    f.data.resize(DataFrame::kRows * w);
    const std::size_t base = k * w;
    f.t_start = log.imu[base].t;
    f.t_end = log.imu[base + w - 1].t;
    for (std::size_t c = 0; c < w; ++c) {
      const ImuSample& s = log.imu[base + c];
      f.at(0, c) = s.gyro_x;
      f.at(1, c) = s.gyro_y;
      f.at(2, c) = s.gyro_z;
      f.at(3, c) = s.accel_x;
      f.at(4, c) = s.accel_y;
      f.at(5, c) = s.accel_z;
      f.at(6, c) = vel.samples[base + c].vx;
      f.at(7, c) = vel.samples[base + c].vy;
    }
  }
  return frames;
}

std::vector<ScoredWindow> assemble_windows(const RunLog& log, const C3Config& c3) {
  std::vector<DataFrame> frames = make_windows(log);
  const std::vector<WindowScore> scores = score_windows(log, frames, c3);
  std::vector<ScoredWindow> out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out[i].frame = std::move(frames[i]);
    out[i].meta = log.meta;
    out[i].window_index = scores[i].window_index;
    out[i].c3_raw = scores[i].c3_raw;
    out[i].gt = 0.0;
    out[i].flagged = scores[i].flagged;
  }
  return out;
}

double mean_planar_speed(const DataFrame& frame) {
  double sum = 0.0;
  for (int c = 0; c < DataFrame::kCols; ++c) {
    sum += std::hypot(frame.at(6, c), frame.at(7, c));
  }
  return sum / DataFrame::kCols;
}

PruneResult prune_outliers(const std::vector<ScoredWindow>& windows, double min_mean_speed) {
  PruneResult res;
  for (const ScoredWindow& w : windows) {
    const double v = mean_planar_speed(w.frame);
    if (v < min_mean_speed) {
      res.removed.push_back({w.id(), v});
    } else {
      res.kept.push_back(w);
    }
  }
  return res;
}

namespace {

using ClassKey = std::pair<int, double>;  // (terrain index, commanded speed)

ClassKey class_key(const ScoredWindow& w) {
  return {static_cast<int>(w.meta.terrain), w.meta.commanded_speed};
}

}  // namespace

std::vector<ScoredWindow> balance_classes(const std::vector<ScoredWindow>& windows,
                                          std::uint64_t seed) {
  std::map<ClassKey, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    classes[class_key(windows[i])].push_back(i);
  }

  std::map<int, std::size_t> terrain_min;
  for (const auto& [key, idxs] : classes) {
    const auto it = terrain_min.find(key.first);
    if (it == terrain_min.end() || idxs.size() < it->second) {
      terrain_min[key.first] = idxs.size();
    }
  }

  std::vector<char> keep(windows.size(), 0);
  std::uint64_t tag = 0;  // class rank in sorted order, the per-class stream id
  for (auto& [key, idxs] : classes) {
    const std::size_t target = terrain_min.at(key.first);
    if (idxs.size() > target) {
      Rng rng(derive_seed(seed, tag));
      rng.shuffle(idxs);
      idxs.resize(target);
    }
    for (std::size_t i : idxs) keep[i] = 1;
    ++tag;
  }

  std::vector<ScoredWindow> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (keep[i]) out.push_back(windows[i]);
  }
  return out;
}

void SplitSpec::validate() const {
  if (!(val_fraction >= 0.0 && val_fraction <= 1.0)) {
    throw ConfigError("val_fraction must be in [0, 1]");
  }
  if (n_bins < 1) throw ConfigError("n_bins must be >= 1");
}

void PipelineConfig::validate() const {
  if (!(min_mean_speed >= 0.0)) throw ConfigError("min_mean_speed must be >= 0");
  split.validate();
}

SplitResult stratified_split(const std::vector<ScoredWindow>& windows, const SplitSpec& spec) {
  spec.validate();

  std::vector<std::vector<std::size_t>> bins(static_cast<std::size_t>(spec.n_bins));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double gt = windows[i].gt;
    if (!(gt >= 0.0 && gt <= 1.0)) {
      throw DataError("window " + windows[i].id() + " has label outside [0, 1]");
    }
    const int b = std::min(spec.n_bins - 1, static_cast<int>(gt * spec.n_bins));
    bins[static_cast<std::size_t>(b)].push_back(i);
  }

  std::vector<char> to_val(windows.size(), 0);
  for (int b = 0; b < spec.n_bins; ++b) {
    auto& idxs = bins[static_cast<std::size_t>(b)];
    if (idxs.empty()) continue;
    // ceil with a nudge: 0.15 * 100 evaluates just above 15 in binary.
    std::size_t n_val = static_cast<std::size_t>(
        std::ceil(spec.val_fraction * static_cast<double>(idxs.size()) - 1e-9));
    n_val = std::min(n_val, idxs.size());
    if (spec.val_fraction > 0.0 && n_val == 0) n_val = 1;
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(b)));
    rng.shuffle(idxs);
    for (std::size_t k = 0; k < n_val; ++k) to_val[idxs[k]] = 1;
  }

  SplitResult res;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    (to_val[i] ? res.val : res.train).push_back(windows[i]);
  }
  return res;
}

DatasetBundle build_dataset(const std::vector<RunLog>& logs, const C3Config& c3,
                            const PipelineConfig& cfg) {
  c3.validate();
  cfg.validate();

  std::vector<ScoredWindow> train_side, holdout;
  for (const RunLog& log : logs) {
    std::vector<ScoredWindow> ws = assemble_windows(log, c3);
    auto& dst = log.meta.terrain == cfg.holdout_terrain ? holdout : train_side;
    dst.insert(dst.end(), std::make_move_iterator(ws.begin()),
               std::make_move_iterator(ws.end()));
  }

  DatasetBundle bundle;
  double raw_max = 0.0;
  for (const ScoredWindow& w : train_side) raw_max = std::max(raw_max, w.c3_raw);
  bundle.c3_max_fallback = !(raw_max > 0.0);
  bundle.c3_max = bundle.c3_max_fallback ? 1.0 : raw_max;
  for (auto* part : {&train_side, &holdout}) {
    for (ScoredWindow& w : *part) {
      w.gt = std::clamp(w.c3_raw / bundle.c3_max, 0.0, 1.0);
    }
  }

  std::map<ClassKey, ClassCount> counts;
  for (const RunLog& log : logs) {
    ClassCount& c = counts[{static_cast<int>(log.meta.terrain), log.meta.commanded_speed}];
    c.terrain = log.meta.terrain;
    c.commanded_speed = log.meta.commanded_speed;
  }
  for (const auto* part : {&train_side, &holdout}) {
    for (const ScoredWindow& w : *part) ++counts[class_key(w)].windowed;
  }

  PruneResult pruned_train = prune_outliers(train_side, cfg.min_mean_speed);
  PruneResult pruned_holdout = prune_outliers(holdout, cfg.min_mean_speed);
  bundle.removed = pruned_train.removed;
  bundle.removed.insert(bundle.removed.end(), pruned_holdout.removed.begin(),
                        pruned_holdout.removed.end());

  std::map<ClassKey, std::size_t> survivors;
  for (const auto* part : {&pruned_train.kept, &pruned_holdout.kept}) {
    for (const ScoredWindow& w : *part) ++survivors[class_key(w)];
  }
  for (auto& [key, c] : counts) {
    const auto it = survivors.find(key);
    const std::size_t surviving = it == survivors.end() ? 0 : it->second;
    c.pruned = c.windowed - surviving;
    if (c.terrain != cfg.holdout_terrain && surviving == 0) {
      throw ConfigError("class " + to_string(c.terrain) + " at " +
                        format_double(c.commanded_speed) +
                        " m/s has no usable windows; balancing would erase its terrain");
    }
  }

  std::vector<ScoredWindow> balanced = balance_classes(pruned_train.kept, cfg.balance_seed);
  for (const ScoredWindow& w : balanced) ++counts[class_key(w)].balanced;

  SplitResult split = stratified_split(balanced, cfg.split);
  bundle.train = std::move(split.train);
  bundle.val = std::move(split.val);
  bundle.test = std::move(pruned_holdout.kept);
  for (const auto& [key, c] : counts) bundle.class_counts.push_back(c);
  return bundle;
}

}  // namespace stabest
