#pragma once

// Evaluation summaries and their on-disk rendering. errors.csv keeps full
// double precision (shortest round-trip formatting), so every aggregate in
// report.json can be recomputed exactly from the rows.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "stabest/types.hpp"

namespace stabest {

struct ErrorHistogram {
  static constexpr int kBins = 50;
  double lo = -1.0, hi = 1.0;  // prediction error range; errors are clamped in
  std::array<int, kBins> counts{};
};

ErrorHistogram error_histogram(std::span<const double> predictions,
                               std::span<const double> targets);

struct ReportRow {
  Terrain terrain{};
  double commanded_speed = 0.0;
  std::size_t n = 0;
  double mse = 0.0;
};

struct Report {
  std::size_t n = 0;
  double mse = 0.0;
  double bias = 0.0;  // mean of (prediction - label)
  std::vector<ReportRow> per_class;
  ErrorHistogram histogram;
};

Report make_report(const std::vector<ScoredWindow>& windows,
                   std::span<const double> predictions);

// Writes report.json, errors.csv, histogram.svg, and trace.svg into out_dir
// (created if missing). provenance_json must be a JSON object; it is embedded
// verbatim in report.json.
void render_report(const Report& report, const std::vector<ScoredWindow>& windows,
                   std::span<const double> predictions, const std::string& out_dir,
                   const std::string& provenance_json = "{}");

}  // namespace stabest
