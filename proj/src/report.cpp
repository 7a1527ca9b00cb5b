#include "stabest/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "stabest/error.hpp"
#include "stabest/numio.hpp"

namespace stabest {

namespace {

void check_lengths(std::size_t n_windows, std::size_t n_preds) {
  if (n_windows == 0) throw DataError("nothing to evaluate: no windows");
  if (n_windows != n_preds) throw DataError("predictions do not match windows");
}

}  // namespace

ErrorHistogram error_histogram(std::span<const double> predictions,
                               std::span<const double> targets) {
  if (predictions.empty() || predictions.size() != targets.size()) {
    throw DataError("histogram needs matching non-empty prediction/target spans");
  }
  ErrorHistogram h;
  const double width = (h.hi - h.lo) / ErrorHistogram::kBins;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = std::clamp(predictions[i] - targets[i], h.lo, h.hi);
    const int b = std::min(ErrorHistogram::kBins - 1,
                           static_cast<int>(std::floor((e - h.lo) / width)));
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

Report make_report(const std::vector<ScoredWindow>& windows,
                   std::span<const double> predictions) {
  check_lengths(windows.size(), predictions.size());

  Report r;
  r.n = windows.size();

  std::vector<double> targets(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) targets[i] = windows[i].gt;

  double sq = 0.0, signed_sum = 0.0;
  std::map<std::pair<int, double>, ReportRow> rows;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double e = predictions[i] - targets[i];
    sq += e * e;
    signed_sum += e;
    ReportRow& row =
        rows[{static_cast<int>(windows[i].meta.terrain), windows[i].meta.commanded_speed}];
    row.terrain = windows[i].meta.terrain;
    row.commanded_speed = windows[i].meta.commanded_speed;
    row.n += 1;
    row.mse += e * e;  // sum for now, divided below
  }
  r.mse = sq / static_cast<double>(r.n);
  r.bias = signed_sum / static_cast<double>(r.n);
  for (auto& [key, row] : rows) {
    row.mse /= static_cast<double>(row.n);
    r.per_class.push_back(row);
  }
  r.histogram = error_histogram(predictions, {targets.data(), targets.size()});
  return r;
}

namespace {

// Tiny deterministic SVG builder: fixed canvas, numbers formatted with the
// shortest round-trip form so the bytes are stable across runs.
constexpr double kW = 640.0, kH = 360.0, kMargin = 48.0;

std::string num(double v) { return format_double(v); }

void svg_open(std::string& s) {
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 ";
  s += num(kW);
  s += " ";
  s += num(kH);
  s += "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
       "\" fill=\"white\"/>\n";
}

void svg_axes(std::string& s) {
  s += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kH - kMargin) + "\" x2=\"" +
       num(kW - kMargin) + "\" y2=\"" + num(kH - kMargin) +
       "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) +
       "\" y2=\"" + num(kH - kMargin) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
}

void svg_text(std::string& s, double x, double y, const std::string& text,
              const std::string& anchor = "start") {
  s += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" +
       text + "</text>\n";
}

std::string histogram_svg(const ErrorHistogram& h) {
  std::string s;
  svg_open(s);
  svg_axes(s);
  const int peak = *std::max_element(h.counts.begin(), h.counts.end());
  const double inner_w = kW - 2 * kMargin;
  const double inner_h = kH - 2 * kMargin;
  const double bar_w = inner_w / ErrorHistogram::kBins;
  for (int b = 0; b < ErrorHistogram::kBins; ++b) {
    const int c = h.counts[static_cast<std::size_t>(b)];
    if (c == 0) continue;
    const double bh = inner_h * c / peak;
    s += "<rect x=\"" + num(kMargin + b * bar_w) + "\" y=\"" + num(kH - kMargin - bh) +
         "\" width=\"" + num(bar_w) + "\" height=\"" + num(bh) +
         "\" fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  svg_text(s, kMargin, kH - kMargin + 16, num(h.lo));
  svg_text(s, kW - kMargin, kH - kMargin + 16, num(h.hi), "end");
  svg_text(s, kW / 2, kH - kMargin + 32, "prediction error", "middle");
  svg_text(s, kMargin, kMargin - 8, "count, peak " + std::to_string(peak));
  s += "</svg>\n";
  return s;
}

std::string trace_svg(const std::vector<ScoredWindow>& windows,
                      std::span<const double> predictions) {
  // Windows sorted by label, labels and predictions overlaid, the usual
  // way to eyeball calibration of a bounded regressor.
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (windows[a].gt != windows[b].gt) return windows[a].gt < windows[b].gt;
    return windows[a].id() < windows[b].id();
  });

  const double inner_w = kW - 2 * kMargin;
  const double inner_h = kH - 2 * kMargin;
  const double step = order.size() > 1 ? inner_w / (static_cast<double>(order.size()) - 1) : 0.0;
  const auto xpos = [&](std::size_t i) { return kMargin + step * static_cast<double>(i); };
  const auto ypos = [&](double v) {
    return kH - kMargin - inner_h * std::clamp(v, 0.0, 1.0);
  };

  std::string s;
  svg_open(s);
  svg_axes(s);
  for (int pass = 0; pass < 2; ++pass) {
    s += "<polyline fill=\"none\" stroke=\"";
    s += pass == 0 ? "black" : "darkorange";
    s += "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < order.size(); ++i) {
      const double v = pass == 0 ? windows[order[i]].gt : predictions[order[i]];
      if (i) s += " ";
      s += num(xpos(i)) + "," + num(ypos(v));
    }
    s += "\"/>\n";
  }
  svg_text(s, kMargin, kMargin - 8, "label (black) and prediction (orange), sorted by label");
  svg_text(s, kMargin - 6, kH - kMargin + 4, "0", "end");
  svg_text(s, kMargin - 6, kMargin + 4, "1", "end");
  s += "</svg>\n";
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace

void render_report(const Report& report, const std::vector<ScoredWindow>& windows,
                   std::span<const double> predictions, const std::string& out_dir,
                   const std::string& provenance_json) {
  check_lengths(windows.size(), predictions.size());
  std::filesystem::create_directories(out_dir);

  std::string csv = "id,terrain,speed,gt,pred,error\n";
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const ScoredWindow& w = windows[i];
    csv += w.id();
    csv += ",";
    csv += to_string(w.meta.terrain);
    csv += ",";
    csv += format_double(w.meta.commanded_speed);
    csv += ",";
    csv += format_double(w.gt);
    csv += ",";
    csv += format_double(predictions[i]);
    csv += ",";
    csv += format_double(predictions[i] - w.gt);
    csv += "\n";
  }
  write_file(out_dir + "/errors.csv", csv);

  nlohmann::json per_class = nlohmann::json::array();
  for (const ReportRow& row : report.per_class) {
    per_class.push_back({{"terrain", to_string(row.terrain)},
                         {"speed", row.commanded_speed},
                         {"n", row.n},
                         {"mse", row.mse}});
  }
  nlohmann::json prov;
  try {
    prov = nlohmann::json::parse(provenance_json);
  } catch (const nlohmann::json::exception&) {
    throw DataError("report provenance is not valid JSON");
  }
  nlohmann::json j{{"n", report.n},
                   {"mse", report.mse},
                   {"bias", report.bias},
                   {"per_class", per_class},
                   {"histogram",
                    {{"lo", report.histogram.lo},
                     {"hi", report.histogram.hi},
                     {"counts", report.histogram.counts}}},
                   {"provenance", prov}};
  write_file(out_dir + "/report.json", j.dump(2) + "\n");

  write_file(out_dir + "/histogram.svg", histogram_svg(report.histogram));
  write_file(out_dir + "/trace.svg", trace_svg(windows, predictions));
}

}  // namespace stabest
