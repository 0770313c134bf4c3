#pragma once

// Report writers for a SeriesResult: CSV rows, a versioned JSON document that
// reads back into an identical SeriesResult, and an SVG scatter of QE versus
// delta with the least-squares line.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "somqe/analysis.hpp"
#include "somqe/errors.hpp"

namespace somqe {

inline constexpr int kReportSchemaVersion = 1;

enum class ReportFormat { Csv, Json, Svg };

struct ReportOptions {
  bool include_timing = true;  // false writes ms = 0 so reruns are byte-identical
};

inline std::vector<ReportFormat> parse_report_formats(const std::string& list) {
  std::vector<ReportFormat> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "csv") out.push_back(ReportFormat::Csv);
    else if (item == "json") out.push_back(ReportFormat::Json);
    else if (item == "svg") out.push_back(ReportFormat::Svg);
    else if (item == "all") out.insert(out.end(), {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg});
    else if (!item.empty()) throw ConfigError("unknown report format '" + item + "'");
  }
  if (out.empty()) throw ConfigError("no report format selected");
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const SomConfig& c) {
  return {{"rows", c.rows},
          {"cols", c.cols},
          {"dim", c.dim},
          {"initial_radius", c.initial_radius},
          {"initial_learning_rate", c.initial_learning_rate},
          {"iterations", c.iterations},
          {"seed", c.seed},
          {"radius_schedule", to_string(c.radius_schedule)}};
}

inline SomConfig som_config_from_json(const nlohmann::json& j) {
  SomConfig c;
  c.rows = j.at("rows").get<std::size_t>();
  c.cols = j.at("cols").get<std::size_t>();
  c.dim = j.at("dim").get<std::size_t>();
  c.initial_radius = j.at("initial_radius").get<double>();
  c.initial_learning_rate = j.at("initial_learning_rate").get<double>();
  c.iterations = j.at("iterations").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.radius_schedule = parse_radius_schedule(j.at("radius_schedule").get<std::string>());
  return c;
}

inline nlohmann::json to_json(const SeriesSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"width", s.width},
          {"height", s.height},
          {"count", s.count()},
          {"deltas", s.deltas},
          {"baseline_density", s.baseline_density},
          {"cells", s.cells},
          {"seed", s.seed}};
}

inline SeriesSpec series_spec_from_json(const nlohmann::json& j) {
  SeriesSpec s;
  s.kind = parse_series_kind(j.at("kind").get<std::string>());
  s.width = j.at("width").get<std::size_t>();
  s.height = j.at("height").get<std::size_t>();
  s.deltas = j.at("deltas").get<std::vector<double>>();
  s.baseline_density = j.at("baseline_density").get<double>();
  s.cells = j.at("cells").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

inline nlohmann::json to_json(const ExtractionStrategy& strategy) {
  nlohmann::json j = {{"name", strategy_name(strategy)}};
  if (const auto* p = std::get_if<Patch>(&strategy)) {
    j["name"] = "patch";
    j["k"] = p->k;
  }
  return j;
}

inline ExtractionStrategy strategy_from_json(const nlohmann::json& j) {
  const auto name = j.at("name").get<std::string>();
  if (name == "pixel") return PixelScalar{};
  if (name == "position") return PixelPosition{};
  if (name == "patch") return Patch{j.at("k").get<std::size_t>()};
  throw FormatError("unknown strategy '" + name + "'");
}

inline nlohmann::json to_json(const SeriesResult& r, const ReportOptions& opt = {}) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"index", rec.index},
                       {"delta_pct", rec.delta_pct},
                       {"qe", rec.qe},
                       {"ms", opt.include_timing ? rec.ms : 0.0}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"series_id", r.series_id},
          {"mode", to_string(r.mode)},
          {"strategy", to_json(r.strategy)},
          {"som", to_json(r.som)},
          {"spec", r.spec ? to_json(*r.spec) : nlohmann::json(nullptr)},
          {"timing_recorded", opt.include_timing},
          {"records", records},
          {"fit",
           {{"slope", r.fit.slope},
            {"intercept", r.fit.intercept},
            {"r2", r.fit.r2},
            {"n", r.fit.n},
            {"degenerate", r.fit.degenerate}}},
          {"qe_strictly_increasing", r.qe_strictly_increasing()},
          {"total_ms", opt.include_timing ? r.total_ms : 0.0}};
}

inline SeriesResult series_result_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw FormatError("unsupported report schema_version");
    SeriesResult r;
    r.series_id = j.at("series_id").get<std::string>();
    r.mode = parse_training_mode(j.at("mode").get<std::string>());
    r.strategy = strategy_from_json(j.at("strategy"));
    r.som = som_config_from_json(j.at("som"));
    if (!j.at("spec").is_null()) r.spec = series_spec_from_json(j.at("spec"));
    for (const auto& rec : j.at("records")) {
      r.records.push_back({rec.at("index").get<std::size_t>(), rec.at("delta_pct").get<double>(),
                           rec.at("qe").get<double>(), rec.at("ms").get<double>()});
    }
    const auto& f = j.at("fit");
    r.fit = {f.at("slope").get<double>(), f.at("intercept").get<double>(), f.at("r2").get<double>(),
             f.at("n").get<std::size_t>(), f.at("degenerate").get<bool>()};
    r.total_ms = j.at("total_ms").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV / SVG

namespace detail {

inline std::string fmt_double(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace detail

inline std::string csv_report(const SeriesResult& r, const ReportOptions& opt = {}) {
  std::string out = "series_id,image_index,delta_pct,qe,ms\n";
  for (const auto& rec : r.records) {
    out += r.series_id + "," + std::to_string(rec.index) + "," + detail::fmt_double(rec.delta_pct) + "," +
           detail::fmt_double(rec.qe) + "," + detail::fmt_double(opt.include_timing ? rec.ms : 0.0, "%.3f") + "\n";
  }
  return out;
}

inline std::string svg_report(const SeriesResult& r) {
  constexpr double W = 640, H = 480, L = 80, R = 30, T = 50, B = 60;
  double xmin = r.records.front().delta_pct, xmax = xmin;
  double ymin = r.records.front().qe, ymax = ymin;
  for (const auto& rec : r.records) {
    xmin = std::min(xmin, rec.delta_pct);
    xmax = std::max(xmax, rec.delta_pct);
    ymin = std::min(ymin, rec.qe);
    ymax = std::max(ymax, rec.qe);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  const double ypad = ymax > ymin ? 0.05 * (ymax - ymin) : 0.05 * std::max(1e-9, std::abs(ymax));
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
  auto f = [](double v) { return detail::fmt_double(v, "%.2f"); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
    << W << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << r.series_id << " (" << to_string(r.mode) << ", " << strategy_name(r.strategy) << ")</text>\n";
  // axes
  s << "<path d=\"M" << L << " " << T << " V" << H - B << " H" << W - R
    << "\" stroke=\"black\" fill=\"none\" class=\"axes\"/>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 20
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">increase (%)</text>\n";
  s << "<text x=\"20\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 20 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">QE</text>\n";
  s << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-family=\"sans-serif\" font-size=\"11\">"
    << f(xmin) << "</text>\n";
  s << "<text x=\"" << W - R << "\" y=\"" << H - B + 18
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << f(xmax) << "</text>\n";
  s << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
    << "font-size=\"11\">" << detail::fmt_double(ymin, "%.4g") << "</text>\n";
  s << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
    << "font-size=\"11\">" << detail::fmt_double(ymax, "%.4g") << "</text>\n";
  // fitted line
  const double x0 = xmin, x1 = xmax;
  s << "<line x1=\"" << f(px(x0)) << "\" y1=\"" << f(py(r.fit.slope * x0 + r.fit.intercept)) << "\" x2=\""
    << f(px(x1)) << "\" y2=\"" << f(py(r.fit.slope * x1 + r.fit.intercept))
    << "\" stroke=\"steelblue\" stroke-width=\"2\" class=\"fit\"/>\n";
  for (const auto& rec : r.records) {
    s << "<circle cx=\"" << f(px(rec.delta_pct)) << "\" cy=\"" << f(py(rec.qe))
      << "\" r=\"5\" fill=\"crimson\" class=\"marker\"/>\n";
  }
  s << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 << "\" font-family=\"sans-serif\" font-size=\"13\">"
    << "r2 = " << detail::fmt_double(r.fit.r2, "%.4f") << (r.fit.degenerate ? " (degenerate)" : "")
    << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

/// Writes `<series_id>.{csv,json,svg}` under `dir` and returns the paths written.
inline std::vector<std::filesystem::path> emit_report(const SeriesResult& result, const std::filesystem::path& dir,
                                                      const std::vector<ReportFormat>& formats,
                                                      const ReportOptions& opt = {}) {
  if (result.records.empty()) throw InputError("cannot report an empty series");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const std::string base = result.series_id.empty() ? "series" : result.series_id;
  std::vector<std::filesystem::path> written;
  for (auto f : formats) {
    std::filesystem::path path;
    switch (f) {
      case ReportFormat::Csv:
        path = dir / (base + ".csv");
        detail::write_text(path, csv_report(result, opt));
        break;
      case ReportFormat::Json:
        path = dir / (base + ".json");
        detail::write_text(path, to_json(result, opt).dump(2) + "\n");
        break;
      case ReportFormat::Svg:
        path = dir / (base + ".svg");
        detail::write_text(path, svg_report(result));
        break;
    }
    written.push_back(path);
  }
  return written;
}

inline SeriesResult load_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
  return series_result_from_json(j);
}

}  // namespace somqe
