#pragma once

// Command implementations behind the `somqe` tool. Parameters travel as a
// flat JSON object whose keys match the long flag names; layers are merged
// with the precedence flags > config file > built-in defaults, and the seed
// additionally falls back to $SOMQE_SEED before the default.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "somqe/analysis.hpp"
#include "somqe/errors.hpp"
#include "somqe/features.hpp"
#include "somqe/image.hpp"
#include "somqe/report.hpp"
#include "somqe/series.hpp"
#include "somqe/som.hpp"

namespace somqe::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kManifestSchemaVersion = 1;

/// Process exit codes.
enum ExitCode : int { kOk = 0, kFailure = 1, kInputError = 2, kIoError = 3 };

// ---------------------------------------------------------------------------
// Parameter resolution

inline std::vector<double> parse_deltas(const json& value) {
  if (value.is_array()) return value.get<std::vector<double>>();
  if (!value.is_string()) throw ConfigError("deltas must be a list or a comma-separated string");
  std::vector<double> out;
  std::stringstream ss(value.get<std::string>());
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad delta '" + item + "'");
    }
  }
  return out;
}

/// Reads a parameter JSON file. A run manifest is accepted as well: its
/// "parameters" block is the resolved configuration of that run.
inline json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  if (j.contains("parameters") && j["parameters"].is_object()) return j["parameters"];
  return j;
}

/// Merges parameter layers; later layers win.
inline json merge_params(std::initializer_list<json> layers) {
  json out = json::object();
  for (const auto& layer : layers) {
    if (layer.is_null()) continue;
    for (auto it = layer.begin(); it != layer.end(); ++it) out[it.key()] = it.value();
  }
  return out;
}

inline std::uint64_t resolve_seed(const json& p) {
  if (p.contains("seed")) return p["seed"].get<std::uint64_t>();
  if (const char* env = std::getenv("SOMQE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("SOMQE_SEED is not an unsigned integer: ") + env);
  }
  return kDefaultSeed;
}

template <class T>
T param_or(const json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  try {
    return p[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("parameter '") + key + "' has the wrong type");
  }
}

inline SeriesSpec resolve_series_spec(const json& p) {
  auto spec = SeriesSpec::defaults(parse_series_kind(param_or<std::string>(p, "kind", "random-white")));
  spec.width = param_or(p, "width", spec.width);
  spec.height = param_or(p, "height", spec.height);
  if (p.contains("deltas")) spec.deltas = parse_deltas(p["deltas"]);
  spec.baseline_density = param_or(p, "baseline", spec.baseline_density);
  spec.cells = param_or(p, "cells", spec.cells);
  spec.seed = resolve_seed(p);
  spec.validate();
  return spec;
}

inline SomConfig resolve_som(const json& p) {
  SomConfig som;
  som.rows = param_or(p, "rows", som.rows);
  som.cols = param_or(p, "cols", som.cols);
  som.initial_radius = param_or(p, "radius", som.initial_radius);
  som.initial_learning_rate = param_or(p, "alpha", som.initial_learning_rate);
  som.iterations = param_or(p, "iters", som.iterations);
  som.radius_schedule = parse_radius_schedule(param_or<std::string>(p, "radius_schedule", "constant"));
  som.seed = resolve_seed(p);
  som.validate();
  return som;
}

inline ExtractionStrategy resolve_strategy(const json& p) {
  const auto name = param_or<std::string>(p, "strategy", "patch");
  if (name == "pixel") return PixelScalar{};
  if (name == "position") return PixelPosition{};
  if (name == "patch") {
    const auto k = param_or<std::size_t>(p, "patch", 4);
    if (k == 0) throw ConfigError("patch size must be positive");
    return Patch{k};
  }
  throw ConfigError("unknown strategy '" + name + "' (pixel, patch, position)");
}

inline TrainingMode resolve_mode(const json& p) {
  return parse_training_mode(param_or<std::string>(p, "mode", "reference"));
}

/// Resolved parameters in config-file form, so a manifest can be fed back via --config.
inline json resolved_params(const json& p, bool with_series) {
  json out;
  if (with_series) {
    const auto spec = resolve_series_spec(p);
    out["kind"] = to_string(spec.kind);
    out["width"] = spec.width;
    out["height"] = spec.height;
    out["deltas"] = spec.deltas;
    out["baseline"] = spec.baseline_density;
    out["cells"] = spec.cells;
  }
  const auto som = resolve_som(p);
  const auto strategy = resolve_strategy(p);
  out["seed"] = som.seed;
  out["rows"] = som.rows;
  out["cols"] = som.cols;
  out["radius"] = som.initial_radius;
  out["alpha"] = som.initial_learning_rate;
  out["iters"] = som.iterations;
  out["radius_schedule"] = to_string(som.radius_schedule);
  out["strategy"] = std::holds_alternative<Patch>(strategy) ? "patch" : strategy_name(strategy);
  if (const auto* patch = std::get_if<Patch>(&strategy)) out["patch"] = patch->k;
  out["mode"] = to_string(resolve_mode(p));
  for (const char* key : {"format", "count", "workers", "with_timing", "save_images"}) {
    if (p.contains(key)) out[key] = p[key];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifests

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write to " + path.string());
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct RunManifest {
  std::string command;
  std::string config_path;
  json parameters;
  std::uint64_t seed = 0;
  fs::path output_dir;
  std::string timestamp;

  json to_json() const {
    return {{"schema_version", kManifestSchemaVersion},
            {"command", command},
            {"config_path", config_path},
            {"parameters", parameters},
            {"seed", seed},
            {"output_dir", output_dir.string()},
            {"timestamp", timestamp}};
  }
};

inline void write_run_manifest(const RunManifest& m) {
  ensure_dir(m.output_dir);
  write_json(m.output_dir / "run_manifest.json", m.to_json());
}

/// Series manifest as written by `generate`.
struct SeriesManifest {
  SeriesSpec spec;
  std::string format = "pgm";
  std::vector<std::string> files;
  std::vector<std::size_t> units;
  std::vector<bool> rounded;

  json to_json() const {
    json j = cli::json{{"schema_version", kManifestSchemaVersion}};
    j.update(somqe::to_json(spec));
    j["format"] = format;
    json images = json::array();
    for (std::size_t i = 0; i < files.size(); ++i) {
      images.push_back({{"index", i + 1},
                        {"file", files[i]},
                        {"delta_pct", spec.deltas[i]},
                        {"units", units[i]},
                        {"rounded", static_cast<bool>(rounded[i])}});
    }
    j["images"] = images;
    return j;
  }

  static SeriesManifest from_json(const json& j) {
    try {
      SeriesManifest m;
      m.spec = series_spec_from_json(j);
      m.format = j.value("format", "pgm");
      for (const auto& img : j.at("images")) {
        m.files.push_back(img.at("file").get<std::string>());
        m.units.push_back(img.value("units", std::size_t{0}));
        m.rounded.push_back(img.value("rounded", false));
      }
      if (m.files.size() != m.spec.deltas.size()) throw FormatError("manifest image list does not match deltas");
      return m;
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed series manifest: ") + e.what());
    }
  }
};

// ---------------------------------------------------------------------------
// Commands

struct CommandContext {
  json params = json::object();  // merged flags + config
  std::string config_path;
  std::ostream* log = nullptr;

  std::ostream& out() const { return *log; }
};

inline fs::path output_dir(const CommandContext& ctx, const std::string& fallback) {
  return fs::path(param_or<std::string>(ctx.params, "out", fallback));
}

struct GenerateOutcome {
  fs::path dir;
  SeriesManifest manifest;
};

/// Writes `img_NN.<ext>` files plus `manifest.json` for one series.
inline GenerateOutcome write_series(const SeriesSpec& spec, const fs::path& dir, ImageFormat format) {
  const auto series = generate_series(spec);
  ensure_dir(dir);
  SeriesManifest m;
  m.spec = spec;
  m.format = format == ImageFormat::Png ? "png" : "pgm";
  m.units = series.units;
  m.rounded = series.rounded;
  for (std::size_t i = 0; i < series.images.size(); ++i) {
    std::ostringstream name;
    name << "img_" << std::setw(2) << std::setfill('0') << (i + 1) << "." << m.format;
    save_image(series.images[i], dir / name.str(), format);
    m.files.push_back(name.str());
  }
  write_json(dir / "manifest.json", m.to_json());
  return {dir, m};
}

inline ImageFormat resolve_image_format(const json& p) {
  const auto f = param_or<std::string>(p, "format", "pgm");
  if (f == "pgm") return ImageFormat::Pgm;
  if (f == "png") return ImageFormat::Png;
  throw ConfigError("image format must be pgm or png, got '" + f + "'");
}

inline GenerateOutcome cmd_generate(const CommandContext& ctx) {
  const auto spec = resolve_series_spec(ctx.params);
  const auto dir = output_dir(ctx, "series-" + to_string(spec.kind));
  auto outcome = write_series(spec, dir, resolve_image_format(ctx.params));
  write_run_manifest({"generate", ctx.config_path, resolved_params(ctx.params, true), spec.seed, dir, utc_timestamp()});
  ctx.out() << "generated " << outcome.manifest.files.size() << " " << to_string(spec.kind) << " images in "
            << dir.string() << "\n";
  for (std::size_t i = 0; i < outcome.manifest.files.size(); ++i) {
    ctx.out() << "  " << outcome.manifest.files[i] << "  delta " << spec.deltas[i] << "%"
              << (outcome.manifest.rounded[i] ? "  (rounded)" : "") << "\n";
  }
  return outcome;
}

inline std::vector<ReportFormat> resolve_report_formats(const json& p) {
  return parse_report_formats(param_or<std::string>(p, "format", "csv,json,svg"));
}

inline RunOptions resolve_run_options(const json& p) { return {param_or<std::size_t>(p, "workers", 1)}; }

/// Loads a series directory (or its manifest.json) and runs the analysis.
inline SeriesResult analyze_series(const fs::path& input, const json& params) {
  const fs::path manifest_path = fs::is_directory(input) ? input / "manifest.json" : input;
  if (!fs::exists(manifest_path)) throw InputError("no series manifest at " + manifest_path.string());
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto manifest = SeriesManifest::from_json(j);
  const fs::path base = manifest_path.parent_path();

  std::vector<GrayImage> images;
  for (const auto& file : manifest.files) images.push_back(load_image(base / file));
  auto result = run_series(images, manifest.spec.deltas, resolve_som(params), resolve_strategy(params),
                           resolve_mode(params), resolve_run_options(params));
  result.series_id = to_string(manifest.spec.kind);
  result.spec = manifest.spec;
  return result;
}

inline void print_result(std::ostream& os, const SeriesResult& r) {
  os << r.series_id << "  mode=" << to_string(r.mode) << "  strategy=" << strategy_name(r.strategy) << "\n";
  for (const auto& rec : r.records) {
    os << "  image " << std::setw(2) << rec.index << "  delta " << std::setw(6) << rec.delta_pct
       << "%  QE " << std::setprecision(6) << std::fixed << rec.qe << std::defaultfloat << "\n";
  }
  os << "  fit: slope " << r.fit.slope << "  intercept " << r.fit.intercept << "  r2 " << r.fit.r2
     << (r.fit.degenerate ? "  (degenerate)" : "") << "\n";
}

inline SeriesResult cmd_analyze(const CommandContext& ctx, const fs::path& input) {
  auto result = analyze_series(input, ctx.params);
  const auto dir = output_dir(ctx, (fs::is_directory(input) ? input : input.parent_path()).string() + "/reports");
  ReportOptions opt{param_or(ctx.params, "with_timing", true)};
  // Report files are named after the series and mode so both modes can share a directory.
  SeriesResult named = result;
  if (result.mode == TrainingMode::PerImage) named.series_id += "-per-image";
  for (const auto& path : emit_report(named, dir, resolve_report_formats(ctx.params), opt))
    ctx.out() << "wrote " << path.string() << "\n";
  write_run_manifest({"analyze", ctx.config_path, resolved_params(ctx.params, false), result.som.seed, dir,
                      utc_timestamp()});
  print_result(ctx.out(), result);
  return result;
}

struct ReplicateOutcome {
  std::vector<SeriesResult> results;
  fs::path dir;
};

/// Generates, analyzes and reports all five default series, plus summary.csv.
/// Reports omit wall times unless `with_timing` is set, so reruns with the
/// same seed are byte-identical.
inline ReplicateOutcome cmd_replicate(const CommandContext& ctx) {
  const auto dir = output_dir(ctx, "replicate");
  ensure_dir(dir);
  const auto som = resolve_som(ctx.params);
  const auto strategy = resolve_strategy(ctx.params);
  const auto mode = resolve_mode(ctx.params);
  const auto formats = resolve_report_formats(ctx.params);
  const ReportOptions opt{param_or(ctx.params, "with_timing", false)};
  const bool save_images = param_or(ctx.params, "save_images", false);
  const auto run_opts = resolve_run_options(ctx.params);

  write_run_manifest({"replicate", ctx.config_path, resolved_params(ctx.params, false), som.seed, dir,
                      utc_timestamp()});

  ReplicateOutcome outcome{{}, dir};
  std::string summary = "series_id,images,slope,intercept,r2,degenerate,qe_strictly_increasing\n";
  for (auto kind : kAllSeriesKinds) {
    auto spec = SeriesSpec::defaults(kind);
    spec.seed = som.seed;
    if (ctx.params.contains("width")) spec.width = ctx.params["width"].get<std::size_t>();
    if (ctx.params.contains("height")) spec.height = ctx.params["height"].get<std::size_t>();
    if (save_images) write_series(spec, dir / "series" / to_string(kind), ImageFormat::Pgm);

    auto result = run_generated_series(spec, som, strategy, mode, run_opts);
    emit_report(result, dir, formats, opt);
    summary += result.series_id + "," + std::to_string(result.records.size()) + "," +
               detail::fmt_double(result.fit.slope) + "," + detail::fmt_double(result.fit.intercept) + "," +
               detail::fmt_double(result.fit.r2) + "," + (result.fit.degenerate ? "true" : "false") + "," +
               (result.qe_strictly_increasing() ? "true" : "false") + "\n";
    print_result(ctx.out(), result);
    outcome.results.push_back(std::move(result));
  }
  detail::write_text(dir / "summary.csv", summary);

  ctx.out() << "\nsummary (" << dir.string() << "/summary.csv)\n";
  for (const auto& r : outcome.results) {
    ctx.out() << "  " << std::left << std::setw(16) << r.series_id << std::right << " r2 = " << std::fixed
              << std::setprecision(4) << r.fit.r2 << std::defaultfloat
              << (r.qe_strictly_increasing() ? "  QE increasing" : "  QE NOT increasing") << "\n";
  }
  return outcome;
}

struct BenchReport {
  std::size_t count = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  double generate_ms = 0.0;
  double analysis_ms = 0.0;  // training plus scoring of every image
  std::vector<double> per_image_ms;
  double limit_ms = 60000.0;
  bool pass = false;

  json to_json() const {
    return {{"count", count},          {"width", width},       {"height", height},
            {"generate_ms", generate_ms}, {"analysis_ms", analysis_ms}, {"per_image_ms", per_image_ms},
            {"limit_ms", limit_ms},    {"pass", pass}};
  }
};

/// Times a reference-trained run over `count` random-white images
/// (deltas spread evenly over 0..60 percentage points).
inline BenchReport run_bench(std::size_t count, std::size_t width, std::size_t height, const SomConfig& som,
                             const ExtractionStrategy& strategy, RunOptions run_opts = {}) {
  if (count == 0) throw ConfigError("bench needs at least one image");
  using Clock = std::chrono::steady_clock;
  SeriesSpec spec = SeriesSpec::defaults(SeriesKind::RandomWhite);
  spec.width = width;
  spec.height = height;
  spec.seed = som.seed;
  spec.deltas.clear();
  for (std::size_t i = 0; i < count; ++i)
    spec.deltas.push_back(count == 1 ? 0.0 : 60.0 * static_cast<double>(i) / static_cast<double>(count - 1));

  BenchReport report;
  report.count = count;
  report.width = width;
  report.height = height;
  const auto g0 = Clock::now();
  const auto series = generate_series(spec);
  report.generate_ms = std::chrono::duration<double, std::milli>(Clock::now() - g0).count();

  const auto a0 = Clock::now();
  const auto result = run_series(series.images, spec.deltas, som, strategy, TrainingMode::ReferenceTrained, run_opts);
  report.analysis_ms = std::chrono::duration<double, std::milli>(Clock::now() - a0).count();
  for (const auto& rec : result.records) report.per_image_ms.push_back(rec.ms);
  report.pass = report.analysis_ms < report.limit_ms;
  return report;
}

inline BenchReport cmd_bench(const CommandContext& ctx) {
  const auto som = resolve_som(ctx.params);
  const auto count = param_or<std::size_t>(ctx.params, "count", 20);
  const auto width = param_or<std::size_t>(ctx.params, "width", 792);
  const auto height = param_or<std::size_t>(ctx.params, "height", 777);
  const auto report = run_bench(count, width, height, som, resolve_strategy(ctx.params),
                                resolve_run_options(ctx.params));
  const auto dir = output_dir(ctx, "bench");
  write_run_manifest({"bench", ctx.config_path, resolved_params(ctx.params, false), som.seed, dir, utc_timestamp()});
  write_json(dir / "bench.json", report.to_json());

  auto& os = ctx.out();
  os << "bench: " << count << " images at " << width << "x" << height << "\n";
  for (std::size_t i = 0; i < report.per_image_ms.size(); ++i)
    os << "  image " << std::setw(2) << i + 1 << "  " << std::fixed << std::setprecision(1) << report.per_image_ms[i]
       << " ms" << (i == 0 ? " (includes training)" : "") << "\n";
  os << "  generation " << report.generate_ms << " ms\n";
  os << "  training + scoring " << report.analysis_ms << " ms  (limit " << report.limit_ms << " ms)  "
     << (report.pass ? "PASS" : "FAIL") << std::defaultfloat << "\n";
  return report;
}

}  // namespace somqe::cli
