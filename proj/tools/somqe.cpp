// somqe: generate synthetic contrast series, score them with a self-organizing
// map's quantization error, and fit QE against the percentage of change.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "somqe/commands.hpp"

namespace {

using somqe::cli::json;

// Every flag binds to an optional; only flags actually given override the
// config file, which in turn overrides the built-in defaults.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> kind;
  std::optional<std::size_t> width, height, cells, rows, cols, iters, patch, count, workers;
  std::optional<std::string> deltas, strategy, mode, out, format, radius_schedule;
  std::optional<double> baseline, radius, alpha;
  std::optional<std::uint64_t> seed;
  bool with_timing = false;
  bool no_timing = false;
  bool save_images = false;

  json to_json() const {
    json j = json::object();
    auto put = [&](const char* key, const auto& opt) {
      if (opt) j[key] = *opt;
    };
    put("kind", kind);
    put("width", width);
    put("height", height);
    put("deltas", deltas);
    put("baseline", baseline);
    put("cells", cells);
    put("seed", seed);
    put("rows", rows);
    put("cols", cols);
    put("radius", radius);
    put("alpha", alpha);
    put("iters", iters);
    put("radius_schedule", radius_schedule);
    put("strategy", strategy);
    put("patch", patch);
    put("mode", mode);
    put("out", out);
    put("format", format);
    put("count", count);
    put("workers", workers);
    if (with_timing) j["with_timing"] = true;
    if (no_timing) j["with_timing"] = false;
    if (save_images) j["save_images"] = true;
    return j;
  }
};

void add_series_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--kind", f.kind,
                  "Series kind: random-white | random-black | checker-count | checker-size | central-square "
                  "[default: random-white]");
  cmd->add_option("--width", f.width, "Image width in pixels [default: 792]");
  cmd->add_option("--height", f.height, "Image height in pixels [default: 777]");
  cmd->add_option("--deltas", f.deltas,
                  "Comma-separated percent change per image [defaults: random-white 0,10,22.5,35,47.5,60; "
                  "random-black 0,20,30; checker-count 8,16,...,72; checker-size 2,4,...,18; "
                  "central-square 1,2,4,8,16,32]");
  cmd->add_option("--baseline", f.baseline, "Foreground percent of the reference image, random kinds [default: 20]");
  cmd->add_option("--cells", f.cells, "Lattice cells per side, checker kinds [default: 5 count, 3 size]");
}

void add_som_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--rows", f.rows, "SOM rows [default: 4]");
  cmd->add_option("--cols", f.cols, "SOM columns [default: 4]");
  cmd->add_option("--radius", f.radius, "Initial neighbourhood radius, lattice units [default: 1.2]");
  cmd->add_option("--alpha", f.alpha, "Initial learning rate in (0,1] [default: 0.2]");
  cmd->add_option("--iters", f.iters, "Training iterations [default: 10000]");
  cmd->add_option("--radius-schedule", f.radius_schedule,
                  "Neighbourhood radius over training: constant | exponential [default: constant]");
  cmd->add_option("--strategy", f.strategy, "Feature extraction: pixel | patch | position [default: patch]");
  cmd->add_option("--patch", f.patch, "Patch side k for --strategy patch [default: 4]");
  cmd->add_option("--mode", f.mode, "Training mode: reference | per-image [default: reference]");
  cmd->add_option("--workers", f.workers, "Concurrent scoring threads; results do not depend on it [default: 1]");
}

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "Seed for image placement and the SOM [default: $SOMQE_SEED, else 42]");
  cmd->add_option("--config", f.config,
                  "JSON config (keys = long flag names, '-' as '_'); a run_manifest.json is accepted too");
}

int report_error(const std::exception& e, int code) {
  std::cerr << "somqe: " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = somqe::cli;
  CLI::App app{"somqe: SOM quantization error as a change indicator for image time series"};
  app.require_subcommand(1);
  Flags flags;
  std::string input;

  auto* gen = app.add_subcommand("generate", "Write a synthetic series (images + manifest.json)");
  add_common_flags(gen, flags);
  add_series_flags(gen, flags);
  gen->add_option("--out", flags.out, "Output directory [default: series-<kind>]");
  gen->add_option("--format", flags.format, "Image format: pgm | png [default: pgm]");

  auto* analyze = app.add_subcommand("analyze", "Train on the reference image and report QE per image");
  analyze->add_option("input", input, "Series directory or its manifest.json")->required();
  add_common_flags(analyze, flags);
  add_som_flags(analyze, flags);
  analyze->add_option("--out", flags.out, "Report directory [default: <series>/reports]");
  analyze->add_option("--format", flags.format, "Report formats, comma-separated: csv,json,svg [default: all]");
  analyze->add_flag("--no-timing", flags.no_timing, "Write ms = 0 instead of measured wall times");

  auto* rep = app.add_subcommand("replicate", "Generate and analyze all five default series");
  add_common_flags(rep, flags);
  add_som_flags(rep, flags);
  rep->add_option("--width", flags.width, "Image width in pixels [default: 792]");
  rep->add_option("--height", flags.height, "Image height in pixels [default: 777]");
  rep->add_option("--out", flags.out, "Output directory [default: replicate]");
  rep->add_option("--format", flags.format, "Report formats, comma-separated: csv,json,svg [default: all]");
  rep->add_flag("--with-timing", flags.with_timing, "Record wall times in reports (breaks byte-identical reruns)");
  rep->add_flag("--save-images", flags.save_images, "Also write the generated images under <out>/series/");

  auto* bench = app.add_subcommand("bench", "Time reference training plus scoring of a random-white series");
  add_common_flags(bench, flags);
  add_som_flags(bench, flags);
  bench->add_option("--count", flags.count, "Number of images [default: 20]");
  bench->add_option("--width", flags.width, "Image width in pixels [default: 792]");
  bench->add_option("--height", flags.height, "Image height in pixels [default: 777]");
  bench->add_option("--out", flags.out, "Directory for bench.json and the run manifest [default: bench]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kInputError;
  }

  try {
    cli::CommandContext ctx;
    ctx.log = &std::cout;
    json file_layer = json::object();
    if (flags.config) {
      file_layer = cli::load_config(*flags.config);
      ctx.config_path = *flags.config;
    }
    ctx.params = cli::merge_params({file_layer, flags.to_json()});

    if (gen->parsed()) {
      cli::cmd_generate(ctx);
    } else if (analyze->parsed()) {
      cli::cmd_analyze(ctx, input);
    } else if (rep->parsed()) {
      cli::cmd_replicate(ctx);
    } else if (bench->parsed()) {
      const auto report = cli::cmd_bench(ctx);
      if (!report.pass) return cli::kFailure;
    }
  } catch (const somqe::IoError& e) {
    return report_error(e, cli::kIoError);
  } catch (const somqe::Error& e) {
    return report_error(e, cli::kInputError);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(e, cli::kIoError);
  } catch (const std::exception& e) {
    return report_error(e, cli::kFailure);
  }
  return cli::kOk;
}
