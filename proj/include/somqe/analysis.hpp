#pragma once

#include <chrono>
#include <cmath>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "somqe/errors.hpp"
#include "somqe/features.hpp"
#include "somqe/image.hpp"
#include "somqe/series.hpp"
#include "somqe/som.hpp"

namespace somqe {

enum class TrainingMode {
  ReferenceTrained,  // train once on image 1, score every image on the frozen map
  PerImage,          // fresh map per image (seed + index), report its own QE
};

inline std::string to_string(TrainingMode mode) {
  return mode == TrainingMode::ReferenceTrained ? "reference" : "per-image";
}

inline TrainingMode parse_training_mode(const std::string& name) {
  if (name == "reference") return TrainingMode::ReferenceTrained;
  if (name == "per-image") return TrainingMode::PerImage;
  throw ConfigError("unknown training mode '" + name + "'");
}

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
  bool degenerate = false;

  bool operator==(const RegressionFit&) const = default;
};

/// Ordinary least squares y = slope * x + intercept. Constant x or constant y
/// yields a degenerate fit with r2 = 0 instead of an exception.
inline RegressionFit linear_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw InputError("linear fit needs at least two points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }

  RegressionFit fit;
  fit.n = points.size();
  if (sxx == 0.0) {
    fit.degenerate = true;
    fit.intercept = my;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.degenerate = true;
    return fit;
  }
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - (fit.slope * x + fit.intercept);
    ss_res += e * e;
  }
  fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

struct ImageRecord {
  std::size_t index = 0;  // 1-based position in the series
  double delta_pct = 0.0;
  double qe = 0.0;
  double ms = 0.0;

  bool operator==(const ImageRecord&) const = default;
};

struct SeriesResult {
  std::string series_id;
  std::optional<SeriesSpec> spec;  // present when the series came from a generator
  TrainingMode mode = TrainingMode::ReferenceTrained;
  ExtractionStrategy strategy = Patch{4};
  SomConfig som;
  std::vector<ImageRecord> records;
  RegressionFit fit;
  double total_ms = 0.0;

  bool qe_strictly_increasing() const {
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (!(records[i].qe > records[i - 1].qe)) return false;
    }
    return true;
  }

  bool operator==(const SeriesResult&) const = default;
};

struct RunOptions {
  std::size_t workers = 1;  // concurrent scoring/training; results do not depend on it
};

/// Trains and scores a series. `som.dim` is overwritten with the strategy's
/// feature dimension. Records are in image order whatever the worker count.
inline SeriesResult run_series(std::span<const GrayImage> images, std::span<const double> deltas, SomConfig som,
                               const ExtractionStrategy& strategy, TrainingMode mode, RunOptions options = {}) {
  using Clock = std::chrono::steady_clock;
  auto elapsed_ms = [](Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
  };

  if (images.empty()) throw InputError("series has no images");
  if (images.size() != deltas.size()) throw InputError("deltas are not aligned with images");
  for (const auto& img : images) {
    if (img.width != images[0].width || img.height != images[0].height)
      throw InputError("series images differ in size");
  }
  som.dim = feature_dim(strategy);
  som.validate();

  const auto t0 = Clock::now();
  SeriesResult result;
  result.mode = mode;
  result.strategy = strategy;
  result.som = som;
  result.records.resize(images.size());

  auto run_parallel = [&](auto&& job) {
    const std::size_t workers = std::max<std::size_t>(1, options.workers);
    if (workers == 1) {
      for (std::size_t i = 0; i < images.size(); ++i) job(i);
      return;
    }
    for (std::size_t begin = 0; begin < images.size(); begin += workers) {
      std::vector<std::future<void>> batch;
      for (std::size_t i = begin; i < std::min(images.size(), begin + workers); ++i)
        batch.push_back(std::async(std::launch::async, job, i));
      for (auto& f : batch) f.get();
    }
  };

  if (mode == TrainingMode::ReferenceTrained) {
    const auto train_start = Clock::now();
    const SomGrid map = train(init_grid(som), extract_vectors(images[0], strategy));
    const double train_ms = elapsed_ms(train_start);
    run_parallel([&](std::size_t i) {
      const auto start = Clock::now();
      const double qe = quantization_error(map, extract_vectors(images[i], strategy));
      result.records[i] = {i + 1, deltas[i], qe, elapsed_ms(start) + (i == 0 ? train_ms : 0.0)};
    });
  } else {
    run_parallel([&](std::size_t i) {
      const auto start = Clock::now();
      SomConfig cfg = som;
      cfg.seed = som.seed + i;
      const auto data = extract_vectors(images[i], strategy);
      const double qe = quantization_error(train(init_grid(cfg), data), data);
      result.records[i] = {i + 1, deltas[i], qe, elapsed_ms(start)};
    });
  }

  if (images.size() >= 2) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : result.records) pts.emplace_back(r.delta_pct, r.qe);
    result.fit = linear_fit(pts);
  } else {
    result.fit = RegressionFit{0.0, result.records[0].qe, 0.0, 1, true};
  }
  result.total_ms = elapsed_ms(t0);
  return result;
}

/// Generates the series described by `spec` and runs it.
inline SeriesResult run_generated_series(const SeriesSpec& spec, const SomConfig& som,
                                         const ExtractionStrategy& strategy, TrainingMode mode,
                                         RunOptions options = {}) {
  const auto series = generate_series(spec);
  auto result = run_series(series.images, spec.deltas, som, strategy, mode, options);
  result.series_id = to_string(spec.kind);
  result.spec = spec;
  return result;
}

}  // namespace somqe
