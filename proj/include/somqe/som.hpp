#pragma once

/**
 * Kohonen self-organizing map on a rectangular lattice.
 *
 * The map is trained online: each step draws one input vector, finds the
 * best-matching unit (BMU) and pulls every weight toward the input with a
 * Gaussian neighbourhood over lattice distance. The learning rate decays as
 * a0 * exp(-t / T). The radius is held at its initial value by default; the
 * exponential schedule (same form as the learning rate) is selectable.
 *
 * With a shrinking radius the map ends with exact prototypes for every
 * uniform patch of the reference, and frozen-map QE then no longer tracks
 * the area of newly changed pixels.
 *
 * One seeded Mersenne Twister stream drives the whole run: init_grid draws
 * rows*cols*dim weights from it, and train() re-seeds the same stream and
 * skips those draws before sampling inputs.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "somqe/errors.hpp"
#include "somqe/random.hpp"

namespace somqe {

enum class RadiusSchedule { Constant, Exponential };

inline std::string to_string(RadiusSchedule s) { return s == RadiusSchedule::Constant ? "constant" : "exponential"; }

inline RadiusSchedule parse_radius_schedule(const std::string& name) {
  if (name == "constant") return RadiusSchedule::Constant;
  if (name == "exponential") return RadiusSchedule::Exponential;
  throw ConfigError("unknown radius schedule '" + name + "'");
}

struct SomConfig {
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::size_t dim = 16;
  double initial_radius = 1.2;         // lattice units
  double initial_learning_rate = 0.2;  // in (0, 1]
  std::size_t iterations = 10000;
  std::uint64_t seed = 42;
  RadiusSchedule radius_schedule = RadiusSchedule::Constant;

  std::size_t cells() const { return rows * cols; }

  void validate() const {
    if (rows == 0 || cols == 0) throw ConfigError("SOM grid must have at least one cell");
    if (dim == 0) throw ConfigError("SOM vector dimension must be positive");
    if (!(initial_radius > 0.0) || !std::isfinite(initial_radius))
      throw ConfigError("initial radius must be positive");
    if (!(initial_learning_rate > 0.0 && initial_learning_rate <= 1.0))
      throw ConfigError("initial learning rate must lie in (0, 1]");
  }

  bool operator==(const SomConfig&) const = default;
};

/// Dense set of equal-length vectors with components in [0, 1].
class FeatureDataset {
 public:
  FeatureDataset(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
    if (dim_ == 0) throw InputError("dataset dimension must be positive");
    if (values_.empty()) throw InputError("dataset must not be empty");
    if (values_.size() % dim_ != 0) throw InputError("dataset length is not a multiple of its dimension");
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) throw InputError("dataset component outside [0, 1]");
    }
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return values_.size() / dim_; }
  std::span<const double> vector(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> values() const { return values_; }

  bool operator==(const FeatureDataset&) const = default;

 private:
  std::size_t dim_;
  std::vector<double> values_;
};

struct BmuResult {
  std::size_t row = 0;
  std::size_t col = 0;
  double distance = 0.0;

  bool operator==(const BmuResult&) const = default;
};

/// Lattice of weight vectors, stored row-major by cell then component.
class SomGrid {
 public:
  SomGrid(SomConfig config, std::vector<double> weights) : config_(config), weights_(std::move(weights)) {
    config_.validate();
    if (weights_.size() != config_.cells() * config_.dim)
      throw InputError("weight buffer does not match rows*cols*dim");
    for (double w : weights_) {
      if (!std::isfinite(w)) throw InputError("non-finite SOM weight");
    }
  }

  const SomConfig& config() const { return config_; }
  std::size_t cells() const { return config_.cells(); }

  std::span<const double> weight(std::size_t cell) const {
    return {weights_.data() + cell * config_.dim, config_.dim};
  }
  std::span<const double> weight(std::size_t row, std::size_t col) const {
    return weight(row * config_.cols + col);
  }
  std::span<double> weight_mut(std::size_t cell) { return {weights_.data() + cell * config_.dim, config_.dim}; }
  std::span<const double> weights() const { return weights_; }

  bool operator==(const SomGrid&) const = default;

 private:
  SomConfig config_;
  std::vector<double> weights_;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

inline std::size_t bmu_index(const SomGrid& grid, std::span<const double> x, double& best_sq) {
  std::size_t best = 0;
  best_sq = squared_distance(grid.weight(0), x);
  for (std::size_t j = 1; j < grid.cells(); ++j) {
    const double d = squared_distance(grid.weight(j), x);
    if (d < best_sq) {  // strict: ties keep the lowest index
      best_sq = d;
      best = j;
    }
  }
  return best;
}

}  // namespace detail

inline SomGrid init_grid(const SomConfig& config) {
  config.validate();
  Engine engine(config.seed);
  std::vector<double> weights(config.cells() * config.dim);
  for (double& w : weights) w = uniform01(engine);
  return SomGrid(config, std::move(weights));
}

inline BmuResult find_bmu(const SomGrid& grid, std::span<const double> vector) {
  if (vector.size() != grid.config().dim)
    throw InputError("vector has " + std::to_string(vector.size()) + " components, SOM expects " +
                     std::to_string(grid.config().dim));
  double best_sq = 0.0;
  const std::size_t j = detail::bmu_index(grid, vector, best_sq);
  return {j / grid.config().cols, j % grid.config().cols, std::sqrt(best_sq)};
}

/// Gaussian neighbourhood exp(-d^2 / (2 r^2)).
inline double neighborhood_factor(double grid_distance, double radius) {
  if (!(radius > 0.0)) throw ConfigError("neighbourhood radius must be positive");
  if (!(grid_distance >= 0.0)) throw InputError("grid distance must be non-negative");
  return std::exp(-(grid_distance * grid_distance) / (2.0 * radius * radius));
}

inline double decay_at(double initial_value, std::size_t t, std::size_t total_iterations) {
  if (total_iterations == 0) throw ConfigError("decay needs a positive iteration count");
  if (t > total_iterations) throw InputError("decay step beyond the iteration count");
  return initial_value * std::exp(-static_cast<double>(t) / static_cast<double>(total_iterations));
}

inline SomGrid train(SomGrid grid, const FeatureDataset& data) {
  const SomConfig& cfg = grid.config();
  if (data.dim() != cfg.dim)
    throw InputError("dataset dimension " + std::to_string(data.dim()) + " does not match SOM dimension " +
                     std::to_string(cfg.dim));
  if (cfg.iterations == 0) return grid;

  Engine engine(cfg.seed);
  engine.discard(static_cast<unsigned long long>(cfg.cells() * cfg.dim));

  const std::size_t n = data.size();
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const double alpha = decay_at(cfg.initial_learning_rate, t, cfg.iterations);
    const double sigma = cfg.radius_schedule == RadiusSchedule::Exponential
                             ? decay_at(cfg.initial_radius, t, cfg.iterations)
                             : cfg.initial_radius;
    const auto x = data.vector(static_cast<std::size_t>(uniform_index(engine, n)));

    double ignored = 0.0;
    const std::size_t bmu = detail::bmu_index(grid, x, ignored);
    const double br = static_cast<double>(bmu / cfg.cols);
    const double bc = static_cast<double>(bmu % cfg.cols);

    for (std::size_t j = 0; j < cfg.cells(); ++j) {
      const double dr = static_cast<double>(j / cfg.cols) - br;
      const double dc = static_cast<double>(j % cfg.cols) - bc;
      const double rate = alpha * neighborhood_factor(std::sqrt(dr * dr + dc * dc), sigma);
      auto w = grid.weight_mut(j);
      for (std::size_t k = 0; k < cfg.dim; ++k) w[k] += rate * (x[k] - w[k]);
    }
  }
  return grid;
}

/// Mean BMU distance over raw row-major vectors. Components need not lie in
/// [0, 1]. Distances may be computed by several workers; they are summed in
/// dataset order so the result does not depend on the worker count.
inline double quantization_error(const SomGrid& grid, std::span<const double> vectors, std::size_t dim,
                                 std::size_t workers = 1) {
  if (dim != grid.config().dim)
    throw InputError("dataset dimension " + std::to_string(dim) + " does not match SOM dimension " +
                     std::to_string(grid.config().dim));
  if (vectors.empty() || vectors.size() % dim != 0) throw InputError("quantization error needs a non-empty dataset");

  const std::size_t n = vectors.size() / dim;
  std::vector<double> dist(n);
  auto score = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double sq = 0.0;
      detail::bmu_index(grid, vectors.subspan(i * dim, dim), sq);
      dist[i] = std::sqrt(sq);
    }
  };

  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    score(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t b = 0; b < n; b += chunk) pool.emplace_back(score, b, std::min(n, b + chunk));
  }

  double sum = 0.0;
  for (double d : dist) sum += d;
  return sum / static_cast<double>(n);
}

inline double quantization_error(const SomGrid& grid, const FeatureDataset& data, std::size_t workers = 1) {
  return quantization_error(grid, data.values(), data.dim(), workers);
}

}  // namespace somqe
