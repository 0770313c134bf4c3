#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "somqe/som.hpp"

using namespace somqe;

namespace {

SomGrid make_grid(std::size_t rows, std::size_t cols, std::size_t dim, std::vector<double> weights) {
  SomConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.dim = dim;
  return SomGrid(cfg, std::move(weights));
}

std::vector<std::vector<double>> cell_weights(const SomGrid& grid) {
  std::vector<std::vector<double>> out;
  for (std::size_t j = 0; j < grid.cells(); ++j) out.emplace_back(grid.weight(j).begin(), grid.weight(j).end());
  return out;
}

}  // namespace

TEST(SomConfig, RejectsInvalidShapes) {
  SomConfig cfg;
  cfg.rows = 0;
  EXPECT_THROW(init_grid(cfg), ConfigError);
  cfg = {};
  cfg.dim = 0;
  EXPECT_THROW(init_grid(cfg), ConfigError);
  cfg = {};
  cfg.initial_learning_rate = 0.0;
  EXPECT_THROW(init_grid(cfg), ConfigError);
  cfg.initial_learning_rate = 1.5;
  EXPECT_THROW(init_grid(cfg), ConfigError);
  cfg = {};
  cfg.initial_radius = -1.0;
  EXPECT_THROW(init_grid(cfg), ConfigError);
}

TEST(InitGrid, DeterministicPerSeed) {
  SomConfig cfg;
  cfg.seed = 7;
  EXPECT_EQ(init_grid(cfg), init_grid(cfg));
  SomConfig other = cfg;
  other.seed = 8;
  EXPECT_NE(init_grid(cfg).weights()[0], init_grid(other).weights()[0]);
}

TEST(InitGrid, ShapeAndRange) {
  SomConfig cfg;  // 4x4, dim 16
  const auto grid = init_grid(cfg);
  EXPECT_EQ(grid.cells(), 16u);
  EXPECT_EQ(grid.weights().size(), 256u);
  for (double w : grid.weights()) {
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0);
  }
}

TEST(InitGrid, DegenerateSingleCell) {
  SomConfig cfg;
  cfg.rows = cfg.cols = cfg.dim = 1;
  const auto grid = init_grid(cfg);
  ASSERT_EQ(grid.weights().size(), 1u);
  EXPECT_GE(grid.weights()[0], 0.0);
  EXPECT_LE(grid.weights()[0], 1.0);
}

TEST(FindBmu, HandComputed) {
  const auto grid = make_grid(1, 2, 1, {0.0, 1.0});
  const std::vector<double> x{0.9};
  const auto bmu = find_bmu(grid, x);
  EXPECT_EQ(bmu.row, 0u);
  EXPECT_EQ(bmu.col, 1u);
  EXPECT_NEAR(bmu.distance, 0.1, 1e-15);
}

TEST(FindBmu, ExactMatchHasZeroDistance) {
  const auto grid = init_grid(SomConfig{});
  const std::vector<double> x(grid.weight(2, 3).begin(), grid.weight(2, 3).end());
  const auto bmu = find_bmu(grid, x);
  EXPECT_EQ(bmu.row, 2u);
  EXPECT_EQ(bmu.col, 3u);
  EXPECT_EQ(bmu.distance, 0.0);
}

TEST(FindBmu, TiesGoToLowestRowMajorIndex) {
  // Cells 1 and 2 are equally close to 0.5.
  const auto grid = make_grid(2, 2, 1, {0.0, 0.25, 0.75, 1.0});
  const std::vector<double> x{0.5};
  const auto bmu = find_bmu(grid, x);
  EXPECT_EQ(bmu.row, 0u);
  EXPECT_EQ(bmu.col, 1u);
}

TEST(FindBmu, DimensionMismatch) {
  const auto grid = init_grid(SomConfig{});
  const std::vector<double> x(3, 0.0);
  EXPECT_THROW(find_bmu(grid, x), InputError);
}

TEST(FindBmu, MatchesExhaustiveScan) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    SomConfig cfg;
    cfg.seed = rng();
    const auto grid = init_grid(cfg);
    std::vector<double> x(16);
    for (auto& v : x) v = u(rng);
    const auto got = find_bmu(grid, x);
    const auto want = oracle::nearest(cell_weights(grid), x);
    EXPECT_EQ(got.row * 4 + got.col, want.cell);
    EXPECT_LE(oracle::relative_error(got.distance, want.distance), 1e-12);
  }
}

TEST(NeighborhoodFactor, Values) {
  EXPECT_EQ(neighborhood_factor(0.0, 1.2), 1.0);
  EXPECT_EQ(neighborhood_factor(0.0, 5.0), 1.0);
  EXPECT_NEAR(neighborhood_factor(1.2, 1.2), 0.6065306597126334, 1e-15);
  // exp(-9 / 2.88), evaluated independently.
  EXPECT_NEAR(neighborhood_factor(3.0, 1.2), 0.04393693362340742, 1e-15);
  EXPECT_THROW(neighborhood_factor(1.0, 0.0), ConfigError);
}

TEST(NeighborhoodFactor, StrictlyDecreasingInDistance) {
  double prev = neighborhood_factor(0.0, 1.2);
  for (int i = 1; i <= 60; ++i) {
    const double cur = neighborhood_factor(0.1 * i, 1.2);
    EXPECT_LT(cur, prev);
    EXPECT_GT(cur, 0.0);
    prev = cur;
  }
}

TEST(DecayAt, Values) {
  EXPECT_EQ(decay_at(0.2, 0, 10000), 0.2);
  EXPECT_NEAR(decay_at(0.2, 10000, 10000), 0.07357588823428847, 1e-15);
  EXPECT_NEAR(decay_at(1.2, 5000, 10000), 0.7278367916551601, 1e-15);
  EXPECT_THROW(decay_at(0.2, 0, 0), ConfigError);
  EXPECT_THROW(decay_at(0.2, 11, 10), InputError);
}

TEST(DecayAt, StrictlyDecreasing) {
  for (std::size_t t = 1; t <= 1000; ++t) EXPECT_LT(decay_at(0.2, t, 1000), decay_at(0.2, t - 1, 1000));
}

TEST(Train, ZeroIterationsIsIdentity) {
  SomConfig cfg;
  cfg.dim = 2;
  cfg.iterations = 0;
  const auto grid = init_grid(cfg);
  const FeatureDataset data(2, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(train(grid, data), grid);
}

TEST(Train, BitReproducible) {
  SomConfig cfg;
  cfg.dim = 3;
  cfg.seed = 99;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> values(300);
  for (auto& v : values) v = u(rng);
  const FeatureDataset data(3, values);
  const auto a = train(init_grid(cfg), data);
  const auto b = train(init_grid(cfg), data);
  EXPECT_EQ(a, b);
  cfg.seed = 100;
  EXPECT_NE(a, train(init_grid(cfg), data));
}

TEST(Train, ExponentialRadiusScheduleIsSelectableAndDiffers) {
  SomConfig cfg;
  cfg.dim = 2;
  const FeatureDataset data(2, {0.0, 0.0, 1.0, 1.0, 0.0, 1.0});
  auto expo = cfg;
  expo.radius_schedule = RadiusSchedule::Exponential;
  EXPECT_NE(train(init_grid(cfg), data).weights()[0], train(init_grid(expo), data).weights()[0]);
}

TEST(Train, ConvergesOnSingleRepeatedVector) {
  SomConfig cfg;
  cfg.dim = 4;
  const std::vector<double> v{0.3, 0.7, 0.1, 0.9};
  std::vector<double> values;
  for (int i = 0; i < 50; ++i) values.insert(values.end(), v.begin(), v.end());
  const FeatureDataset data(4, values);
  const auto trained = train(init_grid(cfg), data);
  const auto bmu = find_bmu(trained, v);
  EXPECT_LT(bmu.distance, 0.01);
}

TEST(Train, SingleVectorContractionIsMonotone) {
  // With one training vector every update is a convex step towards it, so no
  // weight can move away and the BMU distance never grows.
  SomConfig cfg;
  cfg.dim = 4;
  cfg.iterations = 100;
  const std::vector<double> v{0.3, 0.7, 0.1, 0.9};
  const FeatureDataset data(4, v);
  auto grid = init_grid(cfg);
  double prev = find_bmu(grid, v).distance;
  for (int chunk = 0; chunk < 100; ++chunk) {
    grid = train(grid, data);
    const double d = find_bmu(grid, v).distance;
    EXPECT_LE(d, prev) << "after chunk " << chunk;
    prev = d;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Train, DimensionMismatch) {
  SomConfig cfg;
  const FeatureDataset data(2, {0.1, 0.2});
  EXPECT_THROW(train(init_grid(cfg), data), InputError);
}

TEST(FeatureDataset, Validation) {
  EXPECT_THROW(FeatureDataset(2, {}), InputError);
  EXPECT_THROW(FeatureDataset(2, {0.1, 0.2, 0.3}), InputError);
  EXPECT_THROW(FeatureDataset(1, {1.5}), InputError);
  EXPECT_THROW(FeatureDataset(0, {0.5}), InputError);
}

TEST(QuantizationError, HandComputed) {
  const auto grid = make_grid(1, 2, 1, {0.0, 1.0});
  const FeatureDataset data(1, {0.1, 0.9});
  EXPECT_NEAR(quantization_error(grid, data), 0.1, 1e-15);
}

TEST(QuantizationError, ZeroWhenDataSitsOnWeights) {
  const auto grid = init_grid(SomConfig{});
  std::vector<double> values;
  for (std::size_t j : {0u, 5u, 5u, 15u}) values.insert(values.end(), grid.weight(j).begin(), grid.weight(j).end());
  EXPECT_EQ(quantization_error(grid, FeatureDataset(16, values)), 0.0);
}

TEST(QuantizationError, Errors) {
  const auto grid = init_grid(SomConfig{});
  EXPECT_THROW(quantization_error(grid, FeatureDataset(2, {0.1, 0.2})), InputError);
  EXPECT_THROW(quantization_error(grid, std::span<const double>{}, 16), InputError);
}

TEST(QuantizationError, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SomConfig cfg;
  cfg.seed = 3;
  const auto grid = init_grid(cfg);
  std::vector<double> values(100 * 16);
  for (auto& v : values) v = u(rng);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < 100; ++i) rows.emplace_back(values.begin() + i * 16, values.begin() + (i + 1) * 16);
  const double got = quantization_error(grid, FeatureDataset(16, values));
  EXPECT_LE(oracle::relative_error(got, oracle::mean_nearest(cell_weights(grid), rows)), 1e-12);
}

TEST(QuantizationError, IndependentOfWorkerCount) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = init_grid(SomConfig{});
  std::vector<double> values(997 * 16);
  for (auto& v : values) v = u(rng);
  const FeatureDataset data(16, values);
  const double one = quantization_error(grid, data, 1);
  for (std::size_t w : {2u, 3u, 8u}) EXPECT_EQ(quantization_error(grid, data, w), one);
}

TEST(QuantizationError, PermutationInvariant) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = init_grid(SomConfig{});
  const std::size_t n = 200;
  std::vector<double> values(n * 16);
  for (auto& v : values) v = u(rng);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> shuffled;
  for (auto i : perm) shuffled.insert(shuffled.end(), values.begin() + i * 16, values.begin() + (i + 1) * 16);
  EXPECT_LE(oracle::relative_error(quantization_error(grid, FeatureDataset(16, values)),
                                   quantization_error(grid, FeatureDataset(16, shuffled))),
            1e-12);
}

TEST(QuantizationError, NonNegativeAndZeroOnlyOnExactFit) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    SomConfig cfg;
    cfg.seed = rng();
    const auto grid = init_grid(cfg);
    std::vector<double> values(10 * 16);
    for (auto& v : values) v = u(rng);
    EXPECT_GT(quantization_error(grid, FeatureDataset(16, values)), 0.0);
  }
}
