#pragma once

// Synthetic benchmark: planted instances Y = A ⊞ B + a R and comparisons of
// the descent variants on them.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tropfact/descent.hpp"
#include "tropfact/maxplus.hpp"

namespace tropfact {

struct SyntheticInstance {
  MaxPlusMatrix y;
  MaxPlusMatrix a_true;
  MaxPlusMatrix b_true;
  MaxPlusMatrix noise;  // R, entries in [0, 1]
  double a = 0.0;
  std::uint64_t seed = 0;

  // a * ||R||_F, the normalizer of reported errors.
  double noise_norm() const;
};

SyntheticInstance gen_synthetic(std::size_t n, std::size_t r, std::size_t p, double a,
                                std::uint64_t seed);

// Planted compression instance Y = A ⊞ (B X), all factor entries uniform [0, 1].
struct PlantedCompression {
  MaxPlusMatrix y;
  MaxPlusMatrix a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd x;
};

PlantedCompression gen_planted_tc(std::size_t n, std::size_t m, std::size_t p, std::size_t cols,
                                  std::uint64_t seed);

struct Shape {
  std::size_t n = 10;
  std::size_t r = 5;
  std::size_t p = 11;
};

struct AlgorithmSpec {
  std::string name;
  DescentOptions options;  // max_iters and seed are set per run
};

// GD, GDMN, GDAN-ZM and GDAN-NZM sharing the step size and schedules of base.
std::vector<AlgorithmSpec> standard_algorithms(const DescentOptions& base);

struct AlgorithmStats {
  std::string name;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single trial
  std::vector<double> errors;
};

struct BenchReport {
  Shape shape;
  double a = 0.0;
  std::size_t trials = 0;
  std::size_t iters = 0;
  std::uint64_t seed = 0;
  bool normalized = true;  // false when a = 0: absolute Frobenius errors
  std::vector<AlgorithmStats> algorithms;
};

// Error reported for a run: sqrt of the smallest objective in the trace,
// divided by a * ||R||_F when a > 0.
double report_error(const SyntheticInstance& instance, double squared_objective);

// Every trial draws a fresh instance and one shared starting point used by
// all algorithms. Trials run on up to `jobs` threads; aggregation follows
// trial order.
BenchReport run_comparison(const Shape& shape, double a, const std::vector<AlgorithmSpec>& algorithms,
                           std::size_t trials, std::size_t iters, std::uint64_t seed,
                           std::size_t jobs = 1);

struct CurveSeries {
  std::string name;
  std::vector<double> errors;  // per iteration, 0..iters
};

// One error series per config, all from the same instance and start.
std::vector<CurveSeries> convergence_curves(const SyntheticInstance& instance, std::size_t r,
                                            const std::vector<AlgorithmSpec>& configs,
                                            std::size_t iters, std::uint64_t seed);

nlohmann::json to_json(const BenchReport& report);
void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveSeries>& curves);

}  // namespace tropfact
