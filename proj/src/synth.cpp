#include "tropfact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>

#include "tropfact/errors.hpp"
#include "tropfact/matrix_io.hpp"
#include "tropfact/tc.hpp"
#include "tropfact/tmf.hpp"

namespace tropfact {

double SyntheticInstance::noise_norm() const { return a * frobenius_norm(noise); }

SyntheticInstance gen_synthetic(std::size_t n, std::size_t r, std::size_t p, double a,
                                std::uint64_t seed) {
  if (n == 0 || r == 0 || p == 0) throw InvalidArgument("gen_synthetic: sizes must be >= 1");
  if (!(a >= 0.0)) throw InvalidArgument("gen_synthetic: a must be >= 0");
  Rng rng(seed);
  SyntheticInstance inst;
  inst.a_true = uniform_matrix(n, r, rng);
  inst.b_true = uniform_matrix(r, p, rng);
  inst.noise = uniform_matrix(n, p, rng);
  inst.a = a;
  inst.seed = seed;
  inst.y = maxplus_matmul(inst.a_true, inst.b_true);
  if (a > 0.0) {
    auto y = inst.y.data();
    auto noise = inst.noise.data();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * noise[k];
  }
  return inst;
}

PlantedCompression gen_planted_tc(std::size_t n, std::size_t m, std::size_t p, std::size_t cols,
                                  std::uint64_t seed) {
  if (n == 0 || m == 0 || p == 0 || cols == 0) throw InvalidArgument("gen_planted_tc: dimensions must be >= 1");
  Rng rng(seed);
  PlantedCompression out;
  out.a = uniform_matrix(n, m, rng);
  out.b = to_eigen(uniform_matrix(m, p, rng));
  out.x = to_eigen(uniform_matrix(p, cols, rng));
  out.y = tc_predict(out.a, out.b, out.x);
  return out;
}

std::vector<AlgorithmSpec> standard_algorithms(const DescentOptions& base) {
  std::vector<AlgorithmSpec> out;
  for (Variant v : {Variant::kGd, Variant::kGdmn, Variant::kGdanZeroMean, Variant::kGdanNonZeroMean}) {
    AlgorithmSpec spec{std::string(to_string(v)), base};
    spec.options.variant = v;
    out.push_back(std::move(spec));
  }
  return out;
}

double report_error(const SyntheticInstance& instance, double squared_objective) {
  const double err = std::sqrt(squared_objective);
  return instance.a > 0.0 ? err / instance.noise_norm() : err;
}

namespace {

std::vector<double> run_trial(const Shape& shape, double a,
                              const std::vector<AlgorithmSpec>& algorithms, std::size_t iters,
                              std::uint64_t seed, std::size_t trial) {
  const SyntheticInstance inst =
      gen_synthetic(shape.n, shape.r, shape.p, a, derive_seed(seed, "instance", trial));
  const FactorPair start =
      tmf_random_init(shape.n, shape.r, shape.p, derive_seed(seed, "start", trial));
  std::vector<double> errors;
  for (const AlgorithmSpec& algo : algorithms) {
    TmfConfig config;
    static_cast<DescentOptions&>(config) = algo.options;
    config.r = shape.r;
    config.max_iters = iters;
    config.seed = derive_seed(seed, "fit", trial);
    const TmfSolution sol = tmf_fit(inst.y, config, nullptr, start);
    errors.push_back(report_error(inst, sol.best_objective()));
  }
  return errors;
}

}  // namespace

BenchReport run_comparison(const Shape& shape, double a, const std::vector<AlgorithmSpec>& algorithms,
                           std::size_t trials, std::size_t iters, std::uint64_t seed,
                           std::size_t jobs) {
  if (trials == 0) throw InvalidArgument("run_comparison: trials must be >= 1");
  if (algorithms.empty()) throw InvalidArgument("run_comparison: no algorithms");

  std::vector<std::vector<double>> per_trial(trials);
  jobs = std::max<std::size_t>(1, std::min(jobs, trials));
  if (jobs == 1) {
    for (std::size_t t = 0; t < trials; ++t) per_trial[t] = run_trial(shape, a, algorithms, iters, seed, t);
  } else {
    for (std::size_t start = 0; start < trials; start += jobs) {
      std::vector<std::future<std::vector<double>>> batch;
      for (std::size_t t = start; t < std::min(trials, start + jobs); ++t) {
        batch.push_back(std::async(std::launch::async, run_trial, std::cref(shape), a,
                                   std::cref(algorithms), iters, seed, t));
      }
      for (std::size_t t = 0; t < batch.size(); ++t) per_trial[start + t] = batch[t].get();
    }
  }

  BenchReport report{shape, a, trials, iters, seed, a > 0.0, {}};
  for (std::size_t k = 0; k < algorithms.size(); ++k) {
    AlgorithmStats stats{algorithms[k].name, 0.0, 0.0, {}};
    for (std::size_t t = 0; t < trials; ++t) stats.errors.push_back(per_trial[t][k]);
    double sum = 0.0;
    for (double e : stats.errors) sum += e;
    stats.mean = sum / static_cast<double>(trials);
    if (trials > 1) {
      double ss = 0.0;
      for (double e : stats.errors) ss += (e - stats.mean) * (e - stats.mean);
      stats.std = std::sqrt(ss / static_cast<double>(trials - 1));
    }
    report.algorithms.push_back(std::move(stats));
  }
  return report;
}

std::vector<CurveSeries> convergence_curves(const SyntheticInstance& instance, std::size_t r,
                                            const std::vector<AlgorithmSpec>& configs,
                                            std::size_t iters, std::uint64_t seed) {
  const FactorPair start =
      tmf_random_init(instance.y.rows(), r, instance.y.cols(), derive_seed(seed, "start"));
  std::vector<CurveSeries> out;
  for (const AlgorithmSpec& spec : configs) {
    TmfConfig config;
    static_cast<DescentOptions&>(config) = spec.options;
    config.r = r;
    config.max_iters = iters;
    config.patience = 0;
    config.seed = derive_seed(seed, "fit");
    const TmfSolution sol = tmf_fit(instance.y, config, nullptr, start);
    CurveSeries series{spec.name, {}};
    series.errors.reserve(sol.trace.size());
    for (const auto& [k, objective] : sol.trace) series.errors.push_back(report_error(instance, objective));
    out.push_back(std::move(series));
  }
  return out;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json algos = nlohmann::json::array();
  for (const AlgorithmStats& s : report.algorithms) {
    algos.push_back({{"name", s.name}, {"mean", s.mean}, {"std", s.std},
                     {"trials", report.trials}, {"errors", s.errors}});
  }
  return {
      {"config",
       {{"n", report.shape.n},
        {"r", report.shape.r},
        {"p", report.shape.p},
        {"a", report.a},
        {"trials", report.trials},
        {"iters", report.iters},
        {"seed", report.seed},
        {"error", report.normalized ? "best-so-far ||Y - A⊞B||_F / (a ||R||_F)"
                                    : "best-so-far ||Y - A⊞B||_F (absolute, a = 0)"}}},
      {"algorithms", algos},
  };
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveSeries>& curves) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration";
  for (const CurveSeries& c : curves) out << ',' << c.name;
  out << '\n';
  const std::size_t len = curves.empty() ? 0 : curves.front().errors.size();
  for (std::size_t k = 0; k < len; ++k) {
    out << k;
    for (const CurveSeries& c : curves) out << ',' << format_value(k < c.errors.size() ? c.errors[k] : NAN);
    out << '\n';
  }
}

}  // namespace tropfact
