#include "tropfact/tmf.hpp"

#include <algorithm>
#include <limits>

#include "tropfact/errors.hpp"
#include "tropfact/matrix_io.hpp"

namespace tropfact {

namespace {

void check_mask(const MaxPlusMatrix& y, const ObservationMask* mask) {
  if (!mask) return;
  if (mask->rows() != y.rows() || mask->cols() != y.cols()) {
    throw InvalidArgument("mask shape does not match Y");
  }
  if (mask->empty()) throw InvalidArgument("mask is empty");
}

void check_factors(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const MaxPlusMatrix& b) {
  if (a.rows() != y.rows() || b.cols() != y.cols() || a.cols() != b.rows()) {
    throw InvalidArgument("factor shapes " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + " do not fit Y " +
                          std::to_string(y.rows()) + "x" + std::to_string(y.cols()));
  }
  a.check_entries();
  b.check_entries();
}

}  // namespace

double TmfSolution::best_objective() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [k, value] : trace) best = std::min(best, value);
  return best;
}

FactorPair tmf_random_init(std::size_t n, std::size_t r, std::size_t p, std::uint64_t seed) {
  Rng rng = make_rng(seed, "init");
  MaxPlusMatrix a = uniform_matrix(n, r, rng);
  MaxPlusMatrix b = uniform_matrix(r, p, rng);
  return {std::move(a), std::move(b)};
}

FactorPair tmf_step(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const MaxPlusMatrix& b,
                    const DescentOptions& config, std::size_t k, const ObservationMask* mask,
                    DescentStreams& streams) {
  check_mask(y, mask);
  check_factors(y, a, b);
  std::vector<std::size_t> owned;
  std::span<const std::size_t> cells;
  if (mask) {
    cells = mask->cells();
  } else {
    owned = all_cells(y.rows(), y.cols());
    cells = owned;
  }
  StepResult step = descent_step(y, cells, a, b, config, k, streams);
  return {std::move(step.left), std::move(step.right)};
}

TmfSolution tmf_fit(const MaxPlusMatrix& y, const TmfConfig& config, const ObservationMask* mask,
                    const std::optional<FactorPair>& init) {
  config.validate();
  check_mask(y, mask);
  if (config.r == 0 || config.r > std::min(y.rows(), y.cols())) {
    throw InvalidArgument("r must satisfy 1 <= r <= min(n, p), got " + std::to_string(config.r));
  }
  FactorPair start = init ? *init : tmf_random_init(y.rows(), config.r, y.cols(), config.seed);
  if (start.first.cols() != config.r) throw InvalidArgument("initial factors disagree with r");
  check_factors(y, start.first, start.second);

  DescentRun run = run_descent(y, mask, std::move(start.first), std::move(start.second), config);
  return {std::move(run.left), std::move(run.right), std::move(run.trace), run.iterations_run};
}

double tmf_objective(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const MaxPlusMatrix& b,
                     const ObservationMask* mask) {
  const MaxPlusMatrix product = maxplus_matmul(a, b);
  if (product.rows() != y.rows() || product.cols() != y.cols()) {
    throw InvalidArgument("tmf_objective: A ⊞ B does not match the shape of Y");
  }
  const double e = frobenius_error(y, product, mask);
  return e * e;
}

void save_solution(const std::filesystem::path& dir, const TmfSolution& solution) {
  std::filesystem::create_directories(dir);
  write_matrix(dir / "A.csv", solution.a);
  write_matrix(dir / "B.csv", solution.b);
  write_trace(dir / "trace.csv", solution.trace);
}

}  // namespace tropfact
