#include "tropfact/tc.hpp"

#include <algorithm>

#include "tropfact/errors.hpp"
#include "tropfact/matrix_io.hpp"

namespace tropfact {

namespace {

using Svd = Eigen::BDCSVD<Eigen::MatrixXd>;

Svd thin_svd(const Eigen::MatrixXd& c) {
  return Svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

std::size_t rank_of(const Eigen::VectorXd& sigma, double tolerance) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cutoff = tolerance * sigma(0);
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k)
    if (sigma(k) > cutoff) ++rank;
  return rank;
}

}  // namespace

MaxPlusMatrix tc_predict(const MaxPlusMatrix& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& x) {
  if (static_cast<Eigen::Index>(a.cols()) != b.rows() || b.cols() != x.rows()) {
    throw InvalidArgument("tc_predict: shapes " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + ", " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ", " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()) + " are incompatible");
  }
  const Eigen::MatrixXd c = b * x;
  return maxplus_matmul(a, from_eigen(c));
}

Eigen::MatrixXd rank_projection(const Eigen::MatrixXd& c, std::size_t p) {
  if (p == 0) throw InvalidArgument("rank_projection: p must be >= 1");
  const auto full = static_cast<std::size_t>(std::min(c.rows(), c.cols()));
  if (p >= full) return c;
  const Svd svd = thin_svd(c);
  const auto k = static_cast<Eigen::Index>(p);
  return svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

std::size_t numerical_rank(const Eigen::MatrixXd& c, double tolerance) {
  if (c.size() == 0) return 0;
  Svd svd(c);
  return rank_of(svd.singularValues(), tolerance);
}

RankFactors rank_factorize(const Eigen::MatrixXd& c, std::size_t p) {
  RankFactors out{Eigen::MatrixXd::Zero(c.rows(), static_cast<Eigen::Index>(p)),
                  Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), c.cols())};
  if (c.size() == 0) return out;
  const Svd svd = thin_svd(c);
  const std::size_t rank = rank_of(svd.singularValues(), kRankTolerance);
  if (rank > p) {
    throw InfeasibleRank("matrix has numerical rank " + std::to_string(rank) +
                         ", above the requested " + std::to_string(p));
  }
  const auto k = static_cast<Eigen::Index>(rank);
  const Eigen::VectorXd root = svd.singularValues().head(k).cwiseSqrt();
  out.b.leftCols(k) = svd.matrixU().leftCols(k) * root.asDiagonal();
  out.x.topRows(k) = root.asDiagonal() * svd.matrixV().leftCols(k).transpose();
  return out;
}

std::pair<MaxPlusMatrix, MaxPlusMatrix> tc_random_init(std::size_t n, std::size_t m,
                                                       std::size_t cols, std::uint64_t seed) {
  Rng rng = make_rng(seed, "init");
  MaxPlusMatrix a = uniform_matrix(n, m, rng);
  MaxPlusMatrix c = uniform_matrix(m, cols, rng);
  return {std::move(a), std::move(c)};
}

void project_rank(MaxPlusMatrix& c, std::size_t p) {
  if (p >= std::min(c.rows(), c.cols())) return;
  c = from_eigen(rank_projection(to_eigen(c), p));
}

namespace {

void check_config(const MaxPlusMatrix& y, const TcConfig& config, bool compressing) {
  config.validate();
  if (config.m == 0) throw InvalidArgument("m must be >= 1");
  if (config.p == 0) throw InvalidArgument("p must be >= 1");
  if (compressing && config.p >= y.rows()) {
    throw InvalidArgument("p must be smaller than n = " + std::to_string(y.rows()));
  }
}

void check_factors(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const MaxPlusMatrix& c,
                   std::size_t m) {
  if (a.rows() != y.rows() || a.cols() != m || c.rows() != m || c.cols() != y.cols()) {
    throw InvalidArgument("A and C shapes do not fit Y and m");
  }
  a.check_entries();
  if (!c.all_finite()) throw NonFiniteInput("C must be finite");
}

void check_mask(const MaxPlusMatrix& y, const ObservationMask* mask) {
  if (!mask) return;
  if (mask->rows() != y.rows() || mask->cols() != y.cols()) {
    throw InvalidArgument("mask shape does not match Y");
  }
  if (mask->empty()) throw InvalidArgument("mask is empty");
}

}  // namespace

std::pair<MaxPlusMatrix, MaxPlusMatrix> tc_step(const MaxPlusMatrix& y, const MaxPlusMatrix& a,
                                                const MaxPlusMatrix& c, const TcConfig& config,
                                                std::size_t k, const ObservationMask* mask,
                                                DescentStreams& streams) {
  check_config(y, config, false);
  check_factors(y, a, c, config.m);
  check_mask(y, mask);
  std::vector<std::size_t> owned;
  std::span<const std::size_t> cells;
  if (mask) {
    cells = mask->cells();
  } else {
    owned = all_cells(y.rows(), y.cols());
    cells = owned;
  }
  StepResult step = descent_step(y, cells, a, c, config, k, streams);
  project_rank(step.right, config.p);
  return {std::move(step.left), std::move(step.right)};
}

TcSolution tc_fit(const MaxPlusMatrix& y, const TcConfig& config, const ObservationMask* mask,
                  const std::optional<std::pair<MaxPlusMatrix, MaxPlusMatrix>>& init) {
  check_config(y, config, true);
  check_mask(y, mask);
  auto start = init ? *init : tc_random_init(y.rows(), config.m, y.cols(), config.seed);
  check_factors(y, start.first, start.second, config.m);
  project_rank(start.second, config.p);

  const std::size_t p = config.p;
  DescentRun run = run_descent(y, mask, std::move(start.first), std::move(start.second), config,
                               [p](MaxPlusMatrix& c) { project_rank(c, p); });

  TcSolution out;
  out.a = std::move(run.left);
  out.c = to_eigen(run.right);
  RankFactors factors = rank_factorize(out.c, p);
  out.b = std::move(factors.b);
  out.x = std::move(factors.x);
  out.trace = std::move(run.trace);
  out.iterations_run = run.iterations_run;
  return out;
}

double tc_objective(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const Eigen::MatrixXd& b,
                    const Eigen::MatrixXd& x, const ObservationMask* mask) {
  const MaxPlusMatrix product = tc_predict(a, b, x);
  if (product.rows() != y.rows() || product.cols() != y.cols()) {
    throw InvalidArgument("tc_objective: prediction does not match the shape of Y");
  }
  const double e = frobenius_error(y, product, mask);
  return e * e;
}

void save_solution(const std::filesystem::path& dir, const TcSolution& solution) {
  std::filesystem::create_directories(dir);
  write_matrix(dir / "A.csv", solution.a);
  write_real_matrix(dir / "B.csv", solution.b);
  write_real_matrix(dir / "X.csv", solution.x);
  write_real_matrix(dir / "C.csv", solution.c);
  write_trace(dir / "trace.csv", solution.trace);
}

}  // namespace tropfact
