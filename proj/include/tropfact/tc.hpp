#pragma once

// Tropical compression: minimize ||Y - A ⊞ (B X)||_F^2 with A (n x m),
// B (m x p), X (p x N). Solved through C = B X under rank(C) <= p by
// projected gradient iterations, then split back into B and X.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "tropfact/descent.hpp"
#include "tropfact/maxplus.hpp"

namespace tropfact {

// Singular values below this fraction of the largest count as zero.
inline constexpr double kRankTolerance = 1e-8;

struct TcConfig : DescentOptions {
  std::size_t m = 1;  // tropical terms
  std::size_t p = 1;  // compressed dimension
};

struct TcSolution {
  MaxPlusMatrix a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd x;
  Eigen::MatrixXd c;
  Trace trace;
  std::size_t iterations_run = 0;

  double final_objective() const { return trace.empty() ? 0.0 : trace.back().second; }
};

MaxPlusMatrix tc_predict(const MaxPlusMatrix& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& x);

// Best Frobenius approximation of rank at most p (truncated SVD). Returns the
// input untouched when p >= min(rows, cols).
Eigen::MatrixXd rank_projection(const Eigen::MatrixXd& c, std::size_t p);

std::size_t numerical_rank(const Eigen::MatrixXd& c, double tolerance = kRankTolerance);

struct RankFactors {
  Eigen::MatrixXd b;  // m x p
  Eigen::MatrixXd x;  // p x N
};

// C = B X with the singular values split evenly between the factors; columns
// of B and rows of X beyond the numerical rank are zero. Throws
// InfeasibleRank when rank(C) > p.
RankFactors rank_factorize(const Eigen::MatrixXd& c, std::size_t p);

// Uniform [0, 1] A (n x m) and C (m x N), A drawn first from the "init"
// stream. C is returned unprojected.
std::pair<MaxPlusMatrix, MaxPlusMatrix> tc_random_init(std::size_t n, std::size_t m,
                                                       std::size_t cols, std::uint64_t seed);

void project_rank(MaxPlusMatrix& c, std::size_t p);

std::pair<MaxPlusMatrix, MaxPlusMatrix> tc_step(const MaxPlusMatrix& y, const MaxPlusMatrix& a,
                                                const MaxPlusMatrix& c, const TcConfig& config,
                                                std::size_t k, const ObservationMask* mask,
                                                DescentStreams& streams);

// init, when given, is (A0, C0); C0 is projected before the first step.
TcSolution tc_fit(const MaxPlusMatrix& y, const TcConfig& config,
                  const ObservationMask* mask = nullptr,
                  const std::optional<std::pair<MaxPlusMatrix, MaxPlusMatrix>>& init = std::nullopt);

double tc_objective(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const Eigen::MatrixXd& b,
                    const Eigen::MatrixXd& x, const ObservationMask* mask = nullptr);

// Writes A.csv, B.csv, X.csv, C.csv and trace.csv into dir.
void save_solution(const std::filesystem::path& dir, const TcSolution& solution);

}  // namespace tropfact
