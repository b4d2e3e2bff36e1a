#pragma once

// Gradient iterations for fitting Y ≈ L ⊞ R, shared by the TMF and TC solvers
// and by the stochastic recommender fits.
//
// For each observed cell (i, j), pi(i, j) is a maximizer of L_il + R_lj and the
// residual of term l is L_il + R_lj - Y_ij. The update is simultaneous
// (Jacobi style):
//   L'_il = L_il - alpha * sum_j residual_l(i, j) * s(i, l, j)
//   R'_lj = R_lj - alpha * sum_i residual_l(i, j) * s(i, l, j)
// with s = 1 on the maximizer and eps_k (GDMN) or 0 (GD, GDAN) elsewhere.
// GDAN adds uniform noise on [-c_k, c_k] (zero mean) or [0, c_k] (non-zero
// mean) to every entry, c_k = noise_scale * eps_k. The update coefficient is
// the residual itself, i.e. half the derivative of the squared error.
// Bottom entries of L or R never change, apart from staying bottom.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tropfact/matrix_io.hpp"
#include "tropfact/maxplus.hpp"
#include "tropfact/random.hpp"

namespace tropfact {

enum class Variant { kGd, kGdmn, kGdanZeroMean, kGdanNonZeroMean };

std::string_view to_string(Variant v);
// Accepts gd, gdmn, gdan-zm, gdan-nzm (case-insensitive).
Variant parse_variant(std::string_view name);

class EpsSchedule {
 public:
  // eps_k = numerator / (offset + k)
  static EpsSchedule diminishing(double numerator = 9.0, double offset = 500.0);
  static EpsSchedule constant(double value);
  // "sched" for the default diminishing schedule, otherwise a constant.
  static EpsSchedule parse(std::string_view text);

  double operator()(std::size_t k) const noexcept;
  bool is_constant() const noexcept { return constant_; }
  std::string describe() const;

 private:
  bool constant_ = false;
  double value_ = 0.0;
  double numerator_ = 9.0;
  double offset_ = 500.0;
};

struct DescentOptions {
  double alpha = 0.07;
  Variant variant = Variant::kGdmn;
  EpsSchedule eps = EpsSchedule::diminishing();
  double noise_scale = 0.4;
  std::size_t max_iters = 3000;
  std::uint64_t seed = 0;
  std::size_t patience = 0;

  void validate() const;
};

// Independent random streams consumed by the iterations.
struct DescentStreams {
  Rng ties;
  Rng noise;

  static DescentStreams from_seed(std::uint64_t seed);
};

struct StepResult {
  double objective = 0.0;  // squared residual of the pre-step iterate
  MaxPlusMatrix left;
  MaxPlusMatrix right;
};

// One update restricted to `cells` (row-major linear indices into y). The
// weight of non-maximizing terms and the noise amplitude are read from
// options at iteration k. Cells are visited in the given order, which fixes
// the consumption order of the tie-breaking stream.
StepResult descent_step(const MaxPlusMatrix& y, std::span<const std::size_t> cells,
                        const MaxPlusMatrix& left, const MaxPlusMatrix& right,
                        const DescentOptions& options, std::size_t k, DescentStreams& streams);

// Squared Frobenius residual of y - left ⊞ right over `cells`.
double squared_residual(const MaxPlusMatrix& y, std::span<const std::size_t> cells,
                        const MaxPlusMatrix& left, const MaxPlusMatrix& right);

std::vector<std::size_t> all_cells(std::size_t rows, std::size_t cols);

struct DescentRun {
  MaxPlusMatrix left;
  MaxPlusMatrix right;
  Trace trace;
  std::size_t iterations_run = 0;
};

// Full-batch iterations with an optional projection applied to the right
// factor after every step. The trace holds the objective of every visited
// iterate (iteration 0 is the initial point). With patience > 0 the run stops
// once the best objective is `patience` iterations old and returns the best
// iterate; otherwise it returns the last one.
DescentRun run_descent(const MaxPlusMatrix& y, const ObservationMask* mask, MaxPlusMatrix left,
                       MaxPlusMatrix right, const DescentOptions& options,
                       const std::function<void(MaxPlusMatrix&)>& project = {});

// Matrix with i.i.d. uniform [0, 1] entries.
MaxPlusMatrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace tropfact
