#pragma once

// Tropical matrix factorization: minimize ||Z_O ∘ (Y - A ⊞ B)||_F^2 over
// A (n x r) and B (r x p).

#include <cstddef>
#include <filesystem>
#include <optional>
#include <utility>

#include "tropfact/descent.hpp"
#include "tropfact/maxplus.hpp"

namespace tropfact {

struct TmfConfig : DescentOptions {
  std::size_t r = 1;
};

struct TmfSolution {
  MaxPlusMatrix a;
  MaxPlusMatrix b;
  Trace trace;
  std::size_t iterations_run = 0;

  double final_objective() const { return trace.empty() ? 0.0 : trace.back().second; }
  double best_objective() const;
};

using FactorPair = std::pair<MaxPlusMatrix, MaxPlusMatrix>;

// Uniform [0, 1] starting point, A drawn before B from the "init" stream.
FactorPair tmf_random_init(std::size_t n, std::size_t r, std::size_t p, std::uint64_t seed);

FactorPair tmf_step(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const MaxPlusMatrix& b,
                    const DescentOptions& config, std::size_t k, const ObservationMask* mask,
                    DescentStreams& streams);

TmfSolution tmf_fit(const MaxPlusMatrix& y, const TmfConfig& config,
                    const ObservationMask* mask = nullptr,
                    const std::optional<FactorPair>& init = std::nullopt);

double tmf_objective(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const MaxPlusMatrix& b,
                     const ObservationMask* mask = nullptr);

// Writes A.csv, B.csv and trace.csv into dir (created if missing).
void save_solution(const std::filesystem::path& dir, const TmfSolution& solution);

}  // namespace tropfact
