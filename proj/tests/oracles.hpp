#pragma once

// Test-only reference computations, written from the definitions and kept
// independent of the solver code paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tropfact/maxplus.hpp"

namespace tropfact::oracle {

// Squared residual ||Y - A ⊞ B||_F^2 evaluated term by term.
inline double objective(const MaxPlusMatrix& y, const MaxPlusMatrix& a, const MaxPlusMatrix& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < y.cols(); ++j) {
      double best = -INFINITY;
      for (std::size_t l = 0; l < a.cols(); ++l) best = std::max(best, a(i, l) + b(l, j));
      sum += (best - y(i, j)) * (best - y(i, j));
    }
  }
  return sum;
}

struct Gradient {
  MaxPlusMatrix a;
  MaxPlusMatrix b;
};

// Central finite differences of the squared residual.
inline Gradient finite_difference(const MaxPlusMatrix& y, const MaxPlusMatrix& a,
                                  const MaxPlusMatrix& b, double h) {
  Gradient g{MaxPlusMatrix(a.rows(), a.cols()), MaxPlusMatrix(b.rows(), b.cols())};
  MaxPlusMatrix probe = a;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double keep = probe.data()[k];
    probe.data()[k] = keep + h;
    const double up = objective(y, probe, b);
    probe.data()[k] = keep - h;
    const double down = objective(y, probe, b);
    probe.data()[k] = keep;
    g.a.data()[k] = (up - down) / (2 * h);
  }
  MaxPlusMatrix probe_b = b;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const double keep = probe_b.data()[k];
    probe_b.data()[k] = keep + h;
    const double up = objective(y, a, probe_b);
    probe_b.data()[k] = keep - h;
    const double down = objective(y, a, probe_b);
    probe_b.data()[k] = keep;
    g.b.data()[k] = (up - down) / (2 * h);
  }
  return g;
}

// Smallest gap between the largest and second largest term over all entries
// of A ⊞ B (infinite when the inner dimension is 1).
inline double min_maximizer_gap(const MaxPlusMatrix& a, const MaxPlusMatrix& b) {
  double gap = INFINITY;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::vector<double> terms;
      for (std::size_t l = 0; l < a.cols(); ++l) terms.push_back(a(i, l) + b(l, j));
      std::sort(terms.rbegin(), terms.rend());
      if (terms.size() > 1) gap = std::min(gap, terms[0] - terms[1]);
    }
  }
  return gap;
}

inline MaxPlusMatrix random_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                    double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  MaxPlusMatrix m(rows, cols);
  for (double& x : m.data()) x = dist(rng);
  return m;
}

inline Eigen::MatrixXd random_rank(Eigen::Index rows, Eigen::Index cols, Eigen::Index rank,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd u(rows, rank), v(rank, cols);
  for (Eigen::Index k = 0; k < u.size(); ++k) u.data()[k] = dist(rng);
  for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = dist(rng);
  return u * v;
}

inline double relative_error(double actual, double expected, double floor = 1e-8) {
  return std::abs(actual - expected) / std::max({std::abs(actual), std::abs(expected), floor});
}

}  // namespace tropfact::oracle
