#include "tropfact/maxplus.hpp"

#include <algorithm>
#include <string>

#include "tropfact/errors.hpp"

namespace tropfact {

MaxPlusMatrix::MaxPlusMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

MaxPlusMatrix::MaxPlusMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw InvalidArgument("MaxPlusMatrix: " + std::to_string(data_.size()) +
                          " entries for a " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " matrix");
  }
  check_entries();
}

MaxPlusMatrix MaxPlusMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.begin()->size();
  std::vector<double> entries;
  entries.reserve(n * m);
  for (const auto& r : rows) {
    if (r.size() != m) throw InvalidArgument("MaxPlusMatrix::from_rows: ragged rows");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return MaxPlusMatrix(n, m, std::move(entries));
}

MaxPlusMatrix MaxPlusMatrix::identity(std::size_t n) {
  MaxPlusMatrix e(n, n, kBottom);
  for (std::size_t i = 0; i < n; ++i) e(i, i) = 0.0;
  return e;
}

MaxPlusMatrix MaxPlusMatrix::bottom(std::size_t rows, std::size_t cols) {
  return MaxPlusMatrix(rows, cols, kBottom);
}

bool MaxPlusMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void MaxPlusMatrix::check_entries() const {
  for (std::size_t k = 0; k < data_.size(); ++k) {
    const double x = data_[k];
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      throw NonFiniteInput("entry (" + std::to_string(k / cols_) + "," +
                           std::to_string(k % cols_) + ") is not finite or bottom");
    }
  }
}

MaxPlusMatrix shift(const MaxPlusMatrix& m, double lambda) {
  MaxPlusMatrix out = m;
  for (double& x : out.data()) x = tropical_mul(x, lambda);
  return out;
}

ObservationMask::ObservationMask(std::size_t rows, std::size_t cols,
                                 std::span<const std::pair<std::size_t, std::size_t>> cells)
    : rows_(rows), cols_(cols) {
  cells_.reserve(cells.size());
  for (const auto& [i, j] : cells) {
    if (i >= rows || j >= cols) {
      throw InvalidArgument("ObservationMask: cell (" + std::to_string(i) + "," +
                            std::to_string(j) + ") out of range");
    }
    cells_.push_back(i * cols + j);
  }
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

ObservationMask ObservationMask::full(std::size_t rows, std::size_t cols) {
  ObservationMask m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.cells_.resize(rows * cols);
  for (std::size_t k = 0; k < m.cells_.size(); ++k) m.cells_[k] = k;
  return m;
}

ObservationMask ObservationMask::from_linear(std::size_t rows, std::size_t cols,
                                             std::vector<std::size_t> linear) {
  ObservationMask m;
  m.rows_ = rows;
  m.cols_ = cols;
  std::sort(linear.begin(), linear.end());
  linear.erase(std::unique(linear.begin(), linear.end()), linear.end());
  if (!linear.empty() && linear.back() >= rows * cols) {
    throw InvalidArgument("ObservationMask: linear index out of range");
  }
  m.cells_ = std::move(linear);
  return m;
}

bool ObservationMask::contains(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) return false;
  return std::binary_search(cells_.begin(), cells_.end(), i * cols_ + j);
}

namespace {

void require_inner(std::size_t a_cols, std::size_t b_rows, const char* op) {
  if (a_cols != b_rows) {
    throw InvalidArgument(std::string(op) + ": inner dimensions " + std::to_string(a_cols) +
                          " and " + std::to_string(b_rows) + " differ");
  }
}

}  // namespace

std::vector<double> maxplus_matvec(const MaxPlusMatrix& a, std::span<const double> x) {
  require_inner(a.cols(), x.size(), "maxplus_matvec");
  std::vector<double> out(a.rows(), kBottom);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    double best = kBottom;
    for (std::size_t j = 0; j < row.size(); ++j) best = tropical_add(best, tropical_mul(row[j], x[j]));
    out[i] = best;
  }
  return out;
}

MaxPlusMatrix maxplus_matmul(const MaxPlusMatrix& a, const MaxPlusMatrix& b) {
  require_inner(a.cols(), b.rows(), "maxplus_matmul");
  MaxPlusMatrix c(a.rows(), b.cols(), kBottom);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (is_bottom(ail)) continue;
      const auto brow = b.row(l);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] = tropical_add(out[j], tropical_mul(ail, brow[j]));
    }
  }
  return c;
}

std::pair<MaxPlusMatrix, ArgmaxMap> maxplus_matmul_argmax(const MaxPlusMatrix& a,
                                                          const MaxPlusMatrix& b, Rng& rng,
                                                          double tie_tolerance) {
  require_inner(a.cols(), b.rows(), "maxplus_matmul_argmax");
  const std::size_t inner = a.cols();
  MaxPlusMatrix c(a.rows(), b.cols(), kBottom);
  ArgmaxMap pi(a.rows(), b.cols());
  std::vector<double> terms(inner);
  std::vector<std::int32_t> ties;
  ties.reserve(inner);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double best = kBottom;
      for (std::size_t l = 0; l < inner; ++l) {
        terms[l] = tropical_mul(a(i, l), b(l, j));
        best = tropical_add(best, terms[l]);
      }
      c(i, j) = best;
      if (is_bottom(best)) continue;
      ties.clear();
      for (std::size_t l = 0; l < inner; ++l) {
        if (terms[l] >= best - tie_tolerance) ties.push_back(static_cast<std::int32_t>(l));
      }
      if (ties.size() == 1) {
        pi(i, j) = ties.front();
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
        pi(i, j) = ties[pick(rng)];
      }
    }
  }
  return {std::move(c), std::move(pi)};
}

double frobenius_error(const MaxPlusMatrix& y, const MaxPlusMatrix& p,
                       const ObservationMask* mask) {
  if (y.rows() != p.rows() || y.cols() != p.cols()) {
    throw InvalidArgument("frobenius_error: shape mismatch");
  }
  if (mask && (mask->rows() != y.rows() || mask->cols() != y.cols())) {
    throw InvalidArgument("frobenius_error: mask shape mismatch");
  }
  const auto yd = y.data();
  const auto pd = p.data();
  double sum = 0.0;
  auto accumulate = [&](std::size_t k) {
    if (!std::isfinite(yd[k]) || !std::isfinite(pd[k])) {
      throw NonFiniteInput("frobenius_error: non-finite entry (" + std::to_string(k / y.cols()) +
                           "," + std::to_string(k % y.cols()) + ") inside the mask");
    }
    const double d = yd[k] - pd[k];
    sum += d * d;
  };
  if (mask) {
    for (std::size_t k : mask->cells()) accumulate(k);
  } else {
    for (std::size_t k = 0; k < yd.size(); ++k) accumulate(k);
  }
  return std::sqrt(sum);
}

double frobenius_norm(const MaxPlusMatrix& m) {
  double sum = 0.0;
  for (double x : m.data()) {
    if (!std::isfinite(x)) throw NonFiniteInput("frobenius_norm: non-finite entry");
    sum += x * x;
  }
  return std::sqrt(sum);
}

}  // namespace tropfact
