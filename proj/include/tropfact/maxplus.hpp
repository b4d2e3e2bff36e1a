#pragma once

// Dense max-plus (tropical) matrices over R ∪ {-inf}.
//
// Tropical addition is max with -inf as identity; tropical multiplication is
// ordinary + with -inf absorbing. Both rules are applied explicitly so that
// no NaN can arise from -inf - (-inf) or -inf + (+inf).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tropfact/random.hpp"

namespace tropfact {

inline constexpr double kBottom = -std::numeric_limits<double>::infinity();

inline bool is_bottom(double x) noexcept { return x == kBottom; }

// Tropical product of two scalars.
inline double tropical_mul(double x, double y) noexcept {
  return (is_bottom(x) || is_bottom(y)) ? kBottom : x + y;
}

// Tropical sum of two scalars.
inline double tropical_add(double x, double y) noexcept { return x < y ? y : x; }

class MaxPlusMatrix {
 public:
  MaxPlusMatrix() = default;
  MaxPlusMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  MaxPlusMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static MaxPlusMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  // 0 on the diagonal, bottom elsewhere.
  static MaxPlusMatrix identity(std::size_t n);
  static MaxPlusMatrix bottom(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  // True when every entry is finite.
  bool all_finite() const noexcept;

  // Throws NonFiniteInput if any entry is NaN or +inf.
  void check_entries() const;

  bool operator==(const MaxPlusMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Tropical scaling: lambda + M entrywise.
MaxPlusMatrix shift(const MaxPlusMatrix& m, double lambda);

// Set of observed (i, j) cells, kept as sorted row-major linear indices.
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(std::size_t rows, std::size_t cols,
                  std::span<const std::pair<std::size_t, std::size_t>> cells);

  static ObservationMask full(std::size_t rows, std::size_t cols);
  static ObservationMask from_linear(std::size_t rows, std::size_t cols,
                                     std::vector<std::size_t> linear);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }
  bool is_full() const noexcept { return cells_.size() == rows_ * cols_; }

  bool contains(std::size_t i, std::size_t j) const;
  std::span<const std::size_t> cells() const noexcept { return cells_; }

  bool operator==(const ObservationMask&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> cells_;
};

// Inner index attaining each entry of a tropical product. kUndefined marks
// entries whose every term is bottom.
class ArgmaxMap {
 public:
  static constexpr std::int32_t kUndefined = -1;

  ArgmaxMap() = default;
  ArgmaxMap(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), index_(rows * cols, kUndefined) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::int32_t& operator()(std::size_t i, std::size_t j) noexcept { return index_[i * cols_ + j]; }
  std::int32_t operator()(std::size_t i, std::size_t j) const noexcept {
    return index_[i * cols_ + j];
  }
  bool defined(std::size_t i, std::size_t j) const noexcept {
    return index_[i * cols_ + j] != kUndefined;
  }

  bool operator==(const ArgmaxMap&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int32_t> index_;
};

std::vector<double> maxplus_matvec(const MaxPlusMatrix& a, std::span<const double> x);

MaxPlusMatrix maxplus_matmul(const MaxPlusMatrix& a, const MaxPlusMatrix& b);

// Product plus a maximizer per entry. Ties within tie_tolerance of the maximum
// are broken uniformly at random; rng is consumed in row-major entry order and
// only for entries with more than one maximizer.
std::pair<MaxPlusMatrix, ArgmaxMap> maxplus_matmul_argmax(const MaxPlusMatrix& a,
                                                          const MaxPlusMatrix& b, Rng& rng,
                                                          double tie_tolerance = 0.0);

// Frobenius norm of (y - p) over the masked-in cells (all cells when mask is
// empty). Not squared.
double frobenius_error(const MaxPlusMatrix& y, const MaxPlusMatrix& p,
                       const ObservationMask* mask = nullptr);

// Frobenius norm of a matrix with finite entries.
double frobenius_norm(const MaxPlusMatrix& m);

}  // namespace tropfact
