#include "tropfact/descent.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <numeric>

#include "tropfact/errors.hpp"

namespace tropfact {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kGd:
      return "gd";
    case Variant::kGdmn:
      return "gdmn";
    case Variant::kGdanZeroMean:
      return "gdan-zm";
    case Variant::kGdanNonZeroMean:
      return "gdan-nzm";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Variant v : {Variant::kGd, Variant::kGdmn, Variant::kGdanZeroMean, Variant::kGdanNonZeroMean}) {
    if (lower == to_string(v)) return v;
  }
  throw InvalidArgument("unknown variant '" + std::string(name) +
                        "' (expected gd, gdmn, gdan-zm or gdan-nzm)");
}

EpsSchedule EpsSchedule::diminishing(double numerator, double offset) {
  EpsSchedule s;
  s.numerator_ = numerator;
  s.offset_ = offset;
  return s;
}

EpsSchedule EpsSchedule::constant(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw InvalidArgument("eps must be >= 0");
  EpsSchedule s;
  s.constant_ = true;
  s.value_ = value;
  return s;
}

EpsSchedule EpsSchedule::parse(std::string_view text) {
  if (text == "sched") return diminishing();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("eps must be 'sched' or a number, got '" + std::string(text) + "'");
  }
  return constant(value);
}

double EpsSchedule::operator()(std::size_t k) const noexcept {
  return constant_ ? value_ : numerator_ / (offset_ + static_cast<double>(k));
}

std::string EpsSchedule::describe() const {
  if (constant_) return format_value(value_);
  if (numerator_ == 9.0 && offset_ == 500.0) return "sched";
  return format_value(numerator_) + "/(" + format_value(offset_) + "+k)";
}

void DescentOptions::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be > 0");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw InvalidArgument("noise_scale must be >= 0");
  }
  if (max_iters == 0) throw InvalidArgument("max_iters must be positive");
}

DescentStreams DescentStreams::from_seed(std::uint64_t seed) {
  return {make_rng(seed, "ties"), make_rng(seed, "noise")};
}

namespace {

void add_noise(MaxPlusMatrix& m, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& x : m.data()) x += dist(rng);
}

}  // namespace

StepResult descent_step(const MaxPlusMatrix& y, std::span<const std::size_t> cells,
                        const MaxPlusMatrix& left, const MaxPlusMatrix& right,
                        const DescentOptions& options, std::size_t k, DescentStreams& streams) {
  const std::size_t inner = left.cols();
  const std::size_t cols = y.cols();
  const double eps = options.eps(k);
  const bool spread = options.variant == Variant::kGdmn && eps > 0.0;

  MaxPlusMatrix grad_left(left.rows(), inner, 0.0);
  MaxPlusMatrix grad_right(inner, right.cols(), 0.0);
  std::vector<double> terms(inner);
  std::vector<std::size_t> ties;
  ties.reserve(inner);
  double objective = 0.0;

  for (std::size_t cell : cells) {
    const std::size_t i = cell / cols;
    const std::size_t j = cell % cols;
    const double target = y(i, j);
    if (!std::isfinite(target)) {
      throw NonFiniteInput("Y(" + std::to_string(i) + "," + std::to_string(j) +
                           ") is not finite inside the mask");
    }
    double best = kBottom;
    for (std::size_t l = 0; l < inner; ++l) {
      terms[l] = tropical_mul(left(i, l), right(l, j));
      best = tropical_add(best, terms[l]);
    }
    if (is_bottom(best)) {
      throw NonFiniteInput("every term of product entry (" + std::to_string(i) + "," +
                           std::to_string(j) + ") is bottom");
    }
    ties.clear();
    for (std::size_t l = 0; l < inner; ++l) {
      if (terms[l] >= best) ties.push_back(l);
    }
    std::size_t pi = ties.front();
    if (ties.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
      pi = ties[pick(streams.ties)];
    }

    const double residual = best - target;
    objective += residual * residual;
    if (spread) {
      for (std::size_t l = 0; l < inner; ++l) {
        if (is_bottom(terms[l])) continue;  // absent terms stay absent
        const double weighted = (terms[l] - target) * (l == pi ? 1.0 : eps);
        grad_left(i, l) += weighted;
        grad_right(l, j) += weighted;
      }
    } else {
      grad_left(i, pi) += residual;
      grad_right(pi, j) += residual;
    }
  }

  StepResult out{objective, left, right};
  const double alpha = options.alpha;
  {
    auto g = grad_left.data();
    auto x = out.left.data();
    for (std::size_t n = 0; n < x.size(); ++n) x[n] -= alpha * g[n];
  }
  {
    auto g = grad_right.data();
    auto x = out.right.data();
    for (std::size_t n = 0; n < x.size(); ++n) x[n] -= alpha * g[n];
  }

  const bool additive = options.variant == Variant::kGdanZeroMean ||
                        options.variant == Variant::kGdanNonZeroMean;
  const double amplitude = options.noise_scale * eps;
  if (additive && amplitude > 0.0) {
    const double lo = options.variant == Variant::kGdanZeroMean ? -amplitude : 0.0;
    add_noise(out.left, lo, amplitude, streams.noise);
    add_noise(out.right, lo, amplitude, streams.noise);
  }
  return out;
}

double squared_residual(const MaxPlusMatrix& y, std::span<const std::size_t> cells,
                        const MaxPlusMatrix& left, const MaxPlusMatrix& right) {
  const std::size_t inner = left.cols();
  const std::size_t cols = y.cols();
  double sum = 0.0;
  for (std::size_t cell : cells) {
    const std::size_t i = cell / cols;
    const std::size_t j = cell % cols;
    double best = kBottom;
    for (std::size_t l = 0; l < inner; ++l) best = tropical_add(best, tropical_mul(left(i, l), right(l, j)));
    const double target = y(i, j);
    if (!std::isfinite(target) || is_bottom(best)) {
      throw NonFiniteInput("non-finite entry (" + std::to_string(i) + "," + std::to_string(j) +
                           ") inside the mask");
    }
    const double d = best - target;
    sum += d * d;
  }
  return sum;
}

std::vector<std::size_t> all_cells(std::size_t rows, std::size_t cols) {
  std::vector<std::size_t> cells(rows * cols);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  return cells;
}

DescentRun run_descent(const MaxPlusMatrix& y, const ObservationMask* mask, MaxPlusMatrix left,
                       MaxPlusMatrix right, const DescentOptions& options,
                       const std::function<void(MaxPlusMatrix&)>& project) {
  options.validate();
  std::vector<std::size_t> owned;
  std::span<const std::size_t> cells;
  if (mask) {
    cells = mask->cells();
  } else {
    owned = all_cells(y.rows(), y.cols());
    cells = owned;
  }

  DescentStreams streams = DescentStreams::from_seed(options.seed);
  DescentRun run;
  run.trace.reserve(options.max_iters + 1);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_iter = 0;
  MaxPlusMatrix best_left;
  MaxPlusMatrix best_right;
  const bool keep_best = options.patience > 0;

  auto consider = [&](std::size_t k, double objective, const MaxPlusMatrix& l,
                      const MaxPlusMatrix& r) {
    run.trace.emplace_back(k, objective);
    if (objective < best) {
      best = objective;
      best_iter = k;
      if (keep_best) {
        best_left = l;
        best_right = r;
      }
    }
  };

  std::size_t k = 0;
  for (; k < options.max_iters; ++k) {
    StepResult step = descent_step(y, cells, left, right, options, k, streams);
    consider(k, step.objective, left, right);
    if (keep_best && k - best_iter >= options.patience) break;
    left = std::move(step.left);
    right = std::move(step.right);
    if (project) project(right);
  }
  run.iterations_run = k;
  if (k == options.max_iters) consider(k, squared_residual(y, cells, left, right), left, right);

  if (keep_best) {
    run.left = std::move(best_left);
    run.right = std::move(best_right);
  } else {
    run.left = std::move(left);
    run.right = std::move(right);
  }
  return run;
}

MaxPlusMatrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  MaxPlusMatrix m(rows, cols);
  for (double& x : m.data()) x = dist(rng);
  return m;
}

}  // namespace tropfact
