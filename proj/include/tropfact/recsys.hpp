#pragma once

// Implicit-feedback recommendation on MovieLens ratings.
//
// A watched (user, item) pair is encoded as -1 and every other cell as +1.
// Watched pairs are split into train / validation / test; each split is
// paired with as many seeded-random unwatched cells, so masks are balanced
// and pairwise disjoint. Models are TMF (Y ≈ A ⊞ B) or TC (Y ≈ A ⊞ C with
// rank(C) <= p), fitted with minibatch descent and early stopping on
// validation RMS. Lower scores mean "more likely watched".

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tropfact/descent.hpp"
#include "tropfact/maxplus.hpp"

namespace tropfact {

enum class RatingsFormat { kMl100k, kMl1m };

std::string_view to_string(RatingsFormat f);
RatingsFormat parse_ratings_format(std::string_view name);

struct Rating {
  std::int64_t user = 0;  // external ids as in the file
  std::int64_t item = 0;
  int rating = 0;
  std::int64_t timestamp = 0;

  bool operator==(const Rating&) const = default;
};

struct RatingsDataset {
  std::vector<Rating> records;        // file order, first occurrence of each pair
  std::vector<std::int64_t> user_ids;  // contiguous index -> external id, ascending
  std::vector<std::int64_t> item_ids;
  std::unordered_map<std::int64_t, std::size_t> user_index;
  std::unordered_map<std::int64_t, std::size_t> item_index;
  std::vector<std::string> warnings;

  std::size_t num_users() const noexcept { return user_ids.size(); }
  std::size_t num_items() const noexcept { return item_ids.size(); }
};

// Builds the index maps; later duplicates of a (user, item) pair are dropped.
RatingsDataset make_dataset(std::vector<Rating> records);

RatingsDataset parse_movielens(std::istream& in, RatingsFormat format);
// Also checks the documented totals of the distributed files and records a
// warning on mismatch.
RatingsDataset load_movielens(const std::filesystem::path& path, RatingsFormat format);
void write_movielens(std::ostream& out, const RatingsDataset& data, RatingsFormat format);

// Random ratings log with skewed user activity and item popularity, for
// exercising the pipeline without the real data. Ids start at 1.
RatingsDataset synthetic_ratings(std::size_t users, std::size_t items, std::size_t count,
                                 std::uint64_t seed);

struct SplitSpec {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ImplicitMatrix {
  MaxPlusMatrix y;  // users x items, entries in {-1, +1}
  ObservationMask train;
  ObservationMask validation;
  ObservationMask test;
};

inline constexpr double kWatched = -1.0;
inline constexpr double kUnwatched = 1.0;

ImplicitMatrix build_implicit(const RatingsDataset& data, const SplitSpec& split);

struct ModelSpec {
  enum class Kind { kTmf, kTc };
  Kind kind = Kind::kTmf;
  std::size_t r = 35;  // TMF inner dimension
  std::size_t m = 40;  // TC tropical terms
  std::size_t p = 25;  // TC rank

  static ModelSpec tmf(std::size_t r) { return {Kind::kTmf, r, 0, 0}; }
  static ModelSpec tc(std::size_t m, std::size_t p) { return {Kind::kTc, 0, m, p}; }
  std::string describe() const;
};

// Minibatches touch many cells per row, so steps are smaller than in the
// dense fits.
inline DescentOptions default_recsys_descent() {
  DescentOptions o;
  o.alpha = 0.02;
  return o;
}

struct StochasticConfig {
  DescentOptions descent = default_recsys_descent();  // max_iters and patience are unused here
  std::size_t batch_size = 8192;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
};

struct FittedModel {
  ModelSpec spec;
  MaxPlusMatrix left;   // A
  MaxPlusMatrix right;  // B for TMF, C for TC

  double score(std::size_t user, std::size_t item) const;
};

struct StochasticFit {
  FittedModel model;  // best validation snapshot
  FittedModel last;   // iterate after the final epoch
  std::size_t epochs_run = 0;
  double best_validation_rms = 0.0;
  std::vector<double> validation_trace;  // after every epoch; index 0 is the start
};

// Optional init is (left, right) in the shapes the model expects.
StochasticFit fit_stochastic(const ImplicitMatrix& data, const ModelSpec& model,
                             const StochasticConfig& config,
                             const std::optional<std::pair<MaxPlusMatrix, MaxPlusMatrix>>& init =
                                 std::nullopt);

using ScoreFn = std::function<double(std::size_t, std::size_t)>;

double rms(const MaxPlusMatrix& y, const ObservationMask& mask, const ScoreFn& score);

struct HitRate {
  double value = 0.0;
  std::size_t eligible_users = 0;
  std::size_t hits = 0;
};

// For every user with a watched test cell: one watched test item and 100
// unwatched items (from the user's unwatched test cells when there are at
// least 100, otherwise from all of the user's unwatched items) are ranked by
// ascending score, ties in random order; a hit is the watched item in the
// first 10. Users draw from per-user streams, so results do not depend on
// evaluation order.
HitRate hit_rate_at_10(const ImplicitMatrix& data, const ScoreFn& score, std::uint64_t seed,
                       std::size_t negatives = 100, std::size_t cutoff = 10);

}  // namespace tropfact
