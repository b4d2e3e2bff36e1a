#include "tropfact/recsys.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string_view>

#include "tropfact/errors.hpp"
#include "tropfact/tc.hpp"
#include "tropfact/tmf.hpp"

namespace tropfact {

std::string_view to_string(RatingsFormat f) {
  return f == RatingsFormat::kMl100k ? "ml100k" : "ml1m";
}

RatingsFormat parse_ratings_format(std::string_view name) {
  if (name == "ml100k") return RatingsFormat::kMl100k;
  if (name == "ml1m") return RatingsFormat::kMl1m;
  throw InvalidArgument("unknown dataset format '" + std::string(name) + "' (ml100k or ml1m)");
}

RatingsDataset make_dataset(std::vector<Rating> records) {
  RatingsDataset data;
  std::vector<std::int64_t> users;
  std::vector<std::int64_t> items;
  for (const Rating& r : records) {
    users.push_back(r.user);
    items.push_back(r.item);
  }
  auto unique_sorted = [](std::vector<std::int64_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(users);
  unique_sorted(items);
  data.user_ids = users;
  data.item_ids = items;
  for (std::size_t k = 0; k < users.size(); ++k) data.user_index.emplace(users[k], k);
  for (std::size_t k = 0; k < items.size(); ++k) data.item_index.emplace(items[k], k);

  std::vector<bool> seen(users.size() * items.size(), false);
  data.records.reserve(records.size());
  for (const Rating& r : records) {
    const std::size_t cell = data.user_index[r.user] * items.size() + data.item_index[r.item];
    if (seen[cell]) continue;
    seen[cell] = true;
    data.records.push_back(r);
  }
  if (data.records.size() != records.size()) {
    data.warnings.push_back(std::to_string(records.size() - data.records.size()) +
                            " duplicate (user, item) pairs dropped");
  }
  return data;
}

namespace {

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError("malformed field '" + std::string(field) + "'", line);
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + sep.size();
  }
  return out;
}

struct Totals {
  std::size_t records;
  std::size_t users;
  std::size_t items;
};

Totals documented_totals(RatingsFormat format) {
  return format == RatingsFormat::kMl100k ? Totals{100000, 943, 1682} : Totals{1000209, 6040, 3706};
}

}  // namespace

RatingsDataset parse_movielens(std::istream& in, RatingsFormat format) {
  const std::string_view sep = format == RatingsFormat::kMl100k ? "\t" : "::";
  std::vector<Rating> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
    if (body.empty()) continue;
    const auto fields = split_fields(body, sep);
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields separated by '" + std::string(sep == "\t" ? "\\t" : sep) +
                           "', found " + std::to_string(fields.size()),
                       line_no);
    }
    records.push_back({parse_field<std::int64_t>(fields[0], line_no),
                       parse_field<std::int64_t>(fields[1], line_no),
                       parse_field<int>(fields[2], line_no),
                       parse_field<std::int64_t>(fields[3], line_no)});
  }
  return make_dataset(std::move(records));
}

RatingsDataset load_movielens(const std::filesystem::path& path, RatingsFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  RatingsDataset data = parse_movielens(in, format);
  const Totals expected = documented_totals(format);
  if (data.records.size() != expected.records || data.num_users() != expected.users ||
      data.num_items() != expected.items) {
    data.warnings.push_back(
        "counts " + std::to_string(data.records.size()) + " records / " +
        std::to_string(data.num_users()) + " users / " + std::to_string(data.num_items()) +
        " items differ from the distributed " + std::string(to_string(format)) + " totals " +
        std::to_string(expected.records) + " / " + std::to_string(expected.users) + " / " +
        std::to_string(expected.items));
  }
  return data;
}

void write_movielens(std::ostream& out, const RatingsDataset& data, RatingsFormat format) {
  const char* sep = format == RatingsFormat::kMl100k ? "\t" : "::";
  for (const Rating& r : data.records) {
    out << r.user << sep << r.item << sep << r.rating << sep << r.timestamp << '\n';
  }
}

void SplitSpec::validate() const {
  for (double f : {train, validation, test}) {
    if (!(f > 0.0)) throw InvalidArgument("split fractions must be positive");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must sum to 1");
  }
}

ImplicitMatrix build_implicit(const RatingsDataset& data, const SplitSpec& split) {
  split.validate();
  const std::size_t users = data.num_users();
  const std::size_t items = data.num_items();
  ImplicitMatrix out;
  out.y = MaxPlusMatrix(users, items, kUnwatched);

  std::vector<std::size_t> watched;
  watched.reserve(data.records.size());
  for (const Rating& r : data.records) {
    const std::size_t cell = data.user_index.at(r.user) * items + data.item_index.at(r.item);
    out.y.data()[cell] = kWatched;
    watched.push_back(cell);
  }
  std::sort(watched.begin(), watched.end());
  Rng shuffle_rng = make_rng(split.seed, "split");
  std::shuffle(watched.begin(), watched.end(), shuffle_rng);

  const std::size_t total = watched.size();
  const auto n_train = static_cast<std::size_t>(std::llround(split.train * static_cast<double>(total)));
  const auto n_val = std::min(
      total - n_train, static_cast<std::size_t>(std::llround(split.validation * static_cast<double>(total))));
  const std::size_t bounds[4] = {0, n_train, n_train + n_val, total};

  // Cells already taken by some split; watched cells count as taken.
  std::vector<bool> taken(users * items, false);
  for (std::size_t cell : watched) taken[cell] = true;
  std::size_t free_cells = users * items - total;

  Rng negative_rng = make_rng(split.seed, "negatives");
  std::uniform_int_distribution<std::size_t> any_cell(0, users * items == 0 ? 0 : users * items - 1);
  ObservationMask* masks[3] = {&out.train, &out.validation, &out.test};
  for (int s = 0; s < 3; ++s) {
    std::vector<std::size_t> cells(watched.begin() + static_cast<std::ptrdiff_t>(bounds[s]),
                                   watched.begin() + static_cast<std::ptrdiff_t>(bounds[s + 1]));
    const std::size_t want = cells.size();
    if (want >= free_cells) {
      for (std::size_t c = 0; c < users * items; ++c) {
        if (!taken[c]) {
          taken[c] = true;
          cells.push_back(c);
        }
      }
      free_cells = 0;
    } else {
      for (std::size_t added = 0; added < want;) {
        const std::size_t c = any_cell(negative_rng);
        if (taken[c]) continue;
        taken[c] = true;
        cells.push_back(c);
        ++added;
      }
      free_cells -= want;
    }
    *masks[s] = ObservationMask::from_linear(users, items, std::move(cells));
  }
  return out;
}

std::string ModelSpec::describe() const {
  return kind == Kind::kTmf ? "tmf(r=" + std::to_string(r) + ")"
                            : "tc(m=" + std::to_string(m) + ",p=" + std::to_string(p) + ")";
}

double FittedModel::score(std::size_t user, std::size_t item) const {
  double best = kBottom;
  for (std::size_t l = 0; l < left.cols(); ++l) best = tropical_add(best, tropical_mul(left(user, l), right(l, item)));
  return best;
}

double rms(const MaxPlusMatrix& y, const ObservationMask& mask, const ScoreFn& score) {
  if (mask.empty()) throw InvalidArgument("rms: empty mask");
  double sum = 0.0;
  for (std::size_t cell : mask.cells()) {
    const std::size_t i = cell / y.cols();
    const std::size_t j = cell % y.cols();
    const double d = score(i, j) - y(i, j);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(mask.size()));
}

StochasticFit fit_stochastic(const ImplicitMatrix& data, const ModelSpec& model,
                             const StochasticConfig& config,
                             const std::optional<std::pair<MaxPlusMatrix, MaxPlusMatrix>>& init) {
  config.descent.validate();
  if (data.train.empty()) throw InvalidArgument("fit_stochastic: empty train mask");
  if (data.validation.empty()) throw InvalidArgument("fit_stochastic: empty validation mask");
  if (config.batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (config.max_epochs == 0) throw InvalidArgument("max epochs must be positive");
  const std::size_t n = data.y.rows();
  const std::size_t p = data.y.cols();
  const std::uint64_t seed = config.descent.seed;

  FittedModel current{model, {}, {}};
  if (model.kind == ModelSpec::Kind::kTmf) {
    if (model.r == 0) throw InvalidArgument("r must be >= 1");
    std::tie(current.left, current.right) = init ? *init : tmf_random_init(n, model.r, p, seed);
  } else {
    if (model.m == 0 || model.p == 0) throw InvalidArgument("m and p must be >= 1");
    std::tie(current.left, current.right) = init ? *init : tc_random_init(n, model.m, p, seed);
  }
  const std::size_t inner = model.kind == ModelSpec::Kind::kTmf ? model.r : model.m;
  if (current.left.rows() != n || current.left.cols() != inner || current.right.rows() != inner ||
      current.right.cols() != p) {
    throw InvalidArgument("initial factors do not match the model shape");
  }
  auto project = [&](MaxPlusMatrix& right) {
    if (model.kind == ModelSpec::Kind::kTc) project_rank(right, model.p);
  };
  project(current.right);

  auto validation_rms = [&](const FittedModel& m) {
    return rms(data.y, data.validation, [&m](std::size_t i, std::size_t j) { return m.score(i, j); });
  };

  StochasticFit fit;
  fit.model = current;
  fit.best_validation_rms = validation_rms(current);
  fit.validation_trace.push_back(fit.best_validation_rms);

  DescentStreams streams = DescentStreams::from_seed(seed);
  std::vector<std::size_t> order(data.train.cells().begin(), data.train.cells().end());
  std::vector<std::size_t> batch;
  std::size_t step = 0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng epoch_rng = make_rng(seed, "epoch", epoch);
    std::shuffle(order.begin(), order.end(), epoch_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(stop));
      std::sort(batch.begin(), batch.end());
      StepResult result =
          descent_step(data.y, batch, current.left, current.right, config.descent, step++, streams);
      current.left = std::move(result.left);
      current.right = std::move(result.right);
      project(current.right);
    }
    fit.epochs_run = epoch;
    const double val = validation_rms(current);
    fit.validation_trace.push_back(val);
    if (val < fit.best_validation_rms) {
      fit.best_validation_rms = val;
      fit.model = current;
      since_best = 0;
    } else if (++since_best >= config.patience && config.patience > 0) {
      break;
    }
  }
  fit.last = std::move(current);
  return fit;
}

RatingsDataset synthetic_ratings(std::size_t users, std::size_t items, std::size_t count,
                                 std::uint64_t seed) {
  if (users == 0 || items == 0) throw InvalidArgument("synthetic_ratings: empty shape");
  if (count > users * items) throw InvalidArgument("synthetic_ratings: more ratings than cells");
  Rng rng = make_rng(seed, "ratings");
  // Skewed item popularity and user activity, roughly like real logs.
  std::vector<double> item_weight(items), user_weight(users);
  for (std::size_t j = 0; j < items; ++j) item_weight[j] = 1.0 / std::pow(static_cast<double>(j + 1), 0.8);
  for (std::size_t u = 0; u < users; ++u) user_weight[u] = 1.0 / std::pow(static_cast<double>(u + 1), 0.5);
  std::discrete_distribution<std::size_t> pick_item(item_weight.begin(), item_weight.end());
  std::discrete_distribution<std::size_t> pick_user(user_weight.begin(), user_weight.end());
  std::uniform_int_distribution<int> stars(1, 5);
  std::vector<char> seen(users * items, 0);
  std::vector<Rating> records;
  records.reserve(count);
  std::int64_t clock = 874724710;
  auto add = [&](std::size_t u, std::size_t j) {
    if (seen[u * items + j]) return;
    seen[u * items + j] = 1;
    records.push_back({static_cast<std::int64_t>(u + 1), static_cast<std::int64_t>(j + 1), stars(rng), clock++});
  };
  // Every user and item appears at least once.
  for (std::size_t u = 0; u < users && records.size() < count; ++u) add(u, pick_item(rng));
  for (std::size_t j = 0; j < items && records.size() < count; ++j) add(pick_user(rng), j);
  std::size_t attempts = 0;
  while (records.size() < count && attempts < 50 * count) {
    add(pick_user(rng), pick_item(rng));
    ++attempts;
  }
  for (std::size_t cell = 0; cell < users * items && records.size() < count; ++cell) add(cell / items, cell % items);
  return make_dataset(std::move(records));
}

HitRate hit_rate_at_10(const ImplicitMatrix& data, const ScoreFn& score, std::uint64_t seed,
                       std::size_t negatives, std::size_t cutoff) {
  const std::size_t users = data.y.rows();
  const std::size_t items = data.y.cols();
  std::vector<std::vector<std::size_t>> test_pos(users);
  std::vector<std::vector<std::size_t>> test_neg(users);
  for (std::size_t cell : data.test.cells()) {
    const std::size_t u = cell / items;
    (data.y.data()[cell] == kWatched ? test_pos : test_neg)[u].push_back(cell % items);
  }

  HitRate out;
  std::vector<std::size_t> pool;
  for (std::size_t u = 0; u < users; ++u) {
    if (test_pos[u].empty()) continue;
    Rng rng = make_rng(seed, "hit-rate", u);
    std::uniform_int_distribution<std::size_t> pick(0, test_pos[u].size() - 1);
    const std::size_t positive = test_pos[u][pick(rng)];

    if (test_neg[u].size() >= negatives) {
      pool = test_neg[u];
    } else {
      pool.clear();
      const auto row = data.y.row(u);
      for (std::size_t j = 0; j < items; ++j)
        if (row[j] == kUnwatched) pool.push_back(j);
    }
    const std::size_t take = std::min(negatives, pool.size());
    for (std::size_t k = 0; k < take; ++k) {
      std::uniform_int_distribution<std::size_t> swap_with(k, pool.size() - 1);
      std::swap(pool[k], pool[swap_with(rng)]);
    }

    const double target = score(u, positive);
    std::size_t lower = 0;
    std::size_t equal = 0;
    for (std::size_t k = 0; k < take; ++k) {
      const double s = score(u, pool[k]);
      if (s < target) {
        ++lower;
      } else if (s == target) {
        ++equal;
      }
    }
    std::size_t position = lower;
    if (equal > 0) position += std::uniform_int_distribution<std::size_t>(0, equal)(rng);
    ++out.eligible_users;
    if (position < cutoff) ++out.hits;
  }
  if (out.eligible_users == 0) throw InvalidArgument("hit_rate_at_10: no user has a watched test item");
  out.value = static_cast<double>(out.hits) / static_cast<double>(out.eligible_users);
  return out;
}

}  // namespace tropfact
