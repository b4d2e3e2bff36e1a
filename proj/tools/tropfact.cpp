// tropfact: command-line front end for the max-plus factorization library.
//
// Exit codes: 0 success, 2 usage error, 3 input/parse error, 4 numerical
// failure.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fetch.hpp"
#include "json.hpp"
#include "tropfact/errors.hpp"
#include "tropfact/matrix_io.hpp"
#include "tropfact/recsys.hpp"
#include "tropfact/synth.hpp"
#include "tropfact/tc.hpp"
#include "tropfact/tmf.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tropfact;

namespace {

struct Global {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  std::string log_level = "info";
  std::string config;
};

struct DescentFlags {
  std::string variant = std::string(to_string(DescentOptions{}.variant));
  double alpha = DescentOptions{}.alpha;
  std::string eps = "sched";
  double noise_scale = DescentOptions{}.noise_scale;
  std::size_t iters = DescentOptions{}.max_iters;
  std::size_t patience = 0;

  DescentOptions resolve(std::uint64_t seed) const {
    DescentOptions o;
    o.variant = parse_variant(variant);
    o.alpha = alpha;
    o.eps = EpsSchedule::parse(eps);
    o.noise_scale = noise_scale;
    o.max_iters = iters;
    o.patience = patience;
    o.seed = seed;
    o.validate();
    return o;
  }
};

const CLI::Validator kPositiveInt(
    [](std::string& text) -> std::string {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || v == 0) {
        return "must be a positive integer, got '" + text + "'";
      }
      return {};
    },
    "POSITIVE");

void add_descent_flags(CLI::App* app, DescentFlags& f, bool iterative = true) {
  app->add_option("--variant", f.variant, "update rule: gd, gdmn, gdan-zm, gdan-nzm")
      ->check(CLI::IsMember({"gd", "gdmn", "gdan-zm", "gdan-nzm"}, CLI::ignore_case));
  app->add_option("--alpha", f.alpha, "step size")->check(CLI::PositiveNumber);
  app->add_option("--eps", f.eps, "weight of non-maximizing terms: 'sched' for 9/(500+k) or a constant");
  app->add_option("--noise-scale", f.noise_scale, "additive noise amplitude as a multiple of eps_k")
      ->check(CLI::NonNegativeNumber);
  if (iterative) {
    app->add_option("--iters", f.iters, "iteration budget")->check(kPositiveInt);
    app->add_option("--patience", f.patience, "stop after this many non-improving iterations (0 = off)");
  }
}

json descent_json(const DescentOptions& o) {
  return {{"variant", to_string(o.variant)}, {"alpha", o.alpha},          {"eps", o.eps.describe()},
          {"noise_scale", o.noise_scale},    {"iters", o.max_iters},      {"patience", o.patience}};
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return format_value(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// summary.json or summary.csv (key,value) depending on --format.
void write_summary(const fs::path& dir, const json& summary, const std::string& format) {
  if (format == "csv") {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw ParseError("cannot write " + (dir / "summary.csv").string());
    out << "key,value\n";
    for (const auto& [k, v] : summary.items()) out << k << ',' << csv_cell(v) << '\n';
  } else {
    write_json(dir / "summary.json", summary);
  }
}

fs::path out_or(const Global& g, const char* fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

// Sidecar used when the primary output is a single CSV file.
fs::path config_sidecar(const fs::path& file) {
  fs::path p = file;
  p.replace_extension();
  return fs::path(p.string() + ".config.json");
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Flat key=value file; a key names a flag of the active command chain and is
// applied only when that flag was not given on the command line.
void apply_config(const fs::path& path, const std::vector<CLI::App*>& chain) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key == "config") throw InvalidArgument("config file cannot name another config file");
    CLI::Option* opt = nullptr;
    for (CLI::App* app : chain) {
      if ((opt = app->get_option_no_throw("--" + key))) break;
    }
    if (!opt) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (opt->count() == 0) {
      opt->add_result(value);
      opt->run_callback();
    }
  }
}

double masked_norm(const MaxPlusMatrix& y, const ObservationMask* mask) {
  return frobenius_error(y, MaxPlusMatrix(y.rows(), y.cols(), 0.0), mask);
}

std::optional<ObservationMask> load_mask(const std::string& path, const MaxPlusMatrix& y) {
  if (path.empty()) return std::nullopt;
  return read_mask(path, y.rows(), y.cols());
}

// ---- factorize ----------------------------------------------------------

struct FactorizeArgs {
  std::string input;
  std::size_t r = 1;
  DescentFlags descent;
  std::string mask;
  std::string init;
};

int run_factorize(const Global& g, const FactorizeArgs& a) {
  const MaxPlusMatrix y = read_matrix(fs::path(a.input));
  const auto mask = load_mask(a.mask, y);
  TmfConfig config;
  static_cast<DescentOptions&>(config) = a.descent.resolve(g.seed);
  config.r = a.r;
  std::optional<FactorPair> init;
  if (!a.init.empty()) init = FactorPair{read_matrix(fs::path(a.init) / "A.csv"), read_matrix(fs::path(a.init) / "B.csv")};

  spdlog::info("factorize {}x{} with r={} ({}, {} iterations)", y.rows(), y.cols(), a.r,
               to_string(config.variant), config.max_iters);
  const TmfSolution sol = tmf_fit(y, config, mask ? &*mask : nullptr, init);

  const fs::path dir = out_or(g, "factorize_out");
  save_solution(dir, sol);
  json resolved = {{"command", "factorize"}, {"input", a.input}, {"r", a.r},   {"seed", g.seed},
                   {"mask", a.mask},         {"init", a.init},   {"format", g.format}};
  resolved.update(descent_json(config));
  write_json(dir / "config.json", resolved);

  const double norm = masked_norm(y, mask ? &*mask : nullptr);
  const double relative = norm > 0.0 ? std::sqrt(sol.final_objective()) / norm : std::sqrt(sol.final_objective());
  json summary = {{"final_objective", sol.final_objective()},
                  {"best_objective", sol.best_objective()},
                  {"iterations_run", sol.iterations_run},
                  {"relative_error", relative}};
  write_summary(dir, summary, g.format);
  std::cout << "objective " << format_value(sol.final_objective()) << " after " << sol.iterations_run
            << " iterations (relative error " << format_value(relative) << ")\n";
  return 0;
}

// ---- compress -----------------------------------------------------------

struct CompressArgs {
  std::string input;
  std::size_t m = 1;
  std::size_t p = 1;
  DescentFlags descent;
  std::string mask;
  std::string init;
};

int run_compress(const Global& g, const CompressArgs& a) {
  const MaxPlusMatrix y = read_matrix(fs::path(a.input));
  const auto mask = load_mask(a.mask, y);
  TcConfig config;
  static_cast<DescentOptions&>(config) = a.descent.resolve(g.seed);
  config.m = a.m;
  config.p = a.p;
  std::optional<std::pair<MaxPlusMatrix, MaxPlusMatrix>> init;
  if (!a.init.empty()) init = std::pair{read_matrix(fs::path(a.init) / "A.csv"), read_matrix(fs::path(a.init) / "C.csv")};

  spdlog::info("compress {}x{} with m={} p={} ({}, {} iterations)", y.rows(), y.cols(), a.m, a.p,
               to_string(config.variant), config.max_iters);
  const TcSolution sol = tc_fit(y, config, mask ? &*mask : nullptr, init);

  const fs::path dir = out_or(g, "compress_out");
  save_solution(dir, sol);
  json resolved = {{"command", "compress"}, {"input", a.input}, {"m", a.m},          {"p", a.p},
                   {"seed", g.seed},        {"mask", a.mask},   {"init", a.init},    {"format", g.format}};
  resolved.update(descent_json(config));
  write_json(dir / "config.json", resolved);

  const double norm = masked_norm(y, mask ? &*mask : nullptr);
  const double relative = norm > 0.0 ? std::sqrt(sol.final_objective()) / norm : std::sqrt(sol.final_objective());
  const std::size_t rank = numerical_rank(sol.c);
  json summary = {{"final_objective", sol.final_objective()},
                  {"iterations_run", sol.iterations_run},
                  {"relative_error", relative},
                  {"rank_c", rank}};
  write_summary(dir, summary, g.format);
  std::cout << "objective " << format_value(sol.final_objective()) << " after " << sol.iterations_run
            << " iterations, rank(C) = " << rank << '\n';
  return 0;
}

// ---- generate -----------------------------------------------------------

struct GenerateArgs {
  std::size_t n = 10, r = 5, p = 11;
  double a = 0.0;
  std::size_t tc_n = 8, tc_m = 4, tc_p = 2, tc_cols = 20;
  std::size_t users = 943, items = 1682, count = 100000;
  std::string layout = "ml100k";
};

int run_generate_tmf(const Global& g, const GenerateArgs& a) {
  const SyntheticInstance inst = gen_synthetic(a.n, a.r, a.p, a.a, g.seed);
  const fs::path dir = out_or(g, "generated");
  fs::create_directories(dir);
  write_matrix(dir / "Y.csv", inst.y);
  write_matrix(dir / "A_true.csv", inst.a_true);
  write_matrix(dir / "B_true.csv", inst.b_true);
  write_matrix(dir / "R.csv", inst.noise);
  write_json(dir / "config.json", {{"command", "generate tmf"}, {"n", a.n}, {"r", a.r}, {"p", a.p}, {"a", a.a}, {"seed", g.seed}});
  std::cout << "wrote " << a.n << "x" << a.p << " instance to " << dir.string() << '\n';
  return 0;
}

int run_generate_tc(const Global& g, const GenerateArgs& a) {
  const PlantedCompression inst = gen_planted_tc(a.tc_n, a.tc_m, a.tc_p, a.tc_cols, g.seed);
  const fs::path dir = out_or(g, "generated");
  fs::create_directories(dir);
  write_matrix(dir / "Y.csv", inst.y);
  write_matrix(dir / "A_true.csv", inst.a);
  write_real_matrix(dir / "B_true.csv", inst.b);
  write_real_matrix(dir / "X_true.csv", inst.x);
  write_json(dir / "config.json", {{"command", "generate tc"}, {"n", a.tc_n}, {"m", a.tc_m}, {"p", a.tc_p},
                                   {"cols", a.tc_cols}, {"seed", g.seed}});
  std::cout << "wrote " << a.tc_n << "x" << a.tc_cols << " instance to " << dir.string() << '\n';
  return 0;
}

int run_generate_ratings(const Global& g, const GenerateArgs& a) {
  const RatingsFormat format = parse_ratings_format(a.layout);
  const RatingsDataset data = synthetic_ratings(a.users, a.items, a.count, g.seed);
  const fs::path dir = out_or(g, "generated");
  fs::create_directories(dir);
  const fs::path file = dir / (format == RatingsFormat::kMl100k ? "u.data" : "ratings.dat");
  std::ofstream out(file);
  if (!out) throw ParseError("cannot write " + file.string());
  write_movielens(out, data, format);
  write_json(dir / "config.json", {{"command", "generate ratings"}, {"users", a.users}, {"items", a.items},
                                   {"count", a.count}, {"layout", a.layout}, {"seed", g.seed}});
  std::cout << "wrote " << data.records.size() << " ratings to " << file.string() << '\n';
  return 0;
}

// ---- bench --------------------------------------------------------------

struct FastStmfRow {
  double a;
  double mean;
  double std;
};

// Published FastSTMF results on the same benchmark, cited rather than rerun.
constexpr FastStmfRow kFastStmf[] = {{0.01, 11.2, 4.9}, {0.1, 1.38, 0.52}, {0.5, 0.52, 0.06}};

struct BenchArgs {
  std::vector<double> a{0.01, 0.1, 0.5};
  std::size_t trials = 10;
  std::size_t n = 10, r = 5, p = 11;
  std::size_t jobs = 1;
  DescentFlags descent;
  std::vector<std::string> eps{"0", "0.01", "0.1", "sched"};
  double curve_a = 0.1;
};

json external_baselines() {
  json rows = json::array();
  for (const FastStmfRow& row : kFastStmf) rows.push_back({{"a", row.a}, {"mean", row.mean}, {"std", row.std}});
  return {{"name", "FastSTMF"},
          {"source", "published FastSTMF results on this benchmark, cited, not recomputed"},
          {"rows", rows}};
}

int run_table1(const Global& g, const BenchArgs& b) {
  DescentOptions base = b.descent.resolve(g.seed);
  const Shape shape{b.n, b.r, b.p};
  json resolved = {{"command", "bench table1"}, {"a", b.a},   {"trials", b.trials}, {"n", b.n},
                   {"r", b.r},                  {"p", b.p},   {"seed", g.seed},     {"jobs", b.jobs},
                   {"format", g.format},
                   {"error", "best-so-far ||Y - A⊞B||_F / (a ||R||_F); absolute when a = 0"}};
  resolved.update(descent_json(base));
  resolved.erase("variant");

  json algorithms = json::array();
  std::ostringstream csv;
  csv << "a,name,mean,std,trials\n";
  for (double a : b.a) {
    if (!(a >= 0.0)) throw InvalidArgument("--a: noise amplitudes must be >= 0");
    spdlog::info("table1: a = {} ({} trials, {} iterations)", a, b.trials, base.max_iters);
    const BenchReport report =
        run_comparison(shape, a, standard_algorithms(base), b.trials, base.max_iters, derive_seed(g.seed, "table1"), b.jobs);
    for (const AlgorithmStats& s : report.algorithms) {
      algorithms.push_back({{"name", s.name}, {"a", a}, {"mean", s.mean}, {"std", s.std},
                            {"trials", report.trials}, {"normalized", report.normalized}, {"errors", s.errors}});
      csv << format_value(a) << ',' << s.name << ',' << format_value(s.mean) << ',' << format_value(s.std) << ','
          << report.trials << '\n';
      std::cout << "a=" << format_value(a) << "  " << s.name << "  " << format_value(s.mean) << " +- "
                << format_value(s.std) << '\n';
    }
  }

  if (g.format == "csv") {
    const fs::path file = out_or(g, "table1.csv");
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw ParseError("cannot write " + file.string());
    out << csv.str();
    write_json(config_sidecar(file), {{"config", resolved}, {"external_baselines", external_baselines()}});
  } else {
    write_json(out_or(g, "table1.json"),
               {{"config", resolved}, {"algorithms", algorithms}, {"external_baselines", external_baselines()}});
  }
  return 0;
}

int run_curves(const Global& g, const BenchArgs& b) {
  DescentOptions base = b.descent.resolve(g.seed);
  base.variant = Variant::kGdmn;
  std::vector<AlgorithmSpec> configs;
  for (const std::string& e : b.eps) {
    AlgorithmSpec spec{"eps=" + e, base};
    spec.options.eps = EpsSchedule::parse(e);
    configs.push_back(std::move(spec));
  }
  const SyntheticInstance inst = gen_synthetic(b.n, b.r, b.p, b.curve_a, derive_seed(g.seed, "instance"));
  spdlog::info("curves: {} configs, {} iterations", configs.size(), base.max_iters);
  const auto curves = convergence_curves(inst, b.r, configs, base.max_iters, g.seed);

  json resolved = {{"command", "bench curves"}, {"eps", b.eps}, {"a", b.curve_a}, {"n", b.n},
                   {"r", b.r},                  {"p", b.p},     {"seed", g.seed}, {"format", g.format},
                   {"variant", "gdmn"},         {"alpha", base.alpha}, {"iters", base.max_iters}};
  if (g.format == "json") {
    json series = json::array();
    for (const CurveSeries& c : curves) series.push_back({{"name", c.name}, {"errors", c.errors}});
    write_json(out_or(g, "curves.json"), {{"config", resolved}, {"series", series}});
  } else {
    const fs::path file = out_or(g, "curves.csv");
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    write_curves_csv(file, curves);
    write_json(config_sidecar(file), {{"config", resolved}});
  }
  for (const CurveSeries& c : curves) std::cout << c.name << "  final " << format_value(c.errors.back()) << '\n';
  return 0;
}

// ---- recsys -------------------------------------------------------------

struct RecsysArgs {
  std::string dataset = "ml100k";
  std::string data;
  std::string model = "tmf";
  std::size_t r = 35, m = 40, p = 25;
  std::string sweep;
  DescentFlags descent;
  std::size_t batch_size = 8192;
  std::size_t epochs = 200;
  std::size_t patience = 10;
  std::size_t negatives = 100;
  std::string dest = "data";
};

std::pair<std::string, std::vector<std::size_t>> parse_sweep(const std::string& text, const std::string& model) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw InvalidArgument("--sweep expects key=v1,v2,...");
  std::string key = trim(text.substr(0, eq));
  const bool ok = model == "tmf" ? key == "r" : (key == "m" || key == "p");
  if (!ok) throw InvalidArgument("--sweep: key '" + key + "' does not apply to model " + model);
  std::vector<std::size_t> values;
  std::stringstream list(text.substr(eq + 1));
  std::string item;
  while (std::getline(list, item, ',')) {
    item = trim(item);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v == 0) {
      throw InvalidArgument("--sweep: bad value '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw InvalidArgument("--sweep: no values");
  return {key, values};
}

int run_recsys_eval(const Global& g, const RecsysArgs& a) {
  const RatingsFormat format = parse_ratings_format(a.dataset);
  DescentOptions descent = a.descent.resolve(g.seed);
  const fs::path path = a.data.empty() ? cli::default_ratings_path(format, "data") : fs::path(a.data);

  ModelSpec base = a.model == "tmf" ? ModelSpec::tmf(a.r) : ModelSpec::tc(a.m, a.p);
  std::string sweep_key;
  std::vector<std::size_t> sweep_values;
  if (!a.sweep.empty()) std::tie(sweep_key, sweep_values) = parse_sweep(a.sweep, a.model);
  if (a.batch_size == 0 || a.epochs == 0) throw InvalidArgument("--batch-size and --epochs must be positive");

  const RatingsDataset data = load_movielens(path, format);
  for (const std::string& w : data.warnings) spdlog::warn("{}", w);
  spdlog::info("{}: {} ratings, {} users, {} items", path.string(), data.records.size(), data.num_users(),
               data.num_items());
  const ImplicitMatrix implicit = build_implicit(data, SplitSpec{0.8, 0.1, 0.1, g.seed});

  StochasticConfig sc;
  sc.descent = descent;
  sc.batch_size = a.batch_size;
  sc.max_epochs = a.epochs;
  sc.patience = a.patience;

  std::vector<ModelSpec> candidates;
  if (sweep_values.empty()) {
    candidates.push_back(base);
  } else {
    for (std::size_t v : sweep_values) {
      ModelSpec s = base;
      (sweep_key == "r" ? s.r : sweep_key == "m" ? s.m : s.p) = v;
      candidates.push_back(s);
    }
  }

  json sweep = json::array();
  std::optional<StochasticFit> best;
  for (const ModelSpec& spec : candidates) {
    spdlog::info("fitting {}", spec.describe());
    StochasticFit fit = fit_stochastic(implicit, spec, sc);
    spdlog::info("{}: validation RMS {} after {} epochs", spec.describe(), fit.best_validation_rms, fit.epochs_run);
    sweep.push_back({{"model", spec.describe()}, {"rms_validation", fit.best_validation_rms},
                     {"epochs_run", fit.epochs_run}});
    if (!best || fit.best_validation_rms < best->best_validation_rms) best = std::move(fit);
  }

  const FittedModel& model = best->model;
  const ScoreFn score = [&model](std::size_t u, std::size_t i) { return model.score(u, i); };
  const double rms_test = rms(implicit.y, implicit.test, score);
  const HitRate hr = hit_rate_at_10(implicit, score, g.seed, a.negatives);

  const fs::path dir = out_or(g, "recsys_out");
  fs::create_directories(dir / "model");
  write_matrix(dir / "model" / "A.csv", model.left);
  if (model.spec.kind == ModelSpec::Kind::kTmf) {
    write_matrix(dir / "model" / "B.csv", model.right);
  } else {
    const Eigen::MatrixXd c = to_eigen(model.right);
    const RankFactors f = rank_factorize(c, model.spec.p);
    write_real_matrix(dir / "model" / "C.csv", c);
    write_real_matrix(dir / "model" / "B.csv", f.b);
    write_real_matrix(dir / "model" / "X.csv", f.x);
  }

  json metrics = {{"dataset", a.dataset},
                  {"model", a.model},
                  {"r", model.spec.r},
                  {"m", model.spec.m},
                  {"p", model.spec.p},
                  {"rms_test", rms_test},
                  {"rms_validation", best->best_validation_rms},
                  {"hr_at_10", hr.value},
                  {"hr_users", hr.eligible_users},
                  {"seed", g.seed},
                  {"epochs_run", best->epochs_run},
                  {"sweep", sweep},
                  {"warnings", data.warnings},
                  {"protocol",
                   "watched pairs split 80/10/10; each split paired 1:1 with seeded random unwatched cells; "
                   "HR@10 ranks ascending scores of 1 watched test item and sampled unwatched items"}};
  write_json(dir / "metrics.json", metrics);
  if (g.format == "csv") {
    std::ofstream out(dir / "metrics.csv");
    out << "key,value\n";
    for (const auto& [k, v] : metrics.items())
      if (v.is_primitive()) out << k << ',' << csv_cell(v) << '\n';
  }

  json resolved = {{"command", "recsys eval"}, {"dataset", a.dataset},   {"data", path.string()},
                   {"model", a.model},         {"r", a.r},               {"m", a.m},
                   {"p", a.p},                 {"sweep", a.sweep},       {"batch_size", a.batch_size},
                   {"epochs", a.epochs},       {"patience", a.patience}, {"negatives", a.negatives},
                   {"seed", g.seed},           {"format", g.format}};
  json d = descent_json(descent);
  d.erase("iters");
  d.erase("patience");
  resolved.update(d);
  write_json(dir / "config.json", resolved);

  std::cout << model.spec.describe() << ": test RMS " << format_value(rms_test) << ", HR@10 "
            << format_value(hr.value) << " over " << hr.eligible_users << " users\n";
  return 0;
}

int run_recsys_fetch(const RecsysArgs& a) {
  const RatingsFormat format = parse_ratings_format(a.dataset);
  spdlog::info("downloading {}", a.dataset);
  const fs::path file = cli::fetch_movielens(format, a.dest);
  const RatingsDataset data = load_movielens(file, format);
  for (const std::string& w : data.warnings) spdlog::warn("{}", w);
  std::cout << file.string() << ": " << data.records.size() << " ratings, " << data.num_users() << " users, "
            << data.num_items() << " items" << (data.warnings.empty() ? " (counts verified)" : "") << '\n';
  return data.warnings.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-plus (tropical) matrix factorization and compression"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "seed for every random stream");
  app.add_option("--out", g.out, "output directory, or output file for bench (default depends on the command)");
  app.add_option("--format", g.format, "summary format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  app.add_option("--config", g.config, "flat key=value file supplying flags; command-line flags win");

  FactorizeArgs fa;
  auto* factorize = app.add_subcommand("factorize", "fit Y ≈ A ⊞ B");
  factorize->add_option("input", fa.input, "matrix file (CSV, -inf for bottom)")->required();
  factorize->add_option("--r", fa.r, "inner dimension")->check(kPositiveInt);
  add_descent_flags(factorize, fa.descent);
  factorize->add_option("--mask", fa.mask, "observed cells, one 'i,j' per line (0-based)");
  factorize->add_option("--init", fa.init, "directory with A.csv and B.csv to start from");

  CompressArgs ca;
  auto* compress = app.add_subcommand("compress", "fit Y ≈ A ⊞ (B X)");
  compress->add_option("input", ca.input, "matrix file (CSV, -inf for bottom)")->required();
  compress->add_option("--m", ca.m, "number of tropical terms")->check(kPositiveInt);
  compress->add_option("--p", ca.p, "compressed dimension (rank of C)")->check(kPositiveInt);
  add_descent_flags(compress, ca.descent);
  compress->add_option("--mask", ca.mask, "observed cells, one 'i,j' per line (0-based)");
  compress->add_option("--init", ca.init, "directory with A.csv and C.csv to start from");

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "write synthetic inputs");
  generate->require_subcommand(1);
  auto* gen_tmf = generate->add_subcommand("tmf", "Y = A ⊞ B + a R with uniform [0, 1] entries");
  gen_tmf->add_option("--n", ga.n, "rows")->check(kPositiveInt);
  gen_tmf->add_option("--r", ga.r, "inner dimension")->check(kPositiveInt);
  gen_tmf->add_option("--p", ga.p, "columns")->check(kPositiveInt);
  gen_tmf->add_option("--a", ga.a, "noise amplitude")->check(CLI::NonNegativeNumber);
  auto* gen_tc = generate->add_subcommand("tc", "Y = A ⊞ (B X) with uniform [0, 1] factors");
  gen_tc->add_option("--n", ga.tc_n, "rows")->check(kPositiveInt);
  gen_tc->add_option("--m", ga.tc_m, "tropical terms")->check(kPositiveInt);
  gen_tc->add_option("--p", ga.tc_p, "rank")->check(kPositiveInt);
  gen_tc->add_option("--cols", ga.tc_cols, "columns")->check(kPositiveInt);
  auto* gen_ratings = generate->add_subcommand("ratings", "random ratings log in a MovieLens layout");
  gen_ratings->add_option("--users", ga.users, "users")->check(kPositiveInt);
  gen_ratings->add_option("--items", ga.items, "items")->check(kPositiveInt);
  gen_ratings->add_option("--count", ga.count, "ratings")->check(kPositiveInt);
  gen_ratings->add_option("--layout", ga.layout, "ml100k or ml1m")->check(CLI::IsMember({"ml100k", "ml1m"}));

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "synthetic algorithm comparisons");
  bench->require_subcommand(1);
  auto* table1 = bench->add_subcommand("table1", "normalized error of GD, GDMN, GDAN-ZM, GDAN-NZM");
  table1->add_option("--a", ba.a, "noise amplitudes")->delimiter(',');
  table1->add_option("--trials", ba.trials, "trials per amplitude")->check(kPositiveInt);
  table1->add_option("--n", ba.n, "rows")->check(kPositiveInt);
  table1->add_option("--r", ba.r, "inner dimension")->check(kPositiveInt);
  table1->add_option("--p", ba.p, "columns")->check(kPositiveInt);
  table1->add_option("--jobs", ba.jobs, "parallel trials")->check(kPositiveInt);
  add_descent_flags(table1, ba.descent);
  table1->get_option("--variant")->description("unused; all four variants run");
  auto* curves = bench->add_subcommand("curves", "GDMN error curves for several eps settings");
  curves->add_option("--eps", ba.eps, "eps settings: constants or 'sched'")->delimiter(',');
  curves->add_option("--a", ba.curve_a, "noise amplitude")->check(CLI::NonNegativeNumber);
  curves->add_option("--n", ba.n, "rows")->check(kPositiveInt);
  curves->add_option("--r", ba.r, "inner dimension")->check(kPositiveInt);
  curves->add_option("--p", ba.p, "columns")->check(kPositiveInt);
  curves->add_option("--alpha", ba.descent.alpha, "step size")->check(CLI::PositiveNumber);
  curves->add_option("--iters", ba.descent.iters, "iteration budget")->check(kPositiveInt);

  RecsysArgs ra;
  ra.descent.alpha = default_recsys_descent().alpha;
  auto* recsys = app.add_subcommand("recsys", "implicit-feedback recommendation on MovieLens");
  recsys->require_subcommand(1);
  auto* eval = recsys->add_subcommand("eval", "fit, then report test RMS and HR@10");
  eval->add_option("--dataset", ra.dataset, "ml100k or ml1m")->check(CLI::IsMember({"ml100k", "ml1m"}));
  eval->add_option("--data", ra.data, "ratings file (default data/ml-100k/u.data or data/ml-1m/ratings.dat)");
  eval->add_option("--model", ra.model, "tmf or tc")->check(CLI::IsMember({"tmf", "tc"}));
  eval->add_option("--r", ra.r, "TMF inner dimension")->check(kPositiveInt);
  eval->add_option("--m", ra.m, "TC tropical terms")->check(kPositiveInt);
  eval->add_option("--p", ra.p, "TC rank")->check(kPositiveInt);
  eval->add_option("--sweep", ra.sweep, "key=v1,v2,... selected by validation RMS (r for tmf, m or p for tc)");
  add_descent_flags(eval, ra.descent, false);
  eval->add_option("--batch-size", ra.batch_size, "cells per minibatch")->check(kPositiveInt);
  eval->add_option("--epochs", ra.epochs, "epoch cap")->check(kPositiveInt);
  eval->add_option("--patience", ra.patience, "epochs without validation improvement before stopping");
  eval->add_option("--negatives", ra.negatives, "sampled unwatched items per HR@10 list")->check(kPositiveInt);
  auto* fetch = recsys->add_subcommand("fetch", "download a MovieLens archive and verify its counts");
  fetch->add_option("--dataset", ra.dataset, "ml100k or ml1m")->check(CLI::IsMember({"ml100k", "ml1m"}));
  fetch->add_option("--dest", ra.dest, "data directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::vector<CLI::App*> chain;
  for (CLI::App* sub = &app; sub;) {
    chain.insert(chain.begin(), sub);
    const auto subs = sub->get_subcommands();
    sub = subs.empty() ? nullptr : subs.front();
  }

  try {
    if (!g.config.empty()) apply_config(g.config, chain);
    auto logger = spdlog::stderr_color_mt("tropfact");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(g.log_level));

    if (factorize->parsed()) return run_factorize(g, fa);
    if (compress->parsed()) return run_compress(g, ca);
    if (gen_tmf->parsed()) return run_generate_tmf(g, ga);
    if (gen_tc->parsed()) return run_generate_tc(g, ga);
    if (gen_ratings->parsed()) return run_generate_ratings(g, ga);
    if (table1->parsed()) return run_table1(g, ba);
    if (curves->parsed()) return run_curves(g, ba);
    if (eval->parsed()) return run_recsys_eval(g, ra);
    if (fetch->parsed()) return run_recsys_fetch(ra);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
