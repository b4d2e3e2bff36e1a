// Acceptance run: one PASS / FAIL / SKIP line per criterion.
//
// The exit status is 0 once every criterion has been evaluated, so the ctest
// entry records that the run completed; verdicts are in the printed lines.
// Pass --strict to exit 1 when any criterion fails.
//
// MovieLens files are looked up under $TROPFACT_DATA, then <source>/data:
// ml-100k/u.data and ml-1m/ratings.dat. The 1M run also needs
// TROPFACT_ML1M=1 since it takes hours.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tropfact/matrix_io.hpp"
#include "tropfact/recsys.hpp"
#include "tropfact/synth.hpp"
#include "tropfact/tc.hpp"
#include "tropfact/tmf.hpp"

namespace fs = std::filesystem;
using namespace tropfact;

namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Verdict::kPass : Verdict::kFail, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

// Dyadic values keep every sum exact, so semiring laws can be checked with ==.
MaxPlusMatrix dyadic(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> v(-80, 80);
  MaxPlusMatrix m(rows, cols);
  for (double& x : m.data()) x = v(rng) * 0.25;
  return m;
}

// ---- 1 ------------------------------------------------------------------

Outcome semiring_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  constexpr int kCases = 1000;
  int assoc = 0, ident = 0, scaling = 0, mono = 0, argmax = 0;

  for (int c = 0; c < kCases; ++c) {
    const std::size_t m = dim(rng), k = dim(rng), l = dim(rng), n = dim(rng);
    const auto a = dyadic(m, k, rng), b = dyadic(k, l, rng), cm = dyadic(l, n, rng);
    assoc += maxplus_matmul(maxplus_matmul(a, b), cm) == maxplus_matmul(a, maxplus_matmul(b, cm));
  }
  for (int c = 0; c < kCases; ++c) {
    const auto a = dyadic(dim(rng), dim(rng), rng);
    ident += maxplus_matmul(MaxPlusMatrix::identity(a.rows()), a) == a &&
             maxplus_matmul(a, MaxPlusMatrix::identity(a.cols())) == a;
  }
  for (int c = 0; c < kCases; ++c) {
    const auto a = dyadic(dim(rng), dim(rng), rng);
    const auto b = dyadic(a.cols(), dim(rng), rng);
    const double lambda = std::uniform_int_distribution<int>(-40, 40)(rng) * 0.25;
    scaling += maxplus_matmul(shift(a, lambda), b) == shift(maxplus_matmul(a, b), lambda);
  }
  for (int c = 0; c < kCases; ++c) {
    auto a = dyadic(dim(rng), dim(rng), rng);
    const auto b = dyadic(a.cols(), dim(rng), rng);
    const auto before = maxplus_matmul(a, b);
    std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
    a.data()[pick(rng)] += std::uniform_int_distribution<int>(1, 20)(rng) * 0.25;
    const auto after = maxplus_matmul(a, b);
    bool ok = true;
    for (std::size_t q = 0; q < after.size(); ++q) ok &= after.data()[q] >= before.data()[q];
    mono += ok;
  }
  for (int c = 0; c < kCases; ++c) {
    // Coarse values for frequent ties, some bottoms, some all-bottom rows.
    std::uniform_int_distribution<int> coarse(0, 3);
    std::bernoulli_distribution bottom(0.25);
    MaxPlusMatrix a(dim(rng), dim(rng)), b(a.cols(), dim(rng));
    for (double& x : a.data()) x = bottom(rng) ? kBottom : coarse(rng) + 0.1;
    for (double& x : b.data()) x = bottom(rng) ? kBottom : coarse(rng) * 0.7;
    Rng ties(c);
    const auto [prod, pi] = maxplus_matmul_argmax(a, b, ties);
    bool ok = prod == maxplus_matmul(a, b);
    for (std::size_t i = 0; i < prod.rows(); ++i) {
      for (std::size_t j = 0; j < prod.cols(); ++j) {
        if (is_bottom(prod(i, j))) {
          ok &= !pi.defined(i, j);
        } else {
          const auto l = static_cast<std::size_t>(pi(i, j));
          ok &= pi.defined(i, j) && tropical_mul(a(i, l), b(l, j)) == prod(i, j);
        }
      }
    }
    argmax += ok;
  }
  const double t = seconds_since(t0);
  const bool ok = assoc == kCases && ident == kCases && scaling == kCases && mono == kCases &&
                  argmax == kCases && t < 10.0;
  return pass_if(ok, "associativity " + std::to_string(assoc) + "/1000, identity " + std::to_string(ident) +
                         "/1000, scaling " + std::to_string(scaling) + "/1000, monotonicity " +
                         std::to_string(mono) + "/1000, argmax " + std::to_string(argmax) + "/1000, " +
                         fmt(t, 3) + " s (limit 10 s)");
}

// ---- 2 ------------------------------------------------------------------

Outcome gradient_oracle() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> rows(1, 4), inner(1, 3), cols(1, 3);
  DescentOptions gd;
  gd.variant = Variant::kGd;
  gd.alpha = 0.01;
  int instances = 0;
  double worst = 0.0;
  while (instances < 200) {
    const std::size_t n = rows(rng), r = inner(rng), p = cols(rng);
    const auto a = oracle::random_uniform(n, r, rng, -1, 1);
    const auto b = oracle::random_uniform(r, p, rng, -1, 1);
    if (oracle::min_maximizer_gap(a, b) < 0.1) continue;
    const auto y = oracle::random_uniform(n, p, rng, -1, 1);
    DescentStreams streams = DescentStreams::from_seed(instances);
    const auto [a1, b1] = tmf_step(y, a, b, gd, 0, nullptr, streams);
    const auto fd = oracle::finite_difference(y, a, b, 1e-5);
    for (std::size_t q = 0; q < a.size(); ++q) {
      worst = std::max(worst, oracle::relative_error(a1.data()[q] - a.data()[q], -gd.alpha / 2 * fd.a.data()[q]));
    }
    for (std::size_t q = 0; q < b.size(); ++q) {
      worst = std::max(worst, oracle::relative_error(b1.data()[q] - b.data()[q], -gd.alpha / 2 * fd.b.data()[q]));
    }
    ++instances;
  }
  return pass_if(worst <= 1e-4, "200 generic instances, worst per-coordinate relative error " + fmt(worst, 3) +
                                    " (limit 1e-4)");
}

// ---- 3 ------------------------------------------------------------------

Outcome equivalences() {
  int mn = 0, zm = 0, nzm = 0, tc = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = gen_synthetic(6, 3, 7, 0.1, 1000 + seed);
    const FactorPair start = tmf_random_init(6, 3, 7, 2000 + seed);
    TmfConfig base;
    base.r = 3;
    base.max_iters = 50;
    base.seed = seed;
    TmfConfig plain = base;
    plain.variant = Variant::kGd;
    const auto ref = tmf_fit(inst.y, plain, nullptr, start);
    auto same = [&](const TmfSolution& s) { return s.a == ref.a && s.b == ref.b && s.trace == ref.trace; };

    TmfConfig c = base;
    c.variant = Variant::kGdmn;
    c.eps = EpsSchedule::constant(0.0);
    mn += same(tmf_fit(inst.y, c, nullptr, start));
    c = base;
    c.noise_scale = 0.0;
    c.variant = Variant::kGdanZeroMean;
    zm += same(tmf_fit(inst.y, c, nullptr, start));
    c.variant = Variant::kGdanNonZeroMean;
    nzm += same(tmf_fit(inst.y, c, nullptr, start));

    // p >= min(m, N) leaves the rank constraint inactive.
    TcConfig t;
    static_cast<DescentOptions&>(t) = base;
    t.m = 3;
    t.p = 3;
    TmfConfig u = base;
    const auto ts = tc_fit(inst.y, t, nullptr, start);
    const auto us = tmf_fit(inst.y, u, nullptr, start);
    tc += ts.a == us.a && from_eigen(ts.c) == us.b && ts.trace == us.trace;
  }
  return pass_if(mn == 20 && zm == 20 && nzm == 20 && tc == 20,
                 "GDMN(eps=0)=GD " + std::to_string(mn) + "/20, GDAN-ZM(0)=GD " + std::to_string(zm) +
                     "/20, GDAN-NZM(0)=GD " + std::to_string(nzm) + "/20, TC(inactive)=TMF " +
                     std::to_string(tc) + "/20 (bit-wise, 50 iterations)");
}

// ---- 4 ------------------------------------------------------------------

Outcome projection_suite() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Eigen::Index> dim(2, 8);
  int idem = 0, rank_ok = 0, optimal = 0, factor_ok = 0;
  double worst_idem = 0.0, worst_recon = 0.0;
  for (int c = 0; c < 200; ++c) {
    const Eigen::Index rows = dim(rng), cols = dim(rng);
    const Eigen::Index lo = std::min(rows, cols);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, static_cast<std::size_t>(lo))(rng);
    const Eigen::MatrixXd cmat = oracle::random_rank(rows, cols, lo, rng);
    const Eigen::MatrixXd proj = rank_projection(cmat, p);

    const double d = (rank_projection(proj, p) - proj).norm();
    worst_idem = std::max(worst_idem, d);
    idem += d <= 1e-10;
    rank_ok += numerical_rank(proj) <= p;

    const double err = (cmat - proj).norm();
    bool best = true;
    for (int k = 0; k < 100; ++k) {
      best &= err <= (cmat - oracle::random_rank(rows, cols, static_cast<Eigen::Index>(p), rng)).norm();
    }
    optimal += best;

    // Factorization of a matrix of rank q <= p, padded to p.
    const auto q = std::uniform_int_distribution<Eigen::Index>(1, static_cast<Eigen::Index>(p))(rng);
    const Eigen::MatrixXd low = oracle::random_rank(rows, cols, q, rng);
    const RankFactors f = rank_factorize(low, p);
    const double recon = (f.b * f.x - low).norm() / low.norm();
    worst_recon = std::max(worst_recon, recon);
    bool shapes = f.b.rows() == rows && f.b.cols() == static_cast<Eigen::Index>(p) &&
                  f.x.rows() == static_cast<Eigen::Index>(p) && f.x.cols() == cols;
    for (Eigen::Index k = q; shapes && k < static_cast<Eigen::Index>(p); ++k) {
      shapes &= f.b.col(k).isZero(0.0) && f.x.row(k).isZero(0.0);
    }
    factor_ok += shapes && recon <= 1e-8;
  }
  return pass_if(idem == 200 && rank_ok == 200 && optimal == 200 && factor_ok == 200,
                 "idempotent " + std::to_string(idem) + "/200 (worst " + fmt(worst_idem, 3) + "), rank " +
                     std::to_string(rank_ok) + "/200, optimal vs 100 random " + std::to_string(optimal) +
                     "/200, factorize " + std::to_string(factor_ok) + "/200 (worst relative " +
                     fmt(worst_recon, 3) + ")");
}

// ---- 5 ------------------------------------------------------------------

Outcome table1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto algos = standard_algorithms(DescentOptions{});
  // Same seed derivation as `bench table1 --seed 0`.
  const std::uint64_t seed = derive_seed(0, "table1");
  std::ostringstream detail;
  bool ok = true;
  for (double a : {0.01, 0.1, 0.5}) {
    const BenchReport rep = run_comparison(Shape{}, a, algos, 10, 3000, seed);
    const double gd = rep.algorithms[0].mean, mn = rep.algorithms[1].mean, nzm = rep.algorithms[3].mean;
    detail << "a=" << a << ": GD " << fmt(gd, 3) << ", GDMN " << fmt(mn, 3) << ", GDAN-ZM "
           << fmt(rep.algorithms[2].mean, 3) << ", GDAN-NZM " << fmt(nzm, 3) << "; ";
    if (a < 0.5) ok &= nzm < mn && mn < gd;
    if (a == 0.1) ok &= nzm <= 1.0;
    if (a == 0.5) ok &= nzm <= 0.45;
  }
  const double t = seconds_since(t0);
  ok &= t < 300.0;
  detail << fmt(t, 3) << " s (limit 300 s)";
  return pass_if(ok, detail.str());
}

// ---- 6 ------------------------------------------------------------------

Outcome exact_recovery() {
  int tmf_ok = 0, tc_ok = 0;
  std::ostringstream tmf_errors;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto inst = gen_synthetic(10, 5, 11, 0.0, s);
    TmfConfig config;
    config.r = 5;
    config.seed = s;
    const auto sol = tmf_fit(inst.y, config);
    const double rel = std::sqrt(sol.final_objective()) / frobenius_norm(inst.y);
    tmf_errors << (s > 1 ? " " : "") << fmt(rel, 2);
    tmf_ok += rel <= 1e-2;

    const auto planted = gen_planted_tc(8, 4, 2, 20, s);
    TcConfig tc;
    tc.m = 4;
    tc.p = 2;
    tc.seed = s;
    const auto tsol = tc_fit(planted.y, tc);
    tc_ok += tsol.final_objective() <= 1e-2 * std::pow(frobenius_norm(planted.y), 2);
  }
  return pass_if(tmf_ok >= 6 && tc_ok >= 5, "TMF relative error <= 1e-2 in " + std::to_string(tmf_ok) +
                                                "/10 (need 6; errors " + tmf_errors.str() + "), TC objective <= 1e-2 ||Y||^2 in " +
                                                std::to_string(tc_ok) + "/10 (need 5)");
}

// ---- 7, 8 ---------------------------------------------------------------

fs::path data_root() {
  if (const char* env = std::getenv("TROPFACT_DATA")) return env;
  return fs::path(TROPFACT_SOURCE_DIR) / "data";
}

struct RecsysResult {
  double rms_test;
  double hr;
  double seconds;
  std::string model;
};

RecsysResult evaluate(const ImplicitMatrix& m, const std::vector<ModelSpec>& sweep) {
  const auto t0 = std::chrono::steady_clock::now();
  StochasticConfig config;
  std::optional<StochasticFit> best;
  for (const ModelSpec& spec : sweep) {
    StochasticFit fit = fit_stochastic(m, spec, config);
    if (!best || fit.best_validation_rms < best->best_validation_rms) best = std::move(fit);
  }
  const FittedModel& model = best->model;
  const ScoreFn score = [&model](std::size_t u, std::size_t i) { return model.score(u, i); };
  return {rms(m.y, m.test, score), hit_rate_at_10(m, score, 0).value, seconds_since(t0), model.spec.describe()};
}

Outcome movielens_100k() {
  const fs::path file = data_root() / "ml-100k" / "u.data";
  if (!fs::exists(file)) return {Verdict::kSkip, "dataset not found at " + file.string()};
  const auto data = load_movielens(file, RatingsFormat::kMl100k);
  const auto m = build_implicit(data, SplitSpec{});
  const auto tmf = evaluate(m, {ModelSpec::tmf(25), ModelSpec::tmf(35), ModelSpec::tmf(45)});
  const auto tc = evaluate(m, {ModelSpec::tc(40, 25)});
  const bool ok = tmf.rms_test <= 0.45 && tmf.hr >= 0.70 && tmf.seconds < 1800 && tc.rms_test <= 0.45 &&
                  tc.hr >= 0.70 && tc.seconds < 1800;
  return pass_if(ok, "TMF best " + tmf.model + ": RMS " + fmt(tmf.rms_test) + ", HR@10 " + fmt(tmf.hr) + " (" +
                         fmt(tmf.seconds, 3) + " s); TC: RMS " + fmt(tc.rms_test) + ", HR@10 " + fmt(tc.hr) + " (" +
                         fmt(tc.seconds, 3) + " s); limits RMS <= 0.45, HR@10 >= 0.70, 30 min each");
}

Outcome movielens_1m() {
  const fs::path file = data_root() / "ml-1m" / "ratings.dat";
  if (!fs::exists(file)) return {Verdict::kSkip, "optional; dataset not found at " + file.string()};
  const char* opt_in = std::getenv("TROPFACT_ML1M");
  if (!opt_in || std::string(opt_in) != "1") return {Verdict::kSkip, "optional; set TROPFACT_ML1M=1 to run"};
  const auto data = load_movielens(file, RatingsFormat::kMl1m);
  const auto m = build_implicit(data, SplitSpec{});
  const auto tmf = evaluate(m, {ModelSpec::tmf(40)});
  const auto tc = evaluate(m, {ModelSpec::tc(40, 25)});
  return pass_if(tmf.hr >= 0.70 && tc.hr >= 0.70, "TMF r=40: RMS " + fmt(tmf.rms_test) + ", HR@10 " + fmt(tmf.hr) +
                                                      "; TC: RMS " + fmt(tc.rms_test) + ", HR@10 " + fmt(tc.hr) +
                                                      "; limit HR@10 >= 0.70");
}

// ---- 9 ------------------------------------------------------------------

Outcome random_scorer() {
  const fs::path file = data_root() / "ml-100k" / "u.data";
  const bool real = fs::exists(file);
  const RatingsDataset data =
      real ? load_movielens(file, RatingsFormat::kMl100k) : synthetic_ratings(943, 1682, 100000, 9);
  const ImplicitMatrix m = build_implicit(data, SplitSpec{});
  // A single 943-user draw has standard deviation near 0.01 by itself, so the
  // mean of 20 independent repetitions is compared with the band.
  constexpr int kReps = 20;
  double sum = 0.0;
  std::size_t users = 0;
  for (int rep = 0; rep < kReps; ++rep) {
    Rng rng = make_rng(9, "scores", rep);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MaxPlusMatrix scores(m.y.rows(), m.y.cols());
    for (double& x : scores.data()) x = u(rng);
    const HitRate hr = hit_rate_at_10(m, [&](std::size_t i, std::size_t j) { return scores(i, j); }, rep);
    sum += hr.value;
    users = hr.eligible_users;
  }
  const double mean = sum / kReps;
  return pass_if(std::abs(mean - 0.099) <= 0.01,
                 "mean HR@10 " + fmt(mean) + " over " + std::to_string(kReps) + " repetitions, " +
                     std::to_string(users) + " users (" + (real ? "ml-100k" : "ml-100k-sized synthetic log") +
                     "); band 0.099 +- 0.01");
}

// ---- 10 -----------------------------------------------------------------

int run_cli(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" + TROPFACT_CLI + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool identical(const fs::path& a, const fs::path& b) {
  if (fs::is_regular_file(a)) return fs::is_regular_file(b) && slurp(a) == slurp(b);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    if (slurp(e.path()) != slurp(b / fs::relative(e.path(), a))) return false;
    ++files;
  }
  return files > 0;
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "tropfact_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  if (run_cli(dir, "generate tmf --a 0.1 --seed 5 --out inst") != 0 ||
      run_cli(dir, "generate tc --seed 5 --out tcinst") != 0 ||
      run_cli(dir, "generate ratings --users 80 --items 120 --count 1500 --seed 5 --out ml") != 0) {
    return {Verdict::kFail, "could not prepare inputs"};
  }
  struct Case {
    const char* name;
    std::string args;
    const char* out;  // output path relative to the run directory
  };
  const std::vector<Case> cases = {
      {"generate tmf", "generate tmf --a 0.1 --seed 7 --out o", "o"},
      {"generate tc", "generate tc --seed 7 --out o", "o"},
      {"generate ratings", "generate ratings --users 50 --items 70 --count 400 --seed 7 --out o", "o"},
      {"factorize", "factorize ../inst/Y.csv --r 5 --variant gdan-nzm --seed 7 --iters 500 --out o", "o"},
      {"compress", "compress ../tcinst/Y.csv --m 4 --p 2 --variant gdan-zm --seed 7 --iters 500 --out o", "o"},
      {"bench table1", "bench table1 --trials 2 --iters 200 --seed 7 --jobs 2 --out o.json", "o.json"},
      {"bench curves", "bench curves --iters 200 --seed 7 --out o.csv --format csv", "o.csv"},
      {"recsys eval", "recsys eval --data ../ml/u.data --r 5 --epochs 5 --batch-size 512 --seed 7 --out o", "o"},
  };
  std::vector<std::string> bad;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const fs::path r1 = dir / ("c" + std::to_string(k) + "_1"), r2 = dir / ("c" + std::to_string(k) + "_2");
    fs::create_directories(r1);
    fs::create_directories(r2);
    const bool ok = run_cli(r1, cases[k].args) == 0 && run_cli(r2, cases[k].args) == 0 &&
                    identical(r1 / cases[k].out, r2 / cases[k].out);
    if (!ok) bad.push_back(cases[k].name);
  }
  std::string detail = std::to_string(cases.size() - bad.size()) + "/" + std::to_string(cases.size()) +
                       " subcommands byte-identical across two runs (recsys fetch needs network, not run)";
  for (const auto& b : bad) detail += "; differs or failed: " + b;
  return pass_if(bad.empty(), detail);
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"semiring and kernel suite", semiring_suite},
      {"gradient oracle", gradient_oracle},
      {"update rule equivalences", equivalences},
      {"rank projection suite", projection_suite},
      {"synthetic comparison ordering", table1},
      {"exact recovery", exact_recovery},
      {"MovieLens 100k", movielens_100k},
      {"MovieLens 1M", movielens_1m},
      {"random-scorer HR@10", random_scorer},
      {"CLI determinism", cli_determinism},
  };
  int passed = 0, failed = 0, skipped = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::kPass ? "PASS" : o.verdict == Verdict::kFail ? "FAIL" : "SKIP";
    (o.verdict == Verdict::kPass ? passed : o.verdict == Verdict::kFail ? failed : skipped)++;
    std::cout << "[" << tag << "] " << (k + 1) << ". " << criteria[k].name << ": " << o.detail << std::endl;
  }
  std::cout << passed << " passed, " << failed << " failed, " << skipped << " skipped" << std::endl;
  return strict && failed > 0 ? 1 : 0;
}
