// Acceptance suite: one PASS/FAIL line per criterion. Run all of them, or a
// single one with --criterion N (that is how ctest registers them).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"

#include "cli.hpp"
#include "heterovol/correlations.hpp"
#include "heterovol/empirical.hpp"
#include "heterovol/error.hpp"
#include "heterovol/gmm.hpp"
#include "heterovol/model.hpp"
#include "heterovol/moments.hpp"
#include "heterovol/oracles.hpp"
#include "heterovol/params_io.hpp"
#include "heterovol/simulator.hpp"

namespace fs = std::filesystem;
using namespace heterovol;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

FullParams table1() { return expand(sp500_1970_2010_estimates()); }

// 1 ------------------------------------------------------------------------

Outcome derived_identities() {
  const auto t0 = Clock::now();
  const DerivedQuantities d = derived(sp500_1970_2010_estimates());
  const double secs = seconds_since(t0);
  const bool s2y = std::abs(d.sigma2_Y - 9.9) <= 1.9 && std::abs(d.sigma2_Y - 9.07) < 0.005;
  const bool s2z = std::abs(d.sigma2_Z - 1.58) <= 0.07 && std::abs(d.sigma2_Z - 1.587) < 0.0005;
  const bool tl = std::abs(d.tau_L - 0.10) <= 0.02 && std::abs(d.tau_L - 0.1026) < 0.00005;
  return {s2y && s2z && tl && secs < 1.0,
          fmt("sigma2_Y=%.4f sigma2_Z=%.4f tau_L=%.5f yr (%.3f s)", d.sigma2_Y, d.sigma2_Z, d.tau_L,
              secs)};
}

// 2 ------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  const auto checks = oracle::run_selfcheck(table1());
  bool ok = true;
  std::string worst;
  double worst_err = 0.0;
  for (const auto& c : checks) {
    // This criterion is about the 1e-6 checks; the 1e-8 inverse-gamma
    // checks belong to criterion 4 and are stricter anyway.
    ok = ok && c.passed && c.max_rel_error < 1e-6;
    if (c.max_rel_error > worst_err) {
      worst_err = c.max_rel_error;
      worst = c.name;
    }
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 60.0,
          fmt("%zu checks, worst %.2e (%s), %.1f s", checks.size(), worst_err, worst.c_str(), secs)};
}

// 3 ------------------------------------------------------------------------

Outcome monte_carlo() {
  const auto t0 = Clock::now();
  const FullParams p = table1();
  const std::vector<int> lev_lags{5, 10, 20, 40};
  const std::vector<int> acf_lags{10, 50, 100, 200};
  constexpr std::size_t kPaths = 100000;
  constexpr std::size_t kBatches = 100;
  constexpr std::size_t kPerBatch = kPaths / kBatches;

  // Per batch, pooled sums over all paths and times of the pair products.
  struct Sums {
    double n1 = 0, x2 = 0, x4 = 0;
    std::vector<double> lev, lev_n, acf, acf_n;
  };
  std::vector<double> lev_est[4], acf_est[4];
  Sums total;
  total.lev.assign(4, 0.0);
  total.lev_n.assign(4, 0.0);
  total.acf.assign(4, 0.0);
  total.acf_n.assign(4, 0.0);

  for (std::size_t b = 0; b < kBatches; ++b) {
    SimConfig c;
    c.n_paths = kPerBatch;
    c.horizon = 1.0;
    c.seed = 20240601;
    c.first_path = b * kPerBatch;
    const auto rets = extract_returns(simulate(p, c));
    Sums s;
    s.lev.assign(4, 0.0);
    s.lev_n.assign(4, 0.0);
    s.acf.assign(4, 0.0);
    s.acf_n.assign(4, 0.0);
    for (const auto& r : rets) {
      const auto& x = r.values;
      for (double v : x) {
        s.n1 += 1.0;
        s.x2 += v * v;
        s.x4 += v * v * v * v;
      }
      for (std::size_t i = 0; i < 4; ++i) {
        const auto k = static_cast<std::size_t>(lev_lags[i]);
        for (std::size_t t = 0; t + k < x.size(); ++t) s.lev[i] += x[t] * x[t + k] * x[t + k];
        s.lev_n[i] += static_cast<double>(x.size() - k);
        const auto m = static_cast<std::size_t>(acf_lags[i]);
        for (std::size_t t = 0; t + m < x.size(); ++t) s.acf[i] += x[t] * x[t] * x[t + m] * x[t + m];
        s.acf_n[i] += static_cast<double>(x.size() - m);
      }
    }
    const double m2 = s.x2 / s.n1, m4 = s.x4 / s.n1;
    for (std::size_t i = 0; i < 4; ++i) {
      lev_est[i].push_back(s.lev[i] / s.lev_n[i] / (m2 * m2));
      acf_est[i].push_back((s.acf[i] / s.acf_n[i] - m2 * m2) / (m4 - m2 * m2));
      total.lev[i] += s.lev[i];
      total.lev_n[i] += s.lev_n[i];
      total.acf[i] += s.acf[i];
      total.acf_n[i] += s.acf_n[i];
    }
    total.n1 += s.n1;
    total.x2 += s.x2;
    total.x4 += s.x4;
  }

  const auto batch_se = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double e : v) mean += e;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double e : v) ss += (e - mean) * (e - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  const double z99 = 2.5758293035489004;
  const double m2 = total.x2 / total.n1, m4 = total.x4 / total.n1;
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < 4; ++i) {
    const double est = total.lev[i] / total.lev_n[i] / (m2 * m2);
    const double ref = leverage(lev_lags[i] * kDailyStep, p);
    const double se = batch_se(lev_est[i]);
    const bool in = std::abs(est - ref) <= z99 * se;
    ok = ok && in;
    detail += fmt(" L%d:%.3f/%.3f(%.1fse)%s", lev_lags[i], est, ref, (est - ref) / se, in ? "" : "!");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double est = (total.acf[i] / total.acf_n[i] - m2 * m2) / (m4 - m2 * m2);
    const double ref = sq_return_acf(acf_lags[i] * kDailyStep, p);
    const double se = batch_se(acf_est[i]);
    const bool in = std::abs(est - ref) <= z99 * se;
    ok = ok && in;
    detail += fmt(" A%d:%.4f/%.4f(%.1fse)%s", acf_lags[i], est, ref, (est - ref) / se, in ? "" : "!");
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 600.0, fmt("%zu paths, %.0f s;", kPaths, secs) + detail};
}

// 4 ------------------------------------------------------------------------

Outcome inverse_gamma() {
  const FullParams p = table1();
  double worst = 0.0;
  for (int m = 1; m <= 3; ++m) {
    const double nuY = p.nu_Y(), nuZ = p.nu_Z();
    const double y = stationary_cross_moment(m, 0, p);
    const double z = stationary_cross_moment(0, m, p);
    const double lamY = (nuY - 1.0) * p.y_inf, lamZ = (nuZ - 1.0) * p.z_inf;
    for (const auto& [got, lam, nu] : {std::tuple{y, lamY, nuY}, std::tuple{z, lamZ, nuZ}}) {
      const double closed = oracle::inverse_gamma_moment(m, lam, nu);
      const double quad = oracle::inverse_gamma_moment_quadrature(m, lam, nu);
      worst = std::max({worst, std::abs(got - closed) / closed, std::abs(got - quad) / quad});
    }
  }
  int flagged = 0, cases = 0;
  for (int m = 2; m <= 4; ++m) {
    for (double shift : {0.0, -0.3}) {
      FullParams q = p;
      const double nu = m + shift;
      q.sigma2_Y = 2.0 * q.kappa_Y() / (nu - 1.0);
      ++cases;
      try {
        (void)cross_moment(m, 0, 0.0, q);
      } catch (const Error& e) {
        flagged += e.code() == ErrorCode::MomentDiverges;
      }
    }
  }
  return {worst < 1e-8 && flagged == cases,
          fmt("max rel err %.2e; divergence flagged %d/%d", worst, flagged, cases)};
}

// 5 ------------------------------------------------------------------------

Outcome gmm_round_trip(int reps) {
  const auto t0 = Clock::now();
  const ReducedParams truth = sp500_1970_2010_estimates();
  const int k51 = acf_lower_lag(derived(truth).tau_L);
  GmmConfig cfg;
  cfg.max_iterations = 1;  // the two-step estimator
  cfg.covariance_weighting = Weighting{WeightingMode::NeweyWest, 250};
  const auto tr = truth.to_array();
  std::array<int, 7> covered{};
  int failures = 0;
  for (int rep = 0; rep < reps; ++rep) {
    SimConfig sc;
    sc.n_paths = 20;
    sc.horizon = 40.0;  // 10^4 days
    sc.seed = 5000 + static_cast<std::uint64_t>(rep);
    auto rets = extract_returns(simulate(expand(truth), sc));
    for (auto& r : rets) r.mu = truth.mu;
    try {
      const GmmReport rep_ = staged_calibration(rets, cfg);
      const auto est = rep_.theta.to_array();
      for (std::size_t i = 0; i < 7; ++i) {
        const double s = rep_.cov.sigma(static_cast<Eigen::Index>(i));
        if (std::isfinite(s) && s > 0.0 && std::abs(est[i] - tr[i]) <= 3.0 * s) ++covered[i];
      }
    } catch (const Error& e) {
      ++failures;
      std::fprintf(stderr, "  replication %d: %s\n", rep, e.what());
    }
  }
  bool ok = k51 == 51;
  std::string cover;
  for (std::size_t i = 0; i < 7; ++i) {
    ok = ok && covered[i] >= (9 * reps + 9) / 10;
    cover += fmt(" %s=%d", ReducedParams::names()[i].c_str(), covered[i]);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 1800.0, fmt("K'=%d; within 3 SE of %d reps:", k51, reps) + cover +
                                   fmt("; %d failed; %.0f s", failures, secs)};
}

// 6 ------------------------------------------------------------------------

/// -1 / slope of log|f| against tau on [a, b].
double tail_scale(const std::function<double(double)>& f, double a, double b) {
  constexpr int n = 50;
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double tau = a + (b - a) * i / (n - 1.0);
    A(i, 0) = 1.0;
    A(i, 1) = tau;
    y(i) = std::log(std::abs(f(tau)));
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(y);
  return -1.0 / coef(1);
}

Outcome curve_shape() {
  const FullParams p = table1();
  const double acf_tau = tail_scale([&](double t) { return sq_return_acf(t, p); }, 2.0, 4.0);
  const double lev_tau = tail_scale([&](double t) { return leverage(t, p); }, 0.6, 1.2);
  bool zero_left = true;
  for (double t = -2.0; t < 0.0; t += 0.01) zero_left = zero_left && leverage(t, p) == 0.0;
  const bool acf_ok = std::abs(acf_tau / 0.2930 - 1.0) <= 0.05;
  const bool lev_ok = std::abs(lev_tau / 0.1026 - 1.0) <= 0.05;
  return {acf_ok && lev_ok && zero_left,
          fmt("ACF tail scale %.4f yr (target 0.2930)%s; leverage tail scale %.4f yr (target "
              "0.1026)%s; zero for negative lags: %s",
              acf_tau, acf_ok ? "" : " MISMATCH", lev_tau, lev_ok ? "" : " MISMATCH",
              zero_left ? "yes" : "no")};
}

// 7 ------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "heterovol");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::fprintf(stderr, "  %s", err.str().c_str());
  return code;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "heterovol_acceptance_c7";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    // Lighter tails than the published fit keep this small calibration
    // well away from the nu = 4 boundary.
    ReducedParams p = sp500_1970_2010_estimates();
    p.nu = 8.0;
    std::ofstream(root / "params.json") << to_json(p);
  }
  const auto one = [&](const std::string& tag, const char* threads) {
    setenv("HETEROVOL_THREADS", threads, 1);
    const fs::path sim = root / ("sim_" + tag);
    const fs::path cal = root / ("cal_" + tag);
    int rc = invoke({"simulate", "--params", (root / "params.json").string(), "--out", sim.string(),
                     "--seed", "77", "--paths", "4", "--horizon", "40", "--export-prices"});
    std::vector<std::string> args{"calibrate", "--out", cal.string(), "--max-iter", "2",
                                  "--seed", "3", "--draws", "2000"};
    for (int i = 0; i < 4; ++i) {
      args.push_back("--prices");
      args.push_back((sim / ("prices_" + std::to_string(i) + ".csv")).string());
    }
    rc |= invoke(args);
    unsetenv("HETEROVOL_THREADS");
    return rc;
  };
  int rc = one("a", "1");
  rc |= one("b", "1");
  rc |= one("c", "4");
  rc |= one("d", "3");
  bool same = rc == 0;
  for (const char* tag : {"b", "c", "d"}) {
    for (const char* f : {"sim_%s/paths.csv", "sim_%s/paths.json", "sim_%s/prices_1.csv",
                          "cal_%s/report.json", "cal_%s/report.txt"}) {
      const std::string a = slurp(root / fmt(f, "a"));
      same = same && !a.empty() && a == slurp(root / fmt(f, tag));
    }
  }
  fs::remove_all(root);
  return {same, fmt("exit codes %s; outputs %s across runs and HETEROVOL_THREADS=1,4,3",
                    rc == 0 ? "ok" : "non-zero", same ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  int reps = 50;
  app.add_option("--criterion", only, "run a single criterion (1-7)")->check(CLI::Range(1, 7));
  app.add_option("--replications", reps, "criterion 5 replications")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"derived identities", derived_identities},
      {"oracle equivalence", oracle_equivalence},
      {"Monte Carlo agreement", monte_carlo},
      {"inverse-gamma identities", inverse_gamma},
      {"GMM round trip", [reps] { return gmm_round_trip(reps); }},
      {"curve shape", curve_shape},
      {"determinism", determinism},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %zu (%s): %s  %s\n", i + 1, criteria[i].first, o.passed ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
