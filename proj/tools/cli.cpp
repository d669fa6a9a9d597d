#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "heterovol/correlations.hpp"
#include "heterovol/empirical.hpp"
#include "heterovol/error.hpp"
#include "heterovol/gmm.hpp"
#include "heterovol/oracles.hpp"
#include "heterovol/params_io.hpp"
#include "heterovol/report.hpp"
#include "heterovol/simulator.hpp"

namespace heterovol::cli {

namespace {

namespace fs = std::filesystem;

struct LagSpan {
  int lo = 1;
  int hi = 250;
};

LagSpan parse_lags(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw Error(ErrorCode::InvalidArgument, "lags must look like A..B");
  try {
    std::size_t used = 0;
    LagSpan s;
    s.lo = std::stoi(text.substr(0, dots), &used);
    if (used != dots) throw std::invalid_argument("lo");
    const std::string rest = text.substr(dots + 2);
    s.hi = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("hi");
    if (s.lo < 1 || s.hi < s.lo) throw std::invalid_argument("order");
    return s;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "bad lag range '" + text + "'");
  }
}

std::vector<double> lag_grid(const LagSpan& s) {
  std::vector<double> out;
  for (int k = s.lo; k <= s.hi; ++k) out.push_back(k);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  f << content;
  if (!f) throw Error(ErrorCode::InvalidArgument, "write failed for " + path.string());
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

LeverageForm parse_form(const std::string& s) {
  if (s == "ito") return LeverageForm::Ito;
  if (s == "printed") return LeverageForm::AsPrinted;
  throw Error(ErrorCode::InvalidArgument, "form must be ito or printed");
}

/// Weekday calendar starting on Monday 2000-01-03.
std::vector<std::string> trading_dates(std::size_t n) {
  using namespace std::chrono;
  std::vector<std::string> out;
  out.reserve(n);
  sys_days day = year{2000} / January / 3;
  while (out.size() < n) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{day};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    day += days{1};
  }
  return out;
}

std::string prices_csv(const PathSet& paths, std::size_t path, double mu) {
  const auto dates = trading_dates(paths.n_obs);
  std::string out = "date,close\n";
  char buf[64];
  for (std::size_t k = 0; k < paths.n_obs; ++k) {
    const double t = static_cast<double>(k) * paths.config.dt_obs;
    std::snprintf(buf, sizeof buf, ",%.17g\n", 100.0 * std::exp(paths.x(path, k) + mu * t));
    out += dates[k];
    out += buf;
  }
  return out;
}

std::vector<ReturnSeries> load_returns(const std::vector<std::string>& files,
                                       std::optional<double> mu) {
  std::vector<ReturnSeries> out;
  for (const auto& f : files) {
    out.push_back(to_returns(load_prices(f), mu.value_or(0.0)));
  }
  return out;
}

double pooled_drift(const std::vector<ReturnSeries>& rs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rs) {
    for (double v : r.values) sum += v;
    n += r.size();
  }
  return sum / static_cast<double>(n) / kDailyStep;
}

struct Options {
  std::string params;
  std::vector<std::string> prices;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t paths = 1;
  double horizon = 1.0;
  std::string lags = "1..250";
  std::optional<int> k_lo;
  int max_iter = 10;
  std::string weighting = "outer";
  std::string cov_weighting;
  std::string form = "ito";
  std::optional<double> mu;
  bool export_prices = false;
  bool factors = false;
  int draws = 10000;
};

int cmd_simulate(const Options& o, std::ostream& out) {
  const FullParams params = validate(load_full_params(o.params));
  SimConfig cfg;
  cfg.n_paths = o.paths;
  cfg.horizon = o.horizon;
  cfg.seed = o.seed;
  cfg.store_factors = o.factors;
  const PathSet paths = simulate(params, cfg);
  const fs::path dir = ensure_dir(o.out);
  write_file(dir / "paths.csv", paths_csv(paths));
  write_file(dir / "paths.json", paths_sidecar_json(paths, params));
  if (o.export_prices) {
    for (std::size_t p = 0; p < paths.n_paths(); ++p) {
      write_file(dir / ("prices_" + std::to_string(p) + ".csv"), prices_csv(paths, p, params.mu));
    }
  }
  out << "simulated " << paths.n_paths() << " paths x " << paths.n_obs << " points into "
      << dir.string() << "\n";
  return 0;
}

int cmd_curves(const Options& o, std::ostream& out) {
  const FullParams params = validate(load_full_params(o.params));
  const auto lags = lag_grid(parse_lags(o.lags));
  const fs::path dir = ensure_dir(o.out);
  write_file(dir / "leverage.csv", curve_csv(lags, leverage_curve(lags, params, parse_form(o.form))));
  write_file(dir / "acf.csv", curve_csv(lags, acf_curve(lags, params)));
  out << "wrote leverage.csv and acf.csv (" << lags.size() << " lags) into " << dir.string() << "\n";
  return 0;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  auto returns = load_returns(o.prices, o.mu);
  if (!o.mu) {
    const double mu = pooled_drift(returns);
    for (auto& r : returns) {
      for (double& v : r.values) v -= mu * r.dt;
      r.mu = mu;
    }
  }
  const LagSpan span = parse_lags(o.lags);
  std::vector<int> lags;
  std::vector<Estimate> lev;
  std::vector<Estimate> acf;
  for (int k = span.lo; k <= span.hi; ++k) {
    lags.push_back(k);
    lev.push_back(empirical_leverage(returns, k));
    acf.push_back(empirical_sq_acf(returns, k));
  }
  const fs::path dir = ensure_dir(o.out);
  write_file(dir / "leverage.csv", empirical_curve_csv(lags, lev));
  write_file(dir / "acf.csv", empirical_curve_csv(lags, acf));
  out << "wrote empirical leverage.csv and acf.csv (" << lags.size() << " lags) into " << dir.string()
      << "\n";
  return 0;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
  // The calibrator estimates the drift, so returns are not detrended here.
  const auto returns = load_returns(o.prices, std::nullopt);
  const LagSpan span = parse_lags(o.lags);
  GmmConfig cfg;
  cfg.stage1 = {span.lo, span.hi, 0, 0};
  cfg.stage2_K_hi = span.hi;
  cfg.K_lo_override = o.k_lo;
  cfg.max_iterations = o.max_iter;
  cfg.weighting = Weighting::parse(o.weighting);
  if (!o.cov_weighting.empty()) cfg.covariance_weighting = Weighting::parse(o.cov_weighting);
  cfg.seed = o.seed;
  cfg.derived_draws = o.draws;
  cfg.form = parse_form(o.form);
  const GmmReport rep = staged_calibration(returns, cfg);
  const fs::path dir = ensure_dir(o.out);
  const std::string text = report_text(rep);
  write_file(dir / "report.json", report_json(rep));
  write_file(dir / "report.txt", text);
  out << text;
  return 0;
}

int cmd_selfcheck(const Options& o, std::ostream& out) {
  const FullParams params =
      o.params.empty() ? expand(sp500_1970_2010_estimates()) : validate(load_full_params(o.params));
  if (!params.stationary()) {
    throw Error(ErrorCode::InvalidArgument, "selfcheck needs stationary parameters (t0 = null)");
  }
  const auto checks = oracle::run_selfcheck(params);
  bool ok = true;
  for (const auto& c : checks) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s  %-40s max rel err %.3e (tol %.0e)\n", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.max_rel_error, c.tolerance);
    out << buf;
    ok = ok && c.passed;
  }
  out << (ok ? "selfcheck passed\n" : "selfcheck FAILED\n");
  return ok ? 0 : 2;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-factor inverse-gamma stochastic volatility toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Monte Carlo paths of X (and optionally Y, Z)");
  sim->add_option("--params", o.params, "parameter JSON")->required();
  sim->add_option("--out", o.out, "output directory")->required();
  sim->add_option("--seed", o.seed, "RNG seed");
  sim->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", o.horizon, "observed span in years")->check(CLI::PositiveNumber);
  sim->add_flag("--factors", o.factors, "also write Y and Z");
  sim->add_flag("--export-prices", o.export_prices, "write prices_<i>.csv per path");

  auto* curves = app.add_subcommand("curves", "analytic leverage and squared-return ACF");
  curves->add_option("--params", o.params, "parameter JSON")->required();
  curves->add_option("--out", o.out, "output directory")->required();
  curves->add_option("--lags", o.lags, "lag range in trading days, A..B");
  curves->add_option("--form", o.form, "leverage form: ito or printed");

  auto* analyze = app.add_subcommand("analyze", "empirical leverage and ACF from prices");
  analyze->add_option("--prices", o.prices, "price CSV (repeat to pool series)")->required();
  analyze->add_option("--out", o.out, "output directory")->required();
  analyze->add_option("--lags", o.lags, "lag range in trading days, A..B");
  analyze->add_option("--mu", o.mu, "detrending drift in 1/yr (default: sample drift)");

  auto* calibrate = app.add_subcommand("calibrate", "staged GMM calibration");
  calibrate->add_option("--prices", o.prices, "price CSV (repeat to pool series)")->required();
  calibrate->add_option("--out", o.out, "output directory")->required();
  calibrate->add_option("--lags", o.lags, "leverage lags L'..L'' (also K'')");
  calibrate->add_option("--k-lo", o.k_lo, "override K'");
  calibrate->add_option("--max-iter", o.max_iter, "weighting updates per stage")->check(CLI::PositiveNumber);
  calibrate->add_option("--weighting", o.weighting, "identity | outer | nw:Q");
  calibrate->add_option("--cov-weighting", o.cov_weighting, "moment covariance for the standard errors");
  calibrate->add_option("--seed", o.seed, "seed for restarts and derived draws");
  calibrate->add_option("--draws", o.draws, "draws for derived quantities")->check(CLI::PositiveNumber);
  calibrate->add_option("--form", o.form, "leverage form: ito or printed");

  auto* selfcheck = app.add_subcommand("selfcheck", "closed forms against numerical oracles");
  selfcheck->add_option("--params", o.params, "parameter JSON (default: S&P 500 estimates)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "heterovol: " << e.what() << "\n";
    return 1;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string stage = chosen->get_name();
  try {
    if (chosen == sim) return cmd_simulate(o, out);
    if (chosen == curves) return cmd_curves(o, out);
    if (chosen == analyze) return cmd_analyze(o, out);
    if (chosen == calibrate) return cmd_calibrate(o, out);
    return cmd_selfcheck(o, out);
  } catch (const Error& e) {
    err << "heterovol " << stage << ": " << e.what() << "\n";
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "heterovol " << stage << ": " << e.what() << "\n";
    return 2;
  }
}

}  // namespace heterovol::cli
