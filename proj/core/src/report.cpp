#include "heterovol/report.hpp"

#include <cstdio>

#include "json.hpp"

namespace heterovol {

namespace {

using nlohmann::ordered_json;

ordered_json named(const std::array<double, ReducedParams::kSize>& v) {
  ordered_json out = ordered_json::object();
  const auto& names = ReducedParams::names();
  for (std::size_t i = 0; i < v.size(); ++i) out[names[i]] = v[i];
  return out;
}

std::array<double, ReducedParams::kSize> as_array(const Eigen::VectorXd& v) {
  std::array<double, ReducedParams::kSize> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v(static_cast<Eigen::Index>(i));
  return out;
}

ordered_json stage_json(const StageSummary& s) {
  return {{"conditions", s.conditions},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"objective", s.objective},
          {"theta", named(s.theta.to_array())},
          {"sigma", named(as_array(s.sigma))}};
}

ordered_json derived_json(const DerivedStat& d) {
  return {{"point", d.point}, {"mean", d.mean}, {"stddev", d.stddev}};
}

std::string line(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace

std::string report_json(const GmmReport& r) {
  ordered_json doc;
  doc["theta"] = named(r.theta.to_array());
  doc["sigma"] = named(as_array(r.cov.sigma));
  ordered_json rho = ordered_json::array();
  for (Eigen::Index i = 0; i < r.cov.rho.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < r.cov.rho.cols(); ++j) row.push_back(r.cov.rho(i, j));
    rho.push_back(row);
  }
  doc["rho"] = rho;
  doc["rho_order"] = ReducedParams::names();
  doc["derived"] = {{"sigma2_Y", derived_json(r.derived.sigma2_Y)},
                    {"sigma2_Z", derived_json(r.derived.sigma2_Z)},
                    {"tau_L", derived_json(r.derived.tau_L)},
                    {"draws", r.derived.draws},
                    {"rejected", r.derived.rejected}};
  doc["units"] = {{"mu", "yr^-1"},
                  {"mu_per_day", r.theta.mu / kTradingDaysPerYear},
                  {"sigma_mu_per_day", r.cov.sigma(0) / kTradingDaysPerYear},
                  {"times", "yr"},
                  {"lags", "trading days, 250 per yr"},
                  {"K_lo", "floor(2 tau_L) with tau_L in trading days"}};
  doc["K_lo"] = r.K_lo;
  doc["tau_L_stage1_yr"] = r.tau_L_stage1;
  doc["objective"] = r.objective;
  doc["iterations"] = r.iterations;
  doc["observations"] = r.observations;
  doc["rows"] = r.rows;
  doc["weighting"] = r.weighting;
  doc["stage1"] = stage_json(r.stage1);
  doc["stage2"] = stage_json(r.stage2);
  doc["warnings"] = r.warnings;
  return doc.dump(2) + "\n";
}

std::string report_text(const GmmReport& r) {
  std::string out;
  const auto& names = ReducedParams::names();
  const auto theta = r.theta.to_array();
  out += line("%-8s %14s %12s   rho\n", "param", "estimate", "stderr");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out += line("%-8s %14.6g %12.4g  ", names[i].c_str(), theta[i], r.cov.sigma(ii));
    for (Eigen::Index j = 0; j < r.cov.rho.cols(); ++j) out += line(" %6.2f", r.cov.rho(ii, j));
    out += "\n";
  }
  out += line("\nmu per day   %.4g +- %.2g\n", r.theta.mu / kTradingDaysPerYear,
              r.cov.sigma(0) / kTradingDaysPerYear);
  out += line("sigma2_Y     %.4g +- %.2g\n", r.derived.sigma2_Y.point, r.derived.sigma2_Y.stddev);
  out += line("sigma2_Z     %.4g +- %.2g\n", r.derived.sigma2_Z.point, r.derived.sigma2_Z.stddev);
  out += line("tau_L        %.4g +- %.2g yr\n", r.derived.tau_L.point, r.derived.tau_L.stddev);
  out += line("\nstage 1: %d conditions, %d iterations, objective %.4g\n", r.stage1.conditions,
              r.stage1.iterations, r.stage1.objective);
  out += line("stage 2: %d conditions, %d iterations, objective %.4g, K' = %d days\n",
              r.stage2.conditions, r.stage2.iterations, r.stage2.objective, r.K_lo);
  out += line("observations %zu, weighting %s\n", r.observations, r.weighting.c_str());
  for (const auto& w : r.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace heterovol
