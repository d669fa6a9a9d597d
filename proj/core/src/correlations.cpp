#include "heterovol/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "csv.hpp"
#include "heterovol/error.hpp"
#include "heterovol/moments.hpp"
#include "heterovol/parallel.hpp"

namespace heterovol {

void ExpSum::add(double coefficient, double rate) {
  for (auto& term : terms_) {
    if (term.rate == rate) {
      term.coefficient += coefficient;
      return;
    }
  }
  terms_.push_back({coefficient, rate});
}

double ExpSum::operator()(double tau) const {
  double acc = 0.0;
  for (const auto& term : terms_) acc += term.coefficient * std::exp(term.rate * tau);
  return acc;
}

double ExpSum::coefficient(double rate) const {
  for (const auto& term : terms_)
    if (term.rate == rate) return term.coefficient;
  return 0.0;
}

namespace {

using MomentFn = std::function<double(int, int)>;

/// Equal-time moments C(i,j): invariant law, or the finite-t0 value at t.
MomentFn moments_at(const FullParams& params, double t) {
  if (params.stationary()) {
    return [&params](int i, int j) { return stationary_cross_moment(i, j, params); };
  }
  return [&params, t](int i, int j) { return cross_moment(i, j, t, params); };
}

void require_gap(double a, double b, const char* what) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (std::abs(a - b) < 1e-9 * scale) {
    throw Error(ErrorCode::DegenerateRates, what);
  }
}

struct Rates {
  double FY1, FY2, FZ1, FZ2, F11;
  double AY1, AY2, AZ1, AZ2;
};

Rates rate_set(const FullParams& p) {
  Rates r{};
  r.FY1 = rates(1, 0, p).F;
  r.FY2 = rates(2, 0, p).F;
  r.FZ1 = rates(0, 1, p).F;
  r.FZ2 = rates(0, 2, p).F;
  r.F11 = rates(1, 1, p).F;
  r.AY1 = rates(1, 0, p).A_Y;
  r.AY2 = rates(2, 0, p).A_Y;
  r.AZ1 = rates(0, 1, p).A_Z;
  r.AZ2 = rates(0, 2, p).A_Z;
  return r;
}

// One factor, first and second power. F1/F2/A1/A2 belong to the lagged
// factor; c0, c1, c2 are C(m,n), C with one more, C with two more powers.
void single_first(ExpSum& out, double F1, double A1, double c0, double c1) {
  out.add(-A1 / F1 * c0, 0.0);
  out.add(c1 + A1 / F1 * c0, F1);
}

void single_second(ExpSum& out, double F1, double F2, double A1, double A2, double c0,
                   double c1, double c2) {
  require_gap(F2, F1, "F2 = F1 in the lagged second moment");
  const double b1 = c1 + A1 / F1 * c0;
  out.add(A2 * A1 / (F2 * F1) * c0, 0.0);
  out.add(-A2 / (F2 - F1) * b1, F1);
  out.add(c2 + A2 / (F2 - F1) * (c1 + A1 / F2 * c0), F2);
}

}  // namespace

ExpSum lagged_block_expansion(int m, int n, int p, int q, const FullParams& params, double t) {
  if (m < 0 || n < 0 || p < 0 || q < 0 || p + q > 2 || m + n + p + q > kDefaultMaxOrder) {
    throw Error(ErrorCode::InvalidArgument, "lagged block needs p+q <= 2 and total order <= 4");
  }
  const MomentFn C = moments_at(params, t);
  const Rates r = rate_set(params);
  ExpSum out;
  const double c = C(m, n);
  if (p == 0 && q == 0) {
    out.add(c, 0.0);
  } else if (p == 1 && q == 0) {
    single_first(out, r.FY1, r.AY1, c, C(m + 1, n));
  } else if (p == 0 && q == 1) {
    single_first(out, r.FZ1, r.AZ1, c, C(m, n + 1));
  } else if (p == 2) {
    single_second(out, r.FY1, r.FY2, r.AY1, r.AY2, c, C(m + 1, n), C(m + 2, n));
  } else if (q == 2) {
    single_second(out, r.FZ1, r.FZ2, r.AZ1, r.AZ2, c, C(m, n + 1), C(m, n + 2));
  } else {
    require_gap(r.F11, r.FY1, "F(1,1) = F_Y(1)");
    require_gap(r.F11, r.FZ1, "F(1,1) = F_Z(1)");
    const double gY = r.F11 - r.FY1;
    const double gZ = r.F11 - r.FZ1;
    const double bY = C(m + 1, n) + r.AY1 / r.FY1 * c;
    const double bZ = C(m, n + 1) + r.AZ1 / r.FZ1 * c;
    const double AA = r.AY1 * r.AZ1;
    out.add(AA / r.F11 * (1.0 / r.FY1 + 1.0 / r.FZ1) * c, 0.0);
    out.add(-r.AZ1 / gY * bY, r.FY1);
    out.add(-r.AY1 / gZ * bZ, r.FZ1);
    out.add(C(m + 1, n + 1) + r.AZ1 / gY * C(m + 1, n) + r.AY1 / gZ * C(m, n + 1) +
                AA * (2.0 * r.F11 - r.FY1 - r.FZ1) / (r.F11 * gY * gZ) * c,
            r.F11);
  }
  return out;
}

LaggedBlock lagged_block(int m, int n, int p, int q, double tau, const FullParams& params,
                         double t) {
  if (!(tau >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "lagged blocks need tau >= 0");
  }
  LaggedBlock b{m, n, p, q, tau, 0.0, lagged_block_expansion(m, n, p, q, params, t)};
  b.value = b.decomposition(tau);
  return b;
}

ExpSum leverage_numerator(const FullParams& params, LeverageForm form, double t) {
  const MomentFn C = moments_at(params, t);
  const Rates r = rate_set(params);
  const double sY = params.rho_XY * std::sqrt(params.sigma2_Y);
  const double sZ = params.rho_XZ * std::sqrt(params.sigma2_Z);

  // v(a,b)(0+) = <dX_t Y^a Z^b> / dt = (a sY + b sZ) <(Y+Z) Y^a Z^b>, which then
  // relaxes under the factor moment equations with v(0,0) = 0.
  const double v10 = sY * (C(2, 0) + C(1, 1));
  const double v01 = sZ * (C(1, 1) + C(0, 2));
  const double v20 = 2.0 * sY * (C(3, 0) + C(2, 1));
  const double v11 = (sY + sZ) * (C(2, 1) + C(1, 2));
  const double v02 = 2.0 * sZ * (C(1, 2) + C(0, 3));

  require_gap(r.FY1, r.FY2, "F_Y(1) = F_Y(2)");
  require_gap(r.FY1, r.F11, "F_Y(1) = F(1,1)");
  const double shift = form == LeverageForm::AsPrinted ? 0.5 * params.sigma2_Y : 0.0;

  ExpSum out;
  const double y2 = r.AY2 * v10 / (r.FY1 - r.FY2);
  const double y11 = r.AZ1 * v10 / (r.FY1 - r.F11);
  out.add(y2 + 2.0 * y11, r.FY1 + shift);
  out.add(v20 - y2, r.FY2 + shift);
  double z11 = 0.0;
  if (sZ != 0.0) {
    require_gap(r.FZ1, r.FZ2, "F_Z(1) = F_Z(2)");
    require_gap(r.FZ1, r.F11, "F_Z(1) = F(1,1)");
    const double z2 = r.AZ2 * v01 / (r.FZ1 - r.FZ2);
    z11 = r.AY1 * v01 / (r.FZ1 - r.F11);
    out.add(z2 + 2.0 * z11, r.FZ1 + shift);
    out.add(v02 - z2, r.FZ2 + shift);
  }
  out.add(2.0 * (v11 - y11 - z11), r.F11 + shift);
  return out;
}

double leverage_normalizer(const FullParams& params, double t) {
  const MomentFn C = moments_at(params, t);
  const double s = C(2, 0) + 2.0 * C(1, 0) * C(0, 1) + C(0, 2);
  return s * s;
}

double leverage(double tau, const FullParams& params, LeverageForm form, double t) {
  if (tau < 0.0) return 0.0;
  return leverage_numerator(params, form, t)(tau) / leverage_normalizer(params, t);
}

LeverageScales leverage_scales(const FullParams& params, LeverageForm form) {
  const Rates r = rate_set(params);
  const double shift = form == LeverageForm::AsPrinted ? 0.5 * params.sigma2_Y : 0.0;
  const std::array<double, 3> rate{r.FY1 + shift, r.F11 + shift, r.FY2 + shift};
  for (double x : rate) {
    if (!(x < 0.0)) {
      throw Error(ErrorCode::UnstableLeverage, "leverage rate " + std::to_string(x) + " >= 0");
    }
  }
  LeverageScales s{};
  s.tau_L = -1.0 / rate[0];
  s.tau_simL = -1.0 / rate[1];
  s.tau_lt = -1.0 / rate[2];
  s.ordered = s.tau_lt < s.tau_simL && s.tau_simL < s.tau_L;
  return s;
}

ExpSum sq_return_cov_expansion(const FullParams& params, double t) {
  static constexpr std::array<std::array<int, 2>, 3> kOrders{{{2, 0}, {1, 1}, {0, 2}}};
  static constexpr std::array<double, 3> kWeights{1.0, 2.0, 1.0};
  ExpSum out;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      const ExpSum block = lagged_block_expansion(kOrders[a][0], kOrders[a][1], kOrders[b][0],
                                                  kOrders[b][1], params, t);
      for (const auto& term : block.terms()) {
        out.add(kWeights[a] * kWeights[b] * term.coefficient, term.rate);
      }
    }
  }
  return out;
}

double sq_return_cov(double tau, const FullParams& params, double t) {
  if (!(tau >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "squared-return covariance needs tau >= 0");
  }
  return sq_return_cov_expansion(params, t)(tau);
}

double sq_return_variance(const FullParams& params) {
  if (!params.stationary()) {
    throw Error(ErrorCode::InvalidArgument, "the squared-return variance is stationary only");
  }
  const double m2 = factor_sum_moment(2, params);
  return 3.0 * factor_sum_moment(4, params) - m2 * m2;
}

double sq_return_acf(double tau, const FullParams& params) {
  const double m2 = factor_sum_moment(2, params);
  return (sq_return_cov(tau, params) - m2 * m2) / sq_return_variance(params);
}

const std::array<std::string, 5>& AcfScales::labels() {
  static const std::array<std::string, 5> l{"tau_A1 = -1/F_Z(2)", "tau_A2 = -1/F_Z(1)",
                                            "tau_A3 = -1/F_Y(1)", "tau_A4 = -1/(F_Y(1)+F_Z(1))",
                                            "tau_A5 = -1/F_Y(2)"};
  return l;
}

AcfScales acf_scales(const FullParams& params) {
  const Rates r = rate_set(params);
  const std::array<double, 5> rate{r.FZ2, r.FZ1, r.FY1, r.FY1 + r.FZ1, r.FY2};
  AcfScales s{};
  for (std::size_t i = 0; i < rate.size(); ++i) {
    if (!(rate[i] < 0.0)) {
      throw Error(ErrorCode::UnstableAcf, AcfScales::labels()[i] + " has a nonnegative rate");
    }
    s.tau[i] = -1.0 / rate[i];
  }
  const double fastest = *std::min_element(s.tau.begin(), s.tau.end());
  for (int i = 0; i < 5; ++i) {
    (s.tau[static_cast<std::size_t>(i)] >= 2.0 * fastest ? s.long_range : s.short_range)
        .push_back(i);
  }
  return s;
}

std::vector<double> leverage_curve(const std::vector<double>& lag_days, const FullParams& params,
                                   LeverageForm form) {
  const ExpSum num = leverage_numerator(params, form);
  const double norm = leverage_normalizer(params);
  std::vector<double> out(lag_days.size());
  parallel_for(lag_days.size(), [&](std::size_t i) {
    const double tau = lag_days[i] * kDailyStep;
    out[i] = tau < 0.0 ? 0.0 : num(tau) / norm;
  });
  return out;
}

std::vector<double> acf_curve(const std::vector<double>& lag_days, const FullParams& params) {
  const ExpSum cov = sq_return_cov_expansion(params);
  const double m2 = factor_sum_moment(2, params);
  const double var = sq_return_variance(params);
  std::vector<double> out(lag_days.size());
  parallel_for(lag_days.size(), [&](std::size_t i) {
    const double tau = lag_days[i] * kDailyStep;
    if (tau < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "ACF lags must be >= 0");
    }
    out[i] = (cov(tau) - m2 * m2) / var;
  });
  return out;
}

std::string curve_csv(const std::vector<double>& lag_days, const std::vector<double>& values) {
  std::string out = "lag_yr,lag_days,value\n";
  for (std::size_t i = 0; i < lag_days.size() && i < values.size(); ++i) {
    out += csv::format_double(lag_days[i] * kDailyStep);
    out += ',';
    out += csv::format_double(lag_days[i]);
    out += ',';
    out += csv::format_double(values[i]);
    out += '\n';
  }
  return out;
}

}  // namespace heterovol
