#pragma once

// Independent numerical references for the closed forms. Nothing here calls
// the coefficient recursion or the lagged-block formulas: two-time
// quantities come from the moment equations restarted at the earlier time
// (tower property), equal-time moments from the steady state of the same
// equations, inverse-gamma moments from quadrature of the density.

#include <string>
#include <vector>

#include "heterovol/model.hpp"

namespace heterovol::oracle {

/// <Y_t^m Z_t^n Y_{t+tau}^p Z_{t+tau}^q> on a tau grid (increasing, >= 0).
std::vector<double> lagged_block(int m, int n, int p, int q, const FullParams& params,
                                 const std::vector<double>& taus, double t = 0.0);

/// <dX_t dX_{t+tau}^2> / dt^2.
std::vector<double> leverage_numerator(const FullParams& params, const std::vector<double>& taus,
                                       double t = 0.0);

/// <dX_t^2 dX_{t+tau}^2> / dt^2.
std::vector<double> sq_return_cov(const FullParams& params, const std::vector<double>& taus,
                                  double t = 0.0);

/// <Y^m Z^n> at time t from the moment equations alone.
double cross_moment(int m, int n, double t, const FullParams& params);

/// E[V^m] for V with density lambda^nu / Gamma(nu) v^{-nu-1} exp(-lambda/v),
/// as lambda^m / prod_{j=1..m} (nu - j). Requires m < nu.
double inverse_gamma_moment(int m, double lambda, double nu);
/// The same moment by double-exponential quadrature of the density.
double inverse_gamma_moment_quadrature(int m, double lambda, double nu);

struct CheckResult {
  std::string name;
  double max_rel_error;
  double tolerance;
  bool passed;
};

/// Every closed form against its oracle at `params` (stationary), on a
/// 20-point grid. Used by the CLI selfcheck and the acceptance suite.
std::vector<CheckResult> run_selfcheck(const FullParams& params);

}  // namespace heterovol::oracle
