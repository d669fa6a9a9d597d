#pragma once

#include <array>
#include <string>
#include <vector>

#include "heterovol/model.hpp"

namespace heterovol {

struct ExpTerm {
  double coefficient;
  double rate;  ///< yr^-1
};

/// sum_i coefficient_i * exp(rate_i * tau). Terms sharing a rate are merged.
class ExpSum {
 public:
  void add(double coefficient, double rate);
  [[nodiscard]] double operator()(double tau) const;
  [[nodiscard]] const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
  /// Coefficient attached to `rate` (0 if absent).
  [[nodiscard]] double coefficient(double rate) const;

 private:
  std::vector<ExpTerm> terms_;
};

/// f(m,n,p,q)(tau) = <Y_t^m Z_t^n Y_{t+tau}^p Z_{t+tau}^q>.
struct LaggedBlock {
  int m, n, p, q;
  double tau;
  double value;
  ExpSum decomposition;
};

/// Closed form for p + q <= 2, tau >= 0. The equal-time moments are taken at
/// time `t` (ignored for stationary params).
LaggedBlock lagged_block(int m, int n, int p, int q, double tau, const FullParams& params,
                         double t = 0.0);
ExpSum lagged_block_expansion(int m, int n, int p, int q, const FullParams& params,
                              double t = 0.0);

/// Decay rates of the leverage numerator.
///  Ito:       rates of E[(Y+Z)^2_{t+tau} | F_t], i.e. F_Y(1), F(1,1), F_Y(2)
///             (plus F_Z(1), F_Z(2) when rho_XZ != 0).
///  AsPrinted: the same coefficients with every rate raised by sigma_Y^2/2,
///             which is the widely quoted three-exponential form.
/// Only the Ito form agrees with simulation and with the moment equations.
enum class LeverageForm { Ito, AsPrinted };

/// <dX_t dX_{t+tau}^2> / dt^2 for tau >= 0, as an exponential sum in tau.
ExpSum leverage_numerator(const FullParams& params, LeverageForm form = LeverageForm::Ito,
                          double t = 0.0);
/// (C20 + 2 C10 C01 + C02)^2.
double leverage_normalizer(const FullParams& params, double t = 0.0);
/// Normalized leverage; exactly 0 for tau < 0.
double leverage(double tau, const FullParams& params, LeverageForm form = LeverageForm::Ito,
                double t = 0.0);

struct LeverageScales {
  double tau_L;     ///< slowest
  double tau_simL;  ///< mixed Y-Z rate
  double tau_lt;    ///< fastest
  bool ordered;     ///< tau_lt < tau_simL < tau_L
};
/// Negative reciprocals of the three rates carried by the Y-channel of the
/// numerator. UnstableLeverage if any of them is >= 0.
LeverageScales leverage_scales(const FullParams& params, LeverageForm form = LeverageForm::Ito);

/// <dX_t^2 dX_{t+tau}^2> / dt^2 assembled from the nine lagged blocks with
/// binomial weights (1,2,1) x (1,2,1).
ExpSum sq_return_cov_expansion(const FullParams& params, double t = 0.0);
double sq_return_cov(double tau, const FullParams& params, double t = 0.0);
/// Var[dX^2] / dt^2 = 3 <(Y+Z)^4> - <(Y+Z)^2>^2, stationary.
double sq_return_variance(const FullParams& params);
/// (cov - <dX^2>^2) / Var[dX^2]. Stationary params only.
double sq_return_acf(double tau, const FullParams& params);

struct AcfScales {
  /// -1/F_Z(2), -1/F_Z(1), -1/F_Y(1), -1/(F_Y(1)+F_Z(1)), -1/F_Y(2).
  std::array<double, 5> tau;
  static const std::array<std::string, 5>& labels();
  /// Indices of the scales at least twice the fastest one, the rest are
  /// short-range.
  std::vector<int> long_range;
  std::vector<int> short_range;
};
/// UnstableAcf if any of the five rates is >= 0.
AcfScales acf_scales(const FullParams& params);

/// Curves over lags given in trading days.
std::vector<double> leverage_curve(const std::vector<double>& lag_days, const FullParams& params,
                                   LeverageForm form = LeverageForm::Ito);
std::vector<double> acf_curve(const std::vector<double>& lag_days, const FullParams& params);

/// "lag_yr,lag_days,value" CSV.
std::string curve_csv(const std::vector<double>& lag_days, const std::vector<double>& values);

}  // namespace heterovol
