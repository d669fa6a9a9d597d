#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace heterovol {

/// Trading days per year; every "daily" quantity in the library uses this.
inline constexpr double kTradingDaysPerYear = 250.0;
inline constexpr double kDailyStep = 1.0 / kTradingDaysPerYear;

/// Two-factor inverse-gamma stochastic volatility model, all twelve
/// parameters plus the factor start time.
///
///   dX = (Y + Z) dW^X
///   dY = -(Y - y_inf) dt / tau_Y + sigma_Y Y dW^Y
///   dZ = -(Z - z_inf) dt / tau_Z + sigma_Z Z dW^Z
///
/// Times are in years. `t0` is the time the factors start from (y0, z0);
/// an empty `t0` selects the stationary regime (t0 -> -infinity), where the
/// initial values no longer matter.
struct FullParams {
  double mu = 0.0;  ///< drift of log-price, yr^-1
  double tau_Y = 1.0;
  double tau_Z = 1.0;
  double y_inf = 1.0;
  double z_inf = 1.0;
  double y0 = 1.0;
  double z0 = 1.0;
  double sigma2_Y = 1.0;
  double sigma2_Z = 1.0;
  double rho_XY = 0.0;
  double rho_XZ = 0.0;
  double rho_YZ = 0.0;
  std::optional<double> t0;

  [[nodiscard]] bool stationary() const noexcept { return !t0.has_value(); }
  [[nodiscard]] double kappa_Y() const noexcept { return 1.0 / tau_Y; }
  [[nodiscard]] double kappa_Z() const noexcept { return 1.0 / tau_Z; }
  /// Tail exponent of the stationary inverse-gamma law of Y.
  [[nodiscard]] double nu_Y() const noexcept { return 1.0 + 2.0 * kappa_Y() / sigma2_Y; }
  [[nodiscard]] double nu_Z() const noexcept { return 1.0 + 2.0 * kappa_Z() / sigma2_Z; }

  /// Correlation matrix of (W^X, W^Y, W^Z).
  [[nodiscard]] Eigen::Matrix3d correlation_matrix() const;
};

/// The seven-parameter reduction used for calibration: stationary factors,
/// rho_XZ = rho_YZ = 0, y0 = y_inf, z0 = z_inf and one shared tail exponent.
struct ReducedParams {
  double mu = 0.0;  ///< yr^-1
  double y_inf = 1.0;
  double z_inf = 1.0;
  double tau_Y = 1.0;
  double tau_Z = 1.0;
  double rho_XY = 0.0;
  double nu = 5.0;

  static constexpr std::size_t kSize = 7;
  /// Field names in vector order.
  static const std::array<std::string, kSize>& names();

  [[nodiscard]] std::array<double, kSize> to_array() const noexcept;
  static ReducedParams from_array(const std::array<double, kSize>& v) noexcept;
};

struct DerivedQuantities {
  double sigma2_Y;
  double sigma2_Z;
  double tau_L;  ///< tau_Y (nu - 1) / (nu - 2)
  double lambda_Y;
  double lambda_Z;
  double kappa_Y;
  double kappa_Z;
};

/// Estimates reported for daily S&P 500 returns 1970-2010. The drift is
/// quoted there as 2.1e-4 per trading day; it is stored here in yr^-1.
ReducedParams sp500_1970_2010_estimates();

/// Throws Error(NonPositiveParameter | CorrelationOutOfRange |
/// CorrelationMatrixNotPSD | NonFiniteInput). Returns the input unchanged.
FullParams validate(const FullParams& params);
ReducedParams validate(const ReducedParams& params);

/// Stationary full parameter set implied by the reduced parameterization.
FullParams expand(const ReducedParams& reduced);

DerivedQuantities derived(const ReducedParams& reduced);

using UnconstrainedVector = std::array<double, ReducedParams::kSize>;

/// Optimizer coordinates: log for positive fields, atanh for rho_XY,
/// log(nu - 4) for the tail exponent, identity for mu.
UnconstrainedVector to_unconstrained(const ReducedParams& reduced);
ReducedParams from_unconstrained(const UnconstrainedVector& u);

/// d theta_i / d u_i of the transform above (it is diagonal).
UnconstrainedVector unconstrained_jacobian(const UnconstrainedVector& u);

}  // namespace heterovol
