#include "heterovol/model.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "heterovol/error.hpp"

namespace heterovol {

namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFiniteInput, std::string(name) + " is not finite");
  }
}

void require_positive(double value, const char* name) {
  require_finite(value, name);
  if (!(value > 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter, name);
  }
}

void require_correlation(double value, const char* name) {
  require_finite(value, name);
  if (value < -1.0 || value > 1.0) {
    throw Error(ErrorCode::CorrelationOutOfRange, name);
  }
}

constexpr double kNuFloor = 4.0;

}  // namespace

Eigen::Matrix3d FullParams::correlation_matrix() const {
  Eigen::Matrix3d c;
  c << 1.0, rho_XY, rho_XZ,
       rho_XY, 1.0, rho_YZ,
       rho_XZ, rho_YZ, 1.0;
  return c;
}

const std::array<std::string, ReducedParams::kSize>& ReducedParams::names() {
  static const std::array<std::string, kSize> n{"mu", "y_inf", "z_inf", "tau_Y",
                                                "tau_Z", "rho_XY", "nu"};
  return n;
}

std::array<double, ReducedParams::kSize> ReducedParams::to_array() const noexcept {
  return {mu, y_inf, z_inf, tau_Y, tau_Z, rho_XY, nu};
}

ReducedParams ReducedParams::from_array(const std::array<double, kSize>& v) noexcept {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

ReducedParams sp500_1970_2010_estimates() {
  ReducedParams p;
  p.mu = 2.1e-4 * kTradingDaysPerYear;
  p.y_inf = 0.095;
  p.z_inf = 0.052;
  p.tau_Y = 0.07;
  p.tau_Z = 0.40;
  p.rho_XY = -0.77;
  p.nu = 4.15;
  return p;
}

FullParams validate(const FullParams& p) {
  require_finite(p.mu, "mu");
  require_positive(p.tau_Y, "tau_Y");
  require_positive(p.tau_Z, "tau_Z");
  require_positive(p.y_inf, "y_inf");
  require_positive(p.z_inf, "z_inf");
  require_positive(p.y0, "y0");
  require_positive(p.z0, "z0");
  require_positive(p.sigma2_Y, "sigma2_Y");
  require_positive(p.sigma2_Z, "sigma2_Z");
  require_correlation(p.rho_XY, "rho_XY");
  require_correlation(p.rho_XZ, "rho_XZ");
  require_correlation(p.rho_YZ, "rho_YZ");
  if (p.t0) {
    require_finite(*p.t0, "t0");
    if (*p.t0 > 0.0) {
      throw Error(ErrorCode::InvalidArgument, "t0 must be <= 0");
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(p.correlation_matrix(),
                                                           Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw Error(ErrorCode::CorrelationMatrixNotPSD,
                "smallest eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()));
  }
  return p;
}

ReducedParams validate(const ReducedParams& p) {
  require_finite(p.mu, "mu");
  require_positive(p.y_inf, "y_inf");
  require_positive(p.z_inf, "z_inf");
  require_positive(p.tau_Y, "tau_Y");
  require_positive(p.tau_Z, "tau_Z");
  require_correlation(p.rho_XY, "rho_XY");
  require_finite(p.nu, "nu");
  if (!(p.nu > kNuFloor)) {
    throw Error(ErrorCode::NonPositiveParameter, "nu - 4");
  }
  return p;
}

FullParams expand(const ReducedParams& reduced) {
  const ReducedParams r = validate(reduced);
  const DerivedQuantities d = derived(r);
  FullParams p;
  p.mu = r.mu;
  p.tau_Y = r.tau_Y;
  p.tau_Z = r.tau_Z;
  p.y_inf = r.y_inf;
  p.z_inf = r.z_inf;
  p.y0 = r.y_inf;
  p.z0 = r.z_inf;
  p.sigma2_Y = d.sigma2_Y;
  p.sigma2_Z = d.sigma2_Z;
  p.rho_XY = r.rho_XY;
  p.rho_XZ = 0.0;
  p.rho_YZ = 0.0;
  p.t0.reset();
  return validate(p);
}

DerivedQuantities derived(const ReducedParams& reduced) {
  const ReducedParams r = validate(reduced);
  const double nm1 = r.nu - 1.0;
  DerivedQuantities d{};
  d.sigma2_Y = 2.0 / (r.tau_Y * nm1);
  d.sigma2_Z = 2.0 / (r.tau_Z * nm1);
  d.tau_L = r.tau_Y * nm1 / (r.nu - 2.0);
  d.lambda_Y = nm1 * r.y_inf;
  d.lambda_Z = nm1 * r.z_inf;
  d.kappa_Y = 1.0 / r.tau_Y;
  d.kappa_Z = 1.0 / r.tau_Z;
  return d;
}

UnconstrainedVector to_unconstrained(const ReducedParams& reduced) {
  const ReducedParams r = validate(reduced);
  if (std::abs(r.rho_XY) >= 1.0) {
    throw Error(ErrorCode::NonFiniteInput, "rho_XY = +-1 has no finite atanh image");
  }
  return {r.mu,
          std::log(r.y_inf),
          std::log(r.z_inf),
          std::log(r.tau_Y),
          std::log(r.tau_Z),
          std::atanh(r.rho_XY),
          std::log(r.nu - kNuFloor)};
}

ReducedParams from_unconstrained(const UnconstrainedVector& u) {
  for (double v : u) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteInput, "unconstrained coordinate");
    }
  }
  ReducedParams r;
  r.mu = u[0];
  r.y_inf = std::exp(u[1]);
  r.z_inf = std::exp(u[2]);
  r.tau_Y = std::exp(u[3]);
  r.tau_Z = std::exp(u[4]);
  r.rho_XY = std::tanh(u[5]);
  r.nu = kNuFloor + std::exp(u[6]);
  return r;
}

UnconstrainedVector unconstrained_jacobian(const UnconstrainedVector& u) {
  const double th = std::tanh(u[5]);
  return {1.0,
          std::exp(u[1]),
          std::exp(u[2]),
          std::exp(u[3]),
          std::exp(u[4]),
          1.0 - th * th,
          std::exp(u[6])};
}

}  // namespace heterovol
