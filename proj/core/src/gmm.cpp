#include "heterovol/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "heterovol/error.hpp"
#include "heterovol/nelder_mead.hpp"
#include "heterovol/parallel.hpp"
#include "heterovol/simulator.hpp"

namespace heterovol {

void GmmConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(theta_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta_tolerance must be positive");
  if (restarts < 0) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 0");
  if (max_evaluations < 1) throw Error(ErrorCode::InvalidArgument, "max_evaluations must be >= 1");
  if (derived_draws < 1) throw Error(ErrorCode::InvalidArgument, "derived_draws must be >= 1");
  if (weighting.mode == WeightingMode::NeweyWest && weighting.lags < 0)
    throw Error(ErrorCode::InvalidArgument, "Newey-West lags must be >= 0");
  stage1.validate();
  if (stage1.has_acf()) throw Error(ErrorCode::InvalidArgument, "stage 1 takes no ACF lags");
  if (K_lo_override && (*K_lo_override < 1 || *K_lo_override >= stage2_K_hi))
    throw Error(ErrorCode::InvalidArgument, "K_lo must lie in [1, K_hi)");
  if (min_observations < 2) throw Error(ErrorCode::InvalidArgument, "min_observations must be >= 2");
}

namespace {

Eigen::VectorXd to_vector(const UnconstrainedVector& u) {
  return Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

UnconstrainedVector to_array(const Eigen::VectorXd& x) {
  UnconstrainedVector u{};
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = x(static_cast<Eigen::Index>(i));
  return u;
}

double relative_change(const ReducedParams& a, const ReducedParams& b) {
  const auto x = a.to_array();
  const auto y = b.to_array();
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(x[i] - y[i]) / std::max(std::abs(y[i]), 1e-8));
  return worst;
}

// Plausibility box for the search. Outside it the rate constants can
// coincide or the tanh/exp transforms saturate, so such points are treated
// as infeasible rather than evaluated.
constexpr double kTauMin = 1e-3;   // yr
constexpr double kTauMax = 50.0;   // yr
constexpr double kLevelMin = 1e-6;
constexpr double kLevelMax = 10.0;
constexpr double kRhoMax = 0.999;
constexpr double kNuGap = 1e-6;    // nu - 4
constexpr double kNuMax = 100.0;

bool in_box(const ReducedParams& t) {
  return t.tau_Y >= kTauMin && t.tau_Y <= kTauMax && t.tau_Z >= kTauMin && t.tau_Z <= kTauMax &&
         t.y_inf >= kLevelMin && t.y_inf <= kLevelMax && t.z_inf >= kLevelMin &&
         t.z_inf <= kLevelMax && std::abs(t.rho_XY) <= kRhoMax && t.nu - 4.0 >= kNuGap &&
         t.nu <= kNuMax && std::isfinite(t.mu);
}

ReducedParams clamp_to_box(ReducedParams t) {
  t.tau_Y = std::clamp(t.tau_Y, kTauMin, kTauMax);
  t.tau_Z = std::clamp(t.tau_Z, kTauMin, kTauMax);
  t.y_inf = std::clamp(t.y_inf, kLevelMin, kLevelMax);
  t.z_inf = std::clamp(t.z_inf, kLevelMin, kLevelMax);
  t.rho_XY = std::clamp(t.rho_XY, -kRhoMax, kRhoMax);
  t.nu = std::clamp(t.nu, 4.0 + kNuGap, kNuMax);
  return t;
}

Eigen::VectorXd conditions(const ReducedParams& theta, const MomentData& data, LeverageForm form) {
  return data.sample_means(theta.mu * data.dt()) - model_moments(theta, data.lags(), data.dt(), form);
}

Eigen::MatrixXd estimation_weight(const Eigen::MatrixXd& omega, const MomentData& data,
                                  const GmmConfig& config) {
  Eigen::MatrixXd w = inverse_weighting(omega);
  if (config.acf_ramp) {
    const Eigen::VectorXd s = acf_ramp(data.lags(), config.acf_ramp->center, config.acf_ramp->width);
    w = s.asDiagonal() * w * s.asDiagonal();
  }
  return w;
}

}  // namespace

double objective(const ReducedParams& theta, const MomentData& data, const Eigen::MatrixXd& weight,
                 LeverageForm form) {
  const Eigen::VectorXd g = conditions(theta, data, form);
  if (weight.rows() != g.size()) throw Error(ErrorCode::InvalidArgument, "weight size mismatch");
  return std::max(0.0, g.dot(weight.selfadjointView<Eigen::Lower>() * g));
}

MinimizeResult minimize(const ReducedParams& theta0, const MomentData& data,
                        const Eigen::MatrixXd& weight, const GmmConfig& config) {
  auto f = [&](const Eigen::VectorXd& x) {
    try {
      const ReducedParams theta = from_unconstrained(to_array(x));
      if (!in_box(theta)) return std::numeric_limits<double>::infinity();
      return objective(theta, data, weight, config.form);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  NelderMeadOptions opts;
  opts.max_evaluations = config.max_evaluations;
  opts.initial_step = 0.2;

  Eigen::VectorXd best = to_vector(to_unconstrained(clamp_to_box(theta0)));
  double best_value = f(best);
  int evals = 1;
  // Polish from the start, then restart from jittered copies of the best.
  std::mt19937_64 rng(path_seed(config.seed, 0x5eedULL));
  std::normal_distribution<double> normal(0.0, 0.25);
  for (int run = 0; run <= config.restarts; ++run) {
    Eigen::VectorXd start = best;
    if (run > 0)
      for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += normal(rng);
    auto res = nelder_mead(f, start, opts);
    evals += res.evaluations;
    // A converged simplex is polished once more with a fresh simplex.
    if (std::isfinite(res.value)) {
      opts.initial_step = 0.02;
      auto polish = nelder_mead(f, res.x, opts);
      opts.initial_step = 0.2;
      evals += polish.evaluations;
      if (polish.value <= res.value) res = polish;
    }
    if (res.value < best_value) {
      best = res.x;
      best_value = res.value;
    }
  }
  if (!std::isfinite(best_value)) {
    throw Error(ErrorCode::OptimizerStalled, "no finite objective value in any restart");
  }
  return {from_unconstrained(to_array(best)), best_value, evals};
}

IterateResult iterate(const MomentData& data, const ReducedParams& theta0, const GmmConfig& config) {
  config.validate();
  const auto r = static_cast<Eigen::Index>(data.lags().dimension());
  IterateResult out;
  Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(r, r);
  if (config.acf_ramp) {
    const Eigen::VectorXd s = acf_ramp(data.lags(), config.acf_ramp->center, config.acf_ramp->width);
    identity = s.asDiagonal() * identity * s.asDiagonal();
  }
  auto step = minimize(theta0, data, identity, config);
  out.theta = step.theta;
  out.objective = step.value;
  out.omega = Eigen::MatrixXd::Identity(r, r);
  out.weight = identity;
  out.iterations = 0;
  out.converged = false;
  if (config.weighting.mode == WeightingMode::Identity) {
    out.converged = true;
    return out;
  }
  for (int it = 0; it < config.max_iterations; ++it) {
    out.omega = weighting_matrix(data, out.theta, config.weighting, config.form);
    out.weight = estimation_weight(out.omega, data, config);
    step = minimize(out.theta, data, out.weight, config);
    const double change = relative_change(step.theta, out.theta);
    out.theta = step.theta;
    out.objective = step.value;
    out.iterations = it + 1;
    if (change < config.theta_tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& D, const Eigen::MatrixXd& W,
                                    const Eigen::MatrixXd& S, double T) {
  // Columns are rescaled to unit norm so the rank test is unit-free.
  const Eigen::VectorXd norms = D.colwise().norm().transpose();
  if (!(norms.array() > 0.0).all()) throw Error(ErrorCode::SingularMatrix, "Jacobian has a zero column");
  const Eigen::MatrixXd Dn = D * norms.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd WD = W * Dn;
  const Eigen::MatrixXd bread = Dn.transpose() * WD;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(bread);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularMatrix, "Jacobian is rank deficient");
  const Eigen::MatrixXd inv = lu.inverse();
  const Eigen::MatrixXd meat = WD.transpose() * S * WD;
  Eigen::MatrixXd V = norms.cwiseInverse().asDiagonal() * (inv * meat * inv.transpose() / T) *
                      norms.cwiseInverse().asDiagonal();
  V = 0.5 * (V + V.transpose());
  if (!V.allFinite()) throw Error(ErrorCode::SingularMatrix, "non-finite covariance");
  return V;
}

CovarianceResult covariance(const ReducedParams& theta, const MomentData& data,
                            const Eigen::MatrixXd& omega, const Eigen::MatrixXd& weight,
                            const GmmConfig& config) {
  const auto u = to_unconstrained(theta);
  const auto dtheta = unconstrained_jacobian(u);
  const auto r = static_cast<Eigen::Index>(data.lags().dimension());
  const auto k = static_cast<Eigen::Index>(u.size());
  CovarianceResult out;
  out.jacobian.resize(r, k);
  parallel_for(u.size(), [&](std::size_t i) {
    const double h = 1e-4 * std::max(1.0, std::abs(u[i]));
    auto up = u;
    auto dn = u;
    up[i] += h;
    dn[i] -= h;
    const Eigen::VectorXd d = (conditions(from_unconstrained(up), data, config.form) -
                               conditions(from_unconstrained(dn), data, config.form)) /
                              (2.0 * h);
    // Chain rule: dg/dtheta_i = dg/du_i / (dtheta_i/du_i).
    out.jacobian.col(static_cast<Eigen::Index>(i)) = d / dtheta[i];
  });
  if (!out.jacobian.allFinite()) throw Error(ErrorCode::SingularMatrix, "non-finite Jacobian");
  Eigen::MatrixXd S = omega;
  if (config.covariance_weighting) S = weighting_matrix(data, theta, *config.covariance_weighting, config.form);
  out.V_over_T = sandwich_covariance(out.jacobian, weight, S, static_cast<double>(data.rows()));
  out.sigma = out.V_over_T.diagonal().cwiseMax(0.0).cwiseSqrt();
  if ((out.sigma.array() <= 0.0).any()) throw Error(ErrorCode::SingularMatrix, "zero standard error");
  out.rho = out.sigma.cwiseInverse().asDiagonal() * out.V_over_T * out.sigma.cwiseInverse().asDiagonal();
  out.rho.diagonal().setOnes();
  return out;
}

DerivedStats propagate_derived(const ReducedParams& theta, const Eigen::MatrixXd& V_over_T,
                               int n_draws, std::uint64_t seed) {
  constexpr auto k = static_cast<Eigen::Index>(ReducedParams::kSize);
  if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be >= 1");
  if (V_over_T.rows() != k || V_over_T.cols() != k) throw Error(ErrorCode::InvalidArgument, "V must be 7x7");
  const DerivedQuantities point = derived(validate(theta));

  // Square root of a PSD matrix that tolerates exact zeros.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (V_over_T + V_over_T.transpose()));
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -1e-10 * std::abs(V_over_T.trace()) - 1e-300)
    throw Error(ErrorCode::InvalidArgument, "V is not positive semi-definite");
  const Eigen::MatrixXd root =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::mt19937_64 rng(path_seed(seed, 0xd1ceULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto center = theta.to_array();
  // Welford running moments.
  std::array<double, 3> mean{};
  std::array<double, 3> m2{};
  int accepted = 0;
  int rejected = 0;
  Eigen::VectorXd e(k);
  for (int d = 0; d < n_draws; ++d) {
    for (Eigen::Index i = 0; i < k; ++i) e(i) = normal(rng);
    const Eigen::VectorXd x = root * e;
    auto v = center;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += x(static_cast<Eigen::Index>(i));
    const ReducedParams t = ReducedParams::from_array(v);
    if (!(t.nu > 4.0) || !(t.tau_Y > 0.0) || !(t.tau_Z > 0.0) || !(t.y_inf > 0.0) || !(t.z_inf > 0.0) ||
        !(std::abs(t.rho_XY) < 1.0)) {
      ++rejected;
      continue;
    }
    const DerivedQuantities q = derived(t);
    const std::array<double, 3> vals{q.sigma2_Y, q.sigma2_Z, q.tau_L};
    ++accepted;
    for (std::size_t j = 0; j < 3; ++j) {
      const double delta = vals[j] - mean[j];
      mean[j] += delta / accepted;
      m2[j] += delta * (vals[j] - mean[j]);
    }
  }
  if (2 * rejected > n_draws) {
    throw Error(ErrorCode::TooManyRejections,
                std::to_string(rejected) + " of " + std::to_string(n_draws) + " draws invalid");
  }
  auto stat = [&](std::size_t j, double p) {
    const double var = accepted > 1 ? m2[j] / (accepted - 1) : 0.0;
    return DerivedStat{p, mean[j], std::sqrt(var)};
  };
  return {stat(0, point.sigma2_Y), stat(1, point.sigma2_Z), stat(2, point.tau_L), n_draws, rejected};
}

ReducedParams starting_point(const MomentData& data) {
  const double dt = data.dt();
  const Eigen::VectorXd raw = data.sample_means(0.0);
  const double c = raw(0);
  const Eigen::VectorXd g = data.sample_means(c);
  ReducedParams p;
  p.mu = c / dt;
  const double s = std::max(g(1) / std::sqrt(2.0 * dt / std::numbers::pi), 1e-6);
  p.y_inf = 0.6 * s;
  p.z_inf = 0.4 * s;
  // E(Y+Z)^2 = (y^2 + z^2)(nu-1)/(nu-2) + 2yz under the reduced model.
  const double m2 = g(2) / dt;
  const double q = (m2 - 2.0 * p.y_inf * p.z_inf) / (p.y_inf * p.y_inf + p.z_inf * p.z_inf);
  p.nu = q > 1.0 ? std::clamp((2.0 * q - 1.0) / (q - 1.0), 4.2, 12.0) : 12.0;
  p.tau_Y = 0.05;
  p.tau_Z = 0.5;
  double lev = 0.0;
  const int n_short = std::min(20, data.lags().n_leverage());
  for (int i = 0; i < n_short; ++i) lev += g(4 + i);
  p.rho_XY = lev < 0.0 ? -0.5 : 0.0;
  return p;
}

int acf_lower_lag(double tau_L_years) {
  const double days = tau_L_years * kTradingDaysPerYear;
  if (!(days >= 2.0 && days <= 125.0)) {
    throw Error(ErrorCode::TauLOutOfRange,
                "tau_L = " + std::to_string(days) + " days, outside [2, 125]");
  }
  return static_cast<int>(std::floor(2.0 * days));
}

GmmReport staged_calibration(const std::vector<ReturnSeries>& returns, const GmmConfig& config) {
  config.validate();
  if (returns.empty()) throw Error(ErrorCode::TooFewObservations, "no return series");
  GmmReport rep;
  std::size_t total = 0;
  for (const auto& r : returns) {
    if (r.size() < config.min_observations) {
      throw Error(ErrorCode::TooFewObservations,
                  std::to_string(r.size()) + " returns, need " + std::to_string(config.min_observations));
    }
    total += r.size();
  }
  if (total <= 2500) rep.warnings.push_back("fewer than 2500 observations; estimates are unreliable");
  rep.observations = total;
  rep.weighting = config.weighting.to_string();

  const MomentData data1(returns, config.stage1);
  const ReducedParams seed = starting_point(data1);
  const IterateResult s1 = iterate(data1, seed, config);
  const double tau_L = derived(s1.theta).tau_L;
  rep.tau_L_stage1 = tau_L;
  rep.K_lo = config.K_lo_override ? *config.K_lo_override : acf_lower_lag(tau_L);
  if (rep.K_lo >= config.stage2_K_hi) {
    throw Error(ErrorCode::InvalidArgument, "K' is not below K_hi");
  }
  rep.stage1 = {s1.theta, Eigen::VectorXd::Constant(ReducedParams::kSize, std::nan("")),
                data1.lags().dimension(), s1.iterations, s1.objective, s1.converged};
  try {
    rep.stage1.sigma = covariance(s1.theta, data1, s1.omega, s1.weight, config).sigma;
  } catch (const Error& e) {
    // Stage-1 errors are informational only; the report rests on stage 2.
    rep.warnings.push_back(std::string("stage 1 covariance: ") + e.what());
  }

  LagRange lags2 = config.stage1;
  lags2.K_lo = rep.K_lo;
  lags2.K_hi = config.stage2_K_hi;
  const MomentData data2 = data1.with_lags(lags2);
  const IterateResult s2 = iterate(data2, s1.theta, config);
  rep.theta = s2.theta;
  rep.cov = covariance(s2.theta, data2, s2.omega, s2.weight, config);
  rep.stage2 = {s2.theta, rep.cov.sigma, lags2.dimension(), s2.iterations, s2.objective, s2.converged};
  rep.objective = s2.objective;
  rep.iterations = s2.iterations;
  rep.rows = data2.rows();
  rep.derived = propagate_derived(s2.theta, rep.cov.V_over_T, config.derived_draws, config.seed);
  if (!s1.converged || !s2.converged) rep.warnings.push_back("iteration limit reached before theta settled");
  return rep;
}

std::array<double, ReducedParams::kSize> sp500_1970_2010_standard_errors() {
  // mu is quoted per day; stored per year like the estimate.
  return {6e-5 * kTradingDaysPerYear, 0.004, 0.004, 0.01, 0.02, 0.09, 0.01};
}

Eigen::MatrixXd sp500_1970_2010_correlations() {
  Eigen::MatrixXd m(7, 7);
  m << 1.00, -0.01, 0.02, -0.28, -0.01, -0.01, -0.01,  //
      -0.01, 1.00, -0.97, -0.04, -0.14, 0.00, 0.99,    //
      0.02, -0.97, 1.00, 0.03, 0.25, 0.00, -0.94,      //
      -0.28, -0.04, 0.03, 1.00, 0.05, 0.01, -0.05,     //
      -0.01, -0.14, 0.25, 0.05, 1.00, 0.00, -0.12,     //
      -0.01, 0.00, 0.00, 0.01, 0.00, 1.00, 0.00,       //
      -0.01, 0.99, -0.94, -0.05, -0.12, 0.00, 1.00;
  return m;
}

}  // namespace heterovol
