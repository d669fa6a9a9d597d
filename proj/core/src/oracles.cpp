#include "heterovol/oracles.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "heterovol/correlations.hpp"
#include "heterovol/error.hpp"
#include "heterovol/moment_ode.hpp"
#include "heterovol/moments.hpp"

namespace heterovol::oracle {

namespace {

/// Full moment state of the given degree at time t, X reset to zero.
MomentOdeSystem::State state_at(const MomentOdeSystem& sys, const FullParams& params, double t) {
  if (params.stationary()) return sys.stationary_state();
  const double t0 = *params.t0;
  if (t < t0) throw Error(ErrorCode::InvalidArgument, "t precedes t0");
  const auto x0 = sys.point_state(params.y0, params.z0);
  return t == t0 ? x0 : sys.integrate(x0, t0, {t}).front();
}

/// Evolves a factor-moment vector u(a,b), a+b <= degree, and reads (p,q).
std::vector<std::vector<double>> evolve(const MomentOdeSystem& factors,
                                        const MomentOdeSystem::State& u0,
                                        const std::vector<double>& taus,
                                        const std::vector<std::array<int, 2>>& reads) {
  const auto states = factors.integrate(u0, 0.0, taus);
  std::vector<std::vector<double>> out(reads.size(), std::vector<double>(taus.size()));
  for (std::size_t k = 0; k < taus.size(); ++k)
    for (std::size_t r = 0; r < reads.size(); ++r)
      out[r][k] = states[k](static_cast<Eigen::Index>(factors.index(0, reads[r][0], reads[r][1])));
  return out;
}

double rel_error(double value, double reference) {
  const double denom = std::max(std::abs(reference), 1e-300);
  return std::abs(value - reference) / denom;
}

}  // namespace

double cross_moment(int m, int n, double t, const FullParams& params) {
  const MomentOdeSystem sys(m + n, params, true);
  return state_at(sys, params, t)(static_cast<Eigen::Index>(sys.index(0, m, n)));
}

std::vector<double> lagged_block(int m, int n, int p, int q, const FullParams& params,
                                 const std::vector<double>& taus, double t) {
  if (m < 0 || n < 0 || p < 0 || q < 0 || m + n + p + q > kMaxOracleDegree) {
    throw Error(ErrorCode::InvalidArgument, "lagged block oracle order out of range");
  }
  const MomentOdeSystem full(m + n + p + q, params, true);
  const auto x = state_at(full, params, t);
  const MomentOdeSystem factors(p + q, params, true);
  MomentOdeSystem::State u0 = MomentOdeSystem::State::Zero(static_cast<Eigen::Index>(factors.size()));
  for (int a = 0; a <= p + q; ++a)
    for (int b = 0; a + b <= p + q; ++b)
      u0(static_cast<Eigen::Index>(factors.index(0, a, b))) =
          x(static_cast<Eigen::Index>(full.index(0, m + a, n + b)));
  return evolve(factors, u0, taus, {{p, q}}).front();
}

std::vector<double> leverage_numerator(const FullParams& params, const std::vector<double>& taus,
                                       double t) {
  const MomentOdeSystem full(3, params);
  const auto x = state_at(full, params, t);
  // d/ds <(X_s - X_t) Y_s^a Z_s^b> at s = t.
  const Eigen::VectorXd rate = full.generator() * x;
  const MomentOdeSystem factors(2, params, true);
  MomentOdeSystem::State v0 = MomentOdeSystem::State::Zero(static_cast<Eigen::Index>(factors.size()));
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b)
      v0(static_cast<Eigen::Index>(factors.index(0, a, b))) =
          rate(static_cast<Eigen::Index>(full.index(1, a, b)));
  const auto v = evolve(factors, v0, taus, {{2, 0}, {1, 1}, {0, 2}});
  std::vector<double> out(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) out[k] = v[0][k] + 2.0 * v[1][k] + v[2][k];
  return out;
}

std::vector<double> sq_return_cov(const FullParams& params, const std::vector<double>& taus,
                                  double t) {
  static constexpr std::array<std::array<int, 2>, 3> kOrders{{{2, 0}, {1, 1}, {0, 2}}};
  static constexpr std::array<double, 3> kWeights{1.0, 2.0, 1.0};
  std::vector<double> out(taus.size(), 0.0);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      const auto f = lagged_block(kOrders[a][0], kOrders[a][1], kOrders[b][0], kOrders[b][1],
                                  params, taus, t);
      for (std::size_t k = 0; k < taus.size(); ++k) out[k] += kWeights[a] * kWeights[b] * f[k];
    }
  }
  return out;
}

double inverse_gamma_moment(int m, double lambda, double nu) {
  if (!(m < nu)) {
    throw Error(ErrorCode::MomentDiverges, "inverse-gamma moment of order >= nu");
  }
  double v = 1.0;
  for (int j = 1; j <= m; ++j) v *= lambda / (nu - j);
  return v;
}

double inverse_gamma_moment_quadrature(int m, double lambda, double nu) {
  if (!(m < nu)) {
    throw Error(ErrorCode::MomentDiverges, "inverse-gamma moment of order >= nu");
  }
  const double log_norm = nu * std::log(lambda) - boost::math::lgamma(nu);
  auto integrand = [&](double v) {
    if (v <= 0.0) return 0.0;
    return std::exp(log_norm + (m - nu - 1.0) * std::log(v) - lambda / v);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  const double value = integrator.integrate(integrand, 1e-14, &error);
  return value;
}

std::vector<CheckResult> run_selfcheck(const FullParams& stationary_params) {
  const FullParams& p = stationary_params;
  std::vector<CheckResult> out;
  auto record = [&out](std::string name, double err, double tol) {
    out.push_back({std::move(name), err, tol, err < tol});
  };

  std::vector<double> taus;
  for (int i = 1; i <= 20; ++i) taus.push_back(0.05 * i);

  // Equal-time moments: invariant law, and a transient from a displaced start.
  FullParams transient = p;
  transient.t0 = -0.25;
  transient.y0 = 1.6 * p.y_inf;
  transient.z0 = 0.7 * p.z_inf;
  std::vector<double> times;
  for (int i = 0; i < 20; ++i) times.push_back(-0.25 + 0.0625 * (i + 1));
  {
    double stat_err = 0.0;
    double trans_err = 0.0;
    for (int m = 0; m <= 4; ++m) {
      for (int n = 0; m + n <= 4; ++n) {
        stat_err = std::max(stat_err, rel_error(heterovol::cross_moment(m, n, 0.0, p),
                                                oracle::cross_moment(m, n, 0.0, p)));
        const auto traj = ode_oracle(0, m, n, transient, times);
        const auto table = coefficient_table(m, n, transient);
        for (std::size_t k = 0; k < times.size(); ++k) {
          trans_err = std::max(trans_err, rel_error(table.value(times[k] - *transient.t0), traj[k]));
        }
      }
    }
    record("C(m,n), m+n<=4, stationary", stat_err, 1e-6);
    record("C(m,n), m+n<=4, transient grid", trans_err, 1e-6);
  }

  {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(0.05 * i);
    const auto traj_s = ode_oracle(2, 0, 0, p, grid);
    const auto traj_t = ode_oracle(2, 0, 0, transient, grid);
    double err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      err = std::max(err, rel_error(return_moment(2, grid[k], p), traj_s[k]));
      err = std::max(err, rel_error(return_moment(2, grid[k], transient), traj_t[k]));
    }
    record("<X_t^2>", err, 1e-6);
  }

  {
    static constexpr std::array<std::array<int, 2>, 3> kOrders{{{2, 0}, {1, 1}, {0, 2}}};
    double err = 0.0;
    for (const auto& mn : kOrders) {
      for (const auto& pq : kOrders) {
        const auto ref = oracle::lagged_block(mn[0], mn[1], pq[0], pq[1], p, taus);
        for (std::size_t k = 0; k < taus.size(); ++k) {
          const double v = heterovol::lagged_block(mn[0], mn[1], pq[0], pq[1], taus[k], p).value;
          err = std::max(err, rel_error(v, ref[k]));
        }
      }
    }
    record("nine lagged blocks", err, 1e-6);
  }

  {
    const auto num = oracle::leverage_numerator(p, taus);
    const double c20 = oracle::cross_moment(2, 0, 0.0, p);
    const double c02 = oracle::cross_moment(0, 2, 0.0, p);
    const double c10 = oracle::cross_moment(1, 0, 0.0, p);
    const double c01 = oracle::cross_moment(0, 1, 0.0, p);
    const double norm = (c20 + 2.0 * c10 * c01 + c02) * (c20 + 2.0 * c10 * c01 + c02);
    double err = 0.0;
    for (std::size_t k = 0; k < taus.size(); ++k) {
      err = std::max(err, rel_error(leverage(taus[k], p), num[k] / norm));
    }
    record("leverage", err, 1e-6);
  }

  {
    const auto cov = oracle::sq_return_cov(p, taus);
    double err = 0.0;
    for (std::size_t k = 0; k < taus.size(); ++k) {
      err = std::max(err, rel_error(heterovol::sq_return_cov(taus[k], p), cov[k]));
    }
    record("squared-return covariance", err, 1e-6);
  }

  {
    double closed_err = 0.0;
    double quad_err = 0.0;
    const std::array<std::pair<double, double>, 2> factors{
        {{p.nu_Y(), p.y_inf}, {p.nu_Z(), p.z_inf}}};
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const auto [nu, level] = factors[f];
      const double lambda = (nu - 1.0) * level;
      for (int m = 1; m <= 3 && m < nu; ++m) {
        const double value = f == 0 ? heterovol::cross_moment(m, 0, 0.0, p)
                                    : heterovol::cross_moment(0, m, 0.0, p);
        closed_err = std::max(closed_err, rel_error(value, inverse_gamma_moment(m, lambda, nu)));
        quad_err = std::max(quad_err,
                            rel_error(value, inverse_gamma_moment_quadrature(m, lambda, nu)));
      }
    }
    record("inverse-gamma moments, closed form", closed_err, 1e-8);
    record("inverse-gamma moments, quadrature", quad_err, 1e-8);
  }

  {
    // Order-m moment with nu <= m must be reported as divergent.
    bool all_flagged = true;
    for (int m = 2; m <= 4; ++m) {
      FullParams heavy = p;
      heavy.sigma2_Y = 2.0 * heavy.kappa_Y() / (m - 1.0 - 0.25);  // nu = m - 0.25
      try {
        (void)heterovol::cross_moment(m, 0, 0.0, heavy);
        all_flagged = false;
      } catch (const Error& e) {
        all_flagged = all_flagged && e.code() == ErrorCode::MomentDiverges;
      }
    }
    record("divergence flagged for nu <= m", all_flagged ? 0.0 : 1.0, 0.5);
  }
  return out;
}

}  // namespace heterovol::oracle
