#include "heterovol/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "heterovol/error.hpp"
#include "heterovol/moment_ode.hpp"

namespace heterovol {

namespace {

constexpr double kResonanceTolerance = 1e-9;

std::string order_label(int m, int n) {
  return "(" + std::to_string(m) + "," + std::to_string(n) + ")";
}

void require_order(int m, int n, int max_order) {
  if (m < 0 || n < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative moment order " + order_label(m, n));
  }
  if (m + n > max_order) {
    throw Error(ErrorCode::InvalidArgument,
                "moment order " + order_label(m, n) + " exceeds " + std::to_string(max_order));
  }
}

void require_convergent(int m, int n, const FullParams& p) {
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i == 0 && j == 0) continue;
      const double F = rates(i, j, p).F;
      if (F >= 0.0) {
        throw Error(ErrorCode::MomentDiverges,
                    "F" + order_label(i, j) + " = " + std::to_string(F) + " >= 0");
      }
    }
  }
}

}  // namespace

RateConstants rates(int m, int n, const FullParams& p) {
  RateConstants r{};
  const double kY = p.kappa_Y();
  const double kZ = p.kappa_Z();
  r.F_Y = -kY * m + 0.5 * m * (m - 1) * p.sigma2_Y;
  r.F_Z = -kZ * n + 0.5 * n * (n - 1) * p.sigma2_Z;
  r.F = r.F_Y + r.F_Z + m * n * p.rho_YZ * std::sqrt(p.sigma2_Y * p.sigma2_Z);
  r.A_Y = m * kY * p.y_inf;
  r.A_Z = n * kZ * p.z_inf;
  return r;
}

double CoefficientTable::value(double s) const {
  double acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) {
      acc += k(i, j) * std::exp(rates(i, j) * s);
    }
  }
  return acc;
}

CoefficientSet::CoefficientSet(int max_m, int max_n, const FullParams& params)
    : max_m_(max_m), max_n_(max_n) {
  if (max_m < 0 || max_n < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative moment order");
  }
  tables_.resize(static_cast<std::size_t>((max_m + 1) * (max_n + 1)));

  Eigen::MatrixXd F(max_m + 1, max_n + 1);
  for (int i = 0; i <= max_m; ++i)
    for (int j = 0; j <= max_n; ++j) F(i, j) = rates(i, j, params).F;

  for (int m = 0; m <= max_m; ++m) {
    for (int n = 0; n <= max_n; ++n) {
      CoefficientTable& t = tables_[static_cast<std::size_t>(m * (max_n + 1) + n)];
      t.m = m;
      t.n = n;
      t.rates = F.topLeftCorner(m + 1, n + 1);
      t.k = Eigen::MatrixXd::Zero(m + 1, n + 1);
      t.initial = std::pow(params.y0, m) * std::pow(params.z0, n);
      if (m == 0 && n == 0) {
        t.k(0, 0) = 1.0;
        continue;
      }
      const RateConstants rc = rates(m, n, params);
      const double scale = std::max(1.0, t.rates.cwiseAbs().maxCoeff());
      double others = 0.0;
      for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= n; ++j) {
          if (i == m && j == n) continue;
          double num = 0.0;
          if (i < m) num += rc.A_Y * table(m - 1, n).k(i, j);
          if (j < n) num += rc.A_Z * table(m, n - 1).k(i, j);
          const double gap = rc.F - F(i, j);
          if (std::abs(gap) < kResonanceTolerance * scale) {
            throw Error(ErrorCode::DegenerateRates,
                        "F" + order_label(m, n) + " = F" + order_label(i, j));
          }
          t.k(i, j) = -num / gap;
          others += t.k(i, j);
        }
      }
      t.k(m, n) = t.initial - others;
    }
  }
}

const CoefficientTable& CoefficientSet::table(int i, int j) const {
  if (i < 0 || j < 0 || i > max_m_ || j > max_n_) {
    throw Error(ErrorCode::InvalidArgument, "table " + order_label(i, j) + " not in set");
  }
  return tables_[static_cast<std::size_t>(i * (max_n_ + 1) + j)];
}

CoefficientTable coefficient_table(int m, int n, const FullParams& params,
                                   std::optional<double> initial, int max_order) {
  require_order(m, n, max_order);
  const CoefficientSet set(m, n, params);
  CoefficientTable t = set.table(m, n);
  if (initial) {
    // Only the top coefficient carries the initial condition.
    t.k(m, n) += *initial - t.initial;
    t.initial = *initial;
  }
  return t;
}

double stationary_cross_moment(int m, int n, const FullParams& params) {
  require_order(m, n, 2 * kDefaultMaxOrder);
  require_convergent(m, n, params);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m + 1, n + 1);
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i == 0 && j == 0) {
        s(i, j) = 1.0;
        continue;
      }
      const RateConstants rc = rates(i, j, params);
      double src = 0.0;
      if (i > 0) src += rc.A_Y * s(i - 1, j);
      if (j > 0) src += rc.A_Z * s(i, j - 1);
      s(i, j) = -src / rc.F;
    }
  }
  return s(m, n);
}

Eigen::MatrixXd stationary_cross_moments(int order, const FullParams& params) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(order + 1, order + 1);
  for (int i = 0; i <= order; ++i)
    for (int j = 0; i + j <= order; ++j) out(i, j) = stationary_cross_moment(i, j, params);
  return out;
}

double factor_sum_moment(int k, const FullParams& params) {
  require_order(k, 0, kDefaultMaxOrder);
  double acc = 0.0;
  double binom = 1.0;
  for (int i = 0; i <= k; ++i) {
    acc += binom * stationary_cross_moment(i, k - i, params);
    binom = binom * (k - i) / (i + 1);
  }
  return acc;
}

double cross_moment(int m, int n, double t, const FullParams& params) {
  require_order(m, n, kDefaultMaxOrder);
  if (params.stationary()) {
    return stationary_cross_moment(m, n, params);
  }
  const double s = t - *params.t0;
  if (s < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "t precedes t0");
  }
  return coefficient_table(m, n, params).value(s);
}

double return_moment(int order, double t, const FullParams& params) {
  if (order < 1 || order > 4) {
    throw Error(ErrorCode::InvalidArgument, "return moment order must be 1..4");
  }
  if (!(t >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "return moments need t >= 0");
  }
  if (order == 1) return 0.0;
  if (order == 2) {
    if (params.stationary()) {
      return factor_sum_moment(2, params) * t;
    }
    // int_0^t <(Y+Z)^2> ds, term by term over the (2,0), (1,1), (0,2) tables.
    const CoefficientSet set(2, 2, params);
    const double t0 = *params.t0;
    double acc = 0.0;
    const std::array<std::pair<int, int>, 3> orders{{{2, 0}, {1, 1}, {0, 2}}};
    const std::array<double, 3> weights{1.0, 2.0, 1.0};
    for (std::size_t b = 0; b < orders.size(); ++b) {
      const CoefficientTable& tab = set.table(orders[b].first, orders[b].second);
      for (int i = 0; i <= tab.m; ++i) {
        for (int j = 0; j <= tab.n; ++j) {
          const double F = tab.rates(i, j);
          const double integral =
              F == 0.0 ? t : (std::exp(F * (t - t0)) - std::exp(-F * t0)) / F;
          acc += weights[b] * tab.k(i, j) * integral;
        }
      }
    }
    return acc;
  }
  const std::vector<double> grid{t};
  return ode_oracle(order, 0, 0, params, grid).front();
}

}  // namespace heterovol
