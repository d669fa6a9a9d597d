#include "heterovol/moment_ode.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/LU>
#include <boost/numeric/odeint.hpp>

#include "csv.hpp"
#include "heterovol/error.hpp"
#include "heterovol/moments.hpp"

namespace heterovol {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kAbsTol = 1e-18;
constexpr double kRelTol = 1e-10;
constexpr std::size_t kMaxStepsPerInterval = 200000;

}  // namespace

MomentOdeSystem::MomentOdeSystem(int degree, const FullParams& params, bool factors_only)
    : degree_(degree), factors_only_(factors_only) {
  if (degree < 0 || degree > kMaxOracleDegree) {
    throw Error(ErrorCode::InvalidArgument, "moment system degree must be 0..6");
  }
  const int D = degree;
  lookup_.assign(static_cast<std::size_t>((D + 1) * (D + 1) * (D + 1)), -1);
  for (int l = 0; l <= (factors_only ? 0 : D); ++l) {
    for (int m = 0; l + m <= D; ++m) {
      for (int n = 0; l + m + n <= D; ++n) {
        lookup_[static_cast<std::size_t>((l * (D + 1) + m) * (D + 1) + n)] =
            static_cast<int>(states_.size());
        states_.push_back({l, m, n});
      }
    }
  }

  const double sY = std::sqrt(params.sigma2_Y);
  const double sZ = std::sqrt(params.sigma2_Z);
  const auto N = static_cast<Eigen::Index>(states_.size());
  generator_ = Eigen::MatrixXd::Zero(N, N);
  auto add = [&](Eigen::Index row, int l, int m, int n, double coeff) {
    if (coeff == 0.0 || !contains(l, m, n)) return;
    generator_(row, static_cast<Eigen::Index>(index(l, m, n))) += coeff;
  };
  for (Eigen::Index row = 0; row < N; ++row) {
    const auto [l, m, n] = states_[static_cast<std::size_t>(row)];
    const RateConstants rc = rates(m, n, params);
    add(row, l, m, n, rc.F);
    add(row, l, m - 1, n, rc.A_Y);
    add(row, l, m, n - 1, rc.A_Z);
    if (l >= 2) {
      const double c = 0.5 * l * (l - 1);
      add(row, l - 2, m + 2, n, c);
      add(row, l - 2, m + 1, n + 1, 2.0 * c);
      add(row, l - 2, m, n + 2, c);
    }
    if (l >= 1) {
      const double c = l * (m * params.rho_XY * sY + n * params.rho_XZ * sZ);
      add(row, l - 1, m + 1, n, c);
      add(row, l - 1, m, n + 1, c);
    }
  }
}

bool MomentOdeSystem::contains(int l, int m, int n) const noexcept {
  if (l < 0 || m < 0 || n < 0 || l + m + n > degree_) return false;
  const int D = degree_;
  return lookup_[static_cast<std::size_t>((l * (D + 1) + m) * (D + 1) + n)] >= 0;
}

std::size_t MomentOdeSystem::index(int l, int m, int n) const {
  if (!contains(l, m, n)) {
    throw Error(ErrorCode::InvalidArgument, "monomial outside the moment system");
  }
  const int D = degree_;
  return static_cast<std::size_t>(lookup_[static_cast<std::size_t>((l * (D + 1) + m) * (D + 1) + n)]);
}

MomentOdeSystem::State MomentOdeSystem::point_state(double y, double z) const {
  State x = State::Zero(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    const auto [l, m, n] = states_[i];
    if (l == 0) x(static_cast<Eigen::Index>(i)) = std::pow(y, m) * std::pow(z, n);
  }
  return x;
}

MomentOdeSystem::State MomentOdeSystem::stationary_state() const {
  // Factor block: indices with l == 0, the constant (0,0,0) first.
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto [l, m, n] = states_[i];
    if (l != 0 || (m == 0 && n == 0)) continue;
    if (generator_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) >= 0.0) {
      throw Error(ErrorCode::MomentDiverges,
                  "nonnegative rate for <Y^" + std::to_string(m) + " Z^" + std::to_string(n) + ">");
    }
    idx.push_back(static_cast<Eigen::Index>(i));
  }
  const auto k = static_cast<Eigen::Index>(idx.size());
  const auto one = static_cast<Eigen::Index>(index(0, 0, 0));
  Eigen::MatrixXd A(k, k);
  Eigen::VectorXd b(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) A(r, c) = generator_(idx[r], idx[c]);
    b(r) = -generator_(idx[r], one);
  }
  const Eigen::VectorXd s = A.partialPivLu().solve(b);
  State x = State::Zero(static_cast<Eigen::Index>(size()));
  x(one) = 1.0;
  for (Eigen::Index r = 0; r < k; ++r) x(idx[r]) = s(r);
  return x;
}

std::vector<MomentOdeSystem::State> MomentOdeSystem::integrate(
    const State& x0, double t_start, const std::vector<double>& times) const {
  if (x0.size() != static_cast<Eigen::Index>(size())) {
    throw Error(ErrorCode::InvalidArgument, "state size mismatch");
  }
  std::vector<double> stops{t_start};
  for (double t : times) {
    if (!std::isfinite(t) || t < stops.back()) {
      throw Error(ErrorCode::InvalidArgument, "time grid must be non-decreasing from the start");
    }
    if (t > stops.back()) stops.push_back(t);
  }

  using Vec = std::vector<double>;
  const Eigen::MatrixXd& G = generator_;
  auto rhs = [&G](const Vec& x, Vec& dxdt, double /*t*/) {
    const auto n = static_cast<Eigen::Index>(x.size());
    dxdt.resize(x.size());
    Eigen::Map<Eigen::VectorXd>(dxdt.data(), n).noalias() =
        G * Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  };

  std::map<double, State> at;
  Vec x(x0.data(), x0.data() + x0.size());
  if (stops.size() == 1) {
    at.emplace(t_start, x0);
  } else {
    auto stepper = odeint::make_dense_output(kAbsTol, kRelTol, odeint::runge_kutta_dopri5<Vec>());
    const double dt0 = std::min(1e-4, stops[1] - stops[0]);
    try {
      odeint::integrate_times(
          stepper, rhs, x, stops.begin(), stops.end(), dt0,
          [&at](const Vec& s, double t) {
            at.emplace(t, Eigen::Map<const Eigen::VectorXd>(s.data(),
                                                            static_cast<Eigen::Index>(s.size())));
          },
          odeint::max_step_checker(kMaxStepsPerInterval));
    } catch (const odeint::odeint_error& e) {
      throw Error(ErrorCode::OdeToleranceNotMet, e.what());
    }
  }

  std::vector<State> out;
  out.reserve(times.size());
  for (double t : times) {
    const auto it = at.find(t);
    if (it == at.end() || !it->second.allFinite()) {
      throw Error(ErrorCode::OdeToleranceNotMet, "no finite state at t = " + std::to_string(t));
    }
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> ode_oracle(int l, int m, int n, const FullParams& params,
                               const std::vector<double>& grid) {
  if (l < 0 || m < 0 || n < 0 || l + m + n > kMaxOracleDegree) {
    throw Error(ErrorCode::InvalidArgument, "oracle needs 0 <= l+m+n <= 6");
  }
  if (grid.empty()) return {};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "oracle grid must be strictly increasing");
    }
  }
  const MomentOdeSystem sys(l + m + n, params);
  const std::size_t target = sys.index(l, m, n);

  MomentOdeSystem::State x0;
  double t_start = 0.0;
  if (params.stationary()) {
    x0 = sys.stationary_state();
    if (grid.front() < 0.0 && l > 0) {
      throw Error(ErrorCode::InvalidArgument, "return moments need t >= 0");
    }
    t_start = std::min(0.0, grid.front());
  } else {
    const double t0 = *params.t0;
    x0 = sys.point_state(params.y0, params.z0);
    t_start = t0;
    if (l > 0) {
      if (grid.front() < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "return moments need t >= 0");
      }
      // Factors run alone until the price process starts at t = 0.
      x0 = sys.integrate(x0, t0, {0.0}).front();
      for (int a = 1; a <= sys.degree(); ++a)
        for (int b = 0; a + b <= sys.degree(); ++b)
          for (int c = 0; a + b + c <= sys.degree(); ++c)
            x0(static_cast<Eigen::Index>(sys.index(a, b, c))) = 0.0;
      t_start = 0.0;
    } else if (grid.front() < t0) {
      throw Error(ErrorCode::InvalidArgument, "grid precedes t0");
    }
  }

  const auto states = sys.integrate(x0, t_start, grid);
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s(static_cast<Eigen::Index>(target)));
  return out;
}

std::string trajectory_csv(const std::vector<double>& grid, const std::vector<double>& values) {
  std::string out = "t,value\n";
  for (std::size_t i = 0; i < grid.size() && i < values.size(); ++i) {
    out += csv::format_double(grid[i]);
    out += ',';
    out += csv::format_double(values[i]);
    out += '\n';
  }
  return out;
}

}  // namespace heterovol
