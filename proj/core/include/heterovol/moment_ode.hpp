#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "heterovol/model.hpp"

namespace heterovol {

/// The closed linear system obeyed by M(l,m,n) = <X^l Y^m Z^n>, truncated
/// at l + m + n <= degree (the truncation is exact: no term raises degree).
///
///   dM(l,m,n)/dt = F(m,n) M(l,m,n) + A_Y(m) M(l,m-1,n) + A_Z(n) M(l,m,n-1)
///     + l(l-1)/2 [M(l-2,m+2,n) + 2 M(l-2,m+1,n+1) + M(l-2,m,n+2)]
///     + l (m rho_XY sigma_Y + n rho_XZ sigma_Z) [M(l-1,m+1,n) + M(l-1,m,n+1)]
///
/// With `factors_only` the state keeps l = 0 only.
class MomentOdeSystem {
 public:
  using State = Eigen::VectorXd;

  MomentOdeSystem(int degree, const FullParams& params, bool factors_only = false);

  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] bool factors_only() const noexcept { return factors_only_; }
  [[nodiscard]] std::size_t size() const noexcept { return states_.size(); }
  [[nodiscard]] bool contains(int l, int m, int n) const noexcept;
  /// Position of (l,m,n) in the state vector; InvalidArgument if absent.
  [[nodiscard]] std::size_t index(int l, int m, int n) const;
  [[nodiscard]] const Eigen::MatrixXd& generator() const noexcept { return generator_; }

  /// Factors at the point (y, z), X = 0.
  [[nodiscard]] State point_state(double y, double z) const;
  /// Invariant-law factor moments from the steady state of the l = 0 block
  /// (dense LU solve), X = 0. MomentDiverges if any F(m,n) >= 0 is in scope.
  [[nodiscard]] State stationary_state() const;

  /// Integrates from (x0, t_start) and returns the state at each of `times`
  /// (non-decreasing, all >= t_start). OdeToleranceNotMet on failure.
  [[nodiscard]] std::vector<State> integrate(const State& x0, double t_start,
                                             const std::vector<double>& times) const;

 private:
  int degree_;
  bool factors_only_;
  std::vector<std::array<int, 3>> states_;
  std::vector<int> lookup_;
  Eigen::MatrixXd generator_;
};

inline constexpr int kMaxOracleDegree = 6;

/// <X_t^l Y_t^m Z_t^n> on a time grid (yr) by adaptive integration
/// (Dormand-Prince, relative tolerance 1e-10). X_0 = 0 at t = 0; for finite
/// t0 the factors start from (y0, z0) at t0, otherwise from the invariant law.
/// Grid points must be >= 0 when l > 0 and >= t0 otherwise.
std::vector<double> ode_oracle(int l, int m, int n, const FullParams& params,
                               const std::vector<double>& grid);

/// "t,value" CSV of an oracle trajectory.
std::string trajectory_csv(const std::vector<double>& grid, const std::vector<double>& values);

}  // namespace heterovol
