#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "heterovol/model.hpp"

namespace heterovol {

/// Decay rates and source terms of the factor moment equations
///   d<Y^m Z^n>/dt = F(m,n) <Y^m Z^n> + A_Y(m) <Y^{m-1} Z^n> + A_Z(n) <Y^m Z^{n-1}>.
struct RateConstants {
  double F_Y;  ///< -kappa_Y m + m(m-1) sigma_Y^2 / 2
  double F_Z;
  double F;    ///< F_Y + F_Z + m n rho_YZ sigma_Y sigma_Z
  double A_Y;  ///< m kappa_Y y_inf
  double A_Z;
};

RateConstants rates(int m, int n, const FullParams& params);

inline constexpr int kDefaultMaxOrder = 4;

/// Expansion of C_{m,n}(t) = <Y_t^m Z_t^n> over exponentials in (t - t0):
///   C_{m,n}(t) = sum_{i<=m, j<=n} k(i,j) exp(F(i,j) (t - t0)).
struct CoefficientTable {
  int m = 0;
  int n = 0;
  Eigen::MatrixXd k;      ///< (m+1) x (n+1)
  Eigen::MatrixXd rates;  ///< F(i,j), same shape
  double initial = 1.0;   ///< <Y^m Z^n> at t0

  /// Value at elapsed time s = t - t0 >= 0.
  [[nodiscard]] double value(double s) const;
  /// k(0,0), the t0 -> -infinity limit. Does not check convergence.
  [[nodiscard]] double constant_term() const { return k(0, 0); }
};

/// Tables for every (i,j) <= (m,n), built bottom-up from (0,0).
class CoefficientSet {
 public:
  CoefficientSet(int max_m, int max_n, const FullParams& params);

  [[nodiscard]] const CoefficientTable& table(int i, int j) const;
  [[nodiscard]] int max_m() const noexcept { return max_m_; }
  [[nodiscard]] int max_n() const noexcept { return max_n_; }

 private:
  int max_m_;
  int max_n_;
  std::vector<CoefficientTable> tables_;
};

/// Table for C_{m,n}. Lower orders start from the point mass y0^i z0^j; the
/// top order starts from `initial` (default y0^m z0^n).
/// Throws DegenerateRates when F(m,n) and F(i,j) coincide to 1e-9 relative.
CoefficientTable coefficient_table(int m, int n, const FullParams& params,
                                   std::optional<double> initial = std::nullopt,
                                   int max_order = kDefaultMaxOrder);

/// <Y_t^m Z_t^n>. For stationary params `t` is ignored and the invariant-law
/// moment is returned (MomentDiverges if any F(i,j) >= 0, (i,j) != (0,0)).
double cross_moment(int m, int n, double t, const FullParams& params);

/// Invariant-law moment <Y^m Z^n>, by the constant-term recursion
///   s(m,n) = -(A_Y(m) s(m-1,n) + A_Z(n) s(m,n-1)) / F(m,n).
double stationary_cross_moment(int m, int n, const FullParams& params);

/// All stationary <Y^i Z^j> for i + j <= order, as a dense (order+1)^2 matrix
/// (entries with i + j > order are left at zero).
Eigen::MatrixXd stationary_cross_moments(int order, const FullParams& params);

/// Stationary <(Y+Z)^k>, k <= 4.
double factor_sum_moment(int k, const FullParams& params);

/// <X_t^order> with X_0 = 0, t >= 0. Order 1 is zero, order 2 is closed form,
/// orders 3 and 4 integrate the joint moment equations.
double return_moment(int order, double t, const FullParams& params);

}  // namespace heterovol
