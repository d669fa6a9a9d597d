#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "heterovol/correlations.hpp"
#include "heterovol/empirical.hpp"
#include "heterovol/model.hpp"
#include "heterovol/weighting.hpp"

namespace heterovol {

struct AcfRamp {
  double center = 0.0;  ///< lag in days where the weight is one half
  double width = 1.0;   ///< days
};

struct GmmConfig {
  int max_iterations = 10;         ///< weighting updates after the identity step
  double theta_tolerance = 1e-6;   ///< relative change in theta
  Weighting weighting{WeightingMode::Outer, 0};
  /// Weighting used for the middle of the covariance sandwich. Empty means
  /// the estimation weighting itself.
  std::optional<Weighting> covariance_weighting;
  int restarts = 3;
  int max_evaluations = 4000;      ///< per simplex run
  std::uint64_t seed = 1;          ///< restarts and derived-quantity draws
  LagRange stage1{1, 250, 0, 0};
  int stage2_K_hi = 250;
  std::optional<int> K_lo_override;
  int derived_draws = 10000;
  std::optional<AcfRamp> acf_ramp;
  LeverageForm form = LeverageForm::Ito;
  std::size_t min_observations = 500;  ///< per series

  void validate() const;
};

/// g^t W g with g the averaged condition vector at theta.
double objective(const ReducedParams& theta, const MomentData& data,
                 const Eigen::MatrixXd& weight, LeverageForm form = LeverageForm::Ito);

struct MinimizeResult {
  ReducedParams theta;
  double value;
  int evaluations;
};

/// Nelder-Mead in unconstrained coordinates from theta0, then `restarts`
/// more runs from randomly perturbed copies of the best point.
/// OptimizerStalled when no run reaches a finite objective.
MinimizeResult minimize(const ReducedParams& theta0, const MomentData& data,
                        const Eigen::MatrixXd& weight, const GmmConfig& config);

struct IterateResult {
  ReducedParams theta;
  Eigen::MatrixXd omega;          ///< last Omega-hat used for estimation
  Eigen::MatrixXd weight;         ///< matrix the objective used (Omega^-1, ramped)
  double objective;
  int iterations;                 ///< weighting updates performed
  bool converged;
};

/// Identity-weighted estimate, then Omega-hat / re-minimize rounds until the
/// relative theta change drops below the tolerance or max_iterations is hit.
/// max_iterations = 1 is the classic two-step estimator.
IterateResult iterate(const MomentData& data, const ReducedParams& theta0, const GmmConfig& config);

struct CovarianceResult {
  Eigen::MatrixXd V_over_T;   ///< 7x7, theta coordinates
  Eigen::VectorXd sigma;      ///< sqrt(diag(V/T))
  Eigen::MatrixXd rho;        ///< unit diagonal
  Eigen::MatrixXd jacobian;   ///< d g / d theta, r x 7
};

/// V = (D^t W D)^-1 D^t W S W D (D^t W D)^-1 with D the central-difference
/// Jacobian (relative step 1e-4 per unconstrained coordinate, mapped to theta).
/// S is omega, or Omega-hat under config.covariance_weighting when given.
/// With W = S^-1 this is (D^t S^-1 D)^-1. SingularMatrix on rank loss.
CovarianceResult covariance(const ReducedParams& theta, const MomentData& data,
                            const Eigen::MatrixXd& omega, const Eigen::MatrixXd& weight,
                            const GmmConfig& config);

/// The sandwich itself, for any Jacobian D (r x k), weight W and moment
/// covariance S, over T observations.
Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& D, const Eigen::MatrixXd& W,
                                    const Eigen::MatrixXd& S, double T);

struct DerivedStat {
  double point;  ///< at theta-hat
  double mean;
  double stddev;
};

struct DerivedStats {
  DerivedStat sigma2_Y;
  DerivedStat sigma2_Z;
  DerivedStat tau_L;
  int draws;
  int rejected;
};

/// Draws from Normal(theta, V/T); draws with nu <= 4 or a non-positive level
/// or time scale are rejected and counted. TooManyRejections above half.
DerivedStats propagate_derived(const ReducedParams& theta, const Eigen::MatrixXd& V_over_T,
                               int n_draws, std::uint64_t seed);

/// Method-of-moments starting point from the first four conditions plus the
/// sign of the short-lag leverage.
ReducedParams starting_point(const MomentData& data);

/// K' = floor(2 tau_L) with tau_L in trading days. TauLOutOfRange unless
/// tau_L * 250 lies in [2, 125].
int acf_lower_lag(double tau_L_years);

struct StageSummary {
  ReducedParams theta;
  Eigen::VectorXd sigma;
  int conditions;
  int iterations;
  double objective;
  bool converged;
};

struct GmmReport {
  ReducedParams theta;
  CovarianceResult cov;
  DerivedStats derived;
  double objective;
  int iterations;
  StageSummary stage1;
  StageSummary stage2;
  int K_lo;                      ///< ACF lower lag actually used (days)
  double tau_L_stage1;           ///< years
  std::size_t observations;
  std::size_t rows;              ///< common rows in stage 2
  std::string weighting;
  std::vector<std::string> warnings;
};

/// Stage 1: four moments plus leverage lags; K' from the stage-1 tau_L;
/// stage 2: adds ACF lags K'..K_hi. Covariance and derived quantities at the
/// stage-2 estimate.
GmmReport staged_calibration(const std::vector<ReturnSeries>& returns, const GmmConfig& config);

/// Standard errors and correlations quoted with the 1970-2010 S&P 500
/// estimates, in the same units as sp500_1970_2010_estimates().
std::array<double, ReducedParams::kSize> sp500_1970_2010_standard_errors();
Eigen::MatrixXd sp500_1970_2010_correlations();

}  // namespace heterovol
