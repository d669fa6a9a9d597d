#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heterovol/model.hpp"
#include "heterovol/series.hpp"

namespace heterovol {

struct SimConfig {
  std::size_t n_paths = 1;
  double horizon = 1.0;           ///< yr of observed returns
  double dt_sim = 1.0 / 2500.0;   ///< yr
  double dt_obs = kDailyStep;     ///< yr
  /// Factor-only pre-roll. Defaults to 10 max(tau_Y, tau_Z) for stationary
  /// params; finite-t0 params always use -t0.
  std::optional<double> burn_in;
  std::uint64_t seed = 0;
  /// Global index of the first path; lets large ensembles run in batches
  /// that reproduce the single-run streams.
  std::uint64_t first_path = 0;
  std::string scheme = "log-euler";
  bool store_factors = false;
};

/// X (and optionally Y, Z) at observation times 0, dt_obs, ..., horizon.
struct PathSet {
  SimConfig config;
  double burn_in = 0.0;  ///< the value actually used
  std::size_t n_obs = 0; ///< points per path, horizon / dt_obs + 1
  std::vector<double> X; ///< path-major, n_paths * n_obs
  std::vector<double> Y; ///< empty unless store_factors
  std::vector<double> Z;

  [[nodiscard]] std::size_t n_paths() const noexcept { return config.n_paths; }
  [[nodiscard]] double x(std::size_t path, std::size_t k) const { return X[path * n_obs + k]; }
};

/// Log-Euler scheme for the factors,
///   d ln Y = (-kappa_Y + kappa_Y y_inf / Y - sigma_Y^2 / 2) dt + sigma_Y dW^Y,
/// Euler for X with the factor values at the start of each sub-step. The
/// three drivers are correlated through a Cholesky factor of the
/// correlation matrix (eigen-decomposition when it is only semi-definite).
/// Path i draws from its own mt19937_64 seeded from (seed, i), so output does
/// not depend on the worker count. Vol-of-vol variances may be zero here.
/// Throws CholeskyFailure, NumericalBlowup, InvalidArgument.
PathSet simulate(const FullParams& params, const SimConfig& config);

/// First differences of X, one series per path (mu = 0: X carries no drift).
std::vector<ReturnSeries> extract_returns(const PathSet& paths);

/// "path_id,t,X[,Y,Z]" CSV.
std::string paths_csv(const PathSet& paths);
/// JSON echo of the parameters and configuration.
std::string paths_sidecar_json(const PathSet& paths, const FullParams& params);

/// 64-bit seed for path `index` (SplitMix64 finalizer over seed and index).
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace heterovol
