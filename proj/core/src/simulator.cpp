#include "heterovol/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "csv.hpp"
#include "heterovol/error.hpp"
#include "heterovol/parallel.hpp"
#include "json.hpp"

namespace heterovol {

namespace {

constexpr double kBlowup = 1e12;

std::size_t whole_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double k = std::round(r);
  if (k < 1.0 || std::abs(r - k) > 1e-9 * std::max(1.0, k)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " is not a whole multiple");
  }
  return static_cast<std::size_t>(k);
}

void check_params(const FullParams& p) {
  if (!(p.sigma2_Y >= 0.0) || !(p.sigma2_Z >= 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter, "sigma2 must be >= 0 for simulation");
  }
  // Everything else as usual; a zero vol-of-vol is a legitimate limit here.
  FullParams q = p;
  if (q.sigma2_Y == 0.0) q.sigma2_Y = 1.0;
  if (q.sigma2_Z == 0.0) q.sigma2_Z = 1.0;
  validate(q);
}

Eigen::Matrix3d correlation_factor(const Eigen::Matrix3d& c) {
  const Eigen::LLT<Eigen::Matrix3d> llt(c);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(c);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -1e-12) {
    throw Error(ErrorCode::CholeskyFailure, "correlation matrix is not positive semi-definite");
  }
  const Eigen::Vector3d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

struct Stepper {
  double kY, kZ, yinf, zinf, sY, sZ, dt, sqdt;
  Eigen::Matrix3d L;

  // One sub-step. Returns the X increment driven by the pre-step factors.
  template <class Rng>
  double step(double& lnY, double& lnZ, double& Y, double& Z, Rng& rng,
              std::normal_distribution<double>& normal) const {
    const double e0 = normal(rng);
    const double e1 = normal(rng);
    const double e2 = normal(rng);
    const double wX = L(0, 0) * e0 + L(0, 1) * e1 + L(0, 2) * e2;
    const double wY = L(1, 0) * e0 + L(1, 1) * e1 + L(1, 2) * e2;
    const double wZ = L(2, 0) * e0 + L(2, 1) * e1 + L(2, 2) * e2;
    const double dX = (Y + Z) * sqdt * wX;
    lnY += (-kY + kY * yinf / Y - 0.5 * sY * sY) * dt + sY * sqdt * wY;
    lnZ += (-kZ + kZ * zinf / Z - 0.5 * sZ * sZ) * dt + sZ * sqdt * wZ;
    Y = std::exp(lnY);
    Z = std::exp(lnZ);
    if (!(Y < kBlowup) || !(Z < kBlowup) || !(Y > 0.0) || !(Z > 0.0)) {
      throw Error(ErrorCode::NumericalBlowup, "factor left (0, 1e12)");
    }
    return dX;
  }
};

}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ index);
}

PathSet simulate(const FullParams& params, const SimConfig& config) {
  check_params(params);
  if (config.n_paths == 0) throw Error(ErrorCode::InvalidArgument, "n_paths must be positive");
  if (!(config.dt_sim > 0.0) || !(config.dt_obs > 0.0) || !(config.horizon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "dt_sim, dt_obs and horizon must be positive");
  }
  if (config.dt_sim > config.dt_obs) {
    throw Error(ErrorCode::InvalidArgument, "dt_sim must not exceed dt_obs");
  }
  if (config.scheme != "log-euler") {
    throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + config.scheme + "'");
  }
  const std::size_t sub = whole_ratio(config.dt_obs, config.dt_sim, "dt_obs / dt_sim");
  const std::size_t n_steps = whole_ratio(config.horizon, config.dt_obs, "horizon / dt_obs");

  double burn_in = 0.0;
  if (params.t0) {
    burn_in = -*params.t0;
  } else {
    const double floor = 10.0 * std::max(params.tau_Y, params.tau_Z);
    burn_in = config.burn_in.value_or(floor);
    if (burn_in < floor * (1.0 - 1e-12)) {
      throw Error(ErrorCode::InvalidArgument, "burn_in below 10 max(tau_Y, tau_Z)");
    }
  }
  const auto n_burn = static_cast<std::size_t>(std::llround(burn_in / config.dt_sim));

  PathSet out;
  out.config = config;
  out.burn_in = burn_in;
  out.n_obs = n_steps + 1;
  out.X.assign(config.n_paths * out.n_obs, 0.0);
  if (config.store_factors) {
    out.Y.assign(out.X.size(), 0.0);
    out.Z.assign(out.X.size(), 0.0);
  }

  Stepper st{params.kappa_Y(), params.kappa_Z(), params.y_inf, params.z_inf,
             std::sqrt(params.sigma2_Y), std::sqrt(params.sigma2_Z), config.dt_sim,
             std::sqrt(config.dt_sim), correlation_factor(params.correlation_matrix())};

  parallel_for(config.n_paths, [&](std::size_t path) {
    std::mt19937_64 rng(path_seed(config.seed, config.first_path + path));
    std::normal_distribution<double> normal(0.0, 1.0);
    double Y = params.y0;
    double Z = params.z0;
    double lnY = std::log(Y);
    double lnZ = std::log(Z);
    for (std::size_t i = 0; i < n_burn; ++i) st.step(lnY, lnZ, Y, Z, rng, normal);

    double* X = out.X.data() + path * out.n_obs;
    double x = 0.0;
    X[0] = 0.0;
    if (config.store_factors) {
      out.Y[path * out.n_obs] = Y;
      out.Z[path * out.n_obs] = Z;
    }
    for (std::size_t k = 1; k <= n_steps; ++k) {
      for (std::size_t s = 0; s < sub; ++s) x += st.step(lnY, lnZ, Y, Z, rng, normal);
      X[k] = x;
      if (config.store_factors) {
        out.Y[path * out.n_obs + k] = Y;
        out.Z[path * out.n_obs + k] = Z;
      }
    }
  });
  return out;
}

std::vector<ReturnSeries> extract_returns(const PathSet& paths) {
  if (paths.n_paths() == 0 || paths.n_obs < 2) {
    throw Error(ErrorCode::InvalidArgument, "empty path set");
  }
  std::vector<ReturnSeries> out(paths.n_paths());
  for (std::size_t p = 0; p < paths.n_paths(); ++p) {
    ReturnSeries& r = out[p];
    r.dt = paths.config.dt_obs;
    r.mu = 0.0;
    r.label = "path " + std::to_string(paths.config.first_path + p);
    r.values.resize(paths.n_obs - 1);
    for (std::size_t k = 1; k < paths.n_obs; ++k) r.values[k - 1] = paths.x(p, k) - paths.x(p, k - 1);
  }
  return out;
}

std::string paths_csv(const PathSet& paths) {
  const bool factors = !paths.Y.empty();
  std::string out = factors ? "path_id,t,X,Y,Z\n" : "path_id,t,X\n";
  for (std::size_t p = 0; p < paths.n_paths(); ++p) {
    const std::string id = std::to_string(paths.config.first_path + p);
    for (std::size_t k = 0; k < paths.n_obs; ++k) {
      const std::size_t i = p * paths.n_obs + k;
      out += id;
      out += ',';
      out += csv::format_double(static_cast<double>(k) * paths.config.dt_obs);
      out += ',';
      out += csv::format_double(paths.X[i]);
      if (factors) {
        out += ',';
        out += csv::format_double(paths.Y[i]);
        out += ',';
        out += csv::format_double(paths.Z[i]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string paths_sidecar_json(const PathSet& paths, const FullParams& p) {
  using nlohmann::json;
  const SimConfig& c = paths.config;
  json doc;
  doc["config"] = {{"n_paths", c.n_paths},     {"horizon", c.horizon},
                   {"dt_sim", c.dt_sim},       {"dt_obs", c.dt_obs},
                   {"burn_in", paths.burn_in}, {"seed", c.seed},
                   {"first_path", c.first_path}, {"scheme", c.scheme},
                   {"store_factors", c.store_factors}};
  doc["params"] = {{"mu", p.mu},         {"tau_Y", p.tau_Y},       {"tau_Z", p.tau_Z},
                   {"y_inf", p.y_inf},   {"z_inf", p.z_inf},       {"y0", p.y0},
                   {"z0", p.z0},         {"sigma2_Y", p.sigma2_Y}, {"sigma2_Z", p.sigma2_Z},
                   {"rho_XY", p.rho_XY}, {"rho_XZ", p.rho_XZ},     {"rho_YZ", p.rho_YZ}};
  doc["params"]["t0"] = p.t0 ? json(*p.t0) : json(nullptr);
  doc["rng"] = "mt19937_64 per path, seeded by splitmix64(seed, path index)";
  return doc.dump(2);
}

}  // namespace heterovol
