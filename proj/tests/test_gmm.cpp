#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "doctest.h"

#include "heterovol/error.hpp"
#include "heterovol/gmm.hpp"
#include "heterovol/model.hpp"
#include "heterovol/nelder_mead.hpp"
#include "heterovol/report.hpp"
#include "heterovol/simulator.hpp"

using namespace heterovol;

namespace {

// Light tails keep every condition's variance finite, so the asymptotics
// are usable on small samples.
ReducedParams light() { return {0.05, 0.095, 0.052, 0.07, 0.4, -0.77, 12.0}; }

std::vector<ReturnSeries> simulated(const ReducedParams& truth, std::size_t paths, double years,
                                    std::uint64_t seed) {
  SimConfig c;
  c.n_paths = paths;
  c.horizon = years;
  c.seed = seed;
  auto rets = extract_returns(simulate(expand(truth), c));
  for (auto& r : rets) r.mu = truth.mu;
  return rets;
}

}  // namespace

TEST_SUITE("gmm") {

TEST_CASE("Nelder-Mead") {
  const auto quad = [](const Eigen::VectorXd& x) {
    return (x - Eigen::Vector3d(1.0, -2.0, 0.5)).squaredNorm();
  };
  const NelderMeadResult r = nelder_mead(quad, Eigen::Vector3d::Zero());
  CHECK(r.converged);
  CHECK((r.x - Eigen::Vector3d(1.0, -2.0, 0.5)).norm() < 1e-6);
  const auto rosen = [](const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
  };
  NelderMeadOptions o;
  o.f_tolerance = 1e-14;
  o.x_tolerance = 1e-10;
  const NelderMeadResult rr = nelder_mead(rosen, Eigen::Vector2d(-1.2, 1.0), o);
  CHECK((rr.x - Eigen::Vector2d(1.0, 1.0)).norm() < 1e-4);
  const auto walled = [](const Eigen::VectorXd& x) {
    return x(0) < 0.0 ? std::nan("") : (x(0) - 0.3) * (x(0) - 0.3);
  };
  CHECK(nelder_mead(walled, Eigen::VectorXd::Constant(1, 0.05)).x(0) ==
        doctest::Approx(0.3).epsilon(1e-5));
}

TEST_CASE("objective is the weighted squared condition norm") {
  const auto rets = simulated(light(), 2, 4.0, 11);
  const MomentData data(rets, {1, 20, 25, 40});
  const ReducedParams theta = light();
  const Eigen::VectorXd g = condition_vector(data, theta).values;
  const Eigen::Index r = g.size();
  CHECK(objective(theta, data, Eigen::MatrixXd::Identity(r, r)) ==
        doctest::Approx(g.squaredNorm()).epsilon(1e-12));
  const Eigen::MatrixXd W = Eigen::VectorXd::LinSpaced(r, 1.0, 2.0).asDiagonal();
  CHECK(objective(theta, data, W) == doctest::Approx(g.dot(W * g)).epsilon(1e-12));
}

TEST_CASE("sandwich on a linear model") {
  // y = a + b x + e with moments (e, x e): D = -M, S = s^2 M, so
  // V/T = s^2 M^-1 / T for any weight.
  Eigen::Matrix2d M;
  M << 1.0, 0.4, 0.4, 1.3;
  const double s2 = 0.7;
  const double T = 500.0;
  Eigen::Matrix2d W;
  W << 2.0, 0.3, 0.3, 0.5;
  const Eigen::MatrixXd V = sandwich_covariance(-M, W, s2 * M, T);
  const Eigen::MatrixXd expected = s2 * M.inverse() / T;
  CHECK((V - expected).cwiseAbs().maxCoeff() < 1e-14);
  // Over-identified: three moments, two parameters, efficient weight.
  Eigen::MatrixXd D(3, 2);
  D << 1.0, 0.0, 0.5, 1.0, 0.2, -0.4;
  const Eigen::Matrix3d S = Eigen::Vector3d(1.0, 2.0, 0.5).asDiagonal();
  const Eigen::MatrixXd eff = sandwich_covariance(D, S.inverse(), S, 1.0);
  CHECK((eff - (D.transpose() * S.inverse() * D).inverse()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd flat = D;
  flat.col(1).setZero();
  CHECK_THROWS_AS(sandwich_covariance(flat, S, S, 1.0), Error);
}

TEST_CASE("derived-quantity propagation") {
  const ReducedParams theta = sp500_1970_2010_estimates();
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(7, 7);
  const DerivedStats d = propagate_derived(theta, zero, 100, 1);
  const DerivedQuantities q = derived(theta);
  CHECK(d.rejected == 0);
  CHECK(d.tau_L.point == q.tau_L);
  CHECK(d.tau_L.mean == doctest::Approx(q.tau_L).epsilon(1e-14));
  CHECK(d.tau_L.stddev == doctest::Approx(0.0).scale(1e-15));
  CHECK(d.sigma2_Y.point == doctest::Approx(q.sigma2_Y));

  // Linear case: sd of sigma2_Z ~ |d sigma2_Z / d nu| sd(nu) for small sd.
  Eigen::MatrixXd V = zero;
  V(6, 6) = 1e-6;
  const DerivedStats lin = propagate_derived(light(), V, 20000, 3);
  const double slope = 2.0 / 0.4 / std::pow(12.0 - 1.0, 2);
  CHECK(lin.sigma2_Z.stddev == doctest::Approx(slope * 1e-3).epsilon(0.03));

  Eigen::MatrixXd wide = zero;
  wide(6, 6) = 1.0;
  ReducedParams edge = theta;
  edge.nu = 4.05;
  try {
    (void)propagate_derived(edge, wide, 1000, 1);
    FAIL("rejections not reported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyRejections);
  }
}

TEST_CASE("ACF lower lag") {
  CHECK(acf_lower_lag(derived(sp500_1970_2010_estimates()).tau_L) == 51);
  CHECK(acf_lower_lag(0.02) == 10);
  CHECK_THROWS_AS(acf_lower_lag(0.004), Error);
  CHECK_THROWS_AS(acf_lower_lag(0.6), Error);
}

TEST_CASE("published standard errors") {
  const auto se = sp500_1970_2010_standard_errors();
  CHECK(se[0] == doctest::Approx(6e-5 * 250.0));
  CHECK(se[6] == doctest::Approx(0.01));
  const Eigen::MatrixXd rho = sp500_1970_2010_correlations();
  CHECK(rho.rows() == 7);
  CHECK(rho.diagonal().isOnes());
  CHECK(rho == rho.transpose());
}

TEST_CASE("configuration checks") {
  GmmConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = GmmConfig{};
  c.stage1 = {1, 50, 60, 80};
  CHECK_THROWS_AS(c.validate(), Error);
  c = GmmConfig{};
  c.K_lo_override = 250;
  CHECK_THROWS_AS(c.validate(), Error);

  std::vector<ReturnSeries> tiny{ReturnSeries{std::vector<double>(100, 0.001)}};
  try {
    (void)staged_calibration(tiny, GmmConfig{});
    FAIL("short series accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewObservations);
  }
}

TEST_CASE("staged calibration recovers a light-tailed truth") {
  const ReducedParams truth = light();
  const auto rets = simulated(truth, 20, 40.0, 1000);
  GmmConfig c;
  c.max_iterations = 1;
  c.covariance_weighting = Weighting{WeightingMode::NeweyWest, 250};
  c.derived_draws = 2000;
  const ReducedParams start = starting_point(MomentData(rets, c.stage1));
  CHECK(start.nu >= 4.2);
  CHECK(start.nu <= 12.0);
  CHECK(start.rho_XY < 0.0);

  const GmmReport rep = staged_calibration(rets, c);
  CHECK(rep.observations == 20 * 10000);
  CHECK(rep.stage1.conditions == 254);
  CHECK(rep.stage2.conditions == 254 + 250 - rep.K_lo + 1);
  CHECK(rep.K_lo == acf_lower_lag(rep.tau_L_stage1));
  const auto est = rep.theta.to_array();
  const auto tru = truth.to_array();
  for (std::size_t i = 0; i < est.size(); ++i) {
    CAPTURE(ReducedParams::names()[i]);
    REQUIRE(std::isfinite(rep.cov.sigma(static_cast<Eigen::Index>(i))));
    CHECK(std::abs(est[i] - tru[i]) < 3.0 * rep.cov.sigma(static_cast<Eigen::Index>(i)));
  }
  CHECK((rep.cov.rho.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);

  const auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j.at("theta").size() == 7);
  CHECK(j.at("K_lo").get<int>() == rep.K_lo);
  CHECK(j.at("derived").contains("tau_L"));
  CHECK(report_text(rep).find("nu") != std::string::npos);
}

}  // TEST_SUITE
