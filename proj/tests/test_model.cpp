#include <cmath>

#include "doctest.h"

#include "heterovol/error.hpp"
#include "heterovol/model.hpp"
#include "heterovol/params_io.hpp"

using namespace heterovol;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("S&P estimates expand to a valid stationary parameter set") {
  const ReducedParams t = sp500_1970_2010_estimates();
  const FullParams p = expand(t);
  CHECK_NOTHROW(validate(p));
  CHECK(p.stationary());
  CHECK(p.rho_XZ == 0.0);
  CHECK(p.rho_YZ == 0.0);
  CHECK(p.y0 == t.y_inf);
  CHECK(p.z0 == t.z_inf);
  CHECK(p.sigma2_Y == doctest::Approx(2.0 / (0.07 * 3.15)).epsilon(1e-14));
  CHECK(p.sigma2_Y == doctest::Approx(9.0703).epsilon(1e-5));
  CHECK(p.sigma2_Z == doctest::Approx(1.5873).epsilon(1e-4));
  CHECK(p.mu == doctest::Approx(2.1e-4 * 250));
}

TEST_CASE("derived quantities") {
  const DerivedQuantities d = derived(sp500_1970_2010_estimates());
  CHECK(d.tau_L == doctest::Approx(0.07 * 3.15 / 2.15).epsilon(1e-14));
  CHECK(std::abs(d.tau_L - 0.1026) < 5e-5);
  CHECK(d.sigma2_Z == doctest::Approx(1.5873).epsilon(1e-4));
  CHECK(d.lambda_Y == doctest::Approx(3.15 * 0.095));
  CHECK(d.kappa_Y == doctest::Approx(1.0 / 0.07));

  ReducedParams big = sp500_1970_2010_estimates();
  big.nu = 1e9;
  CHECK(derived(big).tau_L == doctest::Approx(big.tau_Y).epsilon(1e-8));
}

TEST_CASE("sigma2 tau (nu - 1) = 2 and tau_L / tau_Y in (1, 3/2] over a sweep") {
  ReducedParams t = sp500_1970_2010_estimates();
  for (double nu = 4.0001; nu < 200.0; nu *= 1.3) {
    for (double tau = 0.01; tau < 5.0; tau *= 2.7) {
      t.nu = nu;
      t.tau_Y = tau;
      t.tau_Z = 3.0 * tau;
      const DerivedQuantities d = derived(t);
      CHECK(d.sigma2_Y * t.tau_Y * (nu - 1.0) == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(d.sigma2_Z * t.tau_Z * (nu - 1.0) == doctest::Approx(2.0).epsilon(1e-14));
      const double ratio = d.tau_L / t.tau_Y;
      CHECK(ratio > 1.0);
      CHECK(ratio <= 1.5 + 1e-12);
    }
  }
}

TEST_CASE("validation errors") {
  FullParams p = expand(sp500_1970_2010_estimates());
  FullParams bad = p;
  bad.tau_Y = 0.0;
  try {
    validate(bad);
    FAIL("accepted tau_Y = 0");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveParameter);
    CHECK(std::string(e.what()).find("tau_Y") != std::string::npos);
  }
  bad = p;
  bad.rho_XY = 1.2;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::CorrelationOutOfRange);
  bad = p;
  bad.rho_XY = 0.9;
  bad.rho_XZ = 0.9;
  bad.rho_YZ = -0.9;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::CorrelationMatrixNotPSD);
  bad = p;
  bad.t0 = 0.5;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidArgument);

  ReducedParams r = sp500_1970_2010_estimates();
  r.nu = 4.0;
  CHECK(code_of([&] { validate(r); }) == ErrorCode::NonPositiveParameter);
  r = sp500_1970_2010_estimates();
  r.mu = std::nan("");
  CHECK(code_of([&] { validate(r); }) == ErrorCode::NonFiniteInput);
}

TEST_CASE("unconstrained transform round trip") {
  const ReducedParams t = sp500_1970_2010_estimates();
  const auto u = to_unconstrained(t);
  const auto back = from_unconstrained(u).to_array();
  const auto orig = t.to_array();
  for (std::size_t i = 0; i < orig.size(); ++i) {
    CHECK(std::abs(back[i] - orig[i]) <= 1e-12 * std::abs(orig[i]));
  }
  ReducedParams z = t;
  z.rho_XY = 0.0;
  z.nu = 5.0;
  const auto uz = to_unconstrained(z);
  CHECK(uz[5] == 0.0);
  CHECK(uz[6] == doctest::Approx(0.0).epsilon(1e-15));

  auto nan_u = u;
  nan_u[2] = std::nan("");
  CHECK(code_of([&] { (void)from_unconstrained(nan_u); }) == ErrorCode::NonFiniteInput);

  // Diagonal Jacobian against a central difference.
  const auto jac = unconstrained_jacobian(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto up = u;
    auto dn = u;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    const double fd = (from_unconstrained(up).to_array()[i] - from_unconstrained(dn).to_array()[i]) / 2e-6;
    CHECK(jac[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("parameter JSON") {
  const auto any = parse_params(R"({"mu": 0.0525, "y_inf": 0.095, "z_inf": 0.052, "tau_Y": 0.07,
                                    "tau_Z": 0.4, "rho_XY": -0.77, "nu": 4.15})");
  REQUIRE(std::holds_alternative<ReducedParams>(any));
  CHECK(std::get<ReducedParams>(any).nu == 4.15);

  const FullParams p = expand(sp500_1970_2010_estimates());
  const auto again = parse_params(to_json(p));
  REQUIRE(std::holds_alternative<FullParams>(again));
  const FullParams q = std::get<FullParams>(again);
  CHECK(q.sigma2_Y == p.sigma2_Y);
  CHECK(q.stationary());

  CHECK(code_of([] { (void)parse_params(R"({"nu": 5, "bogus": 1})"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { (void)parse_params("{not json"); }) == ErrorCode::ParseError);
}

}  // TEST_SUITE
