#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "heterovol/empirical.hpp"
#include "heterovol/error.hpp"
#include "heterovol/model.hpp"

using namespace heterovol;

namespace {

ErrorCode parse_code(const std::string& text, std::string* message = nullptr) {
  try {
    (void)parse_prices(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("parse accepted bad input");
  return ErrorCode::InvalidArgument;
}

ReturnSeries gaussian(std::size_t n, std::uint64_t seed, double sd = 0.01) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  ReturnSeries r;
  r.values.resize(n);
  for (double& v : r.values) v = d(rng);
  return r;
}

}  // namespace

TEST_SUITE("empirical") {

TEST_CASE("price parsing") {
  const PriceSeries s = parse_prices("date,close\n2001-01-03,101\n2001-01-02,100\n2001-01-04,99.5\n");
  REQUIRE(s.records.size() == 3);
  CHECK(s.records[0].date == "2001-01-02");
  CHECK(s.records[2].close == 99.5);

  std::string msg;
  CHECK(parse_code("day,price\n2001-01-02,1\n") == ErrorCode::ParseError);
  CHECK(parse_code("date,close\n2001-01-02,100\n2001-01-03,abc\n", &msg) == ErrorCode::ParseError);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(parse_code("date,close\n2001-13-02,100\n") == ErrorCode::ParseError);
  CHECK(parse_code("date,close\n2001-01-02,100,7\n") == ErrorCode::ParseError);
  CHECK(parse_code("date,close\n2001-01-02,-1\n") == ErrorCode::NonPositivePrice);
  CHECK(parse_code("date,close\n2001-01-02,0\n") == ErrorCode::NonPositivePrice);
  CHECK(parse_code("date,close\n2001-01-02,nan\n") == ErrorCode::NonFiniteInput);
  CHECK(parse_code("date,close\n2001-01-02,1\n2001-01-02,2\n") == ErrorCode::DuplicateDate);
}

TEST_CASE("returns from prices") {
  const PriceSeries s = parse_prices("date,close\n2001-01-02,100\n2001-01-03,110\n2001-01-04,99\n");
  const ReturnSeries r = to_returns(s, 0.0);
  REQUIRE(r.size() == 2);
  CHECK(r.values[0] == doctest::Approx(std::log(1.1)).epsilon(1e-14));
  CHECK(r.values[1] == doctest::Approx(std::log(0.9)).epsilon(1e-14));
  const ReturnSeries d = to_returns(s, 0.25);
  CHECK(d.values[0] == doctest::Approx(std::log(1.1) - 0.001).epsilon(1e-14));
  CHECK(d.mu == 0.25);
  try {
    (void)to_returns(parse_prices("date,close\n2001-01-02,100\n"), 0.0);
    FAIL("single price accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewObservations);
  }
}

TEST_CASE("lag ranges") {
  const LagRange full{1, 250, 51, 250};
  CHECK(full.dimension() == 454);
  CHECK(condition_labels(full).size() == 454);
  CHECK(LagRange{1, 250, 0, 0}.dimension() == 254);
  CHECK_THROWS_AS(LagRange({5, 5, 0, 0}).validate(), Error);
  CHECK_THROWS_AS(LagRange({1, 10, 0, 20}).validate(), Error);
  CHECK_NOTHROW(full.validate());
}

TEST_CASE("sample means match a direct loop") {
  std::vector<ReturnSeries> series{gaussian(600, 1), gaussian(450, 2)};
  const LagRange lags{2, 9, 3, 12};
  const MomentData data(series, lags);
  const double c = 0.0013;
  const Eigen::VectorXd g = data.sample_means(c);
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(lags.dimension());
  std::size_t rows = 0;
  for (const auto& s : series) {
    const std::size_t n = s.size() - 12;
    for (std::size_t t = 0; t < n; ++t) {
      const auto x = [&](std::size_t k) { return s.values[t + k] - c; };
      ref(0) += x(0);
      ref(1) += std::abs(x(0));
      ref(2) += x(0) * x(0);
      ref(3) += std::pow(std::abs(x(0)), 3);
      int i = 4;
      for (int k = 2; k <= 9; ++k) ref(i++) += x(0) * x(k) * x(k);
      for (int k = 3; k <= 12; ++k) ref(i++) += x(0) * x(0) * x(k) * x(k);
    }
    rows += n;
  }
  ref /= static_cast<double>(rows);
  CHECK(data.rows() == rows);
  CHECK(data.observations() == 1050);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    CHECK(g(i) == doctest::Approx(ref(i)).epsilon(1e-10).scale(1e-12));
  }
  // Row matrices average to the same vector.
  Eigen::VectorXd pooled = data.sample_rows(0, c).colwise().sum().transpose() +
                           data.sample_rows(1, c).colwise().sum().transpose();
  pooled /= static_cast<double>(rows);
  CHECK((pooled - g).cwiseAbs().maxCoeff() < 1e-14);

  const MomentData other = data.with_lags({1, 5, 0, 0});
  const MomentData fresh(series, {1, 5, 0, 0});
  CHECK((other.sample_means(c) - fresh.sample_means(c)).cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("detrended input is re-centred through mu") {
  ReturnSeries a = gaussian(400, 3);
  ReturnSeries b = a;
  b.mu = 0.5;
  for (double& v : b.values) v -= 0.5 * b.dt;
  const MomentData da({a}, {1, 5, 0, 0});
  const MomentData db({b}, {1, 5, 0, 0});
  CHECK((da.sample_means(0.001) - db.sample_means(0.001)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("lag versus sample size") {
  try {
    (void)MomentData({gaussian(100, 4)}, {1, 10, 0, 0});
    FAIL("lag 10 accepted on 100 points");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LagExceedsSample);
  }
  CHECK_NOTHROW(MomentData({gaussian(101, 4)}, {1, 10, 0, 0}));
  CHECK_THROWS_AS(empirical_leverage(gaussian(100, 5), 10), Error);
}

TEST_CASE("model side and a shift in y_inf") {
  const ReducedParams theta = sp500_1970_2010_estimates();
  const double dt = kDailyStep;
  const LagRange lags{1, 5, 0, 0};
  const Eigen::VectorXd m = model_moments(theta, lags, dt);
  CHECK(m(0) == 0.0);
  CHECK(m(1) == doctest::Approx(std::sqrt(2.0 * dt / M_PI) * 0.147).epsilon(1e-12));
  CHECK(m(2) == doctest::Approx(0.02706435 * dt).epsilon(1e-6));

  std::vector<ReturnSeries> series{gaussian(1000, 6)};
  ReducedParams doubled = theta;
  doubled.y_inf *= 2.0;
  const auto g0 = condition_vector(series, theta, lags);
  const auto g1 = condition_vector(series, doubled, lags);
  CHECK(g1.values(1) - g0.values(1) ==
        doctest::Approx(-std::sqrt(2.0 * dt / M_PI) * 0.095).epsilon(1e-10));
  CHECK(g1.values(0) == g0.values(0));
  CHECK(g0.labels.size() == 9);
}

TEST_CASE("empirical curves on iid Gaussian returns") {
  std::vector<ReturnSeries> series;
  for (std::uint64_t s = 0; s < 4; ++s) series.push_back(gaussian(25000, 100 + s));
  int outside = 0;
  for (int lag : {1, 5, 20, 60}) {
    const Estimate lev = empirical_leverage(series, lag);
    const Estimate acf = empirical_sq_acf(series, lag);
    CHECK(lev.standard_error > 0.0);
    CHECK(acf.standard_error > 0.0);
    outside += std::abs(lev.value) > 3.0 * lev.standard_error;
    outside += std::abs(acf.value) > 3.0 * acf.standard_error;
  }
  CHECK(outside <= 1);
  const Estimate single = empirical_sq_acf(series[0], 3);
  CHECK(std::abs(single.value) < 4.0 * single.standard_error);
  const std::string csv = empirical_curve_csv({1}, {Estimate{0.1, 0.01}});
  CHECK(csv.rfind("lag_days,lag_yr,estimate,stderr\n", 0) == 0);
}

}  // TEST_SUITE
