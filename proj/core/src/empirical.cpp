#include "heterovol/empirical.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "csv.hpp"
#include "heterovol/error.hpp"
#include "heterovol/moments.hpp"
#include "heterovol/parallel.hpp"

namespace heterovol {

namespace {

/// Neumaier compensated summation.
class Sum {
 public:
  void add(double v) {
    const double t = s_ + v;
    c_ += std::abs(s_) >= std::abs(v) ? (s_ - t) + v : (v - t) + s_;
    s_ = t;
  }
  [[nodiscard]] double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

bool iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9') return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

}  // namespace

PriceSeries parse_prices(const std::string& text, const std::string& source) {
  PriceSeries out;
  out.source = source;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = csv::trim(line);
    if (row.empty()) continue;
    const auto fields = csv::split(row);
    if (!header) {
      if (fields.size() != 2 || csv::trim(fields[0]) != "date" || csv::trim(fields[1]) != "close") {
        throw Error(ErrorCode::ParseError, at_line(line_no) + ": expected header 'date,close'");
      }
      header = true;
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorCode::ParseError, at_line(line_no) + ": expected 2 fields");
    }
    const std::string_view date = csv::trim(fields[0]);
    if (!iso_date(date)) {
      throw Error(ErrorCode::ParseError, at_line(line_no) + ": bad date '" + std::string(date) + "'");
    }
    double close = 0.0;
    if (!csv::parse_double(fields[1], close)) {
      throw Error(ErrorCode::ParseError, at_line(line_no) + ": bad close");
    }
    if (!std::isfinite(close)) {
      throw Error(ErrorCode::NonFiniteInput, at_line(line_no));
    }
    if (!(close > 0.0)) {
      throw Error(ErrorCode::NonPositivePrice, at_line(line_no));
    }
    out.records.push_back({std::string(date), close});
  }
  if (!header) throw Error(ErrorCode::ParseError, "empty price file");
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const PriceRecord& a, const PriceRecord& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < out.records.size(); ++i) {
    if (out.records[i].date == out.records[i - 1].date) {
      throw Error(ErrorCode::DuplicateDate, out.records[i].date);
    }
  }
  return out;
}

PriceSeries load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_prices(ss.str(), path.string());
}

ReturnSeries to_returns(const PriceSeries& prices, double mu) {
  if (prices.records.size() < 2) {
    throw Error(ErrorCode::TooFewObservations, "need at least two prices");
  }
  if (!std::isfinite(mu)) throw Error(ErrorCode::NonFiniteInput, "mu");
  ReturnSeries r;
  r.dt = kDailyStep;
  r.mu = mu;
  r.label = prices.source;
  r.values.reserve(prices.records.size() - 1);
  for (std::size_t i = 1; i < prices.records.size(); ++i) {
    r.values.push_back(std::log(prices.records[i].close) - std::log(prices.records[i - 1].close) -
                       mu * r.dt);
  }
  return r;
}

void LagRange::validate() const {
  if (L_lo < 1 || L_lo >= L_hi) {
    throw Error(ErrorCode::InvalidArgument, "leverage lags need 1 <= L_lo < L_hi");
  }
  if (K_lo == 0 && K_hi == 0) return;
  if (K_lo < 1 || K_lo >= K_hi) {
    throw Error(ErrorCode::InvalidArgument, "ACF lags need 1 <= K_lo < K_hi");
  }
}

std::vector<std::string> condition_labels(const LagRange& lags) {
  std::vector<std::string> out{"dX", "|dX|", "dX^2", "|dX|^3"};
  for (int k = lags.L_lo; k <= lags.L_hi; ++k) out.push_back("leverage lag " + std::to_string(k));
  if (lags.has_acf())
    for (int k = lags.K_lo; k <= lags.K_hi; ++k) out.push_back("acf lag " + std::to_string(k));
  return out;
}

MomentData::MomentData(std::vector<ReturnSeries> series, LagRange lags) : lags_(lags) {
  lags_.validate();
  if (series.empty()) throw Error(ErrorCode::TooFewObservations, "no return series");
  dt_ = series.front().dt;
  max_lag_ = static_cast<std::size_t>(lags_.max_lag());
  raw_.reserve(series.size());
  for (auto& s : series) {
    if (std::abs(s.dt - dt_) > 1e-15) {
      throw Error(ErrorCode::InvalidArgument, "series with different spacing");
    }
    if (10 * max_lag_ >= s.size()) {
      throw Error(ErrorCode::LagExceedsSample,
                  "lag " + std::to_string(max_lag_) + " vs " + std::to_string(s.size()) +
                      " observations");
    }
    for (double& v : s.values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "return value");
      v += s.mu * s.dt;
    }
    observations_ += s.size();
    rows_ += s.size() - max_lag_;
    raw_.push_back(std::move(s.values));
  }

  // Row moments and the sorted view.
  sorted_.reserve(rows_);
  std::array<Sum, 5> pm;
  for (const auto& r : raw_) {
    for (std::size_t t = 0; t + max_lag_ < r.size(); ++t) {
      sorted_.push_back(r[t]);
      double p = 1.0;
      for (auto& s : pm) {
        s.add(p);
        p *= r[t];
      }
    }
  }
  const double n = static_cast<double>(rows_);
  for (std::size_t a = 0; a < pm.size(); ++a) power_means_[a] = pm[a].value() / n;
  std::sort(sorted_.begin(), sorted_.end());
  prefix_.assign(rows_ + 1, {0.0, 0.0, 0.0, 0.0});
  std::array<Sum, 4> run;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double v = sorted_[i];
    run[0].add(1.0);
    run[1].add(v);
    run[2].add(v * v);
    run[3].add(v * v * v);
    for (std::size_t a = 0; a < 4; ++a) prefix_[i + 1][a] = run[a].value();
  }

  // Lagged cross means, one independent task per lag.
  lag_means_.assign(max_lag_, {});
  parallel_for(max_lag_, [&](std::size_t idx) {
    const std::size_t k = idx + 1;
    std::array<Sum, 9> acc;
    for (const auto& r : raw_) {
      for (std::size_t t = 0; t + max_lag_ < r.size(); ++t) {
        const double a1 = r[t];
        const double b1 = r[t + k];
        const double a2 = a1 * a1;
        const double b2 = b1 * b1;
        acc[1].add(b1);
        acc[2].add(b2);
        acc[3].add(a1);
        acc[4].add(a1 * b1);
        acc[5].add(a1 * b2);
        acc[6].add(a2);
        acc[7].add(a2 * b1);
        acc[8].add(a2 * b2);
      }
    }
    auto& out = lag_means_[idx];
    out[0] = 1.0;
    for (std::size_t j = 1; j < 9; ++j) out[j] = acc[j].value() / n;
  });
}

std::size_t MomentData::path_rows(std::size_t path) const { return raw_.at(path).size() - max_lag_; }

MomentData MomentData::with_lags(const LagRange& lags) const {
  std::vector<ReturnSeries> series(raw_.size());
  for (std::size_t p = 0; p < raw_.size(); ++p) {
    series[p].values = raw_[p];
    series[p].dt = dt_;
    series[p].mu = 0.0;
  }
  return MomentData(std::move(series), lags);
}

Eigen::VectorXd MomentData::sample_means(double c) const {
  Eigen::VectorXd g(lags_.dimension());
  const auto& M = power_means_;
  const double n = static_cast<double>(rows_);
  g(0) = M[1] - c;
  g(2) = M[2] - 2.0 * c * M[1] + c * c;

  // Split the sorted rows at c; below it |x| = c - r.
  const auto split = static_cast<std::size_t>(
      std::lower_bound(sorted_.begin(), sorted_.end(), c) - sorted_.begin());
  const auto& lo = prefix_[split];
  const auto& all = prefix_[rows_];
  auto centred1 = [c](double s0, double s1) { return s1 - c * s0; };
  auto centred3 = [c](double s0, double s1, double s2, double s3) {
    return s3 - 3.0 * c * s2 + 3.0 * c * c * s1 - c * c * c * s0;
  };
  const double up1 = centred1(all[0] - lo[0], all[1] - lo[1]);
  const double dn1 = centred1(lo[0], lo[1]);
  const double up3 = centred3(all[0] - lo[0], all[1] - lo[1], all[2] - lo[2], all[3] - lo[3]);
  const double dn3 = centred3(lo[0], lo[1], lo[2], lo[3]);
  g(1) = (up1 - dn1) / n;
  g(3) = (up3 - dn3) / n;

  auto S = [this](int k, int a, int b) {
    return lag_means_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(a * 3 + b)];
  };
  Eigen::Index i = 4;
  for (int k = lags_.L_lo; k <= lags_.L_hi; ++k, ++i) {
    g(i) = S(k, 1, 2) - 2.0 * c * S(k, 1, 1) + c * c * S(k, 1, 0) - c * S(k, 0, 2) +
           2.0 * c * c * S(k, 0, 1) - c * c * c;
  }
  if (lags_.has_acf()) {
    static constexpr std::array<double, 3> kBinom{1.0, 2.0, 1.0};
    std::array<double, 5> mc{1.0, -c, c * c, -c * c * c, c * c * c * c};  // (-c)^j
    for (int k = lags_.K_lo; k <= lags_.K_hi; ++k, ++i) {
      double v = 0.0;
      for (int a = 0; a <= 2; ++a)
        for (int b = 0; b <= 2; ++b)
          v += kBinom[static_cast<std::size_t>(a)] * kBinom[static_cast<std::size_t>(b)] *
               mc[static_cast<std::size_t>(4 - a - b)] * S(k, a, b);
      g(i) = v;
    }
  }
  return g;
}

Eigen::MatrixXd MomentData::sample_rows(std::size_t path, double c) const {
  const auto& r = raw_.at(path);
  const std::size_t n = path_rows(path);
  Eigen::MatrixXd H(static_cast<Eigen::Index>(n), lags_.dimension());
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    const double x = r[t] - c;
    const double x2 = x * x;
    H(row, 0) = x;
    H(row, 1) = std::abs(x);
    H(row, 2) = x2;
    H(row, 3) = std::abs(x) * x2;
    Eigen::Index i = 4;
    for (int k = lags_.L_lo; k <= lags_.L_hi; ++k, ++i) {
      const double y = r[t + static_cast<std::size_t>(k)] - c;
      H(row, i) = x * y * y;
    }
    if (lags_.has_acf()) {
      for (int k = lags_.K_lo; k <= lags_.K_hi; ++k, ++i) {
        const double y = r[t + static_cast<std::size_t>(k)] - c;
        H(row, i) = x2 * y * y;
      }
    }
  }
  return H;
}

Eigen::VectorXd model_moments(const ReducedParams& theta, const LagRange& lags, double dt,
                              LeverageForm form) {
  const FullParams p = expand(theta);
  Eigen::VectorXd m(lags.dimension());
  const double pi = std::numbers::pi;
  m(0) = 0.0;
  m(1) = std::sqrt(2.0 * dt / pi) * factor_sum_moment(1, p);
  m(2) = dt * factor_sum_moment(2, p);
  m(3) = std::sqrt(8.0 * dt * dt * dt / pi) * factor_sum_moment(3, p);
  const ExpSum num = leverage_numerator(p, form);
  Eigen::Index i = 4;
  for (int k = lags.L_lo; k <= lags.L_hi; ++k, ++i) m(i) = dt * dt * num(k * dt);
  if (lags.has_acf()) {
    const ExpSum cov = sq_return_cov_expansion(p);
    for (int k = lags.K_lo; k <= lags.K_hi; ++k, ++i) m(i) = dt * dt * cov(k * dt);
  }
  return m;
}

ConditionVector condition_vector(const MomentData& data, const ReducedParams& theta,
                                 LeverageForm form) {
  ConditionVector out;
  out.values = data.sample_means(theta.mu * data.dt()) -
               model_moments(theta, data.lags(), data.dt(), form);
  out.labels = condition_labels(data.lags());
  return out;
}

ConditionVector condition_vector(const std::vector<ReturnSeries>& returns,
                                 const ReducedParams& theta, const LagRange& lags,
                                 LeverageForm form) {
  return condition_vector(MomentData(returns, lags), theta, form);
}

namespace {

constexpr std::size_t kBatches = 20;

struct LagSums {
  Sum x2, x4, cross_lev, cross_acf;
  std::size_t n_obs = 0;
  std::size_t n_pairs = 0;
};

/// Contributions of observations [lo, hi) of one series; pairs start in the range.
void accumulate(const std::vector<double>& x, std::size_t lo, std::size_t hi, std::size_t lag,
                LagSums& s) {
  for (std::size_t t = lo; t < hi; ++t) {
    const double v2 = x[t] * x[t];
    s.x2.add(v2);
    s.x4.add(v2 * v2);
    ++s.n_obs;
    if (t + lag < x.size()) {
      const double w2 = x[t + lag] * x[t + lag];
      s.cross_lev.add(x[t] * w2);
      s.cross_acf.add(v2 * w2);
      ++s.n_pairs;
    }
  }
}

double leverage_of(const LagSums& s) {
  const double m2 = s.x2.value() / static_cast<double>(s.n_obs);
  return s.cross_lev.value() / static_cast<double>(s.n_pairs) / (m2 * m2);
}

double acf_of(const LagSums& s) {
  const double m2 = s.x2.value() / static_cast<double>(s.n_obs);
  const double m4 = s.x4.value() / static_cast<double>(s.n_obs);
  return (s.cross_acf.value() / static_cast<double>(s.n_pairs) - m2 * m2) / (m4 - m2 * m2);
}

Estimate batch_estimate(const std::vector<ReturnSeries>& returns, int lag_days,
                        double (*statistic)(const LagSums&)) {
  if (returns.empty()) throw Error(ErrorCode::TooFewObservations, "no return series");
  if (lag_days < 1) throw Error(ErrorCode::InvalidArgument, "lag must be >= 1");
  const auto lag = static_cast<std::size_t>(lag_days);
  std::size_t total = 0;
  for (const auto& r : returns) {
    if (r.size() <= lag) {
      throw Error(ErrorCode::LagExceedsSample, "series shorter than the lag");
    }
    total += r.size();
  }
  if (10 * lag >= total) {
    throw Error(ErrorCode::LagExceedsSample, "lag must be below T/10");
  }

  LagSums all;
  std::array<LagSums, kBatches> batch;
  const bool by_series = returns.size() >= kBatches;
  for (std::size_t p = 0; p < returns.size(); ++p) {
    const auto& x = returns[p].values;
    if (by_series) {
      const std::size_t b = p * kBatches / returns.size();
      accumulate(x, 0, x.size(), lag, batch[b]);
    } else {
      for (std::size_t b = 0; b < kBatches; ++b) {
        accumulate(x, x.size() * b / kBatches, x.size() * (b + 1) / kBatches, lag, batch[b]);
      }
    }
    accumulate(x, 0, x.size(), lag, all);
  }
  std::array<double, kBatches> v{};
  double mean = 0.0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    v[b] = statistic(batch[b]);
    mean += v[b] / kBatches;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (kBatches - 1) / kBatches);
  return {statistic(all), se};
}

}  // namespace

Estimate empirical_leverage(const std::vector<ReturnSeries>& returns, int lag_days) {
  return batch_estimate(returns, lag_days, leverage_of);
}

Estimate empirical_leverage(const ReturnSeries& returns, int lag_days) {
  return empirical_leverage(std::vector<ReturnSeries>{returns}, lag_days);
}

Estimate empirical_sq_acf(const std::vector<ReturnSeries>& returns, int lag_days) {
  return batch_estimate(returns, lag_days, acf_of);
}

Estimate empirical_sq_acf(const ReturnSeries& returns, int lag_days) {
  return empirical_sq_acf(std::vector<ReturnSeries>{returns}, lag_days);
}

std::string empirical_curve_csv(const std::vector<int>& lags, const std::vector<Estimate>& values) {
  std::string out = "lag_days,lag_yr,estimate,stderr\n";
  for (std::size_t i = 0; i < lags.size() && i < values.size(); ++i) {
    out += std::to_string(lags[i]);
    out += ',';
    out += csv::format_double(lags[i] * kDailyStep);
    out += ',';
    out += csv::format_double(values[i].value);
    out += ',';
    out += csv::format_double(values[i].standard_error);
    out += '\n';
  }
  return out;
}

}  // namespace heterovol
