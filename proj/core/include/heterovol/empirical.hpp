#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "heterovol/correlations.hpp"
#include "heterovol/model.hpp"
#include "heterovol/series.hpp"

namespace heterovol {

struct PriceRecord {
  std::string date;  ///< ISO 8601, YYYY-MM-DD
  double close;
};

struct PriceSeries {
  std::vector<PriceRecord> records;  ///< strictly increasing dates
  std::string source;
};

/// Reads a "date,close" CSV (header required, extra columns are not
/// allowed). Rows may come in any order; the result is sorted by date.
/// Throws ParseError (with the 1-based line), NonPositivePrice, DuplicateDate.
PriceSeries load_prices(const std::filesystem::path& path);
PriceSeries parse_prices(const std::string& text, const std::string& source = "");

/// dX_t = ln S_{t+1} - ln S_t - mu dt with dt = 1/250 yr. TooFewObservations
/// below two prices.
ReturnSeries to_returns(const PriceSeries& prices, double mu);

/// Leverage lags [L_lo, L_hi] and ACF lags [K_lo, K_hi], in trading days.
/// An ACF range with K_lo = K_hi = 0 means "no ACF conditions".
struct LagRange {
  int L_lo = 1;
  int L_hi = 250;
  int K_lo = 0;
  int K_hi = 0;

  [[nodiscard]] bool has_acf() const noexcept { return K_hi > 0; }
  [[nodiscard]] int n_leverage() const noexcept { return L_hi - L_lo + 1; }
  [[nodiscard]] int n_acf() const noexcept { return has_acf() ? K_hi - K_lo + 1 : 0; }
  /// 4 + (L_hi - L_lo + 1) + (K_hi - K_lo + 1).
  [[nodiscard]] int dimension() const noexcept { return 4 + n_leverage() + n_acf(); }
  [[nodiscard]] int max_lag() const noexcept { return std::max(L_hi, K_hi); }
  /// InvalidArgument unless 1 <= L_lo < L_hi and (no ACF or 1 <= K_lo < K_hi).
  void validate() const;
};

struct ConditionVector {
  Eigen::VectorXd values;
  std::vector<std::string> labels;
};

/// Sample-side sufficient statistics for the condition vector. Rows are the
/// first T_p - max_lag observations of each path, shared by every condition,
/// so the per-row series is rectangular. The drift enters through
/// c = mu dt only, so everything is stored for the un-detrended returns and
/// re-centred per evaluation.
class MomentData {
 public:
  /// LagExceedsSample if max_lag >= T_p / 10 for any path.
  MomentData(std::vector<ReturnSeries> series, LagRange lags);

  [[nodiscard]] const LagRange& lags() const noexcept { return lags_; }
  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  /// Total observations (sum of path lengths).
  [[nodiscard]] std::size_t observations() const noexcept { return observations_; }
  [[nodiscard]] const std::vector<std::vector<double>>& raw() const noexcept { return raw_; }

  /// Sample means of the per-row conditions at drift c (per step).
  [[nodiscard]] Eigen::VectorXd sample_means(double c) const;
  /// Per-row sample terms for path p at drift c: rows x r, without the
  /// model side subtracted.
  [[nodiscard]] Eigen::MatrixXd sample_rows(std::size_t path, double c) const;
  [[nodiscard]] std::size_t path_rows(std::size_t path) const;

  /// Same data, different lag set (statistics are recomputed).
  [[nodiscard]] MomentData with_lags(const LagRange& lags) const;

 private:
  std::vector<std::vector<double>> raw_;  ///< un-detrended returns per path
  LagRange lags_;
  double dt_;
  std::size_t rows_ = 0;
  std::size_t observations_ = 0;
  std::size_t max_lag_ = 0;
  // Sorted row values with prefix sums of r^0..r^3 for the |x| terms.
  std::vector<double> sorted_;
  std::vector<std::array<double, 4>> prefix_;
  std::array<double, 5> power_means_{};  ///< mean r^a, a = 0..4
  // Per lag k = 1..max_lag: mean r_t^a r_{t+k}^b for a, b in 0..2.
  std::vector<std::array<double, 9>> lag_means_;
};

/// Model side of every condition at theta:
///   0, sqrt(2 dt/pi) <Y+Z>, dt <(Y+Z)^2>, sqrt(8 dt^3/pi) <(Y+Z)^3>,
///   dt^2 N(k dt) for leverage lags, dt^2 Cov(k dt) for ACF lags,
/// with N the leverage numerator and Cov the squared-return covariance.
Eigen::VectorXd model_moments(const ReducedParams& theta, const LagRange& lags, double dt,
                              LeverageForm form = LeverageForm::Ito);

/// Averaged conditions h-bar(theta): sample minus model.
ConditionVector condition_vector(const MomentData& data, const ReducedParams& theta,
                                 LeverageForm form = LeverageForm::Ito);
ConditionVector condition_vector(const std::vector<ReturnSeries>& returns,
                                 const ReducedParams& theta, const LagRange& lags,
                                 LeverageForm form = LeverageForm::Ito);
std::vector<std::string> condition_labels(const LagRange& lags);

struct Estimate {
  double value;
  double standard_error;
};

/// mean(x_t x_{t+k}^2) / mean(x^2)^2, pooled over all series (each series is
/// assumed stationary; pairs never straddle two series). Standard errors by
/// 20 batch means: contiguous time blocks for one series, groups of series
/// otherwise. LagExceedsSample unless lag < T/10 (T pooled) and every series
/// is longer than the lag.
Estimate empirical_leverage(const std::vector<ReturnSeries>& returns, int lag_days);
Estimate empirical_leverage(const ReturnSeries& returns, int lag_days);

/// (mean(x_t^2 x_{t+k}^2) - mean(x^2)^2) / (mean(x^4) - mean(x^2)^2).
Estimate empirical_sq_acf(const std::vector<ReturnSeries>& returns, int lag_days);
Estimate empirical_sq_acf(const ReturnSeries& returns, int lag_days);

/// "lag_days,lag_yr,estimate,stderr" CSV.
std::string empirical_curve_csv(const std::vector<int>& lags, const std::vector<Estimate>& values);

}  // namespace heterovol
