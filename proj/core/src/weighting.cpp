#include "heterovol/weighting.hpp"

#include <charconv>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "heterovol/error.hpp"
#include "heterovol/parallel.hpp"

namespace heterovol {

Weighting Weighting::parse(const std::string& text) {
  if (text == "identity") return {WeightingMode::Identity, 0};
  if (text == "outer") return {WeightingMode::Outer, 0};
  if (text.rfind("nw:", 0) == 0) {
    int q = -1;
    const char* first = text.data() + 3;
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, q);
    if (ec == std::errc() && ptr == last && q >= 0) return {WeightingMode::NeweyWest, q};
  }
  throw Error(ErrorCode::InvalidArgument, "weighting must be identity, outer or nw:Q, got '" + text + "'");
}

std::string Weighting::to_string() const {
  switch (mode) {
    case WeightingMode::Identity:
      return "identity";
    case WeightingMode::Outer:
      return "outer";
    case WeightingMode::NeweyWest:
      return "nw:" + std::to_string(lags);
  }
  return "outer";
}

namespace {

/// sum over rows of G^t G, where for Newey-West G holds the zero-padded
/// moving sums of q+1 consecutive rows. Every pair (t, t+j) with j <= q sits
/// in exactly q+1-j windows, so G^t G / (q+1) is the Bartlett sum.
Eigen::MatrixXd path_gram(const Eigen::MatrixXd& h, int q) {
  const Eigen::Index r = h.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, r);
  if (q == 0) {
    out.selfadjointView<Eigen::Lower>().rankUpdate(h.transpose());
  } else {
    const Eigen::Index n = h.rows();
    const Eigen::Index w = q + 1;
    Eigen::MatrixXd g(n + q, r);
    Eigen::RowVectorXd run = Eigen::RowVectorXd::Zero(r);
    for (Eigen::Index s = 0; s < n + q; ++s) {
      // Window [s - q, s] clipped to [0, n).
      if (s < n) run += h.row(s);
      if (s - w >= 0) run -= h.row(s - w);
      g.row(s) = run;
    }
    out.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose(), 1.0 / static_cast<double>(w));
  }
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

}  // namespace

Eigen::MatrixXd weighting_matrix(const std::vector<Eigen::MatrixXd>& series,
                                 const Weighting& weighting) {
  if (series.empty()) throw Error(ErrorCode::TooFewObservations, "no condition rows");
  const Eigen::Index r = series.front().cols();
  if (weighting.mode == WeightingMode::Identity) return Eigen::MatrixXd::Identity(r, r);
  const int q = weighting.mode == WeightingMode::NeweyWest ? weighting.lags : 0;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(r, r);
  Eigen::Index n = 0;
  for (const auto& h : series) {
    if (h.cols() != r) throw Error(ErrorCode::InvalidArgument, "ragged condition series");
    sum += path_gram(h, q);
    n += h.rows();
  }
  if (n == 0) throw Error(ErrorCode::TooFewObservations, "no condition rows");
  sum /= static_cast<double>(n);
  return 0.5 * (sum + sum.transpose());
}

Eigen::MatrixXd weighting_matrix(const MomentData& data, const ReducedParams& theta,
                                 const Weighting& weighting, LeverageForm form) {
  const auto r = static_cast<Eigen::Index>(data.lags().dimension());
  if (weighting.mode == WeightingMode::Identity) return Eigen::MatrixXd::Identity(r, r);
  const int q = weighting.mode == WeightingMode::NeweyWest ? weighting.lags : 0;
  const Eigen::RowVectorXd model = model_moments(theta, data.lags(), data.dt(), form).transpose();
  const double c = theta.mu * data.dt();

  // One gram per path, summed in path order so the thread count is irrelevant.
  const std::size_t paths = data.raw().size();
  std::vector<Eigen::MatrixXd> grams(paths);
  parallel_for(paths, [&](std::size_t p) {
    Eigen::MatrixXd h = data.sample_rows(p, c);
    h.rowwise() -= model;
    grams[p] = path_gram(h, q);
  });
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(r, r);
  for (const auto& g : grams) sum += g;
  sum /= static_cast<double>(data.rows());
  return 0.5 * (sum + sum.transpose());
}

Eigen::MatrixXd inverse_weighting(const Eigen::MatrixXd& omega) {
  const Eigen::Index r = omega.rows();
  if (r == 0 || omega.cols() != r) throw Error(ErrorCode::InvalidArgument, "weighting must be square");
  if (!omega.allFinite()) throw Error(ErrorCode::SingularMatrix, "non-finite weighting matrix");
  const double ridge = 1e-10 * omega.trace() / static_cast<double>(r);
  Eigen::MatrixXd m = 0.5 * (omega + omega.transpose());
  m.diagonal().array() += ridge;
  // Conditions live on very different scales; equilibrate before factoring.
  const Eigen::ArrayXd d = m.diagonal().array();
  if ((d <= 0.0).any()) throw Error(ErrorCode::SingularMatrix, "non-positive diagonal");
  const Eigen::VectorXd s = d.rsqrt().matrix();
  const Eigen::MatrixXd scaled = s.asDiagonal() * m * s.asDiagonal();
  const Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularMatrix, "Cholesky of weighting failed");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(r, r));
  inv = s.asDiagonal() * inv * s.asDiagonal();
  if (!inv.allFinite()) throw Error(ErrorCode::SingularMatrix, "weighting inverse not finite");
  return 0.5 * (inv + inv.transpose());
}

bool is_psd(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return true;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()),
                                                          Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -1e-10 * std::abs(m.trace());
}

Eigen::VectorXd acf_ramp(const LagRange& lags, double center, double width) {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "ramp width must be positive");
  Eigen::VectorXd s = Eigen::VectorXd::Ones(lags.dimension());
  if (!lags.has_acf()) return s;
  Eigen::Index i = 4 + lags.n_leverage();
  for (int k = lags.K_lo; k <= lags.K_hi; ++k, ++i) s(i) = 1.0 / (1.0 + std::exp(-(k - center) / width));
  return s;
}

}  // namespace heterovol
