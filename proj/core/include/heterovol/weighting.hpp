#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "heterovol/correlations.hpp"
#include "heterovol/empirical.hpp"
#include "heterovol/model.hpp"

namespace heterovol {

enum class WeightingMode { Identity, Outer, NeweyWest };

struct Weighting {
  WeightingMode mode = WeightingMode::Outer;
  int lags = 0;  ///< Bartlett bandwidth q for NeweyWest

  /// "identity", "outer" or "nw:Q". InvalidArgument otherwise.
  static Weighting parse(const std::string& text);
  [[nodiscard]] std::string to_string() const;
};

/// Omega-hat from per-path condition series (rows are time, columns are
/// conditions). Outer: (1/N) sum h h^t. NeweyWest(q): Bartlett HAC,
///   Gamma_0 + sum_{j=1..q} (1 - j/(q+1)) (Gamma_j + Gamma_j^t),
/// with lags never crossing a path boundary. Always symmetric.
Eigen::MatrixXd weighting_matrix(const std::vector<Eigen::MatrixXd>& series,
                                 const Weighting& weighting);

/// Same, with h_t = sample row minus model moments at theta.
Eigen::MatrixXd weighting_matrix(const MomentData& data, const ReducedParams& theta,
                                 const Weighting& weighting,
                                 LeverageForm form = LeverageForm::Ito);

/// (Omega + ridge I)^-1 with ridge = 1e-10 trace / r, via diagonal scaling
/// and Cholesky. SingularMatrix when the factorization fails.
Eigen::MatrixXd inverse_weighting(const Eigen::MatrixXd& omega);

/// Smallest eigenvalue >= -1e-10 trace.
bool is_psd(const Eigen::MatrixXd& m);

/// Optional smooth switch-on of the ACF block: the ACF condition at lag k is
/// scaled by 1 / (1 + exp(-(k - center) / width)). Returns the diagonal
/// scaling for the whole condition vector (ones elsewhere).
Eigen::VectorXd acf_ramp(const LagRange& lags, double center, double width);

}  // namespace heterovol
