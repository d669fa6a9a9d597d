#pragma once

#include <functional>

#include <Eigen/Core>

namespace heterovol {

struct NelderMeadOptions {
  int max_evaluations = 4000;
  double f_tolerance = 1e-10;  ///< relative spread of simplex values
  double x_tolerance = 1e-8;   ///< simplex diameter
  double initial_step = 0.1;   ///< per-coordinate edge length
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value;
  int evaluations;
  bool converged;
};

/// Adaptive Nelder-Mead (Gao-Han coefficients). Non-finite objective values
/// are treated as +infinity, so infeasible points are simply rejected.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& options = {});

}  // namespace heterovol
