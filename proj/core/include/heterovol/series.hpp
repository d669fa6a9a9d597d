#pragma once

#include <string>
#include <vector>

#include "heterovol/model.hpp"

namespace heterovol {

/// Detrended log-returns at a fixed spacing.
struct ReturnSeries {
  std::vector<double> values;
  double dt = kDailyStep;  ///< yr
  double mu = 0.0;         ///< drift removed, yr^-1
  std::string label;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

}  // namespace heterovol
