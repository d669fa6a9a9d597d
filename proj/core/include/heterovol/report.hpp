#pragma once

#include <string>

#include "heterovol/gmm.hpp"

namespace heterovol {

/// Calibration report as JSON: theta, sigma, rho matrix and the derived
/// block, laid out like the published estimate table, plus stage details and
/// the unit conventions (mu in yr^-1 with the per-day value alongside, lags
/// in trading days).
std::string report_json(const GmmReport& report);

/// Fixed-width text table of the same content.
std::string report_text(const GmmReport& report);

}  // namespace heterovol
