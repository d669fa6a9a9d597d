#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "heterovol/model.hpp"

namespace heterovol {

using AnyParams = std::variant<FullParams, ReducedParams>;

/// Parses a parameter document. A document carrying "nu" is a ReducedParams;
/// otherwise every FullParams field except "t0" is required, and a missing
/// or null "t0" means the stationary regime. Unknown keys are rejected with
/// ParseError. The result is validated.
AnyParams parse_params(const std::string& json_text);
AnyParams load_params(const std::filesystem::path& path);

/// Either form as a FullParams (reduced documents go through expand()).
FullParams load_full_params(const std::filesystem::path& path);

std::string to_json(const FullParams& params);
std::string to_json(const ReducedParams& params);

}  // namespace heterovol
