#pragma once

// Small CSV helpers shared by the exporters. Internal to the library.

#include <string>
#include <string_view>
#include <vector>

namespace heterovol::csv {

/// Shortest round-trip decimal form (std::to_chars), locale independent.
std::string format_double(double value);

/// Splits one line on commas. No quoting support; the inputs are numeric.
std::vector<std::string_view> split(std::string_view line);

std::string_view trim(std::string_view s);

/// Strict full-field parse; false on trailing garbage or an empty field.
bool parse_double(std::string_view field, double& out);

}  // namespace heterovol::csv
