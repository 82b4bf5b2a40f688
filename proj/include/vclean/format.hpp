#pragma once

#include <string>
#include <string_view>

namespace vclean {

// Shortest decimal form that parses back to the same double (std::to_chars).
std::string format_double(double value);

// Strict double parse of the whole (whitespace-trimmed) field.
// Throws DataError on malformed input.
double parse_double(std::string_view text);

// Strict integer parse, same contract.
long long parse_int(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace vclean
