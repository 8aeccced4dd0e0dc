#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace specnet {

/// Shortest decimal string that parses back to exactly `value`.
/// Locale independent; "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double value);

/// Strict locale-independent parse of the whole string. Returns false on
/// trailing garbage or an empty field.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

std::string_view trim(std::string_view text);

}  // namespace specnet
