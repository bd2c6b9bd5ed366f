#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jced {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

// Strict full-token parse; throws ParseError(where, ...) on junk.
double parse_double(std::string_view text, const std::string& where);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view s);

}  // namespace jced
