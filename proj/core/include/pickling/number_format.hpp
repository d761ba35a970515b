#pragma once

#include <string>
#include <string_view>

namespace pickling {

// Shortest decimal text that parses back to exactly `x`.
std::string format_number(double x);

// Strict full-string decimal parse. Returns false on any trailing garbage.
bool parse_number(std::string_view text, double& out);

}  // namespace pickling
