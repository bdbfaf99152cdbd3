#pragma once

#include <string>
#include <string_view>

namespace rthresh {

// Shortest decimal that round-trips to the same double.
std::string shortest(double v);
// Parses a complete double; throws ConfigError naming `what` otherwise.
double parse_double(std::string_view s, std::string_view what);

}  // namespace rthresh
