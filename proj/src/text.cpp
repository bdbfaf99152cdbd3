#include "robust_thresh/text.hpp"

#include <charconv>

#include "robust_thresh/errors.hpp"

namespace rthresh {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
    return v;
}

}  // namespace rthresh
