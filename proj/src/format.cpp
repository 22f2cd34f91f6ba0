#include "viab/format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace viab {

std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // no "-0"
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string fmt_exact(double v) {
    std::array<char, 64> buf{};
    const int len = std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data(), static_cast<std::size_t>(len));
}

}  // namespace viab
