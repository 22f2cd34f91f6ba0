#pragma once

#include <string>

namespace viab {

/// Shortest decimal that round-trips to the same double.
std::string fmt_num(double v);

/// Decimal with 17 significant digits (config serialization).
std::string fmt_exact(double v);

}  // namespace viab
