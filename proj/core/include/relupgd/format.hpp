#pragma once

#include <string>

namespace relupgd {

/// Shortest decimal string that round-trips to the same double ("inf", "-inf", "nan" otherwise).
std::string format_double(double value);

}  // namespace relupgd
