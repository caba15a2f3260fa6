#pragma once

#include <string>

namespace dsa {

// Shortest decimal that round-trips to the same double. Infinities print as
// "inf"/"-inf", NaN as "nan".
std::string format_double(double value);

}  // namespace dsa
