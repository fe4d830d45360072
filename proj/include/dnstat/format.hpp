#pragma once

#include <string>

namespace dnstat {

/// Shortest round-trip decimal form of a double; identical on every platform
/// with a conforming std::to_chars.
std::string format_double(double value);

}  // namespace dnstat
