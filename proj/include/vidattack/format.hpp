#pragma once

#include <string>

namespace vidattack {

/// Shortest round-trip decimal rendering of a double; identical bytes on every
/// run, so reports and CSVs can be compared byte-for-byte.
std::string format_double(double value);

}  // namespace vidattack
