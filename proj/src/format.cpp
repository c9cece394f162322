#include "vidattack/format.hpp"

#include <charconv>
#include <cmath>

namespace vidattack {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  // whole numbers print as integers ("100000", not "1e+05")
  if (std::abs(value) < 1e15 && std::trunc(value) == value) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(value));
    return std::string(buf, ptr);
  }
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace vidattack
