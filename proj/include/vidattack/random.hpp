#pragma once

#include <cstdint>
#include <random>

namespace vidattack {

__extension__ typedef unsigned __int128 uint128;

/// Seeded integer stream used everywhere reproducibility matters.
///
/// Raw values come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard (the 10000th draw from a default-seeded engine is
/// 9981545732273789042). Range reduction is done here with Lemire's
/// multiply-shift rather than a std:: distribution, because distribution
/// algorithms are implementation-defined and would break golden files across
/// standard libraries.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n); n == 0 yields 0.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    return static_cast<std::uint64_t>((static_cast<uint128>(engine_()) * n) >> 64);
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vidattack
