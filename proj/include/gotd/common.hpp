// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace gotd {

/// Invalid user input: bad dimensions, malformed files, inconsistent configs.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failure at runtime: singular systems, non-invertible element maps,
/// NaN propagation, guard violations.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

#define GOTD_CHECK(cond, msg)                    \
  do {                                           \
    if (!(cond)) throw ::gotd::ConfigError(msg); \
  } while (0)

#define GOTD_CHECK_NUMERIC(cond, msg)             \
  do {                                            \
    if (!(cond)) throw ::gotd::NumericError(msg); \
  } while (0)

/// Deterministic random stream. The engine is the standard mt19937_64 (its
/// output sequence is pinned by the C++ standard); the uniform/normal
/// transforms are spelled out here instead of going through the library
/// distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so the log is finite.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gotd
