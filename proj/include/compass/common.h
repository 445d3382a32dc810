#ifndef COMPASS_COMMON_H_
#define COMPASS_COMMON_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace compass {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into [0, 2*pi).
inline double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number can round up to exactly 2*pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// Wraps an angle difference into [-pi, pi).
inline double wrap_to_pi(double a) {
  double r = normalize_angle(a + kPi) - kPi;
  return r;
}

inline int positive_mod(int a, int n) {
  int r = a % n;
  return r < 0 ? r + n : r;
}

// Errors raised by the library. Precondition violations on arguments use
// std::invalid_argument; these cover runtime conditions callers may want to
// distinguish.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyResultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// SplitMix64 step; used to derive independent seeds from a master seed.
inline uint64_t split_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace compass

#endif  // COMPASS_COMMON_H_
