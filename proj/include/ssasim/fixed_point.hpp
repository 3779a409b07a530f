#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ssasim {

/// Rounds to the nearest integer, ties away from zero.
/// This is the rounding used everywhere integers are produced from reals:
/// quantization, shift rescaling, fixed-point narrowing.
inline std::int64_t fx_round_to_int(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("fx_round_to_int: non-finite input");
  }
  return std::llround(x);  // llround rounds halfway cases away from zero
}

/// v * 2^-k on integers, round half away from zero. k must be >= 0.
inline std::int64_t shift_round(std::int64_t v, int k) {
  if (k < 0) throw std::invalid_argument("shift_round: negative shift");
  if (k == 0) return v;
  const std::int64_t half = std::int64_t{1} << (k - 1);
  if (v >= 0) return (v + half) >> k;
  return -((-v + half) >> k);
}

/// Clamp to the symmetric range [-mag, mag].
inline std::int64_t saturate(std::int64_t v, std::int64_t mag) {
  if (v > mag) return mag;
  if (v < -mag) return -mag;
  return v;
}

/// Signed fixed-point value raw * 2^-frac_bits. Arithmetic between two
/// FixedPoint values requires equal frac_bits; alignment is always explicit.
struct FixedPoint {
  std::int64_t raw{0};
  int frac_bits{0};

  FixedPoint() = default;
  FixedPoint(std::int64_t r, int f) : raw(r), frac_bits(f) {
    if (f < 0) throw std::invalid_argument("FixedPoint: negative frac_bits");
  }

  double value() const { return std::ldexp(static_cast<double>(raw), -frac_bits); }

  FixedPoint operator+(const FixedPoint& o) const {
    require_aligned(o);
    return FixedPoint(raw + o.raw, frac_bits);
  }
  FixedPoint operator-(const FixedPoint& o) const {
    require_aligned(o);
    return FixedPoint(raw - o.raw, frac_bits);
  }
  bool operator==(const FixedPoint& o) const {
    return raw == o.raw && frac_bits == o.frac_bits;
  }

  /// Integer part per the fx rounding rule (drops frac_bits).
  std::int64_t to_int() const { return shift_round(raw, frac_bits); }

  void require_aligned(const FixedPoint& o) const {
    if (frac_bits != o.frac_bits) {
      throw std::invalid_argument("FixedPoint: mismatched frac_bits");
    }
  }
};

}  // namespace ssasim
