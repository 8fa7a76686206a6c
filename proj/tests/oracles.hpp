#ifndef DFD_TESTS_ORACLES_HPP
#define DFD_TESTS_ORACLES_HPP

// Reference values computed without std::erf: long-double Taylor series for
// small arguments, continued fraction for the tail.

#include <cmath>
#include <numbers>

namespace oracle {

using ld = long double;

inline constexpr ld kPi = 3.141592653589793238462643383279502884L;
inline constexpr ld kSqrt2 = 1.414213562373095048801688724209698079L;

/// erf(x) = 2/sqrt(pi) * sum_n (-1)^n x^(2n+1) / (n! (2n+1))
inline ld erf_taylor(ld x) {
  ld term = x;  // (-1)^n x^(2n+1) / n!
  ld sum = x;
  for (int n = 1; n < 400; ++n) {
    term *= -x * x / n;
    const ld add = term / (2 * n + 1);
    sum += add;
    if (n >= 30 && std::fabs(add) < 1e-24L * std::fabs(sum)) break;
  }
  return 2.0L / std::sqrt(kPi) * sum;
}

/// erfc(x) for x > 0 from its continued fraction
///   erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
/// evaluated bottom-up.
inline ld erfc_cf(ld x) {
  ld f = x;
  for (int k = 300; k >= 1; --k) f = x + (k / 2.0L) / f;
  return std::exp(-x * x) / std::sqrt(kPi) / f;
}

inline ld erf(ld x) {
  if (x < 0) return -erf(-x);
  if (x < 3.0L) return erf_taylor(x);
  return 1.0L - erfc_cf(x);
}

inline ld phi(ld t) { return 0.5L * (1.0L + erf(t / kSqrt2)); }

inline ld rg(ld s, ld s1) { return std::sqrt((s * s + s1 * s1) / (s * s)); }

inline ld rgd(ld s, ld s1) {
  return erf(1.0L / (kSqrt2 * s)) / erf(1.0L / std::sqrt(2.0L * (s * s + s1 * s1)));
}

inline ld mgd(ld s) { return erf(std::sqrt(2.0L) / s) / erf(1.0L / (kSqrt2 * s)); }

inline ld erg(ld s, ld s1) {
  const ld r = rgd(s, s1);
  return std::fabs((s1 / s) / std::sqrt(r * r - 1.0L) - 1.0L);
}

/// Maximum of rgd(., s1) on [a, b] by golden-section search (unimodal there).
inline ld rgd_peak(ld s1, ld a = 0.05L, ld b = 2.0L) {
  const ld g = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  ld c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (rgd(c, s1) > rgd(d, s1)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return (a + b) / 2.0L;
}

}  // namespace oracle

#endif  // DFD_TESTS_ORACLES_HPP
