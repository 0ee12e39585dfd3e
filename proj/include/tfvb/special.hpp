#pragma once

#include "tfvb/error.hpp"

#include <cmath>
#include <concepts>
#include <limits>
#include <string>

namespace tfvb {

/// Digamma function for x > 0.
///
/// Shifts x upward with psi(x) = psi(x + 1) - 1/x until x >= 10 (16 for
/// types wider than double), then sums the asymptotic expansion through the
/// x^-14 Bernoulli term. Truncation error is below 5e-17 (3e-20), so accuracy
/// is limited by T: long double stays within 1e-12 absolute down to x = 1e-6,
/// where |psi| ~ 1e6.
template <std::floating_point T>
T digamma(T x) {
  if (!(x > T(0)) || !std::isfinite(x))
    throw Error(Errc::DomainError, "digamma requires a finite positive argument");
  constexpr T lower = std::numeric_limits<T>::digits > 53 ? T(16) : T(10);
  T shift = 0;
  while (x < lower) {
    shift -= T(1) / x;
    x += T(1);
  }
  const T inv = T(1) / x;
  const T inv2 = inv * inv;
  // Horner form of 1/12 - 1/120 t + 1/252 t^2 - 1/240 t^3 + 1/132 t^4
  //                - 691/32760 t^5 + 1/12 t^6, with t = 1/x^2.
  const T series =
      T(1) / T(12) +
           inv2 * (T(-1) / T(120) +
                   inv2 * (T(1) / T(252) +
                           inv2 * (T(-1) / T(240) +
                                   inv2 * (T(1) / T(132) +
                                           inv2 * (T(-691) / T(32760) +
                                                   inv2 * (T(1) / T(12)))))));
  return shift + std::log(x) - T(0.5) * inv - inv2 * series;
}

/// KL(Gamma(shape c, scale d) || Gamma(shape a, scale s)).
inline double gamma_kl(double c, double d, double a, double s) {
  return (c - a) * digamma(c) - std::lgamma(c) + std::lgamma(a) + a * (std::log(s) - std::log(d)) +
         c * (d - s) / s;
}

}  // namespace tfvb
