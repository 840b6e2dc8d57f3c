// SPDX-License-Identifier: Apache-2.0
//
// Test-only helpers: an independent erfc evaluation, a tiny deterministic
// RNG, and toy scene documents shared by the suites.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace owc::testutil {

// Complementary error function in long double, written independently of
// std::erfc: Taylor series below x = 2, Lentz continued fraction above.
inline long double erfc_oracle(long double x) {
  if (x < 0.0L) return 2.0L - erfc_oracle(-x);
  if (x == 0.0L) return 1.0L;
  const long double sqrt_pi = 1.77245385090551602729816748334L;
  if (x < 2.0L) {
    // erf(x) = (2/sqrt(pi)) sum (-1)^k x^(2k+1) / (k! (2k+1))
    long double term = x;
    long double sum = x;
    for (int k = 1; k < 200; ++k) {
      term *= -x * x / k;
      const long double add = term / (2 * k + 1);
      sum += add;
      if (std::abs(add) < 1e-25L * std::abs(sum)) break;
    }
    return 1.0L - 2.0L / sqrt_pi * sum;
  }
  // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + (2/2)/(x + (3/2)/(...))))
  // modified Lentz with C0 = b0 = x
  const long double tiny = 1e-60L;
  long double f = x, c = x, d = 0.0L;
  for (int k = 1; k < 400; ++k) {
    const long double a = k / 2.0L;
    d = x + a * d;
    if (d == 0.0L) d = tiny;
    c = x + a / c;
    if (c == 0.0L) c = tiny;
    d = 1.0L / d;
    const long double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0L) < 1e-25L) break;
  }
  return std::exp(-x * x) / (sqrt_pi * f);
}

// xorshift64*; fixed seeds keep the property-style tests reproducible.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ULL) : state(seed | 1) {}
  std::uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545f4914f6cdd1dULL;
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) / 9007199254740992.0);
  }
};

// 4 x 4 x 4 m box with a single downward branch over a single receiver 3 m
// below it; reflectivities and extras are injected by the caller.
inline std::string aligned_scene_text(double rho, const std::string& extra_params = "") {
  std::string text =
      "room 4 4 4\n"
      "reflectivity wall " + std::to_string(rho) + " ceiling " + std::to_string(rho) +
      " floor " + std::to_string(rho) + "\n"
      "element first 50cm second 100cm\n"
      "adt at 2 2 4 { branch az 0deg el 90deg semi 60deg lambda 850nm power 4mW }\n"
      "receiver R1 at 2 2 1 kind wfov fov 90deg area 1cm2 resp 0.6\n";
  if (!extra_params.empty()) text += "params " + extra_params + "\n";
  return text;
}

// Small room with few elements per surface, exercisable by the enumeration
// oracle at second order in milliseconds.
inline std::string toy_scene_text(const std::string& reflectivity = "wall 0.8 ceiling 0.8 floor 0.3",
                                  const std::string& elements = "first 50cm second 50cm",
                                  const std::string& params = "") {
  std::string text =
      "room 1 1 1\n"
      "reflectivity " + reflectivity + "\n"
      "element " + elements + "\n"
      "adt at 0.5 0.25 1 { branch az 90deg el 60deg semi 20deg lambda 850nm power 4mW }\n"
      "receiver R1 at 0.5 0.75 0.2 kind wfov fov 90deg area 1cm2 resp 0.6\n";
  if (!params.empty()) text += "params " + params + "\n";
  return text;
}

}  // namespace owc::testutil
