#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace martkit {

// Exact endpoint arithmetic for cell boundaries. Denominators are products of
// branching factors, so 64-bit integers cover every tree we allow.
struct Rational {
  std::int64_t num{0};
  std::int64_t den{1};

  constexpr Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational&, const Rational&) = default;

  friend bool operator<(const Rational& a, const Rational& b) {
    // denominators are positive and bounded by the leaf count, no overflow here
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

}  // namespace martkit
