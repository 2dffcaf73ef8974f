#pragma once

// Scalar types for numerical runs. Trajectories are integrated in double by
// default; `quad` (binary128) is used where integrator truncation error must be
// resolved below double rounding, e.g. convergence-order studies of smooth data.

#include "kpl/rational.hpp"

#include <quadmath.h>

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kpl {

using quad = __float128;

enum class Precision { Double, Quad };

inline std::string precision_name(Precision p) { return p == Precision::Quad ? "quad" : "double"; }

inline Precision parse_precision(std::string_view s) {
  if (s == "double") return Precision::Double;
  if (s == "quad") return Precision::Quad;
  throw std::invalid_argument("unknown precision '" + std::string(s) + "' (expected double or quad)");
}

template <class T>
T abs_value(T x) {
  return x < T(0) ? -x : x;
}

/// Exact when numerator and denominator fit in 53 bits, correctly rounded otherwise for double.
template <class Scalar>
Scalar rational_to(const Rational& r) {
  const bool exact = mpz_sizeinbase(r.get_num_mpz_t(), 2) <= 53 && mpz_sizeinbase(r.get_den_mpz_t(), 2) <= 53;
  if (exact) return Scalar(r.get_num().get_d()) / Scalar(r.get_den().get_d());
  return Scalar(r.get_d());
}

/// Round-trip text: 17 significant digits for double, 36 for quad.
inline std::string format_scalar(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_scalar(quad x) {
  char buf[96];
  quadmath_snprintf(buf, sizeof buf, "%.36Qg", x);
  return buf;
}

/// Significant decimal digits in the mantissa of a numeric field.
inline int significant_digits(const std::string& field) {
  int digits = 0;
  bool leading = true;
  for (char c : field) {
    if (c == 'e' || c == 'E') break;
    if (c >= '0' && c <= '9') {
      if (c != '0') leading = false;
      if (!leading) ++digits;
    }
  }
  return digits;
}

/// Parses a decimal field written by format_scalar for the given precision;
/// the value is recovered exactly.
inline quad parse_scalar(const std::string& field, Precision p) {
  char* end = nullptr;
  quad value;
  if (p == Precision::Double)
    value = std::strtod(field.c_str(), &end);
  else
    value = strtoflt128(field.c_str(), &end);
  if (field.empty() || end == nullptr || *end != '\0')
    throw std::invalid_argument("malformed number '" + field + "'");
  return value;
}

}  // namespace kpl
