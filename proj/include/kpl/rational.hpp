#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace kpl {

/// Arbitrary-precision rational coefficient. Always kept in canonical form.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Parses "p" or "p/q". Throws std::invalid_argument on malformed input or zero denominator.
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  const std::string s(text);
  const auto slash = s.find('/');
  auto is_int = [](const std::string& part) {
    if (part.empty()) return false;
    std::size_t i = (part[0] == '-' || part[0] == '+') ? 1 : 0;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i)
      if (part[i] < '0' || part[i] > '9') return false;
    return true;
  };
  if (!is_int(s.substr(0, slash)) ||
      (slash != std::string::npos && !is_int(s.substr(slash + 1))))
    throw std::invalid_argument("malformed rational literal: " + s);
  Rational r;
  try {
    r = Rational(s[0] == '+' ? s.substr(1) : s, 10);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("malformed rational literal: " + s);
  }
  if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(10); }

inline double to_double(const Rational& r) { return r.get_d(); }

}  // namespace kpl
