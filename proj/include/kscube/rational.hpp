#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "kscube/errors.hpp"

namespace kscube {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(const BigInt& v) { return v.convert_to<double>(); }
inline double to_double(double v) { return v; }

inline BigInt ipow(const BigInt& base, unsigned exponent) {
  return boost::multiprecision::pow(base, exponent);
}

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

/// Every finite double is a dyadic rational; this conversion is exact.
inline Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite value has no rational form");
  int exp = 0;
  double mant = std::frexp(v, &exp);
  // mant * 2^53 is an integer for IEEE binary64.
  auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r{BigInt(scaled)};
  if (exp >= 0) {
    r *= Rational(ipow(BigInt(2), static_cast<unsigned>(exp)));
  } else {
    r /= Rational(ipow(BigInt(2), static_cast<unsigned>(-exp)));
  }
  return r;
}

/// "a/b" or "a" (also accepts plain decimal integers with sign).
inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    Rational num{BigInt(text.substr(0, slash))};
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw FormatError("zero denominator in '" + text + "'");
    return num / Rational(den);
  } catch (const std::runtime_error&) {
    throw FormatError("not a rational literal: '" + text + "'");
  }
}

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Exact k-th root of a nonnegative rational when one exists.
inline bool exact_root(const Rational& value, unsigned k, Rational& out) {
  if (value < 0 || k == 0) return false;
  if (k == 1) {
    out = value;
    return true;
  }
  auto iroot = [k](const BigInt& v, BigInt& r) {
    if (v == 0) {
      r = 0;
      return true;
    }
    double guess = std::pow(to_double(v), 1.0 / k);
    BigInt c(static_cast<std::int64_t>(std::llround(guess)));
    for (BigInt cand = (c > 2 ? c - 2 : BigInt(0)); cand <= c + 2; ++cand) {
      if (ipow(cand, k) == v) {
        r = cand;
        return true;
      }
    }
    return false;
  };
  BigInt num_root, den_root;
  if (!iroot(numerator(value), num_root)) return false;
  if (!iroot(denominator(value), den_root)) return false;
  out = Rational(num_root, den_root);
  return true;
}

}  // namespace kscube
