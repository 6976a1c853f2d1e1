#pragma once

// Numeric modes. Every computation is templated on its scalar type and the
// caller picks one of the two modes below; they are never mixed.

#include <gmpxx.h>

#include <cmath>
#include <concepts>
#include <cstdlib>
#include <sstream>
#include <string>
#include <string_view>

#include "sinkmech/errors.hpp"

namespace sinkmech {

/// Exact mode: arbitrary-precision rational.
using Rational = mpq_class;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";
  static Rational tolerance() { return Rational(0); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
  static double tolerance() { return 1e-9; }
};

template <class T>
concept Scalar = requires { ScalarTraits<T>::exact; };

template <Scalar T>
bool is_positive(const T& x) {
  return x > ScalarTraits<T>::tolerance();
}

template <Scalar T>
bool is_negative(const T& x) {
  return x < -ScalarTraits<T>::tolerance();
}

template <Scalar T>
bool is_zero(const T& x) {
  return !is_positive(x) && !is_negative(x);
}

template <Scalar T>
T abs_value(const T& x) {
  if constexpr (std::same_as<T, Rational>) {
    return Rational(abs(x));
  } else {
    return std::fabs(x);
  }
}

inline double to_double(const Rational& x) { return x.get_d(); }
inline double to_double(double x) { return x; }

/// Exact value of a ratio of integers in the requested mode.
template <Scalar T>
T ratio(long num, long den) {
  if constexpr (std::same_as<T, Rational>) {
    Rational r(num, den);
    r.canonicalize();
    return r;
  } else {
    return static_cast<double>(num) / static_cast<double>(den);
  }
}

/// Parses `p/q`, an integer, or a decimal such as `-0.25` / `1e-3`.
/// Decimals are converted exactly in exact mode.
template <Scalar T>
T parse_scalar(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ParseError("empty number", 0);
  if constexpr (std::same_as<T, Rational>) {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Rational r;
      if (r.set_str(s, 10) != 0 || r.get_den() == 0) throw ParseError("bad rational '" + s + "'", 0);
      r.canonicalize();
      return r;
    }
    // decimal with optional exponent
    std::string mant = s;
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
      mant = s.substr(0, e);
      char* end = nullptr;
      exponent = std::strtol(s.c_str() + e + 1, &end, 10);
      if (*end != '\0' || e + 1 == s.size()) throw ParseError("bad number '" + s + "'", 0);
    }
    bool negative = false;
    std::size_t pos = 0;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
      negative = mant[0] == '-';
      pos = 1;
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    for (; pos < mant.size(); ++pos) {
      char c = mant[pos];
      if (c == '.' && !seen_point) {
        seen_point = true;
      } else if (c >= '0' && c <= '9') {
        digits.push_back(c);
        if (seen_point) ++frac_digits;
      } else {
        throw ParseError("bad number '" + s + "'", 0);
      }
    }
    if (digits.empty()) throw ParseError("bad number '" + s + "'", 0);
    mpz_class numerator(digits, 10);
    long scale = exponent - frac_digits;
    mpz_class power;
    mpz_ui_pow_ui(power.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
    Rational r = scale >= 0 ? Rational(numerator * power) : Rational(numerator, power);
    r.canonicalize();
    return negative ? Rational(-r) : r;
  } else {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      return parse_scalar<Rational>(s).get_d();
    }
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError("bad number '" + s + "'", 0);
    return v;
  }
}

/// `p/q` (or an integer) in exact mode; shortest round-trip decimal in float mode.
inline std::string format_scalar(const Rational& x) { return x.get_str(); }

inline std::string format_scalar(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

/// Exact rationals printed as `p/q (decimal)`; floats as plain decimals.
template <Scalar T>
std::string format_with_decimal(const T& x) {
  if constexpr (ScalarTraits<T>::exact) {
    std::ostringstream out;
    out.precision(10);
    out << x.get_str() << " (" << x.get_d() << ")";
    return out.str();
  } else {
    return format_scalar(x);
  }
}

}  // namespace sinkmech
