#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace fwkb {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rational& q) {
  return boost::multiprecision::numerator(q);
}
inline BigInt rat_den(const Rational& q) {
  return boost::multiprecision::denominator(q);
}

inline bool is_integer(const Rational& q) { return rat_den(q) == 1; }

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline long to_long(const Rational& q) {
  return rat_num(q).convert_to<long>();
}

/// q^n for integer n (n may be negative; q must be nonzero then).
inline Rational pow_rational(const Rational& q, long n) {
  if (n == 0) return Rational(1);
  const unsigned long a = static_cast<unsigned long>(n < 0 ? -n : n);
  BigInt num = boost::multiprecision::pow(rat_num(q), a);
  BigInt den = boost::multiprecision::pow(rat_den(q), a);
  if (n < 0) return Rational(den, num);
  return Rational(num, den);
}

inline std::optional<BigInt> exact_sqrt(const BigInt& v) {
  if (v < 0) return std::nullopt;
  BigInt rem;
  BigInt root = boost::multiprecision::sqrt(v, rem);
  if (rem != 0) return std::nullopt;
  return root;
}

/// Exact deg-th root (deg = 2 or 4) of a nonnegative rational, if one exists.
inline std::optional<Rational> exact_root(const Rational& q, int deg) {
  if (q < 0) return std::nullopt;
  auto num = exact_sqrt(rat_num(q));
  auto den = exact_sqrt(rat_den(q));
  if (!num || !den) return std::nullopt;
  Rational root(*num, *den);
  if (deg == 2) return root;
  return exact_root(root, 2);
}

inline std::string rat_to_string(const Rational& q) {
  std::string s = rat_num(q).str();
  if (!is_integer(q)) s += "/" + rat_den(q).str();
  return s;
}

}  // namespace fwkb
