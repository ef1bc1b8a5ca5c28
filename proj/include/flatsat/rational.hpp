#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "flatsat/error.hpp"

namespace flatsat {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational rat(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) fail(ErrorKind::BadParams, "zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

inline Rational pow(const Rational& r, unsigned e) {
  Rational out(1);
  for (unsigned i = 0; i < e; ++i) out *= r;
  return out;
}

inline BigInt pow(const BigInt& b, unsigned e) {
  BigInt out(1);
  for (unsigned i = 0; i < e; ++i) out *= b;
  return out;
}

inline BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return BigInt(0);
  if (k > n - k) k = n - k;
  BigInt out(1);
  for (std::uint64_t i = 1; i <= k; ++i) {
    out *= (n - k + i);
    out /= i;
  }
  return out;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(const BigInt& b) { return b.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
  BigInt n = boost::multiprecision::numerator(r);
  BigInt d = boost::multiprecision::denominator(r);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

// Accepts "a", "a/b" or a finite decimal such as "0.3"; the value is kept exact.
inline Rational parse_rational(std::string_view text) {
  auto bad = [&] { fail(ErrorKind::BadParams, "not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) bad();
  auto digits_only = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  bool neg = false;
  std::string_view body = text;
  if (body.front() == '-') {
    neg = true;
    body.remove_prefix(1);
  }
  Rational out;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto a = body.substr(0, slash), b = body.substr(slash + 1);
    if (!digits_only(a) || !digits_only(b)) bad();
    BigInt den{std::string(b)};
    if (den == 0) bad();
    out = Rational(BigInt(std::string(a)), den);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto a = body.substr(0, dot), b = body.substr(dot + 1);
    if (a.empty()) a = "0";
    if (!digits_only(a) || !digits_only(b)) bad();
    BigInt scale = pow(BigInt(10), static_cast<unsigned>(b.size()));
    out = Rational(BigInt(std::string(a)) * scale + BigInt(std::string(b)), scale);
  } else {
    if (!digits_only(body)) bad();
    out = Rational(BigInt(std::string(body)));
  }
  return neg ? Rational(-out) : out;
}

}  // namespace flatsat
