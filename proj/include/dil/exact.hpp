#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <string_view>

#include "dil/error.hpp"

namespace dil {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Shortest continued-fraction convergent that reproduces x to within a few
// ulps. Decimal literals coming from config files (0.19, 0.7, ...) map back to
// the rational the user meant instead of the binary expansion of the double.
inline Rational rationalize(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("cannot rationalize a non-finite value");
  if (x == 0.0) return Rational(0);
  const Rational exact(x);
  const Rational tol = Rational(8.0 * std::numeric_limits<double>::epsilon() * std::abs(x));

  // Convergents h_k / k_k of the continued fraction of `exact`.
  BigInt h_prev = 1, h_prev2 = 0, k_prev = 0, k_prev2 = 1;
  Rational rest = exact;
  for (int it = 0; it < 128; ++it) {
    BigInt a = boost::multiprecision::numerator(rest) / boost::multiprecision::denominator(rest);
    if (rest < 0 && a * boost::multiprecision::denominator(rest) != boost::multiprecision::numerator(rest)) {
      a -= 1;  // floor for negative values
    }
    const BigInt h = a * h_prev + h_prev2;
    const BigInt k = a * k_prev + k_prev2;
    const Rational conv(h, k);
    if (abs(conv - exact) <= tol) return conv;
    const Rational frac = rest - Rational(a);
    if (frac == 0) return conv;
    rest = 1 / frac;
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
  }
  return exact;
}

inline std::string to_string(const Rational& r) {
  const auto& num = boost::multiprecision::numerator(r);
  const auto& den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw ParseError("empty rational literal");
  const auto slash = text.find('/');
  auto parse_int = [](std::string_view s) {
    std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (i == s.size()) throw ParseError("malformed integer '" + std::string(s) + "'");
    for (std::size_t j = i; j < s.size(); ++j) {
      if (s[j] < '0' || s[j] > '9') throw ParseError("malformed integer '" + std::string(s) + "'");
    }
    std::string digits(s.substr(s[0] == '+' ? 1 : 0));
    return BigInt(digits);
  };
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  const BigInt den = parse_int(text.substr(slash + 1));
  if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return Rational(parse_int(text.substr(0, slash)), den);
}

/// Exact complex number with rational parts.
struct ComplexRational {
  Rational re{0};
  Rational im{0};

  ComplexRational() = default;
  ComplexRational(Rational r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  ComplexRational(long long r) : re(r) {}              // NOLINT(google-explicit-constructor)
  ComplexRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  static ComplexRational i() { return {Rational(0), Rational(1)}; }

  bool is_zero() const { return re == 0 && im == 0; }
  ComplexRational conj() const { return {re, -im}; }
  std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }

  ComplexRational operator-() const { return {-re, -im}; }
  ComplexRational& operator+=(const ComplexRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  ComplexRational& operator-=(const ComplexRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  ComplexRational& operator*=(const ComplexRational& o) {
    Rational r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) { return a += b; }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) { return a -= b; }
  friend ComplexRational operator*(ComplexRational a, const ComplexRational& b) { return a *= b; }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const ComplexRational& a, const ComplexRational& b) { return !(a == b); }
};

// Rendered as "(re+imi)" / "(re-imi)", e.g. "(-1+0i)", "(1/2-3/4i)".
inline std::string to_string(const ComplexRational& c) {
  std::string out = "(" + to_string(c.re);
  out += (c.im < 0) ? "-" : "+";
  out += to_string(c.im < 0 ? Rational(-c.im) : c.im);
  out += "i)";
  return out;
}

inline ComplexRational parse_complex_rational(std::string_view text) {
  if (text.size() < 5 || text.front() != '(' || text.back() != ')' || text[text.size() - 2] != 'i') {
    throw ParseError("malformed complex coefficient '" + std::string(text) + "'");
  }
  const std::string_view body = text.substr(1, text.size() - 3);
  // The imaginary sign is the last '+'/'-' that is not the leading sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if (body[k] == '+' || body[k] == '-') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) {
    throw ParseError("complex coefficient without imaginary part '" + std::string(text) + "'");
  }
  Rational re = parse_rational(body.substr(0, split));
  Rational im = parse_rational(body.substr(split + 1));
  if (body[split] == '-') im = -im;
  return {std::move(re), std::move(im)};
}

}  // namespace dil
