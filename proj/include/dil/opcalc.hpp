#pragma once

// Exact calculus for differential operators with polynomial coefficients in
// the complex coordinate z and its conjugate. Every expression is kept in
// normal order: all multiplications to the left of all differentiations,
//
//   c * z^a * zb^b * d^c * db^d,   d = ∂/∂z,  db = ∂/∂z̄,
//
// with the Wirtinger rules [d, z] = 1, [db, zb] = 1, [d, zb] = [db, z] = 0.

#include <algorithm>
#include <compare>
#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dil/error.hpp"
#include "dil/exact.hpp"

namespace dil {

struct Signature {
  unsigned z = 0;
  unsigned zbar = 0;
  unsigned d = 0;
  unsigned dbar = 0;

  auto operator<=>(const Signature&) const = default;
};

struct OperatorTerm {
  ComplexRational coeff{1};
  unsigned pow_z = 0;
  unsigned pow_zbar = 0;
  unsigned pow_d = 0;
  unsigned pow_dbar = 0;

  Signature signature() const { return {pow_z, pow_zbar, pow_d, pow_dbar}; }
  friend bool operator==(const OperatorTerm&, const OperatorTerm&) = default;
};

namespace detail {

inline BigInt binomial(unsigned n, unsigned k) {
  BigInt r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// n (n-1) ... (n-k+1)
inline BigInt falling_factorial(unsigned n, unsigned k) {
  BigInt r = 1;
  for (unsigned i = 0; i < k; ++i) r *= (n - i);
  return r;
}

}  // namespace detail

class OperatorExpression {
 public:
  OperatorExpression() = default;

  // Canonicalizes: merges equal signatures, drops zero coefficients, sorts.
  static OperatorExpression from_terms(const std::vector<OperatorTerm>& terms) {
    std::map<Signature, ComplexRational> acc;
    for (const auto& t : terms) acc[t.signature()] += t.coeff;
    OperatorExpression e;
    for (auto& [sig, c] : acc) {
      if (!c.is_zero()) e.terms_.push_back({std::move(c), sig.z, sig.zbar, sig.d, sig.dbar});
    }
    return e;
  }

  static OperatorExpression term(ComplexRational c, unsigned pz, unsigned pzb, unsigned pd, unsigned pdb) {
    return from_terms({{std::move(c), pz, pzb, pd, pdb}});
  }
  static OperatorExpression constant(ComplexRational c) { return term(std::move(c), 0, 0, 0, 0); }
  static OperatorExpression z() { return term(1, 1, 0, 0, 0); }
  static OperatorExpression zbar() { return term(1, 0, 1, 0, 0); }
  static OperatorExpression d() { return term(1, 0, 0, 1, 0); }
  static OperatorExpression dbar() { return term(1, 0, 0, 0, 1); }

  const std::vector<OperatorTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  unsigned derivative_order() const {
    unsigned order = 0;
    for (const auto& t : terms_) order = std::max(order, t.pow_d + t.pow_dbar);
    return order;
  }

  OperatorExpression operator-() const {
    OperatorExpression e = *this;
    for (auto& t : e.terms_) t.coeff = -t.coeff;
    return e;
  }
  friend OperatorExpression operator+(const OperatorExpression& a, const OperatorExpression& b) {
    std::vector<OperatorTerm> all = a.terms_;
    all.insert(all.end(), b.terms_.begin(), b.terms_.end());
    return from_terms(all);
  }
  friend OperatorExpression operator-(const OperatorExpression& a, const OperatorExpression& b) { return a + (-b); }
  friend OperatorExpression operator*(const ComplexRational& s, const OperatorExpression& a) {
    std::vector<OperatorTerm> all = a.terms_;
    for (auto& t : all) t.coeff *= s;
    return from_terms(all);
  }
  friend bool operator==(const OperatorExpression& a, const OperatorExpression& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<OperatorTerm> terms_;
};

// left ∘ right, rewritten into normal order. Only ∂^r z^P and ∂̄^s z̄^Q need
// reordering; both expand by the Leibniz rule.
inline OperatorExpression normal_order(const OperatorTerm& left, const OperatorTerm& right) {
  const ComplexRational base = left.coeff * right.coeff;
  std::vector<OperatorTerm> out;
  for (unsigned k = 0; k <= std::min(left.pow_d, right.pow_z); ++k) {
    const BigInt ck = detail::binomial(left.pow_d, k) * detail::falling_factorial(right.pow_z, k);
    for (unsigned l = 0; l <= std::min(left.pow_dbar, right.pow_zbar); ++l) {
      const BigInt cl = detail::binomial(left.pow_dbar, l) * detail::falling_factorial(right.pow_zbar, l);
      out.push_back({base * ComplexRational(Rational(ck * cl)),
                     left.pow_z + right.pow_z - k,
                     left.pow_zbar + right.pow_zbar - l,
                     left.pow_d - k + right.pow_d,
                     left.pow_dbar - l + right.pow_dbar});
    }
  }
  return OperatorExpression::from_terms(out);
}

inline OperatorExpression compose(const OperatorExpression& a, const OperatorExpression& b) {
  std::vector<OperatorTerm> out;
  for (const auto& l : a.terms()) {
    for (const auto& r : b.terms()) {
      const auto part = normal_order(l, r);
      out.insert(out.end(), part.terms().begin(), part.terms().end());
    }
  }
  return OperatorExpression::from_terms(out);
}

// Formal L² adjoint: z† = z̄, ∂† = -∂̄, ∂̄† = -∂, order reversed.
inline OperatorExpression adjoint(const OperatorExpression& a) {
  std::vector<OperatorTerm> out;
  for (const auto& t : a.terms()) {
    ComplexRational c = t.coeff.conj();
    if ((t.pow_d + t.pow_dbar) % 2 == 1) c = -c;
    const OperatorTerm derivs{c, 0, 0, t.pow_dbar, t.pow_d};
    const OperatorTerm mults{1, t.pow_zbar, t.pow_z, 0, 0};
    const auto part = normal_order(derivs, mults);
    out.insert(out.end(), part.terms().begin(), part.terms().end());
  }
  return OperatorExpression::from_terms(out);
}

class BlockOperator {
 public:
  BlockOperator(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols) {
    if (rows == 0 || cols == 0) throw DimensionError("block operator needs positive dimensions");
  }
  BlockOperator(std::size_t rows, std::size_t cols, std::vector<OperatorExpression> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows == 0 || cols == 0) throw DimensionError("block operator needs positive dimensions");
    if (entries_.size() != rows * cols) throw DimensionError("block operator entry count does not match shape");
  }

  static BlockOperator identity(std::size_t n) {
    BlockOperator b(n, n);
    for (std::size_t i = 0; i < n; ++i) b.at(i, i) = OperatorExpression::constant(1);
    return b;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<OperatorExpression>& entries() const { return entries_; }
  OperatorExpression& at(std::size_t r, std::size_t c) { return entries_.at(r * cols_ + c); }
  const OperatorExpression& at(std::size_t r, std::size_t c) const { return entries_.at(r * cols_ + c); }

  unsigned derivative_order() const {
    unsigned o = 0;
    for (const auto& e : entries_) o = std::max(o, e.derivative_order());
    return o;
  }

  friend BlockOperator operator+(const BlockOperator& a, const BlockOperator& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("block shapes differ in sum");
    BlockOperator r(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.entries_.size(); ++k) r.entries_[k] = a.entries_[k] + b.entries_[k];
    return r;
  }
  friend BlockOperator operator-(const BlockOperator& a, const BlockOperator& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("block shapes differ in difference");
    BlockOperator r(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.entries_.size(); ++k) r.entries_[k] = a.entries_[k] - b.entries_[k];
    return r;
  }
  friend bool operator==(const BlockOperator& a, const BlockOperator& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<OperatorExpression> entries_;
};

inline BlockOperator compose(const BlockOperator& a, const BlockOperator& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("cannot compose " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " with " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  BlockOperator r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      OperatorExpression acc;
      for (std::size_t k = 0; k < a.cols(); ++k) acc = acc + compose(a.at(i, k), b.at(k, j));
      r.at(i, j) = acc;
    }
  }
  return r;
}

inline BlockOperator adjoint(const BlockOperator& a) {
  BlockOperator r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) r.at(j, i) = adjoint(a.at(i, j));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Gaussian ansatz: poly(z, z̄) * exp(-alpha |z|^2)

class Polynomial {
 public:
  using Key = std::pair<unsigned, unsigned>;  // (pow_z, pow_zbar)

  Polynomial() = default;
  static Polynomial constant(ComplexRational c) {
    Polynomial p;
    p.add(0, 0, std::move(c));
    return p;
  }
  static Polynomial monomial(ComplexRational c, unsigned pz, unsigned pzb) {
    Polynomial p;
    p.add(pz, pzb, std::move(c));
    return p;
  }

  void add(unsigned pz, unsigned pzb, const ComplexRational& c) {
    auto& slot = coeffs_[{pz, pzb}];
    slot += c;
    if (slot.is_zero()) coeffs_.erase({pz, pzb});
  }

  const std::map<Key, ComplexRational>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }

  std::complex<double> evaluate(std::complex<double> z) const {
    std::complex<double> acc = 0.0;
    const std::complex<double> zb = std::conj(z);
    for (const auto& [key, c] : coeffs_) {
      acc += c.to_complex() * std::pow(z, static_cast<int>(key.first)) * std::pow(zb, static_cast<int>(key.second));
    }
    return acc;
  }

  Polynomial d() const {
    Polynomial r;
    for (const auto& [key, c] : coeffs_) {
      if (key.first > 0) r.add(key.first - 1, key.second, c * ComplexRational(static_cast<long long>(key.first)));
    }
    return r;
  }
  Polynomial dbar() const {
    Polynomial r;
    for (const auto& [key, c] : coeffs_) {
      if (key.second > 0) r.add(key.first, key.second - 1, c * ComplexRational(static_cast<long long>(key.second)));
    }
    return r;
  }
  Polynomial times(const ComplexRational& c, unsigned pz, unsigned pzb) const {
    Polynomial r;
    for (const auto& [key, v] : coeffs_) r.add(key.first + pz, key.second + pzb, v * c);
    return r;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) {
    for (const auto& [key, c] : b.coeffs_) a.add(key.first, key.second, c);
    return a;
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

 private:
  std::map<Key, ComplexRational> coeffs_;
};

struct GaussianAnsatz {
  Rational alpha{1};
  Polynomial poly;

  GaussianAnsatz() = default;
  GaussianAnsatz(Rational a, Polynomial p) : alpha(std::move(a)), poly(std::move(p)) {
    if (alpha <= 0) throw InvalidArgument("Gaussian decay rate must be positive");
  }

  std::complex<double> evaluate(std::complex<double> z) const {
    return poly.evaluate(z) * std::exp(-to_double(alpha) * std::norm(z));
  }

  friend bool operator==(const GaussianAnsatz& a, const GaussianAnsatz& b) {
    // Zero functions agree regardless of decay rate.
    if (a.poly.is_zero() && b.poly.is_zero()) return true;
    return a.alpha == b.alpha && a.poly == b.poly;
  }
};

inline GaussianAnsatz operator+(const GaussianAnsatz& a, const GaussianAnsatz& b) {
  if (a.poly.is_zero()) return b;
  if (b.poly.is_zero()) return a;
  if (a.alpha != b.alpha) throw InvalidArgument("cannot add Gaussian ansatz functions with different decay rates");
  return {a.alpha, a.poly + b.poly};
}

// ∂(p e^{-α z z̄}) = (∂p - α z̄ p) e^{-α z z̄};  ∂̄ likewise with z.
inline GaussianAnsatz gaussian_apply(const OperatorExpression& op, const GaussianAnsatz& f) {
  Polynomial total;
  const ComplexRational minus_alpha(-f.alpha);
  for (const auto& t : op.terms()) {
    Polynomial p = f.poly;
    for (unsigned k = 0; k < t.pow_dbar; ++k) p = p.dbar() + p.times(minus_alpha, 1, 0);
    for (unsigned k = 0; k < t.pow_d; ++k) p = p.d() + p.times(minus_alpha, 0, 1);
    total = total + p.times(t.coeff, t.pow_z, t.pow_zbar);
  }
  return {f.alpha, std::move(total)};
}

// Componentwise action of a block operator on a column of ansatz functions.
inline std::vector<GaussianAnsatz> gaussian_apply(const BlockOperator& op, const std::vector<GaussianAnsatz>& f) {
  if (f.size() != op.cols()) throw DimensionError("ansatz vector length does not match block operator columns");
  std::vector<GaussianAnsatz> out(op.rows(), GaussianAnsatz(f.empty() ? Rational(1) : f[0].alpha, Polynomial{}));
  for (std::size_t i = 0; i < op.rows(); ++i) {
    for (std::size_t j = 0; j < op.cols(); ++j) out[i] = out[i] + gaussian_apply(op.at(i, j), f[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text form: "(c)*z^a*zb^b*d^c*db^d" terms joined by " + "; "0" when empty.

inline std::string render(const OperatorTerm& t) {
  return to_string(t.coeff) + "*z^" + std::to_string(t.pow_z) + "*zb^" + std::to_string(t.pow_zbar) + "*d^" +
         std::to_string(t.pow_d) + "*db^" + std::to_string(t.pow_dbar);
}

inline std::string render(const OperatorExpression& e) {
  if (e.is_zero()) return "0";
  std::string out;
  for (const auto& t : e.terms()) {
    if (!out.empty()) out += " + ";
    out += render(t);
  }
  return out;
}

inline std::string render(const BlockOperator& b) {
  std::string out = "[";
  for (std::size_t i = 0; i < b.rows(); ++i) {
    if (i) out += "; ";
    for (std::size_t j = 0; j < b.cols(); ++j) {
      if (j) out += ", ";
      out += render(b.at(i, j));
    }
  }
  return out + "]";
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline unsigned parse_power(std::string_view factor, std::string_view name) {
  if (factor.substr(0, name.size()) != name || factor.size() <= name.size() + 1 || factor[name.size()] != '^') {
    throw ParseError("expected factor '" + std::string(name) + "^k', got '" + std::string(factor) + "'");
  }
  unsigned v = 0;
  for (char ch : factor.substr(name.size() + 1)) {
    if (ch < '0' || ch > '9') throw ParseError("malformed power in '" + std::string(factor) + "'");
    v = v * 10 + static_cast<unsigned>(ch - '0');
  }
  return v;
}

inline OperatorTerm parse_term(std::string_view text) {
  text = trim(text);
  const auto close = text.find(')');
  if (close == std::string_view::npos) throw ParseError("term without coefficient: '" + std::string(text) + "'");
  OperatorTerm t;
  t.coeff = parse_complex_rational(text.substr(0, close + 1));
  std::string_view rest = text.substr(close + 1);
  const std::string_view names[] = {"z", "zb", "d", "db"};
  unsigned* slots[] = {&t.pow_z, &t.pow_zbar, &t.pow_d, &t.pow_dbar};
  for (int k = 0; k < 4; ++k) {
    if (rest.empty() || rest.front() != '*') throw ParseError("expected '*' in term '" + std::string(text) + "'");
    rest.remove_prefix(1);
    const auto next = rest.find('*');
    *slots[k] = parse_power(rest.substr(0, next), names[k]);
    rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next);
  }
  if (!rest.empty()) throw ParseError("trailing text in term '" + std::string(text) + "'");
  return t;
}

}  // namespace detail

inline OperatorExpression parse_expression(std::string_view text) {
  text = detail::trim(text);
  if (text == "0") return {};
  std::vector<OperatorTerm> terms;
  std::size_t start = 0;
  while (true) {
    const auto sep = text.find(" + ", start);
    terms.push_back(detail::parse_term(text.substr(start, sep - start)));
    if (sep == std::string_view::npos) break;
    start = sep + 3;
  }
  return OperatorExpression::from_terms(terms);
}

inline BlockOperator parse_block(std::string_view text) {
  text = detail::trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw ParseError("block operator must be enclosed in []");
  }
  text = text.substr(1, text.size() - 2);
  std::vector<OperatorExpression> entries;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t start = 0;
  while (true) {
    const auto row_end = text.find(';', start);
    const std::string_view row = text.substr(start, row_end - start);
    std::size_t c = 0;
    std::size_t cs = 0;
    while (true) {
      const auto col_end = row.find(',', cs);
      entries.push_back(parse_expression(row.substr(cs, col_end - cs)));
      ++c;
      if (col_end == std::string_view::npos) break;
      cs = col_end + 1;
    }
    if (rows == 0) cols = c;
    if (c != cols) throw ParseError("ragged block operator rows");
    ++rows;
    if (row_end == std::string_view::npos) break;
    start = row_end + 1;
  }
  return {rows, cols, std::move(entries)};
}

}  // namespace dil
