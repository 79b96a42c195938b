#pragma once

// Square lattice over the complex plane [-L, L]^2 and finite-difference
// realizations of normal-ordered block operators.

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dil/error.hpp"
#include "dil/opcalc.hpp"

namespace dil {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;

class GridSpec {
 public:
  GridSpec(double half_width, int n) : half_width_(half_width), n_(n) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw InvalidArgument("grid half-width must be a positive finite number");
    }
    if (n < 8) throw InvalidArgument("grid needs at least 8 points per axis, got " + std::to_string(n));
  }

  double half_width() const { return half_width_; }
  int n() const { return n_; }
  double h() const { return 2.0 * half_width_ / (n_ - 1); }
  std::size_t nodes() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

  // Row-major: x index varies fastest.
  Complex coordinate(std::size_t k) const {
    const double x = -half_width_ + static_cast<double>(k % n_) * h();
    const double y = -half_width_ + static_cast<double>(k / n_) * h();
    return {x, y};
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.half_width_ == b.half_width_ && a.n_ == b.n_;
  }

 private:
  double half_width_;
  int n_;
};

/// Complex multi-component function sampled on a grid (component-major).
class Field {
 public:
  Field(GridSpec grid, int components) : grid_(grid), components_(components) {
    if (components <= 0) throw InvalidArgument("field needs at least one component");
    values_ = Vector::Zero(static_cast<Eigen::Index>(components * grid.nodes()));
  }
  Field(GridSpec grid, int components, Vector values)
      : grid_(grid), components_(components), values_(std::move(values)) {
    if (components <= 0) throw InvalidArgument("field needs at least one component");
    if (static_cast<std::size_t>(values_.size()) != components * grid_.nodes()) {
      throw DimensionError("field value count does not match components * nodes");
    }
    if (!values_.allFinite()) throw InvalidArgument("field values must be finite");
  }

  const GridSpec& grid() const { return grid_; }
  int components() const { return components_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  Complex at(int component, std::size_t node) const {
    return values_[static_cast<Eigen::Index>(component * grid_.nodes() + node)];
  }

  // Squared magnitude summed over components at one node.
  double density(std::size_t node) const {
    double s = 0.0;
    for (int c = 0; c < components_; ++c) s += std::norm(at(c, node));
    return s;
  }

  double norm_squared() const {
    const double h = grid_.h();
    double s = 0.0;
    for (Eigen::Index k = 0; k < values_.size(); ++k) s += std::norm(values_[k]);
    return s * h * h;
  }
  double norm() const { return std::sqrt(norm_squared()); }

  Complex inner(const Field& other) const {
    if (!(other.grid_ == grid_) || other.components_ != components_) {
      throw DimensionError("inner product of fields on different spaces");
    }
    const double h = grid_.h();
    Complex s = 0.0;
    for (Eigen::Index k = 0; k < values_.size(); ++k) s += std::conj(values_[k]) * other.values_[k];
    return s * h * h;
  }

  static Field stack(const std::vector<Field>& parts) {
    if (parts.empty()) throw InvalidArgument("cannot stack zero fields");
    int m = 0;
    for (const auto& p : parts) {
      if (!(p.grid_ == parts[0].grid_)) throw DimensionError("stacked fields live on different grids");
      m += p.components_;
    }
    Vector v(static_cast<Eigen::Index>(m * parts[0].grid_.nodes()));
    Eigen::Index offset = 0;
    for (const auto& p : parts) {
      v.segment(offset, p.values_.size()) = p.values_;
      offset += p.values_.size();
    }
    return {parts[0].grid_, m, std::move(v)};
  }

 private:
  GridSpec grid_;
  int components_;
  Vector values_;
};

// ---------------------------------------------------------------------------
// sampling

template <class Fn>
  requires std::invocable<Fn&, Complex>
Field sample(const GridSpec& grid, Fn&& fn) {
  Vector v(static_cast<Eigen::Index>(grid.nodes()));
  for (std::size_t k = 0; k < grid.nodes(); ++k) v[static_cast<Eigen::Index>(k)] = fn(grid.coordinate(k));
  return {grid, 1, std::move(v)};
}

inline Field sample(const GridSpec& grid, const GaussianAnsatz& f) {
  return sample(grid, [&f](Complex z) { return f.evaluate(z); });
}

inline Field sample(const GridSpec& grid, const std::vector<GaussianAnsatz>& fs) {
  std::vector<Field> parts;
  parts.reserve(fs.size());
  for (const auto& f : fs) parts.push_back(sample(grid, f));
  return Field::stack(parts);
}

// Share of the L² mass inside the open disk |z| < radius.
inline double localization_fraction(const Field& field, double radius) {
  const double L = field.grid().half_width();
  if (!(radius > 0.0) || radius > L) throw InvalidArgument("localization radius must lie in (0, L]");
  // Trapezoid weights: the node set includes the box edges, so an unweighted
  // sum would overcount the box area by (1 + h/L).
  const auto n = static_cast<std::size_t>(field.grid().n());
  const auto edge = [n](std::size_t i) { return i == 0 || i + 1 == n ? 0.5 : 1.0; };
  double inside = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < field.grid().nodes(); ++k) {
    const double w = field.density(k) * edge(k % n) * edge(k / n);
    total += w;
    if (std::abs(field.grid().coordinate(k)) < radius) inside += w;
  }
  if (total == 0.0) throw InvalidArgument("localization fraction of a zero field");
  return inside / total;
}

// ---------------------------------------------------------------------------
// stencils (homogeneous Dirichlet: ghost values outside the box are zero)

struct Stencils {
  SparseMatrix dx;
  SparseMatrix dy;
  SparseMatrix dz;                 // ½(Dx - i Dy)
  SparseMatrix dzbar;              // ½(Dx + i Dy)
  SparseMatrix quarter_laplacian;  // ¼(δx² + δy²), compact 5-point
};

inline Stencils build_stencils(const GridSpec& grid) {
  const int n = grid.n();
  const auto N = static_cast<Eigen::Index>(grid.nodes());
  const double h = grid.h();
  const double c1 = 1.0 / (2.0 * h);
  const double c2 = 1.0 / (h * h);
  std::vector<Triplet> tx, ty, tl;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = j * n + i;
      if (i + 1 < n) tx.emplace_back(k, k + 1, c1);
      if (i > 0) tx.emplace_back(k, k - 1, -c1);
      if (j + 1 < n) ty.emplace_back(k, k + n, c1);
      if (j > 0) ty.emplace_back(k, k - n, -c1);
      tl.emplace_back(k, k, -4.0 * c2 * 0.25);
      if (i + 1 < n) tl.emplace_back(k, k + 1, 0.25 * c2);
      if (i > 0) tl.emplace_back(k, k - 1, 0.25 * c2);
      if (j + 1 < n) tl.emplace_back(k, k + n, 0.25 * c2);
      if (j > 0) tl.emplace_back(k, k - n, 0.25 * c2);
    }
  }
  Stencils s;
  s.dx.resize(N, N);
  s.dy.resize(N, N);
  s.quarter_laplacian.resize(N, N);
  s.dx.setFromTriplets(tx.begin(), tx.end());
  s.dy.setFromTriplets(ty.begin(), ty.end());
  s.quarter_laplacian.setFromTriplets(tl.begin(), tl.end());
  const Complex half(0.5, 0.0);
  const Complex half_i(0.0, 0.5);
  s.dz = half * s.dx - half_i * s.dy;
  s.dzbar = half * s.dx + half_i * s.dy;
  return s;
}

namespace detail {

inline SparseMatrix identity_matrix(Eigen::Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

// coeff * z^a * zb^b * d^c * db^d. Each ∂∂̄ pair is realized by the compact
// Laplacian: the product of two central first differences decouples the
// even and odd sublattices and quadruples every low-lying mode.
inline SparseMatrix term_matrix(const OperatorTerm& t, const GridSpec& grid, const Stencils& st) {
  const auto N = static_cast<Eigen::Index>(grid.nodes());
  const unsigned pairs = std::min(t.pow_d, t.pow_dbar);
  SparseMatrix m = identity_matrix(N);
  for (unsigned k = 0; k < pairs; ++k) m = SparseMatrix(m * st.quarter_laplacian);
  for (unsigned k = pairs; k < t.pow_d; ++k) m = SparseMatrix(m * st.dz);
  for (unsigned k = pairs; k < t.pow_dbar; ++k) m = SparseMatrix(m * st.dzbar);

  const Complex c = t.coeff.to_complex();
  Vector w(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Complex z = grid.coordinate(static_cast<std::size_t>(k));
    w[k] = c * std::pow(z, static_cast<int>(t.pow_z)) * std::pow(std::conj(z), static_cast<int>(t.pow_zbar));
  }
  return w.asDiagonal() * m;
}

}  // namespace detail

inline SparseMatrix discretize(const OperatorExpression& e, const GridSpec& grid, const Stencils& st) {
  const auto N = static_cast<Eigen::Index>(grid.nodes());
  SparseMatrix acc(N, N);
  for (const auto& t : e.terms()) acc += detail::term_matrix(t, grid, st);
  acc.prune(Complex(0.0, 0.0));
  return acc;
}

inline SparseMatrix discretize(const OperatorExpression& e, const GridSpec& grid) {
  return discretize(e, grid, build_stencils(grid));
}

/// Block operator -> sparse matrix of size (rows·n²) x (cols·n²); blocks are
/// assembled row-major in the order of the block entries.
inline SparseMatrix discretize(const BlockOperator& op, const GridSpec& grid) {
  const Stencils st = build_stencils(grid);
  const auto N = static_cast<Eigen::Index>(grid.nodes());
  std::vector<Triplet> trips;
  for (std::size_t i = 0; i < op.rows(); ++i) {
    for (std::size_t j = 0; j < op.cols(); ++j) {
      const SparseMatrix block = discretize(op.at(i, j), grid, st);
      const auto r0 = static_cast<Eigen::Index>(i) * N;
      const auto c0 = static_cast<Eigen::Index>(j) * N;
      for (Eigen::Index col = 0; col < block.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(block, col); it; ++it) {
          trips.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
        }
      }
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(op.rows()) * N, static_cast<Eigen::Index>(op.cols()) * N);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

inline Field apply(const SparseMatrix& a, const Field& f) {
  if (a.cols() != f.values().size()) throw DimensionError("matrix columns do not match field size");
  const auto nodes = static_cast<Eigen::Index>(f.grid().nodes());
  if (a.rows() % nodes != 0) throw DimensionError("matrix rows are not a multiple of the node count");
  Vector v = a * f.values();
  return {f.grid(), static_cast<int>(a.rows() / nodes), std::move(v)};
}

// ---------------------------------------------------------------------------
// CSV: matrices as (row,col,re,im) triplets, fields as (index,re,im)

inline void write_matrix_csv(std::ostream& os, const SparseMatrix& a) {
  os << "row,col,re,im\n";
  // Row-major order regardless of storage.
  std::vector<Triplet> trips;
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  }
  std::sort(trips.begin(), trips.end(), [](const Triplet& x, const Triplet& y) {
    return x.row() != y.row() ? x.row() < y.row() : x.col() < y.col();
  });
  char buf[128];
  for (const auto& t : trips) {
    std::snprintf(buf, sizeof buf, "%ld,%ld,%.17g,%.17g\n", static_cast<long>(t.row()), static_cast<long>(t.col()),
                  t.value().real(), t.value().imag());
    os << buf;
  }
}

inline SparseMatrix read_matrix_csv(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  std::string line;
  if (!std::getline(is, line) || line != "row,col,re,im") throw ParseError("matrix CSV must start with header row,col,re,im");
  std::vector<Triplet> trips;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    long r = 0, c = 0;
    double re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf", &r, &c, &re, &im) != 4) {
      throw ParseError("malformed matrix CSV line " + std::to_string(lineno));
    }
    if (r < 0 || c < 0 || r >= rows || c >= cols) throw ParseError("matrix CSV index out of range on line " + std::to_string(lineno));
    trips.emplace_back(r, c, Complex(re, im));
  }
  SparseMatrix a(rows, cols);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

inline void write_field_csv(std::ostream& os, const Field& f) {
  os << "index,re,im\n";
  char buf[96];
  for (Eigen::Index k = 0; k < f.values().size(); ++k) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g\n", static_cast<long>(k), f.values()[k].real(), f.values()[k].imag());
    os << buf;
  }
}

inline Field read_field_csv(std::istream& is, const GridSpec& grid, int components) {
  std::string line;
  if (!std::getline(is, line) || line != "index,re,im") throw ParseError("field CSV must start with header index,re,im");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(components * grid.nodes()));
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    long k = 0;
    double re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &k, &re, &im) != 3) {
      throw ParseError("malformed field CSV line " + std::to_string(lineno));
    }
    if (k < 0 || k >= v.size()) throw ParseError("field CSV index out of range on line " + std::to_string(lineno));
    v[k] = Complex(re, im);
  }
  return {grid, components, std::move(v)};
}

}  // namespace dil
