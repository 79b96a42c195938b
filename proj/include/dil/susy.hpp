#pragma once

// The defect operator family, its discrete N=2 quartet (Q, Q†, H, W) and the
// Z2-graded layer built on Witten parity.

#include <cmath>
#include <string>
#include <vector>

#include "dil/error.hpp"
#include "dil/lattice.hpp"
#include "dil/opcalc.hpp"

namespace dil {

struct ModelSpec {
  double t = 1.0;
  double epsilon = 0.0;
  double f1 = 0.0;
  std::vector<double> f1_series;  // coefficient of epsilon^(k+2)
  double f2 = 0.0;                // carried through reports only

  // 1 - ε f1 - ε² f1_series[0] - ε³ f1_series[1] - ...
  Rational multiplier_exact() const {
    const Rational eps = rationalize(epsilon);
    Rational m = 1 - eps * rationalize(f1);
    Rational power = eps * eps;
    for (double c : f1_series) {
      m -= power * rationalize(c);
      power *= eps;
    }
    return m;
  }
  double multiplier() const { return to_double(multiplier_exact()); }
  // Total strength c of the perturbation, so that the multiplier is 1 - c.
  double perturbation() const { return to_double(1 - multiplier_exact()); }

  void validate() const {
    if (!std::isfinite(t) || t == 0.0) throw InvariantError("model.t must be finite and nonzero");
    if (!std::isfinite(epsilon) || epsilon < 0.0) throw InvariantError("model.epsilon must be finite and >= 0");
    if (!std::isfinite(f1) || !std::isfinite(f2)) throw InvariantError("model.f1 and model.f2 must be finite");
    for (double c : f1_series) {
      if (!std::isfinite(c)) throw InvariantError("model.f1_series entries must be finite");
    }
    if (multiplier_exact() <= 0) {
      throw InvariantError("epsilon*f1 (plus higher-order series) must stay below 1; got perturbation " +
                           std::to_string(perturbation()));
    }
  }
};

/// [[∂, t·m·z̄], [t·z, ∂̄]] with m the metric multiplier of the model.
inline BlockOperator build_defect_operator(const ModelSpec& spec) {
  spec.validate();
  const ComplexRational t(rationalize(spec.t));
  BlockOperator d(2, 2);
  d.at(0, 0) = OperatorExpression::d();
  d.at(0, 1) = (t * ComplexRational(spec.multiplier_exact())) * OperatorExpression::zbar();
  d.at(1, 0) = t * OperatorExpression::z();
  d.at(1, 1) = OperatorExpression::dbar();
  return d;
}

// K = D_ε - D_0; strictly upper triangular.
inline BlockOperator build_perturbation(const ModelSpec& spec) {
  ModelSpec unperturbed = spec;
  unperturbed.epsilon = 0.0;
  return build_defect_operator(spec) - build_defect_operator(unperturbed);
}

struct DefectOperatorSet {
  BlockOperator D;
  BlockOperator D_adj;
  BlockOperator K;
  BlockOperator H_minus;  // D† D
  BlockOperator H_plus;   // D D†
  // Expected size of the first nonzero level of H±; zero-mode thresholds are
  // expressed as a fraction of it.
  double gap_scale = 1.0;
};

inline DefectOperatorSet make_operator_set(const BlockOperator& D, double gap_scale = 1.0,
                                           const BlockOperator* K = nullptr) {
  if (D.rows() != D.cols()) throw DimensionError("defect operator must be square");
  if (!(gap_scale > 0.0)) throw InvalidArgument("gap scale must be positive");
  BlockOperator adj = adjoint(D);
  BlockOperator hm = compose(adj, D);
  BlockOperator hp = compose(D, adj);
  BlockOperator k = K ? *K : BlockOperator(D.rows(), D.cols());
  return {D, std::move(adj), std::move(k), std::move(hm), std::move(hp), gap_scale};
}

// Mass entries scale with |t| and the weaker of them with the multiplier m;
// the first excited level of H± sits above |t|·min(1, m)².
inline double model_gap_scale(const ModelSpec& spec) {
  const double m = std::min(1.0, spec.multiplier());
  return std::abs(spec.t) * m * m;
}

inline DefectOperatorSet build_operator_set(const ModelSpec& spec) {
  const BlockOperator K = build_perturbation(spec);
  return make_operator_set(build_defect_operator(spec), model_gap_scale(spec), &K);
}

struct DiscreteOperatorSet {
  GridSpec grid;
  SparseMatrix D;
  SparseMatrix D_adj;
  SparseMatrix H_minus;
  SparseMatrix H_plus;
};

// H± are discretized from their symbolic compositions, never as products of
// the discrete D with its conjugate transpose: a square matrix and its adjoint
// always have the same number of zero modes, which would erase the index.
inline DiscreteOperatorSet discretize(const DefectOperatorSet& set, const GridSpec& grid) {
  return {grid, discretize(set.D, grid), discretize(set.D_adj, grid), discretize(set.H_minus, grid),
          discretize(set.H_plus, grid)};
}

// ---------------------------------------------------------------------------
// quartet

struct SusyQuartet {
  SparseMatrix Q;
  SparseMatrix Q_dag;
  SparseMatrix Ham;
  SparseMatrix W;
};

inline SparseMatrix witten_parity(Eigen::Index sector_dim) {
  SparseMatrix w(2 * sector_dim, 2 * sector_dim);
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(2 * sector_dim));
  for (Eigen::Index k = 0; k < sector_dim; ++k) {
    trips.emplace_back(k, k, 1.0);
    trips.emplace_back(sector_dim + k, sector_dim + k, -1.0);
  }
  w.setFromTriplets(trips.begin(), trips.end());
  return w;
}

namespace detail {

inline void append_block(std::vector<Triplet>& out, const SparseMatrix& block, Eigen::Index r0, Eigen::Index c0) {
  for (Eigen::Index col = 0; col < block.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(block, col); it; ++it) out.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
  }
}

}  // namespace detail

/// Q = [[0, D], [0, 0]], Q† = [[0, 0], [D†, 0]], H = [[DD†, 0], [0, D†D]],
/// W = diag(I, -I), on H⁺ ⊕ H⁻.
inline SusyQuartet build_susy_quartet(const SparseMatrix& D) {
  if (D.rows() != D.cols()) throw DimensionError("discrete defect operator must be square");
  const Eigen::Index n = D.rows();
  const SparseMatrix Dh = D.adjoint();
  const SparseMatrix DDh = D * Dh;
  const SparseMatrix DhD = Dh * D;

  std::vector<Triplet> tq, tqd, th;
  detail::append_block(tq, D, 0, n);
  detail::append_block(tqd, Dh, n, 0);
  detail::append_block(th, DDh, 0, 0);
  detail::append_block(th, DhD, n, n);

  SusyQuartet q;
  q.Q.resize(2 * n, 2 * n);
  q.Q_dag.resize(2 * n, 2 * n);
  q.Ham.resize(2 * n, 2 * n);
  q.Q.setFromTriplets(tq.begin(), tq.end());
  q.Q_dag.setFromTriplets(tqd.begin(), tqd.end());
  q.Ham.setFromTriplets(th.begin(), th.end());
  q.W = witten_parity(n);
  return q;
}

// ---------------------------------------------------------------------------
// Z2 grading

enum class Parity { even, odd, indefinite };

inline const char* to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    case Parity::indefinite: return "indefinite";
  }
  return "?";
}

inline Parity parity_classify(const SparseMatrix& A, const SparseMatrix& W, double tol = 1e-10) {
  if (A.rows() != W.rows() || A.cols() != W.cols()) throw DimensionError("operator and parity have different shapes");
  const double scale = A.norm();
  const SparseMatrix WA = W * A;
  const SparseMatrix AW = A * W;
  if (SparseMatrix(WA - AW).norm() <= tol * scale) return Parity::even;
  if (SparseMatrix(WA + AW).norm() <= tol * scale) return Parity::odd;
  return Parity::indefinite;
}

// Lifts a block-operator-sized matrix acting on one sector to the doubled
// space as [[0, A], [0, 0]] (odd, like Q).
inline SparseMatrix embed_odd(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw DimensionError("odd embedding needs a square operator");
  std::vector<Triplet> trips;
  detail::append_block(trips, A, 0, A.rows());
  SparseMatrix out(2 * A.rows(), 2 * A.rows());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

struct GradedVector {
  Field plus;
  Field minus;

  GradedVector(Field p, Field m) : plus(std::move(p)), minus(std::move(m)) {
    if (!(plus.grid() == minus.grid()) || plus.components() != minus.components()) {
      throw DimensionError("graded sectors must have the same shape");
    }
  }

  Eigen::Index sector_dim() const { return plus.values().size(); }

  Vector stacked() const {
    Vector v(2 * sector_dim());
    v << plus.values(), minus.values();
    return v;
  }

  static GradedVector from_stacked(const Vector& v, const GridSpec& grid, int components) {
    const Eigen::Index half = v.size() / 2;
    return {Field(grid, components, v.head(half)), Field(grid, components, v.tail(half))};
  }
};

struct GradedOperator {
  SparseMatrix matrix;
  Parity parity = Parity::indefinite;
};

inline GradedOperator make_graded(const SparseMatrix& A, double tol = 1e-10) {
  if (A.rows() != A.cols() || A.rows() % 2 != 0) throw DimensionError("graded operator must be square of even size");
  return {A, parity_classify(A, witten_parity(A.rows() / 2), tol)};
}

/// P± = (I ± W)/2.
inline GradedVector project(const GradedVector& v, int sign) {
  if (sign != 1 && sign != -1) throw InvalidArgument("projection sign must be +1 or -1");
  const SparseMatrix W = witten_parity(v.sector_dim());
  const Vector x = v.stacked();
  const Vector y = 0.5 * (x + static_cast<double>(sign) * (W * x));
  return GradedVector::from_stacked(y, v.plus.grid(), v.plus.components());
}

// Norm of the component that lands in the sector forbidden by the module
// table (even: H± -> H±, odd: H± -> H∓).
inline double module_leakage(const GradedOperator& A, const GradedVector& v) {
  if (A.parity == Parity::indefinite) throw InvalidArgument("module leakage is undefined for indefinite parity");
  const Vector x = v.stacked();
  const Eigen::Index n = v.sector_dim();
  Vector xp = x;
  xp.tail(n).setZero();
  Vector xm = x;
  xm.head(n).setZero();
  const Vector yp = A.matrix * xp;
  const Vector ym = A.matrix * xm;
  if (A.parity == Parity::even) return std::hypot(yp.tail(n).norm(), ym.head(n).norm());
  return std::hypot(yp.head(n).norm(), ym.tail(n).norm());
}

inline GradedVector graded_apply(const GradedOperator& A, const GradedVector& v, double tol = 1e-10) {
  if (A.parity == Parity::indefinite) throw InvalidArgument("graded_apply needs an operator of definite parity");
  if (A.matrix.cols() != 2 * v.sector_dim()) throw DimensionError("operator does not act on this graded space");
  const double leak = module_leakage(A, v);
  const double scale = A.matrix.norm() * v.stacked().norm();
  if (leak > tol * scale) {
    throw InvariantError("graded_apply output violates the module parity table (leakage " + std::to_string(leak) + ")");
  }
  return GradedVector::from_stacked(A.matrix * v.stacked(), v.plus.grid(), v.plus.components());
}

// The fermion pair lives in the odd sector.
inline GradedVector physical_state_embed(const Field& pair) {
  if (pair.components() != 2) throw InvalidArgument("physical state embedding expects a two-component field");
  return {Field(pair.grid(), 2), pair};
}

}  // namespace dil
