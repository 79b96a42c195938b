#pragma once

// Low-lying spectra of the partner Hamiltonians, zero-mode counting, the
// Witten index and the contour winding number used to cross-check it.

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dil/error.hpp"
#include "dil/lattice.hpp"
#include "dil/opcalc.hpp"
#include "dil/susy.hpp"

namespace dil {

struct SolverOptions {
  double tol = 1e-8;            // eigen-residual ‖Av - λv‖ for unit v
  double shift = -1.0;          // shift-invert pole; must sit below the wanted eigenvalues
  int max_iterations = 200;  // restart cycles
  std::uint64_t seed = 20240611;
  Eigen::Index dense_limit = 800;
};

struct EigenReport {
  std::string matrix_id;
  std::vector<double> eigenvalues;  // ascending
  std::vector<Vector> vectors;      // unit 2-norm
  std::vector<double> residuals;
  double hermiticity_defect = 0.0;  // max |A - A†| before symmetrization
  std::string method;
  int iterations = 0;
};

inline Field mode_field(const EigenReport& r, std::size_t i, const GridSpec& grid) {
  const Vector& v = r.vectors.at(i);
  const auto nodes = static_cast<Eigen::Index>(grid.nodes());
  if (v.size() % nodes != 0) throw DimensionError("eigenvector length is not a multiple of the grid size");
  return {grid, static_cast<int>(v.size() / nodes), v};
}

namespace detail {

inline double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

inline void finish_report(EigenReport& rep, const SparseMatrix& A, const Eigen::VectorXd& vals,
                          const Eigen::MatrixXcd& vecs, Eigen::Index k) {
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector v = vecs.col(j);
    v /= v.norm();
    rep.eigenvalues.push_back(vals[j]);
    rep.residuals.push_back((A * v - vals[j] * v).norm());
    rep.vectors.push_back(std::move(v));
  }
}

// Solves (A - σ) y = x; Cholesky-type factorization first, LU if it fails.
class ShiftInvert {
 public:
  ShiftInvert(const SparseMatrix& A, double shift) {
    SparseMatrix shifted = A - Complex(shift, 0.0) * identity_matrix(A.rows());
    shifted.makeCompressed();
    ldlt_.compute(shifted);
    if (ldlt_.info() == Eigen::Success) {
      use_ldlt_ = true;
      return;
    }
    lu_.analyzePattern(shifted);
    lu_.factorize(shifted);
    if (lu_.info() != Eigen::Success) throw ConvergenceError("shift-invert factorization failed (shift hits the spectrum?)", 0, 0.0);
  }

  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& x) const {
    if (use_ldlt_) return ldlt_.solve(x);
    return lu_.solve(x);
  }

 private:
  bool use_ldlt_ = false;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
  Eigen::SparseLU<SparseMatrix> lu_;
};

}  // namespace detail

namespace detail {

// Removes the span of `basis` from `w` and orthonormalizes the block, column
// by column with two Gram-Schmidt passes. A column that loses almost all of
// its norm (the Krylov space became invariant) is replaced by a random vector
// from `rng`, so the result always has full rank.
inline Eigen::MatrixXcd orthonormal_complement(const Eigen::MatrixXcd& basis, Eigen::MatrixXcd w,
                                               std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index n = w.rows();
  if (basis.cols() + w.cols() > n) throw DimensionError("orthonormal_complement: block exceeds the space");
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (int attempt = 0;; ++attempt) {
      const double before = w.col(j).norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) w.col(j) -= basis * (basis.adjoint() * w.col(j));
        if (j > 0) w.col(j) -= w.leftCols(j) * (w.leftCols(j).adjoint() * w.col(j));
      }
      const double after = w.col(j).norm();
      if (before > 0.0 && after > 1e-12 * before) {
        w.col(j) /= after;
        break;
      }
      if (attempt == 8) throw ConvergenceError("could not extend an orthonormal basis", 0, 0.0);
      for (Eigen::Index i = 0; i < n; ++i) w(i, j) = Complex(gauss(rng), gauss(rng));
    }
  }
  return w;
}

}  // namespace detail

/// k smallest eigenpairs of a Hermitian matrix. Dense diagonalization up to
/// `dense_limit`; above it, restarted block Krylov iteration on (A - σ)^{-1}
/// with Rayleigh-Ritz extraction on A. Each cycle restarts from the best Ritz
/// block. The starting block is seeded, so results are repeatable.
inline EigenReport low_spectrum(const SparseMatrix& A_in, Eigen::Index k, const SolverOptions& opts = {},
                                std::string matrix_id = "") {
  if (A_in.rows() != A_in.cols()) throw DimensionError("low_spectrum needs a square matrix");
  if (k < 0) throw InvalidArgument("requested eigenpair count must be non-negative");
  EigenReport rep;
  rep.matrix_id = std::move(matrix_id);
  const SparseMatrix Ah = A_in.adjoint();
  rep.hermiticity_defect = detail::max_abs(SparseMatrix(A_in - Ah));
  const SparseMatrix A = 0.5 * (A_in + Ah);
  const Eigen::Index n = A.rows();
  k = std::min(k, n);
  if (k == 0) {
    rep.method = "none";
    return rep;
  }

  // The Krylov space needs at least two blocks; tiny matrices go dense.
  if (n <= opts.dense_limit || 2 * (k + 4) > n) {
    rep.method = "dense";
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0, 0.0);
    detail::finish_report(rep, A, es.eigenvalues(), es.eigenvectors(), k);
    return rep;
  }

  rep.method = "shift-invert block Krylov";
  const detail::ShiftInvert op(A, opts.shift);
  const Eigen::Index block = std::min(n, k + 4);
  const Eigen::Index blocks = std::max<Eigen::Index>(2, std::min<Eigen::Index>(8, n / block));

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = Complex(gauss(rng), gauss(rng));
  }
  X = detail::orthonormal_complement(Eigen::MatrixXcd(n, 0), X, rng);

  double worst = 0.0;
  int solves = 0;
  for (int cycle = 1; cycle <= opts.max_iterations; ++cycle) {
    Eigen::MatrixXcd V(n, blocks * block);
    V.leftCols(block) = X;
    for (Eigen::Index b = 1; b < blocks; ++b) {
      Eigen::MatrixXcd W = op.solve(V.middleCols((b - 1) * block, block));
      solves += static_cast<int>(block);
      V.middleCols(b * block, block) = detail::orthonormal_complement(V.leftCols(b * block), std::move(W), rng);
    }

    const Eigen::MatrixXcd AV = A * V;
    Eigen::MatrixXcd T = V.adjoint() * AV;
    T = 0.5 * (T + T.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T);
    const Eigen::MatrixXcd S = es.eigenvectors().leftCols(block);
    X = V * S;
    const Eigen::MatrixXcd AX = AV * S;

    worst = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      worst = std::max(worst, (AX.col(j) - es.eigenvalues()[j] * X.col(j)).norm());
    }
    if (worst <= opts.tol) {
      rep.iterations = cycle;
      detail::finish_report(rep, A, es.eigenvalues(), X, k);
      return rep;
    }
    X = detail::orthonormal_complement(Eigen::MatrixXcd(n, 0), X, rng);
  }
  throw ConvergenceError("block Krylov iteration did not converge in " + std::to_string(opts.max_iterations) +
                             " restarts (worst residual " + std::to_string(worst) + ", " + std::to_string(solves) +
                             " solves)",
                         opts.max_iterations, worst);
}

// Grows k until the spectrum window passes `bound` (or the matrix is exhausted).
inline EigenReport spectrum_through(const SparseMatrix& A, double bound, Eigen::Index k0, const SolverOptions& opts,
                                    const std::string& matrix_id) {
  Eigen::Index k = std::max<Eigen::Index>(k0, 1);
  while (true) {
    EigenReport r = low_spectrum(A, k, opts, matrix_id);
    if (r.eigenvalues.empty() || r.eigenvalues.back() > bound || k >= A.rows()) return r;
    k *= 2;
  }
}

// ---------------------------------------------------------------------------

struct ZeroModeCount {
  int count = 0;
  std::vector<std::size_t> indices;   // report positions of counted modes
  std::vector<double> fractions;      // their localization fractions
  std::vector<double> rejected;       // sub-threshold eigenvalues failing localization
  bool ambiguous = false;             // some eigenvalue within 10% of the threshold
  std::vector<std::string> warnings;
};

inline ZeroModeCount count_zero_modes(const EigenReport& r, const GridSpec& grid, double gap_threshold = 0.5,
                                      std::optional<double> loc_radius = std::nullopt, double loc_min = 0.95) {
  if (!(gap_threshold > 0.0)) throw InvalidArgument("gap threshold must be positive");
  const double radius = loc_radius.value_or(grid.half_width() / 2.0);
  ZeroModeCount out;
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    const double lambda = r.eigenvalues[i];
    if (std::abs(lambda - gap_threshold) <= 0.1 * gap_threshold) {
      out.ambiguous = true;
      out.warnings.push_back(r.matrix_id + ": eigenvalue " + std::to_string(lambda) + " lies within 10% of the gap threshold");
    }
    if (lambda >= gap_threshold) continue;
    const double frac = localization_fraction(mode_field(r, i, grid), radius);
    if (frac >= loc_min) {
      ++out.count;
      out.indices.push_back(i);
      out.fractions.push_back(frac);
    } else {
      out.rejected.push_back(lambda);
    }
  }
  if (!r.eigenvalues.empty() && r.eigenvalues.back() < gap_threshold) {
    out.warnings.push_back(r.matrix_id + ": spectrum window ends below the gap threshold; count may be incomplete");
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Phase winding of a multiplication operator around |z| = radius.
inline int winding_number(const OperatorExpression& multiplier, double radius = 1.0, int samples = 256) {
  if (multiplier.derivative_order() != 0) throw InvalidArgument("winding number needs a multiplication operator");
  if (samples < 64) throw InvalidArgument("winding number needs at least 64 contour samples");
  if (!(radius > 0.0)) throw InvalidArgument("contour radius must be positive");
  Polynomial poly;
  for (const auto& t : multiplier.terms()) poly.add(t.pow_z, t.pow_zbar, t.coeff);
  auto value = [&](int j) {
    const double theta = 2.0 * std::numbers::pi * j / samples;
    return poly.evaluate(std::polar(radius, theta));
  };
  Complex prev = value(0);
  if (std::abs(prev) < 1e-12) throw InvalidArgument("multiplier vanishes on the contour");
  double total = 0.0;
  for (int j = 1; j <= samples; ++j) {
    const Complex cur = value(j % samples);
    if (std::abs(cur) < 1e-12) throw InvalidArgument("multiplier vanishes on the contour");
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// ---------------------------------------------------------------------------

struct IndexParams {
  double gap_threshold = 0.5;  // fraction of the operator set's gap scale
  std::optional<double> loc_radius;  // default L/2
  double loc_min = 0.95;
  Eigen::Index k = 6;
  SolverOptions solver;
  double winding_radius = 1.0;
  int winding_samples = 256;
};

struct WittenIndexReport {
  int n_minus = 0;
  int n_plus = 0;
  int delta = 0;
  double gap_threshold = 0.0;       // effective (scaled) threshold
  double gap_threshold_base = 0.0;  // as configured
  double loc_radius = 0.0;
  double loc_min = 0.0;
  std::vector<double> localization_minus;
  std::vector<double> localization_plus;
  std::optional<int> winding;
  bool winding_agrees = false;
  bool ambiguous = false;
  std::vector<std::string> warnings;
  GridSpec grid{1.0, 8};
  EigenReport minus;
  EigenReport plus;
  ZeroModeCount minus_count;
  ZeroModeCount plus_count;
};

inline WittenIndexReport witten_index(const DefectOperatorSet& set, const GridSpec& grid, const IndexParams& params = {}) {
  WittenIndexReport rep;
  rep.grid = grid;
  rep.gap_threshold_base = params.gap_threshold;
  rep.gap_threshold = params.gap_threshold * set.gap_scale;
  rep.loc_radius = params.loc_radius.value_or(grid.half_width() / 2.0);
  rep.loc_min = params.loc_min;

  const DiscreteOperatorSet disc = discretize(set, grid);
  const double bound = 1.1 * rep.gap_threshold;  // covers the ambiguity band
  rep.minus = spectrum_through(disc.H_minus, bound, params.k, params.solver, "H_minus");
  rep.plus = spectrum_through(disc.H_plus, bound, params.k, params.solver, "H_plus");

  rep.minus_count = count_zero_modes(rep.minus, grid, rep.gap_threshold, rep.loc_radius, rep.loc_min);
  rep.plus_count = count_zero_modes(rep.plus, grid, rep.gap_threshold, rep.loc_radius, rep.loc_min);
  rep.n_minus = rep.minus_count.count;
  rep.n_plus = rep.plus_count.count;
  rep.delta = rep.n_minus - rep.n_plus;
  rep.localization_minus = rep.minus_count.fractions;
  rep.localization_plus = rep.plus_count.fractions;
  rep.ambiguous = rep.minus_count.ambiguous || rep.plus_count.ambiguous;
  rep.warnings = rep.minus_count.warnings;
  rep.warnings.insert(rep.warnings.end(), rep.plus_count.warnings.begin(), rep.plus_count.warnings.end());

  if (set.D.rows() >= 2 && set.D.cols() >= 1) {
    try {
      rep.winding = winding_number(set.D.at(1, 0), params.winding_radius, params.winding_samples);
    } catch (const InvalidArgument& e) {
      rep.warnings.push_back(std::string("winding number unavailable: ") + e.what());
    }
  }
  if (rep.winding) {
    rep.winding_agrees = (*rep.winding == rep.delta);
    if (!rep.winding_agrees) {
      rep.warnings.push_back("analytic index " + std::to_string(rep.delta) + " disagrees with winding number " +
                             std::to_string(*rep.winding));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct PairingReport {
  std::vector<std::pair<double, double>> matched;  // (H₋ value, H₊ value)
  std::vector<double> unmatched_minus;
  std::vector<double> unmatched_plus;
  double max_mismatch = 0.0;
  bool all_matched() const { return unmatched_minus.empty(); }
};

/// Matches every H₋ eigenvalue in (gap_threshold, cutoff) to the nearest unused
/// H₊ eigenvalue within tol.
inline PairingReport pairing_check(const EigenReport& rm, const EigenReport& rp, double gap_threshold, double cutoff,
                                   double tol) {
  PairingReport out;
  std::vector<bool> used(rp.eigenvalues.size(), false);
  for (double lm : rm.eigenvalues) {
    if (!(lm > gap_threshold && lm < cutoff)) continue;
    std::size_t best = rp.eigenvalues.size();
    double best_gap = tol;
    for (std::size_t j = 0; j < rp.eigenvalues.size(); ++j) {
      const double g = std::abs(rp.eigenvalues[j] - lm);
      if (!used[j] && g <= best_gap) {
        best = j;
        best_gap = g;
      }
    }
    if (best == rp.eigenvalues.size()) {
      out.unmatched_minus.push_back(lm);
    } else {
      used[best] = true;
      out.matched.emplace_back(lm, rp.eigenvalues[best]);
      out.max_mismatch = std::max(out.max_mismatch, best_gap);
    }
  }
  for (std::size_t j = 0; j < rp.eigenvalues.size(); ++j) {
    const double lp = rp.eigenvalues[j];
    if (!used[j] && lp > gap_threshold && lp < cutoff) out.unmatched_plus.push_back(lp);
  }
  return out;
}

}  // namespace dil
