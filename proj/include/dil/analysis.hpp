#pragma once

// Experiments built on top of the spectral layer: decay fits of zero modes,
// perturbation sweeps, grid-convergence studies and the quartet identities.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dil/error.hpp"
#include "dil/lattice.hpp"
#include "dil/spectral.hpp"
#include "dil/susy.hpp"

namespace dil {

struct DecayFit {
  double alpha = 0.0;
  double r_squared = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  int nodes = 0;
};

/// Weighted least-squares slope of log‖mode(z)‖ against -|z|² over the
/// annulus r_min ≤ |z| ≤ r_max, weights |mode|².
inline DecayFit fit_gaussian_decay(const Field& mode, double r_min = 0.5, double r_max = 2.5) {
  if (!(r_min >= 0.0 && r_max > r_min)) throw InvalidArgument("decay fit annulus must satisfy 0 <= r_min < r_max");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> xs, ys, ws;
  for (std::size_t k = 0; k < mode.grid().nodes(); ++k) {
    const double r = std::abs(mode.grid().coordinate(k));
    if (r < r_min || r > r_max) continue;
    const double rho = mode.density(k);
    if (!(rho > 0.0)) throw InvalidArgument("mode vanishes inside the decay-fit window");
    const double x = -r * r;
    const double y = 0.5 * std::log(rho);
    xs.push_back(x);
    ys.push_back(y);
    ws.push_back(rho);
  }
  if (xs.size() < 30) {
    throw InvalidArgument("decay-fit window holds " + std::to_string(xs.size()) + " nodes; at least 30 are required");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("decay-fit window has no radial spread");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + slope * xs[i]);
    ss_res += ws[i] * e * e;
    ss_tot += ws[i] * (ys[i] - my) * (ys[i] - my);
  }
  DecayFit fit;
  fit.alpha = slope;
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.r_min = r_min;
  fit.r_max = r_max;
  fit.nodes = static_cast<int>(xs.size());
  return fit;
}

// ---------------------------------------------------------------------------

struct SweepRow {
  double c = 0.0;            // requested ε·f1
  double c_effective = 0.0;  // including higher-order series terms
  int delta = 0;
  int n_minus = 0;
  int n_plus = 0;
  double alpha_fit = std::nan("");
  double alpha_predicted = std::nan("");
  double lowest_minus = std::nan("");
  std::optional<int> winding;
  bool ambiguous = false;
  std::optional<std::string> error;
};

// Model of one sweep point: ε is kept from the base model (1 when the base is
// unperturbed) and f1 is chosen so that ε·f1 = c.
inline ModelSpec sweep_model(const ModelSpec& base, double c) {
  ModelSpec m = base;
  m.epsilon = base.epsilon > 0.0 ? base.epsilon : 1.0;
  m.f1 = c / m.epsilon;
  return m;
}

inline SweepRow sweep_point(const ModelSpec& model, double c, const GridSpec& grid, const IndexParams& params) {
  SweepRow row;
  row.c = c;
  try {
    row.c_effective = model.perturbation();
    model.validate();
    row.alpha_predicted = std::abs(model.t) * std::sqrt(model.multiplier());
    const WittenIndexReport rep = witten_index(build_operator_set(model), grid, params);
    row.delta = rep.delta;
    row.n_minus = rep.n_minus;
    row.n_plus = rep.n_plus;
    row.winding = rep.winding;
    row.ambiguous = rep.ambiguous;
    if (!rep.minus.eigenvalues.empty()) row.lowest_minus = rep.minus.eigenvalues.front();
    if (rep.minus_count.indices.empty()) throw InvariantError("no localized zero mode of H_minus to fit");
    row.alpha_fit = fit_gaussian_decay(mode_field(rep.minus, rep.minus_count.indices.front(), grid)).alpha;
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

/// One row per c, in input order; failures are recorded per row.
inline std::vector<SweepRow> perturbation_sweep(const std::vector<double>& c_values, const GridSpec& grid,
                                                const ModelSpec& base = {}, const IndexParams& params = {}) {
  std::vector<SweepRow> rows;
  rows.reserve(c_values.size());
  for (double c : c_values) rows.push_back(sweep_point(sweep_model(base, c), c, grid, params));
  return rows;
}

// ---------------------------------------------------------------------------

struct ConvergenceReport {
  std::vector<GridSpec> grids;
  std::vector<double> h;
  std::vector<double> lowest;   // smallest H₋ eigenvalue (exact: 0)
  std::vector<double> second;   // second H₋ eigenvalue (exact: 1)
  double order_lowest = 0.0;
  double order_second = 0.0;
  bool monotone = true;
  std::vector<std::string> warnings;
};

namespace detail {

inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

}  // namespace detail

/// Error of the two lowest H₋ eigenvalues of the unperturbed operator against
/// their exact values 0 and 1, fitted as C·h^p over the given grids.
inline ConvergenceReport convergence_study(std::vector<GridSpec> grids, const SolverOptions& solver = {}) {
  if (grids.size() < 3) throw InvalidArgument("convergence study needs at least 3 grids");
  std::sort(grids.begin(), grids.end(), [](const GridSpec& a, const GridSpec& b) { return a.h() > b.h(); });
  for (std::size_t i = 1; i < grids.size(); ++i) {
    if (std::abs(grids[i].h() - grids[i - 1].h()) <= 1e-12 * grids[i].h()) {
      throw InvalidArgument("convergence study needs grids with distinct spacing");
    }
  }
  const DefectOperatorSet set = build_operator_set(ModelSpec{});
  ConvergenceReport rep;
  rep.grids = grids;
  std::vector<double> e1, e2;
  for (const auto& g : grids) {
    const SparseMatrix hm = discretize(set.H_minus, g);
    const EigenReport r = low_spectrum(hm, 3, solver, "H_minus");
    rep.h.push_back(g.h());
    rep.lowest.push_back(r.eigenvalues.at(0));
    rep.second.push_back(r.eigenvalues.at(1));
    e1.push_back(std::abs(r.eigenvalues.at(0)));
    e2.push_back(std::abs(r.eigenvalues.at(1) - 1.0));
  }
  for (std::size_t i = 1; i < e1.size(); ++i) {
    if (!(e1[i] < e1[i - 1])) rep.monotone = false;
  }
  if (!rep.monotone) rep.warnings.push_back("lowest-eigenvalue error is not monotone in h");
  rep.order_lowest = detail::fit_loglog_slope(rep.h, e1);
  rep.order_second = detail::fit_loglog_slope(rep.h, e2);
  return rep;
}

// ---------------------------------------------------------------------------

struct AlgebraResiduals {
  double q_squared = 0;               // Q²
  double qdag_squared = 0;            // (Q†)²
  double anticommutator = 0;          // {Q, Q†} - H
  double w_ham_commutator = 0;        // [W, H]
  double w_q_anticommutator = 0;      // {W, Q}
  double w_qdag_anticommutator = 0;   // {W, Q†}
  double w_squared = 0;               // W² - I

  double max() const {
    return std::max({q_squared, qdag_squared, anticommutator, w_ham_commutator, w_q_anticommutator,
                     w_qdag_anticommutator, w_squared});
  }
};

/// Max-norm residuals; quadratic identities relative to max(1, ‖H‖_max),
/// parity identities of the supercharges relative to max(1, ‖Q‖_max).
inline AlgebraResiduals algebra_check(const SusyQuartet& q) {
  const double sh = std::max(1.0, detail::max_abs(q.Ham));
  const double sq = std::max(1.0, std::max(detail::max_abs(q.Q), detail::max_abs(q.Q_dag)));
  auto m = [](const SparseMatrix& a) { return detail::max_abs(a); };
  SparseMatrix I(q.W.rows(), q.W.cols());
  I.setIdentity();
  AlgebraResiduals r;
  r.q_squared = m(q.Q * q.Q) / sh;
  r.qdag_squared = m(q.Q_dag * q.Q_dag) / sh;
  r.anticommutator = m(SparseMatrix(q.Q * q.Q_dag) + SparseMatrix(q.Q_dag * q.Q) - q.Ham) / sh;
  r.w_ham_commutator = m(SparseMatrix(q.W * q.Ham) - SparseMatrix(q.Ham * q.W)) / sh;
  r.w_q_anticommutator = m(SparseMatrix(q.W * q.Q) + SparseMatrix(q.Q * q.W)) / sq;
  r.w_qdag_anticommutator = m(SparseMatrix(q.W * q.Q_dag) + SparseMatrix(q.Q_dag * q.W)) / sq;
  r.w_squared = m(SparseMatrix(q.W * q.W) - I);
  return r;
}

}  // namespace dil
