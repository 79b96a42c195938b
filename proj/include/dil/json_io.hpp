#pragma once

// JSON and CSV renderings of reports (schema_version 1).

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "json.hpp"

#include "dil/analysis.hpp"
#include "dil/config.hpp"
#include "dil/spectral.hpp"
#include "dil/susy.hpp"

namespace dil {

inline constexpr int kSchemaVersion = 1;

namespace detail {

// NaN has no JSON spelling; absent values become null.
inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace detail

inline nlohmann::json to_json(const GridSpec& g) {
  return {{"L", g.half_width()}, {"n", g.n()}, {"h", g.h()}};
}

inline nlohmann::json to_json(const ModelSpec& m) {
  return {{"t", m.t},
          {"epsilon", m.epsilon},
          {"f1", m.f1},
          {"f1_series", m.f1_series},
          {"f2", m.f2},
          {"multiplier", m.multiplier()}};
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"grid.L", c.grid_L},
          {"grid.n", c.grid_n},
          {"model.t", c.model.t},
          {"model.epsilon", c.model.epsilon},
          {"model.f1", c.model.f1},
          {"model.f1_series", c.model.f1_series},
          {"model.f2", c.model.f2},
          {"solver.tol", c.solver_tol},
          {"solver.k", c.solver_k},
          {"solver.max_iterations", c.solver_max_iterations},
          {"index.gap_threshold", c.gap_threshold},
          {"index.loc_radius", c.resolved_loc_radius()},
          {"index.loc_min", c.loc_min},
          {"sweep.c_values", c.c_values},
          {"seed", c.seed},
          {"winding.radius", c.winding_radius},
          {"winding.samples", c.winding_samples}};
}

inline nlohmann::json to_json(const EigenReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"matrix_id", r.matrix_id},
          {"eigenvalues", r.eigenvalues},
          {"residuals", r.residuals},
          {"hermiticity_defect", r.hermiticity_defect},
          {"method", r.method},
          {"iterations", r.iterations}};
}

inline nlohmann::json to_json(const WittenIndexReport& r) {
  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"n_minus", r.n_minus},
                      {"n_plus", r.n_plus},
                      {"delta", r.delta},
                      {"gap_threshold", r.gap_threshold},
                      {"gap_threshold_base", r.gap_threshold_base},
                      {"loc_radius", r.loc_radius},
                      {"loc_min", r.loc_min},
                      {"localization_fractions", {{"minus", r.localization_minus}, {"plus", r.localization_plus}}},
                      {"winding", r.winding ? nlohmann::json(*r.winding) : nlohmann::json()},
                      {"winding_agrees", r.winding_agrees},
                      {"ambiguous", r.ambiguous},
                      {"warnings", r.warnings},
                      {"grid", to_json(r.grid)},
                      {"spectra", {{"minus", to_json(r.minus)}, {"plus", to_json(r.plus)}}}};
  return j;
}

inline nlohmann::json to_json(const DecayFit& f) {
  return {{"schema_version", kSchemaVersion},
          {"alpha", f.alpha},
          {"r_squared", f.r_squared},
          {"window", {f.r_min, f.r_max}},
          {"nodes", f.nodes}};
}

inline nlohmann::json to_json(const SweepRow& r) {
  return {{"c", r.c},
          {"c_effective", r.c_effective},
          {"delta", r.delta},
          {"n_minus", r.n_minus},
          {"n_plus", r.n_plus},
          {"alpha_fit", detail::number_or_null(r.alpha_fit)},
          {"alpha_predicted", detail::number_or_null(r.alpha_predicted)},
          {"alpha_error", detail::number_or_null(r.alpha_fit - r.alpha_predicted)},
          {"lowest_minus", detail::number_or_null(r.lowest_minus)},
          {"winding", r.winding ? nlohmann::json(*r.winding) : nlohmann::json()},
          {"ambiguous", r.ambiguous},
          {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json()}};
}

inline nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json grids = nlohmann::json::array();
  for (const auto& g : r.grids) grids.push_back(to_json(g));
  return {{"grids", grids},
          {"h", r.h},
          {"lowest", r.lowest},
          {"second", r.second},
          {"order_lowest", r.order_lowest},
          {"order_second", r.order_second},
          {"monotone", r.monotone},
          {"warnings", r.warnings}};
}

inline nlohmann::json to_json(const AlgebraResiduals& r) {
  return {{"q_squared", r.q_squared},
          {"qdag_squared", r.qdag_squared},
          {"anticommutator_minus_ham", r.anticommutator},
          {"w_ham_commutator", r.w_ham_commutator},
          {"w_q_anticommutator", r.w_q_anticommutator},
          {"w_qdag_anticommutator", r.w_qdag_anticommutator},
          {"w_squared_minus_identity", r.w_squared},
          {"max", r.max()}};
}

inline nlohmann::json to_json(const PairingReport& p) {
  nlohmann::json matched = nlohmann::json::array();
  for (const auto& [a, b] : p.matched) matched.push_back({a, b});
  return {{"matched", matched},
          {"unmatched_minus", p.unmatched_minus},
          {"unmatched_plus", p.unmatched_plus},
          {"max_mismatch", p.max_mismatch},
          {"all_matched", p.all_matched()}};
}

// ---------------------------------------------------------------------------
// CSV tables

namespace detail {

inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "c,c_effective,delta,n_minus,n_plus,alpha_fit,alpha_predicted,lowest_minus,winding,error\n";
  for (const auto& r : rows) {
    std::string err = r.error.value_or("");
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    os << detail::csv_number(r.c) << ',' << detail::csv_number(r.c_effective) << ',' << r.delta << ',' << r.n_minus
       << ',' << r.n_plus << ',' << detail::csv_number(r.alpha_fit) << ',' << detail::csv_number(r.alpha_predicted)
       << ',' << detail::csv_number(r.lowest_minus) << ',' << (r.winding ? std::to_string(*r.winding) : "") << ','
       << err << '\n';
  }
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& r) {
  os << "L,n,h,lowest,second,error_lowest,error_second\n";
  for (std::size_t i = 0; i < r.grids.size(); ++i) {
    os << detail::csv_number(r.grids[i].half_width()) << ',' << r.grids[i].n() << ',' << detail::csv_number(r.h[i])
       << ',' << detail::csv_number(r.lowest[i]) << ',' << detail::csv_number(r.second[i]) << ','
       << detail::csv_number(std::abs(r.lowest[i])) << ',' << detail::csv_number(std::abs(r.second[i] - 1.0)) << '\n';
  }
}

inline void write_spectrum_csv(std::ostream& os, const EigenReport& r) {
  os << "index,eigenvalue,residual\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    os << i << ',' << detail::csv_number(r.eigenvalues[i]) << ',' << detail::csv_number(r.residuals[i]) << '\n';
  }
}

}  // namespace dil
