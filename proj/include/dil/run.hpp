#pragma once

// Subcommand orchestration shared by the command-line tool and the
// integration tests. Each subcommand produces a JSON report plus optional
// CSV side files; the caller decides where they go.

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dil/analysis.hpp"
#include "dil/config.hpp"
#include "dil/json_io.hpp"
#include "dil/opcalc.hpp"
#include "dil/random.hpp"
#include "dil/spectral.hpp"
#include "dil/susy.hpp"

namespace dil {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitPass = 0, kExitFailed = 1, kExitConfig = 2, kExitSolver = 3 };

struct RunOptions {
  bool serial = false;
};

struct SideFile {
  std::string suffix;  // appended to the report stem, e.g. ".sweep.csv"
  std::string content;
};

struct RunResult {
  nlohmann::json report;
  std::vector<SideFile> side_files;
  int exit_code = kExitPass;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"algebra-check", "index",   "zero-modes",     "sweep",
                                                 "convergence",   "winding", "opcalc-selftest"};
  return names;
}

namespace detail {

struct Check {
  std::string name;
  bool passed;
};

struct Outcome {
  nlohmann::json results;
  std::vector<Check> checks;
  std::vector<SideFile> side_files;
};

inline std::optional<Rational> exact_sqrt(const Rational& r) {
  if (r < 0) return std::nullopt;
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  const BigInt sn = boost::multiprecision::sqrt(num);
  const BigInt sd = boost::multiprecision::sqrt(den);
  if (sn * sn != num || sd * sd != den) return std::nullopt;
  return Rational(sn, sd);
}

// (−∂∂̄ + z z̄) on the diagonal of a 2x2 block.
inline BlockOperator oscillator_block() {
  const OperatorExpression osc = OperatorExpression::term(-1, 0, 0, 1, 1) + OperatorExpression::term(1, 1, 1, 0, 0);
  BlockOperator b(2, 2);
  b.at(0, 0) = osc;
  b.at(1, 1) = osc;
  return b;
}

inline Outcome run_algebra_check(const ExperimentConfig& cfg) {
  const DefectOperatorSet set = build_operator_set(cfg.model);
  const SparseMatrix D = discretize(set.D, cfg.grid());
  const SusyQuartet q = build_susy_quartet(D);
  const AlgebraResiduals r = algebra_check(q);
  Outcome o;
  o.results = {{"residuals", to_json(r)}, {"threshold", 1e-12}, {"dimension", q.Ham.rows()}};
  o.checks.push_back({"all residuals <= 1e-12", r.max() <= 1e-12});
  o.checks.push_back({"W^2 - I exactly zero", r.w_squared == 0.0});
  return o;
}

inline Outcome run_index(const ExperimentConfig& cfg) {
  const WittenIndexReport rep = witten_index(build_operator_set(cfg.model), cfg.grid(), cfg.index_params());
  Outcome o;
  o.results = to_json(rep);
  o.results["model"] = to_json(cfg.model);
  o.checks.push_back({"winding number available", rep.winding.has_value()});
  o.checks.push_back({"delta equals winding number", rep.winding_agrees});
  std::ostringstream sm, sp;
  write_spectrum_csv(sm, rep.minus);
  write_spectrum_csv(sp, rep.plus);
  o.side_files.push_back({".spectrum_minus.csv", sm.str()});
  o.side_files.push_back({".spectrum_plus.csv", sp.str()});
  return o;
}

inline Outcome run_zero_modes(const ExperimentConfig& cfg) {
  const GridSpec grid = cfg.grid();
  const WittenIndexReport rep = witten_index(build_operator_set(cfg.model), grid, cfg.index_params());
  const double predicted = std::abs(cfg.model.t) * std::sqrt(cfg.model.multiplier());
  Outcome o;
  nlohmann::json modes = nlohmann::json::array();
  bool fits_ok = !rep.minus_count.indices.empty();
  for (std::size_t m = 0; m < rep.minus_count.indices.size(); ++m) {
    const std::size_t idx = rep.minus_count.indices[m];
    const Field f = mode_field(rep.minus, idx, grid);
    nlohmann::json entry = {{"eigenvalue", rep.minus.eigenvalues[idx]},
                            {"localization_fraction", rep.minus_count.fractions[m]},
                            {"localization_fraction_r2", localization_fraction(f, std::min(2.0, grid.half_width()))}};
    try {
      const DecayFit fit = fit_gaussian_decay(f);
      entry["decay_fit"] = to_json(fit);
      fits_ok = fits_ok && std::abs(fit.alpha - predicted) <= 0.02 * predicted;
    } catch (const InvalidArgument& e) {
      entry["decay_fit"] = nullptr;
      entry["decay_fit_error"] = e.what();
      fits_ok = false;
    }
    modes.push_back(entry);
    std::ostringstream csv;
    write_field_csv(csv, f);
    o.side_files.push_back({".mode" + std::to_string(m) + ".csv", csv.str()});
  }
  o.results = {{"n_minus", rep.n_minus},
               {"n_plus", rep.n_plus},
               {"alpha_predicted", predicted},
               {"modes", modes},
               {"index", to_json(rep)}};
  o.checks.push_back({"at least one localized zero mode of H_minus", rep.n_minus >= 1});
  o.checks.push_back({"decay rate within 2% of prediction", fits_ok});
  return o;
}

inline Outcome run_sweep(const ExperimentConfig& cfg) {
  const auto rows = perturbation_sweep(cfg.c_values, cfg.grid(), cfg.model, cfg.index_params());
  Outcome o;
  nlohmann::json jr = nlohmann::json::array();
  bool no_errors = true;
  bool agrees = true;
  for (const auto& r : rows) {
    jr.push_back(to_json(r));
    no_errors = no_errors && !r.error;
    agrees = agrees && r.winding && *r.winding == r.delta;
  }
  o.results = {{"rows", jr}};
  o.checks.push_back({"no per-row failures", no_errors});
  o.checks.push_back({"delta equals winding number in every row", agrees});
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  o.side_files.push_back({".sweep.csv", csv.str()});
  return o;
}

// Grids (L, n/2), (L, n), (L, 2n - 1): each step halves h.
inline std::vector<GridSpec> convergence_grids(const ExperimentConfig& cfg) {
  const int n = cfg.grid_n;
  return {GridSpec(cfg.grid_L, std::max(8, n / 2)), GridSpec(cfg.grid_L, n), GridSpec(cfg.grid_L, 2 * n - 1)};
}

inline Outcome run_convergence(const ExperimentConfig& cfg) {
  const ConvergenceReport rep = convergence_study(convergence_grids(cfg), cfg.solver());
  Outcome o;
  o.results = to_json(rep);
  o.checks.push_back({"second-eigenvalue order in [1.7, 2.3]", rep.order_second >= 1.7 && rep.order_second <= 2.3});
  std::ostringstream csv;
  write_convergence_csv(csv, rep);
  o.side_files.push_back({".convergence.csv", csv.str()});
  return o;
}

inline Outcome run_winding(const ExperimentConfig& cfg) {
  const BlockOperator D = build_defect_operator(cfg.model);
  const OperatorExpression& entry = D.at(1, 0);
  Outcome o;
  o.results = {{"entry", render(entry)}, {"radius", cfg.winding_radius}, {"samples", cfg.winding_samples},
               {"winding", nullptr},      {"expected", 1}};
  try {
    const int w = winding_number(entry, cfg.winding_radius, cfg.winding_samples);
    o.results["winding"] = w;
    o.checks.push_back({"single simple zero enclosed", w == 1});
  } catch (const InvalidArgument& e) {
    o.results["error"] = e.what();
    o.checks.push_back({"single simple zero enclosed", false});
  }
  return o;
}

inline Outcome run_opcalc_selftest(const ExperimentConfig& cfg) {
  Outcome o;
  ModelSpec flat;
  const BlockOperator DF = build_defect_operator(flat);
  const BlockOperator DFa = adjoint(DF);
  BlockOperator sigma_x(2, 2);
  sigma_x.at(0, 1) = OperatorExpression::constant(-1);
  sigma_x.at(1, 0) = OperatorExpression::constant(-1);
  const BlockOperator hm = compose(DFa, DF);
  const BlockOperator hp = compose(DF, DFa);
  o.checks.push_back({"adjoint(D_F) D_F closed form", hm == oscillator_block() + sigma_x});
  o.checks.push_back({"D_F adjoint(D_F) closed form", hp == oscillator_block()});
  o.checks.push_back({"adjoint involutive on D_F", adjoint(DFa) == DF});

  std::mt19937_64 rng(cfg.seed);
  bool involutive = true;
  bool anti = true;
  for (int i = 0; i < 100; ++i) {
    const BlockOperator a = random_block(rng, 2, 2);
    const BlockOperator b = random_block(rng, 2, 2);
    involutive = involutive && adjoint(adjoint(a)) == a;
    anti = anti && adjoint(compose(a, b)) == compose(adjoint(b), adjoint(a));
  }
  o.checks.push_back({"adjoint involutive on 100 random operators", involutive});
  o.checks.push_back({"adjoint anti-multiplicative on 100 random pairs", anti});

  const BlockOperator D = build_defect_operator(cfg.model);
  const Rational t = rationalize(cfg.model.t);
  nlohmann::json zero_mode = nullptr;
  if (const auto alpha = exact_sqrt(t * t * cfg.model.multiplier_exact())) {
    // (α/t, 1)·e^{-α|z|²} solves D ψ = 0 when α² = t² m.
    const std::vector<GaussianAnsatz> pair = {
        GaussianAnsatz(*alpha, Polynomial::constant(ComplexRational(*alpha / t))),
        GaussianAnsatz(*alpha, Polynomial::constant(1))};
    const auto image = gaussian_apply(D, pair);
    const bool annihilated = image[0].poly.is_zero() && image[1].poly.is_zero();
    o.checks.push_back({"model zero-mode ansatz annihilated exactly", annihilated});
    zero_mode = {{"alpha", to_string(*alpha)}, {"annihilated", annihilated}};
  }

  const bool round_trip = parse_block(render(D)) == D && parse_block(render(hm)) == hm;
  o.checks.push_back({"text rendering round-trips", round_trip});

  o.results = {{"defect_operator", render(D)},
               {"H_minus_flat", render(hm)},
               {"H_plus_flat", render(hp)},
               {"zero_mode_ansatz", zero_mode}};
  return o;
}

inline const std::map<std::string, std::function<Outcome(const ExperimentConfig&)>>& dispatch() {
  static const std::map<std::string, std::function<Outcome(const ExperimentConfig&)>> table = {
      {"algebra-check", run_algebra_check}, {"index", run_index},         {"zero-modes", run_zero_modes},
      {"sweep", run_sweep},                 {"convergence", run_convergence}, {"winding", run_winding},
      {"opcalc-selftest", run_opcalc_selftest}};
  return table;
}

}  // namespace detail

inline nlohmann::json module_versions() {
  return {{"opcalc", kVersion}, {"lattice", kVersion}, {"susy", kVersion},
          {"spectral", kVersion}, {"analysis", kVersion}, {"cli", kVersion}};
}

/// Runs one subcommand on a validated config. Solver failures propagate as
/// ConvergenceError; configuration problems as ConfigError.
inline RunResult run(const std::string& subcommand, const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  const auto& table = detail::dispatch();
  const auto it = table.find(subcommand);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  cfg.validate();

  const auto start = std::chrono::steady_clock::now();
  detail::Outcome outcome = it->second(cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bool pass = true;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : outcome.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}});
    pass = pass && c.passed;
  }

  RunResult result;
  result.report = {{"schema_version", kSchemaVersion},
                   {"tool", "dil"},
                   {"module_versions", module_versions()},
                   {"subcommand", subcommand},
                   {"config", to_json(cfg)},
                   {"serial", opts.serial},
                   {"results", std::move(outcome.results)},
                   {"checks", checks},
                   {"status", pass ? "pass" : "fail"}};
  // Wall-clock timings would break bit-for-bit reproducibility in serial mode.
  if (!opts.serial) result.report["timings"] = {{"total_seconds", seconds}};
  result.side_files = std::move(outcome.side_files);
  result.exit_code = pass ? kExitPass : kExitFailed;
  return result;
}

}  // namespace dil
