// dil: command-line driver for the defect index experiments.
//
//   dil <subcommand> [--config FILE] [--out REPORT.json] [--serial] [--seed N]
//
// Exit status: 0 all checks passed, 1 a check failed, 2 bad configuration,
// 3 eigensolver did not converge.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "dil/run.hpp"

namespace {

std::string report_stem(const std::string& out) {
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return out.substr(0, dot);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw dil::Error("cannot write '" + path + "'");
  os << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Defect operator index experiments"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  bool serial = false;
  std::int64_t seed = -1;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--out", out_path, "report path; side files share its stem (stdout when omitted)");
  app.add_flag("--serial", serial, "single-threaded, bit-reproducible run without timings");
  app.add_option("--seed", seed, "override the configured seed")->check(CLI::NonNegativeNumber);
  app.set_version_flag("--version", dil::kVersion);

  for (const auto& name : dil::subcommands()) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dil::kExitConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  dil::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = dil::load_config_file(config_path);
    dil::apply_env_overrides(cfg);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.validate();
  } catch (const dil::Error& e) {
    std::cerr << "dil: configuration error: " << e.what() << '\n';
    return dil::kExitConfig;
  }

  dil::RunResult result;
  try {
    result = dil::run(sub, cfg, {serial});
  } catch (const dil::ConvergenceError& e) {
    std::cerr << "dil: " << e.what() << '\n';
    return dil::kExitSolver;
  } catch (const dil::ConfigError& e) {
    std::cerr << "dil: configuration error: " << e.what() << '\n';
    return dil::kExitConfig;
  } catch (const dil::Error& e) {
    std::cerr << "dil: " << e.what() << '\n';
    return dil::kExitFailed;
  }

  const std::string text = result.report.dump(2) + "\n";
  try {
    if (out_path.empty()) {
      std::cout << text;
    } else {
      write_file(out_path, text);
      const std::string stem = report_stem(out_path);
      for (const auto& f : result.side_files) write_file(stem + f.suffix, f.content);
    }
  } catch (const dil::Error& e) {
    std::cerr << "dil: " << e.what() << '\n';
    return dil::kExitFailed;
  }
  if (result.exit_code != dil::kExitPass) {
    for (const auto& c : result.report["checks"]) {
      if (!c["passed"].get<bool>()) std::cerr << "dil: check failed: " << c["name"].get<std::string>() << '\n';
    }
  }
  return result.exit_code;
}
