#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "pwap/archive.hpp"
#include "pwap/config.hpp"
#include "pwap/errors.hpp"
#include "pwap/parallel.hpp"
#include "pwap/study.hpp"

namespace fs = std::filesystem;
using namespace pwap;

namespace {

constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kConfigError = 2;

int cmd_solve(const RunConfig& cfg, const fs::path& out) {
  auto basis = std::make_shared<const PlaneWaveBasis>(cfg.model.lattice, cfg.ecut, cfg.supersampling);
  const GroundState gs = scf(cfg.model, basis, cfg.scf);
  const Eigen::MatrixXd f = forces(cfg.model, gs.orbitals);
  fs::create_directories(out);
  write_file_atomic(out / "solve_report.json", solve_report_json(cfg.model, gs, f));
  if (!gs.report.converged) {
    std::cerr << "pwap: solve failed: " << gs.report.message << "\n";
    return kSolverFailure;
  }
  write_archive(out / "ground_state.pwap", cfg.model, gs, f);
  std::printf("energy %.12f  (%d SCF iterations, residual %.3e, %zu plane waves)\n", gs.energy,
              gs.report.iterations, gs.report.residual_norm, basis->size());
  return kOk;
}

int cmd_study(const RunConfig& cfg, const fs::path& out) {
  const StudyResult result = run_study(cfg, out / "cache");
  write_study_outputs(result, out);
  std::printf("reference %s: E* = %.12f\n", result.reference_from_cache ? "from cache" : "computed",
              result.reference.energy);
  std::printf("constants: plain %.4e  metric %.4e\n", result.constants.plain, result.constants.metric);
  int failures = 0;
  for (const auto& r : result.rows) {
    if (r.status != "ok") {
      ++failures;
      std::printf("  Ecut %-8g %s %s\n", r.ecut, r.status.c_str(), r.message.c_str());
      continue;
    }
    std::printf("  Ecut %-8g E_err %.3e  newton %.3e  |F_err| %.3e  newton %.3e\n", r.ecut,
                r.energy_error, r.energy_error_newton, r.force_error, r.force_error_newton);
  }
  return failures == 0 ? kOk : kSolverFailure;
}

int cmd_gp_check(const RunConfig& cfg, const fs::path& out) {
  const GpVerification v = verify_proposition(cfg.gp.amplitude, cfg.gp.cutoffs, gp_options(cfg));
  write_gp_outputs(v, out);
  for (const auto& p : v.points)
    std::printf("  N %-8g norm %.6e  (%d power iterations)\n", p.n, p.norm, p.power_iterations);
  if (!v.warning.empty()) std::cerr << "pwap: warning: " << v.warning << "\n";
  if (v.fitted) std::printf("fit slope %.4f, prefactor %.4e\n", v.slope, v.prefactor);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-wave mean-field solver with a posteriori error estimates"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads")->envname("PWAP_THREADS");
  };
  CLI::App* solve = app.add_subcommand("solve", "ground state at one cutoff, written as an archive");
  CLI::App* study = app.add_subcommand("study", "convergence and estimator study over cutoffs");
  CLI::App* gp = app.add_subcommand("gp-check", "operator-norm decay check for the 1D GP model");
  for (CLI::App* sub : {solve, study, gp}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (threads < 0) {
    std::cerr << "pwap: --threads must be positive\n";
    return kConfigError;
  }
  if (threads > 0) set_thread_count(threads);

  const Command command = solve->parsed() ? Command::solve
                          : study->parsed() ? Command::study
                                            : Command::gp_check;
  RunConfig cfg;
  try {
    cfg = load_config(config_path, command);
  } catch (const ConfigError& e) {
    std::cerr << "pwap: " << config_path << ": " << e.what() << "\n";
    return kConfigError;
  }

  try {
    switch (command) {
      case Command::solve: return cmd_solve(cfg, out_dir);
      case Command::study: return cmd_study(cfg, out_dir);
      case Command::gp_check: return cmd_gp_check(cfg, out_dir);
    }
  } catch (const pwap::Error& e) {
    std::cerr << "pwap: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "pwap: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kOk;
}
