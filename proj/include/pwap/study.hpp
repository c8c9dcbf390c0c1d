#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "pwap/config.hpp"
#include "pwap/estimators.hpp"
#include "pwap/gp_appendix.hpp"

namespace pwap {

inline constexpr const char* kCsvVersion = "# pwap-csv v1";

struct CutoffResult {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  double ecut = 0.0;
  std::string status = "ok";  // ok, scf_not_converged, failed
  std::string message;
  std::size_t n_basis = 0;
  int scf_iterations = 0;

  ErrorReport report;  // variational solution against the reference
  BoundReport bounds;
  double force_bound = nan;  // max over components of ||Pi dV/dX|| ||Pi(P - P*)||

  double energy_error = nan;  // E(P) - E*
  double force_error = nan;   // ||F(P) - F*||_2
  double energy_post_residual = nan, energy_post_schur = nan;
  double force_post_error_residual = nan, force_post_error_schur = nan;

  double energy_error_newton = nan;
  double density_error_newton = nan;
  double force_error_newton = nan;
  int newton_iterations = 0;
};

struct StudyResult {
  GroundState reference;
  Eigen::MatrixXd reference_forces;
  OperatorConstants constants;
  bool reference_from_cache = false;
  std::filesystem::path reference_path;
  std::vector<CutoffResult> rows;
};

// Reference solve (cached under cache_dir when it is nonempty), operator
// constants at the reference, then one independent task per cutoff.
// Throws ConvergenceError when the reference solve fails.
StudyResult run_study(const RunConfig& config, const std::filesystem::path& cache_dir = {});

// convergence.csv, estimators.csv, bounds.csv, forces.csv
void write_study_outputs(const StudyResult& result, const std::filesystem::path& out_dir);

GpOptions gp_options(const RunConfig& config);
// prop_a1.csv
void write_gp_outputs(const GpVerification& result, const std::filesystem::path& out_dir);

// %.17g, "nan" for NaN
std::string csv_number(double x);

}  // namespace pwap
