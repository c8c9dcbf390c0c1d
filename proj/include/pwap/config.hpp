#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwap/estimators.hpp"
#include "pwap/gp_appendix.hpp"
#include "pwap/model.hpp"
#include "pwap/solvers.hpp"

namespace pwap {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line(line) {}
  int line;
};

enum class Command { solve, study, gp_check };

struct GpSettings {
  double amplitude = 0.3;
  std::vector<double> cutoffs{4, 8, 16, 32, 64};
  int reference_factor = 16;
  double power_tolerance = 1e-6;
};

struct RunConfig {
  MeanFieldModel model;
  int supersampling = 3;
  double ecut = std::numeric_limits<double>::quiet_NaN();  // solve
  std::vector<double> cutoffs;                             // study
  double reference_cutoff = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 1;
  ScfOptions scf;
  EstimatorOptions estimator;
  GpSettings gp;
};

// INI-style text: [section] headers, key = value lines, '#' or ';' comments.
// Sections: model, basis, study, solver, gp. Repeatable keys: atom, cosine.
RunConfig parse_config(const std::string& text, Command command);
RunConfig load_config(const std::filesystem::path& path, Command command);

}  // namespace pwap
