#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "pwap/model.hpp"
#include "pwap/solvers.hpp"

namespace pwap {

// Binary ground-state archive, all values little-endian:
//   "PWAP1"                      magic (5 bytes)
//   u32 dim, f64[9] lattice      cell vectors, column-major 3x3
//   f64 ecut, u32 supersampling
//   u64 n_basis, i32[3] * n_basis  Miller indices in basis order
//   u64 n_orbitals
//   f64 energy
//   u64 n_atoms, per atom f64[3] position, f64 depth, f64 width
//   f64[3] * n_atoms             forces (x, y, z; unused directions are 0)
//   f64 * n_orbitals             eigenvalues
//   u8 converged, u32 iterations, f64 residual_norm
//   f64[2] * n_basis * n_orbitals  (re, im) coefficients, column by column
struct Archive {
  OrbitalSet orbitals;
  Eigen::VectorXd eigenvalues;
  double energy = 0.0;
  std::vector<Atom> atoms;
  Eigen::MatrixXd forces;  // dim x n_atoms
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
};

struct ArchiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string encode_archive(const MeanFieldModel& model, const GroundState& state,
                           const Eigen::MatrixXd& forces);
// Rebuilds the basis from the stored lattice and cutoff and checks it against
// the stored Miller indices.
Archive decode_archive(const std::string& bytes);

// Writes to a unique temporary file next to `path`, then renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

void write_archive(const std::filesystem::path& path, const MeanFieldModel& model,
                   const GroundState& state, const Eigen::MatrixXd& forces);
Archive read_archive(const std::filesystem::path& path);

// SolveReport and summary as JSON text.
std::string solve_report_json(const MeanFieldModel& model, const GroundState& state,
                              const Eigen::MatrixXd& forces);

// Stable hex key for the reference solution of a model at a cutoff.
std::string reference_key(const MeanFieldModel& model, double ecut, int supersampling,
                          const ScfOptions& scf);

}  // namespace pwap
