#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pwap/basis.hpp"
#include "pwap/orbitals.hpp"

namespace pwap {

// Periodized Gaussian well A exp(-|x - X|^2 / (2 sigma^2)); attractive wells
// have depth < 0. Position is in fractional coordinates.
struct Atom {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double depth = 0.0;
  double width = 1.0;
};

// amplitude * cos(G.x), an atom-independent external potential term.
struct CosineTerm {
  Miller g{0, 0, 0};
  double amplitude = 0.0;
};

// E(P) = Tr(H0 P) + [1/2 int rho V_H(rho)] + alpha/2 int rho^2 with
// H0 = -kinetic_scale Delta + V_loc.
struct MeanFieldModel {
  Lattice lattice = Lattice::cubic(1, 1.0);
  std::vector<Atom> atoms;
  std::vector<CosineTerm> cosines;
  double alpha = 0.0;
  bool hartree = false;
  int n_electrons = 1;
  double kinetic_scale = 0.5;

  // Throws std::invalid_argument on nonpositive widths, negative alpha, ...
  void validate() const;
};

// Fourier-series coefficients: V(x) = sum_G V^(G) exp(iG.x).
cplx atom_potential_coefficient(const MeanFieldModel& model, std::size_t atom,
                                const Eigen::Vector3d& g);
cplx local_potential_coefficient(const MeanFieldModel& model, const Miller& m);

// Grid-indexed Fourier-series coefficients of V_loc, band-limited to the
// basis product box so that every matrix element <e_G, V e_G'> is exact.
std::vector<cplx> local_potential(const MeanFieldModel& model, const PlaneWaveBasis& basis);

// Real-space values of a real field given by grid-indexed Fourier-series
// coefficients.
std::vector<double> grid_values(const PlaneWaveBasis& basis, std::vector<cplx> coefficients);
// Inverse of grid_values: grid-indexed Fourier-series coefficients.
std::vector<cplx> grid_coefficients(const PlaneWaveBasis& basis, std::span<const double> values);

// int_cell f g over the grid
double integrate(const PlaneWaveBasis& basis, std::span<const double> f, std::span<const double> g);
double integrate(const PlaneWaveBasis& basis, std::span<const double> f);

// Orbitals evaluated on the grid, one vector per column.
std::vector<std::vector<cplx>> real_space_orbitals(const PlaneWaveBasis& basis,
                                                   const Eigen::MatrixXcd& block);

// rho(x) = sum_i |phi_i(x)|^2
std::vector<double> density(const PlaneWaveBasis& basis, const Eigen::MatrixXcd& phi);
// rho_X(x) = 2 Re sum_i conj(phi_i(x)) xi_i(x) for X = Phi Xi^* + Xi Phi^*
std::vector<double> density_response(const PlaneWaveBasis& basis, const Eigen::MatrixXcd& phi,
                                     const Eigen::MatrixXcd& xi);

// Zero-mean periodic solution of -Delta V = 4 pi (rho - mean rho), real space.
std::vector<double> hartree_potential(const PlaneWaveBasis& basis, std::span<const double> rho);

// Multiplication by a real grid potential, projected back onto the basis.
Eigen::MatrixXcd apply_local(const PlaneWaveBasis& basis, std::span<const double> potential,
                             const Eigen::MatrixXcd& block);
Eigen::VectorXcd apply_local(const PlaneWaveBasis& basis, std::span<const double> potential,
                             std::span<const cplx> real_space_function);

// H(P) = -kinetic_scale Delta + V_loc + [V_H(rho)] + alpha rho for a fixed rho.
class Hamiltonian {
 public:
  // Without a density this is the core Hamiltonian H0.
  Hamiltonian(const MeanFieldModel& model, std::shared_ptr<const PlaneWaveBasis> basis,
              std::span<const double> rho = {});

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& block) const;
  const std::vector<double>& potential() const { return potential_; }
  const Eigen::VectorXd& kinetic() const { return kinetic_; }
  const PlaneWaveBasis& basis() const { return *basis_; }
  std::shared_ptr<const PlaneWaveBasis> basis_ptr() const { return basis_; }

 private:
  std::shared_ptr<const PlaneWaveBasis> basis_;
  Eigen::VectorXd kinetic_;
  std::vector<double> potential_;
};

Hamiltonian hamiltonian_at(const MeanFieldModel& model, const OrbitalSet& orbitals);

// (-kinetic_scale Delta + V_loc + [V_H(rho)] + alpha rho) psi at P = Phi Phi^*.
Eigen::MatrixXcd apply_hamiltonian(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                   const Eigen::MatrixXcd& psi);

double energy(const MeanFieldModel& model, const OrbitalSet& orbitals);

// F_{j,b} = -int (dV_loc/dX_{j,b}) rho, returned as dim x n_atoms (hartree/bohr).
Eigen::MatrixXd forces_from_density(const MeanFieldModel& model, const PlaneWaveBasis& basis,
                                    std::span<const double> rho);
Eigen::MatrixXd forces(const MeanFieldModel& model, const OrbitalSet& orbitals);
// dF(P).X = -Tr(dV_loc/dX X); F is linear in P so this is exact.
Eigen::MatrixXd force_derivative(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                 const TangentSet& xi);

}  // namespace pwap
