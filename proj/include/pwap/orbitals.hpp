#pragma once

#include <memory>

#include <Eigen/Dense>

#include "pwap/basis.hpp"

namespace pwap {

// Phi = (phi_1 | ... | phi_Nel): columns of plane-wave coefficients,
// orthonormal, representing the density matrix P = Phi Phi^*.
struct OrbitalSet {
  std::shared_ptr<const PlaneWaveBasis> basis;
  Eigen::MatrixXcd phi;

  Eigen::Index n_orbitals() const { return phi.cols(); }
  // ||Phi^* Phi - I||_F
  double orthonormality_error() const {
    return (phi.adjoint() * phi - Eigen::MatrixXcd::Identity(phi.cols(), phi.cols())).norm();
  }
};

// Xi = (xi_1 | ... | xi_Nel) with Phi^* Xi = 0, the orbital form of the
// tangent vector X = Phi Xi^* + Xi Phi^*.
struct TangentSet {
  Eigen::MatrixXcd xi;
};

// <X1, X2>_F = 2 Re Tr(Xi1^* Xi2)
inline double inner(const TangentSet& a, const TangentSet& b) {
  return 2.0 * (a.xi.adjoint() * b.xi).trace().real();
}
// ||X||_F = sqrt(2) ||Xi||_F
inline double norm(const TangentSet& a) { return std::sqrt(2.0) * a.xi.norm(); }

}  // namespace pwap
