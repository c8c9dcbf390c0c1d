#pragma once

#include <memory>

#include "pwap/solvers.hpp"

namespace fixtures {

// 1D, 11 plane waves, two electrons, local nonlinearity and a cosine term.
inline pwap::MeanFieldModel small_model() {
  pwap::MeanFieldModel m;
  m.lattice = pwap::Lattice::cubic(1, 7.0);
  m.atoms = {{Eigen::Vector3d(0.2, 0, 0), -1.5, 0.8}, {Eigen::Vector3d(0.55, 0, 0), -1.0, 0.6}};
  m.cosines = {{pwap::Miller{2, 0, 0}, 0.2}};
  m.alpha = 0.8;
  m.n_electrons = 2;
  return m;
}
inline constexpr double kSmallEcut = 12.0;

// Same size with the Hartree term on. One electron: with two, the 1D Coulomb
// kernel closes the gap and simple mixing cannot settle.
inline pwap::MeanFieldModel small_hartree_model() {
  pwap::MeanFieldModel m;
  m.lattice = pwap::Lattice::cubic(1, 3.0);
  m.atoms = {{Eigen::Vector3d(0.2, 0, 0), -3.0, 0.8}, {Eigen::Vector3d(0.55, 0, 0), -2.0, 0.6}};
  m.cosines = {{pwap::Miller{1, 0, 0}, 0.3}};
  m.alpha = 0.8;
  m.hartree = true;
  m.n_electrons = 1;
  return m;
}
// 0.5 (2 pi 5 / 3)^2 ~ 54.8: eleven plane waves
inline constexpr double kSmallHartreeEcut = 56.0;

// Two Gaussian wells in a 1D cell of length 10 with a local quartic term.
inline pwap::MeanFieldModel two_wells(double alpha = 1.0) {
  pwap::MeanFieldModel m;
  m.lattice = pwap::Lattice::cubic(1, 10.0);
  m.atoms = {{Eigen::Vector3d(0.30, 0, 0), -2.0, 0.6}, {Eigen::Vector3d(0.62, 0, 0), -2.0, 0.6}};
  m.alpha = alpha;
  m.n_electrons = 2;
  return m;
}

inline std::shared_ptr<const pwap::PlaneWaveBasis> basis(const pwap::MeanFieldModel& m, double ecut) {
  return std::make_shared<const pwap::PlaneWaveBasis>(m.lattice, ecut);
}

inline pwap::ScfOptions tight() {
  pwap::ScfOptions o;
  o.tolerance = 1e-11;
  return o;
}

}  // namespace fixtures
