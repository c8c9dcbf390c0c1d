#pragma once

#include <array>

#include <Eigen/Dense>

namespace pwap {

// Integer coordinates of a reciprocal lattice vector in the reciprocal basis.
using Miller = std::array<int, 3>;

// Bravais lattice in dimension 1, 2 or 3. Cell vectors are the columns of
// vectors(); only the leading dim x dim block is populated.
class Lattice {
 public:
  // Throws std::invalid_argument for dim outside {1,2,3} or a singular cell.
  Lattice(int dim, const Eigen::Matrix3d& vectors);

  static Lattice cubic(int dim, double a);

  int dim() const { return dim_; }
  const Eigen::Matrix3d& vectors() const { return vectors_; }
  // b_i . a_j = 2 pi delta_ij
  const Eigen::Matrix3d& reciprocal() const { return reciprocal_; }
  double volume() const { return volume_; }

  Eigen::Vector3d to_cartesian(const Eigen::Vector3d& fractional) const {
    return vectors_ * fractional;
  }
  Eigen::Vector3d reciprocal_vector(const Miller& m) const {
    return reciprocal_ * Eigen::Vector3d(m[0], m[1], m[2]);
  }

 private:
  int dim_;
  Eigen::Matrix3d vectors_;
  Eigen::Matrix3d reciprocal_;
  double volume_;
};

}  // namespace pwap
