#include "pwap/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pwap {

Lattice::Lattice(int dim, const Eigen::Matrix3d& vectors) : dim_(dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("lattice dimension must be 1, 2 or 3");
  vectors_.setZero();
  vectors_.topLeftCorner(dim, dim) = vectors.topLeftCorner(dim, dim);
  const Eigen::MatrixXd cell = vectors_.topLeftCorner(dim, dim);
  volume_ = std::abs(cell.determinant());
  const double scale = std::pow(cell.colwise().norm().prod(), 1.0 / dim);
  if (!(volume_ > 1e-12 * std::pow(scale, dim)) || !std::isfinite(volume_))
    throw std::invalid_argument("lattice vectors are linearly dependent");
  reciprocal_.setZero();
  reciprocal_.topLeftCorner(dim, dim) = 2.0 * std::numbers::pi * cell.inverse().transpose();
}

Lattice Lattice::cubic(int dim, double a) {
  return Lattice(dim, a * Eigen::Matrix3d::Identity());
}

}  // namespace pwap
