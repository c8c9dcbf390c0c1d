#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pwap/lattice.hpp"

namespace pwap {

using cplx = std::complex<double>;

// Uniform real-space grid with FFTW plans. Arrays are row-major with the
// first lattice direction slowest. Unnormalized transforms:
//   backward: f_r = sum_k F_k exp(+2 pi i k.r / n)
//   forward:  F_k = sum_r f_r exp(-2 pi i k.r / n)
class FftGrid {
 public:
  explicit FftGrid(std::array<int, 3> dims);
  ~FftGrid();
  FftGrid(const FftGrid&) = delete;
  FftGrid& operator=(const FftGrid&) = delete;

  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t size() const { return size_; }

  // Thread-safe; data may be any buffer of size() elements.
  void backward(std::span<cplx> data) const;
  void forward(std::span<cplx> data) const;

  std::size_t flat_index(const Miller& m) const;
  // Frequency of a flat index, wrapped to [-n/2, n/2).
  Miller frequency(std::size_t flat) const;
  Eigen::Vector3d fractional_point(std::size_t flat) const;

 private:
  std::array<int, 3> dims_;
  std::size_t size_;
  void* forward_plan_;
  void* backward_plan_;
};

// Plane waves e_G(x) = exp(iG.x)/sqrt|cell| with |G|^2/2 <= ecut, sorted by
// nondecreasing |G| with lexicographic Miller order inside ties, embedded in
// an FFT grid large enough for alias-free products of supersampling+1 basis
// functions.
class PlaneWaveBasis {
 public:
  PlaneWaveBasis(Lattice lattice, double ecut, int supersampling = 3);

  const Lattice& lattice() const { return lattice_; }
  double ecut() const { return ecut_; }
  int supersampling() const { return supersampling_; }
  std::size_t size() const { return millers_.size(); }

  const Miller& miller(std::size_t i) const { return millers_[i]; }
  const Eigen::Vector3d& g(std::size_t i) const { return gvecs_[i]; }
  double g2(std::size_t i) const { return g2_[i]; }
  std::span<const double> g2() const { return g2_; }
  std::span<const Miller> millers() const { return millers_; }
  std::optional<std::size_t> find(const Miller& m) const;

  // Largest |m_d| present in the sphere along each direction.
  const Miller& extent() const { return extent_; }
  // True when every |m_d| <= 2*extent_d, i.e. m is a difference of two basis
  // vectors' bounding boxes. Potentials are band-limited to this box.
  bool in_product_box(const Miller& m) const;

  const FftGrid& grid() const { return *grid_; }
  std::span<const std::size_t> grid_index() const { return grid_index_; }

  // Coefficients (L2-normalized e_G) -> values on the grid.
  std::vector<cplx> to_real(std::span<const cplx> coefficients) const;
  // Grid values -> coefficients of the basis functions (orthogonal projection).
  Eigen::VectorXcd to_fourier(std::span<const cplx> values) const;
  std::vector<cplx> to_real(const Eigen::VectorXcd& c) const {
    return to_real(std::span<const cplx>(c.data(), static_cast<std::size_t>(c.size())));
  }

  // Quadrature weight |cell|/N for integrals over the grid.
  double point_weight() const;

 private:
  Lattice lattice_;
  double ecut_;
  int supersampling_;
  std::vector<Miller> millers_;
  std::vector<Eigen::Vector3d> gvecs_;
  std::vector<double> g2_;
  Miller extent_{};
  std::shared_ptr<const FftGrid> grid_;
  std::vector<std::size_t> grid_index_;
  std::unordered_map<long long, std::size_t> lookup_;
};

// Basis coefficients of a field together with its basis.
struct FourierField {
  std::shared_ptr<const PlaneWaveBasis> basis;
  Eigen::VectorXcd coefficients;
};

// (sum_G (1 + |G|^2)^s |c_G|^2)^(1/2)
double sobolev_norm(const PlaneWaveBasis& basis, const Eigen::VectorXcd& c, double s);
inline double sobolev_norm(const FourierField& f, double s) {
  return sobolev_norm(*f.basis, f.coefficients, s);
}

// Smallest n >= target whose prime factors are 2, 3 and 5 only.
int next_fft_size(int target);

}  // namespace pwap
