#include "pwap/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pwap/errors.hpp"
#include "pwap/kernels.hpp"
#include "pwap/parallel.hpp"

namespace pwap {

void MeanFieldModel::validate() const {
  if (n_electrons < 1) throw std::invalid_argument("n_electrons must be at least 1");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  if (!(kinetic_scale > 0.0)) throw std::invalid_argument("kinetic_scale must be positive");
  for (const auto& atom : atoms) {
    if (!(atom.width > 0.0)) throw std::invalid_argument("atom width must be positive");
    if (!std::isfinite(atom.depth) || !atom.position.allFinite())
      throw std::invalid_argument("atom parameters must be finite");
  }
  for (const auto& c : cosines) {
    for (int d = lattice.dim(); d < 3; ++d)
      if (c.g[d] != 0) throw std::invalid_argument("cosine wave vector exceeds lattice dimension");
  }
}

cplx atom_potential_coefficient(const MeanFieldModel& model, std::size_t atom,
                                const Eigen::Vector3d& g) {
  const Atom& a = model.atoms.at(atom);
  const int dim = model.lattice.dim();
  const double s2 = a.width * a.width;
  const double magnitude = a.depth * std::pow(2.0 * std::numbers::pi * s2, 0.5 * dim) *
                           std::exp(-0.5 * s2 * g.squaredNorm()) / model.lattice.volume();
  const double phase = -g.dot(model.lattice.to_cartesian(a.position));
  return magnitude * cplx(std::cos(phase), std::sin(phase));
}

cplx local_potential_coefficient(const MeanFieldModel& model, const Miller& m) {
  const Eigen::Vector3d g = model.lattice.reciprocal_vector(m);
  cplx v{};
  for (std::size_t j = 0; j < model.atoms.size(); ++j) v += atom_potential_coefficient(model, j, g);
  for (const auto& c : model.cosines) {
    const Miller neg{-c.g[0], -c.g[1], -c.g[2]};
    if (c.g == Miller{0, 0, 0}) {
      if (m == c.g) v += c.amplitude;
    } else if (m == c.g || m == neg) {
      v += 0.5 * c.amplitude;
    }
  }
  return v;
}

std::vector<cplx> local_potential(const MeanFieldModel& model, const PlaneWaveBasis& basis) {
  const FftGrid& grid = basis.grid();
  std::vector<cplx> coefficients(grid.size(), cplx{});
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Miller m = grid.frequency(f);
    if (basis.in_product_box(m)) coefficients[f] = local_potential_coefficient(model, m);
  }
  return coefficients;
}

std::vector<double> grid_values(const PlaneWaveBasis& basis, std::vector<cplx> coefficients) {
  basis.grid().backward(coefficients);
  std::vector<double> values(coefficients.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = coefficients[i].real();
  return values;
}

std::vector<cplx> grid_coefficients(const PlaneWaveBasis& basis, std::span<const double> values) {
  std::vector<cplx> c(values.begin(), values.end());
  basis.grid().forward(c);
  const double scale = 1.0 / static_cast<double>(c.size());
  for (auto& x : c) x *= scale;
  return c;
}

double integrate(const PlaneWaveBasis& basis, std::span<const double> f, std::span<const double> g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * g[i];
  return sum * basis.point_weight();
}

double integrate(const PlaneWaveBasis& basis, std::span<const double> f) {
  double sum = 0.0;
  for (double x : f) sum += x;
  return sum * basis.point_weight();
}

std::vector<std::vector<cplx>> real_space_orbitals(const PlaneWaveBasis& basis,
                                                   const Eigen::MatrixXcd& block) {
  std::vector<std::vector<cplx>> out(static_cast<std::size_t>(block.cols()));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = basis.to_real(std::span<const cplx>(block.col(i).data(), basis.size()));
  });
  return out;
}

std::vector<double> density(const PlaneWaveBasis& basis, const Eigen::MatrixXcd& phi) {
  std::vector<double> rho(basis.grid().size(), 0.0);
  for (const auto& orbital : real_space_orbitals(basis, phi)) kernels::add_abs2(1.0, orbital, rho);
  return rho;
}

std::vector<double> density_response(const PlaneWaveBasis& basis, const Eigen::MatrixXcd& phi,
                                     const Eigen::MatrixXcd& xi) {
  const auto phi_r = real_space_orbitals(basis, phi);
  const auto xi_r = real_space_orbitals(basis, xi);
  std::vector<double> rho(basis.grid().size(), 0.0);
  for (std::size_t i = 0; i < phi_r.size(); ++i) kernels::add_re_conj_mul(2.0, phi_r[i], xi_r[i], rho);
  return rho;
}

std::vector<double> hartree_potential(const PlaneWaveBasis& basis, std::span<const double> rho) {
  const FftGrid& grid = basis.grid();
  std::vector<cplx> c = grid_coefficients(basis, rho);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Miller m = grid.frequency(f);
    const double g2 = basis.lattice().reciprocal_vector(m).squaredNorm();
    c[f] = (m == Miller{0, 0, 0}) ? cplx{} : c[f] * (4.0 * std::numbers::pi / g2);
  }
  return grid_values(basis, std::move(c));
}

Eigen::VectorXcd apply_local(const PlaneWaveBasis& basis, std::span<const double> potential,
                             std::span<const cplx> real_space_function) {
  std::vector<cplx> work(real_space_function.begin(), real_space_function.end());
  kernels::mul_real(potential, work);
  return basis.to_fourier(work);
}

Eigen::MatrixXcd apply_local(const PlaneWaveBasis& basis, std::span<const double> potential,
                             const Eigen::MatrixXcd& block) {
  if (static_cast<std::size_t>(block.rows()) != basis.size())
    throw std::invalid_argument("block rows != basis size");
  Eigen::MatrixXcd out(block.rows(), block.cols());
  parallel_for(static_cast<std::size_t>(block.cols()), [&](std::size_t i) {
    std::vector<cplx> work = basis.to_real(std::span<const cplx>(block.col(i).data(), basis.size()));
    kernels::mul_real(potential, work);
    out.col(i) = basis.to_fourier(work);
  });
  return out;
}

Hamiltonian::Hamiltonian(const MeanFieldModel& model, std::shared_ptr<const PlaneWaveBasis> basis,
                         std::span<const double> rho)
    : basis_(std::move(basis)) {
  const PlaneWaveBasis& b = *basis_;
  kinetic_.resize(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) kinetic_[i] = model.kinetic_scale * b.g2(i);
  potential_ = grid_values(b, local_potential(model, b));
  if (!rho.empty()) {
    if (rho.size() != b.grid().size()) throw std::invalid_argument("density grid mismatch");
    if (model.hartree) {
      const auto vh = hartree_potential(b, rho);
      for (std::size_t i = 0; i < potential_.size(); ++i) potential_[i] += vh[i];
    }
    if (model.alpha != 0.0)
      for (std::size_t i = 0; i < potential_.size(); ++i) potential_[i] += model.alpha * rho[i];
  }
}

Eigen::MatrixXcd Hamiltonian::apply(const Eigen::MatrixXcd& block) const {
  Eigen::MatrixXcd out = apply_local(*basis_, potential_, block);
  out += kinetic_.asDiagonal() * block;
  return out;
}

Hamiltonian hamiltonian_at(const MeanFieldModel& model, const OrbitalSet& orbitals) {
  return Hamiltonian(model, orbitals.basis, density(*orbitals.basis, orbitals.phi));
}

Eigen::MatrixXcd apply_hamiltonian(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                   const Eigen::MatrixXcd& psi) {
  return hamiltonian_at(model, orbitals).apply(psi);
}

double energy(const MeanFieldModel& model, const OrbitalSet& orbitals) {
  const PlaneWaveBasis& basis = *orbitals.basis;
  double kinetic = 0.0;
  for (Eigen::Index i = 0; i < orbitals.phi.cols(); ++i)
    for (std::size_t k = 0; k < basis.size(); ++k)
      kinetic += basis.g2(k) * std::norm(orbitals.phi(static_cast<Eigen::Index>(k), i));
  kinetic *= model.kinetic_scale;
  const auto rho = density(basis, orbitals.phi);
  const auto vloc = grid_values(basis, local_potential(model, basis));
  double e = kinetic + integrate(basis, vloc, rho);
  if (model.hartree) e += 0.5 * integrate(basis, hartree_potential(basis, rho), rho);
  if (model.alpha != 0.0) e += 0.5 * model.alpha * integrate(basis, rho, rho);
  return e;
}

Eigen::MatrixXd forces_from_density(const MeanFieldModel& model, const PlaneWaveBasis& basis,
                                    std::span<const double> rho) {
  const int dim = model.lattice.dim();
  const FftGrid& grid = basis.grid();
  const std::vector<cplx> rho_hat = grid_coefficients(basis, rho);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(model.atoms.size()));
  for (std::size_t fl = 0; fl < grid.size(); ++fl) {
    const Miller m = grid.frequency(fl);
    if (!basis.in_product_box(m) || m == Miller{0, 0, 0}) continue;
    const Eigen::Vector3d g = model.lattice.reciprocal_vector(m);
    for (std::size_t j = 0; j < model.atoms.size(); ++j) {
      const cplx vj = atom_potential_coefficient(model, j, g);
      for (int b = 0; b < dim; ++b) {
        // dV^/dX_{j,b} = -i G_b V^_j(G)
        const cplx dv = cplx(0.0, -g[b]) * vj;
        f(b, static_cast<Eigen::Index>(j)) -= (dv * std::conj(rho_hat[fl])).real();
      }
    }
  }
  return f * model.lattice.volume();
}

Eigen::MatrixXd forces(const MeanFieldModel& model, const OrbitalSet& orbitals) {
  return forces_from_density(model, *orbitals.basis, density(*orbitals.basis, orbitals.phi));
}

Eigen::MatrixXd force_derivative(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                 const TangentSet& xi) {
  const double gauge = (orbitals.phi.adjoint() * xi.xi).norm();
  if (gauge > 1e-8 * std::max(1.0, xi.xi.norm()))
    throw GaugeError("force_derivative: tangent set violates the gauge condition");
  return forces_from_density(model, *orbitals.basis,
                             density_response(*orbitals.basis, orbitals.phi, xi.xi));
}

}  // namespace pwap
