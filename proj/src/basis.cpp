#include "pwap/basis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pwap {
namespace {

// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

long long pack(const Miller& m) {
  constexpr long long offset = 1 << 20;
  return ((m[0] + offset) << 42) | ((m[1] + offset) << 21) | (m[2] + offset);
}

int wrap(int m, int n) { return ((m % n) + n) % n; }

}  // namespace

int next_fft_size(int target) {
  for (int n = std::max(1, target);; ++n) {
    int r = n;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return n;
  }
}

FftGrid::FftGrid(std::array<int, 3> dims) : dims_(dims) {
  size_ = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::lock_guard lock(planner_mutex());
  auto* buffer = fftw_alloc_complex(size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft(3, dims_.data(), buffer, buffer, FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft(3, dims_.data(), buffer, buffer, FFTW_BACKWARD, flags);
  fftw_free(buffer);
  if (!forward_plan_ || !backward_plan_) throw std::runtime_error("FFTW planning failed");
}

FftGrid::~FftGrid() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void FftGrid::backward(std::span<cplx> data) const {
  if (data.size() != size_) throw std::invalid_argument("grid/buffer size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), p, p);
}

void FftGrid::forward(std::span<cplx> data) const {
  if (data.size() != size_) throw std::invalid_argument("grid/buffer size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), p, p);
}

std::size_t FftGrid::flat_index(const Miller& m) const {
  return (static_cast<std::size_t>(wrap(m[0], dims_[0])) * dims_[1] + wrap(m[1], dims_[1])) *
             dims_[2] +
         wrap(m[2], dims_[2]);
}

Miller FftGrid::frequency(std::size_t flat) const {
  Miller m{};
  std::size_t rest = flat;
  for (int d = 2; d >= 0; --d) {
    int k = static_cast<int>(rest % dims_[d]);
    rest /= dims_[d];
    m[d] = (2 * k >= dims_[d]) ? k - dims_[d] : k;
  }
  return m;
}

Eigen::Vector3d FftGrid::fractional_point(std::size_t flat) const {
  Eigen::Vector3d r;
  std::size_t rest = flat;
  for (int d = 2; d >= 0; --d) {
    r[d] = static_cast<double>(rest % dims_[d]) / dims_[d];
    rest /= dims_[d];
  }
  return r;
}

PlaneWaveBasis::PlaneWaveBasis(Lattice lattice, double ecut, int supersampling)
    : lattice_(std::move(lattice)), ecut_(ecut), supersampling_(supersampling) {
  if (!(ecut > 0.0) || !std::isfinite(ecut)) throw std::invalid_argument("cutoff must be positive");
  if (supersampling < 2) throw std::invalid_argument("supersampling must be at least 2");

  const int dim = lattice_.dim();
  const double gmax = std::sqrt(2.0 * ecut);
  Miller box{0, 0, 0};
  for (int d = 0; d < dim; ++d) {
    const double len = lattice_.vectors().col(d).norm();
    box[d] = static_cast<int>(std::floor(len * gmax / (2.0 * std::numbers::pi))) + 1;
  }

  struct Entry {
    Miller m;
    Eigen::Vector3d g;
    double g2;
  };
  std::vector<Entry> entries;
  // A relative slack keeps vectors exactly on the sphere from flickering in
  // and out through rounding.
  const double limit = ecut * (1.0 + 1e-12);
  for (int i = -box[0]; i <= box[0]; ++i)
    for (int j = -box[1]; j <= box[1]; ++j)
      for (int k = -box[2]; k <= box[2]; ++k) {
        Miller m{i, j, k};
        Eigen::Vector3d g = lattice_.reciprocal_vector(m);
        double g2 = g.squaredNorm();
        if (0.5 * g2 <= limit) entries.push_back({m, g, g2});
      }

  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.g2 < b.g2; });
  // Shells of equal |G| (up to rounding) are ordered lexicographically.
  for (std::size_t begin = 0; begin < entries.size();) {
    std::size_t end = begin + 1;
    while (end < entries.size() &&
           entries[end].g2 - entries[begin].g2 <= 1e-10 * std::max(1.0, entries[begin].g2))
      ++end;
    std::sort(entries.begin() + begin, entries.begin() + end,
              [](const Entry& a, const Entry& b) { return a.m < b.m; });
    begin = end;
  }

  for (const auto& e : entries) {
    for (int d = 0; d < 3; ++d) extent_[d] = std::max(extent_[d], std::abs(e.m[d]));
    lookup_.emplace(pack(e.m), millers_.size());
    millers_.push_back(e.m);
    gvecs_.push_back(e.g);
    g2_.push_back(e.g2);
  }

  std::array<int, 3> dims{1, 1, 1};
  for (int d = 0; d < dim; ++d) dims[d] = next_fft_size(2 * supersampling_ * extent_[d] + 1);
  grid_ = std::make_shared<const FftGrid>(dims);
  grid_index_.reserve(millers_.size());
  for (const auto& m : millers_) grid_index_.push_back(grid_->flat_index(m));
}

std::optional<std::size_t> PlaneWaveBasis::find(const Miller& m) const {
  auto it = lookup_.find(pack(m));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

bool PlaneWaveBasis::in_product_box(const Miller& m) const {
  for (int d = 0; d < 3; ++d)
    if (std::abs(m[d]) > 2 * extent_[d]) return false;
  return true;
}

double PlaneWaveBasis::point_weight() const {
  return lattice_.volume() / static_cast<double>(grid_->size());
}

std::vector<cplx> PlaneWaveBasis::to_real(std::span<const cplx> coefficients) const {
  if (coefficients.size() != size()) throw std::invalid_argument("coefficient count != basis size");
  std::vector<cplx> values(grid_->size(), cplx{});
  for (std::size_t i = 0; i < size(); ++i) values[grid_index_[i]] = coefficients[i];
  grid_->backward(values);
  const double norm = 1.0 / std::sqrt(lattice_.volume());
  for (auto& v : values) v *= norm;
  return values;
}

Eigen::VectorXcd PlaneWaveBasis::to_fourier(std::span<const cplx> values) const {
  if (values.size() != grid_->size()) throw std::invalid_argument("grid size mismatch");
  std::vector<cplx> work(values.begin(), values.end());
  grid_->forward(work);
  const double norm = std::sqrt(lattice_.volume()) / static_cast<double>(grid_->size());
  Eigen::VectorXcd c(size());
  for (std::size_t i = 0; i < size(); ++i) c[i] = work[grid_index_[i]] * norm;
  return c;
}

double sobolev_norm(const PlaneWaveBasis& basis, const Eigen::VectorXcd& c, double s) {
  if (static_cast<std::size_t>(c.size()) != basis.size())
    throw std::invalid_argument("coefficient count != basis size");
  double sum = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    sum += std::pow(1.0 + basis.g2(i), s) * std::norm(c[i]);
  return std::sqrt(sum);
}

}  // namespace pwap
