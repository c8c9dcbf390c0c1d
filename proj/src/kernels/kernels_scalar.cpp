#include "pwap/kernels.hpp"

namespace pwap::kernels::detail {
namespace {

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul_real(const double* v, cplx* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= v[i];
}

void scale_real(const double* d, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
}

void add_abs2(double w, const cplx* x, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += w * std::norm(x[i]);
}

void add_re_conj_mul(double w, const cplx* a, const cplx* b, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    acc[i] += w * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
}

constexpr KernelTable kScalar{dot, axpy, mul_real, scale_real, add_abs2, add_re_conj_mul};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace pwap::kernels::detail
