#pragma once

// Data-parallel inner loops used by the grid and coefficient-space code.
//
// Every kernel has a scalar reference implementation and an AVX2 variant.
// The active table is picked once at first use from the CPU features; the
// environment variable PWAP_SIMD=scalar forces the reference path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace pwap::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
  // sum_i conj(a_i) * b_i
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
  // x_i *= v_i, v real
  void (*mul_real)(const double* v, cplx* x, std::size_t n);
  // y_i = d_i * x_i, d real
  void (*scale_real)(const double* d, const cplx* x, cplx* y, std::size_t n);
  // acc_i += w * |x_i|^2
  void (*add_abs2)(double w, const cplx* x, double* acc, std::size_t n);
  // acc_i += w * Re(conj(a_i) * b_i)
  void (*add_re_conj_mul)(double w, const cplx* a, const cplx* b, double* acc, std::size_t n);
};

const KernelTable& table(Isa isa);
bool available(Isa isa);

const KernelTable& active();
Isa active_isa();
// Overrides the dispatch decision. Throws if the ISA is not supported here.
void set_active_isa(Isa isa);
std::string_view name(Isa isa);

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void mul_real(std::span<const double> v, std::span<cplx> x) {
  active().mul_real(v.data(), x.data(), x.size());
}
inline void scale_real(std::span<const double> d, std::span<const cplx> x, std::span<cplx> y) {
  active().scale_real(d.data(), x.data(), y.data(), x.size());
}
inline void add_abs2(double w, std::span<const cplx> x, std::span<double> acc) {
  active().add_abs2(w, x.data(), acc.data(), x.size());
}
inline void add_re_conj_mul(double w, std::span<const cplx> a, std::span<const cplx> b,
                            std::span<double> acc) {
  active().add_re_conj_mul(w, a.data(), b.data(), acc.data(), a.size());
}

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace pwap::kernels
