#include "pwap/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace pwap::kernels::detail {
namespace {

// Complex arrays are viewed as interleaved (re, im) doubles; one __m256d holds
// two complex numbers.

inline const double* raw(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* raw(cplx* p) { return reinterpret_cast<double*>(p); }

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  // re accumulates (ar*br, ai*bi); im accumulates (ar*bi, ai*br) and is
  // reduced as even lanes minus odd lanes.
  __m256d re0 = _mm256_setzero_pd(), re1 = _mm256_setzero_pd();
  __m256d im0 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
  const double* pa = raw(a);
  const double* pb = raw(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a0 = _mm256_loadu_pd(pa + 2 * i);
    __m256d b0 = _mm256_loadu_pd(pb + 2 * i);
    __m256d a1 = _mm256_loadu_pd(pa + 2 * i + 4);
    __m256d b1 = _mm256_loadu_pd(pb + 2 * i + 4);
    re0 = _mm256_fmadd_pd(a0, b0, re0);
    re1 = _mm256_fmadd_pd(a1, b1, re1);
    im0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0b0101), im0);
    im1 = _mm256_fmadd_pd(a1, _mm256_permute_pd(b1, 0b0101), im1);
  }
  for (; i + 2 <= n; i += 2) {
    __m256d a0 = _mm256_loadu_pd(pa + 2 * i);
    __m256d b0 = _mm256_loadu_pd(pb + 2 * i);
    re0 = _mm256_fmadd_pd(a0, b0, re0);
    im0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0b0101), im0);
  }
  __m256d re = _mm256_add_pd(re0, re1);
  __m256d im = _mm256_add_pd(im0, im1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, im);
  double sum_re = hsum(re);
  double sum_im = (lanes[0] - lanes[1]) + (lanes[2] - lanes[3]);
  for (; i < n; ++i) {
    sum_re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    sum_im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {sum_re, sum_im};
}

void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  const double* px = raw(x);
  double* py = raw(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(px + 2 * i);
    __m256d yv = _mm256_loadu_pd(py + 2 * i);
    __m256d xs = _mm256_permute_pd(xv, 0b0101);  // (xi, xr)
    // addsub: even lanes subtract, odd lanes add
    __m256d prod = _mm256_addsub_pd(_mm256_mul_pd(ar, xv), _mm256_mul_pd(ai, xs));
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(yv, prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void mul_real(const double* v, cplx* x, std::size_t n) {
  double* px = raw(x);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vv = _mm256_set_pd(v[i + 1], v[i + 1], v[i], v[i]);
    __m256d xv = _mm256_loadu_pd(px + 2 * i);
    _mm256_storeu_pd(px + 2 * i, _mm256_mul_pd(vv, xv));
  }
  for (; i < n; ++i) x[i] *= v[i];
}

void scale_real(const double* d, const cplx* x, cplx* y, std::size_t n) {
  const double* px = raw(x);
  double* py = raw(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d dv = _mm256_set_pd(d[i + 1], d[i + 1], d[i], d[i]);
    _mm256_storeu_pd(py + 2 * i, _mm256_mul_pd(dv, _mm256_loadu_pd(px + 2 * i)));
  }
  for (; i < n; ++i) y[i] = d[i] * x[i];
}

// Pairwise sums of (a*b) products for four complex entries, returned in
// element order: lanes k = re(a_k)re(b_k) + im(a_k)im(b_k).
inline __m256d paired_products(const double* pa, const double* pb) {
  __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(pa), _mm256_loadu_pd(pb));
  __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(pa + 4), _mm256_loadu_pd(pb + 4));
  __m256d h = _mm256_hadd_pd(p0, p1);  // (s0, s2, s1, s3)
  return _mm256_permute4x64_pd(h, 0b11011000);
}

void add_abs2(double w, const cplx* x, double* acc, std::size_t n) {
  const __m256d wv = _mm256_set1_pd(w);
  const double* px = raw(x);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = paired_products(px + 2 * i, px + 2 * i);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(wv, s, _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) acc[i] += w * std::norm(x[i]);
}

void add_re_conj_mul(double w, const cplx* a, const cplx* b, double* acc, std::size_t n) {
  const __m256d wv = _mm256_set1_pd(w);
  const double* pa = raw(a);
  const double* pb = raw(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = paired_products(pa + 2 * i, pb + 2 * i);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(wv, s, _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) acc[i] += w * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
}

constexpr KernelTable kAvx2{dot, axpy, mul_real, scale_real, add_abs2, add_re_conj_mul};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace pwap::kernels::detail

#else

namespace pwap::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace pwap::kernels::detail

#endif
