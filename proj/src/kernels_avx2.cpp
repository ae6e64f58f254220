#include "zflow/kernels.hpp"

#if ZFLOW_X86

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace zflow::kernels {

namespace {

// Deinterleave four packed complex doubles into re/im lanes.
inline void load_c4(const cplx* p, __m256d& re, __m256d& im) {
  const __m256d a = _mm256_loadu_pd(reinterpret_cast<const double*>(p));      // re0 im0 re1 im1
  const __m256d b = _mm256_loadu_pd(reinterpret_cast<const double*>(p) + 4);  // re2 im2 re3 im3
  const __m256d lo = _mm256_permute2f128_pd(a, b, 0x20);  // re0 im0 re2 im2
  const __m256d hi = _mm256_permute2f128_pd(a, b, 0x31);  // re1 im1 re3 im3
  re = _mm256_unpacklo_pd(lo, hi);
  im = _mm256_unpackhi_pd(lo, hi);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_hadd_pd(s, s));
}

inline void cmul(__m256d are, __m256d aim, __m256d bre, __m256d bim, __m256d& ore, __m256d& oim) {
  ore = _mm256_fmsub_pd(are, bre, _mm256_mul_pd(aim, bim));
  oim = _mm256_fmadd_pd(are, bim, _mm256_mul_pd(aim, bre));
}

}  // namespace

double inverse_power_sums_avx2(cplx ref, std::span<const cplx> pts, std::ptrdiff_t skip,
                               int p_max, cplx* sums) {
  const std::ptrdiff_t n = std::ssize(pts);
  __m256d sre[kMaxPower], sim[kMaxPower];
  for (int p = 0; p < p_max; ++p) sre[p] = sim[p] = _mm256_setzero_pd();
  const __m256d xref = _mm256_set1_pd(ref.real());
  const __m256d yref = _mm256_set1_pd(ref.imag());
  __m256d min2v = _mm256_set1_pd(std::numeric_limits<double>::infinity());

  std::ptrdiff_t k = 0;
  double tail_sums_re[kMaxPower] = {}, tail_sums_im[kMaxPower] = {};
  double tail_min2 = std::numeric_limits<double>::infinity();
  auto scalar_one = [&](std::ptrdiff_t idx) {
    const cplx d = ref - pts[idx];
    const double n2 = std::norm(d);
    if (n2 < tail_min2) tail_min2 = n2;
    const cplx r1 = std::conj(d) / n2;
    cplx r = r1;
    tail_sums_re[0] += r.real();
    tail_sums_im[0] += r.imag();
    for (int p = 1; p < p_max; ++p) {
      r *= r1;
      tail_sums_re[p] += r.real();
      tail_sums_im[p] += r.imag();
    }
  };

  for (; k + 4 <= n; k += 4) {
    if (skip >= k && skip < k + 4) {
      for (std::ptrdiff_t i = k; i < k + 4; ++i)
        if (i != skip) scalar_one(i);
      continue;
    }
    __m256d wre, wim;
    load_c4(pts.data() + k, wre, wim);
    const __m256d dre = _mm256_sub_pd(xref, wre);
    const __m256d dim = _mm256_sub_pd(yref, wim);
    const __m256d n2 = _mm256_fmadd_pd(dre, dre, _mm256_mul_pd(dim, dim));
    min2v = _mm256_min_pd(min2v, n2);
    const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), n2);
    const __m256d r1re = _mm256_mul_pd(dre, inv);
    const __m256d r1im = _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), dim), inv);
    __m256d rre = r1re, rim = r1im;
    sre[0] = _mm256_add_pd(sre[0], rre);
    sim[0] = _mm256_add_pd(sim[0], rim);
    for (int p = 1; p < p_max; ++p) {
      __m256d tre, tim;
      cmul(rre, rim, r1re, r1im, tre, tim);
      rre = tre;
      rim = tim;
      sre[p] = _mm256_add_pd(sre[p], rre);
      sim[p] = _mm256_add_pd(sim[p], rim);
    }
  }
  for (; k < n; ++k)
    if (k != skip) scalar_one(k);

  double min2 = tail_min2;
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, min2v);
  for (double v : lanes)
    if (v < min2) min2 = v;
  for (int p = 0; p < p_max; ++p)
    sums[p] = cplx(hsum(sre[p]) + tail_sums_re[p], hsum(sim[p]) + tail_sums_im[p]);
  return std::sqrt(min2);
}

void poly_eval_d1_x4_avx2(std::span<const cplx> coeffs, const cplx z[4], cplx v[4], cplx d[4]) {
  __m256d zre, zim;
  load_c4(z, zre, zim);
  __m256d vre = _mm256_setzero_pd(), vim = _mm256_setzero_pd();
  __m256d dre = _mm256_setzero_pd(), dim = _mm256_setzero_pd();
  for (std::ptrdiff_t k = std::ssize(coeffs) - 1; k >= 0; --k) {
    __m256d tre, tim;
    cmul(dre, dim, zre, zim, tre, tim);
    dre = _mm256_add_pd(tre, vre);
    dim = _mm256_add_pd(tim, vim);
    cmul(vre, vim, zre, zim, tre, tim);
    vre = _mm256_add_pd(tre, _mm256_set1_pd(coeffs[k].real()));
    vim = _mm256_add_pd(tim, _mm256_set1_pd(coeffs[k].imag()));
  }
  alignas(32) double vr[4], vi[4], dr[4], di[4];
  _mm256_store_pd(vr, vre);
  _mm256_store_pd(vi, vim);
  _mm256_store_pd(dr, dre);
  _mm256_store_pd(di, dim);
  for (int i = 0; i < 4; ++i) {
    v[i] = cplx(vr[i], vi[i]);
    d[i] = cplx(dr[i], di[i]);
  }
}

void weyl_eval_x4_avx2(std::span<const cplx> weyl, const cplx z[4], cplx out[4]) {
  if (weyl.empty()) {
    for (int i = 0; i < 4; ++i) out[i] = 0.0;
    return;
  }
  __m256d zre, zim;
  load_c4(z, zre, zim);
  __m256d tre = _mm256_set1_pd(1.0), tim = _mm256_setzero_pd();
  __m256d are = _mm256_set1_pd(weyl[0].real());
  __m256d aim = _mm256_set1_pd(weyl[0].imag());
  for (std::size_t n = 1; n < weyl.size(); ++n) {
    const __m256d invs = _mm256_set1_pd(1.0 / std::sqrt(static_cast<double>(n)));
    __m256d ure, uim;
    cmul(tre, tim, zre, zim, ure, uim);
    tre = _mm256_mul_pd(ure, invs);
    tim = _mm256_mul_pd(uim, invs);
    const __m256d cre = _mm256_set1_pd(weyl[n].real());
    const __m256d cim = _mm256_set1_pd(weyl[n].imag());
    are = _mm256_add_pd(are, _mm256_fmsub_pd(cre, tre, _mm256_mul_pd(cim, tim)));
    aim = _mm256_add_pd(aim, _mm256_fmadd_pd(cre, tim, _mm256_mul_pd(cim, tre)));
  }
  alignas(32) double ar[4], ai[4];
  _mm256_store_pd(ar, are);
  _mm256_store_pd(ai, aim);
  for (int i = 0; i < 4; ++i) out[i] = cplx(ar[i], ai[i]);
}

double dot_avx2(std::span<const float> a, std::span<const float> b) {
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a.data() + i), _mm256_loadu_ps(b.data() + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a.data() + i + 8), _mm256_loadu_ps(b.data() + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a.data() + i), _mm256_loadu_ps(b.data() + i), acc0);
  const __m256 acc = _mm256_add_ps(acc0, acc1);
  alignas(32) float lanes[8];
  _mm256_store_ps(lanes, acc);
  double s = 0.0;
  for (float v : lanes) s += static_cast<double>(v);
  for (; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

}  // namespace zflow::kernels

#endif  // ZFLOW_X86
