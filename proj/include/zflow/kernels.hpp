#pragma once

#include <complex>
#include <cstddef>
#include <span>

#if defined(__x86_64__) || defined(_M_X64)
#define ZFLOW_X86 1
#else
#define ZFLOW_X86 0
#endif

// Data-parallel inner loops behind the zero-dynamics and Monte Carlo code.
// Each kernel has a scalar reference implementation and (on x86-64) an AVX2
// variant selected at runtime; the two are equivalence-tested against each
// other. Set ZFLOW_FORCE_SCALAR=1 in the environment to pin the scalar path.
namespace zflow::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

bool avx2_available();
Isa active_isa();

inline constexpr int kMaxPower = 6;

// sums[p-1] += ... is overwritten: sums[p-1] = sum_{k != skip} 1/(ref - pts[k])^p
// for p = 1..p_max (p_max <= kMaxPower). skip < 0 disables the exclusion.
// Returns min_{k != skip} |ref - pts[k]| (inf when the sum is empty).
double inverse_power_sums(cplx ref, std::span<const cplx> pts, std::ptrdiff_t skip,
                          int p_max, cplx* sums);
double inverse_power_sums_scalar(cplx ref, std::span<const cplx> pts, std::ptrdiff_t skip,
                                 int p_max, cplx* sums);

// Horner evaluation of sum_k coeffs[k] z^k and its z-derivative at four points.
void poly_eval_d1_x4(std::span<const cplx> coeffs, const cplx z[4], cplx v[4], cplx d[4]);
void poly_eval_d1_x4_scalar(std::span<const cplx> coeffs, const cplx z[4], cplx v[4], cplx d[4]);

// Weyl-basis series sum_n weyl[n] z^n / sqrt(n!) at four points (values only).
void weyl_eval_x4(std::span<const cplx> weyl, const cplx z[4], cplx out[4]);
void weyl_eval_x4_scalar(std::span<const cplx> weyl, const cplx z[4], cplx out[4]);

// Dense dot product; the permutation loop of the energy test is a masked dot.
double dot(std::span<const float> a, std::span<const float> b);
double dot_scalar(std::span<const float> a, std::span<const float> b);

#if ZFLOW_X86
double inverse_power_sums_avx2(cplx ref, std::span<const cplx> pts, std::ptrdiff_t skip,
                               int p_max, cplx* sums);
void poly_eval_d1_x4_avx2(std::span<const cplx> coeffs, const cplx z[4], cplx v[4], cplx d[4]);
void weyl_eval_x4_avx2(std::span<const cplx> weyl, const cplx z[4], cplx out[4]);
double dot_avx2(std::span<const float> a, std::span<const float> b);
#endif

}  // namespace zflow::kernels
