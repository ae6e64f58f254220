#include <cstdlib>

#include "zflow/kernels.hpp"

namespace zflow::kernels {

bool avx2_available() {
#if ZFLOW_X86
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {
bool pick_avx2() {
  const char* force = std::getenv("ZFLOW_FORCE_SCALAR");
  if (force && force[0] != '\0' && force[0] != '0') return false;
  return avx2_available();
}
const bool g_use_avx2 = pick_avx2();
}  // namespace

Isa active_isa() { return g_use_avx2 ? Isa::avx2 : Isa::scalar; }

double inverse_power_sums(cplx ref, std::span<const cplx> pts, std::ptrdiff_t skip,
                          int p_max, cplx* sums) {
#if ZFLOW_X86
  if (g_use_avx2) return inverse_power_sums_avx2(ref, pts, skip, p_max, sums);
#endif
  return inverse_power_sums_scalar(ref, pts, skip, p_max, sums);
}

void poly_eval_d1_x4(std::span<const cplx> coeffs, const cplx z[4], cplx v[4], cplx d[4]) {
#if ZFLOW_X86
  if (g_use_avx2) return poly_eval_d1_x4_avx2(coeffs, z, v, d);
#endif
  return poly_eval_d1_x4_scalar(coeffs, z, v, d);
}

void weyl_eval_x4(std::span<const cplx> weyl, const cplx z[4], cplx out[4]) {
#if ZFLOW_X86
  if (g_use_avx2) return weyl_eval_x4_avx2(weyl, z, out);
#endif
  return weyl_eval_x4_scalar(weyl, z, out);
}

double dot(std::span<const float> a, std::span<const float> b) {
#if ZFLOW_X86
  if (g_use_avx2) return dot_avx2(a, b);
#endif
  return dot_scalar(a, b);
}

}  // namespace zflow::kernels
