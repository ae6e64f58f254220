#include <cmath>
#include <limits>

#include "zflow/kernels.hpp"

namespace zflow::kernels {

double inverse_power_sums_scalar(cplx ref, std::span<const cplx> pts, std::ptrdiff_t skip,
                                 int p_max, cplx* sums) {
  for (int p = 0; p < p_max; ++p) sums[p] = 0.0;
  double min2 = std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t k = 0; k < std::ssize(pts); ++k) {
    if (k == skip) continue;
    const cplx d = ref - pts[k];
    const double n2 = std::norm(d);
    if (n2 < min2) min2 = n2;
    const cplx r1 = std::conj(d) / n2;
    cplx r = r1;
    sums[0] += r;
    for (int p = 1; p < p_max; ++p) {
      r *= r1;
      sums[p] += r;
    }
  }
  return std::sqrt(min2);
}

void poly_eval_d1_x4_scalar(std::span<const cplx> coeffs, const cplx z[4], cplx v[4], cplx d[4]) {
  for (int i = 0; i < 4; ++i) {
    cplx val = 0.0, der = 0.0;
    for (std::ptrdiff_t k = std::ssize(coeffs) - 1; k >= 0; --k) {
      der = der * z[i] + val;
      val = val * z[i] + coeffs[k];
    }
    v[i] = val;
    d[i] = der;
  }
}

void weyl_eval_x4_scalar(std::span<const cplx> weyl, const cplx z[4], cplx out[4]) {
  for (int i = 0; i < 4; ++i) {
    cplx t = 1.0;
    cplx acc = weyl.empty() ? cplx(0.0) : weyl[0];
    for (std::size_t n = 1; n < weyl.size(); ++n) {
      t *= z[i] / std::sqrt(static_cast<double>(n));
      acc += weyl[n] * t;
    }
    out[i] = acc;
  }
}

double dot_scalar(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

}  // namespace zflow::kernels
