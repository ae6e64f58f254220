#include "zflow/expquadpoly.hpp"

#include <cmath>
#include <string>

#include "zflow/errors.hpp"

namespace zflow {

namespace {
cplx exponent_at(const ExpQuadPoly& f, cplx z) { return 0.5 * f.quad * z * z + f.lin * z + f.cst; }

cplx checked_exp(cplx g) {
  if (std::abs(g.real()) > kExpCap)
    throw OverflowError("eval_expquadpoly: exponent real part " + std::to_string(g.real()) +
                        " exceeds cap " + std::to_string(kExpCap));
  return std::exp(g);
}
}  // namespace

cplx eval_expquadpoly(const ExpQuadPoly& f, cplx z) {
  return checked_exp(exponent_at(f, z)) * f.poly.eval(z);
}

ExpQuadEval eval_d2_expquadpoly(const ExpQuadPoly& f, cplx z) {
  const cplx e = checked_exp(exponent_at(f, z));
  const cplx g1 = f.quad * z + f.lin;
  const auto p = f.poly.eval_d2(z);
  const cplx d1 = e * (g1 * p.value + p.d1);
  const cplx d2 = e * ((f.quad + g1 * g1) * p.value + 2.0 * g1 * p.d1 + p.d2);
  return {e * p.value, d1, d2, std::abs(e) * p.scale};
}

ExpQuadPoly scale_argument(const ExpQuadPoly& f, cplx lambda) {
  return {f.quad * lambda * lambda, f.lin * lambda, f.cst, f.poly.scale_arg(lambda)};
}

ExpQuadPoly shift_argument(const ExpQuadPoly& f, cplx s) {
  // quad (z+s)^2/2 + lin (z+s) = quad z^2/2 + (lin + quad s) z + (quad s^2/2 + lin s)
  return {f.quad, f.lin + f.quad * s, f.cst + 0.5 * f.quad * s * s + f.lin * s,
          f.poly.shift_arg(s)};
}

TaylorFunction taylor_of_expquadpoly(const ExpQuadPoly& f, int n_max) {
  if (n_max < f.poly.degree())
    throw DomainError("taylor_of_expquadpoly: n_max below polynomial degree");
  const cplx e0 = checked_exp(f.cst);

  // Weyl coefficients E_n of exp(quad z^2/2 + lin z + cst).
  std::vector<cplx> E(n_max + 1, cplx(0.0));
  E[0] = e0;
  for (int n = 0; n < n_max; ++n) {
    cplx next = f.lin * E[n];
    if (n >= 1) next += f.quad * std::sqrt(static_cast<double>(n)) * E[n - 1];
    E[n + 1] = next / std::sqrt(static_cast<double>(n + 1));
    if (!std::isfinite(E[n + 1].real()) || !std::isfinite(E[n + 1].imag()))
      throw OverflowError("taylor_of_expquadpoly: coefficient overflow at index " +
                          std::to_string(n + 1));
  }

  // Multiply by poly: c_n = sum_j p_j E_{n-j} sqrt(n (n-1) ... (n-j+1)).
  const auto pc = f.poly.coeffs();
  std::vector<cplx> c(n_max + 1, cplx(0.0));
  for (int n = 0; n <= n_max; ++n) {
    cplx acc = 0.0;
    double fall = 1.0;  // sqrt of the falling factorial
    for (int j = 0; j < std::ssize(pc); ++j) {
      if (j > n) break;
      if (j > 0) fall *= std::sqrt(static_cast<double>(n - j + 1));
      acc += pc[j] * E[n - j] * fall;
    }
    c[n] = acc;
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
      throw OverflowError("taylor_of_expquadpoly: coefficient overflow at index " +
                          std::to_string(n));
  }
  return TaylorFunction::from_weyl(std::move(c));
}

}  // namespace zflow
