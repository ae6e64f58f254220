#pragma once

#include <complex>

#include "zflow/complex_poly.hpp"
#include "zflow/taylor.hpp"

namespace zflow {

// exp(quad z^2/2 + lin z + cst) * poly(z). Exactly closed under the heat flow,
// unitarized translations, and the metaplectic operators; the exponential
// factor never vanishes, so the zeros are the zeros of poly.
struct ExpQuadPoly {
  cplx quad{0.0};
  cplx lin{0.0};
  cplx cst{0.0};
  ComplexPoly poly = ComplexPoly::one();
};

inline constexpr double kExpCap = 700.0;  // |Re exponent| beyond this overflows doubles

cplx eval_expquadpoly(const ExpQuadPoly& f, cplx z);

struct ExpQuadEval {
  cplx value, d1, d2;
  double scale;
};
ExpQuadEval eval_d2_expquadpoly(const ExpQuadPoly& f, cplx z);

ExpQuadPoly scale_argument(const ExpQuadPoly& f, cplx lambda);  // F(lambda z)
ExpQuadPoly shift_argument(const ExpQuadPoly& f, cplx s);       // F(z + s)

// Weyl-basis expansion; pre: n_max >= deg(poly). The exponential-factor
// coefficients satisfy sqrt(n+1) E_{n+1} = lin E_n + quad sqrt(n) E_{n-1}
// directly in the Weyl basis, so no factorial appears.
TaylorFunction taylor_of_expquadpoly(const ExpQuadPoly& f, int n_max);

}  // namespace zflow
