#pragma once

#include <complex>
#include <limits>
#include <utility>

#include "zflow/expquadpoly.hpp"
#include "zflow/taylor.hpp"

namespace zflow {

// Admissible flow times. For growth exp((sigma0 + eps) r^2) the heat operator
// exists on |tau| < 1/(2 sigma0); a safety factor keeps the series away from
// the boundary where convergence degrades.
struct HeatDomain {
  double sigma0 = 0.0;
  double safety = 0.95;

  double tau_max() const {
    return sigma0 > 0.0 ? 1.0 / (2.0 * sigma0) : std::numeric_limits<double>::infinity();
  }
  double radius() const { return safety * tau_max(); }
  bool admits(cplx tau) const { return std::abs(tau) < radius(); }

  // sigma0 from the coefficient estimates: only an order-2 function constrains
  // the radius, so the estimated type is used when est_order > 1.8.
  static HeatDomain for_taylor(const TaylorFunction& f) {
    return {f.est_order() > 1.8 ? f.est_type() : 0.0, 0.95};
  }
  static HeatDomain unrestricted() { return {0.0, 0.95}; }
};

// exp(-tau D^2/2) termwise on a polynomial; finite sum, exact, and polynomial
// in tau (no sqrt(tau) branch is ever taken).
ComplexPoly heat_poly(const ComplexPoly& p, cplx tau);

// Closed form on the ExpQuadPoly class. Pre: |quad * tau| < 1 (polynomial
// factor has sigma0 = 0) and 1 + quad*tau bounded away from 0. The log branch
// is principal; inside the admissible disk Re(1 + quad*tau) > 0, so stepwise
// composition along a tau-path continues the branch automatically.
ExpQuadPoly heat_expquadpoly(const ExpQuadPoly& f, cplx tau);

TaylorFunction heat_taylor(const TaylorFunction& f, cplx tau, const HeatDomain& domain);
TaylorFunction heat_taylor(const TaylorFunction& f, cplx tau);  // domain from estimates

// Partial sum vs. closed form of the Mehler identity; |rho| < 1.
std::pair<cplx, cplx> mehler_check(cplx x, cplx y, cplx rho, int n_terms);

// Zero trajectories of the flowed sin(pi z^2), |tau| < 1/(2 pi):
// +-sqrt((arctan(2 pi tau)/(2 pi) + n)(1 + 4 pi^2 tau^2)).
cplx sinpisq_zero(int n, int sign, cplx tau);

// Zeros of the flowed e^{a0 + a1 z} sin(pi z) sit at n + tau * a1.
cplx exp_sine_zero(int n, cplx a1, cplx tau);

// Jacobi theta(z; sigma) = sum_n q^{n^2} e^{2 pi i z n}, q = e^{pi i sigma},
// Im sigma > 0. Weyl coefficients with a per-coefficient adaptive cut of the
// n-sum (the dominant n grows with the coefficient index).
TaylorFunction theta_coeffs(cplx sigma, int n_max);

// Truncated series of the closed-form test functions.
TaylorFunction taylor_sin_pi_z2(int n_max = 170);
TaylorFunction taylor_exp_sine(cplx a0, cplx a1, int n_max = 120);

}  // namespace zflow
