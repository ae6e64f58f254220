#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "zflow/expquadpoly.hpp"

namespace zflow {

struct Mat2 {
  double a, b, c, d;
  double det() const { return a * d - b * c; }
};

// SL(2;R) element with its SU(1,1) complex-variables form
//   p = (a - ib + ic + d)/2,  q = (a + ib + ic - d)/2,  |p|^2 - |q|^2 = det = 1,
// and the chosen branch of sqrt(p) recorded as a sign (the metaplectic double
// cover is tracked per element, never as a global section).
struct GroupElement {
  Mat2 mat;
  cplx p, q;
  int sign = +1;
};

std::pair<cplx, cplx> to_su11(const Mat2& m);  // checks det within 1e-10

GroupElement group_element(const Mat2& m, int sign = +1);
GroupElement rotation(double theta);
GroupElement atau_matrix(cplx tau);  // unique positive symmetric element with q/p = tau
GroupElement multiply(const GroupElement& g1, const GroupElement& g2);

struct Factorization {
  double theta;  // arg p
  cplx tau;      // q/p, |tau| < 1
};
Factorization factor(const GroupElement& g);
Mat2 reconstruct(const Factorization& f);  // rotation(theta) * A_tau

// V(A) F = sign * e^{-i theta/2} [V_tau F](e^{-i theta} z) through the
// rotation-positive factorization; exact on the closed class.
ExpQuadPoly apply_VA(const ExpQuadPoly& f, const GroupElement& g);

struct ComposeReport {
  bool skipped = false;
  std::string skip_reason;
  bool match = false;
  int sign = 0;
  double max_rel_err = 0.0;
};
// Compares V(g1)V(g2)F against V(g1 g2)F coefficientwise up to a global sign.
ComposeReport compose_check(const GroupElement& g1, const GroupElement& g2, const ExpQuadPoly& f);

// phi = (p tau + q)/(qbar tau + pbar): the hyperbolic isometry of the tau-disk.
// psi = (q taubar + p)/|q taubar + p|.
std::pair<cplx, cplx> hyperbolic_phi_psi(cplx p, cplx q, cplx tau);

// Zeros of V(A)G from the zeros of the flowed function at tau = factor(g).tau:
// z -> e^{i theta} z / sqrt(1 - |tau|^2).
std::vector<cplx> zero_action(const GroupElement& g, std::span<const cplx> zeros);

// Continuation of the sqrt(p) branch along a discrete path of group elements;
// returns the end sign relative to the principal branch. A closed loop of
// rotations through 2 pi returns -1.
int continued_sign_along(std::span<const GroupElement> path);

}  // namespace zflow
