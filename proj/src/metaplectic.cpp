#include "zflow/metaplectic.hpp"

#include <cmath>
#include <sstream>

#include "zflow/errors.hpp"
#include "zflow/heatflow.hpp"

namespace zflow {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr cplx kI{0.0, 1.0};
}  // namespace

std::pair<cplx, cplx> to_su11(const Mat2& m) {
  if (std::abs(m.det() - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "to_su11: determinant " << m.det() << " is not 1";
    throw DomainError(os.str());
  }
  const cplx p = 0.5 * cplx(m.a + m.d, m.c - m.b);
  const cplx q = 0.5 * cplx(m.a - m.d, m.b + m.c);
  return {p, q};
}

GroupElement group_element(const Mat2& m, int sign) {
  const auto [p, q] = to_su11(m);
  return {m, p, q, sign >= 0 ? +1 : -1};
}

GroupElement rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return group_element({c, -s, s, c});
}

GroupElement atau_matrix(cplx tau) {
  if (std::abs(tau) >= 1.0) throw DomainError("atau_matrix: |tau| must be < 1");
  const double f = 1.0 / std::sqrt(1.0 - std::norm(tau));
  return group_element({f * (1.0 + tau.real()), f * tau.imag(), f * tau.imag(),
                        f * (1.0 - tau.real())});
}

GroupElement multiply(const GroupElement& g1, const GroupElement& g2) {
  const Mat2& x = g1.mat;
  const Mat2& y = g2.mat;
  Mat2 m{x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
         x.c * y.b + x.d * y.d};
  return group_element(m, g1.sign * g2.sign);
}

Factorization factor(const GroupElement& g) { return {std::arg(g.p), g.q / g.p}; }

Mat2 reconstruct(const Factorization& f) {
  const GroupElement at = atau_matrix(f.tau);
  const GroupElement rot = rotation(f.theta);
  return multiply(rot, at).mat;
}

namespace {
// Metaplectic positive-element operator: the V_tau form with the Gaussian
// prefactor conjugated,
//   (1-|tau|^2)^{1/4} e^{conj(tau) z^2/2} (e^{-tau D^2/2} f)(z sqrt(1-|tau|^2)).
// It coincides with V_tau for real tau, preserves the GAF law for all tau,
// and is the unique member of the V_tau family that composes projectively
// with rotations: tau' = (tau1+tau2)/(1+tau1 conj(tau2)),
// theta' = arg(1 + tau1 conj(tau2)) -- exactly the factorization of
// A_{tau1} A_{tau2}. (The symmetric-kernel variant is not closed under
// composition when tau is complex.)
ExpQuadPoly metaplectic_positive(const ExpQuadPoly& f, cplx tau) {
  if (std::abs(tau) >= 1.0) throw DomainError("apply_VA: |tau| must be < 1");
  const double s = std::sqrt(1.0 - std::norm(tau));
  ExpQuadPoly out = scale_argument(heat_expquadpoly(f, tau), s);
  out.quad += std::conj(tau);
  out.cst += 0.25 * std::log(1.0 - std::norm(tau));
  return out;
}
}  // namespace

ExpQuadPoly apply_VA(const ExpQuadPoly& f, const GroupElement& g) {
  const Factorization fac = factor(g);
  ExpQuadPoly out = metaplectic_positive(f, fac.tau);
  out = scale_argument(out, std::exp(-kI * fac.theta));
  out.cst += -kI * (0.5 * fac.theta);
  if (g.sign < 0) out.cst += kI * kPi;
  return out;
}

ComposeReport compose_check(const GroupElement& g1, const GroupElement& g2,
                            const ExpQuadPoly& f) {
  ComposeReport rep;
  ExpQuadPoly lhs, rhs;
  try {
    lhs = apply_VA(apply_VA(f, g2), g1);
    rhs = apply_VA(f, multiply(g1, g2));
  } catch (const DomainError& e) {
    rep.skipped = true;
    rep.skip_reason = e.what();
    return rep;
  } catch (const SingularFlowError& e) {
    rep.skipped = true;
    rep.skip_reason = e.what();
    return rep;
  }

  // Normalize each side to exp(...) * (monic poly) and fold the leading
  // coefficient into the constant; the two sides may then differ only by the
  // metaplectic sign.
  const cplx la = lhs.poly.leading(), lb = rhs.poly.leading();
  if (la == cplx(0.0) || lb == cplx(0.0)) {
    rep.skipped = true;
    rep.skip_reason = "degenerate polynomial factor";
    return rep;
  }
  double err = 0.0;
  err = std::max(err, std::abs(lhs.quad - rhs.quad) / std::max(1.0, std::abs(rhs.quad)));
  err = std::max(err, std::abs(lhs.lin - rhs.lin) / std::max(1.0, std::abs(rhs.lin)));
  const int deg = std::max(lhs.poly.degree(), rhs.poly.degree());
  for (int k = 0; k <= deg; ++k) {
    const cplx ca = lhs.poly.coeff(k) / la;
    const cplx cb = rhs.poly.coeff(k) / lb;
    err = std::max(err, std::abs(ca - cb) / std::max(1.0, std::abs(cb)));
  }
  const cplx delta = (lhs.cst + std::log(la)) - (rhs.cst + std::log(lb));
  const cplx ratio = std::exp(cplx(0.0, delta.imag())) * std::exp(delta.real());
  const double to_plus = std::abs(ratio - 1.0);
  const double to_minus = std::abs(ratio + 1.0);
  rep.sign = to_plus <= to_minus ? +1 : -1;
  err = std::max(err, std::min(to_plus, to_minus));
  rep.max_rel_err = err;
  rep.match = err < 1e-9;
  return rep;
}

std::pair<cplx, cplx> hyperbolic_phi_psi(cplx p, cplx q, cplx tau) {
  if (std::abs(std::norm(p) - std::norm(q) - 1.0) > 1e-9)
    throw DomainError("hyperbolic_phi_psi: |p|^2 - |q|^2 must be 1");
  if (std::abs(tau) >= 1.0) throw DomainError("hyperbolic_phi_psi: |tau| must be < 1");
  const cplx phi = (p * tau + q) / (std::conj(q) * tau + std::conj(p));
  const cplx w = q * std::conj(tau) + p;
  return {phi, w / std::abs(w)};
}

std::vector<cplx> zero_action(const GroupElement& g, std::span<const cplx> zeros) {
  const Factorization fac = factor(g);
  const cplx scale = std::exp(kI * fac.theta) / std::sqrt(1.0 - std::norm(fac.tau));
  std::vector<cplx> out;
  out.reserve(zeros.size());
  for (cplx z : zeros) out.push_back(scale * z);
  return out;
}

int continued_sign_along(std::span<const GroupElement> path) {
  if (path.empty()) return +1;
  double theta = std::arg(path[0].p);
  double prev_raw = theta;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double raw = std::arg(path[i].p);
    double delta = raw - prev_raw;
    while (delta > kPi) delta -= 2.0 * kPi;
    while (delta < -kPi) delta += 2.0 * kPi;
    theta += delta;
    prev_raw = raw;
  }
  const long k = std::lround((theta - std::arg(path.back().p)) / (2.0 * kPi));
  return (k % 2 == 0) ? +1 : -1;
}

}  // namespace zflow
