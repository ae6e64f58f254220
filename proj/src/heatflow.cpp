#include "zflow/heatflow.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "zflow/errors.hpp"

namespace zflow {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

ComplexPoly heat_poly(const ComplexPoly& p, cplx tau) {
  const auto a = p.coeffs();
  const int deg = p.degree();
  std::vector<cplx> out(deg + 1, cplx(0.0));
  for (int k = 0; k <= deg; ++k) {
    // coefficient of z^k: sum_m a_{k+2m} (k+2m)!/(2^m m! k!) (-tau)^m
    cplx acc = a[k];
    cplx term = 1.0;
    for (int m = 1; k + 2 * m <= deg; ++m) {
      term *= -tau * static_cast<double>((k + 2 * m) * (k + 2 * m - 1)) / (2.0 * m);
      acc += a[k + 2 * m] * term;
    }
    out[k] = acc;
  }
  return ComplexPoly(std::move(out));
}

ExpQuadPoly heat_expquadpoly(const ExpQuadPoly& f, cplx tau) {
  const cplx a = f.quad, b = f.lin;
  const cplx w = 1.0 + a * tau;
  if (std::abs(w) < 1e-12) throw SingularFlowError("heat_expquadpoly: 1 + quad*tau vanished");
  if (std::abs(a * tau) >= 1.0) {
    std::ostringstream os;
    os << "heat_expquadpoly: |quad*tau| = " << std::abs(a * tau)
       << " >= 1; admissible |tau| < " << 1.0 / std::abs(a);
    throw DomainError(os.str());
  }
  const cplx tau_star = tau / w;

  ExpQuadPoly g;
  g.quad = a / w;
  g.lin = b / w;
  g.cst = f.cst - 0.5 * tau * b * b / w - 0.5 * std::log(w);
  g.poly = heat_poly(f.poly, tau_star).affine_arg(1.0 / w, -b * tau / w);
  return g;
}

TaylorFunction heat_taylor(const TaylorFunction& f, cplx tau, const HeatDomain& domain) {
  if (!domain.admits(tau)) {
    std::ostringstream os;
    os << "heat_taylor: |tau| = " << std::abs(tau) << " outside the admissible radius "
       << domain.radius() << " (sigma = " << domain.sigma0 << ")";
    throw DomainError(os.str());
  }
  const int n_max = f.n_max();
  std::vector<cplx> b(n_max + 1, cplx(0.0));
  for (int k = 0; k <= n_max; ++k) {
    // b_k = sum_m c_{k+2m} (-tau/2)^m sqrt((k+2m)!/k!) / m!
    cplx acc = f.weyl_coeff(k);
    cplx term = 1.0;
    for (int m = 1; k + 2 * m <= n_max; ++m) {
      term *= (-0.5 * tau) *
              std::sqrt(static_cast<double>(k + 2 * m) * static_cast<double>(k + 2 * m - 1)) /
              static_cast<double>(m);
      acc += f.weyl_coeff(k + 2 * m) * term;
    }
    b[k] = acc;
  }
  return TaylorFunction::from_weyl(std::move(b));
}

TaylorFunction heat_taylor(const TaylorFunction& f, cplx tau) {
  return heat_taylor(f, tau, HeatDomain::for_taylor(f));
}

std::pair<cplx, cplx> mehler_check(cplx x, cplx y, cplx rho, int n_terms) {
  if (std::abs(rho) >= 1.0) throw DomainError("mehler_check: |rho| must be < 1");
  cplx lhs = 0.0;
  cplx hxm1 = 0.0, hx0 = 1.0, hym1 = 0.0, hy0 = 1.0;
  cplx rn = 1.0;  // rho^n / n!
  for (int n = 0; n < n_terms; ++n) {
    if (n > 0) {
      rn *= rho / static_cast<double>(n);
      const cplx nx = x * hx0 - static_cast<double>(n - 1) * hxm1;
      hxm1 = hx0;
      hx0 = nx;
      const cplx ny = y * hy0 - static_cast<double>(n - 1) * hym1;
      hym1 = hy0;
      hy0 = ny;
    }
    lhs += rn * hx0 * hy0;
  }
  const cplx r2 = rho * rho;
  const cplx rhs = std::exp(-(r2 * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * (1.0 - r2))) /
                   std::sqrt(1.0 - r2);
  return {lhs, rhs};
}

cplx sinpisq_zero(int n, int sign, cplx tau) {
  if (std::abs(tau) >= 1.0 / (2.0 * kPi))
    throw DomainError("sinpisq_zero: |tau| must be < 1/(2 pi)");
  const cplx s = std::atan(2.0 * kPi * tau) / (2.0 * kPi) + static_cast<double>(n);
  const cplx v = std::sqrt(s * (1.0 + 4.0 * kPi * kPi * tau * tau));
  return sign >= 0 ? v : -v;
}

cplx exp_sine_zero(int n, cplx a1, cplx tau) { return static_cast<double>(n) + tau * a1; }

TaylorFunction theta_coeffs(cplx sigma, int n_max) {
  if (!(sigma.imag() > 0.0)) throw DomainError("theta_coeffs: Im sigma must be > 0");
  const double decay = kPi * sigma.imag();   // |q|^{n^2} = e^{-decay n^2}
  const double phase = kPi * sigma.real();   // arg q^{n^2} = phase n^2
  std::vector<cplx> c(n_max + 1, cplx(0.0));
  for (int k = 0; k <= n_max; k += 2) {  // theta is even in z
    // Weyl coefficient: c_k = sqrt(k!)/k! * sum_n q^{n^2} (2 pi i n)^k
    //                      = e^{i pi k/2} / sqrt(k!) * 2 * sum_{n>=1} (2 pi n)^k q^{n^2}   (k > 0)
    const double half_lgamma = 0.5 * std::lgamma(static_cast<double>(k) + 1.0);
    const double n_peak = std::sqrt(std::max(1.0, static_cast<double>(k)) / (2.0 * decay));
    double lmax = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> terms;  // (log magnitude, phase angle)
    for (int n = 1;; ++n) {
      const double L =
          k * std::log(2.0 * kPi * n) - decay * static_cast<double>(n) * n - half_lgamma;
      const double th = phase * static_cast<double>(n) * n;
      terms.emplace_back(L, th);
      if (L > lmax) lmax = L;
      if (static_cast<double>(n) > n_peak + 2.0 && L < lmax - 45.0) break;
      if (n > 10000) break;
    }
    if (lmax > kExpCap)
      throw OverflowError("theta_coeffs: coefficient overflow at index " + std::to_string(k));
    cplx acc = 0.0;
    for (const auto& [L, th] : terms) acc += std::exp(L - lmax) * cplx(std::cos(th), std::sin(th));
    // e^{i pi k / 2} = i^k; k is even so this is (-1)^{k/2}.
    const double sign = (k % 4 == 0) ? 1.0 : -1.0;
    c[k] = 2.0 * sign * std::exp(lmax) * acc;
    if (k == 0) c[0] += 1.0;  // the n = 0 term
  }
  return TaylorFunction::from_weyl(std::move(c));
}

TaylorFunction taylor_sin_pi_z2(int n_max) {
  // sin(pi z^2) = sum_m (-1)^m pi^{2m+1} z^{4m+2} / (2m+1)!
  std::vector<cplx> c(n_max + 1, cplx(0.0));
  for (int m = 0; 4 * m + 2 <= n_max; ++m) {
    const int n = 4 * m + 2;
    const double L = (2 * m + 1) * std::log(kPi) - std::lgamma(2.0 * m + 2.0) +
                     0.5 * std::lgamma(static_cast<double>(n) + 1.0);
    if (L > kExpCap) throw OverflowError("taylor_sin_pi_z2: coefficient overflow");
    c[n] = (m % 2 == 0 ? 1.0 : -1.0) * std::exp(L);
  }
  return TaylorFunction::from_weyl(std::move(c));
}

TaylorFunction taylor_exp_sine(cplx a0, cplx a1, int n_max) {
  // Ordinary coefficients by convolving e^{a1 z} with sin(pi z), then e^{a0}.
  std::vector<cplx> sin_c(n_max + 1, cplx(0.0));
  for (int i = 1; i <= n_max; i += 2) {
    const int m = (i - 1) / 2;
    sin_c[i] = (m % 2 == 0 ? 1.0 : -1.0) * std::exp(i * std::log(kPi) - std::lgamma(i + 1.0));
  }
  std::vector<cplx> exp_c(n_max + 1);
  exp_c[0] = std::exp(a0);
  for (int j = 1; j <= n_max; ++j) exp_c[j] = exp_c[j - 1] * a1 / static_cast<double>(j);
  std::vector<cplx> c(n_max + 1, cplx(0.0));
  for (int n = 0; n <= n_max; ++n) {
    cplx acc = 0.0;
    for (int i = 1; i <= n; i += 2) acc += sin_c[i] * exp_c[n - i];
    c[n] = acc * std::exp(0.5 * std::lgamma(static_cast<double>(n) + 1.0));
  }
  return TaylorFunction::from_weyl(std::move(c));
}

}  // namespace zflow
