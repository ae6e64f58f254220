#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

#include "zflow/errors.hpp"
#include "zflow/gaf.hpp"
#include "zflow/heatflow.hpp"
#include "zflow/rng.hpp"
#include "zflow/zeros.hpp"

using namespace zflow;

namespace {

ComplexPoly poly_from_roots(std::span<const cplx> roots) {
  ComplexPoly p = ComplexPoly::one();
  for (cplx r : roots) p = p * ComplexPoly({-r, cplx(1.0)});
  return p;
}

cplx fd2(const std::function<cplx(double)>& f, double h) {
  return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
}

cplx fd3(const std::function<cplx(double)>& f, double h) {
  return (f(2 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2 * h)) / (2.0 * h * h * h);
}

// Track the zero starting at z0 to real time t, polish the endpoint to
// machine precision (finite-difference oracles divide by h^2 or h^3).
cplx tracked_at(const FlowField& flow, cplx z0, double t) {
  if (t == 0.0) return z0;
  const cplx path[2] = {cplx(0.0), cplx(t)};
  StepControl ctrl;
  ctrl.initial_dtau = std::min(1e-2, std::abs(t) / 4);
  const ZeroTrajectory traj = track_zero(flow, z0, path, ctrl);
  REQUIRE(traj.status == TrajStatus::completed);
  cplx z = traj.samples.back().z;
  for (int it = 0; it < 6; ++it) {
    const FlowEval ev = flow.eval(z, t);
    if (ev.d1 == cplx(0.0)) break;
    z -= ev.value / ev.d1;
  }
  return z;
}

}  // namespace

TEST_CASE("find_roots basics") {
  {
    const ZeroSet zs = find_roots(ComplexPoly({cplx(1.0), cplx(0.0), cplx(1.0)}));
    REQUIRE(zs.zeros.size() == 2);
    std::vector<cplx> sorted = zs.zeros;
    std::sort(sorted.begin(), sorted.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
    CHECK(std::abs(sorted[0] - cplx(0, -1)) < 1e-12);
    CHECK(std::abs(sorted[1] - cplx(0, 1)) < 1e-12);
  }
  {
    // z^2 - 1 - tau at tau = 0.21
    const ZeroSet zs = find_roots(ComplexPoly({cplx(-1.21), cplx(0.0), cplx(1.0)}));
    REQUIRE(zs.zeros.size() == 2);
    CHECK(std::abs(std::abs(zs.zeros[0]) - 1.1) < 1e-12);
    CHECK(std::abs(std::abs(zs.zeros[1]) - 1.1) < 1e-12);
  }
  {
    // a triple root is recovered to the expected eps^(1/3) accuracy
    const ComplexPoly p = poly_from_roots(std::vector<cplx>{0.5, 0.5, 0.5});
    const ZeroSet zs = find_roots(p);
    int total = 0;
    for (std::size_t i = 0; i < zs.zeros.size(); ++i) {
      total += zs.multiplicities[i];
      CHECK(std::abs(zs.zeros[i] - 0.5) < 1e-4);
    }
    CHECK(total == 3);
  }
  {
    // exact zero roots are recognized with their multiplicity
    const ZeroSet zs = find_roots(ComplexPoly({cplx(0.0), cplx(0.0), cplx(-1.0), cplx(1.0)}));
    bool found_double_zero = false;
    for (std::size_t i = 0; i < zs.zeros.size(); ++i)
      if (std::abs(zs.zeros[i]) < 1e-12 && zs.multiplicities[i] == 2) found_double_zero = true;
    CHECK(found_double_zero);
  }
  CHECK_THROWS_AS(find_roots(ComplexPoly({cplx(3.0)})), DomainError);
}

TEST_CASE("find_roots on a Weyl polynomial: backward-error residuals") {
  const GafSample g = sample_gaf(60, 2024);
  const ComplexPoly p = g.taylor.to_ordinary_poly();
  const ZeroSet zs = find_roots(p);
  int count = 0;
  for (int m : zs.multiplicities) count += m;
  CHECK(count == 60);
  for (cplx r : zs.zeros) {
    const auto ev = p.eval_d2(r);
    CHECK(std::abs(ev.value) <= 1e-9 * ev.scale);
  }
}

TEST_CASE("zero_velocity_simple") {
  const ComplexPoly p({cplx(-1.0), cplx(0.0), cplx(1.0)});  // z^2 - 1
  const auto ev = p.eval_d2(1.0);
  CHECK(std::abs(zero_velocity_simple({ev.value, ev.d1, ev.d2, ev.scale}) - 0.5) < 1e-14);

  const ComplexPoly lin({cplx(0.0), cplx(1.0)});
  const auto evl = lin.eval_d2(0.0);
  CHECK(std::abs(zero_velocity_simple({evl.value, evl.d1, evl.d2, evl.scale})) == 0.0);

  // double zero: not simple
  const ComplexPoly dbl = poly_from_roots(std::vector<cplx>{0.0, 0.0});
  const auto evd = dbl.eval_d2(0.0);
  CHECK_THROWS_AS(zero_velocity_simple({evd.value, evd.d1, evd.d2, evd.scale}),
                  NonSimpleZeroError);

  // truncated sin(pi z^2) at z = 1, tau = 0: matches d/dtau of the closed form
  const TaylorFunction spz = taylor_sin_pi_z2(170);
  const auto evs = spz.eval_d2(1.0);
  const cplx v = zero_velocity_simple({evs.value, evs.d1, evs.d2, evs.scale});
  const double h = 1e-6;
  const cplx closed = (sinpisq_zero(1, +1, h) - sinpisq_zero(1, +1, -h)) / (2.0 * h);
  CHECK(std::abs(v - closed) < 1e-8);
  CHECK(std::abs(v - 0.5) < 1e-8);
}

TEST_CASE("velocity_poly") {
  {
    ZeroSet zs{{cplx(1.0), cplx(-1.0)}, {1, 1}, 0.0};
    CHECK(std::abs(velocity_poly(zs, 0) - 0.5) < 1e-15);
  }
  {
    ZeroSet zs{{cplx(0.0)}, {1}, 0.0};
    CHECK(std::abs(velocity_poly(zs, 0)) == 0.0);
  }
  {
    ZeroSet zs{{cplx(1.0), cplx(1.0) + 1e-14}, {1, 1}, 0.0};
    CHECK_THROWS_AS(velocity_poly(zs, 0), CollisionError);
  }
  // equivalence with the log-derivative form at every simple zero
  RngStream rng(77, 0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<cplx> roots(8);
    for (auto& r : roots) r = 2.5 * rng.complex_gaussian();
    const ComplexPoly p = poly_from_roots(roots);
    ZeroSet zs{roots, std::vector<int>(8, 1), 0.0};
    for (std::size_t j = 0; j < roots.size(); ++j) {
      const auto ev = p.eval_d2(roots[j]);
      const cplx via_flow = zero_velocity_simple({ev.value, ev.d1, ev.d2, ev.scale});
      CHECK(std::abs(velocity_poly(zs, j) - via_flow) <= 1e-9 * (1.0 + std::abs(via_flow)));
    }
  }
}

TEST_CASE("acceleration: frozen values and finite-difference oracle") {
  {
    ZeroSet zs{{cplx(1.0), cplx(-1.0)}, {1, 1}, 0.0};
    CHECK(std::abs(acceleration(zs, 0) + 0.25) < 1e-15);
  }
  {
    // {1,-1,i,-i} at 1: -2 (1/8 + 1/(1-i)^3 + 1/(1+i)^3) = 3/4
    ZeroSet zs{{cplx(1.0), cplx(-1.0), cplx(0, 1), cplx(0, -1)}, {1, 1, 1, 1}, 0.0};
    const cplx acc = acceleration(zs, 0);
    CHECK(std::abs(acc - 0.75) < 1e-14);

    // second central difference of the tracked flow
    const ExpQuadFlow flow(ExpQuadPoly{0.0, 0.0, 0.0, poly_from_roots(zs.zeros)});
    const cplx fd = fd2([&](double t) { return tracked_at(flow, 1.0, t); }, 1e-3);
    CHECK(std::abs(fd - acc) < 1e-5);
  }
  {
    ZeroSet zs{{cplx(0.3, 0.2)}, {1}, 0.0};
    CHECK(std::abs(acceleration(zs, 0)) == 0.0);
  }
}

TEST_CASE("velocity_S1: frozen example and one-zero closed flow") {
  {
    const std::vector<cplx> zeros{cplx(1.0), cplx(-1.0)};
    CHECK(std::abs(velocity_S1(zeros, 0, 0.0, 0.0) - 0.5) < 1e-15);
  }
  {
    // F = e^{b z} (z - z1): the zero moves at exactly b. The theorem's
    // a1 = dlog F(c) = b - 1/(z1 - c), and the w = z1 term of the sum
    // contributes 1/(z1 - c), recovering b.
    const cplx b(0.6, -0.3), z1(2.0, 0.5), c(0.3, 0.1);
    const cplx a1 = b - 1.0 / (z1 - c);
    const std::vector<cplx> zeros{z1};
    CHECK(std::abs(velocity_S1(zeros, 0, a1, c) - b) < 1e-14);

    const ExpQuadFlow flow(ExpQuadPoly{0.0, b, 0.0, poly_from_roots(zeros)});
    const double h = 1e-5;
    const cplx fd = (tracked_at(flow, z1, h) - tracked_at(flow, z1, -h)) / (2.0 * h);
    CHECK(std::abs(fd - b) < 1e-7);
  }
  {
    // truncated e^{a1 z} sin(pi z): its central zeros move at a1. The zero
    // list must be the full root set of the truncation (the S1 sum over a
    // hand-built sublattice has an O(1/N) tail).
    const cplx slope(0.35, 0.15);
    const TaylorFunction f = taylor_exp_sine(0.0, slope, 48);
    const cplx c(0.25, 1.0 / std::exp(1.0));
    const auto at_c = f.eval_d2(c);
    const cplx a1 = at_c.d1 / at_c.value;
    const ZeroSet zs = find_roots(f.to_ordinary_poly());
    std::vector<cplx> zeros;
    for (std::size_t i = 0; i < zs.zeros.size(); ++i)
      for (int mm = 0; mm < zs.multiplicities[i]; ++mm) zeros.push_back(zs.zeros[i]);
    for (double target : {0.0, 1.0, -2.0}) {
      std::size_t j = 0;
      for (std::size_t i = 1; i < zeros.size(); ++i)
        if (std::abs(zeros[i] - target) < std::abs(zeros[j] - target)) j = i;
      const cplx v = velocity_S1(zeros, j, a1, c);
      CHECK(std::abs(v - slope) < 1e-6);
    }
  }
}

TEST_CASE("velocity_S2 and the (1-z^2)e^{z^2} exact flow") {
  // z(tau) = sqrt(1 + 5 tau + 6 tau^2) for the zero starting at 1:
  // z'(0) = 5/2, z''(0) = -1/4, z'''(0) = 15/8.
  const std::vector<cplx> zeros{cplx(1.0), cplx(-1.0)};
  const cplx a1 = 0.0, a2 = 0.0;  // dlog of (1-z^2)e^{z^2} at 0: both vanish
  const cplx v = velocity_S2(zeros, 0, a1, a2, 0.0);
  CHECK(std::abs(v - 2.5) < 1e-14);

  const ExpQuadPoly f{2.0, 0.0, 0.0, poly_from_roots(zeros)};  // e^{z^2}(z^2-1), same zeros
  const ExpQuadFlow flow(f);
  const double h = 1e-4;
  const cplx fd = (tracked_at(flow, 1.0, h) - tracked_at(flow, 1.0, -h)) / (2.0 * h);
  CHECK(std::abs(fd - v) < 1e-6);

  const cplx facc = fd2([&](double t) { return tracked_at(flow, 1.0, t); }, 1e-3);
  ZeroSet zs{zeros, {1, 1}, 0.0};
  CHECK(std::abs(acceleration(zs, 0) + 0.25) < 1e-14);
  CHECK(std::abs(facc - acceleration(zs, 0)) < 1e-5);

  const MomentTable mt = MomentTable::from_zeros(zeros, 0, 6, HadamardCase::S2, a1, a2);
  const cplx reg = regularized_m2(zeros, 0, 0.0);
  CHECK(std::abs(reg - cplx(0.25 - 2.0)) < 1e-14);
  const cplx d3 = third_derivative(HadamardCase::S2, mt, reg);
  CHECK(std::abs(d3 - 1.875) < 1e-13);
  // Richardson-extrapolated third difference kills the h^2 error term
  const cplx f3a = fd3([&](double t) { return tracked_at(flow, 1.0, t); }, 8e-3);
  const cplx f3b = fd3([&](double t) { return tracked_at(flow, 1.0, t); }, 4e-3);
  const cplx fd3v = (4.0 * f3b - f3a) / 3.0;
  CHECK(std::abs(fd3v - d3) < 2e-4);
}

TEST_CASE("velocity_S2 one-zero closed flow") {
  // F = e^{a z^2/2 + b z}(z - z1): zero velocity b + a z1.
  const cplx a(0.5, 0.2), b(-0.3, 0.4), z1(1.5, -0.7);
  const cplx a1 = b - 1.0 / z1;  // dlog F at 0
  const cplx a2 = a - 1.0 / (z1 * z1);
  const std::vector<cplx> zeros{z1};
  const cplx v = velocity_S2(zeros, 0, a1, a2, 0.0);
  CHECK(std::abs(v - (b + a * z1)) < 1e-14);

  const ExpQuadFlow flow(ExpQuadPoly{a, b, 0.0, poly_from_roots(zeros)});
  const double h = 1e-5;
  const cplx fd = (tracked_at(flow, z1, h) - tracked_at(flow, z1, -h)) / (2.0 * h);
  CHECK(std::abs(fd - v) < 1e-7);
}

TEST_CASE("aux_derivatives") {
  {
    const auto d = aux_derivatives(HadamardCase::S2, {}, cplx(0.7, 0.1), cplx(-0.4, 0.3), 0.0);
    CHECK(std::abs(d.a1_prime - (-cplx(0.7, 0.1) * cplx(-0.4, 0.3))) < 1e-15);
    CHECK(std::abs(d.a2_prime - (-cplx(-0.4, 0.3) * cplx(-0.4, 0.3))) < 1e-15);
  }
  {
    // e^{z^2/2}: a2(tau) = 1/(1+tau), so a2'(0) = -1 = -a2(0)^2
    const ExpQuadPoly f{1.0, 0.0, 0.0, ComplexPoly::one()};
    const double h = 1e-6;
    const cplx a2p = (heat_expquadpoly(f, h).quad - heat_expquadpoly(f, -h).quad) / (2.0 * h);
    CHECK(std::abs(a2p + 1.0) < 1e-8);
    const auto d = aux_derivatives(HadamardCase::S2, {}, 0.0, 1.0, 0.0);
    CHECK(std::abs(d.a2_prime + 1.0) < 1e-15);
  }
  {
    // frozen hand values for zeros {1,-1}, c = i (S1 and S2 agree with the
    // polynomial's log-derivative data)
    const std::vector<cplx> zeros{cplx(1.0), cplx(-1.0)};
    const cplx c(0.0, 1.0);
    const cplx t1 = 1.0 / (1.0 - c) + 1.0 / (-1.0 - c);
    const cplx a1 = -t1;
    const auto s1 = aux_derivatives(HadamardCase::S1, zeros, a1, 0.0, c);
    CHECK(std::abs(s1.a1_prime - cplx(0.0, 0.5)) < 1e-14);
    const cplx a2 = -(1.0 / ((1.0 - c) * (1.0 - c)) + 1.0 / ((1.0 + c) * (1.0 + c)));
    const auto s2 = aux_derivatives(HadamardCase::S2, zeros, a1, a2, c);
    CHECK(std::abs(s2.a1_prime - cplx(0.0, 0.5)) < 1e-14);
    CHECK(std::abs(s2.a2_prime + 0.5) < 1e-14);
  }
  {
    // truncated sin(pi z^2) at c = 1/4: a1' matches the finite difference of
    // d/dz log F(c, tau) at tau = 0 (S2 case; order 2, type pi). Degree 80
    // keeps the truncation's spurious outer roots numerically well-posed.
    const TaylorFunction f = taylor_sin_pi_z2(80);
    const TaylorFlow flow(f);
    const cplx c(0.25, 0.0);
    auto a_of = [&](double t) {
      const FlowEval ev = flow.eval(c, t);
      return ev.d1 / ev.value;
    };
    auto a2_of = [&](double t) {
      const FlowEval ev = flow.eval(c, t);
      const cplx lp = ev.d1 / ev.value;
      return ev.d2 / ev.value - lp * lp;
    };
    const double h = 1e-5;
    const cplx a1p_fd = (a_of(h) - a_of(-h)) / (2.0 * h);
    // full root set of the truncation, multiplicities expanded
    const ZeroSet zs = find_roots(f.to_ordinary_poly());
    std::vector<cplx> zeros;
    for (std::size_t i = 0; i < zs.zeros.size(); ++i)
      for (int mm = 0; mm < zs.multiplicities[i]; ++mm) zeros.push_back(zs.zeros[i]);
    const auto d = aux_derivatives(HadamardCase::S2, zeros, a_of(0.0), a2_of(0.0), c);
    CHECK(std::abs(d.a1_prime - a1p_fd) < 1e-5 * (1.0 + std::abs(a1p_fd)));
  }
}

TEST_CASE("moment_derivative") {
  {
    MomentTable mt;
    mt.hcase = HadamardCase::S0;
    mt.M.assign(7, cplx(0.0));
    CHECK(std::abs(moment_derivative(mt, 2)) == 0.0);
  }
  {
    // zeros {1,-1}: M(j,p) = 2^{-p}; M(j,2,tau) = 1/(4(1+tau)) so M' = -1/4
    const std::vector<cplx> zeros{cplx(1.0), cplx(-1.0)};
    const MomentTable mt = MomentTable::from_zeros(zeros, 0, 6, HadamardCase::S0);
    const cplx d = moment_derivative(mt, 2);
    CHECK(std::abs(d + 0.25) < 1e-14);
  }
  {
    MomentTable mt;
    mt.hcase = HadamardCase::S0;
    mt.M.assign(4, cplx(0.0));
    CHECK_THROWS_AS(moment_derivative(mt, 2), DomainError);  // needs M(j,4)
    mt.hcase = HadamardCase::S2;
    mt.M.assign(7, cplx(0.0));
    CHECK_THROWS_AS(moment_derivative(mt, 2), DomainError);  // S2 not covered
  }
  // random degree-8 polynomial: matches finite differences of M^N(j,p,tau)
  RngStream rng(55, 0);
  std::vector<cplx> roots(8);
  for (auto& r : roots) r = 2.0 * rng.complex_gaussian() + cplx(0.5, 0.0);
  const ComplexPoly p = poly_from_roots(roots);
  const ExpQuadFlow flow(ExpQuadPoly{0.0, 0.0, 0.0, p});
  const std::size_t j = 3;
  auto moment_at = [&](double t, int pw) {
    std::vector<cplx> moved(roots.size());
    for (std::size_t k = 0; k < roots.size(); ++k) moved[k] = tracked_at(flow, roots[k], t);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < moved.size(); ++k)
      if (k != j) acc += std::pow(moved[j] - moved[k], -pw);
    return acc;
  };
  const MomentTable mt = MomentTable::from_zeros(roots, j, 6, HadamardCase::S0);
  const double h = 1e-4;
  for (int pw : {2, 3, 4}) {
    const cplx fd = (moment_at(h, pw) - moment_at(-h, pw)) / (2.0 * h);
    const cplx formula = moment_derivative(mt, pw);
    CHECK(std::abs(fd - formula) <= 1e-5 * (1.0 + std::abs(formula)));
  }
}

TEST_CASE("third_derivative S0 frozen value") {
  {
    // no interaction terms at all
    MomentTable empty;
    empty.M.assign(7, cplx(0.0));
    CHECK(std::abs(third_derivative(HadamardCase::S0, empty)) == 0.0);
    CHECK(std::abs(third_derivative(HadamardCase::S2, empty, 0.0)) == 0.0);
  }
  const std::vector<cplx> zeros{cplx(1.0), cplx(-1.0)};
  const MomentTable mt = MomentTable::from_zeros(zeros, 0, 6, HadamardCase::S0);
  const cplx d3 = third_derivative(HadamardCase::S0, mt);
  CHECK(std::abs(d3 - 0.375) < 1e-15);  // z(tau) = sqrt(1+tau): z''' = 3/8

  const ExpQuadFlow flow(ExpQuadPoly{0.0, 0.0, 0.0, poly_from_roots(zeros)});
  const cplx f3a = fd3([&](double t) { return tracked_at(flow, 1.0, t); }, 1e-2);
  const cplx f3b = fd3([&](double t) { return tracked_at(flow, 1.0, t); }, 5e-3);
  CHECK(std::abs((4.0 * f3b - f3a) / 3.0 - d3) < 1e-5);
}

TEST_CASE("velocity_S2 reproduces the theta lattice drift") {
  // zeros of theta(z; sigma - 2 pi i tau) sit at m + n sigma(tau) + 1/2 +
  // sigma(tau)/2, so the zero with lattice index n moves at -2 pi i (n + 1/2).
  const cplx sigma(0.0, 1.0);
  const TaylorFunction th = theta_coeffs(sigma, 120);
  const std::vector<cplx> zeros = [&] {
    const ZeroSet zs = find_roots(th.to_ordinary_poly());
    std::vector<cplx> out;
    for (std::size_t i = 0; i < zs.zeros.size(); ++i)
      for (int m = 0; m < zs.multiplicities[i]; ++m) out.push_back(zs.zeros[i]);
    return out;
  }();
  const auto at0 = th.eval_d2(0.0);
  const cplx a1 = at0.d1 / at0.value;
  const cplx a2 = at0.d2 / at0.value - a1 * a1;
  const cplx base = 0.5 + 0.5 * sigma;
  constexpr double kPi2 = 2.0 * 3.141592653589793238462643383279502884;
  for (int n : {0, -1}) {
    const cplx target = base + static_cast<double>(n) * sigma;
    std::size_t j = 0;
    for (std::size_t i = 1; i < zeros.size(); ++i)
      if (std::abs(zeros[i] - target) < std::abs(zeros[j] - target)) j = i;
    REQUIRE(std::abs(zeros[j] - target) < 1e-8);
    const cplx v = velocity_S2(zeros, j, a1, a2, 0.0);
    const cplx expected = cplx(0.0, -kPi2) * (n + 0.5);
    CHECK(std::abs(v - expected) < 1e-5);
  }
}

TEST_CASE("rescaled_velocity matches finite differences of y(s) on a GAF") {
  const GafSample g = sample_gaf(120, 7117);
  const TaylorFlow flow = TaylorFlow::polynomial_mode(g.taylor);
  const ZeroSet zs = find_roots(g.taylor.to_ordinary_poly());
  std::vector<cplx> zeros = zs.zeros;
  std::sort(zeros.begin(), zeros.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });

  const double s = 0.2;
  const double tau = std::tanh(s);
  // zero positions and log-derivative data at tau
  const TaylorFunction flowed = heat_taylor(g.taylor, tau, HeatDomain::unrestricted());
  const auto at0 = flowed.eval_d2(0.0);
  const cplx a1 = at0.d1 / at0.value;
  const cplx a2 = at0.d2 / at0.value - a1 * a1;
  std::vector<cplx> z_at_tau(zeros.size());
  for (std::size_t k = 0; k < zeros.size(); ++k) z_at_tau[k] = tracked_at(flow, zeros[k], tau);
  std::vector<cplx> y(z_at_tau);
  for (auto& v : y) v *= std::cosh(s);

  const std::size_t j = 0;  // zero nearest the origin
  const cplx vres = rescaled_velocity(y, j, a1, a2, s);
  const double h = 1e-4;
  auto y_at = [&](double ss) {
    return tracked_at(flow, zeros[j], std::tanh(ss)) * std::cosh(ss);
  };
  const cplx fd = (y_at(s + h) - y_at(s - h)) / (2.0 * h);
  CHECK(std::abs(vres - fd) < 1e-4);
}

TEST_CASE("moment recursion closes the S0 third derivative") {
  // z'' = -2 M(j,3); differentiating through the recursion reproduces
  // 18 M5 - 6 M2 M3 exactly on the finite sums.
  RngStream rng(91, 0);
  std::vector<cplx> roots(7);
  for (auto& r : roots) r = 2.0 * rng.complex_gaussian();
  const MomentTable mt = MomentTable::from_zeros(roots, 2, 6, HadamardCase::S0);
  const cplx via_recursion = -2.0 * moment_derivative(mt, 3);
  const cplx closed = third_derivative(HadamardCase::S0, mt);
  CHECK(std::abs(via_recursion - closed) <= 1e-10 * (1.0 + std::abs(closed)));
}

TEST_CASE("rescaled_velocity") {
  const std::vector<cplx> y{cplx(1.2, 0.4), cplx(-0.8, 0.9), cplx(0.5, -1.5)};
  const cplx a1(0.3, -0.2), a2(-0.1, 0.25);
  {
    // s = 0 reduces to velocity_S2 with c = 0
    const cplx lhs = rescaled_velocity(y, 1, a1, a2, 0.0);
    const cplx rhs = velocity_S2(y, 1, a1, a2, 0.0);
    CHECK(std::abs(lhs - rhs) < 1e-14);
  }
  {
    // exact change of variables: y_j = z_j cosh s maps the S2 velocity to the
    // rescaled one
    const double s = 0.7;
    const double ch = std::cosh(s);
    std::vector<cplx> z(y);
    for (auto& v : z) v /= ch;
    const cplx dz = velocity_S2(z, 1, a1, a2, 0.0);
    const cplx expected = dz / ch + y[1] * std::tanh(s);
    CHECK(std::abs(rescaled_velocity(y, 1, a1, a2, s) - expected) <=
          1e-12 * (1 + std::abs(expected)));
  }
  {
    // single zero: the w = y_j term survives, giving y tanh s + 2/y at a = 0
    const std::vector<cplx> one{cplx(1.7, -0.6)};
    const double s = 0.45;
    const cplx expected = one[0] * std::tanh(s) + 2.0 / one[0];
    CHECK(std::abs(rescaled_velocity(one, 0, 0.0, 0.0, s) - expected) < 1e-14);
  }
  {
    const std::vector<cplx> bad{cplx(1.0), cplx(0.0)};
    CHECK_THROWS_AS(rescaled_velocity(bad, 0, 0.0, 0.0, 0.3), DomainError);
  }
}

TEST_CASE("truncated_system_step") {
  {
    // zeros {1,-1}, a1 = a2 = 0, c = 0 describes (1-z^2)e^{z^2}: dz = +-5/2
    SystemState st{{cplx(1.0), cplx(-1.0)}, 0.0, 0.0, 0.0, HadamardCase::S2};
    const SystemDerivs d = truncated_system_step(st, 2);
    CHECK(std::abs(d.dz[0] - 2.5) < 1e-14);
    CHECK(std::abs(d.dz[1] + 2.5) < 1e-14);
  }
  {
    // polynomial-consistent data (a2 = -2) recovers the z^2 - 1 flow: +-1/2
    SystemState st{{cplx(1.0), cplx(-1.0)}, 0.0, -2.0, 0.0, HadamardCase::S2};
    const SystemDerivs d = truncated_system_step(st, 2);
    CHECK(std::abs(d.dz[0] - 0.5) < 1e-14);
    CHECK(std::abs(d.dz[1] + 0.5) < 1e-14);
  }
  {
    // N = 1: dz = a1 + a2 (z - c) + 2/(z - c)
    const cplx z0(1.3, 0.6), a1(0.2, -0.1), a2(0.4, 0.3);
    SystemState st{{z0}, a1, a2, 0.0, HadamardCase::S2};
    const SystemDerivs d = truncated_system_step(st, 1);
    CHECK(std::abs(d.dz[0] - (a1 + a2 * z0 + 2.0 / z0)) < 1e-14);
  }
  {
    // truncation consistency: the unpaired transliteration equals velocity_S2
    RngStream rng(123, 0);
    std::vector<cplx> zeros(40);
    for (auto& z : zeros) z = 3.0 * rng.complex_gaussian() + cplx(0.2, 0.1);
    SystemState st{zeros, cplx(0.1, 0.2), cplx(-0.3, 0.1), cplx(0.05, -0.02), HadamardCase::S2};
    const SystemDerivs d = truncated_system_step(st, 40);
    for (std::size_t j = 0; j < 40; j += 7) {
      const cplx via_pair = velocity_S2(zeros, j, st.a1, st.a2, st.c);
      CHECK(std::abs(d.dz[j] - via_pair) <= 1e-12 * (1.0 + std::abs(via_pair)));
    }
    const auto aux = aux_derivatives(st.hcase, zeros, st.a1, st.a2, st.c);
    CHECK(d.da1 == aux.a1_prime);
    CHECK(d.da2 == aux.a2_prime);
  }
}

TEST_CASE("truncated_system_step converges in N on a GAF sample") {
  const GafSample g = sample_gaf(200, 31337);
  const ZeroSet zs = find_roots(g.taylor.to_ordinary_poly());
  std::vector<cplx> zeros = zs.zeros;
  std::sort(zeros.begin(), zeros.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  const auto at0 = g.taylor.eval_d2(0.0);
  const cplx a1 = at0.d1 / at0.value;
  const cplx a2 = at0.d2 / at0.value - a1 * a1;
  std::vector<cplx> dz_at;
  for (int N : {25, 50, 100, 200}) {
    SystemState st{std::vector<cplx>(zeros.begin(), zeros.begin() + N), a1, a2, 0.0,
                   HadamardCase::S2};
    dz_at.push_back(truncated_system_step(st, N).dz[0]);
  }
  const double d1 = std::abs(dz_at[1] - dz_at[0]);
  const double d2 = std::abs(dz_at[2] - dz_at[1]);
  const double d3 = std::abs(dz_at[3] - dz_at[2]);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
}

TEST_CASE("track_zero on the z^2 - 1 flow") {
  const ExpQuadFlow flow(
      ExpQuadPoly{0.0, 0.0, 0.0, poly_from_roots(std::vector<cplx>{1.0, -1.0})});
  const cplx path[2] = {cplx(0.0), cplx(0.5)};
  const ZeroTrajectory traj = track_zero(flow, 1.0, path);
  CHECK(traj.status == TrajStatus::completed);
  CHECK(std::abs(traj.samples.back().z - std::sqrt(1.5)) < 1e-10);

  // reversibility
  const cplx back_path[2] = {cplx(0.5), cplx(0.0)};
  const ZeroTrajectory back = track_zero(flow, traj.samples.back().z, back_path);
  CHECK(back.status == TrajStatus::completed);
  CHECK(std::abs(back.samples.back().z - 1.0) < 1e-8);
}

TEST_CASE("track_zero on truncated sin(pi z^2) matches the closed form") {
  const TaylorFlow flow(taylor_sin_pi_z2(170));
  std::vector<cplx> path;
  for (int i = 0; i <= 20; ++i) path.push_back(cplx(0.1 * i / 20.0, 0.0));
  const ZeroTrajectory traj = track_zero(flow, 1.0, path);
  REQUIRE(traj.status == TrajStatus::completed);
  for (const auto& s : traj.samples) {
    const cplx expected = sinpisq_zero(1, +1, s.tau);
    CHECK(std::abs(s.z - expected) < 1e-6);
  }
}

TEST_CASE("track_zero refuses a double-zero start") {
  const TaylorFlow flow(taylor_sin_pi_z2(170));
  const cplx path[2] = {cplx(0.0), cplx(0.05)};
  CHECK_THROWS_AS(track_zero(flow, 0.0, path), NonSimpleZeroError);
}

TEST_CASE("track_zero aborts on collision") {
  // zeros of z^2 - eps^2 - tau collide at tau = -eps^2
  const double eps = 0.05;
  const ExpQuadFlow flow(
      ExpQuadPoly{0.0, 0.0, 0.0, ComplexPoly({cplx(-eps * eps), cplx(0.0), cplx(1.0)})});
  const cplx path[2] = {cplx(0.0), cplx(-2.0 * eps * eps)};
  StepControl ctrl;
  ctrl.initial_dtau = 1e-4;
  const ZeroTrajectory traj = track_zero(flow, eps, path, ctrl);
  CHECK(traj.status == TrajStatus::collision_abort);
  CHECK(std::abs(traj.samples.back().z) < eps);
}

TEST_CASE("track_zero reports the domain boundary") {
  // GAF-like coefficients: admissible radius just below 1
  const GafSample g = sample_gaf(200, 99);
  const TaylorFlow flow(g.taylor);
  const double radius = flow.tau_radius();
  CHECK(radius < 1.2);
  const ZeroSet zs = find_roots(g.taylor.to_ordinary_poly());
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < zs.zeros.size(); ++i)
    if (std::abs(zs.zeros[i]) < std::abs(zs.zeros[nearest])) nearest = i;
  const cplx path[2] = {cplx(0.0), cplx(2.0 * radius)};
  const ZeroTrajectory traj = track_zero(flow, zs.zeros[nearest], path);
  CHECK((traj.status == TrajStatus::domain_boundary ||
         traj.status == TrajStatus::collision_abort));
}
