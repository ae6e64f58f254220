#pragma once

#include <complex>
#include <span>
#include <vector>

#include "zflow/expquadpoly.hpp"
#include "zflow/heatflow.hpp"
#include "zflow/taylor.hpp"

namespace zflow {

struct ZeroSet {
  std::vector<cplx> zeros;
  std::vector<int> multiplicities;
  cplx source_tau{0.0};
};

// All roots by Aberth-Ehrlich simultaneous iteration. Initial guesses come
// from the Newton-polygon radii of the coefficient log-magnitudes (the plain
// Cauchy bound is astronomically loose for Weyl-scaled polynomials).
// Multiplicities are assigned by clustering at 1e-9. Throws ConvergenceError
// with a residual report after 200 sweeps without convergence.
ZeroSet find_roots(const ComplexPoly& p);

struct FlowEval {
  cplx value, d1, d2;
  double scale;
};

// Evaluation access to a heat-evolved function. Implementations may drop a
// nonvanishing scalar prefactor: trackers only use the ratios value/d1, d2/d1
// and value/scale.
class FlowField {
 public:
  virtual ~FlowField() = default;
  virtual FlowEval eval(cplx z, cplx tau) const = 0;
  virtual double tau_radius() const = 0;  // admissible |tau|, safety included
};

class ExpQuadFlow final : public FlowField {
 public:
  explicit ExpQuadFlow(ExpQuadPoly base) : base_(std::move(base)) {}
  FlowEval eval(cplx z, cplx tau) const override;
  double tau_radius() const override;

 private:
  ExpQuadPoly base_;
  mutable bool have_cache_ = false;
  mutable cplx cached_tau_{0.0};
  mutable ExpQuadPoly flowed_;
};

// Flow of a truncated series. polynomial_mode() removes the radius guard
// (truncations are polynomials: the coefficient sums are finite and exact).
class TaylorFlow final : public FlowField {
 public:
  explicit TaylorFlow(TaylorFunction base)
      : base_(std::move(base)), domain_(HeatDomain::for_taylor(base_)) {}
  TaylorFlow(TaylorFunction base, HeatDomain domain)
      : base_(std::move(base)), domain_(domain) {}
  static TaylorFlow polynomial_mode(TaylorFunction base) {
    return TaylorFlow(std::move(base), HeatDomain::unrestricted());
  }
  FlowEval eval(cplx z, cplx tau) const override;
  double tau_radius() const override { return domain_.radius(); }
  const TaylorFunction& at_tau(cplx tau) const;  // flowed coefficients, cached

 private:
  TaylorFunction base_;
  HeatDomain domain_;
  mutable bool have_cache_ = false;
  mutable cplx cached_tau_{0.0};
  mutable TaylorFunction flowed_;
};

// d z / d tau = d2 / (2 d1) at a simple zero (removable-singularity form of
// the log-derivative). Throws NonSimpleZeroError when |d1| <= 1e-12 * scale.
cplx zero_velocity_simple(const FlowEval& at_zero);

// Polynomial case: sum_{k != j} 1/(z_j - z_k).
cplx velocity_poly(const ZeroSet& zs, std::size_t j);

// Rational Calogero-Moser acceleration: -2 sum_{k != j} 1/(z_j - z_k)^3.
// Holds verbatim in all of S0/S1/S2.
cplx acceleration(const ZeroSet& zs, std::size_t j);

enum class HadamardCase { S0, S1, S2 };

// Genus-1 form: a1 + sum_k [ 1_{k != j}/(z_j - z_k) + 1/(z_k - c) ].
// The k = j term contributes 1/(z_j - c); a1 is the log-derivative of the
// flowed function at the base point c, not the Hadamard exponent.
cplx velocity_S1(std::span<const cplx> zeros, std::size_t j, cplx a1, cplx c);

// Genus-2 form: adds a2 (z_j - c) and the (z_j - c)/(z_k - c)^2 tail terms.
cplx velocity_S2(std::span<const cplx> zeros, std::size_t j, cplx a1, cplx a2, cplx c);

struct AuxDerivs {
  cplx a1_prime{0.0};
  cplx a2_prime{0.0};  // unused in the S1 case
};
AuxDerivs aux_derivatives(HadamardCase hcase, std::span<const cplx> zeros, cplx a1, cplx a2,
                          cplx c);

struct MomentTable {
  std::size_t j = 0;
  HadamardCase hcase = HadamardCase::S0;
  cplx a1{0.0}, a2{0.0};
  std::vector<cplx> M;  // M[p] = sum_{k != j} (z_j - z_k)^{-p}, valid for 2 <= p < M.size()

  static MomentTable from_zeros(std::span<const cplx> zeros, std::size_t j, int p_max,
                                HadamardCase hcase = HadamardCase::S0, cplx a1 = 0.0,
                                cplx a2 = 0.0);
  cplx moment(int p) const;
};

// d/dtau M(j,p) = -(p/2) [ (p+3) M(j,p+2) - sum_{n=2}^{p} M(j,p+2-n) M(j,n) ].
// Valid for the S0/S1 truncated systems (the velocity differences that drive
// it are case-independent there).
cplx moment_derivative(const MomentTable& mt, int p);

// sum_k ( 1_{k != j} (z_j - z_k)^{-2} - (z_k - c)^{-2} ): the regularized
// second moment of the S2 third-derivative formula.
cplx regularized_m2(std::span<const cplx> zeros, std::size_t j, cplx c);

// Third tau-derivative of a tracked zero.
//   S0/S1:  18 M(j,5) - 6 M(j,2) M(j,3)
//   S2:     18 M(j,5) - 6 M(j,3) (reg - a2)
// The S2 form follows from z''' = Z''' - 3 a Z'' with a = a2 + sum (z_k-c)^{-2}
// and the S0 formulas for the gauge-stripped zeros Z; it reduces exactly to
// the S0 expression when a2 is the log-derivative of a polynomial.
cplx third_derivative(HadamardCase hcase, const MomentTable& mt, cplx regularized_m2_value = 0.0);

// s-derivative of y_j = z_j(tanh s) cosh s with c = 0.
cplx rescaled_velocity(std::span<const cplx> y, std::size_t j, cplx a1, cplx a2, double s);

struct SystemState {
  std::vector<cplx> zeros;
  cplx a1{0.0}, a2{0.0};
  cplx c{0.0};
  HadamardCase hcase = HadamardCase::S2;
};
struct SystemDerivs {
  std::vector<cplx> dz;
  cplx da1{0.0}, da2{0.0};
};
// Right-hand side of the truncated ODE system on the first n_trunc zeros.
SystemDerivs truncated_system_step(const SystemState& state, std::size_t n_trunc);

enum class TrajStatus { completed, collision_abort, newton_fail, domain_boundary };
const char* to_string(TrajStatus);

struct TrajSample {
  cplx tau, z;
};
struct ZeroTrajectory {
  std::vector<TrajSample> samples;
  TrajStatus status = TrajStatus::completed;
  cplx start{0.0};
};

struct StepControl {
  double initial_dtau = 1e-2;
  double min_dtau = 1e-7;
  double collision_radius = 1e-6;
  int max_newton = 12;
  double newton_tol = 1e-12;   // target residual, relative to the term-sum scale
  double accept_tol = 1e-10;   // accepted residual per trajectory sample
  double start_tol = 1e-8;
};

// Euler predictor from the first-derivative law, Newton corrector on the
// flowed function, adaptive halving on corrector failure. Samples land exactly
// on the tau_path waypoints.
ZeroTrajectory track_zero(const FlowField& flow, cplx z0, std::span<const cplx> tau_path,
                          const StepControl& ctrl = {});

}  // namespace zflow
