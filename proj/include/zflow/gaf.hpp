#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "zflow/expquadpoly.hpp"
#include "zflow/taylor.hpp"
#include "zflow/zeros.hpp"

namespace zflow {

// Truncated GAF: Weyl coefficients are i.i.d. standard complex Gaussian draws,
// reproducible from (seed, trial).
struct GafSample {
  TaylorFunction taylor;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
};

GafSample sample_gaf(int n_max, std::uint64_t seed, std::uint64_t trial = 0);

// e^{-|a|^2/2} e^{abar z} F(z - a): the unitarized translation, exact on the
// closed class.
ExpQuadPoly apply_Ta(const ExpQuadPoly& f, cplx a);

// V_tau F = (1-|tau|^2)^{1/4} e^{tau z^2/2} (heat flow)(z sqrt(1-|tau|^2)).
ExpQuadPoly apply_Vtau(const ExpQuadPoly& f, cplx tau);

// Taylor variant: the Gaussian prefactor rides along as an ExpQuadPoly-style
// wrapper around the rescaled flowed series.
struct ExpQuadTaylor {
  cplx quad{0.0}, lin{0.0}, cst{0.0};
  TaylorFunction series;

  cplx eval(cplx z) const;
  void eval_batch(std::span<const cplx> pts, std::span<cplx> out) const;
  FlowEval eval_d2(cplx z) const;
};
ExpQuadTaylor apply_Vtau(const TaylorFunction& f, cplx tau);

// GAF conditioned to vanish at the anchor: xi_0 := 0 in the base sample, then
// the T_a wrapper. Evaluation at the anchor is exactly zero at tau = 0.
struct ConditionedGaf {
  GafSample base;  // weyl[0] == 0
  cplx anchor{0.0};

  cplx eval(cplx z) const;  // includes the T_a prefactor
};
ConditionedGaf condition_at(const GafSample& g, cplx a);

// Heat evolution of the conditioned sample. The flowed function is
//   C(tau) e^{abar z} B_tau(z - a - tau abar)
// with B the flowed base, so evaluation works at the shifted argument and the
// nonvanishing prefactor is dropped (trackers only consume ratios).
class ConditionedFlow final : public FlowField {
 public:
  explicit ConditionedFlow(const ConditionedGaf& cg);
  FlowEval eval(cplx z, cplx tau) const override;
  double tau_radius() const override { return base_flow_.tau_radius(); }

 private:
  TaylorFlow base_flow_;
  cplx anchor_;
};

struct ResidualOutcome {
  std::vector<cplx> residuals;                  // z^a(tau) - a - tau*conj(a), completed runs
  std::map<TrajStatus, int> statuses;           // counts per termination status
  int trials = 0;
};

// Per trial: condition a fresh sample at the anchor, track the anchored zero
// along the real segment [0, tau], emit the residual. Aborted trajectories are
// counted, never resampled. stream_offset decorrelates anchors that share a
// seed.
ResidualOutcome residual_experiment(cplx a, double tau, int trials, int n_max,
                                    std::uint64_t seed, std::uint64_t stream_offset = 0,
                                    const StepControl& ctrl = {});

struct MatchReport {
  double max_displacement = 0.0;
  int matched = 0;
  int unmatched_small = 0;
  int unmatched_large = 0;
  int count_small = 0;
  int count_large = 0;
};

// Zeros of the heat-flowed truncations at two degrees inside |z| <= K, paired
// by nearest neighbor.
MatchReport truncation_zero_agreement(const GafSample& g, cplx tau, double K, int n_small,
                                      int n_large);

// Covariance predictions.
// E[G_tau(z) conj(G_sigma(w))] for the raw flowed GAF:
cplx covariance_pred(cplx z, cplx w, cplx tau, cplx sigma);
// E[Q_tau(z) conj(Q_sigma(w))] for the normalized process Q_tau = V_tau G:
cplx covariance_Q_pred(cplx z, cplx w, cplx tau, cplx sigma);

}  // namespace zflow
