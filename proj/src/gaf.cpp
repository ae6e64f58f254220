#include "zflow/gaf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zflow/errors.hpp"
#include "zflow/heatflow.hpp"
#include "zflow/rng.hpp"

namespace zflow {

GafSample sample_gaf(int n_max, std::uint64_t seed, std::uint64_t trial) {
  if (n_max < 1) throw DomainError("sample_gaf: n_max must be >= 1");
  RngStream rng(seed, trial);
  std::vector<cplx> w(n_max + 1);
  for (auto& c : w) c = rng.complex_gaussian();
  return {TaylorFunction::from_weyl(std::move(w)), seed, trial};
}

ExpQuadPoly apply_Ta(const ExpQuadPoly& f, cplx a) {
  ExpQuadPoly out = shift_argument(f, -a);
  out.lin += std::conj(a);
  out.cst += -0.5 * std::norm(a);
  return out;
}

ExpQuadPoly apply_Vtau(const ExpQuadPoly& f, cplx tau) {
  if (std::abs(tau) >= 1.0) throw DomainError("apply_Vtau: |tau| must be < 1");
  const double s = std::sqrt(1.0 - std::norm(tau));
  ExpQuadPoly out = scale_argument(heat_expquadpoly(f, tau), s);
  out.quad += tau;
  out.cst += 0.25 * std::log(1.0 - std::norm(tau));
  return out;
}

cplx ExpQuadTaylor::eval(cplx z) const {
  return std::exp(0.5 * quad * z * z + lin * z + cst) * series.eval(z);
}

void ExpQuadTaylor::eval_batch(std::span<const cplx> pts, std::span<cplx> out) const {
  series.eval_batch(pts, out);
  for (std::size_t i = 0; i < pts.size(); ++i)
    out[i] *= std::exp(0.5 * quad * pts[i] * pts[i] + lin * pts[i] + cst);
}

FlowEval ExpQuadTaylor::eval_d2(cplx z) const {
  const cplx e = std::exp(0.5 * quad * z * z + lin * z + cst);
  const cplx g1 = quad * z + lin;
  const auto b = series.eval_d2(z);
  return {e * b.value, e * (g1 * b.value + b.d1),
          e * ((quad + g1 * g1) * b.value + 2.0 * g1 * b.d1 + b.d2), std::abs(e) * b.scale};
}

ExpQuadTaylor apply_Vtau(const TaylorFunction& f, cplx tau) {
  if (std::abs(tau) >= 1.0) throw DomainError("apply_Vtau: |tau| must be < 1");
  const double s = std::sqrt(1.0 - std::norm(tau));
  ExpQuadTaylor out;
  out.series = heat_taylor(f, tau).scale_arg(s);
  out.quad = tau;
  out.cst = 0.25 * std::log(1.0 - std::norm(tau));
  return out;
}

ConditionedGaf condition_at(const GafSample& g, cplx a) {
  std::vector<cplx> w(g.taylor.weyl().begin(), g.taylor.weyl().end());
  w[0] = 0.0;
  ConditionedGaf cg;
  cg.base = {TaylorFunction::from_weyl(std::move(w)), g.seed, g.trial};
  cg.anchor = a;
  return cg;
}

cplx ConditionedGaf::eval(cplx z) const {
  const cplx pre = std::exp(-0.5 * std::norm(anchor) + std::conj(anchor) * z);
  return pre * base.taylor.eval(z - anchor);
}

ConditionedFlow::ConditionedFlow(const ConditionedGaf& cg)
    : base_flow_(cg.base.taylor), anchor_(cg.anchor) {}

FlowEval ConditionedFlow::eval(cplx z, cplx tau) const {
  // F(z, tau) = C e^{abar z} B(w),  w = z - a - tau abar; the scalar
  // C e^{abar z} is dropped, its z-dependence folded into the derivatives.
  const cplx ab = std::conj(anchor_);
  const cplx w = z - anchor_ - tau * ab;
  const FlowEval b = base_flow_.eval(w, tau);
  return {b.value, ab * b.value + b.d1, ab * ab * b.value + 2.0 * ab * b.d1 + b.d2, b.scale};
}

ResidualOutcome residual_experiment(cplx a, double tau, int trials, int n_max,
                                    std::uint64_t seed, std::uint64_t stream_offset,
                                    const StepControl& ctrl) {
  ResidualOutcome out;
  out.trials = trials;
  const cplx target = a + tau * std::conj(a);
  const cplx path[2] = {cplx(0.0), cplx(tau)};
  for (int t = 0; t < trials; ++t) {
    const GafSample g = sample_gaf(n_max, seed, stream_offset + static_cast<std::uint64_t>(t));
    const ConditionedGaf cg = condition_at(g, a);
    const ConditionedFlow flow(cg);
    ZeroTrajectory traj;
    try {
      traj = track_zero(flow, a, path, ctrl);
    } catch (const Error&) {
      ++out.statuses[TrajStatus::newton_fail];
      continue;
    }
    ++out.statuses[traj.status];
    if (traj.status == TrajStatus::completed)
      out.residuals.push_back(traj.samples.back().z - target);
  }
  return out;
}

MatchReport truncation_zero_agreement(const GafSample& g, cplx tau, double K, int n_small,
                                      int n_large) {
  if (!(n_small <= n_large && n_large <= g.taylor.n_max()))
    throw DomainError("truncation_zero_agreement: need n_small <= n_large <= n_max");
  // Root-find the V_tau-normalized series: its Weyl coefficients stay O(1),
  // while the raw flowed polynomial cancels catastrophically at larger tau.
  // zeros(flowed) = sqrt(1 - |tau|^2) * zeros(V_tau series).
  const double s = std::sqrt(1.0 - std::norm(tau));
  auto zeros_in_disk = [&](int n_trunc) {
    const TaylorFunction normalized =
        heat_taylor(g.taylor.truncated(n_trunc), tau, HeatDomain::unrestricted()).scale_arg(s);
    const ZeroSet zs = find_roots(normalized.to_ordinary_poly());
    std::vector<cplx> in;
    for (std::size_t i = 0; i < zs.zeros.size(); ++i) {
      const cplx z = s * zs.zeros[i];
      if (std::abs(z) <= K)
        for (int m = 0; m < zs.multiplicities[i]; ++m) in.push_back(z);
    }
    return in;
  };
  const std::vector<cplx> small = zeros_in_disk(n_small);
  std::vector<cplx> large = zeros_in_disk(n_large);

  MatchReport rep;
  rep.count_small = static_cast<int>(small.size());
  rep.count_large = static_cast<int>(large.size());
  std::vector<bool> taken(large.size(), false);
  for (cplx zs : small) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = large.size();
    for (std::size_t i = 0; i < large.size(); ++i) {
      if (taken[i]) continue;
      const double d = std::abs(zs - large[i]);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    if (arg == large.size()) {
      ++rep.unmatched_small;
      continue;
    }
    taken[arg] = true;
    ++rep.matched;
    rep.max_displacement = std::max(rep.max_displacement, best);
  }
  for (bool t : taken)
    if (!t) ++rep.unmatched_large;
  return rep;
}

cplx covariance_pred(cplx z, cplx w, cplx tau, cplx sigma) {
  if (std::abs(tau) >= 1.0 || std::abs(sigma) >= 1.0)
    throw DomainError("covariance_pred: |tau|, |sigma| must be < 1");
  const cplx ts = tau * std::conj(sigma);
  if (std::abs(1.0 - ts) < 1e-14) throw DomainError("covariance_pred: tau*conj(sigma) = 1");
  const cplx wb = std::conj(w);
  return std::exp(-(z * z * std::conj(sigma) + wb * wb * tau) / (2.0 * (1.0 - ts))) *
         std::exp(z * wb / (1.0 - ts)) / std::sqrt(1.0 - ts);
}

cplx covariance_Q_pred(cplx z, cplx w, cplx tau, cplx sigma) {
  if (std::abs(tau) >= 1.0 || std::abs(sigma) >= 1.0)
    throw DomainError("covariance_Q_pred: |tau|, |sigma| must be < 1");
  const cplx ts = tau * std::conj(sigma);
  if (std::abs(1.0 - ts) < 1e-14) throw DomainError("covariance_Q_pred: tau*conj(sigma) = 1");
  const cplx wb = std::conj(w);
  const double s1 = std::sqrt(1.0 - std::norm(tau));
  const double s2 = std::sqrt(1.0 - std::norm(sigma));
  const cplx r = s1 * s2 / (1.0 - ts);
  return std::sqrt(r) * std::exp(z * wb * r) *
         std::exp(0.5 * z * z * (std::conj(tau) - std::conj(sigma)) / (1.0 - ts) +
                  0.5 * wb * wb * (sigma - tau) / (1.0 - ts));
}

}  // namespace zflow
