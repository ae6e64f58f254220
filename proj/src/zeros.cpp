#include "zflow/zeros.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "zflow/errors.hpp"
#include "zflow/kernels.hpp"

namespace zflow {

namespace {
constexpr double kCollisionTol = 1e-12;

void require_separated(double min_dist, const char* who) {
  if (min_dist < kCollisionTol) {
    std::ostringstream os;
    os << who << ": zeros closer than " << kCollisionTol;
    throw CollisionError(os.str());
  }
}
}  // namespace

FlowEval ExpQuadFlow::eval(cplx z, cplx tau) const {
  if (!have_cache_ || tau != cached_tau_) {
    flowed_ = heat_expquadpoly(base_, tau);
    cached_tau_ = tau;
    have_cache_ = true;
  }
  const auto ev = eval_d2_expquadpoly(flowed_, z);
  return {ev.value, ev.d1, ev.d2, ev.scale};
}

double ExpQuadFlow::tau_radius() const {
  const double aq = std::abs(base_.quad);
  return aq > 0.0 ? 0.95 / aq : std::numeric_limits<double>::infinity();
}

const TaylorFunction& TaylorFlow::at_tau(cplx tau) const {
  if (!have_cache_ || tau != cached_tau_) {
    flowed_ = heat_taylor(base_, tau, domain_);
    cached_tau_ = tau;
    have_cache_ = true;
  }
  return flowed_;
}

FlowEval TaylorFlow::eval(cplx z, cplx tau) const {
  const auto ev = at_tau(tau).eval_d2(z);
  return {ev.value, ev.d1, ev.d2, ev.scale};
}

cplx zero_velocity_simple(const FlowEval& at_zero) {
  const double scale =
      std::max({std::abs(at_zero.value), std::abs(at_zero.d1), std::abs(at_zero.d2)});
  if (std::abs(at_zero.d1) <= 1e-12 * scale)
    throw NonSimpleZeroError("zero_velocity_simple: derivative vanishes (zero is not simple)");
  return 0.5 * at_zero.d2 / at_zero.d1;
}

cplx velocity_poly(const ZeroSet& zs, std::size_t j) {
  cplx sums[1];
  const double mind = kernels::inverse_power_sums(zs.zeros[j], zs.zeros,
                                                  static_cast<std::ptrdiff_t>(j), 1, sums);
  require_separated(mind, "velocity_poly");
  return sums[0];
}

cplx acceleration(const ZeroSet& zs, std::size_t j) {
  cplx sums[3];
  const double mind = kernels::inverse_power_sums(zs.zeros[j], zs.zeros,
                                                  static_cast<std::ptrdiff_t>(j), 3, sums);
  require_separated(mind, "acceleration");
  return -2.0 * sums[2];
}

namespace {
// Shared tail of the S1/S2 velocities. The pairing
//   1/(z_j - z_k) + 1/(z_k - c)              = (z_j - c) / ((z_j - z_k)(z_k - c))
//   ... + (z_j - c)/(z_k - c)^2 (S2)         = (z_j - c)^2 / ((z_j - z_k)(z_k - c)^2)
// keeps the truncated sums absolutely convergent; the value equals the
// unpaired finite sum exactly.
cplx velocity_tail(std::span<const cplx> zeros, std::size_t j, cplx c, bool genus2) {
  const cplx zj = zeros[j];
  const cplx d = zj - c;
  cplx acc = genus2 ? 2.0 / d : 1.0 / d;  // the k = j contribution
  for (std::size_t k = 0; k < zeros.size(); ++k) {
    if (k == j) continue;
    const cplx sep = zj - zeros[k];
    const cplx wc = zeros[k] - c;
    if (std::abs(sep) < kCollisionTol) throw CollisionError("velocity: coincident zeros");
    if (std::abs(wc) < kCollisionTol)
      throw DomainError("velocity: base point c coincides with a zero");
    acc += genus2 ? d * d / (sep * wc * wc) : d / (sep * wc);
  }
  return acc;
}
}  // namespace

cplx velocity_S1(std::span<const cplx> zeros, std::size_t j, cplx a1, cplx c) {
  if (std::abs(zeros[j] - c) < kCollisionTol)
    throw DomainError("velocity_S1: base point c coincides with the tracked zero");
  return a1 + velocity_tail(zeros, j, c, false);
}

cplx velocity_S2(std::span<const cplx> zeros, std::size_t j, cplx a1, cplx a2, cplx c) {
  if (std::abs(zeros[j] - c) < kCollisionTol)
    throw DomainError("velocity_S2: base point c coincides with the tracked zero");
  return a1 + a2 * (zeros[j] - c) + velocity_tail(zeros, j, c, true);
}

AuxDerivs aux_derivatives(HadamardCase hcase, std::span<const cplx> zeros, cplx a1, cplx a2,
                          cplx c) {
  cplx sums[4] = {};
  if (!zeros.empty()) {
    const double mind = kernels::inverse_power_sums(c, zeros, -1, 4, sums);
    if (mind < kCollisionTol)
      throw DomainError("aux_derivatives: base point c coincides with a zero");
  }
  // sums[p-1] = sum_k 1/(c - z_k)^p; convert to powers of (z_k - c).
  const cplx t2 = sums[1];
  const cplx t3 = -sums[2];
  const cplx t4 = sums[3];
  switch (hcase) {
    case HadamardCase::S0:
      return {0.0, 0.0};
    case HadamardCase::S1:
      return {a1 * t2 + t3, 0.0};
    case HadamardCase::S2:
      return {-a1 * a2 + t3, -a2 * a2 + 2.0 * a1 * t3 + 3.0 * t4};
  }
  return {};
}

MomentTable MomentTable::from_zeros(std::span<const cplx> zeros, std::size_t j, int p_max,
                                    HadamardCase hcase, cplx a1, cplx a2) {
  if (p_max > kernels::kMaxPower)
    throw DomainError("MomentTable: p_max beyond the kernel power limit");
  MomentTable mt;
  mt.j = j;
  mt.hcase = hcase;
  mt.a1 = a1;
  mt.a2 = a2;
  mt.M.assign(p_max + 1, cplx(0.0));
  cplx sums[kernels::kMaxPower];
  const double mind = kernels::inverse_power_sums(zeros[j], zeros,
                                                  static_cast<std::ptrdiff_t>(j),
                                                  std::min(p_max, kernels::kMaxPower), sums);
  require_separated(mind, "MomentTable");
  for (int p = 1; p <= std::min(p_max, kernels::kMaxPower); ++p) mt.M[p] = sums[p - 1];
  return mt;
}

cplx MomentTable::moment(int p) const {
  if (p < 2 || p >= std::ssize(M))
    throw DomainError("MomentTable: moment M(j," + std::to_string(p) + ") not present");
  return M[p];
}

cplx moment_derivative(const MomentTable& mt, int p) {
  if (mt.hcase == HadamardCase::S2)
    throw DomainError("moment_derivative: recursion is stated for the S0/S1 cases only");
  cplx cross = 0.0;
  for (int n = 2; n <= p; ++n) cross += mt.moment(p + 2 - n) * mt.moment(n);
  return -0.5 * p * (static_cast<double>(p + 3) * mt.moment(p + 2) - cross);
}

cplx regularized_m2(std::span<const cplx> zeros, std::size_t j, cplx c) {
  cplx own[2], base[2];
  const double mind =
      kernels::inverse_power_sums(zeros[j], zeros, static_cast<std::ptrdiff_t>(j), 2, own);
  require_separated(mind, "regularized_m2");
  const double mindc = kernels::inverse_power_sums(c, zeros, -1, 2, base);
  if (mindc < kCollisionTol) throw DomainError("regularized_m2: c coincides with a zero");
  return own[1] - base[1];  // (c - z)^{-2} == (z - c)^{-2}
}

cplx third_derivative(HadamardCase hcase, const MomentTable& mt, cplx regularized_m2_value) {
  switch (hcase) {
    case HadamardCase::S0:
    case HadamardCase::S1:
      return 18.0 * mt.moment(5) - 6.0 * mt.moment(2) * mt.moment(3);
    case HadamardCase::S2:
      return 18.0 * mt.moment(5) - 6.0 * mt.moment(3) * (regularized_m2_value - mt.a2);
  }
  return {};
}

cplx rescaled_velocity(std::span<const cplx> y, std::size_t j, cplx a1, cplx a2, double s) {
  const double ch = std::cosh(s);
  const double th = std::tanh(s);
  for (std::size_t k = 0; k < y.size(); ++k)
    if (k != j && std::abs(y[k]) < kCollisionTol)
      throw DomainError("rescaled_velocity: a zero sits at the base point 0");
  return a1 / ch + y[j] * (a2 / (ch * ch) + th) + velocity_tail(y, j, cplx(0.0), true);
}

SystemDerivs truncated_system_step(const SystemState& state, std::size_t n_trunc) {
  if (n_trunc > state.zeros.size())
    throw DomainError("truncated_system_step: truncation exceeds the zero list");
  const std::span<const cplx> zs(state.zeros.data(), n_trunc);
  SystemDerivs out;
  const auto aux = aux_derivatives(state.hcase, zs, state.a1, state.a2, state.c);
  out.da1 = aux.a1_prime;
  out.da2 = aux.a2_prime;
  out.dz.resize(n_trunc);
  for (std::size_t j = 0; j < n_trunc; ++j) {
    // Direct transliteration of the unpaired right-hand side; velocity_S1/S2
    // compute the same finite sums through the paired kernel.
    cplx acc = 0.0;
    switch (state.hcase) {
      case HadamardCase::S0:
        for (std::size_t k = 0; k < n_trunc; ++k) {
          if (k == j) continue;
          const cplx sep = zs[j] - zs[k];
          if (std::abs(sep) < kCollisionTol)
            throw CollisionError("truncated_system_step: coincident zeros");
          acc += 1.0 / sep;
        }
        break;
      case HadamardCase::S1:
        acc = state.a1;
        for (std::size_t k = 0; k < n_trunc; ++k) {
          if (k != j) acc += 1.0 / (zs[j] - zs[k]);
          acc += 1.0 / (zs[k] - state.c);
        }
        break;
      case HadamardCase::S2:
        acc = state.a1 + state.a2 * (zs[j] - state.c);
        for (std::size_t k = 0; k < n_trunc; ++k) {
          if (k != j) acc += 1.0 / (zs[j] - zs[k]);
          const cplx wc = zs[k] - state.c;
          acc += 1.0 / wc + (zs[j] - state.c) / (wc * wc);
        }
        break;
    }
    out.dz[j] = acc;
  }
  return out;
}

const char* to_string(TrajStatus s) {
  switch (s) {
    case TrajStatus::completed: return "completed";
    case TrajStatus::collision_abort: return "collision_abort";
    case TrajStatus::newton_fail: return "newton_fail";
    case TrajStatus::domain_boundary: return "domain_boundary";
  }
  return "?";
}

namespace {

struct NewtonResult {
  bool ok = false;
  cplx z{0.0};
  FlowEval ev{};
};

NewtonResult newton_correct(const FlowField& flow, cplx z, cplx tau, const StepControl& ctrl) {
  NewtonResult res;
  res.z = z;
  double prev_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < ctrl.max_newton; ++it) {
    const FlowEval ev = flow.eval(res.z, tau);
    const double rel = std::abs(ev.value) / std::max(ev.scale, 1e-300);
    if (rel <= ctrl.newton_tol) {
      res.ok = true;
      res.ev = ev;
      return res;
    }
    if (rel > 4.0 * prev_res) return res;  // residual growth: reject the step
    prev_res = std::min(prev_res, rel);
    if (std::abs(ev.d1) <= 1e-14 * std::max(std::abs(ev.value), std::abs(ev.d2))) return res;
    res.z -= ev.value / ev.d1;
    res.ev = ev;
  }
  const FlowEval ev = flow.eval(res.z, tau);
  res.ev = ev;
  res.ok = std::abs(ev.value) <= ctrl.accept_tol * std::max(ev.scale, 1e-300);
  return res;
}

}  // namespace

ZeroTrajectory track_zero(const FlowField& flow, cplx z0, std::span<const cplx> tau_path,
                          const StepControl& ctrl) {
  ZeroTrajectory traj;
  traj.start = z0;
  if (tau_path.empty()) throw DomainError("track_zero: empty tau path");

  cplx tau = tau_path[0];
  const FlowEval ev0 = flow.eval(z0, tau);
  if (std::abs(ev0.value) > ctrl.start_tol * std::max(ev0.scale, 1e-300))
    throw DomainError("track_zero: start point is not a zero of the function");
  {
    const double scale = std::max({std::abs(ev0.value), std::abs(ev0.d1), std::abs(ev0.d2)});
    if (std::abs(ev0.d1) <= 1e-12 * scale)
      throw NonSimpleZeroError("track_zero: start zero is not simple");
  }
  cplx z = z0;
  FlowEval ev = ev0;
  traj.samples.push_back({tau, z});
  const double radius = flow.tau_radius();

  for (std::size_t seg = 1; seg < tau_path.size(); ++seg) {
    const cplx target = tau_path[seg];
    double h = ctrl.initial_dtau;
    while (tau != target) {
      const double remaining = std::abs(target - tau);
      const cplx dir = (target - tau) / remaining;
      double step = std::min(h, remaining);

      // Collision guard: |2 d1 / d2| estimates the distance to the nearest
      // other zero when a pair approaches.
      const double dist_est =
          std::abs(ev.d2) > 0.0 ? 2.0 * std::abs(ev.d1) / std::abs(ev.d2)
                                : std::numeric_limits<double>::infinity();
      if (dist_est < ctrl.collision_radius) {
        traj.status = TrajStatus::collision_abort;
        return traj;
      }

      cplx velocity;
      try {
        velocity = zero_velocity_simple(ev);
      } catch (const NonSimpleZeroError&) {
        traj.status = TrajStatus::collision_abort;
        return traj;
      }
      // Keep the predictor displacement well inside the collision estimate.
      // When that cap falls below the step floor, the neighbor closes in
      // faster than the continuation can resolve: a collision.
      if (std::abs(velocity) * step > 0.25 * dist_est) {
        const double capped = 0.25 * dist_est / std::abs(velocity);
        if (capped < ctrl.min_dtau) {
          traj.status = TrajStatus::collision_abort;
          return traj;
        }
        step = capped;
      }

      const cplx tau_next = tau + step * dir;
      if (std::abs(tau_next) >= radius) {
        traj.status = TrajStatus::domain_boundary;
        return traj;
      }

      const cplx z_pred = z + velocity * (step * dir);
      const NewtonResult nr = newton_correct(flow, z_pred, tau_next, ctrl);
      if (!nr.ok) {
        h = 0.5 * step;
        if (h < ctrl.min_dtau) {
          // At the step floor: if one minimal step would cross a sizable
          // fraction of the gap to the nearest zero, this is a collision.
          traj.status = std::abs(velocity) * ctrl.min_dtau >= 0.1 * dist_est
                            ? TrajStatus::collision_abort
                            : TrajStatus::newton_fail;
          return traj;
        }
        continue;
      }
      tau = tau_next;
      z = nr.z;
      ev = nr.ev;
      traj.samples.push_back({tau, z});
      if (step >= h) h = std::min(1.5 * h, ctrl.initial_dtau);
    }
  }
  traj.status = TrajStatus::completed;
  return traj;
}

}  // namespace zflow
