#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "zflow/errors.hpp"
#include "zflow/kernels.hpp"
#include "zflow/zeros.hpp"

namespace zflow {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Newton-polygon starting points (Bini's initialization): radii from the upper
// convex hull of (k, log|a_k|), angles equispaced per hull edge with a twist.
std::vector<cplx> initial_guesses(const ComplexPoly& p) {
  const auto c = p.coeffs();
  const int n = p.degree();
  std::vector<std::pair<int, double>> pts;
  for (int k = 0; k <= n; ++k)
    if (c[k] != cplx(0.0)) pts.emplace_back(k, std::log(std::abs(c[k])));

  std::vector<std::pair<int, double>> hull;
  for (const auto& pt : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      const double cross = (b.second - a.second) * (pt.first - a.first) -
                           (pt.second - a.second) * (b.first - a.first);
      if (cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(pt);
  }

  std::vector<cplx> guesses;
  guesses.reserve(n);
  double twist = 0.0;
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const int k1 = hull[e].first, k2 = hull[e + 1].first;
    const double r = std::exp((hull[e].second - hull[e + 1].second) / (k2 - k1));
    const int count = k2 - k1;
    twist += 0.61803398875;
    for (int i = 0; i < count; ++i) {
      const double ang = 2.0 * kPi * (i + 0.5) / count + 0.4 + twist;
      guesses.push_back(r * cplx(std::cos(ang), std::sin(ang)));
    }
  }
  return guesses;
}

}  // namespace

ZeroSet find_roots(const ComplexPoly& p) {
  const int n = p.degree();
  if (n < 1 || p.is_zero()) throw DomainError("find_roots: degree must be >= 1");

  // Exact zero roots first: they would otherwise stall the Aberth correction.
  std::vector<cplx> work(p.coeffs().begin(), p.coeffs().end());
  int zero_roots = 0;
  while (work.size() > 1 && work.front() == cplx(0.0)) {
    work.erase(work.begin());
    ++zero_roots;
  }
  const ComplexPoly q{std::vector<cplx>(work)};
  const int m = q.degree();

  std::vector<cplx> z = initial_guesses(q);
  const auto qc = q.coeffs();
  constexpr int kMaxSweeps = 200;
  constexpr double kTol = 1e-13;

  // Residual scale sum |a_k| |z|^k: the backward-error floor. Clustered roots
  // never satisfy the step criterion, so a root also counts as converged when
  // its residual reaches the floor.
  auto residual_floor = [&](cplx at) {
    double scale = 0.0;
    const double az = std::abs(at);
    for (std::ptrdiff_t k = std::ssize(qc) - 1; k >= 0; --k)
      scale = scale * az + std::abs(qc[k]);
    return scale;
  };

  bool converged = m == 0;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    bool all_done = true;
    for (int i = 0; i < m; i += 4) {
      const int lanes = std::min(4, m - i);
      cplx zi4[4], v4[4], d4[4];
      for (int l = 0; l < 4; ++l) zi4[l] = z[std::min(i + l, m - 1)];
      kernels::poly_eval_d1_x4(qc, zi4, v4, d4);
      for (int l = 0; l < lanes; ++l) {
        const cplx v = v4[l];
        if (v == cplx(0.0)) continue;
        const cplx d = d4[l] == cplx(0.0) ? cplx(1e-300, 0.0) : d4[l];
        const cplx newton = v / d;
        cplx sums[1];
        kernels::inverse_power_sums(z[i + l], z, i + l, 1, sums);
        const cplx denom = 1.0 - newton * sums[0];
        const cplx w = std::abs(denom) > 1e-200 ? newton / denom : newton;
        z[i + l] -= w;
        if (std::abs(w) > kTol * (1.0 + std::abs(z[i + l])) &&
            std::abs(v) > 1e-13 * residual_floor(z[i + l]))
          all_done = false;
      }
    }
    converged = all_done;
  }
  if (!converged) {
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto ev = q.eval_d2(z[i]);
      worst = std::max(worst, std::abs(ev.value) / std::max(ev.scale, 1e-300));
    }
    std::ostringstream os;
    os << "find_roots: Aberth iteration did not converge in " << kMaxSweeps
       << " sweeps (worst relative residual " << worst << ")";
    throw ConvergenceError(os.str());
  }

  for (int i = 0; i < zero_roots; ++i) z.push_back(cplx(0.0));

  // Cluster into multiplicities.
  std::sort(z.begin(), z.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  ZeroSet out;
  std::vector<bool> used(z.size(), false);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (used[i]) continue;
    cplx sum = z[i];
    int count = 1;
    used[i] = true;
    const double tol = 1e-9 * std::max(1.0, std::abs(z[i]));
    for (std::size_t k = i + 1; k < z.size(); ++k) {
      if (!used[k] && std::abs(z[k] - z[i]) < tol) {
        sum += z[k];
        ++count;
        used[k] = true;
      }
    }
    out.zeros.push_back(sum / static_cast<double>(count));
    out.multiplicities.push_back(count);
  }
  return out;
}

}  // namespace zflow
