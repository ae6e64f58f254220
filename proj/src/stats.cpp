#include "zflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zflow/errors.hpp"
#include "zflow/kernels.hpp"
#include "zflow/rng.hpp"

namespace zflow {

CovarianceGrid empirical_covariance(const TrialEvaluator& sampler,
                                    std::span<const std::pair<cplx, cplx>> probes, int trials,
                                    std::uint64_t seed) {
  if (trials < 100) throw DomainError("empirical_covariance: needs at least 100 trials");

  // Evaluate each trial once on the union of probe points.
  std::vector<cplx> pts;
  auto index_of = [&](cplx p) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (pts[i] == p) return i;
    pts.push_back(p);
    return pts.size() - 1;
  };
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  idx.reserve(probes.size());
  for (const auto& [z, w] : probes) idx.emplace_back(index_of(z), index_of(w));

  const std::size_t np = probes.size();
  std::vector<cplx> mean(np, cplx(0.0));
  std::vector<double> m2(np, 0.0);  // sum |x - running mean|^2 (Welford)
  std::vector<cplx> vals(pts.size());
  for (int t = 0; t < trials; ++t) {
    sampler(seed, static_cast<std::uint64_t>(t), pts, vals);
    for (std::size_t i = 0; i < np; ++i) {
      const cplx prod = vals[idx[i].first] * std::conj(vals[idx[i].second]);
      const cplx delta = prod - mean[i];
      mean[i] += delta / static_cast<double>(t + 1);
      m2[i] += std::real(delta * std::conj(prod - mean[i]));
    }
  }

  CovarianceGrid grid;
  grid.points.assign(probes.begin(), probes.end());
  grid.estimates = std::move(mean);
  grid.trials = trials;
  grid.std_errors.resize(np);
  for (std::size_t i = 0; i < np; ++i)
    grid.std_errors[i] =
        std::sqrt(std::max(0.0, m2[i] / (trials - 1)) / static_cast<double>(trials));
  return grid;
}

namespace {

// Energy statistic from masked sums over the pooled distance matrix:
// 2 S_AB/(n m) - S_AA 2/n^2 ... written with the V-statistic normalization.
double energy_from_sums(double s_aa, double s_bb, double s_ab, int n, int m) {
  return 2.0 * s_ab / (static_cast<double>(n) * m) - 2.0 * s_aa / (static_cast<double>(n) * n) -
         2.0 * s_bb / (static_cast<double>(m) * m);
}

}  // namespace

TestReport two_sample_energy(std::span<const cplx> xs, std::span<const cplx> ys, int n_perm,
                             std::uint64_t seed) {
  const int n = static_cast<int>(xs.size());
  const int m = static_cast<int>(ys.size());
  if (n < 50 || m < 50) throw DomainError("two_sample_energy: sample sizes must be >= 50");
  const int total = n + m;

  std::vector<cplx> pool(xs.begin(), xs.end());
  pool.insert(pool.end(), ys.begin(), ys.end());

  // Pooled distance matrix in float: halves the memory traffic of the
  // permutation loop; the statistic comparison is done in the same precision
  // on both sides.
  std::vector<float> dist(static_cast<std::size_t>(total) * total);
  for (int i = 0; i < total; ++i) {
    dist[static_cast<std::size_t>(i) * total + i] = 0.0f;
    for (int j = i + 1; j < total; ++j) {
      const float d = static_cast<float>(std::abs(pool[i] - pool[j]));
      dist[static_cast<std::size_t>(i) * total + j] = d;
      dist[static_cast<std::size_t>(j) * total + i] = d;
    }
  }

  double all_pairs = 0.0;  // sum over unordered pairs, constant across permutations
  for (float d : dist) all_pairs += d;
  all_pairs *= 0.5;

  std::vector<float> mask(total);
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);

  auto statistic_for = [&](const std::vector<int>& assignment) {
    // assignment: first n entries form group A
    std::fill(mask.begin(), mask.end(), 0.0f);
    for (int i = 0; i < n; ++i) mask[assignment[i]] = 1.0f;
    double sum_qa = 0.0, sum_qb = 0.0;
    for (int i = 0; i < total; ++i) {
      const std::span<const float> row(dist.data() + static_cast<std::size_t>(i) * total,
                                       static_cast<std::size_t>(total));
      const double qi = kernels::dot(row, mask);  // sum over j in A of D_ij
      if (mask[i] != 0.0f)
        sum_qa += qi;
      else
        sum_qb += qi;
    }
    const double s_aa = 0.5 * sum_qa;  // unordered within-A pairs
    const double s_ab = sum_qb;        // each cross pair once
    const double s_bb = all_pairs - s_aa - s_ab;
    return energy_from_sums(s_aa, s_bb, s_ab, n, m);
  };

  TestReport rep;
  rep.method = TestMethod::energy_permutation;
  rep.n1 = n;
  rep.n2 = m;
  rep.statistic = statistic_for(order);

  RngStream rng(seed, 0xE17E57);
  int geq = 0;
  std::vector<int> perm(order);
  for (int p = 0; p < n_perm; ++p) {
    for (int i = total - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    if (statistic_for(perm) >= rep.statistic) ++geq;
  }
  rep.p_value = (1.0 + geq) / (n_perm + 1.0);
  return rep;
}

DiskCounts zero_counts_in_disk(std::span<const std::vector<cplx>> zero_sets, double radius) {
  if (zero_sets.empty()) return {0.0, 0.0};
  double sum = 0.0, sum2 = 0.0;
  for (const auto& zs : zero_sets) {
    int count = 0;
    for (cplx z : zs)
      if (std::abs(z) <= radius) ++count;
    sum += count;
    sum2 += static_cast<double>(count) * count;
  }
  const double nsets = static_cast<double>(zero_sets.size());
  const double mean = sum / nsets;
  if (zero_sets.size() == 1) return {mean, 0.0};
  const double var = std::max(0.0, (sum2 - nsets * mean * mean) / (nsets - 1.0));
  return {mean, std::sqrt(var / nsets)};
}

}  // namespace zflow
