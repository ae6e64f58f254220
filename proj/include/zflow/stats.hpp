#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace zflow {

using cplx = std::complex<double>;

struct CovarianceGrid {
  std::vector<std::pair<cplx, cplx>> points;  // (z, w) probe pairs
  std::vector<cplx> estimates;                // mean of F(z) conj(F(w))
  std::vector<double> std_errors;             // sample std / sqrt(trials)
  int trials = 0;
};

// Evaluates trial `trial` of the sampled function at `pts`, writing `out`.
using TrialEvaluator =
    std::function<void(std::uint64_t seed, std::uint64_t trial, std::span<const cplx> pts,
                       std::span<cplx> out)>;

CovarianceGrid empirical_covariance(const TrialEvaluator& sampler,
                                    std::span<const std::pair<cplx, cplx>> probes, int trials,
                                    std::uint64_t seed);

enum class TestMethod { energy_permutation, ks_radial };

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::energy_permutation;
  int n1 = 0, n2 = 0;
};

// Energy-distance two-sample test with a permutation p-value,
// p = (1 + #{perm >= observed}) / (n_perm + 1).
TestReport two_sample_energy(std::span<const cplx> xs, std::span<const cplx> ys,
                             int n_perm = 500, std::uint64_t seed = 0x5eed);

struct DiskCounts {
  double mean = 0.0;
  double se = 0.0;
};
DiskCounts zero_counts_in_disk(std::span<const std::vector<cplx>> zero_sets, double radius);

}  // namespace zflow
