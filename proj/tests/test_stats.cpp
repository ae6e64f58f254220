#include <doctest.h>

#include <cmath>
#include <complex>

#include "zflow/errors.hpp"
#include "zflow/rng.hpp"
#include "zflow/stats.hpp"

using namespace zflow;

TEST_CASE("empirical_covariance on a constant function") {
  const std::vector<std::pair<cplx, cplx>> probes{{cplx(0.3, 0.1), cplx(-0.2, 0.5)}};
  const TrialEvaluator one = [](std::uint64_t, std::uint64_t, std::span<const cplx>,
                                std::span<cplx> out) {
    for (auto& v : out) v = 1.0;
  };
  const CovarianceGrid grid = empirical_covariance(one, probes, 200, 1);
  CHECK(std::abs(grid.estimates[0] - 1.0) < 1e-15);
  CHECK(grid.std_errors[0] == 0.0);
  CHECK(grid.trials == 200);
  CHECK_THROWS_AS(empirical_covariance(one, probes, 50, 1), DomainError);
}

TEST_CASE("empirical_covariance SE shrinks like 1/sqrt(M)") {
  const std::vector<std::pair<cplx, cplx>> probes{{cplx(0.0), cplx(0.0)}};
  const TrialEvaluator noisy = [](std::uint64_t seed, std::uint64_t trial,
                                  std::span<const cplx>, std::span<cplx> out) {
    RngStream rng(seed, trial);
    for (auto& v : out) v = rng.complex_gaussian();
  };
  const CovarianceGrid a = empirical_covariance(noisy, probes, 2000, 3);
  const CovarianceGrid b = empirical_covariance(noisy, probes, 8000, 3);
  const double ratio = a.std_errors[0] / b.std_errors[0];
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.2);
}

TEST_CASE("two_sample_energy basics") {
  RngStream rng(4, 4);
  std::vector<cplx> xs(200);
  for (auto& x : xs) x = rng.complex_gaussian();

  {
    const TestReport rep = two_sample_energy(xs, xs, 200, 9);
    CHECK(rep.statistic == doctest::Approx(0.0));
    CHECK(rep.p_value > 0.9);
    CHECK(rep.n1 == 200);
    CHECK(rep.method == TestMethod::energy_permutation);
  }
  {
    // p-values are multiples of 1/(n_perm + 1)
    std::vector<cplx> ys(200);
    for (auto& y : ys) y = rng.complex_gaussian() + cplx(0.2, 0.0);
    const TestReport rep = two_sample_energy(xs, ys, 500, 9);
    const double scaled = rep.p_value * 501.0;
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
  }
  {
    // power: N(0,1) vs N(3,1) separates decisively
    std::vector<cplx> far(500);
    for (auto& y : far) y = rng.complex_gaussian() + cplx(3.0, 0.0);
    std::vector<cplx> near(500);
    for (auto& y : near) y = rng.complex_gaussian();
    const TestReport rep = two_sample_energy(near, far, 500, 10);
    CHECK(rep.p_value < 0.01);
  }
  std::vector<cplx> tiny(10, cplx(0.0));
  CHECK_THROWS_AS(two_sample_energy(tiny, xs, 100, 1), DomainError);
}

TEST_CASE("permutation test is calibrated under the null") {
  // identical samplers: rejection rate at alpha = 0.05 stays in [0.02, 0.09]
  int rejections = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    RngStream rng(1000 + r, 0);
    std::vector<cplx> xs(100), ys(100);
    for (auto& x : xs) x = rng.complex_gaussian();
    for (auto& y : ys) y = rng.complex_gaussian();
    const TestReport rep = two_sample_energy(xs, ys, 199, 77 + r);
    if (rep.p_value <= 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / runs;
  CHECK(rate >= 0.02);
  CHECK(rate <= 0.09);
}

TEST_CASE("zero_counts_in_disk") {
  {
    const std::vector<std::vector<cplx>> empty_sets(5);
    const DiskCounts c = zero_counts_in_disk(empty_sets, 1.0);
    CHECK(c.mean == 0.0);
    CHECK(c.se == 0.0);
  }
  {
    std::vector<std::vector<cplx>> sets;
    sets.push_back({cplx(0.5), cplx(2.0)});
    sets.push_back({cplx(0.1), cplx(0.2), cplx(-0.3)});
    // counts are 1 and 3: mean 2, sample var 2, se = sqrt(2/2) = 1
    const DiskCounts c = zero_counts_in_disk(sets, 1.0);
    CHECK(c.mean == doctest::Approx(2.0));
    CHECK(c.se == doctest::Approx(1.0).epsilon(1e-12));
  }
}
