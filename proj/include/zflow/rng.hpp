#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace zflow {

// Counter-based splittable generator. Stream (seed, id) is an independent
// substream; draw i is a fixed mixing function of (key, i), so trials keyed by
// index are order-independent and reproducible in parallel.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : key_(derive_key(seed, stream_id)) {}

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGolden); }

  // Uniform on (0, 1]; never returns 0 so log() is safe.
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard complex Gaussian: Re, Im independent N(0, 1/2), so E|xi|^2 = 1.
  std::complex<double> complex_gaussian() {
    const double r = std::sqrt(-std::log(uniform()));
    const double phi = 2.0 * kPi * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id) {
    return mix(seed ^ mix(stream_id + kGolden));
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace zflow
