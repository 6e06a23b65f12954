#ifndef AUTOCAL_RNG_HPP
#define AUTOCAL_RNG_HPP

#include "autocal/errors.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace autocal {

// Seedable 64-bit generator: std::mt19937_64 with hand-rolled variate
// transforms, so every draw depends only on (seed, call sequence) and not on
// library-specific distribution internals. Reproducible within this
// implementation; no cross-implementation bit-exactness claimed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform on [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw UsageError("Rng::below: n must be > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Poisson by inversion via sequential search. Exact and fast for the
  // moderate means used here (portfolio means stay below ~20).
  long poisson(double mu) {
    if (!(mu >= 0.0)) throw std::domain_error("Rng::poisson: mu must be >= 0");
    if (mu == 0.0) return 0;
    const double u = uniform01();
    double p = std::exp(-mu);
    double cum = p;
    long k = 0;
    const long cap = static_cast<long>(10.0 * mu) + 100; // never reached in practice
    while (u > cum && k < cap) {
      ++k;
      p *= mu / static_cast<double>(k);
      cum += p;
    }
    return k;
  }

  // Fisher-Yates permutation of 0..n-1
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(idx[i - 1], idx[j]);
    }
    return idx;
  }

private:
  std::mt19937_64 gen_;
};

} // namespace autocal

#endif
