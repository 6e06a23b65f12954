#ifndef AUTOCAL_KERNEL_HPP
#define AUTOCAL_KERNEL_HPP

#include "autocal/errors.hpp"
#include "autocal/numerics.hpp"

#include <cmath>
#include <string>

namespace autocal {

enum class KernelKind { Rectangular, Tricube, Epanechnikov };

// Symmetric weight functions on [-1,1], maximal at 0. The rectangular kernel
// keeps the local likelihood equation a plain ratio of window sums, which is
// what preserves marginal totals inside each window.
struct KernelSpec {
  KernelKind kind = KernelKind::Rectangular;

  double weight(double u) const {
    const double a = std::abs(u);
    if (a > 1.0) return 0.0;
    switch (kind) {
      case KernelKind::Rectangular: return 1.0;
      case KernelKind::Tricube: {
        const double t = 1.0 - a * a * a;
        return t * t * t;
      }
      case KernelKind::Epanechnikov: return 0.75 * (1.0 - u * u);
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case KernelKind::Rectangular: return "rectangular";
      case KernelKind::Tricube: return "tricube";
      case KernelKind::Epanechnikov: return "epanechnikov";
    }
    return "?";
  }
};

KernelSpec parse_kernel(const std::string& name);

// Nearest-neighbor bandwidth h(s) = max(d_(k), alpha1) with k = max(1, floor(n*alpha0)).
struct BandwidthSpec {
  double alpha0 = 0.05; // nearest-neighbor fraction in (0,1]
  double alpha1 = 0.0;  // constant floor in score units, >= 0

  void validate() const {
    if (!(alpha0 > 0.0 && alpha0 <= 1.0))
      throw UsageError("BandwidthSpec: alpha0 must lie in (0,1]");
    if (!(alpha1 >= 0.0) || !std::isfinite(alpha1))
      throw UsageError("BandwidthSpec: alpha1 must be finite and >= 0");
  }

  Index neighbor_count(Index n) const {
    const Index k = guarded_floor_index(static_cast<double>(n) * alpha0);
    return std::max<Index>(1, std::min(k, n));
  }
};

} // namespace autocal

#endif
