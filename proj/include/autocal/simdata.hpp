#ifndef AUTOCAL_SIMDATA_HPP
#define AUTOCAL_SIMDATA_HPP

#include "autocal/dataset.hpp"

#include <cstdint>

namespace autocal {

enum class SimShape { Univariate, Bivariate };

// Deterministic Poisson portfolio generator. Identical config -> bit-identical
// dataset within this implementation.
struct SimConfig {
  Index n = 10000;           // defaults are arbitrary and documented as such
  std::uint64_t seed = 42;
  SimShape shape = SimShape::Univariate;

  void validate() const {
    if (n < 1) throw UsageError("SimConfig: n must be >= 1");
  }
};

// 8 - x + 3(x-5)_+ on [0,10]; piecewise linear, minimum 3 at the kink x=5.
double mean_univariate(double x);

// Two-bump surface on [0,10]^2, strictly positive; evaluated with
// u=(x1-5)/3, v=(x2-5)/3.
double mean_bivariate(double x1, double x2);

// Features i.i.d. uniform on [0,10] (independent coordinates), y ~ Poisson(mu(x)),
// exposure fixed at 1. The mu column is kept for oracle checks downstream.
Dataset simulate(const SimConfig& cfg);

enum class DistortKind { Scale, Power, LogShift };

// Manufacture miscalibrated predictors from positive scores:
//   Scale    : c * pi          (c > 0)
//   Power    : pi^a            (a > 0)
//   LogShift : exp(ln pi + d)
Vector distort(const Eigen::Ref<const Vector>& scores, DistortKind kind, double param);

} // namespace autocal

#endif
