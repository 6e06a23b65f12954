#include "autocal/simdata.hpp"

#include "autocal/rng.hpp"

#include <cmath>

namespace autocal {

double mean_univariate(double x) {
  if (!(x >= 0.0 && x <= 10.0))
    throw std::domain_error("mean_univariate: x must lie in [0,10]");
  return 8.0 - x + 3.0 * std::max(x - 5.0, 0.0);
}

double mean_bivariate(double x1, double x2) {
  if (!(x1 >= 0.0 && x1 <= 10.0 && x2 >= 0.0 && x2 <= 10.0))
    throw std::domain_error("mean_bivariate: coordinates must lie in [0,10]");
  const double u = (x1 - 5.0) / 3.0;
  const double v = (x2 - 5.0) / 3.0;
  return 3.0 * (1.0 - u) * (1.0 - u) * std::exp(-u * u - (v + 1.0) * (v + 1.0)) -
         10.0 * (u / 5.0 - u * u * u - v * v * v * v * v) * std::exp(-u * u - v * v) -
         (1.0 / 3.0) * std::exp(-(u + 1.0) * (u + 1.0) - v * v) + 8.0;
}

Dataset simulate(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const Index p = cfg.shape == SimShape::Univariate ? 1 : 2;
  Dataset d;
  d.y.resize(cfg.n);
  d.exposure = Vector::Ones(cfg.n);
  d.x.resize(cfg.n, p);
  d.mu.resize(cfg.n);
  for (Index i = 0; i < cfg.n; ++i) {
    double m;
    if (p == 1) {
      const double x = rng.uniform(0.0, 10.0);
      d.x(i, 0) = x;
      m = mean_univariate(x);
    } else {
      const double x1 = rng.uniform(0.0, 10.0);
      const double x2 = rng.uniform(0.0, 10.0);
      d.x(i, 0) = x1;
      d.x(i, 1) = x2;
      m = mean_bivariate(x1, x2);
    }
    d.mu[i] = m;
    d.y[i] = static_cast<double>(rng.poisson(m));
  }
  return d;
}

Vector distort(const Eigen::Ref<const Vector>& scores, DistortKind kind, double param) {
  for (Index i = 0; i < scores.size(); ++i)
    if (!(scores[i] > 0.0))
      throw std::domain_error("distort: scores must be > 0");
  switch (kind) {
    case DistortKind::Scale:
      if (!(param > 0.0)) throw std::domain_error("distort: scale factor must be > 0");
      return scores * param;
    case DistortKind::Power:
      if (!(param > 0.0)) throw std::domain_error("distort: power must be > 0");
      return scores.array().pow(param);
    case DistortKind::LogShift:
      if (!std::isfinite(param)) throw std::domain_error("distort: shift must be finite");
      return (scores.array().log() + param).exp();
  }
  throw UsageError("distort: unknown kind");
}

} // namespace autocal
