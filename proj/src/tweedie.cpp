#include "autocal/tweedie.hpp"

namespace autocal {

double mean_deviance(PowerParam p, const Eigen::Ref<const Vector>& y,
                     const Eigen::Ref<const Vector>& e,
                     const Eigen::Ref<const Vector>& scores) {
  const Index n = y.size();
  if (e.size() != n || scores.size() != n)
    throw UsageError("mean_deviance: y, e, scores must have equal length");
  if (n == 0) throw UsageError("mean_deviance: empty input");
  KahanSum acc;
  for (Index i = 0; i < n; ++i) {
    if (!(e[i] > 0.0)) throw std::domain_error("mean_deviance: exposures must be > 0");
    if (!(scores[i] > 0.0)) throw std::domain_error("mean_deviance: scores must be > 0");
    acc.add(unit_loss(p, y[i], e[i] * scores[i]));
  }
  return acc.value() / static_cast<double>(n);
}

} // namespace autocal
