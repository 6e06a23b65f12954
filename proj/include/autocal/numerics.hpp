#ifndef AUTOCAL_NUMERICS_HPP
#define AUTOCAL_NUMERICS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace autocal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Neumaier-compensated accumulator. All portfolio reductions go through this
// so results are independent of evaluation order tricks and thread count.
class KahanSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(const Eigen::Ref<const Vector>& v) {
  KahanSum acc;
  for (Index i = 0; i < v.size(); ++i) acc.add(v[i]);
  return acc.value();
}

inline double compensated_mean(const Eigen::Ref<const Vector>& v) {
  return v.size() == 0 ? 0.0 : compensated_sum(v) / static_cast<double>(v.size());
}

// floor(x) with a guard against products like 0.7*10 landing one ulp below an
// integer. The guard exceeds the roundoff of n*alpha for any realistic n.
inline Index guarded_floor_index(double x) {
  return static_cast<Index>(std::floor(x + 1e-9));
}

// ceil counterpart, used for order-statistic ranks.
inline Index guarded_ceil_index(double x) {
  return static_cast<Index>(std::ceil(x - 1e-9));
}

} // namespace autocal

#endif
