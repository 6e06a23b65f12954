#ifndef AUTOCAL_CURVES_HPP
#define AUTOCAL_CURVES_HPP

#include "autocal/dataset.hpp"
#include "autocal/kernel.hpp"

#include <string>
#include <utility>
#include <vector>

namespace autocal {

// Empirical CDF on sorted distinct values; proportions end at exactly 1.
struct Ecdf {
  Vector values;      // sorted distinct
  Vector proportions; // nondecreasing, last element exactly 1

  // P[score <= s]
  double operator()(double s) const;
};

Ecdf ecdf(const Eigen::Ref<const Vector>& scores);

// Lower empirical quantile: order statistic s_(ceil(alpha n)), alpha in (0,1].
double quantile(const Eigen::Ref<const Vector>& scores, double alpha);

// A curve sampled on a strictly increasing grid.
struct CurveSeries {
  Vector grid;
  Vector values;

  void validate() const {
    if (grid.size() != values.size()) throw UsageError("CurveSeries: length mismatch");
    if (grid.size() == 0) throw UsageError("CurveSeries: empty");
    for (Index i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1])) throw UsageError("CurveSeries: grid must be strictly increasing");
  }
};

// CC(alpha) = (1/(n ybar)) sum y_i 1(score_i <= q_alpha); CC(1) = 1 exactly.
CurveSeries concentration_curve(const Eigen::Ref<const Vector>& y,
                                const Eigen::Ref<const Vector>& scores,
                                const Eigen::Ref<const Vector>& alpha_grid);

// dCC/dalpha by central differences (one-sided at the ends); needs >= 3 points.
CurveSeries cc_density(const CurveSeries& curve);

// Row masks for scores strictly below the alpha_low quantile and strictly
// above the alpha_high quantile. Disjoint whenever alpha_low <= alpha_high.
struct QuantileSets {
  double alpha_low = 0.0;
  double alpha_high = 0.0;
  std::vector<bool> lower;
  std::vector<bool> upper;
};

QuantileSets quantile_sets(const Eigen::Ref<const Vector>& scores, double alpha_low,
                           double alpha_high);

// (1/n) sum (e_i score_i - y_i)
double bias(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& e,
            const Eigen::Ref<const Vector>& scores);

// (1/n) sum (m_i - y_i ln m_i) with m_i = e_i score_i
double empirical_poisson_loss(const Eigen::Ref<const Vector>& y,
                              const Eigen::Ref<const Vector>& e,
                              const Eigen::Ref<const Vector>& scores);

// Rank correlation with average ranks on ties.
double spearman(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// One smoothing-fraction sweep entry: autocalibrate on the smoothing split,
// score the validation split.
struct SweepRow {
  std::string model;
  double alpha0 = 0.0;
  double bias = 0.0;
  double poisson_loss = 0.0;
};

std::vector<SweepRow> alpha_sweep(const Eigen::Ref<const Vector>& y,
                                  const Eigen::Ref<const Vector>& e,
                                  const std::vector<std::pair<std::string, Vector>>& model_scores,
                                  const std::vector<std::size_t>& train_idx,
                                  const std::vector<std::size_t>& smooth_idx,
                                  const std::vector<std::size_t>& validate_idx,
                                  const std::vector<double>& alpha0_grid,
                                  const KernelSpec& kernel, double alpha1);

} // namespace autocal

#endif
