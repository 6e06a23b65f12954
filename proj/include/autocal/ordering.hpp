#ifndef AUTOCAL_ORDERING_HPP
#define AUTOCAL_ORDERING_HPP

#include "autocal/tweedie.hpp"

#include <vector>

namespace autocal {

// t -> (1/n) sum y_i 1[score_i <= t]: premium income carried by the
// sub-portfolio with the smallest predicted risk. Nondecreasing step function
// ending at the mean response.
struct LpmCurve {
  Vector thresholds; // increasing
  Vector values;
};

double lower_partial_moment(const Eigen::Ref<const Vector>& y,
                            const Eigen::Ref<const Vector>& scores, double t);

LpmCurve lpm_curve(const Eigen::Ref<const Vector>& y,
                   const Eigen::Ref<const Vector>& scores,
                   const Eigen::Ref<const Vector>& t_grid);

// mean of psi_xi over scores
double psi_mean(PowerParam p, const Eigen::Ref<const Vector>& scores);

// t -> mean of (v - t)_+
double stop_loss(const Eigen::Ref<const Vector>& values, double t);

// Sufficient-condition audit: predictor 2 outperforms predictor 1 under every
// Tweedie deviance on the grid when both the psi-mean gaps and the lower
// partial moment gaps are nonnegative. The psi condition on a finite grid is a
// necessary-condition check; the t grid is exact because LPM curves are step
// functions with jumps at the observed scores.
struct DominanceReport {
  std::vector<double> xi_grid;
  std::vector<double> psi_gap;      // E[psi(s1)] - E[psi(s2)] per xi
  Vector t_grid;
  Vector lpm_gap;                   // LPM1(t) - LPM2(t) per t
  std::vector<double> deviance_gap; // D(xi, s1) - D(xi, s2) per xi
  bool cond1_holds = false;         // grid-verified only
  bool cond2_holds = false;         // exact on the default grid
  bool sufficient = false;          // cond1 && cond2
};

std::vector<double> default_xi_grid(); // 1.0, 1.1, ..., 3.0

// t_grid empty -> union of distinct values from both score vectors (exact).
DominanceReport check_dominance(const Eigen::Ref<const Vector>& y,
                                const Eigen::Ref<const Vector>& e,
                                const Eigen::Ref<const Vector>& scores1,
                                const Eigen::Ref<const Vector>& scores2,
                                const std::vector<double>& xi_grid,
                                const Eigen::Ref<const Vector>& t_grid = Vector());

// single-xi variant: the psi condition is imposed for that value only
DominanceReport check_dominance_single(const Eigen::Ref<const Vector>& y,
                                       const Eigen::Ref<const Vector>& e,
                                       const Eigen::Ref<const Vector>& scores1,
                                       const Eigen::Ref<const Vector>& scores2,
                                       double xi);

// Convex-order audit of a corrected predictor against the response:
// autocalibration makes the predictor less variable than the response with
// equal means, so stop-loss violations should vanish up to noise.
struct ConvexOrderReport {
  double mean_gap = 0.0;      // |mean(values) - mean(y)|
  double max_violation = 0.0; // max_t SL(values,t) - SL(y,t)
  double t_at_max = 0.0;
};

// t_grid empty -> 0 plus the union of distinct values of both inputs, which
// covers every breakpoint of the piecewise-linear stop-loss difference.
ConvexOrderReport convex_order_check(const Eigen::Ref<const Vector>& values,
                                     const Eigen::Ref<const Vector>& y,
                                     const Eigen::Ref<const Vector>& t_grid = Vector());

} // namespace autocal

#endif
