#ifndef AUTOCAL_CALIBRATION_HPP
#define AUTOCAL_CALIBRATION_HPP

#include "autocal/curves.hpp"
#include "autocal/kernel.hpp"

namespace autocal {

// Locally constant, intercept-only GLM on the score: at a query score s the
// corrected premium solves  sum nu_i y_i = sum nu_i e_i pi_bc  over anchors
// weighted by nu_i = nu((s_i - s)/h(s)). Anchors come from a smoothing set
// disjoint from whatever trained the scorer.
class CalibrationMap {
public:
  CalibrationMap(Vector scores, Vector y, Vector e, KernelSpec kernel,
                 BandwidthSpec bandwidth, bool monotone_projection = false);

  Index size() const { return scores_.size(); }
  const Vector& anchor_scores() const { return scores_; }
  const Vector& anchor_y() const { return y_; }
  const Vector& anchor_exposure() const { return e_; }
  const KernelSpec& kernel() const { return kernel_; }
  const BandwidthSpec& bandwidth() const { return bandwidth_; }
  bool monotone_projection() const { return monotone_; }
  double global_rate() const { return total_y_ / total_e_; }

  // h(s) = max(d_(k), alpha1); on total ties (all distances zero) the window
  // degenerates to the tied anchors and 0 is returned.
  double bandwidth_at(double s) const;

  // Weighted rate sum(nu y)/sum(nu e): a convex combination of anchor rates.
  double evaluate(double s) const;

  // evaluate() over many queries; applies the monotone projection over the
  // query grid when enabled.
  Vector evaluate_many(const Eigen::Ref<const Vector>& queries) const;

private:
  double window_rate(double s, double h) const;

  Vector scores_, y_, e_; // sorted by score
  KernelSpec kernel_;
  BandwidthSpec bandwidth_;
  bool monotone_;
  double total_y_ = 0.0, total_e_ = 0.0;
  double min_rate_ = 0.0, max_rate_ = 0.0;
};

double bandwidth_at(double s, const CalibrationMap& map);
double evaluate(const CalibrationMap& map, double s);

// Corrected scores for each query, smoothing on (scores, y, e).
Vector autocalibrate(const Eigen::Ref<const Vector>& smooth_scores,
                     const Eigen::Ref<const Vector>& smooth_y,
                     const Eigen::Ref<const Vector>& smooth_e,
                     const Eigen::Ref<const Vector>& query_scores,
                     const KernelSpec& kernel, const BandwidthSpec& bandwidth,
                     bool monotone_projection = false);

// Empirical s -> E[Y | score = s] over a grid, plus the sup departure from the
// identity over grid points inside the central 80% of the score distribution.
struct CalibrationCurve {
  CurveSeries series;
  double identity_departure = 0.0; // NaN when no grid point falls in the band
};

CalibrationCurve calibration_curve(const Eigen::Ref<const Vector>& scores,
                                   const Eigen::Ref<const Vector>& y,
                                   const Eigen::Ref<const Vector>& e,
                                   const Eigen::Ref<const Vector>& grid,
                                   const KernelSpec& kernel = KernelSpec{},
                                   const BandwidthSpec& bandwidth = BandwidthSpec{0.7, 0.0});

// L2 projection onto nondecreasing sequences (pool adjacent violators).
Vector isotonic_projection(const Eigen::Ref<const Vector>& values);

} // namespace autocal

#endif
