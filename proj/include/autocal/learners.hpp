#ifndef AUTOCAL_LEARNERS_HPP
#define AUTOCAL_LEARNERS_HPP

#include "autocal/dataset.hpp"
#include "autocal/tweedie.hpp"

#include <vector>

namespace autocal {

enum class ExpansionKind { Identity, Polynomial, Spline };

// Per-feature column expansion. Spline means truncated power basis:
// x, ..., x^d, then (x - t_k)_+^d per knot.
struct FeatureExpansion {
  ExpansionKind kind = ExpansionKind::Identity;
  int degree = 1;            // 1..3 (Polynomial, Spline)
  std::vector<double> knots; // Spline only; strictly increasing, inside the observed range

  Index columns() const {
    switch (kind) {
      case ExpansionKind::Identity: return 1;
      case ExpansionKind::Polynomial: return degree;
      case ExpansionKind::Spline: return degree + static_cast<Index>(knots.size());
    }
    return 0;
  }
};

struct BasisSpec {
  std::vector<FeatureExpansion> features; // one entry per feature column
  bool tensor_product = false;            // pairwise products; needs exactly 2 features
  // optional valid domain per feature; empty means unchecked
  std::vector<double> domain_lo;
  std::vector<double> domain_hi;

  Index columns() const;
  void validate() const;
};

BasisSpec identity_basis(Index n_features);
BasisSpec polynomial_basis(Index n_features, int degree);
// equispaced interior knots over each feature's observed range
BasisSpec spline_basis(const Eigen::Ref<const Matrix>& x, int degree, int n_knots);

// Intercept column of ones first, then the expansions. Validates knots
// against the observed feature ranges.
Matrix design_matrix(const Eigen::Ref<const Matrix>& x, const BasisSpec& basis);

struct GlmFit {
  Vector coefficients; // intercept first, aligned with design_matrix columns
  PowerParam power{1.0};
  BasisSpec basis;
  bool converged = false;
  int iterations = 0;
  double final_deviance = 0.0;
};

struct GlmOptions {
  double tol = 1e-8; // relative deviance change
  int max_iter = 25;
};

// Log-link quasi-likelihood IRLS with expected totals m = e exp(X beta),
// working weight m^(2-xi) and working response eta + (y-m)/m. Deviance is
// non-increasing across iterations (step halving). After the deviance
// criterion fires, up to three more scoring steps run so the likelihood
// equations hold to near machine precision; under the canonical pair (xi=1,
// log link) that is the exact balance property sum x_ij (y_i - m_i) = 0.
GlmFit fit_glm(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& e,
               const Eigen::Ref<const Matrix>& design, PowerParam p,
               const GlmOptions& opts = GlmOptions{}, const BasisSpec& basis = BasisSpec{});

GlmFit fit_glm(const Dataset& data, const BasisSpec& basis, PowerParam p,
               const GlmOptions& opts = GlmOptions{});

// Annualized scores exp(design row . coefficients); exposure not applied.
Vector predict_glm(const GlmFit& fit, const Eigen::Ref<const Matrix>& features);

struct BoostStump {
  Index feature = 0;
  double threshold = 0.0; // x <= threshold goes left
  double left_step = 0.0; // on the log-score scale, before shrinkage
  double right_step = 0.0;
};

// prediction = exp(initial_log_level + shrinkage * sum of stump steps)
struct BoostFit {
  double initial_log_level = 0.0;
  std::vector<BoostStump> stumps;
  double shrinkage = 1.0;
  int n_trees = 0; // requested rounds; stumps.size() <= n_trees
};

struct BoostOptions {
  int n_trees = 30;
  double shrinkage = 0.1;
  int min_leaf = 1;
};

// Depth-1 Poisson-deviance boosting: each round scans thresholds at feature
// midpoints, applies per-leaf Newton steps ln(sum y / sum m) on the current
// fit, and keeps training deviance non-increasing via step halving. Ties
// break lexicographically on (deviance, feature, threshold).
BoostFit fit_boost(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& e,
                   const Eigen::Ref<const Matrix>& x, const BoostOptions& opts);

Vector predict_boost(const BoostFit& fit, const Eigen::Ref<const Matrix>& features);

} // namespace autocal

#endif
