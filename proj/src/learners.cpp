#include "autocal/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autocal {

namespace {
constexpr double kMaxLeafStep = 4.0; // cap for empty-response leaves on the log scale
}

Index BasisSpec::columns() const {
  Index c = 1; // intercept
  for (const auto& f : features) c += f.columns();
  if (tensor_product && features.size() == 2)
    c += features[0].columns() * features[1].columns();
  return c;
}

void BasisSpec::validate() const {
  if (features.empty()) throw UsageError("BasisSpec: no feature expansions");
  for (const auto& f : features) {
    if (f.kind != ExpansionKind::Identity && (f.degree < 1 || f.degree > 3))
      throw UsageError("BasisSpec: degree must lie in {1,2,3}");
    for (std::size_t k = 1; k < f.knots.size(); ++k)
      if (!(f.knots[k] > f.knots[k - 1]))
        throw UsageError("BasisSpec: knots must be strictly increasing");
  }
  if (tensor_product && features.size() != 2)
    throw UsageError("BasisSpec: tensor product needs exactly two features");
  if (!domain_lo.empty() &&
      (domain_lo.size() != features.size() || domain_hi.size() != features.size()))
    throw UsageError("BasisSpec: domain bounds must cover every feature");
}

BasisSpec identity_basis(Index n_features) {
  BasisSpec b;
  b.features.assign(static_cast<std::size_t>(n_features), FeatureExpansion{});
  return b;
}

BasisSpec polynomial_basis(Index n_features, int degree) {
  BasisSpec b;
  FeatureExpansion f;
  f.kind = ExpansionKind::Polynomial;
  f.degree = degree;
  b.features.assign(static_cast<std::size_t>(n_features), f);
  b.validate();
  return b;
}

BasisSpec spline_basis(const Eigen::Ref<const Matrix>& x, int degree, int n_knots) {
  if (n_knots < 1) throw UsageError("spline_basis: need at least one knot");
  BasisSpec b;
  for (Index j = 0; j < x.cols(); ++j) {
    const double lo = x.col(j).minCoeff();
    const double hi = x.col(j).maxCoeff();
    if (!(hi > lo)) throw UsageError("spline_basis: feature has no spread");
    FeatureExpansion f;
    f.kind = ExpansionKind::Spline;
    f.degree = degree;
    for (int k = 1; k <= n_knots; ++k)
      f.knots.push_back(lo + (hi - lo) * static_cast<double>(k) /
                                 static_cast<double>(n_knots + 1));
    b.features.push_back(std::move(f));
  }
  b.validate();
  return b;
}

namespace {

// expansion columns for one feature value, appended to out
void expand_value(const FeatureExpansion& f, double v, std::vector<double>& out) {
  switch (f.kind) {
    case ExpansionKind::Identity:
      out.push_back(v);
      return;
    case ExpansionKind::Polynomial: {
      double p = 1.0;
      for (int d = 1; d <= f.degree; ++d) {
        p *= v;
        out.push_back(p);
      }
      return;
    }
    case ExpansionKind::Spline: {
      double p = 1.0;
      for (int d = 1; d <= f.degree; ++d) {
        p *= v;
        out.push_back(p);
      }
      for (double t : f.knots) {
        const double u = std::max(v - t, 0.0);
        out.push_back(std::pow(u, f.degree));
      }
      return;
    }
  }
}

Matrix build_design(const Eigen::Ref<const Matrix>& x, const BasisSpec& basis) {
  basis.validate();
  if (x.cols() != static_cast<Index>(basis.features.size()))
    throw UsageError("design_matrix: basis does not match the feature count");
  const Index n = x.rows();
  const Index cols = basis.columns();
  Matrix out(n, cols);
  std::vector<double> row;
  std::vector<double> fa, fb;
  for (Index i = 0; i < n; ++i) {
    row.clear();
    row.push_back(1.0);
    for (std::size_t f = 0; f < basis.features.size(); ++f)
      expand_value(basis.features[f], x(i, static_cast<Index>(f)), row);
    if (basis.tensor_product && basis.features.size() == 2) {
      fa.clear();
      fb.clear();
      expand_value(basis.features[0], x(i, 0), fa);
      expand_value(basis.features[1], x(i, 1), fb);
      for (double a : fa)
        for (double b : fb) row.push_back(a * b);
    }
    if (static_cast<Index>(row.size()) != cols)
      throw NumericError("design_matrix: column count mismatch");
    for (Index c = 0; c < cols; ++c) out(i, c) = row[static_cast<std::size_t>(c)];
  }
  return out;
}

} // namespace

Matrix design_matrix(const Eigen::Ref<const Matrix>& x, const BasisSpec& basis) {
  basis.validate();
  if (x.rows() == 0) throw UsageError("design_matrix: no rows");
  for (std::size_t f = 0; f < basis.features.size(); ++f) {
    const auto& fe = basis.features[f];
    if (fe.kind != ExpansionKind::Spline || fe.knots.empty()) continue;
    const double lo = x.col(static_cast<Index>(f)).minCoeff();
    const double hi = x.col(static_cast<Index>(f)).maxCoeff();
    for (double t : fe.knots)
      if (!(t > lo && t < hi))
        throw UsageError("design_matrix: knot outside the observed feature range");
  }
  return build_design(x, basis);
}

namespace {

double relative_change(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

// sup-norm of the quasi-score sum x_ij m^(1-xi) (y_i - m_i)
double score_residual(const Eigen::Ref<const Matrix>& design,
                      const Eigen::Ref<const Vector>& y, const Vector& m, double xi) {
  Vector r(m.size());
  for (Index i = 0; i < m.size(); ++i)
    r[i] = std::pow(m[i], 1.0 - xi) * (y[i] - m[i]);
  return (design.transpose() * r).cwiseAbs().maxCoeff();
}

} // namespace

GlmFit fit_glm(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& e,
               const Eigen::Ref<const Matrix>& design, PowerParam p,
               const GlmOptions& opts, const BasisSpec& basis) {
  const Index n = y.size();
  if (e.size() != n || design.rows() != n)
    throw UsageError("fit_glm: rows of y, e, design must agree");
  if (n == 0) throw UsageError("fit_glm: empty input");
  const Index q = design.cols();
  if (q == 0 || q > n) throw NumericError("fit_glm: singular fit (more columns than rows)");
  for (Index i = 0; i < n; ++i) {
    if (!(e[i] > 0.0)) throw std::domain_error("fit_glm: exposures must be > 0");
    if (!(y[i] >= 0.0)) throw std::domain_error("fit_glm: responses must be >= 0");
  }
  const double sum_y = compensated_sum(y);
  const double sum_e = compensated_sum(e);
  if (!(sum_y > 0.0)) throw NumericError("fit_glm: responses sum to zero");
  const double xi = p.xi();

  GlmFit fit;
  fit.power = p;
  fit.basis = basis;
  fit.coefficients = Vector::Zero(q);
  fit.coefficients[0] = std::log(sum_y / sum_e);

  auto deviance_of = [&](const Vector& beta) {
    const Vector eta = design * beta;
    Vector scores(n);
    for (Index i = 0; i < n; ++i) {
      scores[i] = std::exp(eta[i]);
      if (!std::isfinite(scores[i]) || !(scores[i] > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    }
    return mean_deviance(p, y, e, scores);
  };

  double dev = deviance_of(fit.coefficients);
  if (std::isnan(dev)) throw NumericError("fit_glm: non-finite starting point");

  bool deviance_converged = false;
  int polish_left = 3;
  const int hard_cap = opts.max_iter + 3;
  int iter = 0;
  while (iter < hard_cap) {
    const Vector eta = design * fit.coefficients;
    Vector m(n), w(n), z(n);
    for (Index i = 0; i < n; ++i) {
      m[i] = e[i] * std::exp(eta[i]);
      if (!std::isfinite(m[i]) || !(m[i] > 0.0))
        throw NumericError("fit_glm: divergence (non-finite fitted totals)");
      w[i] = std::pow(m[i], 2.0 - xi);
      z[i] = eta[i] + (y[i] - m[i]) / m[i];
    }
    Matrix a(n, q);
    Vector b(n);
    for (Index i = 0; i < n; ++i) {
      const double sw = std::sqrt(w[i]);
      a.row(i) = sw * design.row(i);
      b[i] = sw * z[i];
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < q) throw NumericError("fit_glm: singular fit (rank-deficient design)");
    Vector proposal = qr.solve(b);

    // step halving keeps the deviance monotone
    double dev_new = deviance_of(proposal);
    int halvings = 0;
    while ((std::isnan(dev_new) || dev_new > dev) && halvings < 10) {
      proposal = 0.5 * (proposal + fit.coefficients);
      dev_new = deviance_of(proposal);
      ++halvings;
    }
    if (std::isnan(dev_new)) throw NumericError("fit_glm: divergence (step halving failed)");
    if (dev_new > dev) {
      // no descent direction left; accept the current point
      break;
    }

    fit.coefficients = proposal;
    ++iter;
    const double change = relative_change(dev_new, dev);
    dev = dev_new;

    if (!deviance_converged) {
      if (change < opts.tol) {
        deviance_converged = true;
        fit.iterations = iter;
      } else if (iter >= opts.max_iter) {
        break;
      }
    }
    if (deviance_converged) {
      Vector m_now(n);
      const Vector eta_now = design * fit.coefficients;
      for (Index i = 0; i < n; ++i) m_now[i] = e[i] * std::exp(eta_now[i]);
      const double resid = score_residual(design, y, m_now, xi);
      if (resid <= 1e-13 * (sum_y + compensated_sum(m_now)) || polish_left == 0) break;
      --polish_left;
    }
  }

  fit.converged = deviance_converged;
  if (!deviance_converged) fit.iterations = iter;
  fit.final_deviance = dev;
  return fit;
}

GlmFit fit_glm(const Dataset& data, const BasisSpec& basis, PowerParam p,
               const GlmOptions& opts) {
  data.validate();
  const Matrix design = design_matrix(data.x, basis);
  return fit_glm(data.y, data.exposure, design, p, opts, basis);
}

Vector predict_glm(const GlmFit& fit, const Eigen::Ref<const Matrix>& features) {
  if (features.cols() != static_cast<Index>(fit.basis.features.size()))
    throw UsageError("predict_glm: feature count does not match the fitted basis");
  for (Index i = 0; i < features.rows(); ++i)
    for (Index j = 0; j < features.cols(); ++j) {
      const double v = features(i, j);
      if (!std::isfinite(v)) throw UsageError("predict_glm: non-finite feature");
      if (!fit.basis.domain_lo.empty()) {
        const std::size_t f = static_cast<std::size_t>(j);
        if (v < fit.basis.domain_lo[f] || v > fit.basis.domain_hi[f])
          throw UsageError("predict_glm: feature outside the basis domain");
      }
    }
  const Matrix design = build_design(features, fit.basis);
  if (design.cols() != fit.coefficients.size())
    throw UsageError("predict_glm: design does not match the coefficients");
  return (design * fit.coefficients).array().exp();
}

BoostFit fit_boost(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& e,
                   const Eigen::Ref<const Matrix>& x, const BoostOptions& opts) {
  const Index n = y.size();
  if (e.size() != n || x.rows() != n)
    throw UsageError("fit_boost: rows of y, e, x must agree");
  if (n == 0) throw UsageError("fit_boost: empty input");
  if (opts.n_trees < 1) throw UsageError("fit_boost: n_trees must be >= 1");
  if (!(opts.shrinkage > 0.0 && opts.shrinkage <= 1.0))
    throw UsageError("fit_boost: shrinkage must lie in (0,1]");
  if (opts.min_leaf < 1) throw UsageError("fit_boost: min_leaf must be >= 1");
  for (Index i = 0; i < n; ++i) {
    if (!(e[i] > 0.0)) throw std::domain_error("fit_boost: exposures must be > 0");
    if (!(y[i] >= 0.0)) throw std::domain_error("fit_boost: responses must be >= 0");
  }
  const double sum_y = compensated_sum(y);
  const double sum_e = compensated_sum(e);
  if (!(sum_y > 0.0)) throw NumericError("fit_boost: degenerate all-zero response");

  BoostFit fit;
  fit.shrinkage = opts.shrinkage;
  fit.n_trees = opts.n_trees;
  fit.initial_log_level = std::log(sum_y / sum_e);

  Vector logf = Vector::Constant(n, fit.initial_log_level);
  Vector m(n);
  for (Index i = 0; i < n; ++i) m[i] = e[i] * std::exp(logf[i]);

  auto mean_loss = [&](const Vector& totals) {
    KahanSum acc;
    for (Index i = 0; i < n; ++i) acc.add(totals[i] - y[i] * std::log(totals[i]));
    return acc.value() / static_cast<double>(n);
  };
  double dev = mean_loss(m);

  // presort rows per feature once
  std::vector<std::vector<Index>> order(static_cast<std::size_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) {
    auto& ord = order[static_cast<std::size_t>(j)];
    ord.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) ord[static_cast<std::size_t>(i)] = i;
    std::sort(ord.begin(), ord.end(),
              [&](Index a, Index b) { return x(a, j) < x(b, j); });
  }

  auto newton_step = [](double sy, double sm) {
    if (sy <= 0.0) return -kMaxLeafStep;
    return std::clamp(std::log(sy / sm), -kMaxLeafStep, kMaxLeafStep);
  };

  for (int round = 0; round < opts.n_trees; ++round) {
    bool have_best = false;
    double best_loss = std::numeric_limits<double>::infinity();
    Index best_feature = 0;
    double best_threshold = 0.0;
    double best_left = 0.0, best_right = 0.0;

    const double sum_m = compensated_sum(m);
    KahanSum yl_all;
    for (Index i = 0; i < n; ++i) yl_all.add(y[i] * std::log(m[i]));
    const double sum_ylogm = yl_all.value();

    for (Index j = 0; j < x.cols(); ++j) {
      const auto& ord = order[static_cast<std::size_t>(j)];
      double sy = 0.0, sm = 0.0, syl = 0.0;
      for (Index r = 0; r + 1 < n; ++r) {
        const Index i = ord[static_cast<std::size_t>(r)];
        sy += y[i];
        sm += m[i];
        syl += y[i] * std::log(m[i]);
        const double v = x(i, j);
        const double vnext = x(ord[static_cast<std::size_t>(r + 1)], j);
        if (!(vnext > v)) continue; // not a boundary between distinct values
        const Index left_count = r + 1;
        if (left_count < opts.min_leaf || n - left_count < opts.min_leaf) continue;
        const double thr = 0.5 * (v + vnext);
        const double sl = newton_step(sy, sm);
        const double sr = newton_step(sum_y - sy, sum_m - sm);
        // total loss after full per-leaf Newton steps
        const double loss =
            (std::exp(sl) * sm - syl - sl * sy) +
            (std::exp(sr) * (sum_m - sm) - (sum_ylogm - syl) - sr * (sum_y - sy));
        const double mean = loss / static_cast<double>(n);
        if (mean < best_loss) {
          best_loss = mean;
          have_best = true;
          best_feature = j;
          best_threshold = thr;
          best_left = sl;
          best_right = sr;
        }
        // ties keep the earlier (smaller feature index, smaller threshold) split
      }
    }

    if (!have_best) break; // no admissible split; further rounds are identical

    // apply with shrinkage; halve until the training deviance does not increase
    double left = best_left, right = best_right;
    Vector trial(n);
    double dev_trial = std::numeric_limits<double>::infinity();
    int halvings = 0;
    for (;; ++halvings) {
      for (Index i = 0; i < n; ++i) {
        const double step = x(i, best_feature) <= best_threshold ? left : right;
        trial[i] = e[i] * std::exp(logf[i] + opts.shrinkage * step);
      }
      dev_trial = mean_loss(trial);
      if (!(dev_trial > dev) && std::isfinite(dev_trial)) break;
      if (halvings >= 10) break;
      left *= 0.5;
      right *= 0.5;
    }
    if (!(dev_trial <= dev) || !std::isfinite(dev_trial)) break;

    fit.stumps.push_back({best_feature, best_threshold, left, right});
    for (Index i = 0; i < n; ++i) {
      const double step = x(i, best_feature) <= best_threshold ? left : right;
      logf[i] += opts.shrinkage * step;
    }
    m = trial;
    dev = dev_trial;
  }
  return fit;
}

Vector predict_boost(const BoostFit& fit, const Eigen::Ref<const Matrix>& features) {
  const Index n = features.rows();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < features.cols(); ++j)
      if (!std::isfinite(features(i, j)))
        throw UsageError("predict_boost: non-finite feature");
    double logf = fit.initial_log_level;
    for (const auto& s : fit.stumps) {
      if (s.feature >= features.cols())
        throw UsageError("predict_boost: stump refers to a missing feature");
      logf += fit.shrinkage *
              (features(i, s.feature) <= s.threshold ? s.left_step : s.right_step);
    }
    out[i] = std::exp(logf);
  }
  return out;
}

} // namespace autocal
