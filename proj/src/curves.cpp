#include "autocal/curves.hpp"

#include "autocal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace autocal {

double Ecdf::operator()(double s) const {
  const double* beg = values.data();
  const double* end = beg + values.size();
  const Index pos = static_cast<Index>(std::upper_bound(beg, end, s) - beg);
  return pos == 0 ? 0.0 : proportions[pos - 1];
}

Ecdf ecdf(const Eigen::Ref<const Vector>& scores) {
  const Index n = scores.size();
  if (n == 0) throw UsageError("ecdf: empty input");
  std::vector<double> sorted(scores.data(), scores.data() + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> vals;
  std::vector<double> props;
  Index count = 0;
  for (Index i = 0; i < n; ++i) {
    ++count;
    if (i + 1 == n || sorted[static_cast<std::size_t>(i + 1)] != sorted[static_cast<std::size_t>(i)]) {
      vals.push_back(sorted[static_cast<std::size_t>(i)]);
      props.push_back(static_cast<double>(count) / static_cast<double>(n));
    }
  }
  Ecdf out;
  out.values = Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
  out.proportions = Eigen::Map<const Vector>(props.data(), static_cast<Index>(props.size()));
  return out;
}

double quantile(const Eigen::Ref<const Vector>& scores, double alpha) {
  const Index n = scores.size();
  if (n == 0) throw UsageError("quantile: empty input");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("quantile: alpha must lie in (0,1]");
  Index k = guarded_ceil_index(alpha * static_cast<double>(n));
  k = std::clamp<Index>(k, 1, n);
  std::vector<double> v(scores.data(), scores.data() + n);
  std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
  return v[static_cast<std::size_t>(k - 1)];
}

CurveSeries concentration_curve(const Eigen::Ref<const Vector>& y,
                                const Eigen::Ref<const Vector>& scores,
                                const Eigen::Ref<const Vector>& alpha_grid) {
  const Index n = y.size();
  if (scores.size() != n) throw UsageError("concentration_curve: length mismatch");
  if (n == 0) throw UsageError("concentration_curve: empty input");
  const double ysum = compensated_sum(y);
  if (!(ysum > 0.0)) throw NumericError("concentration_curve: responses sum to zero");
  for (Index i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] > 0.0 && alpha_grid[i] <= 1.0))
      throw UsageError("concentration_curve: grid must lie in (0,1]");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1]))
      throw UsageError("concentration_curve: grid must be strictly increasing");
  }

  // sort rows by score once; each alpha maps to a prefix through the quantile
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return scores[a] < scores[b]; });

  CurveSeries out;
  out.grid = alpha_grid;
  out.values.resize(alpha_grid.size());
  KahanSum acc;
  Index pos = 0;
  for (Index g = 0; g < alpha_grid.size(); ++g) {
    // order statistic s_(ceil(alpha n)) read off the sorted permutation
    Index k = guarded_ceil_index(alpha_grid[g] * static_cast<double>(n));
    k = std::clamp<Index>(k, 1, n);
    const double q = scores[order[static_cast<std::size_t>(k - 1)]];
    while (pos < n && scores[order[static_cast<std::size_t>(pos)]] <= q) {
      acc.add(y[order[static_cast<std::size_t>(pos)]]);
      ++pos;
    }
    out.values[g] = acc.value() / ysum;
  }
  // alpha = 1 covers the whole portfolio exactly
  if (alpha_grid[alpha_grid.size() - 1] == 1.0) out.values[out.values.size() - 1] = 1.0;
  return out;
}

CurveSeries cc_density(const CurveSeries& curve) {
  curve.validate();
  const Index n = curve.grid.size();
  if (n < 3) throw UsageError("cc_density: need at least 3 points");
  CurveSeries out;
  out.grid = curve.grid;
  out.values.resize(n);
  out.values[0] = (curve.values[1] - curve.values[0]) / (curve.grid[1] - curve.grid[0]);
  for (Index i = 1; i + 1 < n; ++i)
    out.values[i] =
        (curve.values[i + 1] - curve.values[i - 1]) / (curve.grid[i + 1] - curve.grid[i - 1]);
  out.values[n - 1] =
      (curve.values[n - 1] - curve.values[n - 2]) / (curve.grid[n - 1] - curve.grid[n - 2]);
  return out;
}

QuantileSets quantile_sets(const Eigen::Ref<const Vector>& scores, double alpha_low,
                           double alpha_high) {
  if (!(alpha_low > 0.0 && alpha_low <= alpha_high && alpha_high < 1.0))
    throw UsageError("quantile_sets: need 0 < alpha_low <= alpha_high < 1");
  const double qlo = quantile(scores, alpha_low);
  const double qhi = quantile(scores, alpha_high);
  QuantileSets out;
  out.alpha_low = alpha_low;
  out.alpha_high = alpha_high;
  out.lower.resize(static_cast<std::size_t>(scores.size()));
  out.upper.resize(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i) {
    out.lower[static_cast<std::size_t>(i)] = scores[i] < qlo;
    out.upper[static_cast<std::size_t>(i)] = scores[i] > qhi;
  }
  return out;
}

double bias(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& e,
            const Eigen::Ref<const Vector>& scores) {
  const Index n = y.size();
  if (e.size() != n || scores.size() != n) throw UsageError("bias: length mismatch");
  if (n == 0) throw UsageError("bias: empty input");
  KahanSum acc;
  for (Index i = 0; i < n; ++i) {
    if (!(e[i] > 0.0)) throw std::domain_error("bias: exposures must be > 0");
    if (!(scores[i] > 0.0)) throw std::domain_error("bias: scores must be > 0");
    acc.add(e[i] * scores[i] - y[i]);
  }
  return acc.value() / static_cast<double>(n);
}

double empirical_poisson_loss(const Eigen::Ref<const Vector>& y,
                              const Eigen::Ref<const Vector>& e,
                              const Eigen::Ref<const Vector>& scores) {
  return mean_deviance(PowerParam(1.0), y, e, scores);
}

double spearman(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const Index n = a.size();
  if (b.size() != n) throw UsageError("spearman: length mismatch");
  if (n < 2) throw UsageError("spearman: need at least 2 observations");

  auto ranks = [n](const Eigen::Ref<const Vector>& v) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Index x, Index y) { return v[x] < v[y]; });
    Vector r(n);
    Index i = 0;
    while (i < n) {
      Index j = i;
      while (j + 1 < n && v[order[static_cast<std::size_t>(j + 1)]] ==
                              v[order[static_cast<std::size_t>(i)]])
        ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0; // average of ranks i+1..j+1
      for (Index t = i; t <= j; ++t) r[order[static_cast<std::size_t>(t)]] = avg;
      i = j + 1;
    }
    return r;
  };

  const Vector ra = ranks(a);
  const Vector rb = ranks(b);
  const double ma = compensated_mean(ra);
  const double mb = compensated_mean(rb);
  KahanSum sxx, syy, sxy;
  for (Index i = 0; i < n; ++i) {
    const double da = ra[i] - ma;
    const double db = rb[i] - mb;
    sxx.add(da * da);
    syy.add(db * db);
    sxy.add(da * db);
  }
  if (!(sxx.value() > 0.0) || !(syy.value() > 0.0))
    throw std::domain_error("spearman: correlation undefined for constant input");
  return sxy.value() / std::sqrt(sxx.value() * syy.value());
}

namespace {
void require_disjoint(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                      const char* what) {
  std::set<std::size_t> sa(a.begin(), a.end());
  for (std::size_t i : b)
    if (sa.count(i)) throw UsageError(std::string("alpha_sweep: overlapping splits (") + what + ")");
}
} // namespace

std::vector<SweepRow> alpha_sweep(const Eigen::Ref<const Vector>& y,
                                  const Eigen::Ref<const Vector>& e,
                                  const std::vector<std::pair<std::string, Vector>>& model_scores,
                                  const std::vector<std::size_t>& train_idx,
                                  const std::vector<std::size_t>& smooth_idx,
                                  const std::vector<std::size_t>& validate_idx,
                                  const std::vector<double>& alpha0_grid,
                                  const KernelSpec& kernel, double alpha1) {
  if (smooth_idx.empty() || validate_idx.empty())
    throw UsageError("alpha_sweep: smoothing and validation splits must be nonempty");
  require_disjoint(train_idx, smooth_idx, "train/smooth");
  require_disjoint(train_idx, validate_idx, "train/validate");
  require_disjoint(smooth_idx, validate_idx, "smooth/validate");
  for (double a : alpha0_grid)
    if (!(a > 0.0 && a <= 1.0)) throw UsageError("alpha_sweep: alpha0 grid must lie in (0,1]");

  const Vector ys = gather(y, smooth_idx);
  const Vector es = gather(e, smooth_idx);
  const Vector yv = gather(y, validate_idx);
  const Vector ev = gather(e, validate_idx);

  std::vector<SweepRow> rows;
  for (const auto& [name, scores] : model_scores) {
    if (scores.size() != y.size())
      throw UsageError("alpha_sweep: score vector length must match the dataset");
    const Vector ss = gather(scores, smooth_idx);
    const Vector sv = gather(scores, validate_idx);
    for (double a0 : alpha0_grid) {
      const Vector corrected = autocalibrate(ss, ys, es, sv, kernel, BandwidthSpec{a0, alpha1});
      SweepRow row;
      row.model = name;
      row.alpha0 = a0;
      row.bias = bias(yv, ev, corrected);
      row.poisson_loss = empirical_poisson_loss(yv, ev, corrected);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

} // namespace autocal
