#include "autocal/calibration.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace autocal {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

KernelSpec parse_kernel(const std::string& name) {
  if (name == "rectangular" || name == "rect") return {KernelKind::Rectangular};
  if (name == "tricube") return {KernelKind::Tricube};
  if (name == "epanechnikov" || name == "epan") return {KernelKind::Epanechnikov};
  throw UsageError("unknown kernel '" + name + "'");
}

CalibrationMap::CalibrationMap(Vector scores, Vector y, Vector e, KernelSpec kernel,
                               BandwidthSpec bandwidth, bool monotone_projection)
    : scores_(std::move(scores)), y_(std::move(y)), e_(std::move(e)),
      kernel_(kernel), bandwidth_(bandwidth), monotone_(monotone_projection) {
  const Index n = scores_.size();
  if (n == 0) throw UsageError("CalibrationMap: empty smoothing set");
  if (y_.size() != n || e_.size() != n)
    throw UsageError("CalibrationMap: anchor columns must have equal length");
  bandwidth_.validate();
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(scores_[i]))
      throw std::domain_error("CalibrationMap: anchor scores must be finite");
    if (!(e_[i] > 0.0) || !std::isfinite(e_[i]))
      throw std::domain_error("CalibrationMap: exposures must be finite and > 0");
    if (!(y_[i] >= 0.0) || !std::isfinite(y_[i]))
      throw std::domain_error("CalibrationMap: responses must be finite and >= 0");
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores_[a] < scores_[b]; });
  Vector s2(n), y2(n), e2(n);
  for (Index i = 0; i < n; ++i) {
    const Index j = order[static_cast<std::size_t>(i)];
    s2[i] = scores_[j];
    y2[i] = y_[j];
    e2[i] = e_[j];
  }
  scores_.swap(s2);
  y_.swap(y2);
  e_.swap(e2);

  KahanSum ty, te;
  min_rate_ = kInf;
  max_rate_ = -kInf;
  for (Index i = 0; i < n; ++i) {
    ty.add(y_[i]);
    te.add(e_[i]);
    const double r = y_[i] / e_[i];
    min_rate_ = std::min(min_rate_, r);
    max_rate_ = std::max(max_rate_, r);
  }
  total_y_ = ty.value();
  total_e_ = te.value();
}

double CalibrationMap::bandwidth_at(double s) const {
  if (!std::isfinite(s)) throw std::domain_error("bandwidth_at: query score must be finite");
  const Index n = scores_.size();
  const Index k = bandwidth_.neighbor_count(n);
  const double* beg = scores_.data();
  Index right = static_cast<Index>(std::lower_bound(beg, beg + n, s) - beg);
  Index left = right - 1;
  double dk = 0.0;
  for (Index taken = 0; taken < k; ++taken) {
    const double dl = left >= 0 ? s - scores_[left] : kInf;
    const double dr = right < n ? scores_[right] - s : kInf;
    if (dl <= dr) {
      dk = dl;
      --left;
    } else {
      dk = dr;
      ++right;
    }
  }
  double h = std::max(dk, bandwidth_.alpha1);
  if (h == 0.0) {
    // massive ties at s: widen to the smallest positive distance; when every
    // anchor ties the window is just the tied block
    while (left >= 0 && scores_[left] == s) --left;
    while (right < n && scores_[right] == s) ++right;
    const double dl = left >= 0 ? s - scores_[left] : kInf;
    const double dr = right < n ? scores_[right] - s : kInf;
    const double dmin = std::min(dl, dr);
    h = std::isfinite(dmin) ? dmin : 0.0;
  }
  return h;
}

double CalibrationMap::window_rate(double s, double h) const {
  const Index n = scores_.size();
  const double* beg = scores_.data();

  if (h == 0.0) {
    // all anchors tie with the query
    auto range = std::equal_range(beg, beg + n, s);
    Index lo = static_cast<Index>(range.first - beg);
    Index hi = static_cast<Index>(range.second - beg) - 1;
    if (lo > hi) throw NumericError("CalibrationMap: empty tie window");
    KahanSum wy, we;
    double mn = kInf, mx = -kInf;
    for (Index i = lo; i <= hi; ++i) {
      wy.add(y_[i]);
      we.add(e_[i]);
      const double r = y_[i] / e_[i];
      mn = std::min(mn, r);
      mx = std::max(mx, r);
    }
    return std::clamp(wy.value() / we.value(), mn, mx);
  }

  Index lo = static_cast<Index>(std::lower_bound(beg, beg + n, s - h) - beg);
  while (lo > 0 && std::abs(scores_[lo - 1] - s) <= h) --lo;
  while (lo < n && std::abs(scores_[lo] - s) > h) ++lo;
  Index hi = static_cast<Index>(std::upper_bound(beg, beg + n, s + h) - beg) - 1;
  while (hi + 1 < n && std::abs(scores_[hi + 1] - s) <= h) ++hi;
  while (hi >= 0 && std::abs(scores_[hi] - s) > h) --hi;
  if (lo > hi) throw NumericError("CalibrationMap: empty window");

  if (kernel_.kind == KernelKind::Rectangular && lo == 0 && hi == n - 1)
    return std::clamp(total_y_ / total_e_, min_rate_, max_rate_);

  KahanSum wy, we;
  double mn = kInf, mx = -kInf;
  for (Index i = lo; i <= hi; ++i) {
    const double w = kernel_.weight((scores_[i] - s) / h);
    if (w <= 0.0) continue;
    wy.add(w * y_[i]);
    we.add(w * e_[i]);
    const double r = y_[i] / e_[i];
    mn = std::min(mn, r);
    mx = std::max(mx, r);
  }
  if (!(we.value() > 0.0)) {
    // smooth kernel with every in-window anchor exactly on the boundary:
    // fall back to uniform weights over the closed window
    wy = KahanSum();
    we = KahanSum();
    mn = kInf;
    mx = -kInf;
    for (Index i = lo; i <= hi; ++i) {
      wy.add(y_[i]);
      we.add(e_[i]);
      const double r = y_[i] / e_[i];
      mn = std::min(mn, r);
      mx = std::max(mx, r);
    }
  }
  return std::clamp(wy.value() / we.value(), mn, mx);
}

double CalibrationMap::evaluate(double s) const {
  return window_rate(s, bandwidth_at(s));
}

Vector CalibrationMap::evaluate_many(const Eigen::Ref<const Vector>& queries) const {
  const Index m = queries.size();
  Vector out(m);
  for (Index i = 0; i < m; ++i) out[i] = evaluate(queries[i]);
  if (monotone_ && m > 1) {
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return queries[a] < queries[b]; });
    Vector by_score(m);
    for (Index i = 0; i < m; ++i) by_score[i] = out[order[static_cast<std::size_t>(i)]];
    const Vector proj = isotonic_projection(by_score);
    for (Index i = 0; i < m; ++i) out[order[static_cast<std::size_t>(i)]] = proj[i];
  }
  return out;
}

double bandwidth_at(double s, const CalibrationMap& map) { return map.bandwidth_at(s); }
double evaluate(const CalibrationMap& map, double s) { return map.evaluate(s); }

Vector autocalibrate(const Eigen::Ref<const Vector>& smooth_scores,
                     const Eigen::Ref<const Vector>& smooth_y,
                     const Eigen::Ref<const Vector>& smooth_e,
                     const Eigen::Ref<const Vector>& query_scores,
                     const KernelSpec& kernel, const BandwidthSpec& bandwidth,
                     bool monotone_projection) {
  CalibrationMap map(smooth_scores, smooth_y, smooth_e, kernel, bandwidth,
                     monotone_projection);
  return map.evaluate_many(query_scores);
}

CalibrationCurve calibration_curve(const Eigen::Ref<const Vector>& scores,
                                   const Eigen::Ref<const Vector>& y,
                                   const Eigen::Ref<const Vector>& e,
                                   const Eigen::Ref<const Vector>& grid,
                                   const KernelSpec& kernel,
                                   const BandwidthSpec& bandwidth) {
  if (grid.size() == 0) throw UsageError("calibration_curve: empty grid");
  const double lo = scores.minCoeff();
  const double hi = scores.maxCoeff();
  for (Index i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= lo && grid[i] <= hi))
      throw UsageError("calibration_curve: grid must lie within the score range");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw UsageError("calibration_curve: grid must be strictly increasing");
  }
  CalibrationMap map(scores, y, e, kernel, bandwidth, false);
  CalibrationCurve out;
  out.series.grid = grid;
  out.series.values = map.evaluate_many(grid);

  const double q10 = quantile(scores, 0.10);
  const double q90 = quantile(scores, 0.90);
  double dep = std::numeric_limits<double>::quiet_NaN();
  for (Index i = 0; i < grid.size(); ++i) {
    if (grid[i] < q10 || grid[i] > q90) continue;
    const double d = std::abs(out.series.values[i] - grid[i]);
    if (std::isnan(dep) || d > dep) dep = d;
  }
  out.identity_departure = dep;
  return out;
}

Vector isotonic_projection(const Eigen::Ref<const Vector>& values) {
  const Index n = values.size();
  Vector out(n);
  if (n == 0) return out;
  // pool adjacent violators, unit weights
  std::vector<double> mean;
  std::vector<Index> count;
  mean.reserve(static_cast<std::size_t>(n));
  count.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double m = values[i];
    Index c = 1;
    while (!mean.empty() && mean.back() >= m) {
      m = (mean.back() * static_cast<double>(count.back()) + m * static_cast<double>(c)) /
          static_cast<double>(count.back() + c);
      c += count.back();
      mean.pop_back();
      count.pop_back();
    }
    mean.push_back(m);
    count.push_back(c);
  }
  Index pos = 0;
  for (std::size_t b = 0; b < mean.size(); ++b)
    for (Index j = 0; j < count[b]; ++j) out[pos++] = mean[b];
  return out;
}

} // namespace autocal
