#include "autocal/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autocal {

namespace {

// sorted union of distinct values from two vectors
Vector distinct_union(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(a.size() + b.size()));
  for (Index i = 0; i < a.size(); ++i) v.push_back(a[i]);
  for (Index i = 0; i < b.size(); ++i) v.push_back(b[i]);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = v[i];
  return out;
}

// LPM over a sorted grid in O(n log n) via sorted prefix sums
Vector lpm_over_grid(const Eigen::Ref<const Vector>& y,
                     const Eigen::Ref<const Vector>& scores,
                     const Eigen::Ref<const Vector>& grid) {
  for (Index i = 1; i < grid.size(); ++i)
    if (grid[i] < grid[i - 1]) throw UsageError("lpm: threshold grid must be sorted");
  const Index n = y.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return scores[a] < scores[b]; });
  Vector out(grid.size());
  KahanSum acc;
  Index pos = 0;
  for (Index g = 0; g < grid.size(); ++g) {
    while (pos < n && scores[order[static_cast<std::size_t>(pos)]] <= grid[g]) {
      acc.add(y[order[static_cast<std::size_t>(pos)]]);
      ++pos;
    }
    out[g] = acc.value() / static_cast<double>(n);
  }
  return out;
}

} // namespace

double lower_partial_moment(const Eigen::Ref<const Vector>& y,
                            const Eigen::Ref<const Vector>& scores, double t) {
  if (y.size() != scores.size())
    throw UsageError("lower_partial_moment: length mismatch");
  if (y.size() == 0) throw UsageError("lower_partial_moment: empty input");
  KahanSum acc;
  for (Index i = 0; i < y.size(); ++i)
    if (scores[i] <= t) acc.add(y[i]);
  return acc.value() / static_cast<double>(y.size());
}

LpmCurve lpm_curve(const Eigen::Ref<const Vector>& y,
                   const Eigen::Ref<const Vector>& scores,
                   const Eigen::Ref<const Vector>& t_grid) {
  if (y.size() != scores.size()) throw UsageError("lpm_curve: length mismatch");
  if (y.size() == 0) throw UsageError("lpm_curve: empty input");
  Vector grid = t_grid.size() > 0 ? Vector(t_grid) : distinct_union(scores, Vector());
  for (Index i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw UsageError("lpm_curve: thresholds must be increasing");
  LpmCurve out;
  out.thresholds = grid;
  out.values = lpm_over_grid(y, scores, grid);
  return out;
}

double psi_mean(PowerParam p, const Eigen::Ref<const Vector>& scores) {
  if (scores.size() == 0) throw UsageError("psi_mean: empty input");
  KahanSum acc;
  for (Index i = 0; i < scores.size(); ++i) acc.add(psi(p, scores[i]));
  return acc.value() / static_cast<double>(scores.size());
}

double stop_loss(const Eigen::Ref<const Vector>& values, double t) {
  if (values.size() == 0) throw UsageError("stop_loss: empty input");
  KahanSum acc;
  for (Index i = 0; i < values.size(); ++i) acc.add(std::max(values[i] - t, 0.0));
  return acc.value() / static_cast<double>(values.size());
}

std::vector<double> default_xi_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(1.0 + 0.1 * i);
  return g;
}

DominanceReport check_dominance(const Eigen::Ref<const Vector>& y,
                                const Eigen::Ref<const Vector>& e,
                                const Eigen::Ref<const Vector>& scores1,
                                const Eigen::Ref<const Vector>& scores2,
                                const std::vector<double>& xi_grid,
                                const Eigen::Ref<const Vector>& t_grid) {
  const Index n = y.size();
  if (e.size() != n || scores1.size() != n || scores2.size() != n)
    throw UsageError("check_dominance: inputs must have equal length");
  if (xi_grid.empty()) throw UsageError("check_dominance: empty xi grid");
  for (double xi : xi_grid)
    if (!(xi >= 1.0)) throw UsageError("check_dominance: xi grid must lie in [1, inf)");

  DominanceReport rep;
  rep.xi_grid = xi_grid;
  rep.t_grid = t_grid.size() > 0 ? Vector(t_grid) : distinct_union(scores1, scores2);

  rep.cond1_holds = true;
  for (double xi : xi_grid) {
    const PowerParam p(xi);
    const double m1 = psi_mean(p, scores1);
    const double m2 = psi_mean(p, scores2);
    const double gap = m1 - m2;
    rep.psi_gap.push_back(gap);
    const double eps = 1e-12 * std::max({1.0, std::abs(m1), std::abs(m2)});
    if (!(gap >= -eps)) rep.cond1_holds = false;
  }

  const Vector lpm1 = lpm_over_grid(y, scores1, rep.t_grid);
  const Vector lpm2 = lpm_over_grid(y, scores2, rep.t_grid);
  rep.lpm_gap = lpm1 - lpm2;
  rep.cond2_holds = true;
  const double ybar = compensated_mean(y);
  const double lpm_eps = 1e-12 * std::max(1.0, std::abs(ybar));
  for (Index i = 0; i < rep.lpm_gap.size(); ++i)
    if (!(rep.lpm_gap[i] >= -lpm_eps)) rep.cond2_holds = false;

  for (double xi : xi_grid) {
    const PowerParam p(xi);
    rep.deviance_gap.push_back(mean_deviance(p, y, e, scores1) -
                               mean_deviance(p, y, e, scores2));
  }
  rep.sufficient = rep.cond1_holds && rep.cond2_holds;
  return rep;
}

DominanceReport check_dominance_single(const Eigen::Ref<const Vector>& y,
                                       const Eigen::Ref<const Vector>& e,
                                       const Eigen::Ref<const Vector>& scores1,
                                       const Eigen::Ref<const Vector>& scores2,
                                       double xi) {
  return check_dominance(y, e, scores1, scores2, {xi});
}

ConvexOrderReport convex_order_check(const Eigen::Ref<const Vector>& values,
                                     const Eigen::Ref<const Vector>& y,
                                     const Eigen::Ref<const Vector>& t_grid) {
  if (values.size() == 0 || y.size() == 0)
    throw UsageError("convex_order_check: empty input");
  Vector grid;
  if (t_grid.size() > 0) {
    grid = t_grid;
  } else {
    Vector u = distinct_union(values, y);
    if (u.size() > 0 && u[0] > 0.0) {
      grid.resize(u.size() + 1);
      grid[0] = 0.0;
      grid.tail(u.size()) = u;
    } else {
      grid = u;
    }
  }

  ConvexOrderReport rep;
  rep.mean_gap = std::abs(compensated_mean(values) - compensated_mean(y));
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < grid.size(); ++i) {
    const double v = stop_loss(values, grid[i]) - stop_loss(y, grid[i]);
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.t_at_max = grid[i];
    }
  }
  return rep;
}

} // namespace autocal
