#include "autocal/pipeline.hpp"

#include "autocal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace autocal {

namespace {

Vector linspace(double lo, double hi, Index k) {
  if (k < 2 || !(hi > lo)) throw UsageError("linspace: need hi > lo and k >= 2");
  Vector v(k);
  for (Index i = 0; i < k; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  v[k - 1] = hi;
  return v;
}

Vector percent_grid() {
  Vector g(100);
  for (Index i = 0; i < 100; ++i) g[i] = static_cast<double>(i + 1) / 100.0;
  return g;
}

DistortKind parse_distort(const std::string& kind) {
  if (kind == "scale") return DistortKind::Scale;
  if (kind == "power") return DistortKind::Power;
  if (kind == "logshift" || kind == "log-shift") return DistortKind::LogShift;
  throw UsageError("unknown distortion '" + kind + "'");
}

ordered_json summary_stats(const Eigen::Ref<const Vector>& scores) {
  ordered_json j;
  j["mean"] = compensated_mean(scores);
  j["q10"] = quantile(scores, 0.10);
  j["q90"] = quantile(scores, 0.90);
  return j;
}

// rethrow with the failing stage in front so batch runs report where they died
template <class Fn>
auto run_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError& e) {
    throw UsageError("stage " + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + name + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("stage " + name + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw std::domain_error("stage " + name + ": " + e.what());
  }
}

} // namespace

void RunConfig::validate() const {
  if (!(fractions.train > 0.0 && fractions.smooth > 0.0 && fractions.validate > 0.0))
    throw UsageError("config: split fractions must be positive");
  if (fractions.train + fractions.smooth + fractions.validate > 1.0 + 1e-12)
    throw UsageError("config: split fractions must sum to at most 1");
  if (!data_path.empty() && !fs::exists(data_path))
    throw UsageError("config: input file does not exist: " + data_path);
  bandwidth.validate();
  if (models.empty()) throw UsageError("config: no models");
  std::set<std::string> names;
  for (const auto& m : models) {
    if (!names.insert(m.name).second)
      throw UsageError("config: duplicate model name '" + m.name + "'");
    if (m.kind != "glm" && m.kind != "boost")
      throw UsageError("config: unknown model kind '" + m.kind + "'");
  }
  for (double xi : xi_grid)
    if (!(xi >= 1.0)) throw UsageError("config: xi grid must lie in [1, inf)");
  if (curve_points < 3) throw UsageError("config: need at least 3 curve points");
}

std::vector<ModelSpec> default_models() {
  ModelSpec glm;
  glm.name = "glm";
  glm.basis = "identity";
  ModelSpec gam;
  gam.name = "gam";
  gam.basis = "spline";
  gam.degree = 3;
  gam.knots = 5;
  ModelSpec boost;
  boost.name = "boost";
  boost.kind = "boost";
  return {glm, gam, boost};
}

SplitIndices split_indices(Index n, const SplitFractions& fractions, std::uint64_t seed) {
  if (n < 3) throw UsageError("split_indices: need at least 3 rows");
  Rng rng(seed);
  const auto perm = rng.permutation(static_cast<std::size_t>(n));
  const auto n_train = static_cast<std::size_t>(
      guarded_floor_index(fractions.train * static_cast<double>(n)));
  const auto n_smooth = static_cast<std::size_t>(
      guarded_floor_index(fractions.smooth * static_cast<double>(n)));
  const auto n_valid = static_cast<std::size_t>(
      guarded_floor_index(fractions.validate * static_cast<double>(n)));
  if (n_train == 0 || n_smooth == 0 || n_valid == 0)
    throw UsageError("split_indices: a split is empty at this n");
  if (n_train + n_smooth + n_valid > static_cast<std::size_t>(n))
    throw UsageError("split_indices: fractions exceed the dataset");
  SplitIndices s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<long>(n_train));
  s.smooth.assign(perm.begin() + static_cast<long>(n_train),
                  perm.begin() + static_cast<long>(n_train + n_smooth));
  s.validate.assign(perm.begin() + static_cast<long>(n_train + n_smooth),
                    perm.begin() + static_cast<long>(n_train + n_smooth + n_valid));
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.smooth.begin(), s.smooth.end());
  std::sort(s.validate.begin(), s.validate.end());
  return s;
}

Vector fit_and_score(const ModelSpec& spec, const Dataset& data,
                     const std::vector<std::size_t>& train_idx) {
  if (data.features() == 0) throw UsageError("fit_and_score: dataset has no features");
  const Dataset train = data.select(train_idx);
  Vector scores;
  if (spec.kind == "glm") {
    BasisSpec basis;
    if (spec.basis == "identity") {
      basis = identity_basis(train.x.cols());
    } else if (spec.basis == "poly") {
      basis = polynomial_basis(train.x.cols(), spec.degree);
    } else if (spec.basis == "spline") {
      basis = spline_basis(train.x, spec.degree, spec.knots);
    } else {
      throw UsageError("unknown basis '" + spec.basis + "'");
    }
    const GlmFit fit = fit_glm(train, basis, PowerParam(spec.xi));
    scores = predict_glm(fit, data.x);
  } else {
    BoostOptions opts;
    opts.n_trees = spec.trees;
    opts.shrinkage = spec.shrinkage;
    opts.min_leaf = spec.min_leaf;
    const BoostFit fit = fit_boost(train.y, train.exposure, train.x, opts);
    scores = predict_boost(fit, data.x);
  }
  if (!spec.distort.empty())
    scores = distort(scores, parse_distort(spec.distort), spec.distort_param);
  return scores;
}

namespace {

struct FileWriter {
  std::string out_dir;
  std::vector<std::string>* manifest;

  void curve(const std::string& name, const std::string& ca, const std::string& cb,
             const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const {
    write_curve((fs::path(out_dir) / name).string(), ca, cb, a, b);
    manifest->push_back(name);
  }
};

ordered_json dominance_json(const DominanceReport& rep) {
  ordered_json j;
  j["cond1_holds"] = rep.cond1_holds;
  j["cond1_note"] = "grid-verified necessary condition";
  j["cond2_holds"] = rep.cond2_holds;
  j["sufficient"] = rep.sufficient;
  double min_dev_gap = rep.deviance_gap.empty() ? 0.0 : rep.deviance_gap[0];
  for (double g : rep.deviance_gap) min_dev_gap = std::min(min_dev_gap, g);
  j["min_deviance_gap"] = min_dev_gap;
  return j;
}

} // namespace

Report run_pipeline(const RunConfig& cfg) {
  RunConfig c = cfg;
  if (c.models.empty()) c.models = default_models();
  c.validate();

  const Dataset data = run_stage("data", [&] {
    Dataset d = c.data_path.empty() ? simulate(c.sim) : ingest(c.data_path);
    d.validate();
    return d;
  });
  const SplitIndices splits =
      run_stage("split", [&] { return split_indices(data.rows(), c.fractions, c.seed); });

  const Vector y_s = gather(data.y, splits.smooth);
  const Vector e_s = gather(data.exposure, splits.smooth);
  const Vector y_v = gather(data.y, splits.validate);
  const Vector e_v = gather(data.exposure, splits.validate);
  const Vector mu_v = data.has_mu() ? gather(data.mu, splits.validate) : Vector();

  Report report;
  FileWriter files{c.out_dir, &report.files};

  ordered_json& j = report.json;
  j["config"]["seed"] = c.seed;
  j["config"]["data"] = c.data_path.empty()
                            ? (c.sim.shape == SimShape::Univariate ? "simulated-univariate"
                                                                   : "simulated-bivariate")
                            : c.data_path;
  j["config"]["kernel"] = c.kernel.name();
  j["config"]["alpha0"] = c.bandwidth.alpha0;
  j["config"]["alpha1"] = c.bandwidth.alpha1;
  j["config"]["monotone"] = c.monotone;
  j["config"]["fractions"] = {c.fractions.train, c.fractions.smooth, c.fractions.validate};
  j["config"]["xi_grid"] = c.xi_grid;
  j["data"]["rows"] = data.rows();
  j["data"]["features"] = data.features();
  j["data"]["train_rows"] = splits.train.size();
  j["data"]["smooth_rows"] = splits.smooth.size();
  j["data"]["validate_rows"] = splits.validate.size();
  j["data"]["validate_mean_response"] = compensated_mean(y_v);
  j["models"] = ordered_json::array();

  const Vector cc_grid = percent_grid();

  for (const ModelSpec& spec : c.models) {
    const std::size_t files_before = report.files.size();
    const Vector scores =
        run_stage("fit[" + spec.name + "]", [&] { return fit_and_score(spec, data, splits.train); });
    const Vector s_s = gather(scores, splits.smooth);
    const Vector s_v = gather(scores, splits.validate);
    const Vector corrected = run_stage("calibrate[" + spec.name + "]", [&] {
      return autocalibrate(s_s, y_s, e_s, s_v, c.kernel, c.bandwidth, c.monotone);
    });

    ordered_json m;
    m["name"] = spec.name;
    m["kind"] = spec.kind;
    if (!spec.distort.empty()) {
      m["distort"] = spec.distort;
      m["distort_param"] = spec.distort_param;
    }
    m["scores"] = summary_stats(s_v);
    m["corrected"] = summary_stats(corrected);
    m["bias"]["raw"] = bias(y_v, e_v, s_v);
    m["bias"]["corrected"] = bias(y_v, e_v, corrected);
    m["poisson_loss"]["raw"] = empirical_poisson_loss(y_v, e_v, s_v);
    m["poisson_loss"]["corrected"] = empirical_poisson_loss(y_v, e_v, corrected);

    m["deviance"] = ordered_json::array();
    for (double xi : c.xi_grid) {
      ordered_json d;
      d["xi"] = xi;
      d["raw"] = mean_deviance(PowerParam(xi), y_v, e_v, s_v);
      d["corrected"] = mean_deviance(PowerParam(xi), y_v, e_v, corrected);
      m["deviance"].push_back(d);
    }

    // calibration curves with the run's kernel and bandwidth
    const Vector grid_raw = linspace(s_v.minCoeff(), s_v.maxCoeff(), c.curve_points);
    const CalibrationCurve cal_raw =
        calibration_curve(s_v, y_v, e_v, grid_raw, c.kernel, c.bandwidth);
    const Vector grid_cor = linspace(corrected.minCoeff(), corrected.maxCoeff(), c.curve_points);
    const CalibrationCurve cal_cor =
        calibration_curve(corrected, y_v, e_v, grid_cor, c.kernel, c.bandwidth);
    m["calibration"]["departure_raw"] = cal_raw.identity_departure;
    m["calibration"]["departure_corrected"] = cal_cor.identity_departure;

    const DominanceReport dom =
        check_dominance(y_v, e_v, s_v, corrected, default_xi_grid());
    m["dominance_raw_vs_corrected"] = dominance_json(dom);

    const Vector corrected_totals = corrected.array() * e_v.array();
    const ConvexOrderReport cvx = convex_order_check(corrected_totals, y_v);
    m["convex_order"]["mean_gap"] = cvx.mean_gap;
    m["convex_order"]["max_violation"] = cvx.max_violation;
    m["convex_order"]["t_at_max"] = cvx.t_at_max;

    m["spearman_raw_corrected"] = spearman(s_v, corrected);

    // curve files; everything lands in the manifest before report.json is written
    files.curve("calibration_raw_" + spec.name + ".csv", "score", "value",
                cal_raw.series.grid, cal_raw.series.values);
    files.curve("calibration_corrected_" + spec.name + ".csv", "score", "value",
                cal_cor.series.grid, cal_cor.series.values);

    const CurveSeries cc_raw = concentration_curve(y_v, s_v, cc_grid);
    const CurveSeries cc_cor = concentration_curve(y_v, corrected, cc_grid);
    files.curve("cc_raw_" + spec.name + ".csv", "alpha", "value", cc_raw.grid, cc_raw.values);
    files.curve("cc_corrected_" + spec.name + ".csv", "alpha", "value", cc_cor.grid,
                cc_cor.values);
    const CurveSeries ccd_raw = cc_density(cc_raw);
    const CurveSeries ccd_cor = cc_density(cc_cor);
    files.curve("cc_density_raw_" + spec.name + ".csv", "alpha", "value", ccd_raw.grid,
                ccd_raw.values);
    files.curve("cc_density_corrected_" + spec.name + ".csv", "alpha", "value", ccd_cor.grid,
                ccd_cor.values);
    if (data.has_mu()) {
      // theoretical variant built from the true means, reported side by side
      const CurveSeries cc_true_raw = concentration_curve(mu_v, s_v, cc_grid);
      const CurveSeries cc_true_cor = concentration_curve(mu_v, corrected, cc_grid);
      files.curve("cc_true_raw_" + spec.name + ".csv", "alpha", "value", cc_true_raw.grid,
                  cc_true_raw.values);
      files.curve("cc_true_corrected_" + spec.name + ".csv", "alpha", "value",
                  cc_true_cor.grid, cc_true_cor.values);
    }

    const Ecdf F = ecdf(s_v);
    files.curve("ecdf_raw_" + spec.name + ".csv", "score", "proportion", F.values,
                F.proportions);

    Vector xi_col(static_cast<Index>(dom.xi_grid.size()));
    Vector psi_col(static_cast<Index>(dom.xi_grid.size()));
    Vector dev_col(static_cast<Index>(dom.xi_grid.size()));
    for (std::size_t i = 0; i < dom.xi_grid.size(); ++i) {
      xi_col[static_cast<Index>(i)] = dom.xi_grid[i];
      psi_col[static_cast<Index>(i)] = dom.psi_gap[i];
      dev_col[static_cast<Index>(i)] = dom.deviance_gap[i];
    }
    files.curve("psi_gap_" + spec.name + ".csv", "xi", "gap", xi_col, psi_col);
    files.curve("deviance_gap_" + spec.name + ".csv", "xi", "gap", xi_col, dev_col);
    files.curve("lpm_gap_" + spec.name + ".csv", "t", "gap", dom.t_grid, dom.lpm_gap);

    std::vector<long> valid_ids(splits.validate.begin(), splits.validate.end());
    write_scores((fs::path(c.out_dir) / ("corrected_scores_" + spec.name + ".csv")).string(),
                 valid_ids, corrected);
    report.files.push_back("corrected_scores_" + spec.name + ".csv");

    m["files"] = ordered_json::array();
    for (std::size_t f = files_before; f < report.files.size(); ++f)
      m["files"].push_back(report.files[f]);
    j["models"].push_back(m);
  }

  j["files"] = report.files;
  atomic_write_text((fs::path(c.out_dir) / "report.json").string(), j.dump(2) + "\n");
  return report;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg, const std::vector<double>& alpha0_grid) {
  RunConfig c = cfg;
  if (c.models.empty()) c.models = default_models();
  c.validate();
  if (alpha0_grid.empty()) throw UsageError("run_sweep: empty alpha0 grid");

  const Dataset data = c.data_path.empty() ? simulate(c.sim) : ingest(c.data_path);
  data.validate();
  const SplitIndices splits = split_indices(data.rows(), c.fractions, c.seed);

  std::vector<std::pair<std::string, Vector>> model_scores;
  for (const ModelSpec& spec : c.models)
    model_scores.emplace_back(spec.name, fit_and_score(spec, data, splits.train));

  const auto rows = alpha_sweep(data.y, data.exposure, model_scores, splits.train,
                                splits.smooth, splits.validate, alpha0_grid, c.kernel,
                                c.bandwidth.alpha1);

  std::string out = "alpha0,bias,loss,model\n";
  for (const auto& r : rows)
    out += format_double(r.alpha0) + "," + format_double(r.bias) + "," +
           format_double(r.poisson_loss) + "," + r.model + "\n";
  atomic_write_text((fs::path(c.out_dir) / "sweep.csv").string(), out);
  return rows;
}

} // namespace autocal
