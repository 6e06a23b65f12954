#include "autocal/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace autocal;

namespace {

SimShape parse_shape(const std::string& s) {
  if (s == "univariate") return SimShape::Univariate;
  if (s == "bivariate") return SimShape::Bivariate;
  throw UsageError("unknown shape '" + s + "' (univariate|bivariate)");
}

void report_ingested(const Dataset& d, const std::string& path) {
  std::cout << "ingested " << d.rows() << " rows, " << d.features() << " feature column"
            << (d.features() == 1 ? "" : "s") << (d.has_mu() ? ", mu present" : "")
            << " from " << path << "\n";
}

std::vector<long> iota_ids(Index n) {
  std::vector<long> ids(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = static_cast<long>(i);
  return ids;
}

Vector scores_aligned(const std::string& path, Index n) {
  const ScoreFile f = read_scores(path);
  if (f.scores.size() != n)
    throw DataError("score file " + path + " has " + std::to_string(f.scores.size()) +
                    " rows, expected " + std::to_string(n));
  for (Index i = 0; i < n; ++i)
    if (f.ids[static_cast<std::size_t>(i)] != static_cast<long>(i))
      throw DataError("score file " + path + " must carry row_id 0.." +
                      std::to_string(n - 1) + " in order");
  return f.scores;
}

ordered_json glm_fit_json(const GlmFit& fit) {
  ordered_json j;
  j["model"] = "glm";
  j["xi"] = fit.power.xi();
  j["basis"] = ordered_json::array();
  for (const auto& f : fit.basis.features) {
    ordered_json b;
    b["kind"] = f.kind == ExpansionKind::Identity
                    ? "identity"
                    : (f.kind == ExpansionKind::Polynomial ? "poly" : "spline");
    b["degree"] = f.degree;
    b["knots"] = f.knots;
    j["basis"].push_back(b);
  }
  j["tensor_product"] = fit.basis.tensor_product;
  j["coefficients"] = std::vector<double>(fit.coefficients.data(),
                                          fit.coefficients.data() + fit.coefficients.size());
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["final_deviance"] = fit.final_deviance;
  return j;
}

ordered_json boost_fit_json(const BoostFit& fit) {
  ordered_json j;
  j["model"] = "boost";
  j["initial_log_level"] = fit.initial_log_level;
  j["shrinkage"] = fit.shrinkage;
  j["n_trees"] = fit.n_trees;
  j["stumps"] = ordered_json::array();
  for (const auto& s : fit.stumps) {
    ordered_json t;
    t["feature"] = s.feature;
    t["threshold"] = s.threshold;
    t["left_step"] = s.left_step;
    t["right_step"] = s.right_step;
    j["stumps"].push_back(t);
  }
  return j;
}

struct CommonFlags {
  std::string data;
  std::string shape = "univariate";
  long n = 10000;
  std::uint64_t seed = 42;
  std::string out = "out";
  std::string kernel = "rectangular";
  double alpha0 = 0.05;
  double alpha1 = 0.0;
  bool monotone = false;
  std::vector<double> fractions = {0.6, 0.2, 0.2};
  std::string config;
  std::string models = "glm,gam,boost";
  double xi = 0.0; // 0 = keep default grid
};

ModelSpec model_from_json(const ordered_json& m) {
  ModelSpec spec;
  spec.name = m.value("name", spec.name);
  spec.kind = m.value("kind", spec.kind);
  spec.basis = m.value("basis", spec.basis);
  spec.degree = m.value("degree", spec.degree);
  spec.knots = m.value("knots", spec.knots);
  spec.xi = m.value("xi", spec.xi);
  spec.trees = m.value("trees", spec.trees);
  spec.shrinkage = m.value("shrinkage", spec.shrinkage);
  spec.min_leaf = m.value("min_leaf", spec.min_leaf);
  spec.distort = m.value("distort", spec.distort);
  spec.distort_param = m.value("distort_param", spec.distort_param);
  return spec;
}

std::vector<ModelSpec> models_by_name(const std::string& csv) {
  std::vector<ModelSpec> out;
  const auto all = default_models();
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    for (const auto& m : all)
      if (m.name == cur) {
        out.push_back(m);
        cur.clear();
        return;
      }
    throw UsageError("unknown model '" + cur + "' (glm|gam|boost)");
  };
  for (char c : csv) {
    if (c == ',') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

RunConfig config_from_flags(const CommonFlags& f, std::vector<double>* alpha0_grid);

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"autocalibration and Tweedie-dominance auditing for insurance predictors"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "write a simulated Poisson portfolio CSV");
  std::string sim_shape = "univariate", sim_out;
  long sim_n = 10000;
  std::uint64_t sim_seed = 42;
  sim_cmd->add_option("--shape", sim_shape, "univariate|bivariate");
  sim_cmd->add_option("--n", sim_n, "rows")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--out", sim_out, "output CSV path")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a predictor and write scores + description");
  std::string fit_data, fit_model = "glm", fit_basis = "spline", fit_out = "out", fit_eval;
  int fit_degree = 3, fit_knots = 5, fit_trees = 30, fit_min_leaf = 20;
  double fit_xi = 1.0, fit_shrinkage = 0.1;
  fit_cmd->add_option("--data", fit_data, "dataset CSV")->required();
  fit_cmd->add_option("--model", fit_model, "glm|boost");
  fit_cmd->add_option("--basis", fit_basis, "identity|poly|spline");
  fit_cmd->add_option("--degree", fit_degree, "basis degree (1..3)");
  fit_cmd->add_option("--knots", fit_knots, "spline interior knots");
  fit_cmd->add_option("--xi", fit_xi, "Tweedie power for the GLM loss");
  fit_cmd->add_option("--trees", fit_trees, "boosting rounds");
  fit_cmd->add_option("--shrinkage", fit_shrinkage, "boosting shrinkage in (0,1]");
  fit_cmd->add_option("--min-leaf", fit_min_leaf, "minimum rows per stump leaf");
  fit_cmd->add_option("--eval", fit_eval, "extra dataset CSV to score");
  fit_cmd->add_option("--out", fit_out, "output directory");

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "autocalibrate query scores on a smoothing set");
  std::string cal_smooth, cal_query, cal_kernel = "rectangular", cal_out = "out";
  double cal_a0 = 0.05, cal_a1 = 0.0;
  bool cal_monotone = false;
  cal_cmd->add_option("--smooth", cal_smooth, "smoothing CSV (y,exposure,score)")->required();
  cal_cmd->add_option("--query", cal_query, "query score CSV (row_id,score)")->required();
  cal_cmd->add_option("--kernel", cal_kernel, "rectangular|tricube|epanechnikov");
  cal_cmd->add_option("--alpha0", cal_a0, "nearest-neighbor fraction");
  cal_cmd->add_option("--alpha1", cal_a1, "constant bandwidth floor");
  cal_cmd->add_flag("--monotone", cal_monotone, "isotonic projection over the query grid");
  cal_cmd->add_option("--out", cal_out, "output directory");

  // dominance
  auto* dom_cmd = app.add_subcommand("dominance", "Tweedie-dominance audit of two predictors");
  std::string dom_outcomes, dom_s1, dom_s2, dom_out = "out";
  double dom_xi = 0.0;
  dom_cmd->add_option("--outcomes", dom_outcomes, "dataset CSV with y,exposure")->required();
  dom_cmd->add_option("--scores1", dom_s1, "score CSV of the reference predictor")->required();
  dom_cmd->add_option("--scores2", dom_s2, "score CSV of the challenger")->required();
  dom_cmd->add_option("--xi", dom_xi, "restrict the psi condition to a single power");
  dom_cmd->add_option("--out", dom_out, "output directory");

  // curves
  auto* cur_cmd = app.add_subcommand("curves", "diagnostic curves for one predictor");
  std::string cur_data, cur_scores, cur_kernel = "rectangular", cur_out = "out";
  double cur_a0 = 0.7, cur_a1 = 0.0;
  long cur_grid = 101;
  cur_cmd->add_option("--data", cur_data, "dataset CSV")->required();
  cur_cmd->add_option("--scores", cur_scores, "score CSV (row_id,score)")->required();
  cur_cmd->add_option("--kernel", cur_kernel, "calibration curve kernel");
  cur_cmd->add_option("--alpha0", cur_a0, "calibration curve smoothing fraction");
  cur_cmd->add_option("--alpha1", cur_a1, "constant bandwidth floor");
  cur_cmd->add_option("--grid", cur_grid, "calibration curve grid points");
  cur_cmd->add_option("--out", cur_out, "output directory");

  // sweep + report share flags
  CommonFlags sw, rp;
  double sw_a0_min = 0.025, sw_a0_max = 0.975, sw_a0_step = 0.025;
  auto add_common = [](CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--data", f.data, "dataset CSV (omit to simulate)");
    cmd->add_option("--shape", f.shape, "simulated portfolio shape");
    cmd->add_option("--n", f.n, "simulated rows")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "seed for simulation and splits");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--kernel", f.kernel, "rectangular|tricube|epanechnikov");
    cmd->add_option("--alpha0", f.alpha0, "autocalibration smoothing fraction");
    cmd->add_option("--alpha1", f.alpha1, "constant bandwidth floor");
    cmd->add_flag("--monotone", f.monotone, "isotonic projection of corrected scores");
    cmd->add_option("--fractions", f.fractions, "train smooth validate fractions")
        ->expected(3);
    cmd->add_option("--models", f.models, "comma list from glm,gam,boost");
    cmd->add_option("--xi", f.xi, "single Tweedie power for the deviance table");
    cmd->add_option("--config", f.config, "JSON config file");
  };
  auto* sweep_cmd = app.add_subcommand("sweep", "bias/loss across smoothing fractions");
  add_common(sweep_cmd, sw);
  sweep_cmd->add_option("--alpha0-min", sw_a0_min, "sweep start");
  sweep_cmd->add_option("--alpha0-max", sw_a0_max, "sweep end");
  sweep_cmd->add_option("--alpha0-step", sw_a0_step, "sweep step");
  auto* report_cmd = app.add_subcommand("report", "full pipeline: fit, calibrate, audit");
  add_common(report_cmd, rp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim_cmd) {
      SimConfig cfg;
      cfg.n = sim_n;
      cfg.seed = sim_seed;
      cfg.shape = parse_shape(sim_shape);
      write_dataset(sim_out, simulate(cfg));
      std::cout << "wrote " << sim_out << "\n";
      return 0;
    }

    if (*fit_cmd) {
      const Dataset data = ingest(fit_data);
      report_ingested(data, fit_data);
      ordered_json fj;
      Vector scores;
      Vector eval_scores;
      Dataset eval_data;
      const bool has_eval = !fit_eval.empty();
      if (has_eval) eval_data = ingest(fit_eval);
      if (fit_model == "glm") {
        BasisSpec basis;
        if (fit_basis == "identity") {
          basis = identity_basis(data.x.cols());
        } else if (fit_basis == "poly") {
          basis = polynomial_basis(data.x.cols(), fit_degree);
        } else if (fit_basis == "spline") {
          basis = spline_basis(data.x, fit_degree, fit_knots);
        } else {
          throw UsageError("unknown basis '" + fit_basis + "'");
        }
        const GlmFit glm = fit_glm(data, basis, PowerParam(fit_xi));
        scores = predict_glm(glm, data.x);
        if (has_eval) eval_scores = predict_glm(glm, eval_data.x);
        fj = glm_fit_json(glm);
      } else if (fit_model == "boost") {
        BoostOptions opts;
        opts.n_trees = fit_trees;
        opts.shrinkage = fit_shrinkage;
        opts.min_leaf = fit_min_leaf;
        const BoostFit bst = fit_boost(data.y, data.exposure, data.x, opts);
        scores = predict_boost(bst, data.x);
        if (has_eval) eval_scores = predict_boost(bst, eval_data.x);
        fj = boost_fit_json(bst);
      } else {
        throw UsageError("unknown model '" + fit_model + "' (glm|boost)");
      }
      atomic_write_text((fs::path(fit_out) / "fit.json").string(), fj.dump(2) + "\n");
      write_scores((fs::path(fit_out) / "scores.csv").string(), iota_ids(data.rows()), scores);
      if (has_eval)
        write_scores((fs::path(fit_out) / "eval_scores.csv").string(),
                     iota_ids(eval_data.rows()), eval_scores);
      std::cout << "wrote " << (fs::path(fit_out) / "fit.json").string() << " and scores\n";
      return 0;
    }

    if (*cal_cmd) {
      const SmoothingFile smooth = read_smoothing(cal_smooth);
      const ScoreFile query = read_scores(cal_query);
      const KernelSpec kernel = parse_kernel(cal_kernel);
      const BandwidthSpec bw{cal_a0, cal_a1};
      const Vector corrected = autocalibrate(smooth.scores, smooth.y, smooth.exposure,
                                             query.scores, kernel, bw, cal_monotone);
      write_scores((fs::path(cal_out) / "corrected.csv").string(), query.ids, corrected);

      const double lo = smooth.scores.minCoeff();
      const double hi = smooth.scores.maxCoeff();
      ordered_json sj;
      sj["global_rate"] = compensated_sum(smooth.y) / compensated_sum(smooth.exposure);
      sj["mean_corrected_score"] = compensated_mean(corrected);
      if (hi > lo) {
        Vector grid(101);
        for (Index i = 0; i < 101; ++i)
          grid[i] = lo + (hi - lo) * static_cast<double>(i) / 100.0;
        const CalibrationCurve curve =
            calibration_curve(smooth.scores, smooth.y, smooth.exposure, grid, kernel, bw);
        sj["identity_departure"] = curve.identity_departure;
      } else {
        sj["identity_departure"] = nullptr;
      }
      atomic_write_text((fs::path(cal_out) / "summary.json").string(), sj.dump(2) + "\n");
      std::cout << "wrote corrected scores for " << corrected.size() << " queries\n";
      return 0;
    }

    if (*dom_cmd) {
      const Dataset data = ingest(dom_outcomes);
      report_ingested(data, dom_outcomes);
      const Vector s1 = scores_aligned(dom_s1, data.rows());
      const Vector s2 = scores_aligned(dom_s2, data.rows());
      const DominanceReport rep =
          dom_xi > 0.0
              ? check_dominance_single(data.y, data.exposure, s1, s2, dom_xi)
              : check_dominance(data.y, data.exposure, s1, s2, default_xi_grid());

      Vector xi_col(static_cast<Index>(rep.xi_grid.size()));
      Vector psi_col(xi_col.size()), dev_col(xi_col.size());
      for (std::size_t i = 0; i < rep.xi_grid.size(); ++i) {
        xi_col[static_cast<Index>(i)] = rep.xi_grid[i];
        psi_col[static_cast<Index>(i)] = rep.psi_gap[i];
        dev_col[static_cast<Index>(i)] = rep.deviance_gap[i];
      }
      write_curve((fs::path(dom_out) / "psi_gap.csv").string(), "xi", "gap", xi_col, psi_col);
      write_curve((fs::path(dom_out) / "deviance_gap.csv").string(), "xi", "gap", xi_col,
                  dev_col);
      write_curve((fs::path(dom_out) / "lpm_gap.csv").string(), "t", "gap", rep.t_grid,
                  rep.lpm_gap);

      ordered_json dj;
      dj["xi_grid"] = rep.xi_grid;
      dj["psi_gap"] = rep.psi_gap;
      dj["deviance_gap"] = rep.deviance_gap;
      dj["cond1_holds"] = rep.cond1_holds;
      dj["cond1_note"] = "grid-verified necessary condition";
      dj["cond2_holds"] = rep.cond2_holds;
      dj["sufficient"] = rep.sufficient;
      atomic_write_text((fs::path(dom_out) / "dominance.json").string(), dj.dump(2) + "\n");
      std::cout << "dominance verdict: sufficient=" << (rep.sufficient ? "true" : "false")
                << "\n";
      return 0;
    }

    if (*cur_cmd) {
      const Dataset data = ingest(cur_data);
      report_ingested(data, cur_data);
      const Vector scores = scores_aligned(cur_scores, data.rows());
      Vector grid(100);
      for (Index i = 0; i < 100; ++i) grid[i] = static_cast<double>(i + 1) / 100.0;

      const CurveSeries cc = concentration_curve(data.y, scores, grid);
      write_curve((fs::path(cur_out) / "cc.csv").string(), "alpha", "value", cc.grid, cc.values);
      const CurveSeries ccd = cc_density(cc);
      write_curve((fs::path(cur_out) / "cc_density.csv").string(), "alpha", "value", ccd.grid,
                  ccd.values);
      if (data.has_mu()) {
        const CurveSeries cct = concentration_curve(data.mu, scores, grid);
        write_curve((fs::path(cur_out) / "cc_true.csv").string(), "alpha", "value", cct.grid,
                    cct.values);
        const CurveSeries cctd = cc_density(cct);
        write_curve((fs::path(cur_out) / "cc_true_density.csv").string(), "alpha", "value",
                    cctd.grid, cctd.values);
      }
      const Ecdf F = ecdf(scores);
      write_curve((fs::path(cur_out) / "ecdf.csv").string(), "score", "proportion", F.values,
                  F.proportions);
      const double lo = scores.minCoeff();
      const double hi = scores.maxCoeff();
      if (hi > lo && cur_grid >= 2) {
        Vector sgrid(cur_grid);
        for (Index i = 0; i < cur_grid; ++i)
          sgrid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cur_grid - 1);
        const CalibrationCurve cal =
            calibration_curve(scores, data.y, data.exposure, sgrid, parse_kernel(cur_kernel),
                              BandwidthSpec{cur_a0, cur_a1});
        write_curve((fs::path(cur_out) / "calibration.csv").string(), "score", "value",
                    cal.series.grid, cal.series.values);
      }
      std::cout << "wrote curves to " << cur_out << "\n";
      return 0;
    }

    if (*sweep_cmd) {
      std::vector<double> grid;
      RunConfig cfg = config_from_flags(sw, &grid);
      if (grid.empty())
        for (double a = sw_a0_min; a <= sw_a0_max + 1e-12; a += sw_a0_step) grid.push_back(a);
      const auto rows = run_sweep(cfg, grid);
      std::cout << "wrote " << (fs::path(cfg.out_dir) / "sweep.csv").string() << " ("
                << rows.size() << " rows)\n";
      return 0;
    }

    if (*report_cmd) {
      RunConfig cfg = config_from_flags(rp, nullptr);
      const Report rep = run_pipeline(cfg);
      std::cout << "wrote " << (fs::path(cfg.out_dir) / "report.json").string() << " and "
                << rep.files.size() << " curve files\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

namespace {

RunConfig config_from_flags(const CommonFlags& f, std::vector<double>* alpha0_grid) {
  RunConfig cfg;
  cfg.data_path = f.data;
  cfg.sim.n = f.n;
  cfg.sim.seed = f.seed;
  cfg.sim.shape = parse_shape(f.shape);
  cfg.seed = f.seed;
  cfg.fractions = {f.fractions.at(0), f.fractions.at(1), f.fractions.at(2)};
  cfg.kernel = parse_kernel(f.kernel);
  cfg.bandwidth = BandwidthSpec{f.alpha0, f.alpha1};
  cfg.monotone = f.monotone;
  cfg.out_dir = f.out;
  cfg.models = models_by_name(f.models);
  if (f.xi > 0.0) cfg.xi_grid = {f.xi};

  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw UsageError("cannot open config file: " + f.config);
    ordered_json cj;
    try {
      in >> cj;
    } catch (const std::exception& e) {
      throw UsageError(std::string("bad config JSON: ") + e.what());
    }
    if (cj.contains("data")) cfg.data_path = cj["data"].get<std::string>();
    if (cj.contains("simulate")) {
      const auto& s = cj["simulate"];
      if (s.contains("shape")) cfg.sim.shape = parse_shape(s["shape"].get<std::string>());
      if (s.contains("n")) cfg.sim.n = s["n"].get<Index>();
      if (s.contains("seed")) cfg.sim.seed = s["seed"].get<std::uint64_t>();
    }
    if (cj.contains("seed")) {
      cfg.seed = cj["seed"].get<std::uint64_t>();
      cfg.sim.seed = cfg.seed;
    }
    if (cj.contains("fractions")) {
      const auto fr = cj["fractions"].get<std::vector<double>>();
      if (fr.size() != 3) throw UsageError("config: fractions must have 3 entries");
      cfg.fractions = {fr[0], fr[1], fr[2]};
    }
    if (cj.contains("kernel")) cfg.kernel = parse_kernel(cj["kernel"].get<std::string>());
    if (cj.contains("alpha0")) cfg.bandwidth.alpha0 = cj["alpha0"].get<double>();
    if (cj.contains("alpha1")) cfg.bandwidth.alpha1 = cj["alpha1"].get<double>();
    if (cj.contains("monotone")) cfg.monotone = cj["monotone"].get<bool>();
    if (cj.contains("xi_grid")) cfg.xi_grid = cj["xi_grid"].get<std::vector<double>>();
    if (cj.contains("out")) cfg.out_dir = cj["out"].get<std::string>();
    if (cj.contains("models")) {
      cfg.models.clear();
      for (const auto& m : cj["models"]) cfg.models.push_back(model_from_json(m));
    }
    if (alpha0_grid && cj.contains("alpha0_grid"))
      *alpha0_grid = cj["alpha0_grid"].get<std::vector<double>>();
  }
  return cfg;
}

} // namespace
