#ifndef AUTOCAL_PIPELINE_HPP
#define AUTOCAL_PIPELINE_HPP

#include "autocal/calibration.hpp"
#include "autocal/csv.hpp"
#include "autocal/learners.hpp"
#include "autocal/ordering.hpp"
#include "autocal/simdata.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace autocal {

// One candidate predictor in a pipeline run. Distortion manufactures
// miscalibration on top of the fitted scores.
struct ModelSpec {
  std::string name = "glm";
  std::string kind = "glm"; // glm | boost
  std::string basis = "spline"; // glm: identity | poly | spline
  int degree = 3;
  int knots = 5;
  double xi = 1.0;
  int trees = 30;
  double shrinkage = 0.1;
  int min_leaf = 20;
  std::string distort; // "", scale, power, logshift
  double distort_param = 1.0;
};

struct SplitFractions {
  double train = 0.6;
  double smooth = 0.2;
  double validate = 0.2;
};

struct RunConfig {
  std::string data_path; // empty -> simulate
  SimConfig sim;
  std::uint64_t seed = 42; // split seed; also the simulation seed
  SplitFractions fractions;
  KernelSpec kernel;
  BandwidthSpec bandwidth{0.05, 0.0};
  bool monotone = false;
  std::vector<double> xi_grid = {1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<ModelSpec> models;
  std::string out_dir = "out";
  Index curve_points = 101;

  void validate() const;
};

std::vector<ModelSpec> default_models();

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> smooth;
  std::vector<std::size_t> validate;
};

// Disjoint index sets from a seeded permutation; each set sorted ascending.
SplitIndices split_indices(Index n, const SplitFractions& fractions, std::uint64_t seed);

struct Report {
  nlohmann::ordered_json json;
  std::vector<std::string> files; // relative to out_dir, written before report.json
};

// simulate/ingest -> split -> fit -> autocalibrate -> audit. Writes every
// curve CSV and then report.json into cfg.out_dir. Deterministic: identical
// config and seed produce byte-identical outputs.
Report run_pipeline(const RunConfig& cfg);

// the alpha sweep experiment on the same scaffolding; writes sweep.csv
std::vector<SweepRow> run_sweep(const RunConfig& cfg, const std::vector<double>& alpha0_grid);

// scores for every row of `data` from one model spec fitted on the train split
Vector fit_and_score(const ModelSpec& spec, const Dataset& data,
                     const std::vector<std::size_t>& train_idx);

} // namespace autocal

#endif
