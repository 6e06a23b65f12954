#ifndef AUTOCAL_CSV_HPP
#define AUTOCAL_CSV_HPP

#include "autocal/dataset.hpp"

#include <string>
#include <vector>

namespace autocal {

// 17 significant digits; round-trips doubles exactly
std::string format_double(double v);

// temp file + rename in the target directory; creates parent directories
void atomic_write_text(const std::string& path, const std::string& content);

// Dataset CSV: header with columns y, exposure, optional x1..xp, optional mu.
// Errors carry 1-based data row numbers.
Dataset ingest(const std::string& path);

void write_dataset(const std::string& path, const Dataset& data);

// score CSV: header row_id,score
struct ScoreFile {
  std::vector<long> ids;
  Vector scores;
};

ScoreFile read_scores(const std::string& path);
void write_scores(const std::string& path, const std::vector<long>& ids,
                  const Eigen::Ref<const Vector>& scores);

// two-column numeric CSV, e.g. (alpha,value) curves
void write_curve(const std::string& path, const std::string& col_a, const std::string& col_b,
                 const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// smoothing-set CSV for the calibrate subcommand: header y,exposure,score
struct SmoothingFile {
  Vector y;
  Vector exposure;
  Vector scores;
};

SmoothingFile read_smoothing(const std::string& path);
void write_smoothing(const std::string& path, const Eigen::Ref<const Vector>& y,
                     const Eigen::Ref<const Vector>& exposure,
                     const Eigen::Ref<const Vector>& scores);

} // namespace autocal

#endif
