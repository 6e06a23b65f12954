#include "autocal/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace autocal {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, long row, const std::string& col) {
  const char* s = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || cell.empty())
    throw DataError("non-numeric value '" + cell + "' in column " + col + " on row " +
                    std::to_string(row));
  if (!std::isfinite(v))
    throw DataError("non-finite value in column " + col + " on row " + std::to_string(row));
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

} // namespace

Dataset ingest(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError("empty file: " + path);
  const auto header = split_line(lines[0]);

  long y_col = -1, e_col = -1, mu_col = -1;
  std::vector<long> x_cols; // x_cols[k] = column of x{k+1}
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "y") {
      y_col = static_cast<long>(c);
    } else if (name == "exposure") {
      e_col = static_cast<long>(c);
    } else if (name == "mu") {
      mu_col = static_cast<long>(c);
    } else if (name.size() >= 2 && name[0] == 'x' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const long k = std::strtol(name.c_str() + 1, nullptr, 10);
      if (k < 1) throw DataError("bad feature column name '" + name + "'");
      if (static_cast<std::size_t>(k) > x_cols.size()) x_cols.resize(static_cast<std::size_t>(k), -1);
      x_cols[static_cast<std::size_t>(k - 1)] = static_cast<long>(c);
    } else {
      throw DataError("unknown column '" + name + "' in " + path);
    }
  }
  if (y_col < 0) throw DataError("missing required column y in " + path);
  if (e_col < 0) throw DataError("missing required column exposure in " + path);
  for (std::size_t k = 0; k < x_cols.size(); ++k)
    if (x_cols[k] < 0)
      throw DataError("feature columns must be contiguous: missing x" + std::to_string(k + 1));

  const Index n = static_cast<Index>(lines.size()) - 1;
  if (n <= 0) throw DataError("no data rows in " + path);
  const Index p = static_cast<Index>(x_cols.size());

  Dataset d;
  d.y.resize(n);
  d.exposure.resize(n);
  d.x.resize(n, p);
  if (mu_col >= 0) d.mu.resize(n);

  for (Index i = 0; i < n; ++i) {
    const long row = static_cast<long>(i) + 1;
    const auto cells = split_line(lines[static_cast<std::size_t>(i) + 1]);
    if (cells.size() != header.size())
      throw DataError("wrong field count on row " + std::to_string(row));
    d.y[i] = parse_cell(cells[static_cast<std::size_t>(y_col)], row, "y");
    if (d.y[i] < 0.0) throw DataError("negative y on row " + std::to_string(row));
    d.exposure[i] = parse_cell(cells[static_cast<std::size_t>(e_col)], row, "exposure");
    if (!(d.exposure[i] > 0.0))
      throw DataError("nonpositive exposure on row " + std::to_string(row));
    for (Index j = 0; j < p; ++j)
      d.x(i, j) = parse_cell(cells[static_cast<std::size_t>(x_cols[static_cast<std::size_t>(j)])],
                             row, "x" + std::to_string(j + 1));
    if (mu_col >= 0) {
      d.mu[i] = parse_cell(cells[static_cast<std::size_t>(mu_col)], row, "mu");
      if (!(d.mu[i] > 0.0)) throw DataError("nonpositive mu on row " + std::to_string(row));
    }
  }
  return d;
}

void write_dataset(const std::string& path, const Dataset& data) {
  data.validate();
  std::ostringstream out;
  out << "y,exposure";
  for (Index j = 0; j < data.features(); ++j) out << ",x" << (j + 1);
  if (data.has_mu()) out << ",mu";
  out << "\n";
  for (Index i = 0; i < data.rows(); ++i) {
    out << format_double(data.y[i]) << ',' << format_double(data.exposure[i]);
    for (Index j = 0; j < data.features(); ++j) out << ',' << format_double(data.x(i, j));
    if (data.has_mu()) out << ',' << format_double(data.mu[i]);
    out << "\n";
  }
  atomic_write_text(path, out.str());
}

ScoreFile read_scores(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError("empty file: " + path);
  const auto header = split_line(lines[0]);
  if (header.size() != 2 || header[0] != "row_id" || header[1] != "score")
    throw DataError("expected header row_id,score in " + path);
  ScoreFile out;
  const Index n = static_cast<Index>(lines.size()) - 1;
  if (n <= 0) throw DataError("no data rows in " + path);
  out.scores.resize(n);
  out.ids.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const long row = static_cast<long>(i) + 1;
    const auto cells = split_line(lines[static_cast<std::size_t>(i) + 1]);
    if (cells.size() != 2) throw DataError("wrong field count on row " + std::to_string(row));
    const double id = parse_cell(cells[0], row, "row_id");
    if (id < 0 || id != std::floor(id))
      throw DataError("bad row_id on row " + std::to_string(row));
    out.ids.push_back(static_cast<long>(id));
    out.scores[i] = parse_cell(cells[1], row, "score");
    if (!(out.scores[i] > 0.0))
      throw DataError("nonpositive score on row " + std::to_string(row));
  }
  return out;
}

void write_scores(const std::string& path, const std::vector<long>& ids,
                  const Eigen::Ref<const Vector>& scores) {
  if (static_cast<Index>(ids.size()) != scores.size())
    throw UsageError("write_scores: length mismatch");
  std::ostringstream out;
  out << "row_id,score\n";
  for (Index i = 0; i < scores.size(); ++i)
    out << ids[static_cast<std::size_t>(i)] << ',' << format_double(scores[i]) << "\n";
  atomic_write_text(path, out.str());
}

void write_curve(const std::string& path, const std::string& col_a, const std::string& col_b,
                 const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) throw UsageError("write_curve: length mismatch");
  std::ostringstream out;
  out << col_a << ',' << col_b << "\n";
  for (Index i = 0; i < a.size(); ++i)
    out << format_double(a[i]) << ',' << format_double(b[i]) << "\n";
  atomic_write_text(path, out.str());
}

SmoothingFile read_smoothing(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError("empty file: " + path);
  const auto header = split_line(lines[0]);
  if (header.size() != 3 || header[0] != "y" || header[1] != "exposure" || header[2] != "score")
    throw DataError("expected header y,exposure,score in " + path);
  const Index n = static_cast<Index>(lines.size()) - 1;
  if (n <= 0) throw DataError("no data rows in " + path);
  SmoothingFile out;
  out.y.resize(n);
  out.exposure.resize(n);
  out.scores.resize(n);
  for (Index i = 0; i < n; ++i) {
    const long row = static_cast<long>(i) + 1;
    const auto cells = split_line(lines[static_cast<std::size_t>(i) + 1]);
    if (cells.size() != 3) throw DataError("wrong field count on row " + std::to_string(row));
    out.y[i] = parse_cell(cells[0], row, "y");
    if (out.y[i] < 0.0) throw DataError("negative y on row " + std::to_string(row));
    out.exposure[i] = parse_cell(cells[1], row, "exposure");
    if (!(out.exposure[i] > 0.0))
      throw DataError("nonpositive exposure on row " + std::to_string(row));
    out.scores[i] = parse_cell(cells[2], row, "score");
    if (!std::isfinite(out.scores[i]))
      throw DataError("non-finite score on row " + std::to_string(row));
  }
  return out;
}

void write_smoothing(const std::string& path, const Eigen::Ref<const Vector>& y,
                     const Eigen::Ref<const Vector>& exposure,
                     const Eigen::Ref<const Vector>& scores) {
  if (y.size() != exposure.size() || y.size() != scores.size())
    throw UsageError("write_smoothing: length mismatch");
  std::ostringstream out;
  out << "y,exposure,score\n";
  for (Index i = 0; i < y.size(); ++i)
    out << format_double(y[i]) << ',' << format_double(exposure[i]) << ','
        << format_double(scores[i]) << "\n";
  atomic_write_text(path, out.str());
}

} // namespace autocal
