#ifndef AUTOCAL_DATASET_HPP
#define AUTOCAL_DATASET_HPP

#include "autocal/errors.hpp"
#include "autocal/numerics.hpp"

#include <cmath>
#include <vector>

namespace autocal {

// Portfolio rows: response y >= 0, exposure e > 0, features X (n x p),
// optional true mean mu (oracle column from simulation, excluded from fitting).
struct Dataset {
  Vector y;
  Vector exposure;
  Matrix x;  // n rows, p columns; p may be 0
  Vector mu; // size 0 when absent

  Index rows() const { return y.size(); }
  Index features() const { return x.cols(); }
  bool has_mu() const { return mu.size() == rows() && rows() > 0; }

  void validate() const {
    const Index n = y.size();
    if (n == 0) throw UsageError("Dataset: empty");
    if (exposure.size() != n || (x.size() > 0 && x.rows() != n))
      throw UsageError("Dataset: column lengths differ");
    if (mu.size() != 0 && mu.size() != n)
      throw UsageError("Dataset: mu length differs");
    for (Index i = 0; i < n; ++i) {
      if (!(y[i] >= 0.0) || !std::isfinite(y[i]))
        throw std::domain_error("Dataset: y must be finite and >= 0");
      if (!(exposure[i] > 0.0) || !std::isfinite(exposure[i]))
        throw std::domain_error("Dataset: exposure must be finite and > 0");
    }
  }

  Dataset select(const std::vector<std::size_t>& idx) const {
    Dataset out;
    const Index m = static_cast<Index>(idx.size());
    out.y.resize(m);
    out.exposure.resize(m);
    out.x.resize(m, x.cols());
    if (has_mu()) out.mu.resize(m);
    for (Index i = 0; i < m; ++i) {
      const Index r = static_cast<Index>(idx[static_cast<std::size_t>(i)]);
      out.y[i] = y[r];
      out.exposure[i] = exposure[r];
      if (x.cols() > 0) out.x.row(i) = x.row(r);
      if (has_mu()) out.mu[i] = mu[r];
    }
    return out;
  }
};

inline Vector gather(const Eigen::Ref<const Vector>& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Index>(i)] = v[static_cast<Index>(idx[i])];
  return out;
}

} // namespace autocal

#endif
