#ifndef AUTOCAL_TWEEDIE_HPP
#define AUTOCAL_TWEEDIE_HPP

#include "autocal/errors.hpp"
#include "autocal/numerics.hpp"

#include <cmath>

namespace autocal {

// Tweedie power parameter xi >= 1. Drives the variance function V(mu) = mu^xi,
// the psi transform and the deviance losses. Dispersion is fixed to 1
// throughout: deviance is only ever used for model comparison.
class PowerParam {
public:
  explicit PowerParam(double xi) : xi_(xi) {
    if (!std::isfinite(xi) || xi < 1.0)
      throw std::domain_error("PowerParam: xi must be finite and >= 1");
  }
  double xi() const { return xi_; }

private:
  double xi_;
};

enum class TweedieClass {
  Poisson,              // xi = 1
  CompoundPoissonGamma, // 1 < xi < 2
  Gamma,                // xi = 2
  ContinuousPositive,   // 2 < xi < 3 or xi > 3
  InverseGaussian       // xi = 3
};

inline TweedieClass classify(PowerParam p) {
  const double xi = p.xi();
  if (xi == 1.0) return TweedieClass::Poisson;
  if (xi < 2.0) return TweedieClass::CompoundPoissonGamma;
  if (xi == 2.0) return TweedieClass::Gamma;
  if (xi == 3.0) return TweedieClass::InverseGaussian;
  return TweedieClass::ContinuousPositive;
}

// V(mu) = mu^xi, mu > 0.
inline double variance_function(PowerParam p, double mu) {
  if (!(mu > 0.0)) throw std::domain_error("variance_function: mu must be > 0");
  return std::pow(mu, p.xi());
}

// psi_xi(pi) = ln pi at xi = 2, otherwise pi^(2-xi)/(2-xi). Increasing in pi.
// Near xi = 2 the additive constant 1/(2-xi) diverges, so comparisons are
// always formed as differences between two predictors.
inline double psi(PowerParam p, double pi) {
  if (!(pi > 0.0)) throw std::domain_error("psi: pi must be > 0");
  const double xi = p.xi();
  if (xi == 2.0) return std::log(pi);
  return std::pow(pi, 2.0 - xi) / (2.0 - xi);
}

// Per-observation Tweedie deviance loss with saturated-model constants
// dropped:
//   xi = 1 : pi - y ln pi
//   xi = 2 : ln pi + y / pi
//   else   : pi^(2-xi)/(2-xi) - y pi^(1-xi)/(1-xi)
inline double unit_loss(PowerParam p, double y, double pi) {
  if (!(pi > 0.0)) throw std::domain_error("unit_loss: pi must be > 0");
  if (!(y >= 0.0)) throw std::domain_error("unit_loss: y must be >= 0");
  const double xi = p.xi();
  if (xi == 1.0) return pi - y * std::log(pi);
  if (xi == 2.0) return std::log(pi) + y / pi;
  return std::pow(pi, 2.0 - xi) / (2.0 - xi) - y * std::pow(pi, 1.0 - xi) / (1.0 - xi);
}

// d unit_loss / d pi = pi^(-xi) (pi - y), shared by all branches.
inline double unit_loss_grad(PowerParam p, double y, double pi) {
  if (!(pi > 0.0)) throw std::domain_error("unit_loss_grad: pi must be > 0");
  return std::pow(pi, -p.xi()) * (pi - y);
}

// Exposure-weighted mean deviance (1/n) sum unit_loss(y_i, e_i * score_i):
// observed totals against expected totals m_i = e_i * pi_i. Reduces to the
// plain per-row loss under unit exposures.
double mean_deviance(PowerParam p, const Eigen::Ref<const Vector>& y,
                     const Eigen::Ref<const Vector>& e,
                     const Eigen::Ref<const Vector>& scores);

} // namespace autocal

#endif
