#pragma once

#include <cmath>

#include "nlac/errors.hpp"
#include "nlac/gaussian_fit.hpp"
#include "nlac/units.hpp"

namespace nlac {

/// Heisenberg-type EPR criterion dx_-^2 dk_+^2 >= 1/4 (hbar = 1); a product
/// below the bound certifies position-momentum entanglement.
struct WitnessReport {
  double delta_x_minus_sq = 0.0;
  double delta_kappa_plus_sq = 0.0;
  double product = 0.0;
  double bound = kWitnessBound;
  bool violated = false;
  double product_se = 0.0;
};

inline WitnessReport witness_from_widths(double dx_minus_sq, double dk_plus_sq, double se_x_minus = 0.0,
                                         double se_k_plus = 0.0) {
  WitnessReport w;
  w.delta_x_minus_sq = dx_minus_sq;
  w.delta_kappa_plus_sq = dk_plus_sq;
  w.product = dx_minus_sq * dk_plus_sq;
  w.violated = w.product < w.bound;
  // se of a variance from se of its width: d(s^2) = 2 s ds.
  const double se_x2 = 2.0 * std::sqrt(dx_minus_sq) * se_x_minus;
  const double se_k2 = 2.0 * std::sqrt(dk_plus_sq) * se_k_plus;
  w.product_se = std::hypot(dk_plus_sq * se_x2, dx_minus_sq * se_k2);
  return w;
}

inline WitnessReport evaluate_witness(const GaussianFitReport &fit_position,
                                      const GaussianFitReport &fit_momentum) {
  if (fit_position.basis != Basis::Position || fit_momentum.basis != Basis::Momentum)
    throw BasisMismatch("witness needs one position-basis fit and one momentum-basis fit");
  return witness_from_widths(fit_position.delta_minus_sq, fit_momentum.delta_plus_sq,
                             fit_position.se_minus, fit_momentum.se_plus);
}

} // namespace nlac
