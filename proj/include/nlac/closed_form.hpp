#pragma once

#include "nlac/spdc.hpp"

namespace nlac {

/// Anti-diagonal (x_+ = 0) position variance for a Gaussian pump of width
/// delta_kappa_p and Gaussian phase matching, under the cancellation
/// condition phi_s''(0) = -phi_i''(0) = beta:
///   ([ell alpha + k_p beta^2 dk^2]^2 + ell^2) / (2 k_p ell alpha + 2 k_p^2 beta^2 dk^2).
inline double predicted_delta_x_minus_sq(double beta, const CrystalPumpConfig &cfg) {
  cfg.validate();
  const double spread = cfg.k_p * beta * beta * cfg.delta_kappa_p * cfg.delta_kappa_p;
  const double a = cfg.ell * cfg.alpha + spread;
  return (a * a + cfg.ell * cfg.ell) / (2.0 * cfg.k_p * a);
}

/// Width without aberrations, ell (alpha^2 + 1) / (2 k_p alpha).
inline double unaberrated_delta_x_minus_sq(const CrystalPumpConfig &cfg) {
  cfg.validate();
  return cfg.ell * (cfg.alpha * cfg.alpha + 1.0) / (2.0 * cfg.k_p * cfg.alpha);
}

/// Coefficient of beta^2 dk^2 in the second-order expansion of
/// predicted_delta_x_minus_sq about delta_kappa_p = 0: (alpha^2 - 1)/(2 alpha^2).
/// Negative for alpha < 1: the anti-diagonal section narrows at first.
inline double expansion_coefficient(const CrystalPumpConfig &cfg) {
  return (cfg.alpha * cfg.alpha - 1.0) / (2.0 * cfg.alpha * cfg.alpha);
}

/// Second-order expansion of predicted_delta_x_minus_sq in delta_kappa_p.
inline double predicted_delta_x_minus_sq_expansion(double beta, const CrystalPumpConfig &cfg) {
  const double dk2 = cfg.delta_kappa_p * cfg.delta_kappa_p;
  return unaberrated_delta_x_minus_sq(cfg) + expansion_coefficient(cfg) * beta * beta * dk2;
}

/// Variance of kappa_- = (kappa_s - kappa_i)/sqrt2 set by the Gaussian
/// phase-matching function, k_p / (2 alpha ell).
inline double delta_kappa_minus_sq(const CrystalPumpConfig &cfg) {
  cfg.validate();
  return cfg.k_p / (2.0 * cfg.alpha * cfg.ell);
}

/// Variance of the unscaled difference kappa_s - kappa_i, k_p / (alpha ell).
inline double relative_momentum_variance(const CrystalPumpConfig &cfg) {
  return 2.0 * delta_kappa_minus_sq(cfg);
}

/// Variance of kappa_+ = (kappa_s + kappa_i)/sqrt2 set by the pump, dk^2 / 2.
inline double delta_kappa_plus_sq(const CrystalPumpConfig &cfg) {
  cfg.validate();
  return 0.5 * cfg.delta_kappa_p * cfg.delta_kappa_p;
}

/// Marginal variance of x_- under the cancellation condition, i.e. the
/// covariance-form width the witness uses: unaberrated width plus
/// beta^2 Var(kappa_+).
inline double predicted_marginal_delta_x_minus_sq(double beta, const CrystalPumpConfig &cfg) {
  return unaberrated_delta_x_minus_sq(cfg) + beta * beta * delta_kappa_plus_sq(cfg);
}

} // namespace nlac
