#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "nlac/errors.hpp"
#include "nlac/units.hpp"

namespace nlac {

enum class PhaseMatching { ExactSinc, GaussianApprox };

/// Gaussian fit constant for the phase-matching sinc.
inline constexpr double kSincGaussianAlpha = 0.455;
inline constexpr double kDefaultPumpWavelength = 405e-6; // mm
inline constexpr double kDefaultPhotonWavelength = 810e-6; // mm
inline constexpr double kDefaultCrystalLength = 2.0;        // mm
inline constexpr double kDefaultPumpDiameter = 1.0;         // mm, 1/e^2 intensity

/// Angular std-dev of |E(kappa_p)|^2 for a collimated Gaussian pump with the
/// given 1/e^2 intensity diameter D: field exp(-x^2/w^2), w = D/2, whose
/// angular spectrum intensity is exp(-kappa^2 w^2 / 2), i.e. std-dev 1/w.
inline double pump_angular_width_from_diameter(double diameter_mm) {
  if (!(diameter_mm > 0.0))
    throw InvalidParameter("pump diameter must be positive");
  return 2.0 / diameter_mm;
}

struct CrystalPumpConfig {
  double ell = kDefaultCrystalLength;
  double k_p = kTwoPi / kDefaultPumpWavelength;
  double alpha = kSincGaussianAlpha;
  /// std-dev of |E|^2 in kappa_s + kappa_i; 0 encodes a plane-wave pump.
  double delta_kappa_p = pump_angular_width_from_diameter(kDefaultPumpDiameter);
  PhaseMatching phase_matching = PhaseMatching::GaussianApprox;

  void validate() const {
    if (!(ell > 0.0) || !(k_p > 0.0) || !(alpha > 0.0) || !(delta_kappa_p >= 0.0) ||
        !std::isfinite(ell + k_p + alpha + delta_kappa_p))
      throw InvalidParameter("crystal/pump config requires ell > 0, k_p > 0, alpha > 0, "
                             "delta_kappa_p >= 0");
  }
};

/// Angular profile E(kappa_s + kappa_i) of the pump.
struct PumpProfile {
  enum class Kind { PlaneWave, Gaussian };
  Kind kind = Kind::Gaussian;
  double delta_kappa_p = 0.0;

  static PumpProfile plane_wave() { return {Kind::PlaneWave, 0.0}; }
  static PumpProfile gaussian(double delta_kappa_p) {
    if (!(delta_kappa_p > 0.0))
      throw InvalidParameter("Gaussian pump needs a positive angular width");
    return {Kind::Gaussian, delta_kappa_p};
  }
  static PumpProfile from_config(const CrystalPumpConfig &cfg) {
    return cfg.delta_kappa_p > 0.0 ? gaussian(cfg.delta_kappa_p) : plane_wave();
  }

  /// Unnormalized amplitude at u = kappa_s + kappa_i. The plane wave is the
  /// narrowest ridge a grid of spacing `cell` can hold: one cell wide.
  double amplitude(double u, double cell) const {
    if (kind == Kind::PlaneWave)
      return std::abs(u) < 0.5 * cell ? 1.0 : 0.0;
    return std::exp(-u * u / (4.0 * delta_kappa_p * delta_kappa_p));
  }
};

/// Longitudinal mismatch (kappa_s - kappa_i)^2 / (2 k_p) for degenerate,
/// paraxial SPDC without walk-off.
inline double delta_k_z(double kappa_s, double kappa_i, const CrystalPumpConfig &cfg) {
  const double d = kappa_s - kappa_i;
  return d * d / (2.0 * cfg.k_p);
}

/// Phase-matching kernel chi(dk_z) up to a constant. Both modes share the
/// propagation phase exp(-i ell dk_z / 2); the Gaussian mode replaces
/// sinc(ell dk_z / 2) by exp(-alpha ell dk_z / 2).
inline std::complex<double> phase_matching_amplitude(double dkz, const CrystalPumpConfig &cfg) {
  const double half = 0.5 * cfg.ell * dkz;
  if (cfg.phase_matching == PhaseMatching::GaussianApprox)
    return std::exp(std::complex<double>(-cfg.alpha * half, -half));
  const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
  return std::polar(sinc, -half);
}

/// Full width at half maximum of |chi|^2 as a function of the relative
/// momentum kappa_s - kappa_i, in mm^-1.
inline double phase_matching_fwhm(const CrystalPumpConfig &cfg) {
  cfg.validate();
  const auto intensity = [&](double x) {
    return std::norm(phase_matching_amplitude(x / cfg.ell, cfg));
  };
  // In x = ell dk_z, |chi|^2 is 1 at 0 and falls monotonically to its first
  // zero (sinc) or forever (Gaussian), so bracket then bisect.
  double lo = 0.0, hi = 1.0;
  while (intensity(hi) > 0.5)
    hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (intensity(mid) > 0.5 ? lo : hi) = mid;
  }
  const double x_half = 0.5 * (lo + hi);
  // dk_z = q^2 / (2 k_p)
  return 2.0 * std::sqrt(2.0 * cfg.k_p * x_half / cfg.ell);
}

/// Joint momentum amplitude E(kappa_s + kappa_i) chi(dk_z), normalized, with
/// unit transfer functions in both arms. Both grids must be centred at 0
/// with equal spacing so that the anti-diagonal lies on grid points.
inline BiphotonGrid synthesize_state(const CrystalPumpConfig &cfg, const PumpProfile &pump,
                                     const Grid1D &grid_s, const Grid1D &grid_i) {
  cfg.validate();
  if (grid_s.center() != 0.0 || grid_i.center() != 0.0)
    throw InvalidParameter("momentum grids must be centred at kappa = 0");
  if (grid_s.unit() != AxisUnit::InverseMillimeter || grid_i.unit() != AxisUnit::InverseMillimeter)
    throw InvalidParameter("momentum grids must be in mm^-1");
  if (pump.kind == PumpProfile::Kind::PlaneWave && grid_s.spacing() != grid_i.spacing())
    throw InvalidParameter("plane-wave ridge needs equal signal and idler spacing");

  BiphotonGrid state(grid_s, grid_i, Basis::Momentum);
  auto &amp = state.amplitude();
  const double cell = grid_s.spacing();
  parallel_for(grid_s.size(), [&](std::size_t r) {
    const double ks = grid_s.coordinate(r);
    auto row = amp.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double ki = grid_i.coordinate(c);
      const double e = pump.amplitude(ks + ki, cell);
      row[c] = e == 0.0 ? std::complex<double>{} : e * phase_matching_amplitude(delta_k_z(ks, ki, cfg), cfg);
    }
  });
  state.normalize();
  check_boundary_energy(state, "synthesize_state");
  return state;
}

/// |psi|^2 as probability mass per cell.
inline JointDistribution momentum_distribution(const BiphotonGrid &state) {
  if (state.basis() != Basis::Momentum)
    throw BasisMismatch("momentum_distribution needs a momentum-basis state");
  return {state.axis_s(), state.axis_i(), Basis::Momentum, probability_mass(state)};
}

} // namespace nlac
