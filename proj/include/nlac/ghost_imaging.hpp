#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nlac/aberration.hpp"
#include "nlac/detection.hpp"
#include "nlac/errors.hpp"
#include "nlac/spdc.hpp"
#include "nlac/transform.hpp"
#include "nlac/units.hpp"

namespace nlac {

/// Opaque bars (t = 0) on a transparent background, in signal Fourier-plane
/// millimetres.
struct BarObject {
  double bar_width = 0.4;
  double period = 0.8;
  int n_bars = 3;
  double center = 0.0;

  void validate() const {
    if (!(bar_width > 0.0) || !(bar_width < period))
      throw InvalidParameter("bars need 0 < bar_width < period");
    if (n_bars < 1)
      throw InvalidParameter("need at least one bar");
  }

  double half_extent() const { return 0.5 * period * static_cast<double>(n_bars); }

  double transmission(double rho) const {
    for (int b = 0; b < n_bars; ++b) {
      const double c = center + (static_cast<double>(b) - 0.5 * (n_bars - 1)) * period;
      if (std::abs(rho - c) < 0.5 * bar_width)
        return 0.0;
    }
    return 1.0;
  }
};

/// Lens and wavelengths mapping kappa to Fourier-plane position.
struct FourierGeometry {
  double focal_length = 400.0; // mm
  double k_signal = kTwoPi / kDefaultPhotonWavelength;
  double k_idler = kTwoPi / kDefaultPhotonWavelength;

  double scale_signal() const { return focal_length / k_signal; }
  double scale_idler() const { return focal_length / k_idler; }
};

struct Visibility {
  double value = 0.0;
  bool low_modulation = false;
};

/// Michelson contrast (max - min)/(max + min). Traces whose peak-to-peak
/// modulation does not exceed `noise_floor` report 0 and are flagged.
inline Visibility visibility(std::span<const double> trace, double noise_floor = 0.0) {
  if (trace.empty())
    return {0.0, true};
  const auto [lo, hi] = std::minmax_element(trace.begin(), trace.end());
  const double mod = *hi - *lo;
  if (!(mod > noise_floor) || !(*hi + *lo > 0.0))
    return {0.0, true};
  return {mod / (*hi + *lo), false};
}

/// Dominant spatial period of a uniformly sampled trace: the peak of its
/// mean-removed amplitude spectrum, searched on a fine frequency grid above
/// the first non-zero DFT bin.
inline double period_estimate(std::span<const double> trace, std::span<const double> positions) {
  const std::size_t n = trace.size();
  if (n < 4 || positions.size() != n)
    throw EstimationFailed("period estimate needs at least four samples with positions");
  const double step = (positions.back() - positions.front()) / static_cast<double>(n - 1);
  if (!(step > 0.0))
    throw EstimationFailed("positions must increase");
  double mean = 0.0, scale = 0.0;
  for (double v : trace) {
    mean += v;
    scale += std::abs(v);
  }
  mean /= static_cast<double>(n);

  const double bin = 1.0 / (static_cast<double>(n) * step);
  const double f_max = 0.5 / step;
  const double df = bin / 64.0;
  double best = 0.0, best_f = 0.0;
  for (double f = bin; f <= f_max; f += df) {
    std::complex<double> acc{};
    for (std::size_t k = 0; k < n; ++k)
      acc += (trace[k] - mean) * std::polar(1.0, -kTwoPi * f * (positions[k] - positions.front()));
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_f = f;
    }
  }
  if (!(best > 1e-9 * scale) || best_f == 0.0)
    throw EstimationFailed("trace has no dominant spectral peak");
  const double period = 1.0 / best_f;
  if (positions.back() - positions.front() < 2.0 * period)
    throw EstimationFailed("scan covers fewer than two periods of the estimated modulation");
  return period;
}

/// Idler marginal (mass per idler cell) of coincidences with a bucket
/// detector behind a signal-arm mask: sum_s t_s P(s, i).
inline std::vector<double> bucket_idler_marginal(const JointDistribution &p,
                                                 std::span<const double> transmission_s) {
  if (transmission_s.size() != p.mass.rows())
    throw InvalidParameter("transmission mask does not match the signal axis");
  std::vector<double> out(p.mass.cols(), 0.0);
  for (std::size_t r = 0; r < p.mass.rows(); ++r) {
    const double t = transmission_s[r];
    if (t == 0.0)
      continue;
    const auto row = p.mass.row(r);
    for (std::size_t c = 0; c < row.size(); ++c)
      out[c] += t * row[c];
  }
  return out;
}

struct GhostImageResult {
  std::vector<double> positions; // idler Fourier-plane slit centres, mm
  std::vector<double> rates;
  double visibility = 0.0;
  bool low_modulation = false;
  double period_estimate = 0.0;
  bool period_valid = false;
  double transmitted_mass = 0.0;
  double magnification = 1.0; // idler image scale relative to the object
};

struct GhostScenario {
  CrystalPumpConfig crystal;
  PumpProfile pump;
  PhaseProfile theta_s = PhaseProfile::position({});
  PhaseProfile theta_i = PhaseProfile::position({});
  BarObject object;
  SlitScanConfig scan;
  FourierGeometry geometry;
  Grid1D grid_s;
  Grid1D grid_i;
};

/// Joint momentum distribution after position-domain (image-plane) phases
/// on both arms.
inline JointDistribution ghost_momentum_distribution(const GhostScenario &sc) {
  if (sc.theta_s.domain() != PhaseDomain::PositionDomain || sc.theta_i.domain() != PhaseDomain::PositionDomain)
    throw InvalidParameter("ghost-imaging phases must be position-domain profiles");
  auto state = synthesize_state(sc.crystal, sc.pump, sc.grid_s, sc.grid_i);
  if (!sc.theta_s.is_zero() || !sc.theta_i.is_zero()) {
    auto pos = to_position_basis(state);
    pos = apply_aberrations(pos, sc.theta_s, sc.theta_i);
    state = to_momentum_basis(pos);
  }
  return momentum_distribution(state);
}

/// Object transmission sampled on the signal momentum axis via rho = f kappa / k.
inline std::vector<double> object_mask(const BarObject &object, const Grid1D &axis_s,
                                       const FourierGeometry &geometry) {
  object.validate();
  const double scale = geometry.scale_signal();
  const double lo = axis_s.front() * scale, hi = axis_s.back() * scale;
  if (object.center - object.half_extent() < lo || object.center + object.half_extent() > hi)
    throw RangeError("bar object is clipped by the signal Fourier-plane grid");
  std::vector<double> t(axis_s.size());
  for (std::size_t j = 0; j < axis_s.size(); ++j)
    t[j] = object.transmission(axis_s.coordinate(j) * scale);
  return t;
}

/// Bucket-coincidence trace for a precomputed joint momentum distribution.
inline GhostImageResult run_ghost_scenario(const GhostScenario &sc, const JointDistribution &p) {
  sc.scan.validate();
  if (p.basis != Basis::Momentum)
    throw BasisMismatch("ghost imaging needs the joint momentum distribution");
  const auto mask = object_mask(sc.object, sc.grid_s, sc.geometry);
  const auto idler = bucket_idler_marginal(p, mask);

  GhostImageResult r;
  for (double v : idler)
    r.transmitted_mass += v;
  r.positions = scan_positions(sc.scan.range_i, sc.scan.step);
  const Grid1D axis_rho = sc.grid_i.scaled(sc.geometry.scale_idler(), AxisUnit::Millimeter);
  r.rates = slit_scan_1d(axis_rho, idler, r.positions, sc.scan);

  // kappa_i ~ -kappa_s: the image is mirrored and scaled by the ratio of
  // the Fourier-plane scales.
  r.magnification = sc.geometry.scale_idler() / sc.geometry.scale_signal();
  const double image_center = -sc.object.center * r.magnification;
  const double half = sc.object.half_extent() * r.magnification;
  std::vector<double> window, window_pos;
  for (std::size_t k = 0; k < r.positions.size(); ++k)
    if (std::abs(r.positions[k] - image_center) <= half + 1e-12) {
      window.push_back(r.rates[k]);
      window_pos.push_back(r.positions[k]);
    }
  if (window.empty())
    throw RangeError("idler scan does not cover the image of the object");
  const double floor = sc.scan.noise == NoiseModel::Poisson
                           ? 3.0 * std::sqrt(*std::max_element(window.begin(), window.end()) + 1.0)
                           : 1e-12 * sc.scan.total_counts;
  const auto vis = visibility(window, floor);
  r.visibility = vis.value;
  r.low_modulation = vis.low_modulation;
  try {
    // Outside the image the open background dominates the spectrum.
    r.period_estimate = period_estimate(window, window_pos);
    r.period_valid = true;
  } catch (const EstimationFailed &) {
    r.period_valid = false;
  }
  return r;
}

inline GhostImageResult run_ghost_scenario(const GhostScenario &sc) {
  return run_ghost_scenario(sc, ghost_momentum_distribution(sc));
}

} // namespace nlac
