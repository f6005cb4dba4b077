#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nlac/errors.hpp"
#include "nlac/matrix.hpp"
#include "nlac/units.hpp"

namespace nlac {

enum class NoiseModel { Noiseless, Poisson };

struct ScanRange {
  double lo = -2.0;
  double hi = 2.0;
};

/// Slit-scan settings. Coordinates are detector-plane millimetres.
struct SlitScanConfig {
  double slit_width = 0.1;
  double step = 0.1;
  ScanRange range_s;
  ScanRange range_i;
  double total_counts = 1e5;
  std::uint64_t seed = 1;
  NoiseModel noise = NoiseModel::Poisson;

  void validate() const {
    if (!(slit_width > 0.0) || !(step > 0.0))
      throw InvalidParameter("slit width and step must be positive");
    if (!(total_counts >= 0.0) || !std::isfinite(total_counts))
      throw InvalidParameter("total counts must be finite and non-negative");
    if (range_s.hi < range_s.lo || range_i.hi < range_i.lo)
      throw InvalidParameter("scan range must satisfy lo <= hi");
  }
};

struct CoincidenceHistogram {
  std::vector<double> positions_s;
  std::vector<double> positions_i;
  Matrix<double> counts; // rows: signal slit, cols: idler slit
  Basis basis = Basis::Position;
  /// Detector millimetres per native unit (1 for position scans, f/k when
  /// the slits sit in a Fourier plane).
  double coordinate_scale = 1.0;
  SlitScanConfig config;
};

/// Slit centres lo, lo + step, ... up to hi (inclusive within rounding).
inline std::vector<double> scan_positions(const ScanRange &range, double step) {
  std::vector<double> out;
  const double span = range.hi - range.lo;
  const auto count = static_cast<std::size_t>(std::floor(span / step + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(range.lo + static_cast<double>(k) * step);
  return out;
}

/// Fractional overlap of each grid cell with the slit window
/// [center - width/2, center + width/2].
struct SlitWeights {
  std::size_t first = 0;
  std::vector<double> weights;
};

inline SlitWeights slit_weights(const Grid1D &axis, double center, double width) {
  const double h = axis.spacing();
  const double lo = center - 0.5 * width, hi = center + 0.5 * width;
  const double grid_lo = axis.front() - 0.5 * h, grid_hi = axis.back() + 0.5 * h;
  const double slack = 1e-9 * h;
  if (lo < grid_lo - slack || hi > grid_hi + slack)
    throw RangeError("slit window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     "] exits the grid [" + std::to_string(grid_lo) + ", " +
                     std::to_string(grid_hi) + "]");
  const auto n = static_cast<std::ptrdiff_t>(axis.size());
  auto first = static_cast<std::ptrdiff_t>(std::floor((lo - grid_lo) / h));
  auto last = static_cast<std::ptrdiff_t>(std::floor((hi - grid_lo) / h));
  first = std::clamp<std::ptrdiff_t>(first, 0, n - 1);
  last = std::clamp<std::ptrdiff_t>(last, 0, n - 1);
  SlitWeights sw{static_cast<std::size_t>(first), {}};
  for (auto j = first; j <= last; ++j) {
    const double c_lo = grid_lo + static_cast<double>(j) * h;
    const double overlap = std::min(hi, c_lo + h) - std::max(lo, c_lo);
    sw.weights.push_back(std::max(0.0, overlap) / h);
  }
  return sw;
}

/// Poisson draw for one bin from its own RNG stream.
inline double poisson_draw(double mean, std::uint64_t seed, std::uint64_t stream) {
  if (!(mean > 0.0))
    return 0.0;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

/// Integrates the cell masses over slit_width x slit_width windows centred on
/// every slit pair, then scales to total_counts (noiseless) or draws Poisson
/// counts with those means. Axes of `density` are mapped to detector
/// coordinates by `coordinate_scale`.
inline CoincidenceHistogram slit_scan(const JointDistribution &density, const SlitScanConfig &cfg,
                                      double coordinate_scale = 1.0) {
  cfg.validate();
  const AxisUnit det = AxisUnit::Millimeter;
  const Grid1D axis_s = density.axis_s.scaled(coordinate_scale, det);
  const Grid1D axis_i = density.axis_i.scaled(coordinate_scale, det);

  CoincidenceHistogram hist;
  hist.positions_s = scan_positions(cfg.range_s, cfg.step);
  hist.positions_i = scan_positions(cfg.range_i, cfg.step);
  hist.basis = density.basis;
  hist.coordinate_scale = coordinate_scale;
  hist.config = cfg;
  hist.counts = Matrix<double>(hist.positions_s.size(), hist.positions_i.size());

  std::vector<SlitWeights> ws, wi;
  for (double p : hist.positions_s)
    ws.push_back(slit_weights(axis_s, p, cfg.slit_width));
  for (double p : hist.positions_i)
    wi.push_back(slit_weights(axis_i, p, cfg.slit_width));

  const std::size_t cols = hist.positions_i.size();
  parallel_for(hist.positions_s.size(), [&](std::size_t a) {
    // Collapse the signal window first, then apply each idler window.
    std::vector<double> rowsum(density.mass.cols(), 0.0);
    for (std::size_t k = 0; k < ws[a].weights.size(); ++k) {
      const auto row = density.mass.row(ws[a].first + k);
      const double w = ws[a].weights[k];
      for (std::size_t c = 0; c < row.size(); ++c)
        rowsum[c] += w * row[c];
    }
    for (std::size_t b = 0; b < cols; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < wi[b].weights.size(); ++k)
        s += wi[b].weights[k] * rowsum[wi[b].first + k];
      const double mean = cfg.total_counts * s;
      hist.counts(a, b) =
          cfg.noise == NoiseModel::Poisson ? poisson_draw(mean, cfg.seed, a * cols + b) : mean;
    }
  });
  return hist;
}

/// One-dimensional scan of a marginal (probability mass per cell).
inline std::vector<double> slit_scan_1d(const Grid1D &axis, const std::vector<double> &mass,
                                        const std::vector<double> &positions, const SlitScanConfig &cfg) {
  cfg.validate();
  std::vector<double> out(positions.size());
  for (std::size_t b = 0; b < positions.size(); ++b) {
    const auto w = slit_weights(axis, positions[b], cfg.slit_width);
    double s = 0.0;
    for (std::size_t k = 0; k < w.weights.size(); ++k)
      s += w.weights[k] * mass[w.first + k];
    const double mean = cfg.total_counts * s;
    out[b] = cfg.noise == NoiseModel::Poisson ? poisson_draw(mean, cfg.seed, b) : mean;
  }
  return out;
}

inline double expected_counts_total(const CoincidenceHistogram &hist) {
  double total = 0.0;
  for (double v : hist.counts.values())
    total += v;
  return total;
}

} // namespace nlac
