#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "nlac/errors.hpp"
#include "nlac/matrix.hpp"

namespace nlac {

// Units: all lengths are millimetres, transverse momenta are wavenumbers in
// mm^-1 and hbar = 1, so p = kappa and the witness bound hbar^2/4 is 1/4.
inline constexpr double kHbar = 1.0;
inline constexpr double kWitnessBound = kHbar * kHbar / 4.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class AxisUnit { Millimeter, InverseMillimeter };
enum class Basis { Momentum, Position };

inline AxisUnit unit_for(Basis basis) {
  return basis == Basis::Momentum ? AxisUnit::InverseMillimeter : AxisUnit::Millimeter;
}

inline const char *to_string(Basis basis) {
  return basis == Basis::Momentum ? "momentum" : "position";
}

inline AxisUnit dual(AxisUnit u) {
  return u == AxisUnit::Millimeter ? AxisUnit::InverseMillimeter : AxisUnit::Millimeter;
}

/// k = 2 pi / lambda, lambda in mm.
inline double wavenumber_from_wavelength(double lambda_mm) {
  if (!(lambda_mm > 0.0) || !std::isfinite(lambda_mm))
    throw InvalidParameter("wavelength must be positive, got " + std::to_string(lambda_mm));
  return kTwoPi / lambda_mm;
}

/// Fourier-plane position rho = f kappa / k behind a lens of focal length f.
inline double fourier_plane_position(double kappa, double focal_length, double k) {
  if (!(focal_length > 0.0) || !(k > 0.0))
    throw InvalidParameter("focal length and wavenumber must be positive");
  return focal_length * kappa / k;
}

/// Inverse of fourier_plane_position.
inline double position_to_kappa(double rho, double focal_length, double k) {
  if (!(focal_length > 0.0) || !(k > 0.0))
    throw InvalidParameter("focal length and wavenumber must be positive");
  return rho * k / focal_length;
}

/// Uniform grid of n points (power of two) spanning `extent`, symmetric about
/// `center`: x_j = center + (j - (n-1)/2) * extent/n. Symmetric placement puts
/// u and -u on the grid together, so the anti-diagonal kappa_s = -kappa_i is
/// sampled exactly.
///
/// The grid also remembers the extent and center of its Fourier-conjugate,
/// which makes make_conjugate_grid an exact involution.
class Grid1D {
public:
  Grid1D() = default;

  static Grid1D make(std::size_t n, double extent, AxisUnit unit, double center = 0.0) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw InvalidParameter("grid size must be a power of two >= 2, got " + std::to_string(n));
    if (!(extent > 0.0) || !std::isfinite(extent))
      throw InvalidParameter("grid extent must be positive");
    if (!std::isfinite(center))
      throw InvalidParameter("grid center must be finite");
    Grid1D g;
    g.n_ = n;
    g.extent_ = extent;
    g.center_ = center;
    g.unit_ = unit;
    g.dual_extent_ = kTwoPi * static_cast<double>(n) / extent;
    g.dual_center_ = 0.0;
    return g;
  }

  std::size_t size() const noexcept { return n_; }
  double extent() const noexcept { return extent_; }
  double center() const noexcept { return center_; }
  AxisUnit unit() const noexcept { return unit_; }
  double spacing() const noexcept { return extent_ / static_cast<double>(n_); }
  double offset(std::size_t j) const noexcept {
    return (static_cast<double>(j) - 0.5 * static_cast<double>(n_ - 1)) * spacing();
  }
  double coordinate(std::size_t j) const noexcept { return center_ + offset(j); }
  double front() const noexcept { return coordinate(0); }
  double back() const noexcept { return coordinate(n_ - 1); }

  std::vector<double> coordinates() const {
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j)
      out[j] = coordinate(j);
    return out;
  }

  /// Same grid expressed in other coordinates x' = factor * x (e.g. the
  /// Fourier-plane mapping rho = f kappa / k). The result is detached from
  /// the conjugate bookkeeping.
  Grid1D scaled(double factor, AxisUnit unit) const {
    if (!(factor > 0.0))
      throw InvalidParameter("grid scale factor must be positive");
    return make(n_, extent_ * factor, unit, center_ * factor);
  }

  friend Grid1D make_conjugate_grid(const Grid1D &g);

  bool operator==(const Grid1D &) const = default;

private:
  std::size_t n_ = 0;
  double extent_ = 0.0;
  double center_ = 0.0;
  AxisUnit unit_ = AxisUnit::Millimeter;
  double dual_extent_ = 0.0;
  double dual_center_ = 0.0;
};

/// Grid conjugate under the DFT: same n, spacing 2 pi / (n * spacing).
inline Grid1D make_conjugate_grid(const Grid1D &g) {
  Grid1D c = g;
  c.extent_ = g.dual_extent_;
  c.center_ = g.dual_center_;
  c.dual_extent_ = g.extent_;
  c.dual_center_ = g.center_;
  c.unit_ = dual(g.unit_);
  return c;
}

/// Discretized joint two-photon amplitude psi(u_s, u_i) on a grid.
class BiphotonGrid {
public:
  BiphotonGrid(Grid1D axis_s, Grid1D axis_i, Basis basis)
      : axis_s_(std::move(axis_s)), axis_i_(std::move(axis_i)), basis_(basis),
        amplitude_(axis_s_.size(), axis_i_.size()) {
    if (axis_s_.unit() != unit_for(basis) || axis_i_.unit() != unit_for(basis))
      throw InvalidParameter(std::string("axis units inconsistent with ") + to_string(basis) +
                             " basis");
  }

  const Grid1D &axis_s() const noexcept { return axis_s_; }
  const Grid1D &axis_i() const noexcept { return axis_i_; }
  Basis basis() const noexcept { return basis_; }
  double cell_area() const noexcept { return axis_s_.spacing() * axis_i_.spacing(); }

  Matrix<std::complex<double>> &amplitude() noexcept { return amplitude_; }
  const Matrix<std::complex<double>> &amplitude() const noexcept { return amplitude_; }

  /// Sum |psi|^2 times the cell area.
  double norm() const {
    double sum = 0.0;
    for (const auto &a : amplitude_.values())
      sum += std::norm(a);
    return sum * cell_area();
  }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0))
      throw InvalidParameter("cannot normalize a zero amplitude");
    const double scale = 1.0 / std::sqrt(n);
    for (auto &a : amplitude_.values())
      a *= scale;
  }

private:
  Grid1D axis_s_;
  Grid1D axis_i_;
  Basis basis_;
  Matrix<std::complex<double>> amplitude_;
};

/// Probability mass per grid cell over (u_s, u_i); sums to one.
struct JointDistribution {
  Grid1D axis_s;
  Grid1D axis_i;
  Basis basis = Basis::Momentum;
  Matrix<double> mass;

  double total() const {
    double t = 0.0;
    for (double v : mass.values())
      t += v;
    return t;
  }
};

inline constexpr std::size_t kGuardCells = 3;
inline constexpr double kGuardTolerance = 1e-6;

/// Fraction of total probability within `cells` cells of any grid edge.
inline double boundary_leakage(const Matrix<double> &mass, std::size_t cells = kGuardCells) {
  const std::size_t rows = mass.rows(), cols = mass.cols();
  double edge = 0.0, total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const bool edge_row = r < cells || r + cells >= rows;
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = mass(r, c);
      total += v;
      if (edge_row || c < cells || c + cells >= cols)
        edge += v;
    }
  }
  return total > 0.0 ? edge / total : 0.0;
}

inline Matrix<double> probability_mass(const BiphotonGrid &state) {
  Matrix<double> mass(state.amplitude().rows(), state.amplitude().cols());
  const auto &amp = state.amplitude().values();
  auto &out = mass.values();
  double total = 0.0;
  for (std::size_t k = 0; k < amp.size(); ++k) {
    out[k] = std::norm(amp[k]);
    total += out[k];
  }
  if (total > 0.0)
    for (auto &v : out)
      v /= total;
  return mass;
}

/// Aliasing guard: throws GridTooSmall when more than kGuardTolerance of the
/// probability sits within kGuardCells cells of an edge.
inline void check_boundary_energy(const BiphotonGrid &state, const std::string &context) {
  const double leak = boundary_leakage(probability_mass(state));
  if (leak >= kGuardTolerance)
    throw GridTooSmall(context + ": " + std::to_string(leak) +
                           " of the probability lies within " + std::to_string(kGuardCells) +
                           " cells of the " + to_string(state.basis()) +
                           " grid edge; enlarge the grid",
                       leak);
}

} // namespace nlac
