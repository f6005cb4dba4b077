#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "nlac/errors.hpp"
#include "nlac/matrix.hpp"
#include "nlac/units.hpp"

namespace nlac {

namespace detail {

inline std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place unnormalized 2D DFT, sign = +1 (sum e^{+i..}) or -1.
inline void fft2d(Matrix<std::complex<double>> &a, int sign) {
  auto *data = reinterpret_cast<fftw_complex *>(a.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(a.rows()), static_cast<int>(a.cols()), data, data,
                            sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

/// exp(i * 2 pi * num / den) with num reduced exactly before scaling.
inline std::complex<double> unit_phase(std::int64_t num, std::int64_t den) {
  std::int64_t r = num % den;
  if (r < 0)
    r += den;
  return std::polar(1.0, kTwoPi * static_cast<double>(r) / static_cast<double>(den));
}

/// Per-axis pre/post factors turning a plain DFT into
/// out(m) = h_from / sqrt(2 pi) * sum_j in(j) exp(i sign a_j b_m)
/// for centred grids a (from) and b (to), a_j = c_a + (j - C) h_a with
/// C = (n - 1) / 2 and h_a h_b = 2 pi / n.
struct AxisRamps {
  std::vector<std::complex<double>> pre, post;
};

inline AxisRamps axis_ramps(const Grid1D &from, const Grid1D &to, int sign) {
  const std::size_t n = from.size();
  const auto ni = static_cast<std::int64_t>(n);
  const double s = static_cast<double>(sign);
  const double scale = from.spacing() / std::sqrt(kTwoPi);
  AxisRamps r{std::vector<std::complex<double>>(n), std::vector<std::complex<double>>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const auto ki = static_cast<std::int64_t>(k);
    // (2 pi / n) C j = 2 pi (n-1) j / (2n)
    const auto pre_int = unit_phase(-sign * (ni - 1) * ki, 2 * ni);
    r.pre[k] = pre_int * std::polar(1.0, s * to.center() * from.offset(k));
    // (2 pi / n)(C^2 - C m) = 2 pi (n-1)(n-1-2m) / (4n)
    const auto post_int = unit_phase(sign * (ni - 1) * (ni - 1 - 2 * ki), 4 * ni);
    r.post[k] = scale * post_int *
                std::polar(1.0, s * (from.center() * to.center() + from.center() * to.offset(k)));
  }
  return r;
}

inline BiphotonGrid centred_transform(const BiphotonGrid &state, Basis target, int sign) {
  const Grid1D to_s = make_conjugate_grid(state.axis_s());
  const Grid1D to_i = make_conjugate_grid(state.axis_i());
  const auto rs = axis_ramps(state.axis_s(), to_s, sign);
  const auto ri = axis_ramps(state.axis_i(), to_i, sign);

  BiphotonGrid out(to_s, to_i, target);
  auto &a = out.amplitude();
  a = state.amplitude();
  parallel_for(a.rows(), [&](std::size_t r) {
    auto row = a.row(r);
    for (std::size_t c = 0; c < row.size(); ++c)
      row[c] *= rs.pre[r] * ri.pre[c];
  });
  fft2d(a, sign);
  parallel_for(a.rows(), [&](std::size_t r) {
    auto row = a.row(r);
    for (std::size_t c = 0; c < row.size(); ++c)
      row[c] *= rs.post[r] * ri.post[c];
  });
  return out;
}

} // namespace detail

/// psi(x_s, x_i) = (1 / 2pi) * integral psi(k_s, k_i) exp(i (k_s x_s + k_i x_i)),
/// evaluated by a unitary DFT onto the conjugate grids.
inline BiphotonGrid to_position_basis(const BiphotonGrid &state) {
  if (state.basis() != Basis::Momentum)
    throw BasisMismatch("to_position_basis needs a momentum-basis state");
  auto out = detail::centred_transform(state, Basis::Position, +1);
  check_boundary_energy(out, "to_position_basis");
  return out;
}

/// Inverse of to_position_basis.
inline BiphotonGrid to_momentum_basis(const BiphotonGrid &state) {
  if (state.basis() != Basis::Position)
    throw BasisMismatch("to_momentum_basis needs a position-basis state");
  auto out = detail::centred_transform(state, Basis::Momentum, -1);
  check_boundary_energy(out, "to_momentum_basis");
  return out;
}

/// |psi|^2 as probability mass per cell, in the state's own basis.
inline JointDistribution joint_distribution(const BiphotonGrid &state) {
  return {state.axis_s(), state.axis_i(), state.basis(), probability_mass(state)};
}

/// Density over u_+ = (u_s + u_i)/sqrt2 and u_- = (u_s - u_i)/sqrt2.
struct RotatedDistribution {
  Grid1D axis_plus;
  Grid1D axis_minus;
  Matrix<double> mass; // rows: u_+, cols: u_-
};

/// Resamples onto rotated axes of the same spacing by bilinear (cloud-in-cell)
/// deposition of each cell's mass. Mass and first moments are conserved
/// except for mass falling outside the rotated window.
inline RotatedDistribution rotate_to_pm(const JointDistribution &d) {
  const double h = d.axis_s.spacing();
  if (std::abs(d.axis_i.spacing() - h) > 1e-12 * h || d.axis_s.size() != d.axis_i.size())
    throw InvalidParameter("rotate_to_pm needs square grids with equal spacing on both axes");
  const std::size_t n = d.axis_s.size();
  const double root2 = std::numbers::sqrt2;
  RotatedDistribution out{
      Grid1D::make(n, d.axis_s.extent(), d.axis_s.unit(),
                   (d.axis_s.center() + d.axis_i.center()) / root2),
      Grid1D::make(n, d.axis_s.extent(), d.axis_s.unit(),
                   (d.axis_s.center() - d.axis_i.center()) / root2),
      Matrix<double>(n, n)};
  const double p0 = out.axis_plus.front(), m0 = out.axis_minus.front();
  const auto last = static_cast<double>(n - 1);
  for (std::size_t r = 0; r < n; ++r) {
    const double us = d.axis_s.coordinate(r);
    for (std::size_t c = 0; c < n; ++c) {
      const double v = d.mass(r, c);
      if (v == 0.0)
        continue;
      const double ui = d.axis_i.coordinate(c);
      const double fp = ((us + ui) / root2 - p0) / h;
      const double fm = ((us - ui) / root2 - m0) / h;
      if (fp < 0.0 || fm < 0.0 || fp > last || fm > last)
        continue;
      const auto ip = std::min(static_cast<std::size_t>(fp), n - 2);
      const auto im = std::min(static_cast<std::size_t>(fm), n - 2);
      const double wp = fp - static_cast<double>(ip), wm = fm - static_cast<double>(im);
      out.mass(ip, im) += v * (1 - wp) * (1 - wm);
      out.mass(ip + 1, im) += v * wp * (1 - wm);
      out.mass(ip, im + 1) += v * (1 - wp) * wm;
      out.mass(ip + 1, im + 1) += v * wp * wm;
    }
  }
  return out;
}

/// One-dimensional probability density on a grid; sum(density) * spacing = 1.
struct Marginal {
  Grid1D axis;
  std::vector<double> density;

  double moment(int k, double about = 0.0) const {
    double s = 0.0;
    for (std::size_t j = 0; j < density.size(); ++j)
      s += density[j] * std::pow(axis.coordinate(j) - about, k);
    return s * axis.spacing();
  }
  double mean() const { return moment(1); }
  double variance() const { return moment(2, mean()); }
  double skewness() const {
    const double m = mean();
    return moment(3, m) / std::pow(moment(2, m), 1.5);
  }
};

inline Marginal make_marginal(const Grid1D &axis, std::vector<double> mass) {
  double total = 0.0;
  for (double v : mass)
    total += v;
  if (!(total > 0.0))
    throw InvalidParameter("marginal of an empty distribution");
  const double scale = 1.0 / (total * axis.spacing());
  for (auto &v : mass)
    v *= scale;
  return {axis, std::move(mass)};
}

/// Signal (row sums) and idler (column sums) marginals.
inline std::pair<Marginal, Marginal> marginals(const JointDistribution &d) {
  std::vector<double> ms(d.mass.rows(), 0.0), mi(d.mass.cols(), 0.0);
  for (std::size_t r = 0; r < d.mass.rows(); ++r)
    for (std::size_t c = 0; c < d.mass.cols(); ++c) {
      ms[r] += d.mass(r, c);
      mi[c] += d.mass(r, c);
    }
  return {make_marginal(d.axis_s, std::move(ms)), make_marginal(d.axis_i, std::move(mi))};
}

/// Moments of the rotated coordinates computed directly from the unrotated
/// cell masses.
struct PlusMinusMoments {
  double mean_s = 0, mean_i = 0;
  double var_s = 0, var_i = 0, cov_si = 0;
  double mean_plus = 0, mean_minus = 0;
  double var_plus = 0, var_minus = 0, cov_pm = 0;
  double skew_plus = 0, skew_minus = 0;
};

inline PlusMinusMoments pm_moments(const JointDistribution &d) {
  const double root2 = std::numbers::sqrt2;
  PlusMinusMoments m;
  double total = 0.0;
  for (std::size_t r = 0; r < d.mass.rows(); ++r)
    for (std::size_t c = 0; c < d.mass.cols(); ++c) {
      const double v = d.mass(r, c);
      total += v;
      m.mean_s += v * d.axis_s.coordinate(r);
      m.mean_i += v * d.axis_i.coordinate(c);
    }
  m.mean_s /= total;
  m.mean_i /= total;
  m.mean_plus = (m.mean_s + m.mean_i) / root2;
  m.mean_minus = (m.mean_s - m.mean_i) / root2;
  double m3p = 0.0, m3m = 0.0;
  for (std::size_t r = 0; r < d.mass.rows(); ++r) {
    const double xs = d.axis_s.coordinate(r) - m.mean_s;
    for (std::size_t c = 0; c < d.mass.cols(); ++c) {
      const double v = d.mass(r, c) / total;
      const double xi = d.axis_i.coordinate(c) - m.mean_i;
      m.var_s += v * xs * xs;
      m.var_i += v * xi * xi;
      m.cov_si += v * xs * xi;
      const double p = (xs + xi) / root2, q = (xs - xi) / root2;
      m3p += v * p * p * p;
      m3m += v * q * q * q;
    }
  }
  m.var_plus = 0.5 * (m.var_s + m.var_i) + m.cov_si;
  m.var_minus = 0.5 * (m.var_s + m.var_i) - m.cov_si;
  m.cov_pm = 0.5 * (m.var_s - m.var_i);
  m.skew_plus = m3p / std::pow(m.var_plus, 1.5);
  m.skew_minus = m3m / std::pow(m.var_minus, 1.5);
  return m;
}

/// Profile along the anti-diagonal u_s = -u_i (u_+ = 0) as a function of
/// u_- = sqrt2 * u_s. Needs identical grids centred at zero, for which the
/// anti-diagonal cells (j, n-1-j) lie exactly on u_+ = 0.
inline Marginal anti_diagonal_section(const JointDistribution &d) {
  if (!(d.axis_s == d.axis_i) || d.axis_s.center() != 0.0)
    throw InvalidParameter("anti-diagonal section needs identical grids centred at zero");
  const std::size_t n = d.axis_s.size();
  std::vector<double> profile(n);
  for (std::size_t j = 0; j < n; ++j)
    profile[j] = d.mass(j, n - 1 - j);
  const auto axis = Grid1D::make(n, d.axis_s.extent() * std::numbers::sqrt2, d.axis_s.unit());
  return make_marginal(axis, std::move(profile));
}

} // namespace nlac
