#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nlac/aberration.hpp"
#include "nlac/spdc.hpp"
#include "nlac/transform.hpp"

using namespace nlac;
using cd = std::complex<double>;

namespace {

/// Superposition of a few Gaussian blobs with random complex weights and
/// linear phases; compact in both bases.
BiphotonGrid random_state(std::size_t n, double extent, Basis basis, std::uint64_t seed) {
  const auto axis = Grid1D::make(n, extent, unit_for(basis));
  BiphotonGrid s(axis, axis, basis);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double span = 0.15 * extent, width = 0.06 * extent;
  const double dual_span = 0.15 * make_conjugate_grid(axis).extent();
  for (int blob = 0; blob < 4; ++blob) {
    const double ca = span * u(rng), cb = span * u(rng), ta = dual_span * u(rng), tb = dual_span * u(rng);
    const cd w{u(rng), u(rng)};
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        const double a = axis.coordinate(r) - ca, b = axis.coordinate(c) - cb;
        s.amplitude()(r, c) += w * std::exp(-(a * a + b * b) / (4.0 * width * width)) *
                               std::polar(1.0, ta * axis.coordinate(r) + tb * axis.coordinate(c));
      }
  }
  s.normalize();
  return s;
}

/// Direct O(n^4) evaluation of h^2 / (2 pi) sum psi(a, b) exp(i sign (a x + b y)).
Matrix<cd> naive_transform(const BiphotonGrid &s, int sign) {
  const auto xs = make_conjugate_grid(s.axis_s()), xi = make_conjugate_grid(s.axis_i());
  const std::size_t n = s.axis_s().size();
  Matrix<cd> out(n, n);
  const double scale = s.cell_area() / kTwoPi;
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t l = 0; l < n; ++l) {
      cd acc{};
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
          const double ph = sign * (s.axis_s().coordinate(r) * xs.coordinate(m) +
                                    s.axis_i().coordinate(c) * xi.coordinate(l));
          acc += s.amplitude()(r, c) * std::polar(1.0, ph);
        }
      out(m, l) = scale * acc;
    }
  return out;
}

} // namespace

TEST(Transform, MatchesDirectSum) {
  const auto s = random_state(16, 12.0, Basis::Momentum, 3);
  const auto pos = detail::centred_transform(s, Basis::Position, +1);
  const auto ref = naive_transform(s, +1);
  for (std::size_t k = 0; k < ref.size(); ++k)
    EXPECT_NEAR(std::abs(pos.amplitude().values()[k] - ref.values()[k]), 0.0, 1e-12);
  EXPECT_EQ(pos.basis(), Basis::Position);
  EXPECT_EQ(pos.axis_s(), make_conjugate_grid(s.axis_s()));

  const auto back_ref = naive_transform(pos, -1);
  const auto back = detail::centred_transform(pos, Basis::Momentum, -1);
  for (std::size_t k = 0; k < back_ref.size(); ++k)
    EXPECT_NEAR(std::abs(back.amplitude().values()[k] - back_ref.values()[k]), 0.0, 1e-12);
}

TEST(Transform, RoundTripAndParseval) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto s = random_state(64, 50.0, Basis::Momentum, seed);
    const auto pos = to_position_basis(s);
    EXPECT_NEAR(pos.norm(), 1.0, 1e-12);
    const auto back = to_momentum_basis(pos);
    EXPECT_EQ(back.axis_s(), s.axis_s());
    for (std::size_t k = 0; k < s.amplitude().size(); ++k)
      EXPECT_NEAR(std::abs(back.amplitude().values()[k] - s.amplitude().values()[k]), 0.0, 1e-12);
  }
}

TEST(Transform, GaussianMapsToGaussian) {
  // psi(k) ~ exp(-k^2 / (4 s^2)) per axis has position variance 1 / (4 s^2).
  const double s2 = 4.0;
  const auto axis = Grid1D::make(256, 80.0, AxisUnit::InverseMillimeter);
  BiphotonGrid st(axis, axis, Basis::Momentum);
  for (std::size_t r = 0; r < 256; ++r)
    for (std::size_t c = 0; c < 256; ++c) {
      const double a = axis.coordinate(r), b = axis.coordinate(c);
      st.amplitude()(r, c) = std::exp(-(a * a + b * b) / (4.0 * s2));
    }
  st.normalize();
  const auto m = pm_moments(joint_distribution(to_position_basis(st)));
  EXPECT_NEAR(m.var_s, 1.0 / (4.0 * s2), 1e-10);
  EXPECT_NEAR(m.var_i, 1.0 / (4.0 * s2), 1e-10);
  EXPECT_NEAR(m.cov_si, 0.0, 1e-12);
}

TEST(Transform, BasisChecksAndGuard) {
  const auto s = random_state(64, 50.0, Basis::Momentum, 5);
  EXPECT_THROW(to_momentum_basis(s), BasisMismatch);
  EXPECT_THROW(to_position_basis(to_position_basis(s)), BasisMismatch);

  // A narrow momentum peak spreads over the whole position grid.
  const auto axis = Grid1D::make(32, 32.0, AxisUnit::InverseMillimeter);
  BiphotonGrid spike(axis, axis, Basis::Momentum);
  spike.amplitude()(16, 16) = 1.0;
  EXPECT_THROW(to_position_basis(spike), GridTooSmall);
}

TEST(Transform, LinearPhaseShiftsCentroid) {
  // With psi(x) ~ sum psi(k) e^{+ikx}, exp(i a k) moves x_s by -a.
  const CrystalPumpConfig cfg;
  const auto axis = Grid1D::make(512, 819.2, AxisUnit::InverseMillimeter);
  const auto state = synthesize_state(cfg, PumpProfile::from_config(cfg), axis, axis);
  const double a = 0.05;
  const auto before = pm_moments(joint_distribution(to_position_basis(state)));
  const auto after = pm_moments(joint_distribution(
      to_position_basis(apply_aberration(state, {Arm::Signal, PhaseProfile::momentum({0.0, a})}))));
  const double h = make_conjugate_grid(axis).spacing();
  EXPECT_NEAR(after.mean_s - before.mean_s, -a, h);
  EXPECT_NEAR(after.mean_i - before.mean_i, 0.0, 1e-9);
}

TEST(Rotation, ConservesMassAndMoments) {
  // Support inside the inscribed disc stays inside the rotated window.
  auto d = joint_distribution(random_state(64, 20.0, Basis::Position, 9));
  double kept = 0.0;
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c) {
      const double a = d.axis_s.coordinate(r), b = d.axis_i.coordinate(c);
      if (a * a + b * b > 9.0 * 9.0)
        d.mass(r, c) = 0.0;
      kept += d.mass(r, c);
    }
  for (auto &v : d.mass.values())
    v /= kept;
  const auto rot = rotate_to_pm(d);
  double mass = 0.0, mp = 0.0, mm = 0.0;
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c) {
      const double v = rot.mass(r, c);
      mass += v;
      mp += v * rot.axis_plus.coordinate(r);
      mm += v * rot.axis_minus.coordinate(c);
    }
  const auto m = pm_moments(d);
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(mp, m.mean_plus, 1e-12);
  EXPECT_NEAR(mm, m.mean_minus, 1e-12);
}

TEST(Rotation, RejectsUnequalGrids) {
  const auto a = Grid1D::make(16, 2.0, AxisUnit::Millimeter);
  const auto b = Grid1D::make(16, 3.0, AxisUnit::Millimeter);
  JointDistribution d{a, b, Basis::Position, Matrix<double>(16, 16, 1.0)};
  EXPECT_THROW(rotate_to_pm(d), InvalidParameter);
}

TEST(Moments, PointMasses) {
  const auto axis = Grid1D::make(8, 8.0, AxisUnit::Millimeter); // coordinates -3.5 ... 3.5
  JointDistribution d{axis, axis, Basis::Position, Matrix<double>(8, 8, 0.0)};
  d.mass(1, 6) = 0.5; // (-2.5, 2.5)
  d.mass(6, 1) = 0.5; // (2.5, -2.5)
  const auto m = pm_moments(d);
  EXPECT_NEAR(m.var_plus, 0.0, 1e-15);
  EXPECT_NEAR(m.var_minus, 12.5, 1e-12); // x_- = +-5 / sqrt2
  EXPECT_NEAR(m.cov_si, -6.25, 1e-12);
  const auto [ms, mi] = marginals(d);
  EXPECT_NEAR(ms.variance(), 6.25, 1e-12);
  EXPECT_NEAR(mi.mean(), 0.0, 1e-12);
}

TEST(Moments, SkewnessOfExponentialSamples) {
  // Marginal skewness of a discretized exponential tends to 2.
  const auto axis = Grid1D::make(4096, 60.0, AxisUnit::Millimeter);
  std::vector<double> mass(axis.size());
  for (std::size_t j = 0; j < mass.size(); ++j) {
    const double x = axis.coordinate(j) + 25.0;
    mass[j] = x > 0.0 ? std::exp(-x) : 0.0;
  }
  EXPECT_NEAR(make_marginal(axis, mass).skewness(), 2.0, 1e-2);
  EXPECT_THROW(make_marginal(axis, std::vector<double>(axis.size(), 0.0)), InvalidParameter);
}

TEST(AntiDiagonal, SamplesXPlusZero) {
  const auto axis = Grid1D::make(8, 8.0, AxisUnit::Millimeter);
  JointDistribution d{axis, axis, Basis::Position, Matrix<double>(8, 8, 0.0)};
  d.mass(2, 5) = 1.0; // (-1.5, 1.5): x_- = -1.5 sqrt2
  d.mass(4, 4) = 7.0; // off the anti-diagonal, ignored
  const auto sec = anti_diagonal_section(d);
  EXPECT_NEAR(sec.mean(), -1.5 * std::numbers::sqrt2, 1e-12);
  EXPECT_NEAR(sec.axis.spacing(), std::numbers::sqrt2, 1e-12);
  const auto shifted = Grid1D::make(8, 8.0, AxisUnit::Millimeter, 0.5);
  JointDistribution e{shifted, shifted, Basis::Position, d.mass};
  EXPECT_THROW(anti_diagonal_section(e), InvalidParameter);
}
