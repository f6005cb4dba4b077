#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "nlac/units.hpp"

using namespace nlac;

TEST(Units, WavenumberFromWavelength) {
  // 2 pi / 405 nm and 2 pi / 810 nm in mm^-1
  EXPECT_NEAR(wavenumber_from_wavelength(405e-6), 15514.0377955052, 1e-6);
  EXPECT_NEAR(wavenumber_from_wavelength(810e-6), 7757.0188977526, 1e-6);
  EXPECT_THROW(wavenumber_from_wavelength(0.0), InvalidParameter);
  EXPECT_THROW(wavenumber_from_wavelength(-1.0), InvalidParameter);
}

TEST(Units, FourierPlaneMappingRoundTrips) {
  const double k = wavenumber_from_wavelength(810e-6);
  EXPECT_NEAR(fourier_plane_position(10.0, 400.0, k), 0.5156620156177409, 1e-12);
  for (double kappa : {-37.5, -1.0, 0.0, 2.25, 80.0})
    EXPECT_NEAR(position_to_kappa(fourier_plane_position(kappa, 400.0, k), 400.0, k), kappa, 1e-12);
  EXPECT_THROW(fourier_plane_position(1.0, 0.0, k), InvalidParameter);
}

TEST(Grid1D, RejectsBadSizes) {
  EXPECT_THROW(Grid1D::make(1000, 10.0, AxisUnit::Millimeter), InvalidParameter);
  EXPECT_THROW(Grid1D::make(1, 10.0, AxisUnit::Millimeter), InvalidParameter);
  EXPECT_THROW(Grid1D::make(64, 0.0, AxisUnit::Millimeter), InvalidParameter);
  EXPECT_NO_THROW(Grid1D::make(64, 10.0, AxisUnit::Millimeter));
}

TEST(Grid1D, SymmetricAboutCenter) {
  const auto g = Grid1D::make(8, 4.0, AxisUnit::InverseMillimeter);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(g.front(), -1.75);
  EXPECT_DOUBLE_EQ(g.back(), 1.75);
  for (std::size_t j = 0; j < g.size(); ++j)
    EXPECT_EQ(g.coordinate(j), -g.coordinate(g.size() - 1 - j));
}

TEST(Grid1D, ConjugateGrid) {
  const auto g = Grid1D::make(1024, 10.0, AxisUnit::Millimeter);
  const auto c = make_conjugate_grid(g);
  EXPECT_NEAR(c.extent(), 643.3981754551896, 1e-9);
  EXPECT_EQ(c.unit(), AxisUnit::InverseMillimeter);
  EXPECT_NEAR(g.spacing() * c.spacing(), kTwoPi / 1024.0, 1e-15);
  EXPECT_EQ(make_conjugate_grid(c), g);
}

TEST(Grid1D, ConjugateIsInvolutionForArbitraryGrids) {
  for (std::size_t n : {2u, 16u, 512u})
    for (double extent : {0.1, 3.7, 819.2})
      for (double center : {0.0, -1.25}) {
        const auto g = Grid1D::make(n, extent, AxisUnit::InverseMillimeter, center);
        EXPECT_EQ(make_conjugate_grid(make_conjugate_grid(g)), g);
      }
}

TEST(BiphotonGrid, UnitsMustMatchBasis) {
  const auto mm = Grid1D::make(8, 1.0, AxisUnit::Millimeter);
  const auto inv = Grid1D::make(8, 1.0, AxisUnit::InverseMillimeter);
  EXPECT_THROW(BiphotonGrid(mm, mm, Basis::Momentum), InvalidParameter);
  EXPECT_THROW(BiphotonGrid(mm, inv, Basis::Position), InvalidParameter);
  EXPECT_NO_THROW(BiphotonGrid(inv, inv, Basis::Momentum));
}

TEST(BiphotonGrid, Normalize) {
  const auto g = Grid1D::make(8, 2.0, AxisUnit::Millimeter);
  BiphotonGrid s(g, g, Basis::Position);
  EXPECT_THROW(s.normalize(), InvalidParameter);
  s.amplitude()(3, 4) = {3.0, 4.0};
  s.amplitude()(4, 3) = {0.0, 1.0};
  s.normalize();
  EXPECT_NEAR(s.norm(), 1.0, 1e-14);
  const auto mass = probability_mass(s);
  EXPECT_NEAR(mass(3, 4), 25.0 / 26.0, 1e-14);
  EXPECT_NEAR(mass(4, 3), 1.0 / 26.0, 1e-14);
}

TEST(Guard, BoundaryLeakage) {
  Matrix<double> m(16, 16, 0.0);
  m(8, 8) = 1.0;
  EXPECT_EQ(boundary_leakage(m), 0.0);
  m(0, 8) = 1.0;
  EXPECT_DOUBLE_EQ(boundary_leakage(m), 0.5);
  Matrix<double> inner(16, 16, 0.0);
  inner(3, 8) = 1.0; // fourth row is outside a three-cell band
  EXPECT_EQ(boundary_leakage(inner), 0.0);
  inner(12, 13) = 1.0; // three cells from the last column
  EXPECT_DOUBLE_EQ(boundary_leakage(inner), 0.5);
}

TEST(Guard, ThrowsOnEdgeEnergy) {
  const auto g = Grid1D::make(32, 2.0, AxisUnit::Millimeter);
  BiphotonGrid s(g, g, Basis::Position);
  s.amplitude()(16, 16) = 1.0;
  EXPECT_NO_THROW(check_boundary_energy(s, "test"));
  s.amplitude()(31, 0) = 0.01; // 1e-4 of the mass on the corner
  try {
    check_boundary_energy(s, "test");
    FAIL() << "expected GridTooSmall";
  } catch (const GridTooSmall &e) {
    EXPECT_NEAR(e.leakage(), 1e-4 / (1.0 + 1e-4), 1e-12);
  }
}
