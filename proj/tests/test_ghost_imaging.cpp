#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nlac/ghost_imaging.hpp"

using namespace nlac;

TEST(BarObject, Transmission) {
  const BarObject obj;
  EXPECT_EQ(obj.transmission(0.0), 0.0);
  EXPECT_EQ(obj.transmission(0.8), 0.0);
  EXPECT_EQ(obj.transmission(-0.75), 0.0);
  EXPECT_EQ(obj.transmission(0.4), 1.0);
  EXPECT_EQ(obj.transmission(1.3), 1.0);
  EXPECT_DOUBLE_EQ(obj.half_extent(), 1.2);
  BarObject bad;
  bad.bar_width = 0.8;
  EXPECT_THROW(bad.validate(), InvalidParameter);
  bad = {};
  bad.n_bars = 0;
  EXPECT_THROW(bad.validate(), InvalidParameter);
}

TEST(Visibility, MichelsonContrast) {
  const std::vector<double> t{1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(visibility(t).value, 0.5);
  EXPECT_FALSE(visibility(t).low_modulation);
  const std::vector<double> flat(5, 2.0);
  EXPECT_EQ(visibility(flat).value, 0.0);
  EXPECT_TRUE(visibility(flat).low_modulation);
  EXPECT_TRUE(visibility(t, 2.5).low_modulation);
  EXPECT_TRUE(visibility(std::vector<double>{}).low_modulation);
}

TEST(PeriodEstimate, RecoversCosinePeriod) {
  std::vector<double> x, y;
  for (int k = -20; k <= 20; ++k) {
    x.push_back(0.1 * k);
    y.push_back(5.0 + std::cos(2 * std::numbers::pi * x.back() / 0.8 + 0.3));
  }
  EXPECT_NEAR(period_estimate(y, x), 0.8, 0.01);
}

TEST(PeriodEstimate, Failures) {
  std::vector<double> x{0.0, 0.1, 0.2, 0.3, 0.4}, flat(5, 1.0);
  EXPECT_THROW(period_estimate(flat, x), EstimationFailed);
  std::vector<double> x3{0.0, 0.1, 0.2};
  EXPECT_THROW(period_estimate(std::vector<double>{1, 2, 3}, x3), EstimationFailed);
  // Only about one period inside the scan.
  std::vector<double> xs, ys;
  for (int k = 0; k <= 10; ++k) {
    xs.push_back(0.1 * k);
    ys.push_back(std::cos(2 * std::numbers::pi * xs.back() / 0.9));
  }
  EXPECT_THROW(period_estimate(ys, xs), EstimationFailed);
}

TEST(Bucket, MaskedMarginal) {
  const auto axis = Grid1D::make(4, 4.0, AxisUnit::InverseMillimeter);
  JointDistribution d{axis, axis, Basis::Momentum, Matrix<double>(4, 4, 0.0)};
  d.mass(0, 3) = 0.25;
  d.mass(1, 2) = 0.25;
  d.mass(2, 1) = 0.25;
  d.mass(3, 0) = 0.25;
  const auto out = bucket_idler_marginal(d, std::vector<double>{1.0, 0.0, 1.0, 0.0});
  EXPECT_EQ(out, (std::vector<double>{0.0, 0.25, 0.0, 0.25}));
  EXPECT_THROW(bucket_idler_marginal(d, std::vector<double>{1.0}), InvalidParameter);
}

TEST(ObjectMask, ClippedObject) {
  const auto axis = Grid1D::make(64, 20.0, AxisUnit::InverseMillimeter); // +-0.5 mm in the Fourier plane
  EXPECT_THROW(object_mask(BarObject{}, axis, FourierGeometry{}), RangeError);
}

TEST(GhostImage, UnaberratedImageOfBars) {
  GhostScenario sc;
  sc.grid_s = sc.grid_i = Grid1D::make(2048, 819.2, AxisUnit::InverseMillimeter);
  sc.pump = PumpProfile::from_config(sc.crystal);
  sc.scan.noise = NoiseModel::Noiseless;
  sc.scan.total_counts = 1e6;
  const auto r = run_ghost_scenario(sc);
  // Independent numpy evaluation of the same pipeline.
  EXPECT_NEAR(r.visibility, 0.8891085367145632, 1e-6);
  EXPECT_FALSE(r.low_modulation);
  ASSERT_TRUE(r.period_valid);
  EXPECT_NEAR(r.period_estimate, 0.8, 0.05);
  EXPECT_DOUBLE_EQ(r.magnification, 1.0);
  EXPECT_EQ(r.positions.size(), 41u);
  // The opaque bars block half the object window.
  EXPECT_GT(r.transmitted_mass, 0.0);
  EXPECT_LT(r.transmitted_mass, 1.0);
}

TEST(GhostImage, ScanMissingTheImage) {
  GhostScenario sc;
  sc.grid_s = sc.grid_i = Grid1D::make(2048, 819.2, AxisUnit::InverseMillimeter);
  sc.pump = PumpProfile::from_config(sc.crystal);
  sc.scan.range_i = {5.0, 6.0};
  EXPECT_THROW(run_ghost_scenario(sc), RangeError);
}
