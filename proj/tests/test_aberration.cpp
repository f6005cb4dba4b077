#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "nlac/aberration.hpp"
#include "nlac/spdc.hpp"

using namespace nlac;

TEST(PhaseProfile, EvaluatesTaylorSeries) {
  const auto p = PhaseProfile::momentum({0.3, -0.5, 0.01, 2e-4});
  for (double u : {-40.0, -1.0, 0.0, 2.5, 17.0})
    EXPECT_NEAR(p(u), 0.3 - 0.5 * u + 0.01 * u * u / 2.0 + 2e-4 * u * u * u / 6.0, 1e-12);
  EXPECT_EQ(p.order(), PhaseProfile::kDefaultOrder);
  EXPECT_DOUBLE_EQ(p.derivative(2), 0.01);
  EXPECT_EQ(p.derivative(40), 0.0);
}

TEST(PhaseProfile, TermAndAdd) {
  auto p = PhaseProfile::term(PhaseDomain::MomentumDomain, 2, 0.01);
  p.add(PhaseProfile::term(PhaseDomain::MomentumDomain, 7, 1.0));
  EXPECT_EQ(p.order(), 7u);
  EXPECT_DOUBLE_EQ(p.derivative(2), 0.01);
  EXPECT_DOUBLE_EQ(p.derivative(7), 1.0);
  EXPECT_THROW(p.add(PhaseProfile::position({1.0})), InvalidParameter);
  EXPECT_THROW(PhaseProfile::momentum({std::nan("")}), InvalidParameter);
  EXPECT_TRUE(PhaseProfile::position({}).is_zero());
}

TEST(PhaseProfile, CancellationPartnerMirrorsProfile) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), arg(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = PhaseProfile::momentum({coef(rng), coef(rng), coef(rng), coef(rng), coef(rng), coef(rng)});
    const auto q = cancellation_partner(p);
    for (int k = 0; k < 5; ++k) {
      const double u = arg(rng);
      EXPECT_NEAR(q(u), -p(-u), 1e-12);
    }
    EXPECT_EQ(cancellation_partner(q), p);
  }
}

TEST(PhaseProfile, JointExpansion) {
  const auto phi_i = PhaseProfile::momentum({0.1, 0.2, 0.01, 5e-5});
  const auto phi_s = PhaseProfile::momentum({0.0, 0.7, 0.03, 1e-4});
  const auto e = joint_phase_expansion(phi_s, phi_i, 3);
  ASSERT_EQ(e.size(), 4u);
  EXPECT_DOUBLE_EQ(e[0], 0.1);
  EXPECT_DOUBLE_EQ(e[1], 0.7 - 0.2);
  EXPECT_DOUBLE_EQ(e[2], (0.03 + 0.01) / 2.0);
  EXPECT_DOUBLE_EQ(e[3], (1e-4 - 5e-5) / 6.0);

  const auto cancelled = joint_phase_expansion(cancellation_partner(phi_i), phi_i, 5);
  for (double c : cancelled)
    EXPECT_EQ(c, 0.0);

  EXPECT_THROW(joint_phase_expansion(phi_s, phi_i, 6), InsufficientOrder);
  EXPECT_THROW(joint_phase_expansion(phi_s, PhaseProfile::position({}), 2), InvalidParameter);
}

namespace {

BiphotonGrid small_state() {
  const CrystalPumpConfig cfg;
  const auto axis = Grid1D::make(256, 819.2, AxisUnit::InverseMillimeter);
  return synthesize_state(cfg, PumpProfile::from_config(cfg), axis, axis);
}

} // namespace

TEST(ApplyAberration, ChecksBasis) {
  const auto state = small_state();
  EXPECT_THROW(apply_aberration(state, {Arm::Signal, PhaseProfile::position({0, 0, 1.0})}), BasisMismatch);
}

TEST(ApplyAberration, ZeroProfileIsIdentity) {
  const auto state = small_state();
  const auto out = apply_aberration(state, {Arm::Idler, PhaseProfile::momentum({})});
  EXPECT_EQ(out.amplitude(), state.amplitude());
}

TEST(ApplyAberration, MultipliesAlongTheArmAxis) {
  const auto state = small_state();
  const auto phi = PhaseProfile::momentum({0.0, 0.02, 0.01, 5e-5});
  const auto sig = apply_aberration(state, {Arm::Signal, phi});
  const auto idl = apply_aberration(state, {Arm::Idler, phi});
  const auto &a = state.amplitude();
  for (std::size_t r = 0; r < a.rows(); r += 9)
    for (std::size_t c = 0; c < a.cols(); c += 13) {
      const auto fs = std::polar(1.0, phi(state.axis_s().coordinate(r)));
      const auto fi = std::polar(1.0, phi(state.axis_i().coordinate(c)));
      EXPECT_NEAR(std::abs(sig.amplitude()(r, c) - a(r, c) * fs), 0.0, 1e-14);
      EXPECT_NEAR(std::abs(idl.amplitude()(r, c) - a(r, c) * fi), 0.0, 1e-14);
    }
}

TEST(ApplyAberration, LeavesModulusUnchanged) {
  const auto state = small_state();
  const auto out = apply_aberrations(state, PhaseProfile::momentum({1.0, -0.3, 0.02, 1e-4, 1e-6}),
                                     PhaseProfile::momentum({0.0, 0.1, -0.01}));
  const auto before = momentum_distribution(state);
  const auto after = momentum_distribution(out);
  for (std::size_t k = 0; k < before.mass.size(); ++k)
    EXPECT_NEAR(after.mass.values()[k], before.mass.values()[k], 1e-12 * before.mass.values()[k] + 1e-300);
}

TEST(ApplyAberration, PartnerCancelsOnTheAntiDiagonal) {
  // On kappa_s = -kappa_i the combined phase phi_s(k) + phi_i(-k) vanishes.
  CrystalPumpConfig cfg;
  cfg.delta_kappa_p = 0.0;
  const auto axis = Grid1D::make(128, 819.2, AxisUnit::InverseMillimeter);
  const auto state = synthesize_state(cfg, PumpProfile::from_config(cfg), axis, axis);
  const auto phi = PhaseProfile::momentum({0.4, 0.05, 0.01, 5e-5, 1e-7});
  const auto out = apply_aberrations(state, cancellation_partner(phi), phi);
  const auto &a = state.amplitude();
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j)
    EXPECT_NEAR(std::abs(out.amplitude()(j, n - 1 - j) - a(j, n - 1 - j)), 0.0, 1e-12);
}
