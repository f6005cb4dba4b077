#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "nlac/errors.hpp"
#include "nlac/units.hpp"

namespace nlac {

enum class PhaseDomain { MomentumDomain, PositionDomain };
enum class Arm { Signal, Idler };

inline Basis basis_for(PhaseDomain d) {
  return d == PhaseDomain::MomentumDomain ? Basis::Momentum : Basis::Position;
}

inline const char *to_string(Arm arm) { return arm == Arm::Signal ? "signal" : "idler"; }

/// Polynomial phase phi(u) = sum_n c_n u^n / n!, stored as the derivatives
/// c_n = phi^(n)(0). Units of c_n are mm^n in the momentum domain and mm^-n
/// in the position domain.
class PhaseProfile {
public:
  static constexpr std::size_t kDefaultOrder = 5;

  PhaseProfile() : PhaseProfile(PhaseDomain::MomentumDomain, {}) {}
  PhaseProfile(PhaseDomain domain, std::vector<double> derivatives,
               std::size_t order = kDefaultOrder)
      : domain_(domain), coeffs_(std::move(derivatives)) {
    if (coeffs_.size() < order + 1)
      coeffs_.resize(order + 1, 0.0);
    for (double c : coeffs_)
      if (!std::isfinite(c))
        throw InvalidParameter("phase coefficients must be finite");
  }

  static PhaseProfile momentum(std::initializer_list<double> derivatives) {
    return {PhaseDomain::MomentumDomain, std::vector<double>(derivatives)};
  }
  static PhaseProfile position(std::initializer_list<double> derivatives) {
    return {PhaseDomain::PositionDomain, std::vector<double>(derivatives)};
  }
  /// Single term phi^(n)(0) = value.
  static PhaseProfile term(PhaseDomain domain, std::size_t n, double value) {
    std::vector<double> c(std::max(n, kDefaultOrder) + 1, 0.0);
    c[n] = value;
    return {domain, std::move(c)};
  }

  PhaseDomain domain() const noexcept { return domain_; }
  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  const std::vector<double> &derivatives() const noexcept { return coeffs_; }
  double derivative(std::size_t n) const { return n < coeffs_.size() ? coeffs_[n] : 0.0; }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
  }

  double operator()(double u) const {
    const auto mono = monomials();
    double result = 0.0;
    for (std::size_t n = mono.size(); n-- > 0;)
      result = result * u + mono[n];
    return result;
  }

  /// Monomial coefficients c_n / n!.
  std::vector<double> monomials() const {
    std::vector<double> m(coeffs_.size());
    double factorial = 1.0;
    for (std::size_t n = 0; n < coeffs_.size(); ++n) {
      if (n > 0)
        factorial *= static_cast<double>(n);
      m[n] = coeffs_[n] / factorial;
    }
    return m;
  }

  PhaseProfile &add(const PhaseProfile &other) {
    if (other.domain_ != domain_)
      throw InvalidParameter("cannot add phase profiles from different domains");
    if (other.coeffs_.size() > coeffs_.size())
      coeffs_.resize(other.coeffs_.size(), 0.0);
    for (std::size_t n = 0; n < other.coeffs_.size(); ++n)
      coeffs_[n] += other.coeffs_[n];
    return *this;
  }

  bool operator==(const PhaseProfile &) const = default;

private:
  PhaseDomain domain_;
  std::vector<double> coeffs_;
};

struct ArmAssignment {
  Arm arm;
  PhaseProfile profile;
};

/// Multiplies the amplitude by exp(i phi(u)) along the assigned arm's axis.
inline BiphotonGrid apply_aberration(const BiphotonGrid &state, const ArmAssignment &assignment) {
  const auto &profile = assignment.profile;
  if (basis_for(profile.domain()) != state.basis())
    throw BasisMismatch(std::string("a ") +
                        (profile.domain() == PhaseDomain::MomentumDomain ? "momentum" : "position") +
                        "-domain phase needs a " + to_string(basis_for(profile.domain())) +
                        "-basis state; transform the state first");
  BiphotonGrid out = state;
  if (profile.is_zero())
    return out;

  const bool signal = assignment.arm == Arm::Signal;
  const Grid1D &axis = signal ? state.axis_s() : state.axis_i();
  std::vector<std::complex<double>> factor(axis.size());
  const auto mono = profile.monomials();
  for (std::size_t j = 0; j < axis.size(); ++j) {
    const double u = axis.coordinate(j);
    double phase = 0.0;
    for (std::size_t n = mono.size(); n-- > 0;)
      phase = phase * u + mono[n];
    factor[j] = std::polar(1.0, phase);
  }

  auto &amp = out.amplitude();
  parallel_for(amp.rows(), [&](std::size_t r) {
    auto row = amp.row(r);
    if (signal) {
      const auto f = factor[r];
      for (auto &a : row)
        a *= f;
    } else {
      for (std::size_t c = 0; c < row.size(); ++c)
        row[c] *= factor[c];
    }
  });
  return out;
}

/// Applies optional profiles to both arms.
inline BiphotonGrid apply_aberrations(const BiphotonGrid &state,
                                      const std::optional<PhaseProfile> &signal,
                                      const std::optional<PhaseProfile> &idler) {
  BiphotonGrid out = state;
  if (signal)
    out = apply_aberration(out, {Arm::Signal, *signal});
  if (idler)
    out = apply_aberration(out, {Arm::Idler, *idler});
  return out;
}

/// Profile phi_out with phi_out(u) = -phi_in(-u): even orders negated, odd
/// orders kept. Placing it on the other arm cancels phi_in to all orders
/// when the pump is a plane wave.
inline PhaseProfile cancellation_partner(const PhaseProfile &profile) {
  std::vector<double> c = profile.derivatives();
  for (std::size_t n = 0; n < c.size(); n += 2)
    c[n] = -c[n];
  return {profile.domain(), std::move(c), profile.order()};
}

/// Monomial coefficients of phi_s(u) + phi_i(-u) through `order`:
/// (phi_s^(n)(0) + (-1)^n phi_i^(n)(0)) / n!.
inline std::vector<double> joint_phase_expansion(const PhaseProfile &phi_s, const PhaseProfile &phi_i,
                                                 std::size_t order) {
  if (order > phi_s.order() || order > phi_i.order())
    throw InsufficientOrder("expansion order " + std::to_string(order) +
                            " exceeds stored profile order");
  if (phi_s.domain() != phi_i.domain())
    throw InvalidParameter("joint expansion needs profiles from the same domain");
  std::vector<double> out(order + 1);
  double factorial = 1.0;
  for (std::size_t n = 0; n <= order; ++n) {
    if (n > 0)
      factorial *= static_cast<double>(n);
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    out[n] = (phi_s.derivative(n) + sign * phi_i.derivative(n)) / factorial;
  }
  return out;
}

} // namespace nlac
