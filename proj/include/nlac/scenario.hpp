#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nlac/aberration.hpp"
#include "nlac/detection.hpp"
#include "nlac/errors.hpp"
#include "nlac/ghost_imaging.hpp"
#include "nlac/spdc.hpp"
#include "nlac/units.hpp"

namespace nlac {

enum class ScenarioKind { Correlation, Imaging };

struct GridSettings {
  std::size_t points = 2048;
  double momentum_extent = 819.2; // mm^-1, full width of each momentum axis

  Grid1D axis() const { return Grid1D::make(points, momentum_extent, AxisUnit::InverseMillimeter); }
};

struct AnalysisSettings {
  bool fit = true;
  std::size_t monte_carlo_resamples = 200;
  std::uint64_t seed = 7;
};

/// Residual alignment defocus that can be added to the signal arm.
inline constexpr double kResidualSignalDefocus = -0.0052; // mm^2

struct ScenarioConfig {
  std::string name = "custom";
  std::string description;
  ScenarioKind kind = ScenarioKind::Correlation;
  CrystalPumpConfig crystal;
  GridSettings grid;
  double focal_length = 400.0;
  double signal_wavelength = kDefaultPhotonWavelength;
  double idler_wavelength = kDefaultPhotonWavelength;
  std::size_t export_points = 256;
  std::string output_dir;

  // correlation scenarios
  PhaseProfile aberration_signal = PhaseProfile::momentum({});
  PhaseProfile aberration_idler = PhaseProfile::momentum({});
  bool residual_defocus = false;
  SlitScanConfig scan;
  AnalysisSettings analysis;

  // imaging scenarios
  BarObject object;
  PhaseProfile theta_signal = PhaseProfile::position({});
  PhaseProfile theta_idler = PhaseProfile::position({});

  FourierGeometry geometry() const {
    return {focal_length, wavenumber_from_wavelength(signal_wavelength),
            wavenumber_from_wavelength(idler_wavelength)};
  }

  /// Signal momentum phase including the optional residual defocus.
  PhaseProfile effective_signal_aberration() const {
    PhaseProfile p = aberration_signal;
    if (residual_defocus)
      p.add(PhaseProfile::term(PhaseDomain::MomentumDomain, 2, kResidualSignalDefocus));
    return p;
  }

  void validate() const {
    crystal.validate();
    (void)grid.axis();
    scan.validate();
    (void)geometry();
    if (!(focal_length > 0.0))
      throw InvalidParameter("focal length must be positive");
    if (export_points < 2)
      throw InvalidParameter("export_points must be at least 2");
    if (kind == ScenarioKind::Imaging)
      object.validate();
    if (aberration_signal.domain() != PhaseDomain::MomentumDomain ||
        aberration_idler.domain() != PhaseDomain::MomentumDomain ||
        theta_signal.domain() != PhaseDomain::PositionDomain ||
        theta_idler.domain() != PhaseDomain::PositionDomain)
      throw InvalidParameter("aberrations act in momentum, imaging phases in position");
  }
};

// ---------------------------------------------------------------------------
// Text format: '# comment', '[section]', 'key = value'. Phase terms are
// 'term = <order> <value> <unit>' with unit mm^n (momentum) or mm^-n (position).

/// Shortest text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string term_unit(PhaseDomain domain, std::size_t order) {
  if (order == 0)
    return "rad";
  const long exponent = domain == PhaseDomain::MomentumDomain ? static_cast<long>(order) : -static_cast<long>(order);
  return exponent == 1 ? "mm" : "mm^" + std::to_string(exponent);
}

struct Parser {
  int line = 0;
  std::string section;

  [[noreturn]] void fail(const std::string &msg, const std::string &field = {}) const {
    throw ConfigError(msg, line, field);
  }

  double number(const std::string &key, const std::string &v) const {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(d))
        throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception &) {
      fail("'" + key + "' expects a number, got '" + v + "'", key);
    }
  }

  std::uint64_t integer(const std::string &key, const std::string &v) const {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
      fail("'" + key + "' expects a non-negative integer, got '" + v + "'", key);
    try {
      return std::stoull(v);
    } catch (const std::exception &) {
      fail("'" + key + "' is out of range", key);
    }
  }

  bool boolean(const std::string &key, const std::string &v) const {
    if (v == "true" || v == "yes" || v == "1")
      return true;
    if (v == "false" || v == "no" || v == "0")
      return false;
    fail("'" + key + "' expects true/false, got '" + v + "'", key);
  }

  ScanRange range(const std::string &key, const std::string &v) const {
    std::istringstream in(v);
    std::string a, b, extra;
    if (!(in >> a >> b) || (in >> extra))
      fail("'" + key + "' expects two numbers 'lo hi'", key);
    const ScanRange r{number(key, a), number(key, b)};
    if (r.hi < r.lo)
      fail("'" + key + "' needs lo <= hi", key);
    return r;
  }

  void term(PhaseProfile &profile, const std::string &key, const std::string &v) const {
    std::istringstream in(v);
    std::string order_s, value_s, unit, extra;
    if (!(in >> order_s >> value_s >> unit) || (in >> extra))
      fail("'term' expects '<order> <value> <unit>'", key);
    const auto order = integer(key, order_s);
    if (order > 32)
      fail("phase term order " + order_s + " is too large", key);
    const double value = number(key, value_s);
    std::string expected = term_unit(profile.domain(), order);
    const bool alt = order == 1 && unit == expected + "^1";
    const bool alt_neg = order == 1 && profile.domain() == PhaseDomain::PositionDomain && unit == "mm^-1";
    const bool alt_zero = order == 0 && (unit == "1" || unit == "mm^0");
    if (unit != expected && !alt && !alt_neg && !alt_zero)
      fail("order-" + order_s + " term in the " +
               std::string(profile.domain() == PhaseDomain::MomentumDomain ? "momentum" : "position") +
               " domain must be in " + expected + ", got '" + unit + "'",
           key);
    std::vector<double> c = profile.derivatives();
    if (c.size() <= order)
      c.resize(order + 1, 0.0);
    c[order] += value;
    profile = PhaseProfile(profile.domain(), std::move(c));
  }
};

} // namespace detail

inline ScenarioConfig parse_config(std::istream &in) {
  ScenarioConfig cfg;
  detail::Parser p;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  static const std::set<std::string> sections = {
      "",           "crystal", "grid", "optics", "correlation", "aberration.signal", "aberration.idler",
      "scan",       "analysis", "imaging", "theta.signal", "theta.idler", "output"};

  std::string raw;
  while (std::getline(in, raw)) {
    ++p.line;
    auto hash = raw.find('#');
    std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty())
      continue;
    if (text.front() == '[') {
      if (text.back() != ']')
        p.fail("malformed section header '" + text + "'");
      p.section = detail::trim(text.substr(1, text.size() - 2));
      if (!sections.count(p.section) || p.section.empty())
        p.fail("unknown section [" + p.section + "]", p.section);
      if (!seen_sections.insert(p.section).second)
        p.fail("duplicate section [" + p.section + "]", p.section);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      p.fail("expected 'key = value', got '" + text + "'");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    const std::string field = p.section.empty() ? key : p.section + "." + key;
    if (key.empty())
      p.fail("empty key");
    if (key != "term" && !seen_keys.insert(field).second)
      p.fail("duplicate key '" + field + "'", field);

    const auto &s = p.section;
    auto unknown = [&] { p.fail("unknown key '" + key + "' in [" + s + "]", field); };
    if (s.empty()) {
      if (key == "name") cfg.name = value;
      else if (key == "description") cfg.description = value;
      else unknown();
    } else if (s == "crystal") {
      if (key == "length_mm") cfg.crystal.ell = p.number(key, value);
      else if (key == "pump_wavelength_mm") cfg.crystal.k_p = kTwoPi / p.number(key, value);
      else if (key == "alpha") cfg.crystal.alpha = p.number(key, value);
      else if (key == "pump_angular_width_per_mm") cfg.crystal.delta_kappa_p = p.number(key, value);
      else if (key == "phase_matching") {
        if (value == "gaussian") cfg.crystal.phase_matching = PhaseMatching::GaussianApprox;
        else if (value == "sinc") cfg.crystal.phase_matching = PhaseMatching::ExactSinc;
        else p.fail("phase_matching must be 'gaussian' or 'sinc'", field);
      } else unknown();
    } else if (s == "grid") {
      if (key == "points") cfg.grid.points = p.integer(key, value);
      else if (key == "momentum_extent_per_mm") cfg.grid.momentum_extent = p.number(key, value);
      else unknown();
    } else if (s == "optics") {
      if (key == "focal_length_mm") cfg.focal_length = p.number(key, value);
      else if (key == "signal_wavelength_mm") cfg.signal_wavelength = p.number(key, value);
      else if (key == "idler_wavelength_mm") cfg.idler_wavelength = p.number(key, value);
      else unknown();
    } else if (s == "correlation") {
      if (key == "residual_defocus") cfg.residual_defocus = p.boolean(key, value);
      else unknown();
    } else if (s == "aberration.signal" || s == "aberration.idler" || s == "theta.signal" ||
               s == "theta.idler") {
      if (key != "term")
        unknown();
      PhaseProfile &target = s == "aberration.signal" ? cfg.aberration_signal
                             : s == "aberration.idler" ? cfg.aberration_idler
                             : s == "theta.signal"     ? cfg.theta_signal
                                                       : cfg.theta_idler;
      p.term(target, field, value);
    } else if (s == "scan") {
      if (key == "slit_width_mm") cfg.scan.slit_width = p.number(key, value);
      else if (key == "step_mm") cfg.scan.step = p.number(key, value);
      else if (key == "range_s_mm") cfg.scan.range_s = p.range(key, value);
      else if (key == "range_i_mm") cfg.scan.range_i = p.range(key, value);
      else if (key == "total_counts") cfg.scan.total_counts = p.number(key, value);
      else if (key == "seed") cfg.scan.seed = p.integer(key, value);
      else if (key == "noise") {
        if (value == "poisson") cfg.scan.noise = NoiseModel::Poisson;
        else if (value == "noiseless") cfg.scan.noise = NoiseModel::Noiseless;
        else p.fail("noise must be 'poisson' or 'noiseless'", field);
      } else unknown();
    } else if (s == "analysis") {
      if (key == "fit") cfg.analysis.fit = p.boolean(key, value);
      else if (key == "monte_carlo_resamples") cfg.analysis.monte_carlo_resamples = p.integer(key, value);
      else if (key == "seed") cfg.analysis.seed = p.integer(key, value);
      else unknown();
    } else if (s == "imaging") {
      if (key == "bar_width_mm") cfg.object.bar_width = p.number(key, value);
      else if (key == "period_mm") cfg.object.period = p.number(key, value);
      else if (key == "bars") cfg.object.n_bars = static_cast<int>(p.integer(key, value));
      else if (key == "center_mm") cfg.object.center = p.number(key, value);
      else unknown();
    } else if (s == "output") {
      if (key == "directory") cfg.output_dir = value;
      else if (key == "export_points") cfg.export_points = p.integer(key, value);
      else unknown();
    }
  }

  p.line = 0;
  const bool corr = seen_sections.count("correlation") > 0;
  const bool imag = seen_sections.count("imaging") > 0;
  if (corr == imag)
    p.fail("exactly one of [correlation] or [imaging] must be present");
  cfg.kind = corr ? ScenarioKind::Correlation : ScenarioKind::Imaging;
  if (imag && (seen_sections.count("aberration.signal") || seen_sections.count("aberration.idler")))
    p.fail("[aberration.*] sections belong to correlation scenarios");
  if (corr && (seen_sections.count("theta.signal") || seen_sections.count("theta.idler")))
    p.fail("[theta.*] sections belong to imaging scenarios");
  try {
    cfg.validate();
  } catch (const InvalidParameter &e) {
    p.fail(e.what());
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

namespace detail {

inline void write_terms(std::ostream &out, const std::string &section, const PhaseProfile &p) {
  if (p.is_zero())
    return;
  out << "\n[" << section << "]\n";
  for (std::size_t n = 0; n <= p.order(); ++n)
    if (p.derivative(n) != 0.0)
      out << "term = " << n << ' ' << format_double(p.derivative(n)) << ' ' << term_unit(p.domain(), n) << '\n';
}

} // namespace detail

/// Serializes a scenario in the config format; parse_config reads it back
/// to an identical scenario.
inline std::string to_config_text(const ScenarioConfig &c) {
  std::ostringstream out;
  const auto &f = format_double;
  out << "# nlac scenario\n";
  out << "name = " << c.name << '\n';
  if (!c.description.empty())
    out << "description = " << c.description << '\n';
  out << "\n[crystal]\n"
      << "length_mm = " << f(c.crystal.ell) << '\n'
      << "pump_wavelength_mm = " << f(kTwoPi / c.crystal.k_p) << '\n'
      << "alpha = " << f(c.crystal.alpha) << '\n'
      << "pump_angular_width_per_mm = " << f(c.crystal.delta_kappa_p) << '\n'
      << "phase_matching = " << (c.crystal.phase_matching == PhaseMatching::GaussianApprox ? "gaussian" : "sinc")
      << '\n';
  out << "\n[grid]\npoints = " << c.grid.points << '\n'
      << "momentum_extent_per_mm = " << f(c.grid.momentum_extent) << '\n';
  out << "\n[optics]\nfocal_length_mm = " << f(c.focal_length) << '\n'
      << "signal_wavelength_mm = " << f(c.signal_wavelength) << '\n'
      << "idler_wavelength_mm = " << f(c.idler_wavelength) << '\n';
  if (c.kind == ScenarioKind::Correlation) {
    out << "\n[correlation]\nresidual_defocus = " << (c.residual_defocus ? "true" : "false") << '\n';
    detail::write_terms(out, "aberration.signal", c.aberration_signal);
    detail::write_terms(out, "aberration.idler", c.aberration_idler);
  } else {
    out << "\n[imaging]\nbar_width_mm = " << f(c.object.bar_width) << '\n'
        << "period_mm = " << f(c.object.period) << '\n'
        << "bars = " << c.object.n_bars << '\n'
        << "center_mm = " << f(c.object.center) << '\n';
    detail::write_terms(out, "theta.signal", c.theta_signal);
    detail::write_terms(out, "theta.idler", c.theta_idler);
  }
  out << "\n[scan]\nslit_width_mm = " << f(c.scan.slit_width) << '\n'
      << "step_mm = " << f(c.scan.step) << '\n'
      << "range_s_mm = " << f(c.scan.range_s.lo) << ' ' << f(c.scan.range_s.hi) << '\n'
      << "range_i_mm = " << f(c.scan.range_i.lo) << ' ' << f(c.scan.range_i.hi) << '\n'
      << "total_counts = " << f(c.scan.total_counts) << '\n'
      << "noise = " << (c.scan.noise == NoiseModel::Poisson ? "poisson" : "noiseless") << '\n'
      << "seed = " << c.scan.seed << '\n';
  out << "\n[analysis]\nfit = " << (c.analysis.fit ? "true" : "false") << '\n'
      << "monte_carlo_resamples = " << c.analysis.monte_carlo_resamples << '\n'
      << "seed = " << c.analysis.seed << '\n';
  out << "\n[output]\nexport_points = " << c.export_points << '\n';
  if (!c.output_dir.empty())
    out << "directory = " << c.output_dir << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Built-in scenarios. The quadratic and cubic magnitudes are illustrative
// choices sized to the default grid, not measured apparatus values.

inline constexpr double kBuiltinDefocus = 0.01;      // mm^2, phi''(0)
inline constexpr double kBuiltinCubic = 5e-5;        // mm^3, phi'''(0)
inline constexpr double kBuiltinImagingDefocus = 73.7; // mm^-2, theta_i''(0)

struct BuiltinScenario {
  std::string name;
  std::string description;
  std::function<ScenarioConfig()> make;
};

inline const std::vector<BuiltinScenario> &builtin_scenarios() {
  static const std::vector<BuiltinScenario> registry = [] {
    auto corr = [](std::string name, std::string desc, PhaseProfile sig, PhaseProfile idl) {
      ScenarioConfig c;
      c.name = std::move(name);
      c.description = std::move(desc);
      c.kind = ScenarioKind::Correlation;
      c.aberration_signal = std::move(sig);
      c.aberration_idler = std::move(idl);
      return c;
    };
    auto imag = [](std::string name, std::string desc, PhaseProfile sig, PhaseProfile idl) {
      ScenarioConfig c;
      c.name = std::move(name);
      c.description = std::move(desc);
      c.kind = ScenarioKind::Imaging;
      c.theta_signal = std::move(sig);
      c.theta_idler = std::move(idl);
      c.scan.total_counts = 1e6;
      return c;
    };
    const auto none = PhaseProfile::momentum({});
    const auto quad = PhaseProfile::momentum({0, 0, kBuiltinDefocus});
    const auto quad_cubic = PhaseProfile::momentum({0, 0, kBuiltinDefocus, kBuiltinCubic});
    const auto cubic = PhaseProfile::momentum({0, 0, 0, kBuiltinCubic});
    const auto theta = PhaseProfile::position({0, 0, kBuiltinImagingDefocus});
    const auto flat = PhaseProfile::position({});

    std::vector<BuiltinScenario> r;
    auto add = [&r](ScenarioConfig c) {
      auto name = c.name, desc = c.description;
      r.push_back({name, desc, [c] { return c; }});
    };
    add(corr("fig2a", "no aberrations", none, none));
    add(corr("fig2b", "quadratic aberration on the idler only", none, quad));
    add(corr("fig2c", "quadratic aberration on the signal only", quad, none));
    add(corr("fig2d", "quadratic aberration on the idler, nonlocally cancelled on the signal",
             cancellation_partner(quad), quad));
    add(corr("fig3a", "quadratic and cubic aberration on the idler only", none, quad_cubic));
    add(corr("fig3b", "quadratic and cubic on the idler, cubic cancelled on the signal", cubic, quad_cubic));
    add(corr("fig3c", "quadratic and cubic on the idler, all orders cancelled on the signal",
             cancellation_partner(quad_cubic), quad_cubic));
    add(imag("fig4a", "ghost image of three bars without aberrations", flat, flat));
    add(imag("fig4b", "ghost image with image-plane defocus on the idler", flat, theta));
    add(imag("fig4c", "ghost image with the idler defocus cancelled on the signal",
             cancellation_partner(theta), theta));
    return r;
  }();
  return registry;
}

inline std::optional<ScenarioConfig> find_builtin(std::string_view name) {
  for (const auto &b : builtin_scenarios())
    if (b.name == name)
      return b.make();
  return std::nullopt;
}

/// Closest built-in name by edit distance, for error messages.
inline std::string suggest_builtin(std::string_view name) {
  auto distance = [](std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
      prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      cur[0] = i;
      for (std::size_t j = 1; j <= b.size(); ++j)
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
      std::swap(prev, cur);
    }
    return prev[b.size()];
  };
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto &b : builtin_scenarios()) {
    const auto d = distance(name, b.name);
    if (d < best_d) {
      best_d = d;
      best = b.name;
    }
  }
  return best;
}

} // namespace nlac
