#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlac/aberration.hpp"
#include "nlac/analytics.hpp"
#include "nlac/detection.hpp"
#include "nlac/ghost_imaging.hpp"
#include "nlac/scenario.hpp"
#include "nlac/spdc.hpp"
#include "nlac/transform.hpp"

namespace nlac {

struct CorrelationResult {
  JointDistribution momentum;
  JointDistribution position;
  CoincidenceHistogram histogram_momentum;
  CoincidenceHistogram histogram_position;
  PlusMinusMoments moments_momentum;
  PlusMinusMoments moments_position;
  double anti_diagonal_variance = 0.0; // x_- variance along x_+ = 0
  WitnessReport ideal_witness;         // from the simulated densities
  std::optional<GaussianFitReport> fit_position;
  std::optional<GaussianFitReport> fit_momentum;
  std::optional<WitnessReport> witness; // from the fitted histograms
};

inline CorrelationResult run_correlation(const ScenarioConfig &cfg) {
  cfg.validate();
  if (cfg.kind != ScenarioKind::Correlation)
    throw InvalidParameter("scenario '" + cfg.name + "' is not a correlation scenario");
  const Grid1D axis = cfg.grid.axis();
  auto state = synthesize_state(cfg.crystal, PumpProfile::from_config(cfg.crystal), axis, axis);
  state = apply_aberrations(state, cfg.effective_signal_aberration(), cfg.aberration_idler);

  CorrelationResult r;
  r.momentum = momentum_distribution(state);
  r.position = joint_distribution(to_position_basis(state));
  r.moments_momentum = pm_moments(r.momentum);
  r.moments_position = pm_moments(r.position);
  r.anti_diagonal_variance = anti_diagonal_section(r.position).variance();
  r.ideal_witness = witness_from_widths(r.moments_position.var_minus, r.moments_momentum.var_plus);

  const double fourier_scale = cfg.geometry().scale_signal();
  r.histogram_position = slit_scan(r.position, cfg.scan, 1.0);
  SlitScanConfig mom_scan = cfg.scan;
  mom_scan.seed = cfg.scan.seed + 1; // independent noise for the second measurement
  r.histogram_momentum = slit_scan(r.momentum, mom_scan, fourier_scale);

  if (cfg.analysis.fit) {
    const auto n = cfg.analysis.monte_carlo_resamples;
    auto fit = [&](const CoincidenceHistogram &h, std::uint64_t seed) {
      return n > 0 ? fit_with_errors(h, n, seed) : fit_bivariate_gaussian(h);
    };
    r.fit_position = fit(r.histogram_position, cfg.analysis.seed);
    r.fit_momentum = fit(r.histogram_momentum, cfg.analysis.seed + 1);
    r.witness = evaluate_witness(*r.fit_position, *r.fit_momentum);
  }
  return r;
}

inline GhostScenario ghost_scenario(const ScenarioConfig &cfg) {
  cfg.validate();
  if (cfg.kind != ScenarioKind::Imaging)
    throw InvalidParameter("scenario '" + cfg.name + "' is not an imaging scenario");
  const Grid1D axis = cfg.grid.axis();
  GhostScenario sc;
  sc.crystal = cfg.crystal;
  sc.pump = PumpProfile::from_config(cfg.crystal);
  sc.theta_s = cfg.theta_signal;
  sc.theta_i = cfg.theta_idler;
  sc.object = cfg.object;
  sc.scan = cfg.scan;
  sc.geometry = cfg.geometry();
  sc.grid_s = axis;
  sc.grid_i = axis;
  return sc;
}

// ---------------------------------------------------------------------------
// Output files

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write '" + path.string() + "'");
  return out;
}

/// Cells of `axis` whose centres fall inside [lo, hi], grouped into at most
/// `max_points` consecutive blocks.
struct Blocks {
  std::size_t first = 0, count = 0, width = 1;
  std::size_t size() const { return (count + width - 1) / width; }
};

inline Blocks crop_blocks(const Grid1D &axis, double lo, double hi, std::size_t max_points) {
  const double h = axis.spacing();
  const auto top = static_cast<double>(axis.size() - 1);
  const double first = std::clamp(std::ceil((lo - axis.front()) / h - 1e-9), 0.0, top);
  const double last = std::clamp(std::floor((hi - axis.front()) / h + 1e-9), 0.0, top);
  Blocks b;
  b.first = static_cast<std::size_t>(first);
  b.count = last >= first ? static_cast<std::size_t>(last - first) + 1 : 1;
  b.width = (b.count + max_points - 1) / max_points;
  return b;
}

inline double block_coordinate(const Grid1D &axis, const Blocks &b, std::size_t k) {
  const std::size_t start = b.first + k * b.width;
  const std::size_t end = std::min(start + b.width, b.first + b.count);
  return 0.5 * (axis.coordinate(start) + axis.coordinate(end - 1));
}

inline const char *axis_label(Basis basis) { return basis == Basis::Position ? "x" : "kappa"; }
inline const char *unit_label(Basis basis) { return basis == Basis::Position ? "mm" : "mm^-1"; }

} // namespace detail

/// Probability mass of `d` inside the native window [lo, hi]^2, block-summed
/// to at most `max_points` per axis.
inline void write_density_csv(const std::filesystem::path &path, const JointDistribution &d, double lo,
                              double hi, std::size_t max_points) {
  const auto bs = detail::crop_blocks(d.axis_s, lo, hi, max_points);
  const auto bi = detail::crop_blocks(d.axis_i, lo, hi, max_points);
  auto out = detail::open_output(path);
  const char *a = detail::axis_label(d.basis);
  const char *u = detail::unit_label(d.basis);
  out << a << "_s_" << u << ',' << a << "_i_" << u << ",value\n";
  for (std::size_t ks = 0; ks < bs.size(); ++ks) {
    const std::size_t s0 = bs.first + ks * bs.width, s1 = std::min(s0 + bs.width, bs.first + bs.count);
    for (std::size_t ki = 0; ki < bi.size(); ++ki) {
      const std::size_t i0 = bi.first + ki * bi.width, i1 = std::min(i0 + bi.width, bi.first + bi.count);
      double mass = 0.0;
      for (std::size_t r = s0; r < s1; ++r)
        for (std::size_t c = i0; c < i1; ++c)
          mass += d.mass(r, c);
      out << detail::num(detail::block_coordinate(d.axis_s, bs, ks)) << ','
          << detail::num(detail::block_coordinate(d.axis_i, bi, ki)) << ',' << detail::num(mass) << '\n';
    }
  }
}

/// Histogram in detector millimetres with the fitted rate when available.
inline void write_histogram_csv(const std::filesystem::path &path, const CoincidenceHistogram &h,
                                const std::optional<GaussianFitReport> &fit) {
  auto out = detail::open_output(path);
  out << "detector_s_mm,detector_i_mm,counts" << (fit ? ",fit" : "") << '\n';
  const auto rates = fit ? surface_rates(fit->surface, h) : Matrix<double>();
  for (std::size_t a = 0; a < h.positions_s.size(); ++a)
    for (std::size_t b = 0; b < h.positions_i.size(); ++b) {
      out << detail::num(h.positions_s[a]) << ',' << detail::num(h.positions_i[b]) << ','
          << detail::num(h.counts(a, b));
      if (fit)
        out << ',' << detail::num(rates(a, b));
      out << '\n';
    }
}

/// Rotated (x_+, x_-) density cropped to [-half, half]^2.
inline void write_rotated_csv(const std::filesystem::path &path, const JointDistribution &d, double half,
                              std::size_t max_points) {
  const auto rot = rotate_to_pm(d);
  const JointDistribution as_joint{rot.axis_plus, rot.axis_minus, d.basis, rot.mass};
  const auto bs = detail::crop_blocks(as_joint.axis_s, -half, half, max_points);
  const auto bi = detail::crop_blocks(as_joint.axis_i, -half, half, max_points);
  auto out = detail::open_output(path);
  const char *a = detail::axis_label(d.basis);
  const char *u = detail::unit_label(d.basis);
  out << a << "_plus_" << u << ',' << a << "_minus_" << u << ",value\n";
  for (std::size_t ks = 0; ks < bs.size(); ++ks) {
    const std::size_t s0 = bs.first + ks * bs.width, s1 = std::min(s0 + bs.width, bs.first + bs.count);
    for (std::size_t ki = 0; ki < bi.size(); ++ki) {
      const std::size_t i0 = bi.first + ki * bi.width, i1 = std::min(i0 + bi.width, bi.first + bi.count);
      double mass = 0.0;
      for (std::size_t r = s0; r < s1; ++r)
        for (std::size_t c = i0; c < i1; ++c)
          mass += rot.mass(r, c);
      out << detail::num(detail::block_coordinate(as_joint.axis_s, bs, ks)) << ','
          << detail::num(detail::block_coordinate(as_joint.axis_i, bi, ki)) << ',' << detail::num(mass) << '\n';
    }
  }
}

/// Marginal densities of x_+ and x_- on the rotated axes.
inline void write_marginals_csv(const std::filesystem::path &path, const JointDistribution &d, double half) {
  const auto rot = rotate_to_pm(d);
  std::vector<double> mp(rot.mass.rows(), 0.0), mm(rot.mass.cols(), 0.0);
  for (std::size_t r = 0; r < rot.mass.rows(); ++r)
    for (std::size_t c = 0; c < rot.mass.cols(); ++c) {
      mp[r] += rot.mass(r, c);
      mm[c] += rot.mass(r, c);
    }
  const auto plus = make_marginal(rot.axis_plus, std::move(mp));
  const auto minus = make_marginal(rot.axis_minus, std::move(mm));
  auto out = detail::open_output(path);
  const char *u = detail::unit_label(d.basis);
  out << "coordinate_" << u << ",plus_density,minus_density\n";
  for (std::size_t j = 0; j < plus.density.size(); ++j) {
    const double x = plus.axis.coordinate(j);
    if (std::abs(x) > half)
      continue;
    out << detail::num(x) << ',' << detail::num(plus.density[j]) << ',' << detail::num(minus.density[j]) << '\n';
  }
}

inline void write_trace_csv(const std::filesystem::path &path, const GhostImageResult &g) {
  auto out = detail::open_output(path);
  out << "idler_position_mm,counts\n";
  for (std::size_t k = 0; k < g.positions.size(); ++k)
    out << detail::num(g.positions[k]) << ',' << detail::num(g.rates[k]) << '\n';
}

namespace detail {

class Report {
public:
  void add(const std::string &key, const std::string &value) { out_ << key << " = " << value << '\n'; }
  void add(const std::string &key, double value) { add(key, num(value)); }
  void add(const std::string &key, bool value) { add(key, std::string(value ? "true" : "false")); }
  void add(const std::string &key, const char *value) { add(key, std::string(value)); }
  void add_count(const std::string &key, std::size_t value) { add(key, std::to_string(value)); }
  std::string str() const { return out_.str(); }

private:
  std::ostringstream out_;
};

inline void add_fit(Report &rep, const std::string &prefix, const GaussianFitReport &f) {
  const auto shape = f.surface.shape_parameters();
  rep.add(prefix + ".mean_s", shape[0]);
  rep.add(prefix + ".mean_i", shape[1]);
  rep.add(prefix + ".sd_s", shape[2]);
  rep.add(prefix + ".sd_i", shape[3]);
  rep.add(prefix + ".correlation", shape[4]);
  rep.add(prefix + ".delta_minus_sq", f.delta_minus_sq);
  rep.add(prefix + ".delta_plus_sq", f.delta_plus_sq);
  rep.add(prefix + ".se_delta_minus", f.se_minus);
  rep.add(prefix + ".se_delta_plus", f.se_plus);
  rep.add_count(prefix + ".monte_carlo_resamples", f.n_samples);
  rep.add(prefix + ".total_counts", f.total_counts);
  rep.add(prefix + ".log_likelihood", f.log_likelihood);
  rep.add(prefix + ".iterations", std::to_string(f.iterations));
}

inline void add_witness(Report &rep, const std::string &prefix, const WitnessReport &w) {
  rep.add(prefix + ".delta_x_minus_sq_mm2", w.delta_x_minus_sq);
  rep.add(prefix + ".delta_kappa_plus_sq_per_mm2", w.delta_kappa_plus_sq);
  rep.add(prefix + ".product", w.product);
  rep.add(prefix + ".product_se", w.product_se);
  rep.add(prefix + ".bound", w.bound);
  rep.add(prefix + ".violated", w.violated);
}

} // namespace detail

inline std::string correlation_report(const ScenarioConfig &cfg, const CorrelationResult &r) {
  detail::Report rep;
  rep.add("scenario", cfg.name);
  rep.add("kind", "correlation");
  rep.add_count("grid.points", cfg.grid.points);
  rep.add("grid.momentum_spacing_per_mm", cfg.grid.axis().spacing());
  rep.add("grid.position_spacing_mm", r.position.axis_s.spacing());
  rep.add("noise", cfg.scan.noise == NoiseModel::Poisson ? "poisson" : "noiseless");
  rep.add("seed", std::to_string(cfg.scan.seed));
  rep.add("simulated.position.var_minus_mm2", r.moments_position.var_minus);
  rep.add("simulated.position.var_plus_mm2", r.moments_position.var_plus);
  rep.add("simulated.position.skew_minus", r.moments_position.skew_minus);
  rep.add("simulated.position.anti_diagonal_var_minus_mm2", r.anti_diagonal_variance);
  rep.add("simulated.momentum.var_minus_per_mm2", r.moments_momentum.var_minus);
  rep.add("simulated.momentum.var_plus_per_mm2", r.moments_momentum.var_plus);
  detail::add_witness(rep, "simulated.witness", r.ideal_witness);
  if (r.fit_position)
    detail::add_fit(rep, "fit.position", *r.fit_position);
  if (r.fit_momentum)
    detail::add_fit(rep, "fit.momentum", *r.fit_momentum);
  if (r.witness)
    detail::add_witness(rep, "witness", *r.witness);
  return rep.str();
}

inline std::string imaging_report(const ScenarioConfig &cfg, const GhostImageResult &g) {
  detail::Report rep;
  rep.add("scenario", cfg.name);
  rep.add("kind", "imaging");
  rep.add_count("grid.points", cfg.grid.points);
  rep.add("noise", cfg.scan.noise == NoiseModel::Poisson ? "poisson" : "noiseless");
  rep.add("seed", std::to_string(cfg.scan.seed));
  rep.add("object.period_mm", cfg.object.period);
  rep.add("image.magnification", g.magnification);
  rep.add("image.transmitted_fraction", g.transmitted_mass);
  rep.add("visibility", g.visibility);
  rep.add("visibility.low_modulation", g.low_modulation);
  rep.add("period_valid", g.period_valid);
  if (g.period_valid)
    rep.add("period_estimate_mm", g.period_estimate);
  return rep.str();
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  auto out = detail::open_output(path);
  out << text;
}

/// Runs a scenario and writes its outputs into `out_dir`. Returns the file
/// names written, in order.
inline std::vector<std::string> run_scenario(const ScenarioConfig &cfg, const std::filesystem::path &out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw Error("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  std::vector<std::string> files;
  auto emit = [&](const std::string &name) {
    files.push_back(name);
    return out_dir / name;
  };
  write_text(emit("scenario.cfg"), to_config_text(cfg));

  const double fourier_scale = cfg.geometry().scale_signal();
  const double pad = cfg.scan.slit_width;
  const double det_lo = std::min(cfg.scan.range_s.lo, cfg.scan.range_i.lo) - pad;
  const double det_hi = std::max(cfg.scan.range_s.hi, cfg.scan.range_i.hi) + pad;

  if (cfg.kind == ScenarioKind::Correlation) {
    const auto r = run_correlation(cfg);
    write_density_csv(emit("density_position.csv"), r.position, det_lo, det_hi, cfg.export_points);
    write_density_csv(emit("density_momentum.csv"), r.momentum, det_lo / fourier_scale, det_hi / fourier_scale,
                      cfg.export_points);
    const double half = std::max(std::abs(det_lo), std::abs(det_hi));
    write_rotated_csv(emit("rotated_position.csv"), r.position, half, cfg.export_points);
    write_marginals_csv(emit("marginals_position.csv"), r.position, half);
    write_histogram_csv(emit("histogram_position.csv"), r.histogram_position, r.fit_position);
    write_histogram_csv(emit("histogram_momentum.csv"), r.histogram_momentum, r.fit_momentum);
    write_text(emit("report.txt"), correlation_report(cfg, r));
  } else {
    const auto sc = ghost_scenario(cfg);
    const auto p = ghost_momentum_distribution(sc);
    const auto g = run_ghost_scenario(sc, p);
    write_density_csv(emit("density_momentum.csv"), p, det_lo / fourier_scale, det_hi / fourier_scale,
                      cfg.export_points);
    write_trace_csv(emit("trace.csv"), g);
    write_text(emit("report.txt"), imaging_report(cfg, g));
  }
  return files;
}

} // namespace nlac
