#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlac/detection.hpp"
#include "nlac/errors.hpp"
#include "nlac/matrix.hpp"
#include "nlac/units.hpp"

namespace nlac {

/// Rate surface A exp(-(r - m)^T S^-1 (r - m) / 2) over bin centres.
struct GaussianSurface {
  double amplitude = 1.0;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 3> covariance{1.0, 0.0, 1.0}; // s11, s12, s22

  double operator()(double x, double y) const {
    const double det = covariance[0] * covariance[2] - covariance[1] * covariance[1];
    const double dx = x - mean[0], dy = y - mean[1];
    const double q = (covariance[2] * dx * dx - 2.0 * covariance[1] * dx * dy + covariance[0] * dy * dy) / det;
    return amplitude * std::exp(-0.5 * q);
  }

  /// (mean_1, mean_2, sd_1, sd_2, correlation)
  std::array<double, 5> shape_parameters() const {
    const double s1 = std::sqrt(covariance[0]), s2 = std::sqrt(covariance[2]);
    return {mean[0], mean[1], s1, s2, covariance[1] / (s1 * s2)};
  }
};

/// Poisson log-likelihood sum_b n_b log mu_b - mu_b (dropping log n_b!) of a
/// Gaussian rate surface, in the log-Cholesky parameterization
/// theta = (log A, m1, m2, log L11, L21, log L22) with S = L L^T.
class PoissonGaussianLikelihood {
public:
  static constexpr int kParams = 6;
  using Params = Eigen::Matrix<double, kParams, 1>;
  using Fisher = Eigen::Matrix<double, kParams, kParams>;

  PoissonGaussianLikelihood(std::vector<double> x, std::vector<double> y, std::vector<double> n)
      : x_(std::move(x)), y_(std::move(y)), n_(std::move(n)) {}

  std::size_t bins() const noexcept { return n_.size(); }

  double value(const Params &t) const {
    double ll = 0.0;
    for (std::size_t b = 0; b < n_.size(); ++b) {
      const double lm = log_rate(t, b, nullptr);
      ll += n_[b] * lm - std::exp(lm);
    }
    return ll;
  }

  Params gradient(const Params &t) const {
    Params g = Params::Zero();
    Params d;
    for (std::size_t b = 0; b < n_.size(); ++b) {
      const double mu = std::exp(log_rate(t, b, &d));
      g += (n_[b] - mu) * d;
    }
    return g;
  }

  /// Expected information sum_b mu_b d log mu_b d log mu_b^T.
  Fisher fisher(const Params &t) const {
    Fisher f = Fisher::Zero();
    Params d;
    for (std::size_t b = 0; b < n_.size(); ++b) {
      const double mu = std::exp(log_rate(t, b, &d));
      f.noalias() += mu * d * d.transpose();
    }
    return f;
  }

  /// log mu_b and, optionally, its gradient with respect to theta.
  double log_rate(const Params &t, std::size_t b, Params *d) const {
    const double l11 = std::exp(t[3]), l21 = t[4], l22 = std::exp(t[5]);
    const double z1 = (x_[b] - t[1]) / l11;
    const double z2 = (y_[b] - t[2] - l21 * z1) / l22;
    if (d) {
      (*d)[0] = 1.0;
      (*d)[1] = z1 / l11 - z2 * l21 / (l11 * l22);
      (*d)[2] = z2 / l22;
      (*d)[3] = z1 * z1 - z1 * z2 * l21 / l22;
      (*d)[4] = z1 * z2 / l22;
      (*d)[5] = z2 * z2;
    }
    return t[0] - 0.5 * (z1 * z1 + z2 * z2);
  }

private:
  std::vector<double> x_, y_, n_;
};

struct FitOptions {
  int max_iterations = 500;
  /// Converged when |grad log L| <= tolerance * total counts, measured in
  /// standardized coordinates.
  double gradient_tolerance = 1e-8;
};

struct GaussianFitReport {
  Basis basis = Basis::Position;
  GaussianSurface surface; // native units (mm, or mm^-1 for momentum scans)
  double delta_minus_sq = 0.0;
  double delta_plus_sq = 0.0;
  double se_minus = 0.0; // Monte Carlo standard error of sqrt(delta_minus_sq)
  double se_plus = 0.0;  // Monte Carlo standard error of sqrt(delta_plus_sq)
  std::array<double, 5> parameter_se{};
  std::size_t n_samples = 0; // Monte Carlo resamples behind the errors
  double total_counts = 0.0;
  double log_likelihood = 0.0;
  double relative_gradient = 0.0;
  int iterations = 0;
};

namespace detail {

struct FitProblem {
  std::vector<double> x, y, n;
  double cx = 0, cy = 0, sx = 1, sy = 1;
  double total = 0;
};

inline FitProblem standardized_problem(const CoincidenceHistogram &hist) {
  FitProblem p;
  const double scale = hist.coordinate_scale;
  std::size_t nonzero = 0;
  double mx = 0, my = 0;
  for (std::size_t a = 0; a < hist.positions_s.size(); ++a)
    for (std::size_t b = 0; b < hist.positions_i.size(); ++b) {
      const double c = hist.counts(a, b);
      if (c < 0.0 || !std::isfinite(c))
        throw InvalidParameter("histogram counts must be finite and non-negative");
      p.x.push_back(hist.positions_s[a] / scale);
      p.y.push_back(hist.positions_i[b] / scale);
      p.n.push_back(c);
      p.total += c;
      mx += c * p.x.back();
      my += c * p.y.back();
      nonzero += c > 0.0;
    }
  if (nonzero < 6)
    throw SingularFit("need at least 6 bins with nonzero counts, got " + std::to_string(nonzero));
  mx /= p.total;
  my /= p.total;
  double vx = 0, vy = 0, cxy = 0;
  for (std::size_t k = 0; k < p.n.size(); ++k) {
    vx += p.n[k] * (p.x[k] - mx) * (p.x[k] - mx);
    vy += p.n[k] * (p.y[k] - my) * (p.y[k] - my);
    cxy += p.n[k] * (p.x[k] - mx) * (p.y[k] - my);
  }
  vx /= p.total;
  vy /= p.total;
  cxy /= p.total;
  if (!(vx > 0.0) || !(vy > 0.0) || vx * vy - cxy * cxy <= 1e-12 * vx * vy)
    throw SingularFit("count pattern is degenerate (rank-1 sample covariance)");
  p.cx = mx;
  p.cy = my;
  p.sx = std::sqrt(vx);
  p.sy = std::sqrt(vy);
  for (std::size_t k = 0; k < p.n.size(); ++k) {
    p.x[k] = (p.x[k] - p.cx) / p.sx;
    p.y[k] = (p.y[k] - p.cy) / p.sy;
  }
  return p;
}

inline PoissonGaussianLikelihood::Params initial_guess(const FitProblem &p) {
  double c = 0;
  for (std::size_t k = 0; k < p.n.size(); ++k)
    c += p.n[k] * p.x[k] * p.y[k];
  const double r = c / p.total; // standardized sample correlation
  const double l11 = 1.0, l21 = r, l22 = std::sqrt(1.0 - r * r);
  PoissonGaussianLikelihood::Params t;
  t << 0.0, 0.0, 0.0, std::log(l11), l21, std::log(l22);
  double shape = 0;
  for (std::size_t k = 0; k < p.n.size(); ++k) {
    const double z1 = p.x[k] / l11, z2 = (p.y[k] - l21 * z1) / l22;
    shape += std::exp(-0.5 * (z1 * z1 + z2 * z2));
  }
  t[0] = std::log(p.total / shape);
  return t;
}

struct FitOutcome {
  PoissonGaussianLikelihood::Params theta;
  double log_likelihood;
  double relative_gradient;
  int iterations;
};

/// Levenberg-damped Fisher scoring.
inline FitOutcome maximize(const PoissonGaussianLikelihood &like, PoissonGaussianLikelihood::Params t,
                           double total, const FitOptions &opt) {
  using Params = PoissonGaussianLikelihood::Params;
  double ll = like.value(t);
  Params g = like.gradient(t);
  double lambda = 1e-3;
  const double norm = std::max(total, 1.0);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double rel = g.norm() / norm;
    if (!std::isfinite(rel))
      break;
    if (rel <= opt.gradient_tolerance)
      return {t, ll, rel, it};
    const auto f = like.fisher(t);
    bool accepted = false;
    while (lambda < 1e20) {
      auto damped = f;
      damped.diagonal() += lambda * f.diagonal().cwiseMax(1e-300);
      const Params step = damped.ldlt().solve(g);
      const Params trial = t + step;
      const double ll_trial = like.value(trial);
      const double noise = 1e-13 * (std::abs(ll) + 1.0);
      bool ok = std::isfinite(ll_trial) && ll_trial > ll + noise;
      Params g_trial;
      if (!ok && std::isfinite(ll_trial) && ll_trial >= ll - noise) {
        // Near the optimum the likelihood change drowns in rounding; accept
        // steps that still reduce the gradient.
        g_trial = like.gradient(trial);
        ok = g_trial.norm() < g.norm();
      } else if (ok) {
        g_trial = like.gradient(trial);
      }
      if (ok) {
        t = trial;
        ll = ll_trial;
        g = g_trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted)
      break;
  }
  std::vector<double> last(t.data(), t.data() + t.size());
  throw FitError("bivariate Gaussian fit did not converge (relative gradient " +
                     std::to_string(g.norm() / norm) + ")",
                 std::move(last));
}

} // namespace detail

/// Maximum-likelihood bivariate Gaussian fit of a coincidence histogram
/// under Poisson statistics. Results are in native units (positions divided
/// by the histogram's coordinate_scale).
inline GaussianFitReport fit_bivariate_gaussian(const CoincidenceHistogram &hist,
                                                const FitOptions &opt = {}) {
  const auto p = detail::standardized_problem(hist);
  const PoissonGaussianLikelihood like(p.x, p.y, p.n);
  const auto out = detail::maximize(like, detail::initial_guess(p), p.total, opt);

  const auto &t = out.theta;
  const double l11 = std::exp(t[3]), l21 = t[4], l22 = std::exp(t[5]);
  const double s11 = l11 * l11, s12 = l11 * l21, s22 = l21 * l21 + l22 * l22;

  GaussianFitReport r;
  r.basis = hist.basis;
  r.surface.amplitude = std::exp(t[0]);
  r.surface.mean = {p.cx + p.sx * t[1], p.cy + p.sy * t[2]};
  r.surface.covariance = {s11 * p.sx * p.sx, s12 * p.sx * p.sy, s22 * p.sy * p.sy};
  const auto &c = r.surface.covariance;
  r.delta_minus_sq = 0.5 * (c[0] + c[2] - 2.0 * c[1]);
  r.delta_plus_sq = 0.5 * (c[0] + c[2] + 2.0 * c[1]);
  r.total_counts = p.total;
  r.log_likelihood = out.log_likelihood;
  r.relative_gradient = out.relative_gradient;
  r.iterations = out.iterations;
  return r;
}

/// Expected counts of a Gaussian rate surface on the histogram's bins.
inline Matrix<double> surface_rates(const GaussianSurface &s, const CoincidenceHistogram &hist) {
  Matrix<double> m(hist.positions_s.size(), hist.positions_i.size());
  for (std::size_t a = 0; a < m.rows(); ++a)
    for (std::size_t b = 0; b < m.cols(); ++b)
      m(a, b) = s(hist.positions_s[a] / hist.coordinate_scale, hist.positions_i[b] / hist.coordinate_scale);
  return m;
}

struct MonteCarloErrors {
  double se_minus = 0.0;
  double se_plus = 0.0;
  std::array<double, 5> parameter_se{};
  std::size_t resamples = 0;
  std::size_t failures = 0;
};

inline constexpr std::size_t kMinResamples = 100;
inline constexpr double kMaxFailureFraction = 0.05;

/// Parametric Monte Carlo: redraw every bin as Poisson(fitted rate), refit,
/// and report the spread of the widths sqrt(delta_minus_sq),
/// sqrt(delta_plus_sq) and of the shape parameters.
inline MonteCarloErrors monte_carlo_errors(const CoincidenceHistogram &hist, const GaussianFitReport &fit,
                                           std::size_t n_resamples, std::uint64_t seed = 1,
                                           const FitOptions &opt = {}) {
  if (n_resamples < kMinResamples)
    throw InvalidParameter("monte_carlo_errors needs at least " + std::to_string(kMinResamples) +
                           " resamples");
  const auto rates = surface_rates(fit.surface, hist);
  struct Sample {
    bool ok = false;
    std::array<double, 7> v{};
  };
  std::vector<Sample> samples(n_resamples);
  parallel_for(n_resamples, [&](std::size_t k) {
    CoincidenceHistogram h = hist;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), 0x6d63u};
    std::mt19937_64 rng(seq);
    for (std::size_t b = 0; b < rates.size(); ++b) {
      const double mu = rates.values()[b];
      h.counts.values()[b] = mu > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(mu)(rng)) : 0.0;
    }
    try {
      const auto f = fit_bivariate_gaussian(h, opt);
      const auto shape = f.surface.shape_parameters();
      samples[k].v = {std::sqrt(f.delta_minus_sq), std::sqrt(f.delta_plus_sq), shape[0], shape[1],
                      shape[2], shape[3], shape[4]};
      samples[k].ok = true;
    } catch (const FitError &) {
    }
  });

  MonteCarloErrors out;
  out.resamples = n_resamples;
  std::array<double, 7> mean{};
  std::size_t good = 0;
  for (const auto &s : samples) {
    if (!s.ok) {
      ++out.failures;
      continue;
    }
    ++good;
    for (std::size_t j = 0; j < 7; ++j)
      mean[j] += s.v[j];
  }
  if (static_cast<double>(out.failures) > kMaxFailureFraction * static_cast<double>(n_resamples) || good < 2)
    throw UnstableFit(std::to_string(out.failures) + " of " + std::to_string(n_resamples) +
                      " Monte Carlo refits failed");
  for (auto &m : mean)
    m /= static_cast<double>(good);
  std::array<double, 7> sd{};
  for (const auto &s : samples)
    if (s.ok)
      for (std::size_t j = 0; j < 7; ++j)
        sd[j] += (s.v[j] - mean[j]) * (s.v[j] - mean[j]);
  for (auto &v : sd)
    v = std::sqrt(v / static_cast<double>(good - 1));
  out.se_minus = sd[0];
  out.se_plus = sd[1];
  for (std::size_t j = 0; j < 5; ++j)
    out.parameter_se[j] = sd[j + 2];
  return out;
}

/// Fit plus Monte Carlo errors in one report.
inline GaussianFitReport fit_with_errors(const CoincidenceHistogram &hist, std::size_t n_resamples,
                                         std::uint64_t seed, const FitOptions &opt = {}) {
  auto fit = fit_bivariate_gaussian(hist, opt);
  const auto mc = monte_carlo_errors(hist, fit, n_resamples, seed, opt);
  fit.se_minus = mc.se_minus;
  fit.se_plus = mc.se_plus;
  fit.parameter_se = mc.parameter_se;
  fit.n_samples = mc.resamples;
  return fit;
}

} // namespace nlac
