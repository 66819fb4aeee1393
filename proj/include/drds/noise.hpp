#pragma once

// Disturbance models and the Monte Carlo validation harness.
//
// Provides the four injected-noise families used to stress a synthesized
// policy (nominal Gaussian, worst-case-scaled Gaussian, heavy-tailed
// Student-t, and an arbitrary custom covariance), the Dryden wind-turbulence
// covariance builder, closed-loop batch simulation, and the empirical risk /
// terminal-moment estimators the reports are built from.
//
// Sampling is deterministic for a given (model, seed) and independent of how
// a batch is split: sample i always draws from the substream keyed by
// (seed, i).

#include <drds/ambiguity.hpp>
#include <drds/drds.hpp>
#include <drds/rng.hpp>
#include <drds/system.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace drds::noise {

// ---------------------------------------------------------------------------
// Noise models
// ---------------------------------------------------------------------------

enum class NoiseKind {
  Nominal,        // N(0, base)
  MaximalInBall,  // N(0, eta^2 base): largest-trace Gaussian within the ball
  StudentT,       // multivariate t with covariance matched to base
  Custom,         // N(0, custom)
};

inline const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Nominal: return "nominal";
    case NoiseKind::MaximalInBall: return "maximal";
    case NoiseKind::StudentT: return "student_t";
    case NoiseKind::Custom: return "custom";
  }
  return "?";
}

struct NoiseModel {
  NoiseKind kind = NoiseKind::Nominal;
  Mat base;               // nominal disturbance covariance (Nd x Nd)
  double epsilon = 0.0;   // MaximalInBall: ambiguity radius
  double nu = 3.0;        // StudentT: degrees of freedom (> 2 keeps a finite covariance)
  Mat custom;             // Custom: covariance actually injected
  std::uint64_t seed = 0;

  void validate() const {
    if (base.rows() == 0 || base.rows() != base.cols())
      throw std::invalid_argument("NoiseModel: base covariance must be square and nonempty");
    if (sym_eigvals(0.5 * (base + base.transpose()))(0) < -1e-9 * std::max(1.0, base.norm()))
      throw std::invalid_argument("NoiseModel: base covariance must be PSD");
    if (kind == NoiseKind::MaximalInBall && epsilon < 0.0)
      throw std::invalid_argument("NoiseModel: ambiguity radius must be >= 0");
    if (kind == NoiseKind::StudentT && !(nu > 2.0))
      throw std::invalid_argument(
          "NoiseModel: Student-t degrees of freedom must exceed 2 for a finite covariance");
    if (kind == NoiseKind::Custom &&
        (custom.rows() != base.rows() || custom.cols() != base.cols()))
      throw std::invalid_argument("NoiseModel: custom covariance dimension mismatch");
  }
};

// Draws T samples as the rows of a T x Nd matrix.  Sample i is a pure
// function of (model, seed, i): each sample consumes its own substream, so
// splitting a batch across calls yields bitwise-identical rows.  Student-t
// draws scale a Gaussian draw with shape (nu-2)/nu * base by sqrt(nu / q),
// q ~ chi^2(nu), so the injected covariance equals base.
inline Mat sample_noise(const NoiseModel& model, int t_samples) {
  model.validate();
  if (t_samples < 0) throw std::invalid_argument("sample_noise: negative sample count");
  const int nd = static_cast<int>(model.base.rows());

  Mat factor;
  switch (model.kind) {
    case NoiseKind::Nominal: factor = psd_sqrt(model.base); break;
    case NoiseKind::MaximalInBall: {
      const double eta = amb::maximal_scale(model.base, model.epsilon);
      factor = eta * psd_sqrt(model.base);
      break;
    }
    case NoiseKind::StudentT:
      factor = std::sqrt((model.nu - 2.0) / model.nu) * psd_sqrt(model.base);
      break;
    case NoiseKind::Custom: factor = psd_sqrt(model.custom); break;
  }

  Mat out(t_samples, nd);
  Vec z(nd);
  for (int i = 0; i < t_samples; ++i) {
    Rng rng(substream_seed(model.seed, static_cast<std::uint64_t>(i)));
    for (int j = 0; j < nd; ++j) z(j) = rng.normal();
    Vec row = factor * z;
    if (model.kind == NoiseKind::StudentT)
      row *= std::sqrt(model.nu / rng.chi_square(model.nu));
    out.row(i) = row.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dryden wind-turbulence covariance
// ---------------------------------------------------------------------------

// Gust channels: three linear-velocity components and three angular rates.
enum class DrydenChannel { LonGust, LatGust, VertGust, RollRate, PitchRate, YawRate };

struct DrydenParams {
  double v0 = 1.0;   // mean wind speed [m/s]
  double z = 10.0;   // reference altitude [m]
  double b = 0.34;   // vehicle span [m]
  double dt = 0.1;   // sample step [s]
  // Channel carried by each disturbance component, in component order.
  std::vector<DrydenChannel> channels;
  // Angular-rate gusts enter an attitude state integrated over one step, so
  // their injected sample is dt times the rate draw (covariance dt^2 x).
  bool attitude_scaled_by_dt = true;
  // Spectral quadrature: composite trapezoid over [0, omega_max] rad/s.  The
  // default grid resolves the lateral-channel spectral peak (width v0 / L_v,
  // ~0.013 rad/s at v0 = 1, z = 10) well enough for lag-0 variances to land
  // within a fraction of a percent of the analytic intensities.
  double omega_max = 200.0;
  int quad_points = 50000;

  void validate() const {
    if (!(v0 > 0.0) || !(z > 0.0) || !(b > 0.0))
      throw std::invalid_argument("DrydenParams: v0, z, and b must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("DrydenParams: step must be positive");
    if (!(omega_max > 0.0) || quad_points < 2)
      throw std::invalid_argument("DrydenParams: quadrature settings must be positive");
    if (channels.empty()) throw std::invalid_argument("DrydenParams: no channels given");
  }

  double sigma_w() const { return 0.1 * v0; }
  double sigma_u() const { return sigma_w() / std::pow(0.177 + 0.000823 * z, 0.4); }
  double sigma_v() const { return sigma_u(); }
  double length_w() const { return z; }
  double length_u() const { return z / std::pow(0.177 + 0.000823 * z, 1.2); }
  double length_v() const { return length_u(); }
};

// One-sided power spectral density of a gust channel at angular frequency
// omega >= 0 [rad/s], normalized so the linear channels integrate to their
// squared intensity: int_0^inf Phi(w) dw = sigma^2 exactly.
inline double dryden_psd(DrydenChannel ch, double omega, const DrydenParams& p) {
  p.validate();
  if (omega < 0.0) throw std::invalid_argument("dryden_psd: frequency must be >= 0");
  const double v0 = p.v0;
  const auto lat_vert = [&](double sigma, double len) {
    const double a = len * omega / v0;
    const double d = 1.0 + 4.0 * a * a;
    return 2.0 * sigma * sigma * len / (M_PI * v0) * (1.0 + 12.0 * a * a) / (d * d);
  };
  switch (ch) {
    case DrydenChannel::LonGust: {
      const double a = p.length_u() * omega / v0;
      return 2.0 * p.sigma_u() * p.sigma_u() * p.length_u() / (M_PI * v0) / (1.0 + a * a);
    }
    case DrydenChannel::LatGust: return lat_vert(p.sigma_v(), p.length_v());
    case DrydenChannel::VertGust: return lat_vert(p.sigma_w(), p.length_w());
    case DrydenChannel::RollRate: {
      const double a = 4.0 * p.b * omega / (M_PI * v0);
      const double sw = p.sigma_w();
      return sw * sw / (2.0 * v0 * p.length_w()) * 0.8 *
             std::cbrt(2.0 * M_PI * p.length_w() / (4.0 * p.b)) / (1.0 + a * a);
    }
    case DrydenChannel::PitchRate: {
      const double a = 4.0 * p.b * omega / (M_PI * v0);
      const double r = omega / v0;
      return r * r / (1.0 + a * a) * dryden_psd(DrydenChannel::VertGust, omega, p);
    }
    case DrydenChannel::YawRate: {
      const double a = 3.0 * p.b * omega / (M_PI * v0);
      const double r = omega / v0;
      return r * r / (1.0 + a * a) * dryden_psd(DrydenChannel::LatGust, omega, p);
    }
  }
  throw std::invalid_argument("dryden_psd: unknown channel");
}

namespace detail {

// Autocovariance of one channel at lags 0, dt, ..., (n_lags-1) dt via the
// spectral cosine transform Sigma(tau) = int_0^omega_max Phi(w) cos(w tau) dw
// (composite trapezoid).
inline Vec dryden_autocovariance(DrydenChannel ch, const DrydenParams& p, int n_lags) {
  const int m = p.quad_points;
  const double h = p.omega_max / m;
  Vec psd(m + 1);
  for (int i = 0; i <= m; ++i) psd(i) = dryden_psd(ch, i * h, p);
  Vec out(n_lags);
  for (int lag = 0; lag < n_lags; ++lag) {
    const double tau = lag * p.dt;
    double acc = 0.5 * (psd(0) + psd(m) * std::cos(p.omega_max * tau));
    for (int i = 1; i < m; ++i) acc += psd(i) * std::cos(i * h * tau);
    out(lag) = acc * h;
  }
  return out;
}

}  // namespace detail

inline bool is_angular(DrydenChannel ch) {
  return ch == DrydenChannel::RollRate || ch == DrydenChannel::PitchRate ||
         ch == DrydenChannel::YawRate;
}

// Stacked disturbance covariance over n_steps steps (component layout
// step * d + channel_index): per channel a symmetric Toeplitz block from its
// autocovariance, zero across channels, then an eigenvalue clip at zero so
// the result is exactly PSD.  Angular channels are scaled by dt when the
// params request it (their sample is a step-integrated rate).
inline Mat dryden_covariance(const DrydenParams& p, int n_steps) {
  p.validate();
  if (n_steps < 1) throw std::invalid_argument("dryden_covariance: need at least one step");
  const int d = static_cast<int>(p.channels.size());
  const int nd = n_steps * d;
  Mat sigma = Mat::Zero(nd, nd);
  for (int c = 0; c < d; ++c) {
    Vec auto_cov = detail::dryden_autocovariance(p.channels[static_cast<size_t>(c)], p, n_steps);
    if (p.attitude_scaled_by_dt && is_angular(p.channels[static_cast<size_t>(c)]))
      auto_cov *= p.dt * p.dt;
    for (int k = 0; k < n_steps; ++k)
      for (int j = 0; j < n_steps; ++j) sigma(k * d + c, j * d + c) = auto_cov(std::abs(k - j));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  const Vec clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------
// Closed-loop simulation
// ---------------------------------------------------------------------------

struct Trajectories {
  int n = 0, m = 0, num_steps = 0;
  Mat states;    // T x ((N+1) n); row i holds sample i's stacked state path
  Mat controls;  // T x (N m)

  int samples() const { return static_cast<int>(states.rows()); }
  Vec state_at(int sample, int k) const {
    return states.row(sample).segment(k * n, n).transpose();
  }
};

// Rolls the policy out under each noise sample (rows of `samples`).
inline Trajectories simulate_closed_loop(const sys::Policy& pol, const Vec& x0,
                                         const Mat& samples, const sys::AugmentedSystem& aug) {
  if (samples.cols() != aug.D.cols())
    throw std::invalid_argument("simulate_closed_loop: noise length mismatch");
  Trajectories tr;
  tr.n = aug.n;
  tr.m = static_cast<int>(aug.B.cols()) / aug.N;
  tr.num_steps = aug.N;
  const int t_samples = static_cast<int>(samples.rows());
  tr.states.resize(t_samples, aug.A.rows());
  tr.controls.resize(t_samples, aug.B.cols());
  for (int i = 0; i < t_samples; ++i) {
    const auto [x, u] = sys::apply_policy(pol, x0, samples.row(i).transpose(), aug);
    tr.states.row(i) = x.transpose();
    tr.controls.row(i) = u.transpose();
  }
  return tr;
}

inline Trajectories simulate_closed_loop(const sys::Policy& pol, const steer::Scenario& sc,
                                         const Mat& samples) {
  return simulate_closed_loop(pol, sc.x0, samples, sys::build_augmented(sc.model));
}

// ---------------------------------------------------------------------------
// Empirical risk and terminal-moment estimators
// ---------------------------------------------------------------------------

// Mean of the ceil(gamma T) largest losses: the sample-average estimator of
// the conditional value-at-risk at level gamma.
inline double empirical_cvar(Vec losses, double gamma) {
  if (losses.size() == 0) throw std::invalid_argument("empirical_cvar: empty loss vector");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("empirical_cvar: risk level must lie in (0, 1)");
  const auto t = static_cast<double>(losses.size());
  const auto top = static_cast<Eigen::Index>(std::ceil(gamma * t));
  std::nth_element(losses.data(), losses.data() + (top - 1), losses.data() + losses.size(),
                   std::greater<double>());
  return losses.head(top).mean();
}

struct ViolationRisk {
  // per_step[j](i): violation frequency of halfspace j at its i-th listed step.
  std::vector<Vec> per_step;
  // Fraction of samples violating any listed (halfspace, step) pair.
  double joint = 0.0;
};

inline ViolationRisk violation_risk(const Trajectories& tr,
                                    const std::vector<steer::Halfspace>& halfspaces) {
  const int t_samples = tr.samples();
  ViolationRisk out;
  out.per_step.reserve(halfspaces.size());
  std::vector<char> violated(static_cast<size_t>(std::max(t_samples, 0)), 0);
  for (const steer::Halfspace& hs : halfspaces) {
    Vec freq = Vec::Zero(static_cast<Eigen::Index>(hs.steps.size()));
    for (size_t si = 0; si < hs.steps.size(); ++si) {
      const int k = hs.steps[si];
      int count = 0;
      for (int i = 0; i < t_samples; ++i) {
        const double val = hs.alpha.dot(tr.state_at(i, k)) + hs.offset;
        if (val > 0.0) {
          ++count;
          violated[static_cast<size_t>(i)] = 1;
        }
      }
      freq(static_cast<Eigen::Index>(si)) =
          t_samples > 0 ? static_cast<double>(count) / t_samples : 0.0;
    }
    out.per_step.push_back(std::move(freq));
  }
  int any = 0;
  for (char v : violated) any += v;
  out.joint = t_samples > 0 ? static_cast<double>(any) / t_samples : 0.0;
  return out;
}

struct TerminalReport {
  Vec mean;                   // empirical terminal mean
  Mat cov;                    // unbiased empirical terminal covariance
  double gelbrich_to_target;  // distance of the fitted moments to the target
  double cov_margin;          // max eigenvalue of cov - eta^2 * target cov
  bool within_scaled_target;  // cov_margin <= tolerance
};

// Fits first and second moments of the terminal state and compares them with
// the scenario's terminal target, optionally inflated by eta.
inline TerminalReport terminal_report(const Trajectories& tr, const steer::Scenario& sc,
                                      double eta = 1.0, double tolerance = 0.0) {
  const int t_samples = tr.samples();
  if (t_samples < 2) throw std::invalid_argument("terminal_report: need at least two samples");
  TerminalReport rep;
  const int n = tr.n;
  const Mat terminal = tr.states.rightCols(n);
  rep.mean = terminal.colwise().mean().transpose();
  const Mat centered = terminal.rowwise() - rep.mean.transpose();
  rep.cov = centered.transpose() * centered / (t_samples - 1.0);
  rep.gelbrich_to_target = amb::gelbrich_distance({rep.mean, rep.cov},
                                                  {sc.terminal_mean, sc.terminal_cov});
  const Vec ev = sym_eigvals(rep.cov - eta * eta * sc.terminal_cov);
  rep.cov_margin = ev(ev.size() - 1);
  rep.within_scaled_target = rep.cov_margin <= tolerance;
  return rep;
}

struct MonteCarloReport {
  // cvar[j](i) / violation[j](i): empirical CVaR and violation frequency of
  // halfspace j at its i-th listed step.
  std::vector<Vec> cvar;
  std::vector<Vec> violation;
  double joint_violation = 0.0;
  Vec terminal_mean;
  Mat terminal_cov;
  double terminal_gelbrich = 0.0;
  int samples = 0;
};

// Full validation summary of a trajectory batch against a scenario.
inline MonteCarloReport monte_carlo_report(const Trajectories& tr, const steer::Scenario& sc) {
  MonteCarloReport rep;
  rep.samples = tr.samples();
  ViolationRisk vr = violation_risk(tr, sc.halfspaces);
  rep.violation = std::move(vr.per_step);
  rep.joint_violation = vr.joint;
  for (const steer::Halfspace& hs : sc.halfspaces) {
    Vec cv = Vec::Zero(static_cast<Eigen::Index>(hs.steps.size()));
    for (size_t si = 0; si < hs.steps.size(); ++si) {
      Vec losses(rep.samples);
      for (int i = 0; i < rep.samples; ++i)
        losses(i) = hs.alpha.dot(tr.state_at(i, hs.steps[si])) + hs.offset;
      cv(static_cast<Eigen::Index>(si)) = empirical_cvar(std::move(losses), hs.gamma);
    }
    rep.cvar.push_back(std::move(cv));
  }
  TerminalReport term = terminal_report(tr, sc);
  rep.terminal_mean = std::move(term.mean);
  rep.terminal_cov = std::move(term.cov);
  rep.terminal_gelbrich = term.gelbrich_to_target;
  return rep;
}

}  // namespace drds::noise
