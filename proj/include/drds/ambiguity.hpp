#pragma once

// Moment-ball ambiguity computations over mean-covariance pairs: the Gelbrich
// distance (equal to type-2 Wasserstein for Gaussians), risk coefficients for
// worst-case CVaR, radius bookkeeping for pushforwards and i.i.d. stacking,
// and the closed-loop state ambiguity induced by a disturbance-feedback
// policy.

#include <drds/linalg.hpp>
#include <drds/system.hpp>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace drds::amb {

using drds::Mat;
using drds::Vec;

struct GaussianMoments {
  Vec mean;
  Mat cov;

  GaussianMoments() = default;
  GaussianMoments(Vec mu, Mat sigma) : mean(std::move(mu)), cov(std::move(sigma)) {
    require_symmetric(cov, 1e-10, "GaussianMoments covariance");
    const Vec ev = sym_eigvals(cov);
    if (ev.minCoeff() < -1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("GaussianMoments: covariance has negative eigenvalues");
  }
};

// Transport-cost tag for an ambiguity ball. EuclideanW2 is the plain type-2
// ball; PseudoInverseCost marks a ball measured through the pseudo-inverse of
// a fixed linear map (the image of a noise ball under that map), carried as
// metadata only.
enum class MetricKind { EuclideanW2, PseudoInverseCost };

struct AmbiguitySpec {
  GaussianMoments center;
  double radius = 0.0;
  MetricKind metric = MetricKind::EuclideanW2;
  Mat metric_map;  // populated for PseudoInverseCost
};

// sqrt(|mu1-mu2|^2 + tr[S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2]).
inline double gelbrich_distance(const GaussianMoments& p, const GaussianMoments& q) {
  if (p.mean.size() != q.mean.size())
    throw std::invalid_argument("gelbrich_distance: dimension mismatch");
  const Mat root_p = psd_sqrt(p.cov);
  const Mat inner = root_p * q.cov * root_p;
  const double cross = psd_sqrt(inner).trace();
  const double sq =
      (p.mean - q.mean).squaredNorm() + p.cov.trace() + q.cov.trace() - 2.0 * cross;
  return std::sqrt(std::max(0.0, sq));
}

// Type-2 Wasserstein distance between Gaussians, which attains the Gelbrich
// bound exactly.
inline double gaussian_w2(const GaussianMoments& p, const GaussianMoments& q) {
  return gelbrich_distance(p, q);
}

// Worst-case CVaR coefficient over distributions with fixed first two
// moments: tau = sqrt((1-gamma)/gamma).
inline double cvar_coeff(double gamma) {
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("cvar_coeff: risk level must lie in (0, 1)");
  return std::sqrt((1.0 - gamma) / gamma);
}

// Scale factor eta such that N(0, eta^2 Sigma) sits exactly `radius` away
// from N(0, Sigma): eta = 1 + radius / sqrt(tr Sigma).
inline double maximal_scale(const Mat& sigma, double radius) {
  const double tr = sigma.trace();
  if (!(tr > 0.0)) throw std::invalid_argument("maximal_scale: trace must be positive");
  if (radius < 0.0) throw std::invalid_argument("maximal_scale: radius must be >= 0");
  return 1.0 + radius / std::sqrt(tr);
}

enum class PushforwardMode { PaperExact, OperatorNorm };

// Radius of the image ball under a linear map with largest singular value
// s_max. PaperExact scales by s_max^2; OperatorNorm scales by s_max (the
// contraction factor the norm bound yields). Both variants are exposed;
// callers choose explicitly.
inline double pushforward_radius(const Mat& map, double eps,
                                 PushforwardMode mode = PushforwardMode::PaperExact) {
  if (eps < 0.0) throw std::invalid_argument("pushforward_radius: radius must be >= 0");
  const double smax = sigma_max(map);
  return mode == PushforwardMode::PaperExact ? eps * smax * smax : eps * smax;
}

// Radius for a stack of N independent draws, each within eps_single of its
// nominal marginal.
inline double iid_sequence_radius(double eps_single, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("iid_sequence_radius: need at least one step");
  if (eps_single < 0.0) throw std::invalid_argument("iid_sequence_radius: radius must be >= 0");
  return static_cast<double>(n_steps) * eps_single;
}

// Ambiguity ball for the state at step k under policy (v, L): centered at the
// nominal state with the pushed-forward noise covariance, radius unchanged,
// metric tagged as measured through the step-k noise-to-state map.
inline AmbiguitySpec state_ambiguity(int k, const sys::Policy& pol,
                                     const sys::AugmentedSystem& aug, const AmbiguitySpec& noise,
                                     const Vec& x0) {
  if (k < 0 || k > aug.N) throw std::out_of_range("state_ambiguity: step index out of range");
  const Mat lt = sys::error_map(k, pol.L, aug);
  const Vec xbar = sys::nominal_trajectory(pol.v, x0, aug);
  AmbiguitySpec out;
  out.center = GaussianMoments(xbar.segment(k * aug.n, aug.n),
                               psd_clip(lt * noise.center.cov * lt.transpose()));
  out.radius = noise.radius;
  out.metric = MetricKind::PseudoInverseCost;
  out.metric_map = lt;
  return out;
}

}  // namespace drds::amb
