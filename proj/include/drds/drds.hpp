#pragma once

// Synthesis of distributionally robust density-steering policies.
//
// Given a linear stochastic system, a steering scenario (initial state, cost
// weights, halfspace risk constraints, terminal distribution target) and a
// Wasserstein ball of disturbance distributions, this module assembles a
// semidefinite program whose optimum is an affine disturbance-feedback policy
// that (a) minimizes the worst-case expected quadratic cost over the ball,
// (b) keeps a CVaR bound of every halfspace constraint nonpositive for every
// distribution in the ball, and (c) steers the terminal state distribution
// into a target covariance while capping how far the ambiguity can push it.
//
// The decision variable for the feedback part is the disturbance-history gain
// Phi = L * calD (inputs as a causal linear map of past noise), which keeps
// every matrix block of the program sparse in the variables.  The
// input-history gain L and state-feedback gain K are recovered exactly from
// Phi after the solve; see recover_policy below.
//
// A plain covariance-steering baseline (nominal expected cost, Gaussian
// chance constraints, same terminal covariance cap, no ambiguity terms) is
// provided for comparison under the same scenario type.

#include <drds/ambiguity.hpp>
#include <drds/conic/solve.hpp>
#include <drds/system.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drds::steer {

// ---------------------------------------------------------------------------
// Scenario description
// ---------------------------------------------------------------------------

// Per-step quadratic cost weights.  `q` and `r` hold either a single matrix
// (used for every step) or one matrix per step k = 0..N-1.  State-error
// weights must be positive semidefinite, input weights positive definite,
// and the input-magnitude weight `beta` strictly positive.
struct CostWeights {
  std::vector<Mat> q;  // n x n, PSD
  std::vector<Mat> r;  // m x m, PD
  double beta = 1.0;

  const Mat& q_at(int k) const { return q.size() == 1 ? q[0] : q.at(static_cast<size_t>(k)); }
  const Mat& r_at(int k) const { return r.size() == 1 ? r[0] : r.at(static_cast<size_t>(k)); }
};

// One risk constraint: require alpha' x_k + offset <= 0 with high confidence
// at every step k listed in `steps` (each in 0..N).  `gamma` in (0, 1) is the
// tail mass of the CVaR bound enforced on the constraint.
struct Halfspace {
  Vec alpha;
  double offset = 0.0;
  double gamma = 0.05;
  std::vector<int> steps;
};

// Full steering scenario.
struct Scenario {
  sys::LinearModel model;
  Vec x0;
  CostWeights cost;
  // Disturbance ambiguity: ball of radius `noise.radius` around a zero-mean
  // Gaussian with covariance noise.center.cov over the stacked disturbance
  // sequence (N*d dimensional).
  amb::AmbiguitySpec noise;
  std::vector<Halfspace> halfspaces;
  // Terminal target: mean must be hit exactly, covariance must stay below
  // terminal_cov, and the worst-case distributional shift of the terminal
  // state over the ball must stay below spread_cap.
  Vec terminal_mean;
  Mat terminal_cov;
  double spread_cap = 0.0;

  void validate() const;
};

// Thrown by the risk-constraint assembly when a constraint on the
// deterministic initial state is already violated, making the program
// infeasible before any optimization.
struct ConstraintInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

// Inverse of the standard normal CDF, solved by Newton's method on the
// erfc-based CDF evaluation (quadratic convergence from x = 0).
inline double norm_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("norm_quantile: p must lie in (0, 1)");
  const double inv_sqrt2 = 0.70710678118654752440;
  const double inv_sqrt2pi = 0.39894228040143267794;
  double x = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double cdf = 0.5 * std::erfc(-x * inv_sqrt2);
    const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
    const double f = cdf - p;
    if (std::abs(f) < 1e-16 || pdf == 0.0) break;
    x -= f / pdf;
  }
  return x;
}

// Worst-case value of E[x' Xi x] over all distributions of x whose Gaussian
// surrogate lies in a type-2 Wasserstein ball of radius eps around
// N(0, sigma):
//
//   sup { tr(Xi S) : W2(N(0,S), N(0,sigma)) <= eps }
//     = min_{lam > lam_max(Xi)}  lam (eps^2 - tr sigma)
//                                + lam^2 tr[sigma (lam I - Xi)^{-1}],
//
// evaluated by eigendecomposition of Xi plus a safeguarded one-dimensional
// minimization (bracket growth + golden-section).  For eps = 0 the value is
// tr(Xi sigma).  Xi must be symmetric positive semidefinite.
inline double worstcase_quadratic_value(const Mat& xi, const Mat& sigma, double eps) {
  if (xi.rows() != xi.cols() || sigma.rows() != sigma.cols() || xi.rows() != sigma.rows())
    throw std::invalid_argument("worstcase_quadratic_value: dimension mismatch");
  const double xi_scale = std::max(1.0, xi.cwiseAbs().maxCoeff());
  require_symmetric(xi, 1e-9 * xi_scale, "worstcase_quadratic_value Xi");
  require_symmetric(sigma, 1e-9 * std::max(1.0, sigma.cwiseAbs().maxCoeff()),
                    "worstcase_quadratic_value sigma");
  if (eps < 0.0) throw std::invalid_argument("worstcase_quadratic_value: eps must be >= 0");

  Vec d;
  Mat u;
  sym_eig(0.5 * (xi + xi.transpose()), d, u);
  const int n = static_cast<int>(d.size());
  if (d(0) < -1e-9 * xi_scale)
    throw std::invalid_argument("worstcase_quadratic_value: Xi is not positive semidefinite");
  if (eps == 0.0) return (xi * sigma).trace();

  Vec s(n);  // s_i = u_i' sigma u_i >= 0
  for (int i = 0; i < n; ++i) {
    const double si = u.col(i).dot(sigma * u.col(i));
    s(i) = std::max(si, 0.0);
    d(i) = std::max(d(i), 0.0);
  }
  const double tr_sigma = sigma.trace();
  const double dmax = d.maxCoeff();

  const auto g = [&](double lam) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += s(i) / (lam - d(i));
    return lam * (eps * eps - tr_sigma) + lam * lam * acc;
  };

  // Bracket: g is convex on (dmax, inf) and g -> +inf at both ends (for
  // eps > 0), so grow `hi` until the value starts increasing.
  const double lo = dmax + std::max(1e-12, 1e-10 * std::max(1.0, dmax));
  double hi = lo + std::max(1.0, lo);
  double ghi = g(hi);
  for (int it = 0; it < 200; ++it) {
    const double nxt = lo + 2.0 * (hi - lo);
    const double gnxt = g(nxt);
    if (gnxt >= ghi) break;
    hi = nxt;
    ghi = gnxt;
  }
  hi = lo + 2.0 * (hi - lo);

  // Golden-section minimization on [lo, hi].
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 300 && (b - a) > 1e-13 * std::max(1.0, b); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = g(x2);
    }
  }
  return std::min(f1, f2);
}

// Closed-form worst-case CVaR bound of the scalar constraint
// alpha' x + offset over a Gelbrich ball of state distributions:
//
//   offset + alpha' mu_hat + tau(gamma) sqrt(alpha' Sigma_hat alpha)
//          + radius |alpha| sqrt(1 + tau(gamma)^2),
//
// where (mu_hat, Sigma_hat, radius) describe the ball and tau is the CVaR
// tail coefficient.  The constraint holds for every member of the ball iff
// this value is <= 0.
inline double halfspace_drcvar_bound(const Vec& alpha, double offset, double gamma,
                                     const amb::AmbiguitySpec& ball) {
  const double tau = amb::cvar_coeff(gamma);
  const double quad = alpha.dot(ball.center.cov * alpha);
  return offset + alpha.dot(ball.center.mean) + tau * std::sqrt(std::max(quad, 0.0)) +
         ball.radius * alpha.norm() * std::sqrt(1.0 + tau * tau);
}

// Evenly splits a joint risk budget over a set of constraint instances; a
// convenience for building Halfspace::gamma values.  Never applied
// implicitly: callers always pass explicit per-constraint levels.
inline double uniform_risk_split(double joint_gamma, int instances) {
  if (instances <= 0) throw std::invalid_argument("uniform_risk_split: instances must be > 0");
  if (!(joint_gamma > 0.0) || !(joint_gamma < 1.0))
    throw std::invalid_argument("uniform_risk_split: joint level must lie in (0, 1)");
  return joint_gamma / instances;
}

// ---------------------------------------------------------------------------
// Scenario validation
// ---------------------------------------------------------------------------

inline void Scenario::validate() const {
  model.validate();
  const int n = model.n, N = model.N;
  const int nd = N * model.d;
  if (x0.size() != n) throw std::invalid_argument("scenario: x0 has wrong dimension");
  if (cost.q.empty() || cost.r.empty())
    throw std::invalid_argument("scenario: cost weights are empty");
  if (cost.q.size() != 1 && static_cast<int>(cost.q.size()) != N)
    throw std::invalid_argument("scenario: need one state weight or one per step");
  if (cost.r.size() != 1 && static_cast<int>(cost.r.size()) != N)
    throw std::invalid_argument("scenario: need one input weight or one per step");
  if (!(cost.beta > 0.0)) throw std::invalid_argument("scenario: beta must be > 0");
  for (int k = 0; k < N; ++k) {
    const Mat& qk = cost.q_at(k);
    const Mat& rk = cost.r_at(k);
    if (qk.rows() != n || qk.cols() != n)
      throw std::invalid_argument("scenario: state weight has wrong dimension");
    if (rk.rows() != model.m || rk.cols() != model.m)
      throw std::invalid_argument("scenario: input weight has wrong dimension");
    const double qscale = std::max(1.0, qk.cwiseAbs().maxCoeff());
    require_symmetric(qk, 1e-9 * qscale, "state weight");
    require_symmetric(rk, 1e-9 * std::max(1.0, rk.cwiseAbs().maxCoeff()), "input weight");
    if (sym_eigvals(qk)(0) < -1e-10 * qscale)
      throw std::invalid_argument("scenario: state weight is not positive semidefinite");
    if (sym_eigvals(rk)(0) <= 0.0)
      throw std::invalid_argument("scenario: input weight is not positive definite");
  }
  if (noise.center.mean.size() != nd || !noise.center.mean.isZero(0.0))
    throw std::invalid_argument("scenario: ambiguity center must be zero-mean over the stacked disturbance");
  if (noise.center.cov.rows() != nd || noise.center.cov.cols() != nd)
    throw std::invalid_argument("scenario: disturbance covariance has wrong dimension");
  if (sym_eigvals(noise.center.cov)(0) <= 0.0)
    throw std::invalid_argument("scenario: disturbance covariance must be positive definite");
  if (noise.radius < 0.0) throw std::invalid_argument("scenario: ambiguity radius must be >= 0");
  if (terminal_mean.size() != n)
    throw std::invalid_argument("scenario: terminal mean has wrong dimension");
  if (terminal_cov.rows() != n || terminal_cov.cols() != n)
    throw std::invalid_argument("scenario: terminal covariance has wrong dimension");
  require_symmetric(terminal_cov, 1e-9 * std::max(1.0, terminal_cov.cwiseAbs().maxCoeff()),
                    "terminal covariance");
  if (sym_eigvals(terminal_cov)(0) <= 0.0)
    throw std::invalid_argument("scenario: terminal covariance must be positive definite");
  if (spread_cap < 0.0) throw std::invalid_argument("scenario: terminal spread cap must be >= 0");
  for (size_t j = 0; j < halfspaces.size(); ++j) {
    const Halfspace& hs = halfspaces[j];
    const std::string tag = "scenario: halfspace " + std::to_string(j);
    if (hs.alpha.size() != n) throw std::invalid_argument(tag + " has wrong normal dimension");
    if (!(hs.alpha.norm() > 0.0)) throw std::invalid_argument(tag + " has a zero normal");
    if (!(hs.gamma > 0.0) || !(hs.gamma < 1.0))
      throw std::invalid_argument(tag + " risk level must lie in (0, 1)");
    if (hs.steps.empty()) throw std::invalid_argument(tag + " lists no steps");
    for (int k : hs.steps)
      if (k < 0 || k > N) throw std::invalid_argument(tag + " lists a step outside 0..N");
  }
}

// ---------------------------------------------------------------------------
// SDP variable layout + shared assembly context
// ---------------------------------------------------------------------------

// Variable handles plus data shared by the assembly stages.  Created by
// declare_sdp_vars, then passed to the assemble_* functions, which only add
// constraint blocks (and, for the cost stage, the objective).
struct SdpVars {
  bool robust = false;
  // True when the scenario carries a positive ambiguity radius.  At radius
  // zero every worst-case term equals its nominal value, which admits an
  // exact second-order encoding; the multiplier certificate and the spread
  // epigraphs exist only for a positive radius (their infimum is otherwise
  // unattained and their dual loses its interior).
  bool has_ball = false;

  conic::VarHandle v;    // feedforward input sequence, length N*m
  conic::VarHandle phi;  // disturbance-history gain, column-major N*m x N*d
  conic::VarHandle lam;  // ambiguity multiplier (positive radius only)
  conic::VarHandle gam;  // worst-case cost certificate, sym N*d (positive radius only)
  conic::VarHandle psi;  // worst-case cost certificate, sym N*d (positive radius only)
  conic::VarHandle t;    // per-step input-magnitude epigraphs, length N
  conic::VarHandle rho;  // per-active-step squared-spread epigraphs (positive radius only)
  std::vector<int> rho_steps;  // ascending union of halfspace steps

  int n = 0, m = 0, d = 0, N = 0;
  int nm = 0, nd = 0, nx = 0;  // N*m, N*d, (N+1)*n

  sys::AugmentedSystem aug;
  Vec xbar0;     // calA x0, length (N+1)n
  Mat sw_sqrt;   // symmetric square root of the disturbance covariance
  Mat qs;        // stacked state weights, (N+1)n (terminal block zero)
  Mat rs;        // stacked input weights, Nm
  Mat pmat;      // calD' Qs calB   (nd x nm)
  Mat c0;        // calD' Qs calD   (nd x nd)
  Mat rt_inv;    // (calB' Qs calB + Rs)^{-1}

  // Unit in which the rho variables are declared: rho_true = rho_unit * rho.
  // Chosen so the declared variable is O(1) at the optimum (the terminal
  // spread cap pins the squared spread near spread_cap / radius).
  double rho_unit = 1.0;
  // Unit in which lambda / Gamma / Psi are declared: true = cert_unit *
  // declared.  The multiplier settles near the top eigenvalue of the
  // closed-loop quadratic-cost kernel, which lives at the squared scale of
  // the noise input matrix and can sit many orders below the rest of the
  // problem data.
  double cert_unit = 1.0;

  int phi_index(int r, int c) const { return c * nm + r; }
  // Phi(r, c) may be nonzero only when the disturbance step of column c
  // precedes the input step of row r (causal feedback on observed noise).
  bool phi_kept(int r, int c) const { return c / d < r / m; }
  int rho_pos(int k) const {
    const auto it = std::lower_bound(rho_steps.begin(), rho_steps.end(), k);
    if (it == rho_steps.end() || *it != k)
      throw std::logic_error("rho_pos: step has no spread epigraph");
    return static_cast<int>(it - rho_steps.begin());
  }
};

namespace detail {

// Row builder for a PSD block in scaled lower-triangular vectorization:
// callers write matrix entries (r >= c); off-diagonal rows carry the sqrt(2)
// svec scaling automatically.
class PsdRows {
 public:
  explicit PsdRows(int dim)
      : dim_(dim), rows_(static_cast<size_t>(svec_len(dim))) {}

  void entry_var(int r, int c, int var, double coef) {
    if (coef != 0.0) at(r, c).add(var, coef * scale(r, c));
  }
  void entry_const(int r, int c, double value) { at(r, c).constant += value * scale(r, c); }
  // Matrix entry (r, c) += coef * H(hr, hc) for a declared symmetric
  // variable H; undoes the svec scaling of the variable coordinate.
  void entry_sym(int r, int c, const conic::VarHandle& h, int hr, int hc, double coef) {
    const double unscale = hr == hc ? 1.0 : 1.0 / std::sqrt(2.0);
    at(r, c).add(h.sym(hr, hc), coef * scale(r, c) * unscale);
  }
  std::vector<conic::AffineExpr>& rows() { return rows_; }

 private:
  conic::AffineExpr& at(int r, int c) {
    return rows_[static_cast<size_t>(svec_index(r, c, dim_))];
  }
  static double scale(int r, int c) { return r == c ? 1.0 : std::sqrt(2.0); }

  int dim_;
  std::vector<conic::AffineExpr> rows_;
};

inline std::vector<int> active_step_union(const std::vector<Halfspace>& halfspaces) {
  std::vector<int> steps;
  for (const Halfspace& hs : halfspaces)
    steps.insert(steps.end(), hs.steps.begin(), hs.steps.end());
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

}  // namespace detail

// Declares the decision variables and the structural constraints that define
// them: causal sparsity of Phi (acausal entries pinned to zero) and
// nonnegativity of the ambiguity multiplier.  With robust = false only the
// variables used by the plain covariance-steering baseline are declared.
inline SdpVars declare_sdp_vars(conic::ConicProblem& p, const Scenario& sc, bool robust = true) {
  SdpVars vars;
  vars.robust = robust;
  vars.has_ball = robust && sc.noise.radius > 0.0;
  vars.n = sc.model.n;
  vars.m = sc.model.m;
  vars.d = sc.model.d;
  vars.N = sc.model.N;
  vars.nm = vars.N * vars.m;
  vars.nd = vars.N * vars.d;
  vars.nx = (vars.N + 1) * vars.n;

  vars.aug = sys::build_augmented(sc.model);
  vars.xbar0 = vars.aug.A * sc.x0;
  vars.sw_sqrt = psd_sqrt(sc.noise.center.cov);

  vars.qs = Mat::Zero(vars.nx, vars.nx);
  vars.rs = Mat::Zero(vars.nm, vars.nm);
  for (int k = 0; k < vars.N; ++k) {
    vars.qs.block(k * vars.n, k * vars.n, vars.n, vars.n) = sc.cost.q_at(k);
    vars.rs.block(k * vars.m, k * vars.m, vars.m, vars.m) = sc.cost.r_at(k);
  }
  const Mat qb = vars.qs * vars.aug.B;
  vars.pmat = vars.aug.D.transpose() * qb;
  vars.c0 = vars.aug.D.transpose() * (vars.qs * vars.aug.D);
  Mat rt = vars.aug.B.transpose() * qb + vars.rs;
  Eigen::LLT<Mat> llt(0.5 * (rt + rt.transpose()));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("declare_sdp_vars: input-weight block is not positive definite");
  Mat rtinv = llt.solve(Mat::Identity(vars.nm, vars.nm));
  vars.rt_inv = 0.5 * (rtinv + rtinv.transpose());

  vars.v = p.add_variable(conic::VarShape::Vector, vars.nm);
  vars.phi = p.add_variable(conic::VarShape::Vector, vars.nm * vars.nd);
  if (vars.has_ball) {
    // Multiplier scale estimate: the top eigenvalue of the open-loop kernel
    // calD' Qs calD bounds the closed-loop one from above, and the optimal
    // multiplier grows like sqrt(tr Sigma_w) / radius when the ball is small
    // relative to the kernel spread.
    const Vec c0_ev = sym_eigvals(0.5 * (vars.c0 + vars.c0.transpose()));
    const double kernel_top = std::max(c0_ev(c0_ev.size() - 1), 0.0);
    const double inflate = 1.0 + std::sqrt(sc.noise.center.cov.trace()) / sc.noise.radius;
    vars.cert_unit = std::clamp(kernel_top * inflate, 1e-8, 1e8);
    vars.lam = p.add_variable(conic::VarShape::Scalar);
    vars.gam = p.add_variable(conic::VarShape::SymMatrix, vars.nd);
    vars.psi = p.add_variable(conic::VarShape::SymMatrix, vars.nd);
  }
  vars.t = p.add_variable(conic::VarShape::Vector, vars.N);
  vars.rho_steps = detail::active_step_union(sc.halfspaces);
  if (vars.has_ball && !vars.rho_steps.empty()) {
    vars.rho = p.add_variable(conic::VarShape::Vector, static_cast<int>(vars.rho_steps.size()));
    // The terminal spread cap pins the squared spreads near spread_cap /
    // radius, so declaring rho in that unit keeps the declared values O(1).
    if (sc.spread_cap > 0.0)
      vars.rho_unit = std::clamp(sc.spread_cap / sc.noise.radius, 1e-8, 1.0);
  }

  // Acausal Phi entries vanish.
  std::vector<conic::AffineExpr> pins;
  pins.reserve(static_cast<size_t>(vars.nm) * vars.nd);
  for (int c = 0; c < vars.nd; ++c)
    for (int r = 0; r < vars.nm; ++r)
      if (!vars.phi_kept(r, c)) {
        conic::AffineExpr e;
        e.add(vars.phi(vars.phi_index(r, c)), 1.0);
        pins.push_back(std::move(e));
      }
  if (!pins.empty()) p.add_cone(conic::ConeKind::Zero, pins);

  if (vars.has_ball) {
    conic::AffineExpr nn;
    nn.add(vars.lam(0), 1.0);
    p.add_cone(conic::ConeKind::NonNeg, {nn});
  }
  return vars;
}

// ---------------------------------------------------------------------------
// Cost stage
// ---------------------------------------------------------------------------

namespace detail {

// t_k >= |v_k| for k = 0..N-1.
inline void add_input_epigraphs(conic::ConicProblem& p, const SdpVars& vars) {
  for (int k = 0; k < vars.N; ++k) {
    std::vector<conic::AffineExpr> rows(static_cast<size_t>(vars.m) + 1);
    rows[0].add(vars.t(k), 1.0);
    for (int i = 0; i < vars.m; ++i)
      rows[static_cast<size_t>(i) + 1].add(vars.v(k * vars.m + i), 1.0);
    p.add_cone(conic::ConeKind::SecondOrder, rows);
  }
}

// s >= |M|_F^2 encoded as |[2 vec(M); 1 - s]| <= 1 + s.
inline void add_frobenius_epigraph(conic::ConicProblem& p, const conic::VarHandle& s,
                                   std::vector<conic::AffineExpr> vec_rows) {
  std::vector<conic::AffineExpr> rows;
  rows.reserve(vec_rows.size() + 2);
  conic::AffineExpr head(1.0);
  head.add(s(0), 1.0);
  rows.push_back(std::move(head));
  for (conic::AffineExpr& e : vec_rows) {
    for (double& cf : e.coef) cf *= 2.0;
    e.constant *= 2.0;
    rows.push_back(std::move(e));
  }
  conic::AffineExpr last(1.0);
  last.add(s(0), -1.0);
  rows.push_back(std::move(last));
  p.add_cone(conic::ConeKind::SecondOrder, rows);
}

// Nominal expected quadratic cost tr[Xi(Phi) Sigma_w] as two squared-
// Frobenius epigraphs s_q >= |Qs^{1/2} (calD + calB Phi) S|_F^2 and
// s_r >= |Rs^{1/2} Phi S|_F^2.  Returns the pair (s_q, s_r).
inline std::pair<conic::VarHandle, conic::VarHandle> add_nominal_cost_epigraphs(
    conic::ConicProblem& p, const SdpVars& vars) {
  const int nd = vars.nd, nm = vars.nm, nx = vars.nx, m = vars.m;
  const Mat& S = vars.sw_sqrt;
  const conic::VarHandle sq = p.add_variable(conic::VarShape::Scalar);
  const conic::VarHandle sr = p.add_variable(conic::VarShape::Scalar);
  {
    const Mat qhalf = psd_sqrt(vars.qs);
    const Mat qd_s = qhalf * vars.aug.D * S;
    const Mat qb = qhalf * vars.aug.B;
    std::vector<conic::AffineExpr> rows(static_cast<size_t>(nx) * nd);
    size_t at = 0;
    for (int c = 0; c < nd; ++c)
      for (int i = 0; i < nx; ++i, ++at) {
        conic::AffineExpr& e = rows[at];
        e.constant = qd_s(i, c);
        for (int jj = 0; jj < nd; ++jj) {
          if (S(jj, c) == 0.0) continue;
          for (int r = 0; r < nm; ++r)
            if (qb(i, r) != 0.0 && vars.phi_kept(r, jj))
              e.add(vars.phi(vars.phi_index(r, jj)), qb(i, r) * S(jj, c));
        }
      }
    add_frobenius_epigraph(p, sq, std::move(rows));
  }
  {
    const Mat rhalf = psd_sqrt(vars.rs);
    std::vector<conic::AffineExpr> rows(static_cast<size_t>(nm) * nd);
    size_t at = 0;
    for (int c = 0; c < nd; ++c)
      for (int i = 0; i < nm; ++i, ++at) {
        conic::AffineExpr& e = rows[at];
        for (int jj = 0; jj < nd; ++jj) {
          if (S(jj, c) == 0.0) continue;
          const int k0 = (i / m) * m;  // input weights couple rows within one step
          for (int r = k0; r < k0 + m; ++r)
            if (rhalf(i, r) != 0.0 && vars.phi_kept(r, jj))
              e.add(vars.phi(vars.phi_index(r, jj)), rhalf(i, r) * S(jj, c));
        }
      }
    add_frobenius_epigraph(p, sr, std::move(rows));
  }
  return {sq, sr};
}

}  // namespace detail

// Sets the worst-case expected quadratic cost objective
//
//   lam (eps^2 - tr Sigma_w) + tr Gamma + beta sum_k t_k
//
// and adds its certificate blocks:
//   * per-step second-order epigraphs  t_k >= |v_k|,
//   * [[Gamma, lam S], [lam S, Psi]] >= 0 with S = Sigma_w^{1/2},
//   * [[lam I - calD' Qs calD - P Phi - Phi' P' - Psi, Phi'],
//      [Phi, (calB' Qs calB + Rs)^{-1}]] >= 0,
// which together dominate the worst-case value of the closed-loop quadratic
// cost over every disturbance distribution in the ball.  At radius zero the
// worst case over the ball is the nominal expectation itself, so the
// certificate is replaced by its exact second-order encoding.
inline void assemble_dr_cost(const Scenario& sc, conic::ConicProblem& p, SdpVars& vars) {
  if (!vars.robust)
    throw std::logic_error("assemble_dr_cost: variables were declared for the baseline program");
  const int nd = vars.nd, nm = vars.nm, N = vars.N;
  const Mat& S = vars.sw_sqrt;
  if (sym_eigvals(sc.noise.center.cov)(0) <= 0.0)
    throw std::invalid_argument(
        "assemble_dr_cost: disturbance covariance must be positive definite");

  if (!vars.has_ball) {
    const auto [sq, sr] = detail::add_nominal_cost_epigraphs(p, vars);
    conic::AffineExpr obj;
    obj.add(sq(0), 1.0);
    obj.add(sr(0), 1.0);
    for (int k = 0; k < N; ++k) obj.add(vars.t(k), sc.cost.beta);
    p.set_objective(obj);
    detail::add_input_epigraphs(p, vars);
    return;
  }

  // lam, Gamma, and Psi are declared in units of cert_unit (their natural
  // magnitude), so the objective carries the unit and both certificate
  // blocks are written congruence-scaled by 1/sqrt(cert_unit): the first one
  // entrywise (its entries are pure certificate terms), the second one on
  // its top-left corner only.  Both keep the block entries O(1).
  const double eps = sc.noise.radius;
  const double tr_sigma = sc.noise.center.cov.trace();
  const double cu = vars.cert_unit;
  conic::AffineExpr obj;
  obj.add(vars.lam(0), (eps * eps - tr_sigma) * cu);
  for (int i = 0; i < nd; ++i) obj.add(vars.gam.sym(i, i), cu);
  for (int k = 0; k < N; ++k) obj.add(vars.t(k), sc.cost.beta);
  p.set_objective(obj);

  detail::add_input_epigraphs(p, vars);

  // [[Gamma, lam S], [lam S, Psi]] >= 0, scaled by 1/cert_unit: identical
  // entry structure in the declared variables.
  {
    detail::PsdRows blk(2 * nd);
    for (int c = 0; c < nd; ++c)
      for (int r = c; r < nd; ++r) blk.entry_sym(r, c, vars.gam, r, c, 1.0);
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        if (S(i, j) != 0.0) blk.entry_var(nd + i, j, vars.lam(0), S(i, j));
    for (int c = 0; c < nd; ++c)
      for (int r = c; r < nd; ++r) blk.entry_sym(nd + r, nd + c, vars.psi, r, c, 1.0);
    p.add_cone(conic::ConeKind::Psd, blk.rows());
  }

  // [[lam I - C0 - P Phi - Phi' P' - Psi, Phi'], [Phi, Rt^{-1}]] >= 0,
  // congruence-scaled by diag(I / sqrt(cert_unit), I): the top-left corner
  // (which lives at the certificate scale) is divided by cert_unit and the
  // off-diagonal corner by its square root.
  {
    const double cu_half = std::sqrt(cu);
    detail::PsdRows blk(nd + nm);
    for (int c = 0; c < nd; ++c) {
      for (int r = c; r < nd; ++r) {
        if (r == c) blk.entry_var(r, c, vars.lam(0), 1.0);
        blk.entry_const(r, c, -vars.c0(r, c) / cu);
        blk.entry_sym(r, c, vars.psi, r, c, -1.0);
        for (int rr = 0; rr < nm; ++rr) {
          if (vars.phi_kept(rr, c))
            blk.entry_var(r, c, vars.phi(vars.phi_index(rr, c)), -vars.pmat(r, rr) / cu);
          if (vars.phi_kept(rr, r))
            blk.entry_var(r, c, vars.phi(vars.phi_index(rr, r)), -vars.pmat(c, rr) / cu);
        }
      }
    }
    for (int c = 0; c < nd; ++c)
      for (int r = 0; r < nm; ++r)
        if (vars.phi_kept(r, c))
          blk.entry_var(nd + r, c, vars.phi(vars.phi_index(r, c)), 1.0 / cu_half);
    for (int c = 0; c < nm; ++c)
      for (int r = c; r < nm; ++r) blk.entry_const(nd + r, nd + c, vars.rt_inv(r, c));
    p.add_cone(conic::ConeKind::Psd, blk.rows());
  }
}

// ---------------------------------------------------------------------------
// Risk stage
// ---------------------------------------------------------------------------

namespace detail {

// Noise-to-state error map at step k as affine expressions in Phi:
// Etil_k = E_k (calD + calB Phi).  Returns the constant part; the Phi part is
// looked up through `bk` (= E_k calB) by callers.
inline Mat error_map_const(int k, const SdpVars& vars) {
  return vars.aug.D.middleRows(k * vars.n, vars.n);
}

}  // namespace detail

// Adds, for every halfspace j and every step k it lists, the conic form of
// the worst-case CVaR bound
//
//   offset + alpha' xbar_k + tau |S Etil_k' alpha|
//          + eps rho_k |alpha| sqrt(1 + tau^2)  <=  0,
//
// as a second-order block, plus one PSD block per active step enforcing
// rho_k >= sigma_max(Etil_k)^2 (shared across halfspaces).  A constraint at
// k = 0 is checked against the deterministic initial state directly and
// throws ConstraintInfeasible when already violated.
inline void assemble_drcvar(const Scenario& sc, conic::ConicProblem& p, SdpVars& vars) {
  if (!vars.robust)
    throw std::logic_error("assemble_drcvar: variables were declared for the baseline program");
  const int n = vars.n, nd = vars.nd, nm = vars.nm;
  const Mat& S = vars.sw_sqrt;
  const double eps = sc.noise.radius;

  for (size_t j = 0; j < sc.halfspaces.size(); ++j) {
    const Halfspace& hs = sc.halfspaces[j];
    const double tau = amb::cvar_coeff(hs.gamma);
    const double spread_coef = eps * hs.alpha.norm() * std::sqrt(1.0 + tau * tau);
    for (int k : hs.steps) {
      const double mean0 = hs.offset + hs.alpha.dot(vars.xbar0.segment(k * n, n));
      if (k == 0) {
        const double scale = std::max(1.0, std::abs(hs.offset) + hs.alpha.cwiseAbs().sum());
        if (mean0 > 1e-12 * scale)
          throw ConstraintInfeasible(
              "halfspace " + std::to_string(j) +
              " is violated by the deterministic initial state at step 0");
      }
      const Mat bk = vars.aug.B.middleRows(k * n, n);
      const Vec wb = bk.transpose() * hs.alpha;                                 // alpha' E_k calB
      const Vec a0 = detail::error_map_const(k, vars).transpose() * hs.alpha;   // alpha' E_k calD
      const Vec tail0 = S.transpose() * a0;

      std::vector<conic::AffineExpr> rows(static_cast<size_t>(nd) + 1);
      rows[0].constant = -mean0;
      for (int r = 0; r < nm; ++r)
        if (wb(r) != 0.0) rows[0].add(vars.v(r), -wb(r));
      if (vars.has_ball)
        rows[0].add(vars.rho(vars.rho_pos(k)), -spread_coef * vars.rho_unit);
      for (int c = 0; c < nd; ++c) {
        conic::AffineExpr& row = rows[static_cast<size_t>(c) + 1];
        row.constant = tau * tail0(c);
        for (int jj = 0; jj < nd; ++jj) {
          if (S(c, jj) == 0.0) continue;
          for (int r = 0; r < nm; ++r)
            if (wb(r) != 0.0 && vars.phi_kept(r, jj))
              row.add(vars.phi(vars.phi_index(r, jj)), tau * S(c, jj) * wb(r));
        }
      }
      p.add_cone(conic::ConeKind::SecondOrder, rows);
    }
  }

  // rho_k >= sigma_max(Etil_k)^2 via [[I, Etil_k], [Etil_k', rho_k I]] >= 0.
  // The block is written in congruence-scaled coordinates diag(I, I/sqrt(u))
  // with u = rho_unit, which keeps its entries O(1) even when the squared
  // spread is tiny: the declared variable is rho_k / u, and every consumer
  // multiplies it back by u.
  if (!vars.has_ball) return;
  const double rs_half = std::sqrt(vars.rho_unit);
  for (int k : vars.rho_steps) {
    const Mat bk = vars.aug.B.middleRows(k * n, n);
    const Mat d0 = detail::error_map_const(k, vars);
    detail::PsdRows blk(n + nd);
    for (int i = 0; i < n; ++i) blk.entry_const(i, i, 1.0);
    for (int c = 0; c < nd; ++c) {
      for (int i = 0; i < n; ++i) {
        blk.entry_const(n + c, i, d0(i, c) / rs_half);
        for (int r = 0; r < nm; ++r)
          if (bk(i, r) != 0.0 && vars.phi_kept(r, c))
            blk.entry_var(n + c, i, vars.phi(vars.phi_index(r, c)), bk(i, r) / rs_half);
      }
      blk.entry_var(n + c, n + c, vars.rho(vars.rho_pos(k)), 1.0);
    }
    p.add_cone(conic::ConeKind::Psd, blk.rows());
  }
}

// ---------------------------------------------------------------------------
// Terminal stage
// ---------------------------------------------------------------------------

// Adds the terminal constraints:
//   * E_N (calA x0 + calB v) = terminal_mean        (exact mean steering),
//   * [[terminal_cov, Etil_N S], [S Etil_N', I]] >= 0
//       (nominal terminal covariance below the target),
//   * when with_spread_cap and eps > 0:
//       [[I, Etil_N], [Etil_N', (spread_cap / eps) I]] >= 0
//       (caps eps * sigma_max(Etil_N)^2, the worst-case distributional
//        shift of the terminal state over the ball).
inline void assemble_terminal(const Scenario& sc, conic::ConicProblem& p, SdpVars& vars,
                              bool with_spread_cap = true) {
  const int n = vars.n, nd = vars.nd, nm = vars.nm, N = vars.N;
  const Mat& S = vars.sw_sqrt;
  const Mat bn = vars.aug.B.middleRows(N * n, n);
  const Mat d0 = detail::error_map_const(N, vars);
  const double eps = sc.noise.radius;

  std::vector<conic::AffineExpr> mean_rows(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    conic::AffineExpr& e = mean_rows[static_cast<size_t>(i)];
    e.constant = vars.xbar0(N * n + i) - sc.terminal_mean(i);
    for (int r = 0; r < nm; ++r)
      if (bn(i, r) != 0.0) e.add(vars.v(r), bn(i, r));
  }
  p.add_cone(conic::ConeKind::Zero, mean_rows);

  {
    // Written as the congruence [[F cov F, F Etil_N S], [S Etil_N' F, I]]
    // with F = terminal_cov^{-1/2} (identity when the target is singular):
    // equivalent to Etil_N Sigma_w Etil_N' <= terminal_cov, but the block
    // entries stay O(1) even for small covariance targets.
    const Mat cov_sym = 0.5 * (sc.terminal_cov + sc.terminal_cov.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(cov_sym);
    Mat f = Mat::Identity(n, n);
    if (es.eigenvalues()(0) > 1e-14 * std::max(1.0, es.eigenvalues()(n - 1)))
      f = es.operatorInverseSqrt();
    const Mat tl = f * cov_sym * f;
    const Mat fbn = f * bn;
    const Mat m0 = f * d0 * S;  // constant part of F Etil_N S
    detail::PsdRows blk(n + nd);
    for (int c = 0; c < n; ++c)
      for (int r = c; r < n; ++r) blk.entry_const(r, c, tl(r, c));
    for (int c = 0; c < nd; ++c) {
      for (int i = 0; i < n; ++i) {
        blk.entry_const(n + c, i, m0(i, c));
        for (int jj = 0; jj < nd; ++jj) {
          if (S(jj, c) == 0.0) continue;
          for (int r = 0; r < nm; ++r)
            if (fbn(i, r) != 0.0 && vars.phi_kept(r, jj))
              blk.entry_var(n + c, i, vars.phi(vars.phi_index(r, jj)), fbn(i, r) * S(jj, c));
        }
      }
      blk.entry_const(n + c, n + c, 1.0);
    }
    p.add_cone(conic::ConeKind::Psd, blk.rows());
  }

  if (!with_spread_cap || !vars.has_ball) return;
  if (sc.spread_cap <= 0.0)
    throw std::invalid_argument(
        "assemble_terminal: positive ambiguity radius with a zero spread cap is unsatisfiable "
        "unless the terminal noise map vanishes");
  {
    // sigma_max(Etil_N)^2 <= spread_cap / eps, written in congruence-scaled
    // coordinates diag(I, I / sqrt(spread_cap / eps)) so that both diagonal
    // blocks are the identity.
    const double cap_half = std::sqrt(sc.spread_cap / eps);
    detail::PsdRows blk(n + nd);
    for (int i = 0; i < n; ++i) blk.entry_const(i, i, 1.0);
    for (int c = 0; c < nd; ++c) {
      for (int i = 0; i < n; ++i) {
        blk.entry_const(n + c, i, d0(i, c) / cap_half);
        for (int r = 0; r < nm; ++r)
          if (bn(i, r) != 0.0 && vars.phi_kept(r, c))
            blk.entry_var(n + c, i, vars.phi(vars.phi_index(r, c)), bn(i, r) / cap_half);
      }
      blk.entry_const(n + c, n + c, 1.0);
    }
    p.add_cone(conic::ConeKind::Psd, blk.rows());
  }
}

// ---------------------------------------------------------------------------
// Solve + policy recovery
// ---------------------------------------------------------------------------

struct Diagnostics {
  double objective = 0.0;
  double lambda = 0.0;            // ambiguity multiplier at the optimum
  double tr_gamma = 0.0;          // trace of the cost certificate
  std::vector<int> rho_steps;     // steps carrying a spread epigraph
  Vec rho;                        // epigraph values, aligned with rho_steps
  double terminal_spread = 0.0;   // eps * sigma_max(Etil_N)^2 at the optimum
};

struct SynthesisResult {
  conic::Solution solution;
  sys::Policy policy;
  Diagnostics diagnostics;
  std::string stage;  // stage that failed; empty on success
  bool ok = false;
};

// Recovers the input-history and state-feedback gains from the
// disturbance-history gain.  The state-feedback gain is reconstructed block
// row by block row: input step k >= 1 reads the states x_0..x_k, whose
// noise-to-state map M_k = [calD + calB Phi] restricted to the first
// (k+1) n rows and k d columns has full column rank, so
// K_k = Phi_k (M_k' M_k)^{-1} M_k' is the unique causal solution with rows in
// the row space of M_k'.  Then L = K (I - calB K)^{-1} satisfies L calD = Phi
// exactly: (I - calB K)(calD + calB Phi) = calD by construction.
inline sys::Policy recover_policy(const Vec& vstar, const Mat& phistar, const SdpVars& vars) {
  const Mat noise_map = vars.aug.D + vars.aug.B * phistar;
  Mat k_gain = Mat::Zero(vars.nm, vars.nx);
  for (int k = 1; k < vars.N; ++k) {
    const int rows = (k + 1) * vars.n;
    const int cols = k * vars.d;
    const Mat msub = noise_map.topLeftCorner(rows, cols);
    Eigen::LLT<Mat> llt(msub.transpose() * msub);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("recover_policy: noise-to-state map lost column rank");
    const Mat phik = phistar.middleRows(k * vars.m, vars.m).leftCols(cols);
    k_gain.block(k * vars.m, 0, vars.m, rows) =
        llt.solve(phik.transpose()).transpose() * msub.transpose();
  }
  sys::Policy pol;
  pol.v = vstar;
  pol.K = k_gain;
  pol.L = sys::gain_k_to_l(k_gain, vars.aug.B);
  return pol;
}

namespace detail {

inline Mat phi_matrix(const conic::Solution& sol, const SdpVars& vars) {
  Mat phi(vars.nm, vars.nd);
  for (int c = 0; c < vars.nd; ++c)
    for (int r = 0; r < vars.nm; ++r) phi(r, c) = sol.primal(vars.phi(vars.phi_index(r, c)));
  return phi;
}

inline double spread_of(const Mat& etil_n, double eps) {
  if (etil_n.size() == 0) return 0.0;
  const Vec ev = sym_eigvals(etil_n * etil_n.transpose());
  return eps * std::max(ev(ev.size() - 1), 0.0);
}

inline SynthesisResult finish_solve(conic::ConicProblem& p, const Scenario& sc, SdpVars& vars,
                                    const conic::SolveSettings& settings) {
  SynthesisResult res;
  res.solution = conic::solve(p, settings);
  if (res.solution.status != conic::SolveStatus::Optimal) {
    res.stage = "conic solve";
    return res;
  }
  try {
    Vec vstar = res.solution.primal.segment(vars.v.offset, vars.nm);
    Mat phistar = phi_matrix(res.solution, vars);
    res.policy = recover_policy(vstar, phistar, vars);
  } catch (const std::exception& e) {
    res.stage = "policy recovery";
    res.solution.status = conic::SolveStatus::NumericalFailure;
    res.solution.message = e.what();
    return res;
  }
  res.diagnostics.objective = res.solution.objective;
  if (vars.has_ball) {
    res.diagnostics.lambda = vars.cert_unit * res.solution.primal(vars.lam(0));
    for (int i = 0; i < vars.nd; ++i)
      res.diagnostics.tr_gamma += vars.cert_unit * res.solution.primal(vars.gam.sym(i, i));
    res.diagnostics.rho_steps = vars.rho_steps;
    res.diagnostics.rho = Vec::Zero(static_cast<Eigen::Index>(vars.rho_steps.size()));
    for (size_t i = 0; i < vars.rho_steps.size(); ++i)
      res.diagnostics.rho(static_cast<Eigen::Index>(i)) =
          vars.rho_unit * res.solution.primal(vars.rho(static_cast<int>(i)));
  }
  const Mat etil_n = sys::error_map(vars.N, res.policy.L, vars.aug);
  res.diagnostics.terminal_spread = spread_of(etil_n, sc.noise.radius);
  res.ok = true;
  return res;
}

}  // namespace detail

// Synthesizes the distributionally robust density-steering policy for the
// scenario.  On success the result carries the recovered policy and solution
// diagnostics; solver outcomes other than Optimal are passed through with
// the failing stage labeled.  Scenario invariant violations throw
// std::invalid_argument.
inline SynthesisResult solve_drds(const Scenario& sc, const conic::SolveSettings& settings = {}) {
  sc.validate();
  conic::ConicProblem p;
  SdpVars vars = declare_sdp_vars(p, sc, /*robust=*/true);
  assemble_dr_cost(sc, p, vars);
  try {
    assemble_drcvar(sc, p, vars);
  } catch (const ConstraintInfeasible& e) {
    SynthesisResult res;
    res.stage = "risk-constraint assembly";
    res.solution.status = conic::SolveStatus::Infeasible;
    res.solution.message = e.what();
    return res;
  }
  assemble_terminal(sc, p, vars, /*with_spread_cap=*/true);
  return detail::finish_solve(p, sc, vars, settings);
}

// Plain covariance-steering baseline under the same scenario: minimizes the
// nominal expected quadratic cost (no ambiguity), enforces each halfspace as
// a Gaussian chance constraint at its risk level, and applies the same
// terminal mean and covariance constraints (no spread cap).  The expected
// quadratic cost is expressed through squared-Frobenius epigraphs of
// Qs^{1/2} (calD + calB Phi) S and Rs^{1/2} Phi S.
inline SynthesisResult solve_baseline_cs(const Scenario& sc,
                                         const conic::SolveSettings& settings = {}) {
  sc.validate();
  conic::ConicProblem p;
  SdpVars vars = declare_sdp_vars(p, sc, /*robust=*/false);
  const int n = vars.n, nd = vars.nd, nm = vars.nm;
  const Mat& S = vars.sw_sqrt;

  const auto [sq, sr] = detail::add_nominal_cost_epigraphs(p, vars);
  conic::AffineExpr obj;
  obj.add(sq(0), 1.0);
  obj.add(sr(0), 1.0);
  for (int k = 0; k < vars.N; ++k) obj.add(vars.t(k), sc.cost.beta);
  p.set_objective(obj);
  detail::add_input_epigraphs(p, vars);

  // Gaussian chance constraints: alpha' xbar_k + offset + z_gamma |S Etil_k' alpha| <= 0.
  try {
    for (size_t j = 0; j < sc.halfspaces.size(); ++j) {
      const Halfspace& hs = sc.halfspaces[j];
      const double z = norm_quantile(1.0 - hs.gamma);
      for (int k : hs.steps) {
        const double mean0 = hs.offset + hs.alpha.dot(vars.xbar0.segment(k * n, n));
        if (k == 0) {
          const double scale = std::max(1.0, std::abs(hs.offset) + hs.alpha.cwiseAbs().sum());
          if (mean0 > 1e-12 * scale)
            throw ConstraintInfeasible(
                "halfspace " + std::to_string(j) +
                " is violated by the deterministic initial state at step 0");
        }
        const Mat bk = vars.aug.B.middleRows(k * n, n);
        const Vec wb = bk.transpose() * hs.alpha;
        const Vec tail0 =
            S.transpose() * (detail::error_map_const(k, vars).transpose() * hs.alpha);
        std::vector<conic::AffineExpr> rows(static_cast<size_t>(nd) + 1);
        rows[0].constant = -mean0;
        for (int r = 0; r < nm; ++r)
          if (wb(r) != 0.0) rows[0].add(vars.v(r), -wb(r));
        for (int c = 0; c < nd; ++c) {
          conic::AffineExpr& row = rows[static_cast<size_t>(c) + 1];
          row.constant = z * tail0(c);
          for (int jj = 0; jj < nd; ++jj) {
            if (S(c, jj) == 0.0) continue;
            for (int r = 0; r < nm; ++r)
              if (wb(r) != 0.0 && vars.phi_kept(r, jj))
                row.add(vars.phi(vars.phi_index(r, jj)), z * S(c, jj) * wb(r));
          }
        }
        p.add_cone(conic::ConeKind::SecondOrder, rows);
      }
    }
  } catch (const ConstraintInfeasible& e) {
    SynthesisResult res;
    res.stage = "risk-constraint assembly";
    res.solution.status = conic::SolveStatus::Infeasible;
    res.solution.message = e.what();
    return res;
  }

  assemble_terminal(sc, p, vars, /*with_spread_cap=*/false);
  return detail::finish_solve(p, sc, vars, settings);
}

}  // namespace drds::steer
