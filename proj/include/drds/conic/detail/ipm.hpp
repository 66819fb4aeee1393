#pragma once

// Primal-dual interior-point solver for the standard-form problem
//
//   minimize    c'x
//   subject to  A x = b,   G x + s = h,   s in K,
//
// over the self-dual embedding (x, y, z, s, tau, kappa) with Nesterov-Todd
// scalings and a Mehrotra predictor-corrector step. Residuals:
//
//   rx = A'y + G'z + c tau      ry = A x - b tau
//   rz = G x + s - h tau        rt = kappa + c'x + b'y + h'z
//
// Each Newton solve reduces to the quasidefinite system
//
//   [ 0  A'  G'  ] [ux]   [bx]
//   [ A  0   0   ] [uy] = [by]      =>   H ux + A' uy = bx + G' W^{-2} bz
//   [ G  0  -W'W ] [uz]   [bz]           A ux          = by
//                                        uz = W^{-2} (G ux - bz)
//
// with H = G' W^{-2} G assembled by SchurAssembler, factored densely, and the
// small equality block handled through the Schur complement A H^{-1} A'.
// Solutions are polished by operator-level iterative refinement, so a mildly
// regularized factorization still produces accurate directions.
//
// Near a degenerate optimal face the normal-equations matrix can become
// singular to working precision before the duality-gap target is met. The
// loop therefore tracks the best iterate seen (by worst-of primal residual,
// dual residual, relative gap) and monitors the accuracy actually achieved by
// each KKT solve; when directions can no longer be computed to ~4 digits, it
// stops and classifies the best iterate instead of stepping into noise. A
// best iterate that is feasible to full tolerance but misses the gap target
// by less than 100x is reported Optimal with an explicit reduced-accuracy
// message and truthful residual fields; anything worse is NumericalFailure.
//
// The solver is one-shot: each call starts from the cold interior point, and
// no state is carried between calls.

#include <drds/conic/detail/schur.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace drds::conic::detail {

class IpmSolver {
 public:
  Solution run(const ConicProblem& prob, const SolveSettings& st) {
    st_ = st;
    Solution out;
    sf_ = build_std_form(prob, st.feas_tol);
    if (sf_.decided) {
      out.status = sf_.decided_status;
      out.message = sf_.decided_msg;
      if (sf_.decided_status == SolveStatus::Optimal) {
        out.primal = sf_.decided_primal;
        out.objective = sf_.decided_obj;
      }
      return out;
    }

    n_ = sf_.n;
    p_ = sf_.rows_a();
    m_ = sf_.rows_g();

    cones_.clear();
    nu_ = 0;
    int off = 0;
    for (const auto& [kind, rows] : sf_.cones) {
      ConeCtx cx;
      cx.init(kind, off, rows);
      nu_ += cx.degree();
      off += rows;
      cones_.push_back(std::move(cx));
    }
    assembler_.setup(sf_);
    H_.resize(n_, n_);
    if (p_ > 0) {
      X_.resize(n_, p_);
      SA_.resize(p_, p_);
    }

    x_ = Vec::Zero(n_);
    y_ = Vec::Zero(p_);
    z_ = Vec::Zero(m_);
    s_ = Vec::Zero(m_);

    // --- initial point: W = I solves against (0, b, h) and (-c, 0, 0) -------
    for (auto& cx : cones_) cx.set_identity();
    if (!factor(true)) return numerical(out, "initial factorization failed");
    {
      Vec ux(n_), uy(p_), uz(m_);
      solve3(Vec::Zero(n_), sf_.b, sf_.h, ux, uy, uz);
      x_ = ux;
      s_ = -uz;
      solve3(-sf_.c, Vec::Zero(p_), Vec::Zero(m_), ux, uy, uz);
      y_ = uy;
      z_ = uz;
      push_interior(s_);
      push_interior(z_);
    }
    tau_ = 1.0;
    kappa_ = 1.0;

    const double resx0 = std::max(1.0, sf_.c.norm());
    const double resy0 = std::max(1.0, sf_.b.norm());
    const double resz0 = std::max(1.0, sf_.h.norm());

    Vec rx(n_), ry(p_), rz(m_);
    Vec dl(m_), lsolved(m_), wtl(m_), wdz(m_);
    Vec ux(n_), uy(p_), uz(m_);
    Vec dx(n_), dy(p_), dz(m_), ds(m_);
    Vec dst(m_), dzt(m_);       // scaled step directions
    Vec dst_a(m_), dzt_a(m_);   // affine copies for the corrector
    Vec vx(n_), vy(p_), vz(m_);

    double pres = 0, dres = 0, gap = 0;
    int iter = 0;
    for (iter = 0; iter <= st.max_iter; ++iter) {
      // Residuals and stopping tests (on the tau-normalized iterate).
      rx = sf_.mul_at(y_) + sf_.mul_gt(z_) + sf_.c * tau_;
      ry = sf_.mul_a(x_) - sf_.b * tau_;
      rz = sf_.mul_g(x_) + s_ - sf_.h * tau_;
      const double rt = kappa_ + sf_.c.dot(x_) + sf_.b.dot(y_) + sf_.h.dot(z_);

      const double pcost = sf_.c.dot(x_) / tau_;
      pres = std::max(ry.norm() / resy0, rz.norm() / resz0) / tau_;
      dres = rx.norm() / resx0 / tau_;
      gap = s_.dot(z_) / (tau_ * tau_);

      if (st.verbose)
        std::fprintf(stderr, "ipm %3d: pcost % .6e gap %.3e pres %.3e dres %.3e\n", iter,
                     pcost + sf_.cconst, gap, pres, dres);

      // Snapshot score mirrors the degraded-exit acceptance: primal
      // feasibility at full tolerance, dual residual and gap at 100x.
      const double merit =
          std::max({pres / st.feas_tol, dres / (100.0 * st.feas_tol),
                    gap / (100.0 * st.gap_tol * std::max(1.0, std::abs(pcost)))});
      if (merit < best_merit_) {
        best_merit_ = merit;
        best_x_ = x_;
        best_tau_ = tau_;
        best_pres_ = pres;
        best_dres_ = dres;
        best_gap_ = gap;
        best_pcost_ = pcost;
        best_iter_ = iter;
        have_best_ = true;
      }

      if (pres <= st.feas_tol && dres <= st.feas_tol &&
          gap <= st.gap_tol * std::max(1.0, std::abs(pcost))) {
        out.status = SolveStatus::Optimal;
        out.primal = expand_solution(sf_, x_ / tau_);
        out.objective = pcost + sf_.cconst;
        out.iterations = iter;
        out.primal_residual = pres;
        out.dual_residual = dres;
        out.gap = gap;
        out.message = "optimal";
        return out;
      }
      const double hz_by = -(sf_.h.dot(z_) + sf_.b.dot(y_));
      if (hz_by > 0.0) {
        const double pinf = (sf_.mul_at(y_) + sf_.mul_gt(z_)).norm() / resx0 / hz_by;
        if (pinf <= st.feas_tol) {
          out.status = SolveStatus::Infeasible;
          out.iterations = iter;
          out.message = "primal infeasibility certificate found";
          return out;
        }
      }
      const double cx = sf_.c.dot(x_);
      if (cx < 0.0) {
        const double dinf = std::max(sf_.mul_a(x_).norm() / resy0,
                                     (sf_.mul_g(x_) + s_).norm() / resz0) /
                            (-cx);
        if (dinf <= st.feas_tol) {
          out.status = SolveStatus::Unbounded;
          out.iterations = iter;
          out.message = "unboundedness certificate found";
          return out;
        }
      }
      if (iter == st.max_iter) break;

      // Scaling, factorization, and the tau-column solve.
      for (auto& cx2 : cones_) {
        if (!cx2.compute_scaling(s_.data() + cx2.offset, z_.data() + cx2.offset))
          return finish(out, "iterate left the cone interior");
      }
      const double mu = (s_.dot(z_) + tau_ * kappa_) / (nu_ + 1);
      if (!factor(false)) return finish(out, "KKT factorization failed");
      solve_quality_ = 0.0;
      solve3(-sf_.c, sf_.b, sf_.h, vx, vy, vz);
      const double denom = kappa_ / tau_ - (sf_.c.dot(vx) + sf_.b.dot(vy) + sf_.h.dot(vz));
      if (!(denom > 0.0)) return finish(out, "self-dual system lost definiteness");

      auto direction = [&](double theta, const Vec& dlam, double dkap_rhs, double& dtau,
                           double& dkap) {
        for (const auto& cx2 : cones_) {
          cx2.jordan_lsolve(dlam.data() + cx2.offset, lsolved.data() + cx2.offset);
          cx2.apply_wt(lsolved.data() + cx2.offset, wtl.data() + cx2.offset);
        }
        solve3(-theta * rx, -theta * ry, -theta * rz - wtl, ux, uy, uz);
        const double dot3 = sf_.c.dot(ux) + sf_.b.dot(uy) + sf_.h.dot(uz);
        dtau = (theta * rt + dkap_rhs / tau_ + dot3) / denom;
        dx = ux + dtau * vx;
        dy = uy + dtau * vy;
        dz = uz + dtau * vz;
        for (const auto& cx2 : cones_)
          cx2.apply_w(dz.data() + cx2.offset, wdz.data() + cx2.offset);
        dst = lsolved - wdz;  // W^{-T} ds
        dzt = wdz;            // W dz
        for (const auto& cx2 : cones_)
          cx2.apply_wt(dst.data() + cx2.offset, ds.data() + cx2.offset);
        dkap = (dkap_rhs - kappa_ * dtau) / tau_;
      };

      auto max_alpha = [&](double dtau, double dkap) {
        double a = kInf;
        for (const auto& cx2 : cones_) {
          a = std::min(a, cx2.max_step(dst.data() + cx2.offset));
          a = std::min(a, cx2.max_step(dzt.data() + cx2.offset));
        }
        if (dtau < 0.0) a = std::min(a, -tau_ / dtau);
        if (dkap < 0.0) a = std::min(a, -kappa_ / dkap);
        return a;
      };

      // Predictor.
      for (const auto& cx2 : cones_) cx2.jordan_neg_sq(dl.data() + cx2.offset);
      double dtau_a = 0, dkap_a = 0;
      direction(1.0, dl, -tau_ * kappa_, dtau_a, dkap_a);
      const double alpha_aff = std::min(1.0, max_alpha(dtau_a, dkap_a));
      double sigma = std::pow(1.0 - alpha_aff, 3);
      sigma = std::min(1.0, std::max(0.0, sigma));
      dst_a = dst;
      dzt_a = dzt;

      // Corrector: dl = -lambda o lambda - dst_a o dzt_a + sigma mu e.
      for (const auto& cx2 : cones_) {
        cx2.jordan_neg_sq(dl.data() + cx2.offset);
        cx2.jordan_prod(dst_a.data() + cx2.offset, dzt_a.data() + cx2.offset,
                        wdz.data() + cx2.offset);
      }
      dl -= wdz;
      for (const auto& cx2 : cones_) cx2.add_identity(dl.data() + cx2.offset, sigma * mu);
      const double dkap_rhs = -tau_ * kappa_ - dtau_a * dkap_a + sigma * mu;
      double dtau = 0, dkap = 0;
      direction(1.0 - sigma, dl, dkap_rhs, dtau, dkap);

      // Degraded KKT solves are still worth stepping along: with a
      // rank-deficient constraint matrix the regularized solves are exactly
      // what carry the iterate toward an unboundedness or infeasibility
      // certificate. Stop only when degraded solves persist without any
      // improvement of the best iterate's merit.
      if (!dx.allFinite() || !dy.allFinite() || !ds.allFinite() || !dz.allFinite() ||
          !std::isfinite(dtau) || !std::isfinite(dkap))
        return finish(out, "KKT solves lost accuracy");
      if (solve_quality_ > 1e-2) {
        if (degraded_streak_ == 0) degraded_merit_ = best_merit_;
        ++degraded_streak_;
        if (best_merit_ < 0.99 * degraded_merit_) {
          degraded_streak_ = 1;
          degraded_merit_ = best_merit_;
        } else if (degraded_streak_ >= 8) {
          return finish(out, "KKT solves lost accuracy");
        }
      } else {
        degraded_streak_ = 0;
      }

      const double amax = max_alpha(dtau, dkap);
      const double alpha = std::min(1.0, 0.99 * amax);
      if (!(alpha > 1e-13)) return finish(out, "step length collapsed");

      x_ += alpha * dx;
      y_ += alpha * dy;
      z_ += alpha * dz;
      s_ += alpha * ds;
      tau_ += alpha * dtau;
      kappa_ += alpha * dkap;
      if (!(tau_ > 0.0) || !(kappa_ > 0.0))
        return finish(out, "self-dual variables left the positive ray");
    }
    return finish(out, "maximum iterations reached");
  }

 private:
  Solution numerical(Solution& out, const std::string& msg, int iter = 0, double pres = 0,
                     double dres = 0, double gap = 0) {
    out.status = SolveStatus::NumericalFailure;
    out.message = msg;
    out.iterations = iter;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;
    if (n_ > 0 && tau_ > 0.0 && x_.size() == n_) {
      out.primal = expand_solution(sf_, x_ / tau_);
      out.objective = sf_.c.dot(x_) / tau_ + sf_.cconst;
    }
    return out;
  }

  // Terminal classification when the loop cannot continue: restore the best
  // iterate and decide what it proves. Primal feasibility at full tolerance
  // with dual residual and duality gap within 100x of target is accepted as
  // Optimal with an explicit reduced-accuracy message; residual fields always
  // report the truth.
  Solution finish(Solution& out, const std::string& reason) {
    if (!have_best_) return numerical(out, reason);
    out.iterations = best_iter_;
    out.primal_residual = best_pres_;
    out.dual_residual = best_dres_;
    out.gap = best_gap_;
    out.primal = expand_solution(sf_, best_x_ / best_tau_);
    out.objective = best_pcost_ + sf_.cconst;
    if (best_merit_ <= 1.0) {
      out.status = SolveStatus::Optimal;
      out.message = "optimal (reduced accuracy: " + reason + ")";
    } else {
      out.status = SolveStatus::NumericalFailure;
      out.message = reason;
    }
    return out;
  }

  // Pushes a point strictly inside the cone product: v += (1 + t) e whenever
  // the smallest cone eigenvalue t' = -t is not clearly positive.
  void push_interior(Vec& v) {
    double worst = -kInf;
    for (const auto& cx : cones_) worst = std::max(worst, -cx.min_eig(v.data() + cx.offset));
    if (worst >= -1e-8 * std::max(1.0, v.norm()))
      for (const auto& cx : cones_) cx.add_identity(v.data() + cx.offset, 1.0 + worst);
  }

  // Assembles and factors H (with escalating diagonal regularization on
  // failure), then prepares the equality Schur complement.
  bool factor(bool first) {
    (void)first;
    // Profiling hook: DRDS_IPM_TIME=1 prints per-factorization stage times.
    static const bool timing = std::getenv("DRDS_IPM_TIME") != nullptr;
    using ProfClock = std::chrono::steady_clock;
    const auto prof = [](ProfClock::time_point a) {
      return std::chrono::duration<double>(ProfClock::now() - a).count();
    };
    double reg = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      const auto t_asm = ProfClock::now();
      assembler_.assemble(cones_, H_);
      if (timing) std::fprintf(stderr, "[ipm] schur assemble %.2fs\n", prof(t_asm));
      double dmax = 0.0;
      for (int i = 0; i < n_; ++i) dmax = std::max(dmax, H_(i, i));
      if (dmax <= 0.0) dmax = 1.0;
      bool need_reg = reg > 0.0;
      for (int i = 0; i < n_ && !need_reg; ++i)
        if (H_(i, i) <= 0.0) need_reg = true;
      if (need_reg && reg == 0.0) reg = 1e-11;
      if (reg > 0.0) H_.diagonal().array() += reg * dmax;
      const auto t_chol = ProfClock::now();
      const bool chol_ok = chol_inplace(H_);
      if (timing) std::fprintf(stderr, "[ipm] cholesky %.2fs ok=%d\n", prof(t_chol), chol_ok);
      if (chol_ok) {
        if (p_ == 0) return true;
        // X = H^{-1} A', SA = chol(A X).
        for (int r = 0; r < p_; ++r) {
          X_.col(r).setZero();
          for (long long t = sf_.a_ptr[r]; t < sf_.a_ptr[r + 1]; ++t)
            X_(sf_.a_col[static_cast<size_t>(t)], r) = sf_.a_val[static_cast<size_t>(t)];
        }
        chol_solve_ptr(H_, X_.data(), p_);
        SA_.resize(p_, p_);
        for (int r = 0; r < p_; ++r) SA_.col(r) = sf_.mul_a(X_.col(r));
        SA_ = 0.5 * (SA_ + SA_.transpose()).eval();
        Mat sa_try = SA_;
        double sreg = 0.0;
        for (int at2 = 0; at2 < 3; ++at2) {
          if (chol_inplace(sa_try)) {
            SA_ = sa_try;
            return true;
          }
          sreg = sreg == 0.0 ? 1e-12 : sreg * 1e4;
          sa_try = SA_;
          sa_try.diagonal().array() += sreg * std::max(1.0, SA_.diagonal().maxCoeff());
        }
        return false;
      }
      reg = reg == 0.0 ? 1e-11 : reg * 100.0;
    }
    return false;
  }

  void w2inv_apply(const Vec& in, Vec& out) const {
    for (const auto& cx : cones_) cx.apply_w2inv(in.data() + cx.offset, out.data() + cx.offset);
  }
  void w2_apply(const Vec& in, Vec& out) const {
    for (const auto& cx : cones_) cx.apply_w2(in.data() + cx.offset, out.data() + cx.offset);
  }

  // One factored-system solve; `raw` skips refinement.
  void solve3_raw(const Vec& bx, const Vec& by, const Vec& bz, Vec& ux, Vec& uy, Vec& uz) const {
    Vec t1(m_);
    w2inv_apply(bz, t1);
    Vec f = bx + sf_.mul_gt(t1);
    chol_solve_ptr(H_, f.data(), 1);
    if (p_ > 0) {
      uy = sf_.mul_a(f) - by;
      chol_solve_ptr(SA_, uy.data(), 1);
      ux = f - X_ * uy;
    } else {
      uy.resize(0);
      ux = f;
    }
    Vec g = sf_.mul_g(ux) - bz;
    w2inv_apply(g, uz);
  }

  void solve3(const Vec& bx, const Vec& by, const Vec& bz, Vec& ux, Vec& uy, Vec& uz) {
    solve3_raw(bx, by, bz, ux, uy, uz);
    const double bnorm = std::max({1.0, inf_norm(bx), inf_norm(by), inf_norm(bz)});
    Vec e1(n_), e2(p_), e3(m_), w2z(m_);
    Vec cx1(n_), cy1(p_), cz1(m_);
    Vec bestx = ux, besty = uy, bestz = uz;
    double best_res = kInf;
    for (int round = 0; round <= 4; ++round) {
      w2_apply(uz, w2z);
      e1 = bx - (sf_.mul_at(uy) + sf_.mul_gt(uz));
      e2 = by - sf_.mul_a(ux);
      e3 = bz - (sf_.mul_g(ux) - w2z);
      const double res = std::max({inf_norm(e1), inf_norm(e2), inf_norm(e3)});
#ifdef DRDS_REFINE_DEBUG
      std::fprintf(stderr, "    refine round %d res %.3e (bnorm %.3e)\n", round, res, bnorm);
#endif
      if (res < best_res) {
        best_res = res;
        bestx = ux;
        besty = uy;
        bestz = uz;
      }
      if (res <= 1e-13 * bnorm || round == 4) break;
      if (res > 2.0 * best_res) break;  // refinement is diverging; keep the best
      solve3_raw(e1, e2, e3, cx1, cy1, cz1);
      ux += cx1;
      if (p_ > 0) uy += cy1;
      uz += cz1;
    }
    ux = bestx;
    if (p_ > 0) uy = besty;
    uz = bestz;
    solve_quality_ = std::max(solve_quality_, best_res / bnorm);
  }

  static double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

  SolveSettings st_;
  StdForm sf_;
  std::vector<ConeCtx> cones_;
  SchurAssembler assembler_;
  Mat H_, X_, SA_;
  Vec x_, y_, z_, s_;
  double tau_ = 1.0, kappa_ = 1.0;
  int n_ = 0, p_ = 0, m_ = 0, nu_ = 0;

  // Best iterate seen so far (by worst-of residual merit) and the relative
  // accuracy achieved by the KKT solves of the current iteration.
  bool have_best_ = false;
  Vec best_x_;
  double best_tau_ = 1.0, best_merit_ = kInf;
  double best_pres_ = kInf, best_dres_ = kInf, best_gap_ = kInf, best_pcost_ = 0.0;
  int best_iter_ = 0;
  double solve_quality_ = 0.0;
  int degraded_streak_ = 0;
  double degraded_merit_ = kInf;
};

}  // namespace drds::conic::detail
