#pragma once

// Cone-local machinery for the interior-point solver: Nesterov-Todd scalings,
// Jordan-algebra products in the scaled frame, and boundary step lengths, for
// the nonnegative orthant, second-order cones, and PSD cones (svec storage).
//
// Conventions. For a scaling W computed from an interior pair (s, z):
//   lambda := W^{-T} s = W z            (the scaled point)
//   NonNeg: W = diag(w),               w_i = sqrt(s_i / z_i)
//   SecondOrder: W = eta * [[w0, w1^T], [w1, I + w1 w1^T / (1 + w0)]]
//   Psd: W u = svec(r^T smat(u) r); the operator is not symmetric, so the
//        transpose/inverse variants are spelled out explicitly below.

#include <drds/conic/problem.hpp>
#include <drds/linalg.hpp>

#include <cmath>
#include <limits>

namespace drds::conic::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Unscaled svec <-> matrix copies used in the PSD hot paths (no symmetry
// checks; the caller guarantees layout).
inline void smat_fill(const double* v, Mat& m) {
  const int n = static_cast<int>(m.rows());
  static const double irt2 = 1.0 / std::sqrt(2.0);
  int p = 0;
  for (int c = 0; c < n; ++c) {
    m(c, c) = v[p++];
    for (int r = c + 1; r < n; ++r) {
      const double t = v[p++] * irt2;
      m(r, c) = t;
      m(c, r) = t;
    }
  }
}

inline void svec_fill(const Mat& m, double* v) {
  const int n = static_cast<int>(m.rows());
  static const double rt2 = std::sqrt(2.0);
  int p = 0;
  for (int c = 0; c < n; ++c) {
    v[p++] = m(c, c);
    for (int r = c + 1; r < n; ++r) v[p++] = rt2 * 0.5 * (m(r, c) + m(c, r));
  }
}

struct ConeCtx {
  ConeKind kind = ConeKind::NonNeg;
  int offset = 0;  // start row within the stacked inequality vector
  int rows = 0;    // svec length for Psd
  int matdim = 0;  // matrix order for Psd, 0 otherwise

  // NonNeg state.
  Vec w_nn;  // sqrt(s/z)

  // SecondOrder state.
  double eta = 1.0;
  Vec wbar;

  // Psd state.
  Mat r_, rti_;   // NT factors: r^T Z r = r^{-1} S r^{-T} = diag(sig_)
  Mat q_, sig2_;  // q_ = rti rti^T (W^{-2} congruence), sig2_ = r r^T (W^2)
  Vec sig_;       // scaled-point eigenvalues

  // Scaled point lambda for this block.
  Vec lambda;

  // Workspaces (Psd).
  Mat ws1_, ws2_, ws3_;
  Vec wv1_;

  int degree() const {
    switch (kind) {
      case ConeKind::NonNeg: return rows;
      case ConeKind::SecondOrder: return 1;
      case ConeKind::Psd: return matdim;
      default: return 0;
    }
  }

  void init(ConeKind k, int off, int nrows) {
    kind = k;
    offset = off;
    rows = nrows;
    lambda.resize(rows);
    if (kind == ConeKind::NonNeg) {
      w_nn.resize(rows);
    } else if (kind == ConeKind::SecondOrder) {
      wbar.resize(rows);
    } else {
      matdim = svec_order(rows);
      r_.resize(matdim, matdim);
      rti_.resize(matdim, matdim);
      q_.resize(matdim, matdim);
      sig2_.resize(matdim, matdim);
      sig_.resize(matdim);
      ws1_.resize(matdim, matdim);
      ws2_.resize(matdim, matdim);
      ws3_.resize(matdim, matdim);
      wv1_.resize(matdim);
    }
  }

  // Identity scaling (used before the first iterate exists).
  void set_identity() {
    if (kind == ConeKind::NonNeg) {
      w_nn.setOnes();
    } else if (kind == ConeKind::SecondOrder) {
      eta = 1.0;
      wbar.setZero();
      wbar(0) = 1.0;
    } else {
      r_.setIdentity();
      rti_.setIdentity();
      q_.setIdentity();
      sig2_.setIdentity();
      sig_.setOnes();
    }
  }

  // Nesterov-Todd scaling from an interior pair; also fills lambda.
  // Returns false when (s, z) is numerically outside the interior.
  bool compute_scaling(const double* s, const double* z) {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) {
        if (!(s[i] > 0.0) || !(z[i] > 0.0)) return false;
        w_nn(i) = std::sqrt(s[i] / z[i]);
        lambda(i) = std::sqrt(s[i] * z[i]);
      }
      return true;
    }
    if (kind == ConeKind::SecondOrder) {
      const int m = rows - 1;
      Eigen::Map<const Vec> sv(s, rows), zv(z, rows);
      const double ns1 = sv.tail(m).norm(), nz1 = zv.tail(m).norm();
      if (!(sv(0) > ns1) || !(zv(0) > nz1)) return false;
      const double a = std::sqrt((sv(0) - ns1) * (sv(0) + ns1));
      const double b = std::sqrt((zv(0) - nz1) * (zv(0) + nz1));
      const double gamma = std::sqrt((1.0 + sv.dot(zv) / (a * b)) * 0.5);
      wbar = sv / a;
      wbar(0) += zv(0) / b;
      wbar.tail(m) -= zv.tail(m) / b;
      wbar /= 2.0 * gamma;
      eta = std::sqrt(a / b);
      // lambda = W z (equivalently W^{-T} s).
      apply_w(z, lambda.data());
      return true;
    }
    // Psd.
    Mat& ls = ws1_;
    Mat& lz = ws2_;
    smat_fill(s, ls);
    smat_fill(z, lz);
    if (!chol_inplace(ls) || !chol_inplace(lz)) return false;
    ls.triangularView<Eigen::StrictlyUpper>().setZero();
    lz.triangularView<Eigen::StrictlyUpper>().setZero();
    ws3_.noalias() = lz.transpose() * ls;
    Mat u, vt;
    Vec sg;
    svd(ws3_, u, sg, vt);
    if (!(sg(matdim - 1) > 0.0)) return false;
    sig_ = sg;
    const Vec isq = sg.cwiseSqrt().cwiseInverse();
    r_.noalias() = ls * vt.transpose();
    r_ = r_ * isq.asDiagonal();
    rti_.noalias() = lz * u;
    rti_ = rti_ * isq.asDiagonal();
    q_.noalias() = rti_ * rti_.transpose();
    sig2_.noalias() = r_ * r_.transpose();
    // lambda = svec(diag(sig_)).
    lambda.setZero();
    for (int i = 0; i < matdim; ++i) lambda(svec_index(i, i, matdim)) = sig_(i);
    return true;
  }

  // --- scaling applications -------------------------------------------------

  void apply_w(const double* in, double* out) const {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) out[i] = w_nn(i) * in[i];
    } else if (kind == ConeKind::SecondOrder) {
      soc_apply(wbar, eta, in, out);
    } else {
      smat_fill(in, ws3_c());
      ws_prod_c().noalias() = r_.transpose() * ws3_c() * r_;
      svec_fill(ws_prod_c(), out);
    }
  }

  void apply_wt(const double* in, double* out) const {
    if (kind == ConeKind::Psd) {
      smat_fill(in, ws3_c());
      ws_prod_c().noalias() = r_ * ws3_c() * r_.transpose();
      svec_fill(ws_prod_c(), out);
    } else {
      apply_w(in, out);  // symmetric for NonNeg / SecondOrder
    }
  }

  void apply_winv_t(const double* in, double* out) const {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) out[i] = in[i] / w_nn(i);
    } else if (kind == ConeKind::SecondOrder) {
      Vec jw = wbar;
      jw.tail(rows - 1) *= -1.0;
      soc_apply(jw, 1.0 / eta, in, out);
    } else {
      smat_fill(in, ws3_c());
      ws_prod_c().noalias() = rti_.transpose() * ws3_c() * rti_;
      svec_fill(ws_prod_c(), out);
    }
  }

  // W^T W (the symmetric quadratic scaling).
  void apply_w2(const double* in, double* out) const {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) out[i] = w_nn(i) * w_nn(i) * in[i];
    } else if (kind == ConeKind::SecondOrder) {
      // eta^2 (2 wbar wbar^T - J)
      Eigen::Map<const Vec> u(in, rows);
      Eigen::Map<Vec> o(out, rows);
      const double t = wbar.dot(u);
      o = 2.0 * t * wbar;
      o(0) -= u(0);
      o.tail(rows - 1) += u.tail(rows - 1);
      o *= eta * eta;
    } else {
      smat_fill(in, ws3_c());
      ws_prod_c().noalias() = sig2_ * ws3_c() * sig2_;
      svec_fill(ws_prod_c(), out);
    }
  }

  // (W^T W)^{-1}.
  void apply_w2inv(const double* in, double* out) const {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) out[i] = in[i] / (w_nn(i) * w_nn(i));
    } else if (kind == ConeKind::SecondOrder) {
      // eta^{-2} (2 J wbar wbar^T J - J)
      Eigen::Map<const Vec> u(in, rows);
      Eigen::Map<Vec> o(out, rows);
      Vec jw = wbar;
      jw.tail(rows - 1) *= -1.0;
      const double t = jw.dot(u);
      o = 2.0 * t * jw;
      o(0) -= u(0);
      o.tail(rows - 1) += u.tail(rows - 1);
      o /= eta * eta;
    } else {
      smat_fill(in, ws3_c());
      ws_prod_c().noalias() = q_ * ws3_c() * q_;
      svec_fill(ws_prod_c(), out);
    }
  }

  // --- Jordan algebra in the scaled frame ------------------------------------

  // out = lambda \ d  (solve lambda o x = d).
  void jordan_lsolve(const double* d, double* out) const {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) out[i] = d[i] / lambda(i);
    } else if (kind == ConeKind::SecondOrder) {
      const int m = rows - 1;
      Eigen::Map<const Vec> dv(d, rows);
      Eigen::Map<Vec> o(out, rows);
      const double det = lambda(0) * lambda(0) - lambda.tail(m).squaredNorm();
      const double x0 = (lambda(0) * dv(0) - lambda.tail(m).dot(dv.tail(m))) / det;
      o(0) = x0;
      o.tail(m) = (dv.tail(m) - x0 * lambda.tail(m)) / lambda(0);
    } else {
      // In the scaled frame lambda = diag(sig): entrywise 2 / (sig_a + sig_b).
      int p = 0;
      for (int c = 0; c < matdim; ++c)
        for (int r = c; r < matdim; ++r) out[p] = d[p] * 2.0 / (sig_(r) + sig_(c)), ++p;
    }
  }

  // out = u o v (Jordan product).
  void jordan_prod(const double* u, const double* v, double* out) const {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) out[i] = u[i] * v[i];
    } else if (kind == ConeKind::SecondOrder) {
      const int m = rows - 1;
      Eigen::Map<const Vec> uv(u, rows), vv(v, rows);
      Eigen::Map<Vec> o(out, rows);
      o(0) = uv.dot(vv);
      o.tail(m) = uv(0) * vv.tail(m) + vv(0) * uv.tail(m);
    } else {
      smat_fill(u, ws3_c());
      Mat& um = ws_extra_c();
      um = ws3_c();
      smat_fill(v, ws3_c());
      ws_prod_c().noalias() = 0.5 * (um * ws3_c() + ws3_c() * um);
      svec_fill(ws_prod_c(), out);
    }
  }

  // out = -lambda o lambda.
  void jordan_neg_sq(double* out) const {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) out[i] = -lambda(i) * lambda(i);
    } else if (kind == ConeKind::SecondOrder) {
      const int m = rows - 1;
      Eigen::Map<Vec> o(out, rows);
      o(0) = -lambda.squaredNorm();
      o.tail(m) = -2.0 * lambda(0) * lambda.tail(m);
    } else {
      Eigen::Map<Vec> o(out, rows);
      o.setZero();
      for (int i = 0; i < matdim; ++i) o(svec_index(i, i, matdim)) = -sig_(i) * sig_(i);
    }
  }

  // vec += t * e (Jordan identity).
  void add_identity(double* vec, double t) const {
    if (kind == ConeKind::NonNeg) {
      for (int i = 0; i < rows; ++i) vec[i] += t;
    } else if (kind == ConeKind::SecondOrder) {
      vec[0] += t;
    } else {
      for (int i = 0; i < matdim; ++i) vec[svec_index(i, i, matdim)] += t;
    }
  }

  // Smallest cone eigenvalue of an arbitrary point (may be outside the cone).
  double min_eig(const double* v) const {
    if (kind == ConeKind::NonNeg) {
      double m = kInf;
      for (int i = 0; i < rows; ++i) m = std::min(m, v[i]);
      return m;
    }
    if (kind == ConeKind::SecondOrder) {
      Eigen::Map<const Vec> u(v, rows);
      return u(0) - u.tail(rows - 1).norm();
    }
    smat_fill(v, ws3_c());
    return sym_eigvals(ws3_c())(0);
  }

  // sup { a >= 0 : lambda + a * d in cone }, for d given in the scaled frame.
  double max_step(const double* d) const {
    if (kind == ConeKind::NonNeg) {
      double a = kInf;
      for (int i = 0; i < rows; ++i)
        if (d[i] < 0.0) a = std::min(a, -lambda(i) / d[i]);
      return a;
    }
    if (kind == ConeKind::SecondOrder) {
      const int m = rows - 1;
      Eigen::Map<const Vec> dv(d, rows);
      const double qa = dv(0) * dv(0) - dv.tail(m).squaredNorm();
      const double qb = 2.0 * (lambda(0) * dv(0) - lambda.tail(m).dot(dv.tail(m)));
      const double qc = lambda(0) * lambda(0) - lambda.tail(m).squaredNorm();
      return smallest_pos_root(qa, qb, qc);
    }
    // Psd: smallest eigenvalue of diag(sig)^{-1/2} smat(d) diag(sig)^{-1/2}.
    smat_fill(d, ws3_c());
    const Vec is = sig_.cwiseSqrt().cwiseInverse();
    ws3_c() = is.asDiagonal() * ws3_c() * is.asDiagonal();
    const double m = sym_eigvals(ws3_c())(0);
    return m < 0.0 ? -1.0 / m : kInf;
  }

 private:
  // const-friendly workspace accessors (workspaces are scratch, not state)
  Mat& ws3_c() const { return const_cast<Mat&>(ws3_); }
  Mat& ws_prod_c() const { return const_cast<Mat&>(ws1_); }
  Mat& ws_extra_c() const { return const_cast<Mat&>(ws2_); }

  // Apply eta * [[w0, w1^T], [w1, I + w1 w1^T / (1 + w0)]] for a unit-hyperbolic w.
  void soc_apply(const Vec& w, double scale, const double* in, double* out) const {
    const int m = rows - 1;
    Eigen::Map<const Vec> u(in, rows);
    Eigen::Map<Vec> o(out, rows);
    const double t = w.tail(m).dot(u.tail(m));
    o(0) = scale * (w(0) * u(0) + t);
    o.tail(m) = scale * (u.tail(m) + (u(0) + t / (1.0 + w(0))) * w.tail(m));
  }

  // Smallest positive root of qa x^2 + qb x + qc = 0 given qc > 0 (kInf if none).
  static double smallest_pos_root(double qa, double qb, double qc) {
    if (qa == 0.0) return qb < 0.0 ? -qc / qb : kInf;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa > 0.0) {
      if (disc <= 0.0 || qb >= 0.0) return kInf;
      const double s = std::sqrt(disc);
      const double q = -0.5 * (qb - s);  // qb < 0, so q > 0
      // roots q/qa and qc/q are both positive; the smaller is qc/q.
      return std::min(q / qa, qc / q);
    }
    // qa < 0: one positive root.
    const double s = std::sqrt(std::max(disc, 0.0));
    const double q = -0.5 * (qb + (qb >= 0.0 ? s : -s));
    const double r1 = q / qa, r2 = qc / q;
    return r1 > 0.0 ? (r2 > 0.0 ? std::min(r1, r2) : r1) : r2;
  }
};

}  // namespace drds::conic::detail
