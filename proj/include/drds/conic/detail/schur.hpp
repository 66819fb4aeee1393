#pragma once

// Assembly of the Schur-complement matrix H = G' W^{-2} G for the KKT solve,
// exploiting per-column structure inside each cone block.
//
//   NonNeg      rows contribute rank-one outer products weighted by 1/w_r^2.
//   SecondOrder blocks use W^{-2} = eta^{-2} (2 (J wbar)(J wbar)' - J), so the
//               block contribution is eta^{-2} (2 q q' + P'P - 2 p0 p0') over
//               the block's dense column panel P, with q = P' (J wbar).
//   Psd         blocks classify each variable column by the structure of its
//               matrix C_j = smat(G column):
//                 singleton - one svec entry; pair contributions reduce to
//                             closed forms in entries of Q = W^{-2}'s factor,
//                 cross     - C_j = e_c a' + a e_c' (all entries share one
//                             index c, the "spine"); pair products against
//                             every other class are O(1) through per-iteration
//                             panels QA = Q A and S = A' Q A, where A stacks
//                             the blocks' a-vectors,
//                 low-rank  - C_j = sum_f s_f w_f w_f' with at most 4 signed
//                             factors (from a small eigendecomposition on the
//                             column's support), giving
//                             <C_i, Q C_j Q> = sum s_f s_g (w_f' Q w_g)^2,
//                 dense     - fallback: T_j = Q C_j Q is formed explicitly on
//                             the column's support and dotted against others.
//
// Matrix-gain variables whose columns enter a PSD block along a single row or
// column of the constraint matrix produce cross columns; they dominate the
// covariance-steering programs this solver exists for, which is why they get
// a dedicated class instead of the generic low-rank path.
//
// All contributions accumulate into the lower triangle of H only.

#include <drds/conic/detail/cones.hpp>
#include <drds/conic/detail/stdform.hpp>

#include <vector>

namespace drds::conic::detail {

class SchurAssembler {
 public:
  void setup(const StdForm& sf) {
    n_ = sf.n;
    int row0 = 0;
    int maxact = 0;
    for (size_t bi = 0; bi < sf.cones.size(); ++bi) {
      const ConeKind kind = sf.cones[bi].first;
      const int rows = sf.cones[bi].second;
      if (kind == ConeKind::NonNeg) {
        for (int r = 0; r < rows; ++r) {
          NnRow row;
          row.ctx = static_cast<int>(bi);
          row.local = r;
          for (long long t = sf.g_ptr[row0 + r]; t < sf.g_ptr[row0 + r + 1]; ++t) {
            row.col.push_back(sf.g_col[static_cast<size_t>(t)]);
            row.val.push_back(sf.g_val[static_cast<size_t>(t)]);
          }
          if (!row.col.empty()) nn_rows_.push_back(std::move(row));
        }
      } else if (kind == ConeKind::SecondOrder) {
        SocBlock blk;
        blk.ctx = static_cast<int>(bi);
        blk.rows = rows;
        std::vector<int> cols;
        for (int r = 0; r < rows; ++r)
          for (long long t = sf.g_ptr[row0 + r]; t < sf.g_ptr[row0 + r + 1]; ++t)
            cols.push_back(sf.g_col[static_cast<size_t>(t)]);
        sort_unique(cols);
        blk.cols = cols;
        const int nact = static_cast<int>(cols.size());
        maxact = std::max(maxact, nact);
        blk.P = Mat::Zero(rows, nact);
        for (int r = 0; r < rows; ++r)
          for (long long t = sf.g_ptr[row0 + r]; t < sf.g_ptr[row0 + r + 1]; ++t)
            blk.P(r, lookup(cols, sf.g_col[static_cast<size_t>(t)])) +=
                sf.g_val[static_cast<size_t>(t)];
        blk.jw.resize(rows);
        blk.q.resize(nact);
        if (nact > 0) socs_.push_back(std::move(blk));
      } else if (kind == ConeKind::Psd) {
        psds_.push_back(build_psd(sf, static_cast<int>(bi), row0, rows));
      }
      row0 += rows;
    }
    soc_scratch_.resize(maxact, maxact);
#ifdef DRDS_SCHUR_DEBUG
    for (const auto& blk : psds_)
      std::fprintf(stderr, "schur psd block dim %d: sing=%zu cross=%zu low=%zu dense=%zu\n",
                   blk.nmat, blk.sing.size(), blk.cross.size(), blk.low.size(),
                   blk.dense.size());
#endif
    int max_ncr = 0, max_cnm = 0;
    for (const auto& blk : psds_)
      if (!blk.cross.empty()) {
        max_ncr = std::max(max_ncr, static_cast<int>(blk.cross.size()));
        max_cnm = std::max(max_cnm, blk.nmat);
      }
    QA_.resize(max_cnm, max_ncr);
    W2t_.resize(max_ncr, max_cnm);
    Scr_.resize(max_ncr, max_ncr);
  }

  // Accumulates H = G' W^{-2} G (lower triangle). H must be n x n.
  void assemble(const std::vector<ConeCtx>& cones, Mat& H) {
    H.setZero();
    for (const auto& row : nn_rows_) {
      const double w = cones[static_cast<size_t>(row.ctx)].w_nn(row.local);
      const double wi = 1.0 / (w * w);
      const size_t k = row.col.size();
      for (size_t p = 0; p < k; ++p)
        for (size_t q = 0; q <= p; ++q) {
          const int cp = row.col[p], cq = row.col[q];
          add(H, cp, cq, wi * row.val[p] * row.val[q]);
        }
    }
    for (auto& blk : socs_) {
      const ConeCtx& cx = cones[static_cast<size_t>(blk.ctx)];
      const double ei = 1.0 / (cx.eta * cx.eta);
      blk.jw = cx.wbar;
      blk.jw.tail(blk.rows - 1) *= -1.0;
      blk.q.noalias() = blk.P.transpose() * blk.jw;
      const int nact = static_cast<int>(blk.cols.size());
      syrk_t_lower(blk.P, soc_scratch_);
      for (int i = 0; i < nact; ++i) {
        const double qi = blk.q(i), p0i = blk.P(0, i);
        for (int j = 0; j <= i; ++j) {
          const double v = soc_scratch_(i, j) + 2.0 * (qi * blk.q(j) - p0i * blk.P(0, j));
          H(blk.cols[static_cast<size_t>(i)], blk.cols[static_cast<size_t>(j)]) += ei * v;
        }
      }
    }
    for (auto& blk : psds_) assemble_psd(cones[static_cast<size_t>(blk.ctx)], blk, H);
  }

 private:
  struct NnRow {
    int ctx = 0, local = 0;
    std::vector<int> col;
    std::vector<double> val;
  };
  struct SocBlock {
    int ctx = 0, rows = 0;
    std::vector<int> cols;
    Mat P;
    Vec jw, q;
  };
  struct Factor {
    double sign = 1.0;
    int off = 0, nnz = 0;  // into fac_idx_/fac_val_ of the block
  };
  struct PsdCol {
    int var = 0;
    int cls = 0;  // 0 singleton, 1 low-rank, 2 dense, 3 cross
    int a = 0, b = 0;            // singleton entry; for cross, a = spine index
    double m = 0.0;              // singleton matrix entry value
    int fac_begin = 0, fac_count = 0;
    int ent_begin = 0, ent_count = 0;  // dense entries
    int sup_begin = 0, sup_count = 0;  // dense support
    int dense_slot = -1;
    int cross_slot = -1;               // column into the block's cross panel
    int cx_begin = 0, cx_count = 0;    // sparse a-vector of a cross column
  };
  struct PsdBlock {
    int ctx = 0, nmat = 0;
    std::vector<PsdCol> cols;
    std::vector<Factor> factors;
    std::vector<int> fac_idx;
    std::vector<double> fac_val;
    std::vector<int> ent_a, ent_b;
    std::vector<double> ent_m;
    std::vector<int> sup;
    std::vector<int> sing, low, dense, cross;  // indices into cols by class
    std::vector<int> cx_idx;            // sparse a-vectors of cross columns
    std::vector<double> cx_val;
    std::vector<int> cr_spine, cr_var;  // flat per-cross-column lookups
    Mat Acr;                            // nmat x cross count, dense a panel
    Mat Y;                              // nmat x total factor count
    std::vector<Mat> T;                 // one nmat x nmat per dense column
  };

  static void sort_unique(std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  static int lookup(const std::vector<int>& sorted, int key) {
    return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), key) - sorted.begin());
  }
  static void add(Mat& H, int i, int j, double v) {
    if (i >= j)
      H(i, j) += v;
    else
      H(j, i) += v;
  }

  PsdBlock build_psd(const StdForm& sf, int bi, int row0, int rows) {
    PsdBlock blk;
    blk.ctx = bi;
    blk.nmat = svec_order(rows);
    const int nm = blk.nmat;

    // svec row -> (a, b) with a >= b.
    std::vector<int> ra(static_cast<size_t>(rows)), rb(static_cast<size_t>(rows));
    {
      int p = 0;
      for (int c = 0; c < nm; ++c)
        for (int r = c; r < nm; ++r) {
          ra[static_cast<size_t>(p)] = r;
          rb[static_cast<size_t>(p)] = c;
          ++p;
        }
    }

    // Column -> matrix-entry lists.
    struct Entry {
      int a, b;
      double m;
    };
    std::vector<std::vector<Entry>> by_col;
    std::vector<int> col_ids;
    {
      std::vector<int> col_pos(static_cast<size_t>(sf.n), -1);
      static const double irt2 = 1.0 / std::sqrt(2.0);
      for (int r = 0; r < rows; ++r) {
        for (long long t = sf.g_ptr[row0 + r]; t < sf.g_ptr[row0 + r + 1]; ++t) {
          const int col = sf.g_col[static_cast<size_t>(t)];
          const double val = sf.g_val[static_cast<size_t>(t)];
          int pos = col_pos[static_cast<size_t>(col)];
          if (pos < 0) {
            pos = static_cast<int>(by_col.size());
            col_pos[static_cast<size_t>(col)] = pos;
            by_col.emplace_back();
            col_ids.push_back(col);
          }
          const int a = ra[static_cast<size_t>(r)], b = rb[static_cast<size_t>(r)];
          by_col[static_cast<size_t>(pos)].push_back({a, b, a == b ? val : val * irt2});
        }
      }
    }

    // Order columns by variable index (so i >= j pairs land in H's lower part
    // without per-pair comparisons inside one class).
    std::vector<int> order(by_col.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return col_ids[static_cast<size_t>(x)] < col_ids[static_cast<size_t>(y)]; });

    int total_factors = 0;
    for (int oi : order) {
      const auto& ents = by_col[static_cast<size_t>(oi)];
      PsdCol col;
      col.var = col_ids[static_cast<size_t>(oi)];
      // Merge duplicate (a, b) entries (possible if a builder adds twice).
      std::vector<Entry> merged = ents;
      std::sort(merged.begin(), merged.end(), [](const Entry& x, const Entry& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
      });
      size_t keep = 0;
      for (size_t i = 0; i < merged.size(); ++i) {
        if (keep > 0 && merged[keep - 1].a == merged[i].a && merged[keep - 1].b == merged[i].b)
          merged[keep - 1].m += merged[i].m;
        else
          merged[keep++] = merged[i];
      }
      merged.resize(keep);

      if (merged.size() == 1) {
        col.cls = 0;
        col.a = merged[0].a;
        col.b = merged[0].b;
        col.m = merged[0].m;
        blk.sing.push_back(static_cast<int>(blk.cols.size()));
        blk.cols.push_back(col);
        continue;
      }

      // Cross detection: a common index shared by every entry.
      {
        int cand0 = merged[0].a, cand1 = merged[0].b;
        for (size_t i = 1; i < merged.size() && (cand0 >= 0 || cand1 >= 0); ++i) {
          const int a = merged[i].a, b = merged[i].b;
          if (cand0 >= 0 && cand0 != a && cand0 != b) cand0 = -1;
          if (cand1 >= 0 && cand1 != a && cand1 != b) cand1 = -1;
        }
        const int spine = cand0 >= 0 ? cand0 : cand1;
        if (spine >= 0) {
          col.cls = 3;
          col.a = spine;
          col.cx_begin = static_cast<int>(blk.cx_idx.size());
          col.cx_count = static_cast<int>(merged.size());
          for (const auto& e : merged) {
            const int other = e.a == spine ? e.b : e.a;
            blk.cx_idx.push_back(other);
            blk.cx_val.push_back(other == spine ? 0.5 * e.m : e.m);
          }
          col.cross_slot = static_cast<int>(blk.cross.size());
          blk.cr_spine.push_back(spine);
          blk.cr_var.push_back(col.var);
          blk.cross.push_back(static_cast<int>(blk.cols.size()));
          blk.cols.push_back(col);
          continue;
        }
      }

      // Support-compressed eigendecomposition.
      std::vector<int> sup;
      for (const auto& e : merged) {
        sup.push_back(e.a);
        sup.push_back(e.b);
      }
      sort_unique(sup);
      const int s = static_cast<int>(sup.size());
      Mat cs = Mat::Zero(s, s);
      for (const auto& e : merged) {
        const int ia = lookup(sup, e.a), ib = lookup(sup, e.b);
        cs(ia, ib) += e.m;
        if (ia != ib) cs(ib, ia) += e.m;
      }
      Vec w;
      Mat v;
      sym_eig(cs, w, v);
      const double wmax = w.cwiseAbs().maxCoeff();
      std::vector<int> keep_idx;
      for (int i = 0; i < s; ++i)
        if (std::abs(w(i)) > 1e-13 * wmax) keep_idx.push_back(i);

      if (static_cast<int>(keep_idx.size()) <= 4) {
        col.cls = 1;
        col.fac_begin = static_cast<int>(blk.factors.size());
        col.fac_count = static_cast<int>(keep_idx.size());
        for (int i : keep_idx) {
          Factor f;
          f.sign = w(i) > 0 ? 1.0 : -1.0;
          f.off = static_cast<int>(blk.fac_idx.size());
          f.nnz = s;
          const double scale = std::sqrt(std::abs(w(i)));
          for (int t = 0; t < s; ++t) {
            blk.fac_idx.push_back(sup[static_cast<size_t>(t)]);
            blk.fac_val.push_back(scale * v(t, i));
          }
          blk.factors.push_back(f);
          ++total_factors;
        }
        blk.low.push_back(static_cast<int>(blk.cols.size()));
      } else {
        col.cls = 2;
        col.ent_begin = static_cast<int>(blk.ent_a.size());
        col.ent_count = static_cast<int>(merged.size());
        for (const auto& e : merged) {
          blk.ent_a.push_back(e.a);
          blk.ent_b.push_back(e.b);
          blk.ent_m.push_back(e.m);
        }
        col.sup_begin = static_cast<int>(blk.sup.size());
        col.sup_count = s;
        for (int t : sup) blk.sup.push_back(t);
        col.dense_slot = static_cast<int>(blk.T.size());
        blk.T.emplace_back(nm, nm);
        blk.dense.push_back(static_cast<int>(blk.cols.size()));
      }
      blk.cols.push_back(col);
    }
    blk.Y.resize(nm, total_factors);
    const int ncr = static_cast<int>(blk.cross.size());
    blk.Acr = Mat::Zero(nm, ncr);
    for (int x = 0; x < ncr; ++x) {
      const PsdCol& c = blk.cols[static_cast<size_t>(blk.cross[static_cast<size_t>(x)])];
      for (int t = 0; t < c.cx_count; ++t)
        blk.Acr(blk.cx_idx[static_cast<size_t>(c.cx_begin + t)], x) +=
            blk.cx_val[static_cast<size_t>(c.cx_begin + t)];
    }
    return blk;
  }

  void assemble_psd(const ConeCtx& cx, PsdBlock& blk, Mat& H) {
    const Mat& Q = cx.q_;
    const int nm = blk.nmat;
    const int ncr = static_cast<int>(blk.cross.size());

    // Cross panels: QA = Q A, its transpose, and S = A' Q A.
    if (ncr > 0) {
      auto qa = QA_.topLeftCorner(nm, ncr);
      qa.noalias() = Q * blk.Acr;
      W2t_.topLeftCorner(ncr, nm).noalias() = qa.transpose();
      Scr_.topLeftCorner(ncr, ncr).noalias() = blk.Acr.transpose() * qa;
    }

    // Y = Q * (factor vectors).
    for (size_t f = 0; f < blk.factors.size(); ++f) {
      const Factor& fc = blk.factors[f];
      auto y = blk.Y.col(static_cast<Eigen::Index>(f));
      y.setZero();
      for (int t = 0; t < fc.nnz; ++t)
        y += blk.fac_val[static_cast<size_t>(fc.off + t)] *
             Q.col(blk.fac_idx[static_cast<size_t>(fc.off + t)]);
    }

    // T_j = Q C_j Q for dense columns (support-compressed).
    for (int dj : blk.dense) {
      const PsdCol& col = blk.cols[static_cast<size_t>(dj)];
      const int s = col.sup_count;
      Mat qs(nm, s);
      for (int t = 0; t < s; ++t)
        qs.col(t) = Q.col(blk.sup[static_cast<size_t>(col.sup_begin + t)]);
      Mat cs = Mat::Zero(s, s);
      for (int t = 0; t < col.ent_count; ++t) {
        const int ia = lookup_range(blk.sup, col.sup_begin, s, blk.ent_a[static_cast<size_t>(col.ent_begin + t)]);
        const int ib = lookup_range(blk.sup, col.sup_begin, s, blk.ent_b[static_cast<size_t>(col.ent_begin + t)]);
        const double m = blk.ent_m[static_cast<size_t>(col.ent_begin + t)];
        cs(ia, ib) += m;
        if (ia != ib) cs(ib, ia) += m;
      }
      Mat tmp(nm, s);
      tmp.noalias() = qs * cs;
      blk.T[static_cast<size_t>(col.dense_slot)].noalias() = tmp * qs.transpose();
    }

    // singleton x singleton (tight loop; columns are in ascending var order).
    const size_t ns = blk.sing.size();
    for (size_t jj = 0; jj < ns; ++jj) {
      const PsdCol& cj = blk.cols[static_cast<size_t>(blk.sing[jj])];
      const int c = cj.a, d = cj.b;
      const bool jdiag = (c == d);
      double* hcol = H.data() + static_cast<long long>(cj.var) * H.rows();
      for (size_t ii = jj; ii < ns; ++ii) {
        const PsdCol& ci = blk.cols[static_cast<size_t>(blk.sing[ii])];
        const int a = ci.a, bq = ci.b;
        double v;
        if (a == bq) {
          v = jdiag ? Q(a, c) * Q(a, c) : 2.0 * Q(a, c) * Q(a, d);
        } else if (jdiag) {
          v = 2.0 * Q(a, c) * Q(bq, c);
        } else {
          v = 2.0 * (Q(a, c) * Q(bq, d) + Q(a, d) * Q(bq, c));
        }
        hcol[ci.var] += ci.m * cj.m * v;
      }
    }

    // low-rank x low-rank.
    const size_t nl = blk.low.size();
    for (size_t jj = 0; jj < nl; ++jj) {
      const PsdCol& cj = blk.cols[static_cast<size_t>(blk.low[jj])];
      for (size_t ii = jj; ii < nl; ++ii) {
        const PsdCol& ci = blk.cols[static_cast<size_t>(blk.low[ii])];
        double acc = 0.0;
        for (int f = 0; f < ci.fac_count; ++f) {
          const Factor& fi = blk.factors[static_cast<size_t>(ci.fac_begin + f)];
          for (int g = 0; g < cj.fac_count; ++g) {
            const Factor& fg = blk.factors[static_cast<size_t>(cj.fac_begin + g)];
            const double* y = blk.Y.col(static_cast<Eigen::Index>(cj.fac_begin + g)).data();
            double dot = 0.0;
            for (int t = 0; t < fi.nnz; ++t)
              dot += blk.fac_val[static_cast<size_t>(fi.off + t)] *
                     y[blk.fac_idx[static_cast<size_t>(fi.off + t)]];
            acc += fi.sign * fg.sign * dot * dot;
          }
        }
        H(ci.var, cj.var) += acc;
      }
    }

    // singleton x low-rank (T entries read from Y).
    for (size_t jj = 0; jj < nl; ++jj) {
      const PsdCol& cj = blk.cols[static_cast<size_t>(blk.low[jj])];
      for (size_t ii = 0; ii < ns; ++ii) {
        const PsdCol& ci = blk.cols[static_cast<size_t>(blk.sing[ii])];
        double tab = 0.0;
        for (int g = 0; g < cj.fac_count; ++g) {
          const Factor& fg = blk.factors[static_cast<size_t>(cj.fac_begin + g)];
          const auto y = blk.Y.col(static_cast<Eigen::Index>(cj.fac_begin + g));
          tab += fg.sign * y(ci.a) * y(ci.b);
        }
        const double v = ci.m * (ci.a == ci.b ? tab : 2.0 * tab);
        add(H, ci.var, cj.var, v);
      }
    }

    // cross x cross: <C_i, Q C_j Q> = 2 (S_ij Q_{c_i c_j} + QA(c_i, j) QA(c_j, i)).
    for (int jj = 0; jj < ncr; ++jj) {
      const int cj = blk.cr_spine[static_cast<size_t>(jj)];
      const double* scol = Scr_.data() + static_cast<long long>(jj) * Scr_.rows();
      const double* w2col = W2t_.data() + static_cast<long long>(cj) * W2t_.rows();
      const double* qacol = QA_.data() + static_cast<long long>(jj) * QA_.rows();
      const double* qcol = Q.data() + static_cast<long long>(cj) * nm;
      double* hcol =
          H.data() + static_cast<long long>(blk.cr_var[static_cast<size_t>(jj)]) * H.rows();
      for (int ii = jj; ii < ncr; ++ii) {
        const int ci = blk.cr_spine[static_cast<size_t>(ii)];
        hcol[blk.cr_var[static_cast<size_t>(ii)]] +=
            2.0 * (scol[ii] * qcol[ci] + w2col[ii] * qacol[ci]);
      }
    }

    // singleton x cross (T_x entries via QA and a column of Q).
    for (int x = 0; x < ncr; ++x) {
      const int c = blk.cr_spine[static_cast<size_t>(x)];
      const int vx = blk.cr_var[static_cast<size_t>(x)];
      const double* qac = QA_.data() + static_cast<long long>(x) * QA_.rows();
      const double* qc = Q.data() + static_cast<long long>(c) * nm;
      for (size_t ii = 0; ii < ns; ++ii) {
        const PsdCol& ci = blk.cols[static_cast<size_t>(blk.sing[ii])];
        const double v = ci.a == ci.b
                             ? 2.0 * ci.m * qc[ci.a] * qac[ci.a]
                             : 2.0 * ci.m * (qc[ci.a] * qac[ci.b] + qac[ci.a] * qc[ci.b]);
        add(H, ci.var, vx, v);
      }
    }

    // low-rank x cross: sum_f 2 s_f Y_f(c) (w_f . QA_x).
    for (int x = 0; x < ncr && nl > 0; ++x) {
      const int c = blk.cr_spine[static_cast<size_t>(x)];
      const int vx = blk.cr_var[static_cast<size_t>(x)];
      const double* qac = QA_.data() + static_cast<long long>(x) * QA_.rows();
      for (size_t ll = 0; ll < nl; ++ll) {
        const PsdCol& ci = blk.cols[static_cast<size_t>(blk.low[ll])];
        double acc = 0.0;
        for (int f = 0; f < ci.fac_count; ++f) {
          const Factor& fi = blk.factors[static_cast<size_t>(ci.fac_begin + f)];
          double dot = 0.0;
          for (int t = 0; t < fi.nnz; ++t)
            dot += blk.fac_val[static_cast<size_t>(fi.off + t)] *
                   qac[blk.fac_idx[static_cast<size_t>(fi.off + t)]];
          acc += 2.0 * fi.sign * blk.Y(c, static_cast<Eigen::Index>(ci.fac_begin + f)) * dot;
        }
        add(H, ci.var, vx, acc);
      }
    }

    // pairs involving dense columns.
    for (int dj : blk.dense) {
      const PsdCol& cj = blk.cols[static_cast<size_t>(dj)];
      const Mat& T = blk.T[static_cast<size_t>(cj.dense_slot)];
      for (size_t ii = 0; ii < ns; ++ii) {
        const PsdCol& ci = blk.cols[static_cast<size_t>(blk.sing[ii])];
        const double v = ci.m * (ci.a == ci.b ? T(ci.a, ci.a) : 2.0 * T(ci.a, ci.b));
        add(H, ci.var, cj.var, v);
      }
      for (size_t ll = 0; ll < nl; ++ll) {
        const PsdCol& ci = blk.cols[static_cast<size_t>(blk.low[ll])];
        double acc = 0.0;
        for (int f = 0; f < ci.fac_count; ++f) {
          const Factor& fi = blk.factors[static_cast<size_t>(ci.fac_begin + f)];
          double qf = 0.0;
          for (int t1 = 0; t1 < fi.nnz; ++t1) {
            const double v1 = blk.fac_val[static_cast<size_t>(fi.off + t1)];
            const int i1 = blk.fac_idx[static_cast<size_t>(fi.off + t1)];
            double inner = 0.0;
            for (int t2 = 0; t2 < fi.nnz; ++t2)
              inner += blk.fac_val[static_cast<size_t>(fi.off + t2)] *
                       T(i1, blk.fac_idx[static_cast<size_t>(fi.off + t2)]);
            qf += v1 * inner;
          }
          acc += fi.sign * qf;
        }
        add(H, ci.var, cj.var, acc);
      }
      for (int x = 0; x < ncr; ++x) {
        const PsdCol& ci = blk.cols[static_cast<size_t>(blk.cross[static_cast<size_t>(x)])];
        const int c = blk.cr_spine[static_cast<size_t>(x)];
        double acc = 0.0;
        for (int t = 0; t < ci.cx_count; ++t)
          acc += blk.cx_val[static_cast<size_t>(ci.cx_begin + t)] *
                 T(blk.cx_idx[static_cast<size_t>(ci.cx_begin + t)], c);
        add(H, ci.var, cj.var, 2.0 * acc);
      }
      for (int dj2 : blk.dense) {
        if (dj2 > dj) continue;
        const PsdCol& ci = blk.cols[static_cast<size_t>(dj2)];
        double acc = 0.0;
        for (int t = 0; t < ci.ent_count; ++t) {
          const int a = blk.ent_a[static_cast<size_t>(ci.ent_begin + t)];
          const int bq = blk.ent_b[static_cast<size_t>(ci.ent_begin + t)];
          const double m = blk.ent_m[static_cast<size_t>(ci.ent_begin + t)];
          acc += (a == bq ? m * T(a, a) : 2.0 * m * T(a, bq));
        }
        add(H, ci.var, cj.var, acc);
      }
    }
  }

  static int lookup_range(const std::vector<int>& v, int begin, int count, int key) {
    const auto first = v.begin() + begin;
    return static_cast<int>(std::lower_bound(first, first + count, key) - first);
  }

  int n_ = 0;
  std::vector<NnRow> nn_rows_;
  std::vector<SocBlock> socs_;
  std::vector<PsdBlock> psds_;
  Mat soc_scratch_;
  Mat QA_, W2t_, Scr_;  // shared cross-panel scratch (sized to the largest block)
};

}  // namespace drds::conic::detail
