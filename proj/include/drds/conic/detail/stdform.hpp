#pragma once

// Conversion of a ConicProblem into the standard form
//
//   minimize    c'x
//   subject to  A x = b            (equality rows, from Zero blocks)
//               G x + s = h,  s in K  (all other cone blocks)
//
// preceded by a presolve pass that (a) eliminates variables fixed by
// single-variable equality rows, repeatedly, (b) detects contradictions among
// the equality rows, and (c) fixes or flags variables that appear in no
// constraint at all. The reduction keeps an original->reduced column map so
// solutions can be reported in the caller's indexing.

#include <drds/conic/problem.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace drds::conic::detail {

struct StdForm {
  int n = 0;  // reduced variable count
  Vec c;
  double cconst = 0.0;

  // A (p x n) and G (m x n) in CSR.
  std::vector<long long> a_ptr{0};
  std::vector<int> a_col;
  std::vector<double> a_val;
  Vec b;

  std::vector<long long> g_ptr{0};
  std::vector<int> g_col;
  std::vector<double> g_val;
  Vec h;
  std::vector<std::pair<ConeKind, int>> cones;  // layout of G rows, in order

  // Presolve bookkeeping.
  int orig_n = 0;
  std::vector<int> col_map;       // original -> reduced, -1 when fixed
  std::vector<double> fixed_val;  // original indexing, valid where col_map < 0

  // Early presolve decision (contradiction / everything fixed / free cost var).
  bool decided = false;
  SolveStatus decided_status = SolveStatus::Optimal;
  std::string decided_msg;
  Vec decided_primal;  // original indexing, when decided_status == Optimal
  double decided_obj = 0.0;

  int rows_a() const { return static_cast<int>(b.size()); }
  int rows_g() const { return static_cast<int>(h.size()); }

  Vec mul_a(const Vec& x) const { return csr_mul(a_ptr, a_col, a_val, rows_a(), x); }
  Vec mul_g(const Vec& x) const { return csr_mul(g_ptr, g_col, g_val, rows_g(), x); }
  Vec mul_at(const Vec& y) const { return csr_tmul(a_ptr, a_col, a_val, rows_a(), n, y); }
  Vec mul_gt(const Vec& z) const { return csr_tmul(g_ptr, g_col, g_val, rows_g(), n, z); }

 private:
  static Vec csr_mul(const std::vector<long long>& ptr, const std::vector<int>& col,
                     const std::vector<double>& val, int rows, const Vec& x) {
    Vec out = Vec::Zero(rows);
    for (int r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (long long t = ptr[r]; t < ptr[r + 1]; ++t)
        acc += val[static_cast<size_t>(t)] * x(col[static_cast<size_t>(t)]);
      out(r) = acc;
    }
    return out;
  }
  static Vec csr_tmul(const std::vector<long long>& ptr, const std::vector<int>& col,
                      const std::vector<double>& val, int rows, int ncols, const Vec& y) {
    Vec out = Vec::Zero(ncols);
    for (int r = 0; r < rows; ++r) {
      const double yr = y(r);
      if (yr == 0.0) continue;
      for (long long t = ptr[r]; t < ptr[r + 1]; ++t)
        out(col[static_cast<size_t>(t)]) += val[static_cast<size_t>(t)] * yr;
    }
    return out;
  }
};

// Smallest "cone eigenvalue" of a constant point (no scaling state needed).
inline double cone_point_min_eig(ConeKind kind, const Vec& v) {
  switch (kind) {
    case ConeKind::Zero: return -v.cwiseAbs().maxCoeff();
    case ConeKind::NonNeg: return v.minCoeff();
    case ConeKind::SecondOrder: return v(0) - v.tail(v.size() - 1).norm();
    case ConeKind::Psd: return sym_eigvals(smat(v))(0);
  }
  return 0.0;
}

inline StdForm build_std_form(const ConicProblem& prob, double feas_tol) {
  StdForm sf;
  sf.orig_n = prob.num_vars;
  sf.col_map.assign(static_cast<size_t>(prob.num_vars), 0);
  sf.fixed_val.assign(static_cast<size_t>(prob.num_vars), 0.0);

  // Mutable copies of the Zero rows for elimination.
  struct EqRow {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;
    bool dropped = false;
  };
  std::vector<EqRow> eq;
  double const_scale = 1.0;
  for (const auto& blk : prob.blocks) {
    if (blk.kind != ConeKind::Zero) continue;
    for (int r = 0; r < blk.rows; ++r) {
      EqRow row;
      for (long long t = blk.row_ptr[r]; t < blk.row_ptr[r + 1]; ++t)
        row.terms.emplace_back(blk.col[static_cast<size_t>(t)], blk.coef[static_cast<size_t>(t)]);
      row.constant = blk.constant[static_cast<size_t>(r)];
      const_scale = std::max(const_scale, std::abs(row.constant));
      eq.push_back(std::move(row));
    }
  }
  const double ztol = 1e-9 * const_scale;

  std::vector<char> fixed(static_cast<size_t>(prob.num_vars), 0);
  auto prune = [&](EqRow& row) {
    size_t keep = 0;
    for (auto& term : row.terms) {
      if (fixed[static_cast<size_t>(term.first)]) {
        row.constant += term.second * sf.fixed_val[static_cast<size_t>(term.first)];
      } else {
        row.terms[keep++] = term;
      }
    }
    row.terms.resize(keep);
  };

  bool contradiction = false;
  for (bool changed = true; changed && !contradiction;) {
    changed = false;
    for (auto& row : eq) {
      if (row.dropped) continue;
      prune(row);
      if (row.terms.empty()) {
        if (std::abs(row.constant) > ztol) {
          contradiction = true;
          break;
        }
        row.dropped = true;
      } else if (row.terms.size() == 1) {
        const int j = row.terms[0].first;
        fixed[static_cast<size_t>(j)] = 1;
        sf.fixed_val[static_cast<size_t>(j)] = -row.constant / row.terms[0].second;
        row.dropped = true;
        changed = true;
      }
    }
  }
  if (contradiction) {
    sf.decided = true;
    sf.decided_status = SolveStatus::Infeasible;
    sf.decided_msg = "equality rows are mutually contradictory";
    return sf;
  }

  // Usage scan: a free variable with nonzero cost makes the problem unbounded
  // (assuming the rest is feasible); with zero cost it can be fixed at 0.
  std::vector<char> used(static_cast<size_t>(prob.num_vars), 0);
  for (const auto& row : eq)
    if (!row.dropped)
      for (const auto& term : row.terms) used[static_cast<size_t>(term.first)] = 1;
  for (const auto& blk : prob.blocks) {
    if (blk.kind == ConeKind::Zero) continue;
    for (size_t t = 0; t < blk.col.size(); ++t)
      if (!fixed[static_cast<size_t>(blk.col[t])]) used[static_cast<size_t>(blk.col[t])] = 1;
  }
  for (int j = 0; j < prob.num_vars; ++j) {
    if (fixed[static_cast<size_t>(j)] || used[static_cast<size_t>(j)]) continue;
    if (prob.obj_coef[static_cast<size_t>(j)] != 0.0) {
      sf.decided = true;
      sf.decided_status = SolveStatus::Unbounded;
      sf.decided_msg = "variable with nonzero cost is unconstrained";
      return sf;
    }
    fixed[static_cast<size_t>(j)] = 1;
    sf.fixed_val[static_cast<size_t>(j)] = 0.0;
  }

  // Column map.
  sf.n = 0;
  for (int j = 0; j < prob.num_vars; ++j)
    sf.col_map[static_cast<size_t>(j)] = fixed[static_cast<size_t>(j)] ? -1 : sf.n++;

  // Objective.
  sf.c = Vec::Zero(sf.n);
  sf.cconst = prob.obj_constant;
  for (int j = 0; j < prob.num_vars; ++j) {
    const double cj = prob.obj_coef[static_cast<size_t>(j)];
    if (cj == 0.0) continue;
    if (fixed[static_cast<size_t>(j)])
      sf.cconst += cj * sf.fixed_val[static_cast<size_t>(j)];
    else
      sf.c(sf.col_map[static_cast<size_t>(j)]) += cj;
  }

  // Everything fixed: evaluate the cone blocks at the constants.
  if (sf.n == 0) {
    const double tol = 10.0 * feas_tol;
    Vec x0(prob.num_vars);
    for (int j = 0; j < prob.num_vars; ++j) x0(j) = sf.fixed_val[static_cast<size_t>(j)];
    for (const auto& blk : prob.blocks) {
      const Vec v = prob.eval_block(blk, x0);
      const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
      if (cone_point_min_eig(blk.kind, v) < -tol * scale) {
        sf.decided = true;
        sf.decided_status = SolveStatus::Infeasible;
        sf.decided_msg = "constants violate a cone after variable elimination";
        return sf;
      }
    }
    sf.decided = true;
    sf.decided_status = SolveStatus::Optimal;
    sf.decided_msg = "all variables fixed during presolve";
    sf.decided_primal = x0;
    sf.decided_obj = sf.cconst;
    return sf;
  }

  // Equality rows -> A x = b  (A = C, b = -d for rows C x + d = 0).
  //
  // The interior-point KKT system needs A with full row rank, so dependent
  // rows are removed here by modified Gram-Schmidt over the row-normalized
  // system. A dependent row whose right-hand side disagrees with the rows
  // spanning it proves infeasibility; an agreeing one is redundant and is
  // dropped. Kept rows are stored normalized (unit coefficient norm), which
  // also conditions the equality Schur complement.
  {
    std::vector<Vec> basis;       // orthonormal row basis
    std::vector<double> basis_b;  // right-hand sides in the orthonormal frame
    std::vector<double> bvals;
    for (const auto& row : eq) {
      if (row.dropped) continue;
      Vec v = Vec::Zero(sf.n);
      for (const auto& term : row.terms)
        v(sf.col_map[static_cast<size_t>(term.first)]) += term.second;
      double bv = -row.constant;
      const double nrm0 = v.norm();
      if (!(nrm0 > 1e-300)) {
        if (std::abs(bv) > 1e-9 * std::max(1.0, const_scale)) {
          sf.decided = true;
          sf.decided_status = SolveStatus::Infeasible;
          sf.decided_msg = "equality rows are mutually contradictory";
          return sf;
        }
        continue;
      }
      v /= nrm0;
      bv /= nrm0;
      double bres = bv;
      for (int pass = 0; pass < 2; ++pass)
        for (size_t j = 0; j < basis.size(); ++j) {
          const double cj = v.dot(basis[j]);
          v -= cj * basis[j];
          bres -= cj * basis_b[j];
        }
      const double res = v.norm();
      if (res > 1e-10) {
        basis.push_back(v / res);
        basis_b.push_back(bres / res);
        // store the original (normalized) row, not the orthogonalized one
        for (const auto& term : row.terms) {
          sf.a_col.push_back(sf.col_map[static_cast<size_t>(term.first)]);
          sf.a_val.push_back(term.second / nrm0);
        }
        sf.a_ptr.push_back(static_cast<long long>(sf.a_col.size()));
        bvals.push_back(bv);
      } else if (std::abs(bres) > 1e-8 * std::max(1.0, std::abs(bv))) {
        sf.decided = true;
        sf.decided_status = SolveStatus::Infeasible;
        sf.decided_msg = "equality rows are mutually contradictory";
        return sf;
      }
    }
    sf.b.resize(static_cast<Eigen::Index>(bvals.size()));
    for (size_t i = 0; i < bvals.size(); ++i) sf.b(static_cast<Eigen::Index>(i)) = bvals[i];
  }

  // Cone rows -> G x + s = h  (G = -C, h = d for rows C x + d in K).
  std::vector<double> hvals;
  for (const auto& blk : prob.blocks) {
    if (blk.kind == ConeKind::Zero) continue;
    sf.cones.emplace_back(blk.kind, blk.rows);
    for (int r = 0; r < blk.rows; ++r) {
      double hr = blk.constant[static_cast<size_t>(r)];
      for (long long t = blk.row_ptr[r]; t < blk.row_ptr[r + 1]; ++t) {
        const int j = blk.col[static_cast<size_t>(t)];
        const double v = blk.coef[static_cast<size_t>(t)];
        if (fixed[static_cast<size_t>(j)]) {
          hr += v * sf.fixed_val[static_cast<size_t>(j)];
        } else {
          sf.g_col.push_back(sf.col_map[static_cast<size_t>(j)]);
          sf.g_val.push_back(-v);
        }
      }
      sf.g_ptr.push_back(static_cast<long long>(sf.g_col.size()));
      hvals.push_back(hr);
    }
  }

  // A problem with no inequality cone at all still needs one for the
  // interior-point iteration; a constant satisfied row changes nothing.
  if (hvals.empty()) {
    sf.cones.emplace_back(ConeKind::NonNeg, 1);
    sf.g_ptr.push_back(static_cast<long long>(sf.g_col.size()));
    hvals.push_back(1.0);
  }
  sf.h.resize(static_cast<Eigen::Index>(hvals.size()));
  for (size_t i = 0; i < hvals.size(); ++i) sf.h(static_cast<Eigen::Index>(i)) = hvals[i];
  return sf;
}

// Maps a reduced solution vector back to original variable indexing.
inline Vec expand_solution(const StdForm& sf, const Vec& xred) {
  Vec x(sf.orig_n);
  for (int j = 0; j < sf.orig_n; ++j) {
    const int m = sf.col_map[static_cast<size_t>(j)];
    x(j) = m < 0 ? sf.fixed_val[static_cast<size_t>(j)] : xred(m);
  }
  return x;
}

}  // namespace drds::conic::detail
