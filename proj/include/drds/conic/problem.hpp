#pragma once

// Conic program representation: a linear objective over a flat variable
// vector, constrained by blocks of affine rows tagged with a cone.
//
//   Zero:        rows(x) = 0
//   NonNeg:      rows(x) >= 0 componentwise
//   SecondOrder: rows_0(x) >= || rows_{1..}(x) ||_2
//   Psd:         smat(rows(x)) is positive semidefinite
//
// Psd blocks carry the scaled lower-triangular vectorization (svec) of the
// matrix-valued affine expression, so a Psd block over an n x n matrix has
// n(n+1)/2 rows. Affine rows are stored as sparse (index, coefficient) lists;
// the dump format below prints them densely.

#include <drds/linalg.hpp>

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace drds::conic {

enum class VarShape { Scalar, Vector, SymMatrix };
enum class ConeKind { Zero, NonNeg, SecondOrder, Psd };
enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* to_string(ConeKind k) {
  switch (k) {
    case ConeKind::Zero: return "Zero";
    case ConeKind::NonNeg: return "NonNeg";
    case ConeKind::SecondOrder: return "SecondOrder";
    case ConeKind::Psd: return "Psd";
  }
  return "?";
}

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

struct VarHandle {
  int offset = 0;  // index into the flat variable vector
  int len = 0;     // flat length (n(n+1)/2 for SymMatrix(n))
  int dim = 0;     // n for Vector(n)/SymMatrix(n), 1 for Scalar
  VarShape shape = VarShape::Scalar;

  int operator()(int i) const { return offset + i; }
  // Flat index of symmetric-matrix entry (r, c).
  int sym(int r, int c) const {
    const int lo = std::min(r, c), hi = std::max(r, c);
    return offset + svec_index(hi, lo, dim);
  }
};

// Sparse affine expression sum_i coef_i * x_{idx_i} + constant.
struct AffineExpr {
  std::vector<int> idx;
  std::vector<double> coef;
  double constant = 0.0;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}

  AffineExpr& add(int variable, double coefficient) {
    if (coefficient != 0.0) {
      idx.push_back(variable);
      coef.push_back(coefficient);
    }
    return *this;
  }
  size_t terms() const { return idx.size(); }
};

// One cone-tagged constraint block; rows held in CSR form.
struct ConeBlock {
  ConeKind kind = ConeKind::Zero;
  int rows = 0;
  std::vector<long long> row_ptr;  // rows + 1
  std::vector<int> col;
  std::vector<double> coef;
  std::vector<double> constant;  // per row
};

struct ConicProblem {
  int num_vars = 0;
  std::vector<double> obj_coef;  // dense, length num_vars
  double obj_constant = 0.0;
  std::vector<ConeBlock> blocks;

  VarHandle add_variable(VarShape shape, int dim = 1) {
    if (dim < 1) throw std::invalid_argument("add_variable: dimension must be >= 1");
    VarHandle h;
    h.shape = shape;
    h.dim = (shape == VarShape::Scalar) ? 1 : dim;
    h.len = (shape == VarShape::Scalar) ? 1
            : (shape == VarShape::Vector) ? dim
                                          : svec_len(dim);
    h.offset = num_vars;
    num_vars += h.len;
    obj_coef.resize(static_cast<size_t>(num_vars), 0.0);
    return h;
  }

  int add_cone(ConeKind kind, const std::vector<AffineExpr>& rows) {
    if (rows.empty()) throw std::invalid_argument("add_cone: empty block");
    if (kind == ConeKind::SecondOrder && rows.size() < 2)
      throw std::invalid_argument("add_cone: SecondOrder blocks need >= 2 rows");
    if (kind == ConeKind::Psd && svec_order(static_cast<int>(rows.size())) < 0)
      throw std::invalid_argument("add_cone: Psd row count is not a triangular number");
    ConeBlock b;
    b.kind = kind;
    b.rows = static_cast<int>(rows.size());
    b.row_ptr.reserve(rows.size() + 1);
    b.row_ptr.push_back(0);
    for (const auto& r : rows) {
      for (size_t t = 0; t < r.idx.size(); ++t) {
        if (r.idx[t] < 0 || r.idx[t] >= num_vars)
          throw std::invalid_argument("add_cone: row references an undeclared variable");
        b.col.push_back(r.idx[t]);
        b.coef.push_back(r.coef[t]);
      }
      b.row_ptr.push_back(static_cast<long long>(b.col.size()));
      b.constant.push_back(r.constant);
    }
    blocks.push_back(std::move(b));
    return static_cast<int>(blocks.size()) - 1;
  }

  // Replaces the objective; solve() minimizes coeffs . x + constant.
  void set_objective(const AffineExpr& objective) {
    std::fill(obj_coef.begin(), obj_coef.end(), 0.0);
    obj_constant = objective.constant;
    for (size_t t = 0; t < objective.idx.size(); ++t) {
      if (objective.idx[t] < 0 || objective.idx[t] >= num_vars)
        throw std::invalid_argument("set_objective: undeclared variable");
      obj_coef[static_cast<size_t>(objective.idx[t])] += objective.coef[t];
    }
  }

  // Evaluates one block's rows at a primal point.
  Vec eval_block(const ConeBlock& b, const Vec& x) const {
    Vec out(b.rows);
    for (int r = 0; r < b.rows; ++r) {
      double acc = b.constant[static_cast<size_t>(r)];
      for (long long t = b.row_ptr[r]; t < b.row_ptr[r + 1]; ++t)
        acc += b.coef[static_cast<size_t>(t)] * x(b.col[static_cast<size_t>(t)]);
      out(r) = acc;
    }
    return out;
  }

  // Worst cone violation of a block evaluated at x (0 when satisfied).
  double block_violation(const ConeBlock& b, const Vec& x) const {
    const Vec v = eval_block(b, x);
    switch (b.kind) {
      case ConeKind::Zero: return v.cwiseAbs().maxCoeff();
      case ConeKind::NonNeg: return std::max(0.0, -v.minCoeff());
      case ConeKind::SecondOrder: return std::max(0.0, v.tail(v.size() - 1).norm() - v(0));
      case ConeKind::Psd: {
        const Vec w = sym_eigvals(smat(v));
        return std::max(0.0, -w(0));
      }
    }
    return 0.0;
  }

  double objective_at(const Vec& x) const {
    double acc = obj_constant;
    for (int j = 0; j < num_vars; ++j) acc += obj_coef[static_cast<size_t>(j)] * x(j);
    return acc;
  }

  // Text dump for external cross-checking. Layout:
  //   vars N
  //   objective c_1 ... c_N const
  //   <Kind> <row-count>       (one per block)
  //   a_1 ... a_N b            (dense row)
  std::string dump() const {
    std::string out;
    char buf[64];
    auto put = [&](double v) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out += buf;
    };
    out += "vars " + std::to_string(num_vars) + "\n";
    out += "objective";
    for (int j = 0; j < num_vars; ++j) put(obj_coef[static_cast<size_t>(j)]);
    put(obj_constant);
    out += "\n";
    std::vector<double> dense(static_cast<size_t>(num_vars));
    for (const auto& b : blocks) {
      out += std::string(to_string(b.kind)) + " " + std::to_string(b.rows) + "\n";
      for (int r = 0; r < b.rows; ++r) {
        std::fill(dense.begin(), dense.end(), 0.0);
        for (long long t = b.row_ptr[r]; t < b.row_ptr[r + 1]; ++t)
          dense[static_cast<size_t>(b.col[static_cast<size_t>(t)])] +=
              b.coef[static_cast<size_t>(t)];
        for (int j = 0; j < num_vars; ++j) put(dense[static_cast<size_t>(j)]);
        put(b.constant[static_cast<size_t>(r)]);
        out += "\n";
      }
    }
    return out;
  }
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vec primal;          // length num_vars when status == Optimal
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string message;
};

struct SolveSettings {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 100;
  bool verbose = false;
  std::string backend;  // empty = first registered
};

}  // namespace drds::conic
