#pragma once

// Finite-horizon stacked dynamics and the affine disturbance-feedback change
// of variables.
//
// A linear model x_{k+1} = A_k x_k + B_k u_k + D_k w_k over N steps unrolls
// into one linear map on stacked vectors,
//
//   x_stack = A_aug x0 + B_aug u_stack + D_aug w_stack,
//
// where x_stack holds x_0..x_N ((N+1)n rows), u_stack holds u_0..u_{N-1}
// (Nm rows), and w_stack holds w_0..w_{N-1} (Nd rows, one disturbance block
// per step mapped through D_k into x_{k+1}).
//
// Controls are parameterized as u = v + L D_aug w with L block
// lower-triangular over (control step k, state step j) blocks: L_{k,j} = 0
// for j > k, so u_k reacts to the error-state history through x~_k, which is
// measurable at time k. The equivalent state-feedback gain is
// K = L(I + B_aug L)^{-1}, inverted by L = K(I - B_aug K)^{-1}.

#include <drds/linalg.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drds::sys {

using drds::Mat;
using drds::Vec;

// Time-varying (or constant) linear model. Each matrix list holds either one
// matrix used for every step or exactly N per-step matrices.
struct LinearModel {
  int n = 0, m = 0, d = 0, N = 0;
  std::vector<Mat> A, B, D;

  static LinearModel constant(Mat a, Mat b, Mat dd, int horizon) {
    LinearModel md;
    md.n = static_cast<int>(a.rows());
    md.m = static_cast<int>(b.cols());
    md.d = static_cast<int>(dd.cols());
    md.N = horizon;
    md.A = {std::move(a)};
    md.B = {std::move(b)};
    md.D = {std::move(dd)};
    md.validate();
    return md;
  }

  static LinearModel varying(std::vector<Mat> a, std::vector<Mat> b, std::vector<Mat> dd) {
    LinearModel md;
    if (a.empty()) throw std::invalid_argument("model: empty matrix list");
    md.N = static_cast<int>(a.size());
    md.n = static_cast<int>(a[0].rows());
    md.m = static_cast<int>(b.empty() ? 0 : b[0].cols());
    md.d = static_cast<int>(dd.empty() ? 0 : dd[0].cols());
    md.A = std::move(a);
    md.B = std::move(b);
    md.D = std::move(dd);
    md.validate();
    return md;
  }

  const Mat& a(int k) const { return A.size() == 1 ? A[0] : A[static_cast<size_t>(k)]; }
  const Mat& b(int k) const { return B.size() == 1 ? B[0] : B[static_cast<size_t>(k)]; }
  const Mat& dmat(int k) const { return D.size() == 1 ? D[0] : D[static_cast<size_t>(k)]; }

  void validate() const {
    if (N < 1) throw std::invalid_argument("model: horizon must be >= 1");
    if (n < 1 || m < 1 || d < 1) throw std::invalid_argument("model: dimensions must be positive");
    auto check_list = [&](const std::vector<Mat>& lst, int rows, int cols, const char* what) {
      if (lst.size() != 1 && static_cast<int>(lst.size()) != N)
        throw std::invalid_argument(std::string("model: ") + what +
                                    " must have 1 or N matrices");
      for (const auto& mt : lst)
        if (mt.rows() != rows || mt.cols() != cols)
          throw std::invalid_argument(std::string("model: ") + what + " has wrong dimensions");
    };
    check_list(A, n, n, "A");
    check_list(B, n, m, "B");
    check_list(D, n, d, "D");
  }
};

// Stacked one-shot maps. Block row k of each matrix produces x_k.
struct AugmentedSystem {
  int n = 0, m = 0, d = 0, N = 0;
  Mat A;  // (N+1)n x n
  Mat B;  // (N+1)n x Nm, strictly block lower-triangular
  Mat D;  // (N+1)n x Nd, strictly block lower-triangular
};

inline AugmentedSystem build_augmented(const LinearModel& md) {
  md.validate();
  const int n = md.n, m = md.m, d = md.d, N = md.N;
  AugmentedSystem aug;
  aug.n = n;
  aug.m = m;
  aug.d = d;
  aug.N = N;
  aug.A = Mat::Zero((N + 1) * n, n);
  aug.B = Mat::Zero((N + 1) * n, N * m);
  aug.D = Mat::Zero((N + 1) * n, N * d);
  aug.A.topRows(n).setIdentity();
  // Row block k+1 = A_k * (row block k) with the step-k input appended.
  for (int k = 0; k < N; ++k) {
    const auto& ak = md.a(k);
    aug.A.middleRows((k + 1) * n, n) = ak * aug.A.middleRows(k * n, n);
    aug.B.middleRows((k + 1) * n, n) = ak * aug.B.middleRows(k * n, n);
    aug.D.middleRows((k + 1) * n, n) = ak * aug.D.middleRows(k * n, n);
    aug.B.block((k + 1) * n, k * m, n, m) = md.b(k);
    aug.D.block((k + 1) * n, k * d, n, d) = md.dmat(k);
  }
  return aug;
}

// Affine disturbance-feedback policy u = v + L D_aug w, with the equivalent
// state-feedback form u = v + K x~ recoverable from L.
struct Policy {
  Vec v;  // Nm
  Mat L;  // Nm x (N+1)n, block lower-triangular
  Mat K;  // Nm x (N+1)n, block lower-triangular
};

namespace detail {
inline void check_gain_dims(const Mat& g, const Mat& cal_b, const char* what) {
  if (g.rows() != cal_b.cols() || g.cols() != cal_b.rows())
    throw std::invalid_argument(std::string(what) +
                                ": gain must be (Nm x (N+1)n) matching the stacked input map");
}

inline Mat invert_unitriangular(const Mat& mt, const char* what) {
  Eigen::FullPivLU<Mat> lu(mt);
  if (!lu.isInvertible())
    throw std::invalid_argument(std::string(what) +
                                ": singular resolvent; gain is not block lower-triangular");
  return lu.inverse();
}
}  // namespace detail

inline Mat gain_l_to_k(const Mat& l, const Mat& cal_b) {
  detail::check_gain_dims(l, cal_b, "gain_l_to_k");
  const Mat eye = Mat::Identity(cal_b.rows(), cal_b.rows());
  return l * detail::invert_unitriangular(eye + cal_b * l, "gain_l_to_k");
}

inline Mat gain_k_to_l(const Mat& k, const Mat& cal_b) {
  detail::check_gain_dims(k, cal_b, "gain_k_to_l");
  const Mat eye = Mat::Identity(cal_b.rows(), cal_b.rows());
  return k * detail::invert_unitriangular(eye - cal_b * k, "gain_k_to_l");
}

// Closed-loop noise-to-state-k map: block row k of (I + B_aug L) D_aug.
inline Mat error_map(int k, const Mat& l, const AugmentedSystem& aug) {
  if (k < 0 || k > aug.N) throw std::out_of_range("error_map: step index out of range");
  const Mat ld = l * aug.D;  // Nm x Nd
  return aug.D.middleRows(k * aug.n, aug.n) + aug.B.middleRows(k * aug.n, aug.n) * ld;
}

inline Vec nominal_trajectory(const Vec& v, const Vec& x0, const AugmentedSystem& aug) {
  if (v.size() != aug.B.cols() || x0.size() != aug.n)
    throw std::invalid_argument("nominal_trajectory: dimension mismatch");
  return aug.A * x0 + aug.B * v;
}

// Stacked rollout under one disturbance sample: returns (states, controls).
inline std::pair<Vec, Vec> apply_policy(const Policy& pol, const Vec& x0, const Vec& w,
                                        const AugmentedSystem& aug) {
  if (w.size() != aug.D.cols()) throw std::invalid_argument("apply_policy: noise length mismatch");
  const Vec u = pol.v + pol.L * (aug.D * w);
  const Vec x = aug.A * x0 + aug.B * u + aug.D * w;
  return {x, u};
}

// ---------------------------------------------------------------------------
// Model files: plain text with keys n, m, d, N followed by named matrix
// blocks. `A` introduces a constant matrix (n rows follow); `A 3` introduces
// the step-3 matrix of a per-step list. Same for B and D. Comments start
// with '#'.
// ---------------------------------------------------------------------------
inline LinearModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("model file: cannot open " + path);
  int n = -1, m = -1, d = -1, N = -1;
  std::vector<Mat> A, B, D;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("model file " + path + ":" + std::to_string(lineno) + ": " + msg);
  };
  auto read_matrix = [&](int rows, int cols) {
    Mat mt(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) fail("unexpected end of file inside matrix");
      ++lineno;
      std::istringstream ss(line);
      for (int c = 0; c < cols; ++c)
        if (!(ss >> mt(r, c))) fail("matrix row has too few entries");
      double extra;
      if (ss >> extra) fail("matrix row has too many entries");
    }
    return mt;
  };
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "n" || key == "m" || key == "d" || key == "N") {
      int val;
      if (!(ss >> val)) fail("expected integer after " + key);
      (key == "n" ? n : key == "m" ? m : key == "d" ? d : N) = val;
      continue;
    }
    if (key != "A" && key != "B" && key != "D") fail("unknown key '" + key + "'");
    if (n < 0 || m < 0 || d < 0 || N < 0) fail("matrix block before n/m/d/N header");
    const int cols = key == "A" ? n : key == "B" ? m : d;
    auto& list = key == "A" ? A : key == "B" ? B : D;
    int step = -1;
    if (ss >> step) {
      if (step != static_cast<int>(list.size()))
        fail(key + " blocks must appear in step order 0..N-1");
    } else if (!list.empty()) {
      fail("repeated constant matrix " + key);
    }
    list.push_back(read_matrix(n, cols));
  }
  if (n < 0 || m < 0 || d < 0 || N < 0)
    throw std::runtime_error("model file " + path + ": missing n/m/d/N header");
  LinearModel md;
  md.n = n;
  md.m = m;
  md.d = d;
  md.N = N;
  md.A = std::move(A);
  md.B = std::move(B);
  md.D = std::move(D);
  md.validate();
  return md;
}

}  // namespace drds::sys
