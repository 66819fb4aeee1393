#pragma once

// Dense linear-algebra support: LAPACK bindings for the hot paths (Cholesky,
// symmetric eigendecomposition, SVD), PSD-aware matrix functions, the scaled
// symmetric vectorization (svec/smat), and standard-normal helpers.
//
// Everything works on Eigen dense types in column-major (Eigen default)
// storage, which is also LAPACK's convention, so matrices are passed through
// without copies wherever possible.

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#if defined(__linux__)
#include <unistd.h>
#endif

extern "C" {
void dpotrf_(const char* uplo, const int* n, double* a, const int* lda, int* info);
void dpotrs_(const char* uplo, const int* n, const int* nrhs, const double* a,
             const int* lda, double* b, const int* ldb, int* info);
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork,
             int* info);
void dgesdd_(const char* jobz, const int* m, const int* n, double* a, const int* lda,
             double* s, double* u, const int* ldu, double* vt, const int* ldvt,
             double* work, const int* lwork, int* iwork, int* info);
void dsyrk_(const char* uplo, const char* trans, const int* n, const int* k,
            const double* alpha, const double* a, const int* lda, const double* beta,
            double* c, const int* ldc);
void openblas_set_num_threads(int);
}

namespace drds {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// BLAS runtime setup.
//
// OpenBLAS picks its kernel from CPUID at load time; on some hypervisors the
// reported model string defeats the detection and a slow generic kernel is
// chosen even though AVX-512 is available. The kernel choice is read from
// OPENBLAS_CORETYPE inside the library's own constructor, which runs before
// main(), so setting the variable from inside the process cannot influence
// the current process any more. require_fast_blas_or_reexec(), called first
// thing in main() by every binary in this project, restarts the process once
// with the variable pinned when (and only when) the CPU really has AVX-512F
// and the user has not chosen a kernel explicitly. Thread count is pinned to
// 1: the solver is sequential and oversubscription on small machines costs
// more than it buys.
// ---------------------------------------------------------------------------
inline void ensure_blas_ready() {
  static std::once_flag flag;
  std::call_once(flag, [] { openblas_set_num_threads(1); });
}

inline void require_fast_blas_or_reexec() {
#if defined(__x86_64__) && defined(__linux__)
  if (!__builtin_cpu_supports("avx512f")) return;
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  std::vector<std::string> args;
  {
    std::ifstream cmd("/proc/self/cmdline", std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(cmd)), std::istreambuf_iterator<char>());
    size_t start = 0;
    while (start < all.size()) {
      const size_t end = all.find('\0', start);
      if (end == std::string::npos) {
        args.emplace_back(all.substr(start));
        break;
      }
      args.emplace_back(all.substr(start, end - start));
      start = end + 1;
    }
  }
  if (args.empty()) return;
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  ::setenv("OPENBLAS_CORETYPE", "SKYLAKEX", /*overwrite=*/1);
  ::execv("/proc/self/exe", argv.data());
  // execv only returns on failure; fall through and run with slow kernels.
#endif
}

// ---------------------------------------------------------------------------
// LAPACK wrappers
// ---------------------------------------------------------------------------

// In-place lower Cholesky of a symmetric positive-definite matrix.
// Returns false when the matrix is not numerically PD.
inline bool chol_inplace(Mat& a) {
  ensure_blas_ready();
  const int n = static_cast<int>(a.rows());
  if (n == 0) return true;
  int info = 0;
  dpotrf_("L", &n, a.data(), &n, &info);
  return info == 0;
}

// Solves A x = b for (possibly many) right-hand sides given chol_inplace(A)'s
// output (the lower factor) in `llt`.
inline void chol_solve_inplace(const Mat& llt, Mat& b) {
  const int n = static_cast<int>(llt.rows());
  const int nrhs = static_cast<int>(b.cols());
  if (n == 0 || nrhs == 0) return;
  int info = 0;
  dpotrs_("L", &n, &nrhs, llt.data(), &n, b.data(), &n, &info);
  if (info != 0) throw std::runtime_error("dpotrs failed: info=" + std::to_string(info));
}

// Same, on raw storage (column-major, leading dimension n).
inline void chol_solve_ptr(const Mat& llt, double* b, int nrhs) {
  const int n = static_cast<int>(llt.rows());
  if (n == 0 || nrhs == 0) return;
  int info = 0;
  dpotrs_("L", &n, &nrhs, llt.data(), &n, b, &n, &info);
  if (info != 0) throw std::runtime_error("dpotrs failed: info=" + std::to_string(info));
}

// Lower triangle of c := alpha * a^T a + beta * c  (a is k x n, c is n x n).
inline void syrk_t_lower(const Mat& a, Mat& c, double alpha = 1.0, double beta = 0.0) {
  ensure_blas_ready();
  const int n = static_cast<int>(a.cols());
  const int k = static_cast<int>(a.rows());
  const int ldc = static_cast<int>(c.rows());
  if (n == 0) return;
  if (k == 0) {
    if (beta == 0.0) c.topLeftCorner(n, n).setZero();
    return;
  }
  dsyrk_("L", "T", &n, &k, &alpha, a.data(), &k, &beta, c.data(), &ldc);
}

// Symmetric eigendecomposition, eigenvalues ascending. A = V diag(w) V^T.
inline void sym_eig(const Mat& a, Vec& w, Mat& v) {
  ensure_blas_ready();
  const int n = static_cast<int>(a.rows());
  v = a;
  w.resize(n);
  if (n == 0) return;
  int info = 0;
  int lwork = -1, liwork = -1;
  double wkopt = 0;
  int iwkopt = 0;
  dsyevd_("V", "L", &n, v.data(), &n, w.data(), &wkopt, &lwork, &iwkopt, &liwork, &info);
  lwork = static_cast<int>(wkopt);
  liwork = iwkopt;
  std::vector<double> work(static_cast<size_t>(lwork));
  std::vector<int> iwork(static_cast<size_t>(liwork));
  dsyevd_("V", "L", &n, v.data(), &n, w.data(), work.data(), &lwork, iwork.data(), &liwork,
          &info);
  if (info != 0) throw std::runtime_error("dsyevd failed: info=" + std::to_string(info));
}

// Eigenvalues only (ascending) of a symmetric matrix.
inline Vec sym_eigvals(const Mat& a) {
  ensure_blas_ready();
  const int n = static_cast<int>(a.rows());
  Mat tmp = a;
  Vec w(n);
  if (n == 0) return w;
  int info = 0;
  int lwork = -1, liwork = -1;
  double wkopt = 0;
  int iwkopt = 0;
  dsyevd_("N", "L", &n, tmp.data(), &n, w.data(), &wkopt, &lwork, &iwkopt, &liwork, &info);
  lwork = static_cast<int>(wkopt);
  liwork = iwkopt;
  std::vector<double> work(static_cast<size_t>(lwork));
  std::vector<int> iwork(static_cast<size_t>(liwork));
  dsyevd_("N", "L", &n, tmp.data(), &n, w.data(), work.data(), &lwork, iwork.data(), &liwork,
          &info);
  if (info != 0) throw std::runtime_error("dsyevd failed: info=" + std::to_string(info));
  return w;
}

// Thin SVD a = U diag(s) V^T (destroys a copy). s descending.
inline void svd(const Mat& a, Mat& u, Vec& s, Mat& vt) {
  ensure_blas_ready();
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  const int k = std::min(m, n);
  Mat tmp = a;
  u.resize(m, k);
  vt.resize(k, n);
  s.resize(k);
  if (k == 0) return;
  int info = 0;
  int lwork = -1;
  double wkopt = 0;
  std::vector<int> iwork(static_cast<size_t>(8 * k));
  dgesdd_("S", &m, &n, tmp.data(), &m, s.data(), u.data(), &m, vt.data(), &k, &wkopt, &lwork,
          iwork.data(), &info);
  lwork = static_cast<int>(wkopt);
  std::vector<double> work(static_cast<size_t>(lwork));
  dgesdd_("S", &m, &n, tmp.data(), &m, s.data(), u.data(), &m, vt.data(), &k, work.data(),
          &lwork, iwork.data(), &info);
  if (info != 0) throw std::runtime_error("dgesdd failed: info=" + std::to_string(info));
}

// Largest singular value.
inline double sigma_max(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Mat u, vt;
  Vec s;
  svd(a, u, s, vt);
  return s.size() ? s(0) : 0.0;
}

// ---------------------------------------------------------------------------
// PSD matrix functions (symmetric eigendecomposition with eigenvalue clipping
// at 0; sampled covariances routinely carry -1e-14-size eigenvalues).
// ---------------------------------------------------------------------------

inline void require_symmetric(const Mat& a, double tol, const char* what) {
  if (a.rows() != a.cols() || (a - a.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
}

// Symmetric PSD square root with negative-eigenvalue clipping.
inline Mat psd_sqrt(const Mat& a, double clip = 1e-12) {
  Vec w;
  Mat v;
  sym_eig(0.5 * (a + a.transpose()), w, v);
  const double scale = std::max(1.0, w.size() ? std::abs(w(w.size() - 1)) : 0.0);
  for (int i = 0; i < w.size(); ++i) {
    if (w(i) < -clip * scale && w(i) < -clip)
      throw std::invalid_argument("psd_sqrt: matrix has a significantly negative eigenvalue");
    w(i) = std::sqrt(std::max(w(i), 0.0));
  }
  return v * w.asDiagonal() * v.transpose();
}

// Nearest-PSD projection by eigenvalue clipping at 0.
inline Mat psd_clip(const Mat& a, double floor_value = 0.0) {
  Vec w;
  Mat v;
  sym_eig(0.5 * (a + a.transpose()), w, v);
  for (int i = 0; i < w.size(); ++i) w(i) = std::max(w(i), floor_value);
  return v * w.asDiagonal() * v.transpose();
}

// ---------------------------------------------------------------------------
// Scaled symmetric vectorization.
//
// Lower triangle, column-major: (0,0),(1,0),...,(n-1,0),(1,1),...,(n-1,n-1).
// Off-diagonal entries are scaled by sqrt(2) so that
//   <svec(A), svec(B)> = tr(A B)
// exactly, which makes cone membership tests inner-product exact.
// ---------------------------------------------------------------------------

inline int svec_len(int n) { return n * (n + 1) / 2; }

// Matrix order n from svec length, or -1 if not a triangular number.
inline int svec_order(int len) {
  const int n = static_cast<int>((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0 + 0.5);
  return svec_len(n) == len ? n : -1;
}

// svec index of entry (r, c), r >= c.
inline int svec_index(int r, int c, int n) { return c * n - c * (c - 1) / 2 + (r - c); }

inline Vec svec(const Mat& m, double sym_tol = 1e-12) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  require_symmetric(m, sym_tol * scale, "svec");
  const int n = static_cast<int>(m.rows());
  static const double rt2 = std::sqrt(2.0);
  Vec out(svec_len(n));
  int idx = 0;
  for (int c = 0; c < n; ++c)
    for (int r = c; r < n; ++r) out(idx++) = (r == c) ? m(r, c) : rt2 * 0.5 * (m(r, c) + m(c, r));
  return out;
}

inline Mat smat(const Vec& v) {
  const int n = svec_order(static_cast<int>(v.size()));
  if (n < 0) throw std::invalid_argument("smat: length is not a triangular number");
  static const double irt2 = 1.0 / std::sqrt(2.0);
  Mat m(n, n);
  int idx = 0;
  for (int c = 0; c < n; ++c)
    for (int r = c; r < n; ++r) {
      const double x = v(idx++);
      if (r == c) {
        m(r, c) = x;
      } else {
        m(r, c) = x * irt2;
        m(c, r) = x * irt2;
      }
    }
  return m;
}

// ---------------------------------------------------------------------------
// Standard-normal helpers.
// ---------------------------------------------------------------------------

inline double normal_pdf(double x) {
  static const double c = 1.0 / std::sqrt(2.0 * M_PI);
  return c * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse standard-normal CDF: Acklam's rational approximation polished by one
// Halley step on erfc, giving ~1e-15 relative accuracy across (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace drds
