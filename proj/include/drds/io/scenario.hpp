#pragma once

// Scenario files: a JSON document describing one steering experiment.
//
// Sections (fixed schema, unknown keys rejected with their field path):
//
//   model       {n, m, d, N, dt, A, B, D}   A/B/D: one matrix or N per-step
//   initial_state  [n numbers]
//   cost        {Q, R, beta}                Q/R: one matrix or N per-step
//   noise       {sigma_w | dryden{V0,z,b}, epsilon, kind?, seed?}
//   constraints [{alpha, offset, gamma, steps}]           (optional)
//   terminal    {mu_f, Sigma_f, delta}
//   solver      {tol?, max_iter?}                         (optional)
//   montecarlo  {T?, noise_kind?}                         (optional)
//
// `sigma_w` is either the per-step disturbance covariance (d x d, the
// stacked covariance is then block-diagonal with N copies) or the full
// stacked (N d) x (N d) covariance.  `dryden` builds the stacked covariance
// from the wind-turbulence spectra and requires d = 6 (three angular-rate
// channels feeding attitude rows, then three linear-gust channels feeding
// velocity rows).
//
// Loading re-checks every invariant and reports violations with the path of
// the offending field (e.g. constraints[0].gamma).  save_scenario /
// scenario_text emit a canonical serialization (fixed key order, 17
// significant digits) whose SHA-256 is the scenario digest embedded in run
// reports; loading the canonical text reproduces an equivalent scenario.

#include <drds/drds.hpp>
#include <drds/io/digest.hpp>
#include <drds/io/text.hpp>
#include <drds/noise.hpp>

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace drds::io {

// Bad scenario content: parse failures and invariant violations.  Messages
// name the offending field.
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parsed scenario file: the validated steering scenario plus the
// run-orchestration settings that live outside the synthesis problem.
struct ScenarioFile {
  steer::Scenario scenario;
  double dt = 0.0;  // step length [s]

  // Disturbance covariance source: exactly one of the two is set.
  Mat sigma_w_input;                          // d x d or (N d) x (N d), as given
  std::optional<noise::DrydenParams> dryden;  // wind-turbulence parameters

  noise::NoiseKind noise_kind = noise::NoiseKind::Nominal;  // default family
  std::uint64_t seed = 0;

  conic::SolveSettings solver;

  int mc_samples = 1000;
  noise::NoiseKind mc_kind = noise::NoiseKind::Nominal;

  std::string name;  // basename of the source file, informational
};

inline const char* kind_name(noise::NoiseKind k) {
  switch (k) {
    case noise::NoiseKind::Nominal: return "nominal";
    case noise::NoiseKind::MaximalInBall: return "maximal";
    case noise::NoiseKind::StudentT: return "student-t";
    case noise::NoiseKind::Custom: return "custom";
  }
  return "?";
}

inline noise::NoiseKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "nominal") return noise::NoiseKind::Nominal;
  if (s == "maximal") return noise::NoiseKind::MaximalInBall;
  if (s == "student-t" || s == "student_t") return noise::NoiseKind::StudentT;
  if (s == "custom") return noise::NoiseKind::Custom;
  throw ScenarioError(path + ": unknown noise kind \"" + s +
                      "\" (expected nominal|maximal|student-t|custom)");
}

namespace detail {

using Json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path.empty() ? what : path + ": " + what);
}

inline const Json& require_object(const Json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  return v;
}

inline void check_keys(const Json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail(path, "unknown key \"" + item.key() + "\"");
  }
}

inline const Json& member(const Json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing required key \"") + key + "\"");
  return *it;
}

inline const Json* member_opt(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double num(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline long long integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected an integer");
  return v.get<long long>();
}

inline std::uint64_t uinteger(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const long long s = v.get<long long>();
    if (s < 0) fail(path, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(s);
  }
  fail(path, "expected a nonnegative integer");
}

inline std::string str(const Json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

// Vector: a flat array of numbers.  expect < 0 means any positive length.
inline Vec vec(const Json& v, const std::string& path, int expect = -1) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of numbers");
  if (expect >= 0 && static_cast<int>(v.size()) != expect)
    fail(path, "expected " + std::to_string(expect) + " entries, got " +
                   std::to_string(v.size()));
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = num(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

// Matrix: an array of equal-length rows.  rows/cols < 0 means inferred.
inline Mat mat(const Json& v, const std::string& path, int rows, int cols) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of rows");
  const int nr = static_cast<int>(v.size());
  if (rows >= 0 && nr != rows)
    fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(nr));
  if (!v[0].is_array() || v[0].empty()) fail(path + "[0]", "expected a nonempty row");
  const int nc = static_cast<int>(v[0].size());
  if (cols >= 0 && nc != cols)
    fail(path, "expected " + std::to_string(cols) + " columns, got " + std::to_string(nc));
  Mat out(nr, nc);
  for (int r = 0; r < nr; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || static_cast<int>(v[r].size()) != nc)
      fail(rp, "expected a row of " + std::to_string(nc) + " numbers");
    for (int c = 0; c < nc; ++c)
      out(r, c) = num(v[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return out;
}

// One matrix (used for every step) or a list of exactly `horizon` matrices.
inline std::vector<Mat> mat_or_list(const Json& v, const std::string& path, int rows, int cols,
                                    int horizon) {
  if (!v.is_array() || v.empty()) fail(path, "expected a matrix or a per-step list of matrices");
  const bool per_step = v[0].is_array() && !v[0].empty() && v[0][0].is_array();
  if (!per_step) return {mat(v, path, rows, cols)};
  if (static_cast<int>(v.size()) != horizon)
    fail(path, "per-step list must have exactly " + std::to_string(horizon) + " matrices, got " +
                   std::to_string(v.size()));
  std::vector<Mat> out;
  out.reserve(v.size());
  for (size_t k = 0; k < v.size(); ++k)
    out.push_back(mat(v[k], path + "[" + std::to_string(k) + "]", rows, cols));
  return out;
}

inline void require_pd(const std::vector<Mat>& ms, const std::string& path, const char* msg) {
  for (const Mat& mt : ms) {
    const Mat s = 0.5 * (mt + mt.transpose());
    if (sym_eigvals(s)(0) <= 0.0) fail(path, msg);
  }
}

inline void require_psd(const std::vector<Mat>& ms, const std::string& path, const char* msg) {
  for (const Mat& mt : ms) {
    const Mat s = 0.5 * (mt + mt.transpose());
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if (sym_eigvals(s)(0) < -1e-10 * scale) fail(path, msg);
  }
}

}  // namespace detail

// Parses a scenario document.  `name` labels the source in error messages
// and reports (typically the file basename).
inline ScenarioFile parse_scenario_text(const std::string& text, const std::string& name = "") {
  using detail::Json;
  Json root;
  try {
    root = Json::parse(text);
  } catch (const std::exception& e) {
    throw ScenarioError((name.empty() ? std::string("scenario") : name) +
                        ": parse error: " + e.what());
  }
  detail::require_object(root, "");
  detail::check_keys(root, "scenario",
                     {"model", "initial_state", "cost", "noise", "constraints", "terminal",
                      "solver", "montecarlo"});

  ScenarioFile sf;
  sf.name = name;
  steer::Scenario& sc = sf.scenario;

  // --- model ---------------------------------------------------------------
  const Json& jm = detail::require_object(detail::member(root, "scenario", "model"), "model");
  detail::check_keys(jm, "model", {"n", "m", "d", "N", "dt", "A", "B", "D"});
  const int n = static_cast<int>(detail::integer(detail::member(jm, "model", "n"), "model.n"));
  const int m = static_cast<int>(detail::integer(detail::member(jm, "model", "m"), "model.m"));
  const int d = static_cast<int>(detail::integer(detail::member(jm, "model", "d"), "model.d"));
  const int N = static_cast<int>(detail::integer(detail::member(jm, "model", "N"), "model.N"));
  if (n < 1) detail::fail("model.n", "must be a positive integer");
  if (m < 1) detail::fail("model.m", "must be a positive integer");
  if (d < 1) detail::fail("model.d", "must be a positive integer");
  if (N < 1) detail::fail("model.N", "must be a positive integer");
  sf.dt = detail::num(detail::member(jm, "model", "dt"), "model.dt");
  if (!(sf.dt > 0.0)) detail::fail("model.dt", "must be > 0");
  sc.model.n = n;
  sc.model.m = m;
  sc.model.d = d;
  sc.model.N = N;
  sc.model.A = detail::mat_or_list(detail::member(jm, "model", "A"), "model.A", n, n, N);
  sc.model.B = detail::mat_or_list(detail::member(jm, "model", "B"), "model.B", n, m, N);
  sc.model.D = detail::mat_or_list(detail::member(jm, "model", "D"), "model.D", n, d, N);

  // --- initial_state -------------------------------------------------------
  sc.x0 = detail::vec(detail::member(root, "scenario", "initial_state"), "initial_state", n);

  // --- cost ----------------------------------------------------------------
  const Json& jc = detail::require_object(detail::member(root, "scenario", "cost"), "cost");
  detail::check_keys(jc, "cost", {"Q", "R", "beta"});
  sc.cost.q = detail::mat_or_list(detail::member(jc, "cost", "Q"), "cost.Q", n, n, N);
  sc.cost.r = detail::mat_or_list(detail::member(jc, "cost", "R"), "cost.R", m, m, N);
  sc.cost.beta = detail::num(detail::member(jc, "cost", "beta"), "cost.beta");
  if (!(sc.cost.beta > 0.0)) detail::fail("cost.beta", "must be > 0");
  detail::require_psd(sc.cost.q, "cost.Q", "Q must be positive semidefinite");
  detail::require_pd(sc.cost.r, "cost.R", "R must be positive definite");

  // --- noise ---------------------------------------------------------------
  const Json& jn = detail::require_object(detail::member(root, "scenario", "noise"), "noise");
  detail::check_keys(jn, "noise", {"sigma_w", "dryden", "epsilon", "kind", "seed"});
  const Json* jsw = detail::member_opt(jn, "sigma_w");
  const Json* jdr = detail::member_opt(jn, "dryden");
  if ((jsw != nullptr) == (jdr != nullptr))
    detail::fail("noise", "give exactly one of sigma_w or dryden");
  const int nd = N * d;
  if (jsw) {
    Mat sw = detail::mat(*jsw, "noise.sigma_w", -1, -1);
    if (!((sw.rows() == d && sw.cols() == d) || (sw.rows() == nd && sw.cols() == nd)))
      detail::fail("noise.sigma_w", "must be d x d (per step) or (N d) x (N d) (stacked)");
    sf.sigma_w_input = sw;
    if (sw.rows() == d) {
      Mat stacked = Mat::Zero(nd, nd);
      for (int k = 0; k < N; ++k) stacked.block(k * d, k * d, d, d) = sw;
      sc.noise.center.cov = stacked;
    } else {
      sc.noise.center.cov = sw;
    }
  } else {
    const Json& jd = detail::require_object(*jdr, "noise.dryden");
    detail::check_keys(jd, "noise.dryden", {"V0", "z", "b"});
    if (d != 6)
      detail::fail("noise.dryden",
                   "requires d = 6 disturbance channels (3 angular rates + 3 linear gusts)");
    noise::DrydenParams dp;
    dp.v0 = detail::num(detail::member(jd, "noise.dryden", "V0"), "noise.dryden.V0");
    dp.z = detail::num(detail::member(jd, "noise.dryden", "z"), "noise.dryden.z");
    dp.b = detail::num(detail::member(jd, "noise.dryden", "b"), "noise.dryden.b");
    if (!(dp.v0 > 0.0)) detail::fail("noise.dryden.V0", "must be > 0");
    if (!(dp.z > 0.0)) detail::fail("noise.dryden.z", "must be > 0");
    if (!(dp.b > 0.0)) detail::fail("noise.dryden.b", "must be > 0");
    dp.dt = sf.dt;
    dp.channels = {noise::DrydenChannel::RollRate, noise::DrydenChannel::PitchRate,
                   noise::DrydenChannel::YawRate,  noise::DrydenChannel::LonGust,
                   noise::DrydenChannel::LatGust,  noise::DrydenChannel::VertGust};
    sf.dryden = dp;
    sc.noise.center.cov = noise::dryden_covariance(dp, N);
  }
  sc.noise.center.mean = Vec::Zero(nd);
  sc.noise.radius = detail::num(detail::member(jn, "noise", "epsilon"), "noise.epsilon");
  if (sc.noise.radius < 0.0) detail::fail("noise.epsilon", "must be >= 0");
  if (const Json* jk = detail::member_opt(jn, "kind"))
    sf.noise_kind = parse_kind(detail::str(*jk, "noise.kind"), "noise.kind");
  if (const Json* js = detail::member_opt(jn, "seed"))
    sf.seed = detail::uinteger(*js, "noise.seed");

  // --- constraints ---------------------------------------------------------
  if (const Json* jcs = detail::member_opt(root, "constraints")) {
    if (!jcs->is_array()) detail::fail("constraints", "expected an array");
    for (size_t j = 0; j < jcs->size(); ++j) {
      const std::string path = "constraints[" + std::to_string(j) + "]";
      const Json& je = detail::require_object((*jcs)[j], path);
      detail::check_keys(je, path, {"alpha", "offset", "gamma", "steps"});
      steer::Halfspace hs;
      hs.alpha = detail::vec(detail::member(je, path, "alpha"), path + ".alpha", n);
      hs.offset = detail::num(detail::member(je, path, "offset"), path + ".offset");
      hs.gamma = detail::num(detail::member(je, path, "gamma"), path + ".gamma");
      if (!(hs.gamma > 0.0) || !(hs.gamma < 1.0))
        detail::fail(path + ".gamma", "must lie in (0, 1)");
      const Json& jst = detail::member(je, path, "steps");
      if (!jst.is_array() || jst.empty())
        detail::fail(path + ".steps", "expected a nonempty array of steps");
      for (size_t s = 0; s < jst.size(); ++s) {
        const std::string sp = path + ".steps[" + std::to_string(s) + "]";
        const long long k = detail::integer(jst[s], sp);
        if (k < 0 || k > N) detail::fail(sp, "step must lie in 0.." + std::to_string(N));
        hs.steps.push_back(static_cast<int>(k));
      }
      sc.halfspaces.push_back(std::move(hs));
    }
  }

  // --- terminal ------------------------------------------------------------
  const Json& jt = detail::require_object(detail::member(root, "scenario", "terminal"), "terminal");
  detail::check_keys(jt, "terminal", {"mu_f", "Sigma_f", "delta"});
  sc.terminal_mean = detail::vec(detail::member(jt, "terminal", "mu_f"), "terminal.mu_f", n);
  sc.terminal_cov = detail::mat(detail::member(jt, "terminal", "Sigma_f"), "terminal.Sigma_f", n, n);
  detail::require_pd({sc.terminal_cov}, "terminal.Sigma_f", "Sigma_f must be positive definite");
  sc.spread_cap = detail::num(detail::member(jt, "terminal", "delta"), "terminal.delta");
  if (sc.spread_cap < 0.0) detail::fail("terminal.delta", "must be >= 0");

  // --- solver --------------------------------------------------------------
  if (const Json* jsv = detail::member_opt(root, "solver")) {
    detail::require_object(*jsv, "solver");
    detail::check_keys(*jsv, "solver", {"tol", "max_iter"});
    if (const Json* jtol = detail::member_opt(*jsv, "tol")) {
      const double tol = detail::num(*jtol, "solver.tol");
      if (!(tol > 0.0)) detail::fail("solver.tol", "must be > 0");
      sf.solver.feas_tol = tol;
      sf.solver.gap_tol = tol;
    }
    if (const Json* jmi = detail::member_opt(*jsv, "max_iter")) {
      const long long mi = detail::integer(*jmi, "solver.max_iter");
      if (mi < 1) detail::fail("solver.max_iter", "must be >= 1");
      sf.solver.max_iter = static_cast<int>(mi);
    }
  }

  // --- montecarlo ----------------------------------------------------------
  sf.mc_kind = sf.noise_kind;
  if (const Json* jmc = detail::member_opt(root, "montecarlo")) {
    detail::require_object(*jmc, "montecarlo");
    detail::check_keys(*jmc, "montecarlo", {"T", "noise_kind"});
    if (const Json* jT = detail::member_opt(*jmc, "T")) {
      const long long t = detail::integer(*jT, "montecarlo.T");
      if (t < 1) detail::fail("montecarlo.T", "must be >= 1");
      sf.mc_samples = static_cast<int>(t);
    }
    if (const Json* jk = detail::member_opt(*jmc, "noise_kind"))
      sf.mc_kind = parse_kind(detail::str(*jk, "montecarlo.noise_kind"), "montecarlo.noise_kind");
  }

  // Residual invariants (dimension closure, staircase rank, ...) re-checked
  // by the scenario itself; surface them under the same error type.
  try {
    sc.validate();
  } catch (const std::exception& e) {
    throw ScenarioError(e.what());
  }
  return sf;
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string base = path;
  if (const size_t slash = base.find_last_of('/'); slash != std::string::npos)
    base = base.substr(slash + 1);
  return parse_scenario_text(buf.str(), base);
}

namespace detail {

inline void write_vec(std::ostream& os, const Vec& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << fmt17(v(i));
  }
  os << ']';
}

inline void write_mat(std::ostream& os, const Mat& mt, const char* indent) {
  os << "[\n";
  for (Eigen::Index r = 0; r < mt.rows(); ++r) {
    os << indent << "  ";
    write_vec(os, mt.row(r).transpose());
    os << (r + 1 < mt.rows() ? ",\n" : "\n");
  }
  os << indent << ']';
}

inline void write_mat_or_list(std::ostream& os, const std::vector<Mat>& ms, const char* indent) {
  if (ms.size() == 1) {
    write_mat(os, ms[0], indent);
    return;
  }
  os << "[\n";
  const std::string inner = std::string(indent) + "  ";
  for (size_t k = 0; k < ms.size(); ++k) {
    os << inner;
    write_mat(os, ms[k], inner.c_str());
    os << (k + 1 < ms.size() ? ",\n" : "\n");
  }
  os << indent << ']';
}

}  // namespace detail

// Canonical serialization: fixed key order, fixed float format.  Identical
// scenario content yields identical bytes; parsing it back reproduces an
// equivalent ScenarioFile.
inline std::string scenario_text(const ScenarioFile& sf) {
  const steer::Scenario& sc = sf.scenario;
  std::ostringstream os;
  os << "{\n";
  os << "  \"model\": {\n";
  os << "    \"n\": " << sc.model.n << ",\n";
  os << "    \"m\": " << sc.model.m << ",\n";
  os << "    \"d\": " << sc.model.d << ",\n";
  os << "    \"N\": " << sc.model.N << ",\n";
  os << "    \"dt\": " << fmt17(sf.dt) << ",\n";
  os << "    \"A\": ";
  detail::write_mat_or_list(os, sc.model.A, "    ");
  os << ",\n    \"B\": ";
  detail::write_mat_or_list(os, sc.model.B, "    ");
  os << ",\n    \"D\": ";
  detail::write_mat_or_list(os, sc.model.D, "    ");
  os << "\n  },\n";
  os << "  \"initial_state\": ";
  detail::write_vec(os, sc.x0);
  os << ",\n";
  os << "  \"cost\": {\n    \"Q\": ";
  detail::write_mat_or_list(os, sc.cost.q, "    ");
  os << ",\n    \"R\": ";
  detail::write_mat_or_list(os, sc.cost.r, "    ");
  os << ",\n    \"beta\": " << fmt17(sc.cost.beta) << "\n  },\n";
  os << "  \"noise\": {\n";
  if (sf.dryden) {
    os << "    \"dryden\": {\"V0\": " << fmt17(sf.dryden->v0) << ", \"z\": " << fmt17(sf.dryden->z)
       << ", \"b\": " << fmt17(sf.dryden->b) << "},\n";
  } else {
    os << "    \"sigma_w\": ";
    detail::write_mat(os, sf.sigma_w_input, "    ");
    os << ",\n";
  }
  os << "    \"epsilon\": " << fmt17(sc.noise.radius) << ",\n";
  os << "    \"kind\": \"" << kind_name(sf.noise_kind) << "\",\n";
  os << "    \"seed\": " << sf.seed << "\n  },\n";
  os << "  \"constraints\": [";
  for (size_t j = 0; j < sc.halfspaces.size(); ++j) {
    const steer::Halfspace& hs = sc.halfspaces[j];
    os << (j ? ",\n    {" : "\n    {");
    os << "\"alpha\": ";
    detail::write_vec(os, hs.alpha);
    os << ", \"offset\": " << fmt17(hs.offset) << ", \"gamma\": " << fmt17(hs.gamma)
       << ", \"steps\": [";
    for (size_t s = 0; s < hs.steps.size(); ++s) os << (s ? ", " : "") << hs.steps[s];
    os << "]}";
  }
  os << (sc.halfspaces.empty() ? "],\n" : "\n  ],\n");
  os << "  \"terminal\": {\n    \"mu_f\": ";
  detail::write_vec(os, sc.terminal_mean);
  os << ",\n    \"Sigma_f\": ";
  detail::write_mat(os, sc.terminal_cov, "    ");
  os << ",\n    \"delta\": " << fmt17(sc.spread_cap) << "\n  },\n";
  os << "  \"solver\": {\"tol\": " << fmt17(sf.solver.gap_tol)
     << ", \"max_iter\": " << sf.solver.max_iter << "},\n";
  os << "  \"montecarlo\": {\"T\": " << sf.mc_samples << ", \"noise_kind\": \""
     << kind_name(sf.mc_kind) << "\"}\n";
  os << "}\n";
  return os.str();
}

inline void save_scenario(const ScenarioFile& sf, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_text(sf);
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Digest embedded in run reports: SHA-256 of the canonical serialization, so
// reformatting the source file does not change the digest but any value
// change does.
inline std::string scenario_digest(const ScenarioFile& sf) { return sha256_hex(scenario_text(sf)); }

// Sampling distribution for a given disturbance family under this scenario.
// The Custom family needs an explicit covariance (or replayed samples) and
// is configured by the caller.
inline noise::NoiseModel noise_model(const ScenarioFile& sf, noise::NoiseKind kind,
                                     std::uint64_t seed) {
  noise::NoiseModel nm;
  nm.kind = kind;
  nm.base = sf.scenario.noise.center.cov;
  nm.epsilon = sf.scenario.noise.radius;
  nm.seed = seed;
  return nm;
}

}  // namespace drds::io
