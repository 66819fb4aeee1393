#pragma once

// Run reports: the machine-readable summary of a solve and/or Monte Carlo
// validation run.
//
// Two renderings are provided.  The structured-text form is a flat
// "key = value" document in a fixed key order; the CSV form tabulates the
// per-step Monte Carlo statistics (step, state mean components, state
// covariance eigenvalues, then per-halfspace empirical CVaR and violation
// frequency, blank where a halfspace is inactive at that step).  Both use 17
// significant digits everywhere, so identical report content always
// serializes to identical bytes.  parse_report_text inverts the text form
// into ordered key/value pairs for round-trip checks.

#include <drds/drds.hpp>
#include <drds/io/text.hpp>
#include <drds/noise.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace drds::io {

inline constexpr const char* kToolVersion = "drds 1.0.0";

struct RunReport {
  std::string tool = kToolVersion;
  std::string scenario;  // source file basename
  std::string digest;    // SHA-256 of the canonical scenario serialization
  std::string mode = "paper";  // terminal-radius formula: paper | opnorm

  // Synthesis section.
  bool has_solve = false;
  std::string status;   // optimal | infeasible | unbounded | numerical-failure | policy-file
  std::string message;  // solver detail line
  bool has_objective = false;
  double objective = 0.0;
  bool has_certificate = false;  // ambiguity certificate diagnostics below
  double lambda = 0.0;
  double tr_gamma = 0.0;
  double terminal_spread = 0.0;  // worst-case terminal covariance shift over the ball
  double terminal_radius = 0.0;  // terminal ambiguity radius under `mode`
  double solve_seconds = 0.0;

  // Monte Carlo section.
  bool has_mc = false;
  std::string noise_kind;
  std::uint64_t seed = 0;
  double simulate_seconds = 0.0;
  noise::MonteCarloReport mc;
  Mat step_mean;     // (N+1) x n  sample mean of the state at each step
  Mat step_cov_eig;  // (N+1) x n  sample covariance eigenvalues, ascending
};

// Per-step sample mean and covariance eigenvalues of a trajectory batch.
inline std::pair<Mat, Mat> step_statistics(const noise::Trajectories& tr) {
  const int t = tr.samples(), n = tr.n, steps = tr.num_steps + 1;
  Mat mean = Mat::Zero(steps, n);
  Mat eigs = Mat::Zero(steps, n);
  for (int k = 0; k < steps; ++k) {
    Vec mu = Vec::Zero(n);
    for (int i = 0; i < t; ++i) mu += tr.state_at(i, k);
    if (t > 0) mu /= t;
    mean.row(k) = mu.transpose();
    if (t > 1) {
      Mat cov = Mat::Zero(n, n);
      for (int i = 0; i < t; ++i) {
        const Vec dvec = tr.state_at(i, k) - mu;
        cov += dvec * dvec.transpose();
      }
      cov /= (t - 1);
      eigs.row(k) = sym_eigvals(cov).transpose();
    }
  }
  return {std::move(mean), std::move(eigs)};
}

namespace detail {

inline void kv(std::ostream& os, const char* key, const std::string& value) {
  os << key << " = " << value << '\n';
}

inline void kv(std::ostream& os, const char* key, double value) { kv(os, key, fmt17(value)); }

inline std::string joined(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += fmt17(v(i));
  }
  return out;
}

}  // namespace detail

inline std::string report_text(const RunReport& rep) {
  std::ostringstream os;
  os << "drds-report 1\n";
  detail::kv(os, "tool", rep.tool);
  detail::kv(os, "scenario", rep.scenario);
  detail::kv(os, "digest", rep.digest);
  detail::kv(os, "mode", rep.mode);
  if (rep.has_solve) {
    detail::kv(os, "solve.status", rep.status);
    detail::kv(os, "solve.message", rep.message);
    if (rep.has_objective) detail::kv(os, "solve.objective", rep.objective);
    if (rep.has_certificate) {
      detail::kv(os, "solve.lambda", rep.lambda);
      detail::kv(os, "solve.tr_gamma", rep.tr_gamma);
    }
    detail::kv(os, "solve.terminal_spread", rep.terminal_spread);
    detail::kv(os, "solve.terminal_radius", rep.terminal_radius);
    detail::kv(os, "solve.seconds", rep.solve_seconds);
  }
  if (rep.has_mc) {
    detail::kv(os, "mc.noise", rep.noise_kind);
    detail::kv(os, "mc.seed", std::to_string(rep.seed));
    detail::kv(os, "mc.samples", std::to_string(rep.mc.samples));
    detail::kv(os, "mc.seconds", rep.simulate_seconds);
    detail::kv(os, "mc.joint_violation", rep.mc.joint_violation);
    detail::kv(os, "mc.terminal_gelbrich", rep.mc.terminal_gelbrich);
    detail::kv(os, "mc.terminal_mean", detail::joined(rep.mc.terminal_mean));
    if (rep.mc.terminal_cov.size() > 0)
      detail::kv(os, "mc.terminal_cov_eig", detail::joined(sym_eigvals(rep.mc.terminal_cov)));
    for (size_t j = 0; j < rep.mc.cvar.size(); ++j) {
      const std::string tag = std::to_string(j);
      detail::kv(os, ("mc.cvar." + tag).c_str(), detail::joined(rep.mc.cvar[j]));
      detail::kv(os, ("mc.violation." + tag).c_str(), detail::joined(rep.mc.violation[j]));
    }
  }
  return os.str();
}

// Inverse of report_text: ordered key/value pairs (values are the raw text
// after " = ", which for numbers is the exact 17-digit rendering).
inline std::vector<std::pair<std::string, std::string>> parse_report_text(
    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || rstrip(line) != "drds-report 1")
    throw ParseError("report: unrecognized header (expected \"drds-report 1\")");
  std::vector<std::pair<std::string, std::string>> out;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = rstrip(line);
    if (line.empty()) continue;
    const size_t sep = line.find(" = ");
    if (sep == std::string::npos)
      throw ParseError("report line " + std::to_string(lineno) + ": expected \"key = value\"");
    out.emplace_back(line.substr(0, sep), line.substr(sep + 3));
  }
  return out;
}

// The Monte Carlo table.  Header always present; one row per step when the
// report carries samples.  Halfspace columns are empty at steps where that
// halfspace is not enforced.
inline std::string report_csv(const RunReport& rep, const steer::Scenario& sc) {
  const int n = sc.model.n;
  const size_t nhs = sc.halfspaces.size();
  std::ostringstream os;
  os << "step";
  for (int i = 0; i < n; ++i) os << ",mean_" << i;
  for (int i = 0; i < n; ++i) os << ",cov_eig_" << i;
  for (size_t j = 0; j < nhs; ++j) os << ",cvar_" << j;
  for (size_t j = 0; j < nhs; ++j) os << ",violation_" << j;
  os << '\n';
  if (!rep.has_mc || rep.mc.samples <= 0) return os.str();

  for (Eigen::Index k = 0; k < rep.step_mean.rows(); ++k) {
    os << k;
    for (int i = 0; i < n; ++i) os << ',' << fmt17(rep.step_mean(k, i));
    for (int i = 0; i < n; ++i) os << ',' << fmt17(rep.step_cov_eig(k, i));
    for (int part = 0; part < 2; ++part) {
      for (size_t j = 0; j < nhs; ++j) {
        os << ',';
        const auto& steps = sc.halfspaces[j].steps;
        for (size_t si = 0; si < steps.size(); ++si)
          if (steps[si] == static_cast<int>(k)) {
            const Vec& src = part == 0 ? rep.mc.cvar[j] : rep.mc.violation[j];
            os << fmt17(src(static_cast<Eigen::Index>(si)));
            break;
          }
      }
    }
    os << '\n';
  }
  return os.str();
}

inline void save_text(const std::string& content, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace drds::io
