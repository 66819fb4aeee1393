// drds: synthesize, validate, and report on distributionally robust
// density-steering policies.
//
//   drds solve    <scenario> [--out DIR] [--mode paper|opnorm]
//   drds simulate <scenario> [--policy F] [--noise KIND] [--samples T]
//                            [--seed S] [--out DIR] [--mode paper|opnorm]
//   drds report   <scenario> [same flags as simulate]
//   drds check    <scenario>
//
// solve writes <out>/policy.txt and <out>/solve_report.txt.  simulate rolls a
// stored policy out under the chosen disturbance family and writes
// <out>/trajectories.csv, <out>/mc_report.txt, and (for freshly drawn noise)
// <out>/noise_samples.bin; --noise custom replays the samples previously
// dumped into <out>.  report runs solve (or loads --policy) plus simulate and
// writes the merged <out>/report.txt and <out>/report.csv.  check runs the
// built-in oracle suite and reports one pass/fail line per oracle.
//
// Exit codes: 0 success, 1 solver failure or output I/O failure, 2 bad
// input, 3 oracle failure in check.

#include <drds/drds.hpp>
#include <drds/io/io.hpp>
#include <drds/noise.hpp>
#include <drds/rng.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using drds::Mat;
using drds::Vec;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Options {
  std::string scenario_path;
  std::string policy_path;
  std::string noise_name;
  int samples = 0;  // 0 = scenario default
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
  std::string mode = "paper";
};

const char* status_name(drds::conic::SolveStatus s) {
  switch (s) {
    case drds::conic::SolveStatus::Optimal: return "optimal";
    case drds::conic::SolveStatus::Infeasible: return "infeasible";
    case drds::conic::SolveStatus::Unbounded: return "unbounded";
    case drds::conic::SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

drds::amb::PushforwardMode parse_mode(const std::string& s) {
  if (s == "paper") return drds::amb::PushforwardMode::PaperExact;
  if (s == "opnorm") return drds::amb::PushforwardMode::OperatorNorm;
  throw drds::io::ScenarioError("--mode must be paper or opnorm, got \"" + s + "\"");
}

drds::io::RunReport base_report(const drds::io::ScenarioFile& sf, const Options& opt) {
  drds::io::RunReport rep;
  rep.scenario = sf.name;
  rep.digest = drds::io::scenario_digest(sf);
  rep.mode = opt.mode;
  return rep;
}

// Fills the solve section of `rep` from a synthesis result.
void fill_solve_section(drds::io::RunReport& rep, const drds::steer::SynthesisResult& res,
                        const drds::io::ScenarioFile& sf, drds::amb::PushforwardMode mode,
                        double secs) {
  rep.has_solve = true;
  rep.status = status_name(res.solution.status);
  rep.message = res.stage.empty() ? res.solution.message : res.stage + ": " + res.solution.message;
  if (rep.message.empty()) rep.message = rep.status;
  rep.solve_seconds = secs;
  if (!res.ok) return;
  rep.has_objective = true;
  rep.objective = res.diagnostics.objective;
  if (sf.scenario.noise.radius > 0.0) {
    rep.has_certificate = true;
    rep.lambda = res.diagnostics.lambda;
    rep.tr_gamma = res.diagnostics.tr_gamma;
  }
  rep.terminal_spread = res.diagnostics.terminal_spread;
  const auto aug = drds::sys::build_augmented(sf.scenario.model);
  const Mat etil_n = drds::sys::error_map(sf.scenario.model.N, res.policy.L, aug);
  rep.terminal_radius = drds::amb::pushforward_radius(etil_n, sf.scenario.noise.radius, mode);
}

void write_trajectories_csv(const drds::noise::Trajectories& tr, const std::string& path) {
  std::ostringstream os;
  os << "sample";
  for (int k = 0; k <= tr.num_steps; ++k)
    for (int i = 0; i < tr.n; ++i) os << ",x" << k << "_" << i;
  for (int k = 0; k < tr.num_steps; ++k)
    for (int i = 0; i < tr.m; ++i) os << ",u" << k << "_" << i;
  os << '\n';
  for (int s = 0; s < tr.samples(); ++s) {
    os << s;
    for (Eigen::Index c = 0; c < tr.states.cols(); ++c)
      os << ',' << drds::io::fmt17(tr.states(s, c));
    for (Eigen::Index c = 0; c < tr.controls.cols(); ++c)
      os << ',' << drds::io::fmt17(tr.controls(s, c));
    os << '\n';
  }
  drds::io::save_text(os.str(), path);
}

// Loads the policy for simulate/report: --policy if given, else the one a
// previous solve left in the output directory.
drds::io::PolicyFile policy_for(const Options& opt) {
  std::string path = opt.policy_path;
  if (path.empty()) {
    const fs::path fallback = fs::path(opt.out_dir) / "policy.txt";
    if (!fs::exists(fallback))
      throw drds::io::ScenarioError(
          "no policy: pass --policy or run `drds solve` into the same --out directory first");
    path = fallback.string();
  }
  return drds::io::load_policy(path);
}

void check_policy_dims(const drds::io::PolicyFile& pf, const drds::steer::Scenario& sc) {
  if (pf.n != sc.model.n || pf.m != sc.model.m || pf.d != sc.model.d || pf.N != sc.model.N)
    throw drds::io::ScenarioError("policy dimensions (n=" + std::to_string(pf.n) +
                                  ", m=" + std::to_string(pf.m) + ", d=" + std::to_string(pf.d) +
                                  ", N=" + std::to_string(pf.N) +
                                  ") do not match the scenario model");
}

// Draws (or replays) the disturbance batch for a simulation run.  Returns
// the samples and whether they were freshly drawn (and so worth dumping).
std::pair<Mat, bool> disturbance_batch(const drds::io::ScenarioFile& sf,
                                       drds::noise::NoiseKind kind, int samples,
                                       std::uint64_t seed, const Options& opt) {
  const int nd = sf.scenario.model.N * sf.scenario.model.d;
  if (kind == drds::noise::NoiseKind::Custom) {
    const fs::path bin = fs::path(opt.out_dir) / "noise_samples.bin";
    const fs::path csv = fs::path(opt.out_dir) / "noise_samples.csv";
    const fs::path src = fs::exists(bin) ? bin : csv;
    if (!fs::exists(src))
      throw drds::io::ScenarioError(
          "--noise custom replays a previous dump, but neither noise_samples.bin nor "
          "noise_samples.csv exists in " +
          opt.out_dir);
    Mat w = drds::io::load_samples(src.string());
    if (w.cols() != nd)
      throw drds::io::ScenarioError(src.string() + ": samples have " + std::to_string(w.cols()) +
                                    " columns, scenario needs " + std::to_string(nd));
    if (opt.samples > 0) {
      if (opt.samples > w.rows())
        throw drds::io::ScenarioError("--samples " + std::to_string(opt.samples) +
                                      " exceeds the " + std::to_string(w.rows()) +
                                      " dumped samples in " + src.string());
      w = w.topRows(opt.samples).eval();
    }
    return {std::move(w), false};
  }
  return {drds::noise::sample_noise(drds::io::noise_model(sf, kind, seed), samples), true};
}

int cmd_solve(const Options& opt) {
  const auto mode = parse_mode(opt.mode);
  const drds::io::ScenarioFile sf = drds::io::load_scenario(opt.scenario_path);
  fs::create_directories(opt.out_dir);

  const auto t0 = Clock::now();
  const drds::steer::SynthesisResult res = drds::steer::solve_drds(sf.scenario, sf.solver);
  const double secs = seconds_since(t0);

  drds::io::RunReport rep = base_report(sf, opt);
  fill_solve_section(rep, res, sf, mode, secs);
  drds::io::save_text(drds::io::report_text(rep), (fs::path(opt.out_dir) / "solve_report.txt").string());

  if (!res.ok) {
    std::cerr << "solve: " << rep.status << " (" << rep.message << ")\n";
    return 1;
  }
  drds::io::PolicyFile pf;
  pf.policy = res.policy;
  pf.n = sf.scenario.model.n;
  pf.m = sf.scenario.model.m;
  pf.d = sf.scenario.model.d;
  pf.N = sf.scenario.model.N;
  drds::io::save_policy(pf, (fs::path(opt.out_dir) / "policy.txt").string());

  std::cout << "solve: optimal  objective = " << drds::io::fmt17(rep.objective)
            << "  terminal_spread = " << drds::io::fmt17(rep.terminal_spread) << "  ("
            << drds::io::fmt17(secs) << " s, " << res.solution.iterations << " iterations)\n"
            << "policy written to " << (fs::path(opt.out_dir) / "policy.txt").string() << "\n";
  return 0;
}

// Shared by simulate and report: rolls out, fills the Monte Carlo section,
// and optionally dumps the drawn noise.
void run_simulation(drds::io::RunReport& rep, const drds::io::ScenarioFile& sf,
                    const drds::sys::Policy& pol, const Options& opt) {
  const drds::noise::NoiseKind kind =
      opt.noise_name.empty() ? sf.mc_kind : drds::io::parse_kind(opt.noise_name, "--noise");
  const int samples = opt.samples > 0 ? opt.samples : sf.mc_samples;
  const std::uint64_t seed = opt.seed_given ? opt.seed : sf.seed;

  auto [w, fresh] = disturbance_batch(sf, kind, samples, seed, opt);
  const auto t0 = Clock::now();
  const drds::noise::Trajectories tr =
      drds::noise::simulate_closed_loop(pol, sf.scenario, w);
  rep.mc = drds::noise::monte_carlo_report(tr, sf.scenario);
  std::tie(rep.step_mean, rep.step_cov_eig) = drds::io::step_statistics(tr);
  rep.simulate_seconds = seconds_since(t0);
  rep.has_mc = true;
  rep.noise_kind = drds::io::kind_name(kind);
  rep.seed = seed;

  if (fresh)
    drds::io::save_samples_binary(w, (fs::path(opt.out_dir) / "noise_samples.bin").string());
  write_trajectories_csv(tr, (fs::path(opt.out_dir) / "trajectories.csv").string());
}

int cmd_simulate(const Options& opt) {
  parse_mode(opt.mode);
  const drds::io::ScenarioFile sf = drds::io::load_scenario(opt.scenario_path);
  const drds::io::PolicyFile pf = policy_for(opt);
  check_policy_dims(pf, sf.scenario);
  fs::create_directories(opt.out_dir);

  drds::io::RunReport rep = base_report(sf, opt);
  run_simulation(rep, sf, pf.policy, opt);
  drds::io::save_text(drds::io::report_text(rep),
                      (fs::path(opt.out_dir) / "mc_report.txt").string());

  std::cout << "simulate: " << rep.mc.samples << " samples under " << rep.noise_kind
            << " noise  joint_violation = " << drds::io::fmt17(rep.mc.joint_violation)
            << "  terminal_gelbrich = " << drds::io::fmt17(rep.mc.terminal_gelbrich) << "\n";
  return 0;
}

int cmd_report(const Options& opt) {
  const auto mode = parse_mode(opt.mode);
  const drds::io::ScenarioFile sf = drds::io::load_scenario(opt.scenario_path);
  fs::create_directories(opt.out_dir);

  drds::io::RunReport rep = base_report(sf, opt);
  drds::sys::Policy pol;

  const fs::path stored = fs::path(opt.out_dir) / "policy.txt";
  if (!opt.policy_path.empty() || fs::exists(stored)) {
    const drds::io::PolicyFile pf = policy_for(opt);
    check_policy_dims(pf, sf.scenario);
    pol = pf.policy;
    rep.has_solve = true;
    rep.status = "policy-file";
    rep.message = "policy loaded from " +
                  (opt.policy_path.empty() ? stored.string() : opt.policy_path);
    const auto aug = drds::sys::build_augmented(sf.scenario.model);
    const Mat etil_n = drds::sys::error_map(sf.scenario.model.N, pol.L, aug);
    rep.terminal_spread =
        drds::amb::pushforward_radius(etil_n, sf.scenario.noise.radius,
                                      drds::amb::PushforwardMode::PaperExact);
    rep.terminal_radius =
        drds::amb::pushforward_radius(etil_n, sf.scenario.noise.radius, mode);
  } else {
    const auto t0 = Clock::now();
    const drds::steer::SynthesisResult res = drds::steer::solve_drds(sf.scenario, sf.solver);
    fill_solve_section(rep, res, sf, mode, seconds_since(t0));
    if (!res.ok) {
      drds::io::save_text(drds::io::report_text(rep),
                          (fs::path(opt.out_dir) / "report.txt").string());
      std::cerr << "report: solve failed: " << rep.status << " (" << rep.message << ")\n";
      return 1;
    }
    pol = res.policy;
    drds::io::PolicyFile pf;
    pf.policy = pol;
    pf.n = sf.scenario.model.n;
    pf.m = sf.scenario.model.m;
    pf.d = sf.scenario.model.d;
    pf.N = sf.scenario.model.N;
    drds::io::save_policy(pf, stored.string());
  }

  run_simulation(rep, sf, pol, opt);
  drds::io::save_text(drds::io::report_text(rep), (fs::path(opt.out_dir) / "report.txt").string());
  drds::io::save_text(drds::io::report_csv(rep, sf.scenario),
                      (fs::path(opt.out_dir) / "report.csv").string());

  std::cout << "report: " << (fs::path(opt.out_dir) / "report.txt").string() << " and report.csv ("
            << rep.mc.samples << " samples, " << rep.noise_kind << " noise)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// check: built-in oracle suite
// ---------------------------------------------------------------------------

struct OracleResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

void run_oracles(const drds::io::ScenarioFile& sf, std::vector<OracleResult>& out) {
  auto push = [&out](const std::string& name, bool ok, const std::string& detail) {
    out.push_back({name, ok, detail});
  };

  {  // Worst-case expected quadratic on a scalar instance: closed form
     // (sqrt(sigma) + eps)^2 xi.
    Mat xi(1, 1), sig(1, 1);
    xi << 2.0;
    sig << 1.0;
    const double eps = 0.5;
    const double got = drds::steer::worstcase_quadratic_value(xi, sig, eps);
    const double want = (1.0 + eps) * (1.0 + eps) * 2.0;
    const double err = std::abs(got - want) / want;
    push("worstcase-quadratic-scalar", err <= 1e-6,
         "relative error " + drds::io::fmt17(err));
  }

  {  // Spread coefficient of the distributionally robust CVaR bound.
    const double got = drds::amb::cvar_coeff(0.05);
    const double want = std::sqrt(19.0);
    const double e1 = std::abs(got - want);
    const double e2 = std::abs(drds::amb::cvar_coeff(0.2) - 2.0);
    push("cvar-coefficient", e1 <= 1e-12 && e2 <= 1e-12,
         "|coeff(0.05) - sqrt(19)| = " + drds::io::fmt17(e1));
  }

  {  // Gelbrich distance: exact scalar value and agreement with the Gaussian
     // transport distance on random moment pairs.
    drds::amb::GaussianMoments p, q;
    p.mean = Vec::Zero(1);
    q.mean = Vec::Ones(1);
    p.cov = Mat::Identity(1, 1);
    q.cov = 4.0 * Mat::Identity(1, 1);
    const double scalar_err = std::abs(drds::amb::gelbrich_distance(p, q) - std::sqrt(2.0));
    drds::Rng rng(20260816u);
    double worst = 0.0;
    for (int it = 0; it < 20; ++it) {
      const int dim = 3;
      drds::amb::GaussianMoments a, b;
      a.mean = Vec::NullaryExpr(dim, [&](Eigen::Index) { return rng.normal(); });
      b.mean = Vec::NullaryExpr(dim, [&](Eigen::Index) { return rng.normal(); });
      Mat fa = Mat::NullaryExpr(dim, dim, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
      Mat fb = Mat::NullaryExpr(dim, dim, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
      a.cov = fa * fa.transpose() + 0.1 * Mat::Identity(dim, dim);
      b.cov = fb * fb.transpose() + 0.1 * Mat::Identity(dim, dim);
      worst = std::max(worst, std::abs(drds::amb::gelbrich_distance(a, b) -
                                       drds::amb::gaussian_w2(a, b)));
    }
    push("gelbrich-identities", scalar_err <= 1e-12 && worst <= 1e-10,
         "scalar error " + drds::io::fmt17(scalar_err) + ", worst pair gap " +
             drds::io::fmt17(worst));
  }

  {  // Gain round trip on the scenario's own stacked input map.
    const auto aug = drds::sys::build_augmented(sf.scenario.model);
    const int n = aug.n, m = aug.m, N = aug.N;
    drds::Rng rng(917u);
    Mat l = Mat::Zero(N * m, (N + 1) * n);
    for (int k = 0; k < N; ++k)
      for (int j = 0; j <= k; ++j)
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < n; ++c) l(k * m + r, j * n + c) = 0.3 * rng.normal();
    const Mat k_gain = drds::sys::gain_l_to_k(l, aug.B);
    const Mat l_back = drds::sys::gain_k_to_l(k_gain, aug.B);
    const double err = (l_back - l).cwiseAbs().maxCoeff();
    push("gain-round-trip", err <= 1e-9, "max entry error " + drds::io::fmt17(err));
  }

  {  // Wind-turbulence normalization: lag-0 variance of the along-wind gust
     // channel equals its squared intensity.
    drds::noise::DrydenParams p;
    p.v0 = 5.0;
    p.z = 10.0;
    p.b = 0.34;
    p.dt = 0.1;
    p.channels = {drds::noise::DrydenChannel::LonGust};
    const Mat cov = drds::noise::dryden_covariance(p, 1);
    const double want = p.sigma_u() * p.sigma_u();
    const double err = std::abs(cov(0, 0) - want) / want;
    push("dryden-normalization", err <= 0.02,
         "lag-0 relative error " + drds::io::fmt17(err));
  }
}

int cmd_check(const Options& opt) {
  const drds::io::ScenarioFile sf = drds::io::load_scenario(opt.scenario_path);
  std::vector<OracleResult> results;
  run_oracles(sf, results);
  bool all_ok = true;
  for (const OracleResult& r : results) {
    all_ok = all_ok && r.ok;
    std::cout << (r.ok ? "ok   " : "FAIL ") << r.name << " (" << r.detail << ")\n";
  }
  std::cout << (all_ok ? "check: all oracles passed\n" : "check: oracle failure\n");
  return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  drds::require_fast_blas_or_reexec();

  CLI::App app{"distributionally robust density-steering policy synthesis"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub, bool sim_flags) {
    sub->add_option("scenario", opt.scenario_path, "scenario file")->required();
    sub->add_option("--out", opt.out_dir, "output directory (default: current directory)");
    sub->add_option("--mode", opt.mode, "terminal-radius formula: paper | opnorm");
    if (sim_flags) {
      sub->add_option("--policy", opt.policy_path, "policy file (default: <out>/policy.txt)");
      sub->add_option("--noise", opt.noise_name,
                      "disturbance family: nominal|maximal|student-t|custom");
      sub->add_option("--samples", opt.samples, "Monte Carlo sample count");
      sub->add_option("--seed", opt.seed, "sampling seed");
    }
  };

  CLI::App* solve = app.add_subcommand("solve", "synthesize a policy");
  add_common(solve, false);
  CLI::App* simulate = app.add_subcommand("simulate", "roll a policy out under disturbances");
  add_common(simulate, true);
  CLI::App* report = app.add_subcommand("report", "solve (or load), simulate, and merge a report");
  add_common(report, true);
  CLI::App* check = app.add_subcommand("check", "run the built-in oracle suite");
  check->add_option("scenario", opt.scenario_path, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opt.seed_given = simulate->count("--seed") > 0 || report->count("--seed") > 0;

  try {
    if (solve->parsed()) return cmd_solve(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (report->parsed()) return cmd_report(opt);
    return cmd_check(opt);
  } catch (const drds::io::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const drds::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
