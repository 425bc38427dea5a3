#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmrd/attractor.hpp"
#include "pmrd/diagnostics.hpp"
#include "pmrd/io.hpp"
#include "pmrd/scenario.hpp"
#include "pmrd/selftest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pmrd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIntegrity = 3;

struct CommonOpts {
  std::string config;
  std::string out = "out";
  int workers = 1;
  std::int64_t seed_override = -1;
};

Scenario load_with_override(const CommonOpts& opts) {
  Scenario sc = load_scenario(opts.config);
  if (opts.seed_override >= 0) {
    sc.seed = std::uint64_t(opts.seed_override);
    sc.raw["seed"] = sc.seed;
  }
  return sc;
}

void write_json(const std::string& path, const json& doc) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
}

json sweep_to_json(const RSweepReport& rep) {
  return json{{"R", rep.R}, {"d", rep.d}, {"cauchy", rep.cauchy}, {"tol", rep.tol}};
}

json interface_to_json(const InterfaceReport& rep) {
  return json{{"times", rep.times},
              {"radii", rep.radii},
              {"max_growth_rate", rep.max_growth_rate},
              {"centroid", {rep.centroid[0], rep.centroid[1]}}};
}

/// run / sweep. Returns process exit code.
int cmd_run(const CommonOpts& opts, bool force_sweep) {
  Scenario sc = load_with_override(opts);
  Grid g = sc.make_grid();
  ReactionSpec rx = sc.make_reaction();

  if (force_sweep && sc.solver.R_schedule.size() < 3)
    throw std::invalid_argument("sweep needs solver.R_schedule with at least 3 entries");

  if (force_sweep || sc.solver.R_schedule.size() > 1) {
    double tol = sc.checks.value("sweep_tol", 1e-3);
    RSweepReport rep =
        sc.coupled()
            ? r_sweep(CoupledState{sc.make_u0(g), sc.make_v0(g)}, sc.make_phi(), rx, sc.solver,
                      tol, opts.workers)
            : r_sweep(sc.make_u0(g), sc.make_phi(), rx, sc.solver, tol, opts.workers);
    bool any_failed = false;
    for (std::size_t k = 0; k < rep.runs.size(); ++k) {
      char sub[32];
      std::snprintf(sub, sizeof sub, "R_%02zu", k);
      json cfg = sc.raw;
      cfg["solver"]["R_schedule"] = {rep.R[k]};
      save_run((fs::path(opts.out) / sub).string(), cfg, rep.runs[k], g);
      any_failed = any_failed || rep.runs[k].failed;
    }
    write_json((fs::path(opts.out) / "rsweep.json").string(), sweep_to_json(rep));
    std::printf("sweep: %zu runs, final gap %.3e, cauchy=%s\n", rep.runs.size(),
                rep.d.empty() ? 0.0 : rep.d.back(), rep.cauchy ? "yes" : "no");
    return any_failed ? kExitRuntime : kExitOk;
  }

  RegularizedPhi phiR = regularize(sc.make_phi(), sc.solver.R_schedule.front());
  Trajectory traj;
  if (sc.coupled()) {
    traj = solve_coupled(CoupledState{sc.make_u0(g), sc.make_v0(g)}, phiR, rx, sc.solver);
  } else {
    traj = solve_scalar(sc.make_u0(g), phiR, rx, sc.solver);
  }
  save_run(opts.out, sc.raw, traj, g);

  json diag;
  diag["energy"] = check_energy(traj).to_json();
  if (!sc.coupled()) {
    double thr = sc.checks.value("interface_threshold", 1e-6);
    diag["interface"] = interface_to_json(track_interface(traj, thr));
  }
  write_json((fs::path(opts.out) / "diagnostics.json").string(), diag);

  if (traj.failed) {
    std::fprintf(stderr, "solver failure: %s (partial artifacts in %s)\n",
                 traj.failure.c_str(), opts.out.c_str());
    return kExitRuntime;
  }
  std::printf("run %s: %zu snapshots, sup|u| = %.6g, artifacts in %s\n", sc.name.c_str(),
              traj.times.size(), traj.steps.empty() ? 0.0 : traj.steps.back().sup_u,
              opts.out.c_str());
  return kExitOk;
}

int cmd_check(const std::vector<std::string>& dirs, std::vector<std::string> checks) {
  static const std::vector<std::string> known{"energy", "l1_contraction", "interpolation",
                                             "level_set_decay", "interface"};
  if (checks.empty()) checks = {"energy"};
  for (const std::string& c : checks)
    if (std::find(known.begin(), known.end(), c) == known.end())
      throw std::invalid_argument("unknown check name: " + c);

  for (const std::string& dir : dirs) {
    std::string msg = verify_run(dir);
    if (!msg.empty()) {
      std::fprintf(stderr, "integrity error in %s: %s\n", dir.c_str(), msg.c_str());
      return kExitIntegrity;
    }
  }

  LoadedRun run = load_run(dirs[0]);
  Scenario sc = parse_scenario(run.config);
  ReactionSpec rx = sc.make_reaction();

  std::vector<DiagnosticReport> reports;
  for (const std::string& c : checks) {
    if (c == "energy") {
      reports.push_back(check_energy(run.traj));
    } else if (c == "interpolation") {
      double alpha = sc.checks.value("interpolation_alpha", 1.0);
      reports.push_back(check_interpolation(run.traj.states.back(), alpha));
    } else if (c == "interface") {
      InterfaceReport rep = track_interface(run.traj, sc.checks.value("interface_threshold", 1e-6));
      DiagnosticReport r;
      r.name = "interface";
      r.passed = true;
      r.margin = rep.radii.empty() ? 0.0 : rep.radii.back();
      r.details = interface_to_json(rep);
      reports.push_back(std::move(r));
    } else {  // paired-run checks
      if (dirs.size() < 2)
        throw std::invalid_argument("check '" + c + "' needs two run directories");
      LoadedRun other = load_run(dirs[1]);
      if (c == "l1_contraction") {
        reports.push_back(check_l1_contraction(run.traj, other.traj, lipschitz_bound(rx)));
      } else {
        const json& ls = sc.checks;
        if (!ls.contains("theta")) throw std::invalid_argument("missing required key: checks.theta");
        if (!ls.contains("beta")) throw std::invalid_argument("missing required key: checks.beta");
        reports.push_back(
            check_level_set_decay(run.traj, other.traj, rx, ls.at("theta"), ls.at("beta")));
      }
    }
  }

  bool all = true;
  json out = json::array();
  std::printf("%-18s %-6s %s\n", "check", "result", "margin");
  for (const DiagnosticReport& r : reports) {
    all = all && r.passed;
    out.push_back(r.to_json());
    std::printf("%-18s %-6s %.6g\n", r.name.c_str(), r.passed ? "pass" : "FAIL", r.margin);
  }
  write_json((fs::path(dirs[0]) / "checks.json").string(), out);
  return all ? kExitOk : kExitRuntime;
}

SnapshotSet synthetic_set(const std::string& kind) {
  Grid g = build_grid(1, {1.0}, {64});
  auto bump = [&](double c, double w, double h) {
    StateField f = StateField::zeros(g, RangeTag::signed_open);
    for (int k = 0; k < g.size(); ++k) {
      double r2 = (g.point(k)[0] - c) * (g.point(k)[0] - c) / (w * w);
      f.values[k] = r2 < 1.0 ? h * (1 - r2) * (1 - r2) : 0.0;
    }
    return f;
  };
  SnapshotSet set;
  if (kind == "point") {
    set.points.push_back(bump(0.5, 0.2, 0.5));
  } else if (kind == "segment") {
    for (int i = 0; i < 80; ++i) set.points.push_back(bump(0.2 + 0.6 * i / 79.0, 0.15, 0.5));
  } else if (kind == "plane") {
    for (int i = 0; i < 24; ++i)
      for (int j = 0; j < 24; ++j) {
        StateField f = bump(0.25, 0.12, 0.1 + 0.8 * i / 23.0);
        StateField f2 = bump(0.75, 0.12, 0.1 + 0.8 * j / 23.0);
        for (int k = 0; k < g.size(); ++k) f.values[k] += f2.values[k];
        set.points.push_back(std::move(f));
      }
  } else {
    throw std::invalid_argument("unknown synthetic set: " + kind);
  }
  set.provenance.assign(set.points.size(), "synthetic:" + kind);
  return set;
}

int cmd_attractor(const CommonOpts& opts, const std::string& synthetic,
                  std::vector<double> eps_list) {
  SnapshotSet set;
  json report;
  std::vector<Trajectory> rate_trajs;

  if (!synthetic.empty()) {
    set = synthetic_set(synthetic);
    report["source"] = "synthetic:" + synthetic;
  } else if (!opts.config.empty()) {
    Scenario sc = load_with_override(opts);
    if (sc.coupled())
      throw std::invalid_argument("attractor analysis supports scalar scenarios only");
    Grid g = sc.make_grid();
    RegularizedPhi phiR = regularize(sc.make_phi(), sc.solver.R_schedule.front());
    ReactionSpec rx = sc.make_reaction();
    const json& ac = sc.checks;
    double burn_in = ac.value("burn_in", 5.0);
    int n_samples = int(ac.value("n_samples", 5.0));
    double gap = ac.value("sample_gap", 0.5);
    StateField u0 = sc.make_u0(g);
    set = sample_omega_limit(u0, phiR, rx, sc.solver, burn_in, n_samples, gap);
    report["source"] = sc.name;
    report["complete"] = set.complete;
    if (!set.warning.empty()) report["warning"] = set.warning;

    // approach trajectory for the attraction-rate fit
    SolverConfig rc = sc.solver;
    rc.t_end = burn_in;
    rc.snapshot_times.clear();
    for (double t = rc.dt; t < burn_in; t += burn_in / 40.0) rc.snapshot_times.push_back(t);
    rate_trajs.push_back(solve_scalar(u0, phiR, rx, rc));
  } else {
    throw std::invalid_argument("attractor needs --config or --synthetic");
  }
  if (set.points.empty()) throw std::invalid_argument("empty snapshot set");

  if (eps_list.empty()) {
    // geometric ladder spanning the set diameter
    double diam = 0.0;
    for (std::size_t i = 0; i < set.points.size(); ++i)
      for (std::size_t j = i + 1; j < set.points.size(); ++j)
        diam = std::max(diam, set.distance(i, j));
    if (diam <= 0.0) diam = 1.0;
    for (double e = diam / 4.0; eps_list.size() < 5; e /= 2.0) eps_list.push_back(e);
  }

  DimensionFit fit = fractal_dimension(set, eps_list);
  report["n_points"] = set.points.size();
  report["dimension"] = {{"dim", fit.dim}, {"r2", fit.r2}, {"stable", fit.stable}};
  report["entropy_bits"] = epsilon_entropy(set, eps_list.back());

  if (!rate_trajs.empty()) {
    RateFit rate = fit_attraction_rate(rate_trajs, set);
    report["rate"] = {{"alpha_hat", rate.alpha_hat},
                      {"Q_hat", rate.Q_hat},
                      {"r2", rate.r2},
                      {"saturated", rate.saturated}};
  }

  fs::create_directories(opts.out);
  std::ofstream csv((fs::path(opts.out) / "covering.csv").string());
  csv << "eps,N_eps\n";
  for (std::size_t k = 0; k < fit.covers.eps_list.size(); ++k)
    csv << fit.covers.eps_list[k] << ',' << fit.covers.counts[k] << "\n";
  csv.close();
  write_json((fs::path(opts.out) / "attractor.json").string(), report);

  std::printf("attractor: %zu points, dim = %.3f (r2 = %.3f)\n", set.points.size(), fit.dim,
              fit.r2);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmrd: degenerate reaction-diffusion solver and analysis toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::vector<std::string> check_dirs;
  std::vector<std::string> check_names;
  std::string synthetic;
  std::vector<double> eps_list;
  std::uint64_t selftest_seed = 1;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opts.config, "scenario config (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--workers", opts.workers, "worker pool size for batch runs");
    sub->add_option("--seed-override", opts.seed_override, "replace the config seed");
  };

  CLI::App* run = app.add_subcommand("run", "execute one scenario");
  add_common(run, true);
  CLI::App* sweep = app.add_subcommand("sweep", "regularization sweep for one scenario");
  add_common(sweep, true);
  CLI::App* check = app.add_subcommand("check", "verify and diagnose saved runs");
  check->add_option("dirs", check_dirs, "run directories (second one for paired checks)")
      ->required()
      ->expected(1, 2);
  check->add_option("--checks", check_names, "check names (energy, l1_contraction, interpolation, level_set_decay, interface)")
      ->delimiter(',');
  CLI::App* attractor = app.add_subcommand("attractor", "omega-limit sampling and covering analysis");
  add_common(attractor, false);
  attractor->add_option("--synthetic", synthetic, "synthetic set instead of a scenario (point, segment, plane)");
  attractor->add_option("--eps", eps_list, "covering radii (decreasing)")->delimiter(',');
  CLI::App* selftest = app.add_subcommand("selftest", "deterministic end-to-end exercise");
  selftest->add_option("--out", opts.out, "output directory");
  selftest->add_option("--seed-override", selftest_seed, "selftest seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(opts, /*force_sweep=*/false);
    if (sweep->parsed()) return cmd_run(opts, /*force_sweep=*/true);
    if (check->parsed()) return cmd_check(check_dirs, check_names);
    if (attractor->parsed()) return cmd_attractor(opts, synthetic, eps_list);
    if (selftest->parsed()) {
      if (opts.out == "out") opts.out = "selftest_out";
      SelftestResult res = run_selftest(opts.out, selftest_seed);
      std::printf("selftest %s, fingerprint %s\n", res.passed ? "passed" : "FAILED",
                  res.fingerprint.c_str());
      return res.passed ? kExitOk : kExitRuntime;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
