#include "pmrd/selftest.hpp"

#include <filesystem>
#include <fstream>

#include "pmrd/attractor.hpp"
#include "pmrd/diagnostics.hpp"
#include "pmrd/io.hpp"
#include "pmrd/scenario.hpp"

namespace pmrd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json scalar_config(std::uint64_t seed, double height) {
  return json{
      {"name", "selftest_scalar"},
      {"seed", seed},
      {"grid", {{"dim", 1}, {"extents", {1.0}}, {"n", {50}}}},
      {"phi", {{"kind", "biofilm"}, {"a", 2}, {"b", 3}}},
      {"reaction", {{"kind", "scalar_decay"}, {"lambda", 1.0}}},
      {"u0", {{"preset", "bump"}, {"center", {0.5}}, {"radius", 0.3}, {"height", height}}},
      {"solver",
       {{"dt", 1e-3}, {"t_end", 0.05}, {"R_schedule", {1e3}}, {"snapshot_times", {0.025}}}},
  };
}

json coupled_config(std::uint64_t seed) {
  return json{
      {"name", "selftest_coupled"},
      {"seed", seed},
      {"grid", {{"dim", 1}, {"extents", {1.0}}, {"n", {40}}}},
      {"phi", {{"kind", "biofilm"}, {"a", 2}, {"b", 3}}},
      {"reaction",
       {{"kind", "monod"}, {"K1", 0.5}, {"K2", 0.1}, {"K3", 0.8}, {"K4", 0.5}, {"d1", 1.0}}},
      {"u0", {{"preset", "bump"}, {"center", {0.5}}, {"radius", 0.25}, {"height", 0.4}}},
      {"v0", {{"preset", "const"}, {"value", 1.0}}},
      {"solver", {{"dt", 1e-3}, {"t_end", 0.02}, {"R_schedule", {1e3}}}},
  };
}

Trajectory run_and_save(const json& config, const std::string& dir) {
  Scenario sc = parse_scenario(config);
  Grid g = sc.make_grid();
  RegularizedPhi phiR = regularize(sc.make_phi(), sc.solver.R_schedule.front());
  ReactionSpec rx = sc.make_reaction();
  Trajectory traj;
  if (sc.coupled()) {
    CoupledState s0{sc.make_u0(g), sc.make_v0(g)};
    traj = solve_coupled(s0, phiR, rx, sc.solver);
  } else {
    traj = solve_scalar(sc.make_u0(g), phiR, rx, sc.solver);
  }
  save_run(dir, config, traj, g);
  return traj;
}

}  // namespace

SelftestResult run_selftest(const std::string& out_dir, std::uint64_t seed) {
  fs::create_directories(out_dir);
  SelftestResult result;
  json& report = result.report;
  report["seed"] = seed;
  bool ok = true;

  // two scalar runs (paired for the contraction check) and one coupled run
  json cfg_a = scalar_config(seed, 0.5);
  json cfg_b = scalar_config(seed, 0.45);
  json cfg_c = coupled_config(seed);
  Trajectory ta = run_and_save(cfg_a, (fs::path(out_dir) / "scalar_a").string());
  Trajectory tb = run_and_save(cfg_b, (fs::path(out_dir) / "scalar_b").string());
  Trajectory tc = run_and_save(cfg_c, (fs::path(out_dir) / "coupled").string());
  ok = ok && !ta.failed && !tb.failed && !tc.failed;
  report["runs"] = {
      {"scalar_a", run_fingerprint((fs::path(out_dir) / "scalar_a").string())},
      {"scalar_b", run_fingerprint((fs::path(out_dir) / "scalar_b").string())},
      {"coupled", run_fingerprint((fs::path(out_dir) / "coupled").string())},
  };

  // integrity of the artifacts just written
  for (const char* sub : {"scalar_a", "scalar_b", "coupled"}) {
    std::string msg = verify_run((fs::path(out_dir) / sub).string());
    if (!msg.empty()) {
      ok = false;
      report["integrity"][sub] = msg;
    }
  }

  // diagnostic checks
  Scenario sa = parse_scenario(cfg_a);
  double L = lipschitz_bound(sa.make_reaction());
  json checks = json::array();
  for (const DiagnosticReport& r : {
           check_energy(ta),
           check_energy(tc),
           check_l1_contraction(ta, tb, L),
       }) {
    ok = ok && r.passed;
    checks.push_back(r.to_json());
  }
  report["checks"] = checks;

  // synthetic covering sanity: a segment of bumps must read as one-dimensional
  {
    Grid g = sa.make_grid();
    SnapshotSet set;
    for (int i = 0; i < 60; ++i) {
      StateField f = StateField::zeros(g, RangeTag::signed_open);
      double c = 0.25 + 0.5 * i / 59.0;
      for (int k = 0; k < g.size(); ++k) {
        double r2 = (g.point(k)[0] - c) * (g.point(k)[0] - c) / (0.15 * 0.15);
        f.values[k] = r2 < 1.0 ? 0.5 * (1 - r2) * (1 - r2) : 0.0;
      }
      set.points.push_back(std::move(f));
    }
    DimensionFit fit = fractal_dimension(set, {0.1, 0.05, 0.025, 0.0125, 0.00625});
    ok = ok && fit.dim > 0.7 && fit.dim < 1.3;
    report["covering"] = {{"dim", fit.dim}, {"r2", fit.r2}};
  }

  report["passed"] = ok;
  result.passed = ok;

  const std::string rpath = (fs::path(out_dir) / "selftest.json").string();
  std::ofstream(rpath) << report.dump(2) << "\n";
  result.fingerprint = hash_hex(hash_file(rpath));
  return result;
}

}  // namespace pmrd
