// Acceptance gate: one pass/fail line per criterion, exit 0 iff all pass.
// Reference resolution throughout: 1D n = 400, dt = 1e-3.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pmrd/attractor.hpp"
#include "pmrd/diagnostics.hpp"
#include "pmrd/scenario.hpp"
#include "pmrd/selftest.hpp"

namespace fs = std::filesystem;
using namespace pmrd;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool passed, const std::string& detail) {
  if (!passed) ++g_failures;
  std::printf("[%s] %2d. %s (%s)\n", passed ? "PASS" : "FAIL", num, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

// deterministic band-limited random field, sup-normalized to `amplitude`
StateField random_field(const Grid& g, std::uint64_t seed, double amplitude, RangeTag tag) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int modes = 6;
  std::vector<double> coef(modes);
  for (double& c : coef) c = U(rng);
  StateField f = StateField::zeros(g, tag);
  double peak = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    double x = g.point(k)[0] / g.extent[0];
    double v = 0.0;
    for (int q = 0; q < modes; ++q) v += coef[q] * std::sin((q + 1) * M_PI * x);
    f.values[k] = v;
    peak = std::max(peak, std::abs(v));
  }
  for (double& v : f.values) v *= amplitude / peak;
  if (tag == RangeTag::nonneg)
    for (double& v : f.values) v = std::abs(v);
  return f;
}

std::string scenario_path(const char* file) {
  return (fs::path(PMRD_SCENARIO_DIR) / file).string();
}

// --- criteria -------------------------------------------------------------

void criterion_barenblatt() {
  Scenario sc = load_scenario(scenario_path("pme_barenblatt.json"));
  Grid g = sc.make_grid();
  RegularizedPhi phiR = regularize(sc.make_phi(), sc.solver.R_schedule.front());
  Trajectory traj = solve_scalar(sc.make_u0(g), phiR, sc.make_reaction(), sc.solver);

  const double m = 2.0, mass = 0.4, t0 = 0.1;
  double l1_err = 0.0;
  {
    const StateField& u = traj.states.back();
    double tf = t0 + traj.times.back();
    for (int k = 0; k < g.size(); ++k) {
      std::array<double, 2> x{g.point(k)[0] - 0.5 * g.extent[0], 0.0};
      l1_err += std::abs(u.values[k] - barenblatt_profile(m, mass, 1, tf, x)) * g.h[0];
    }
  }

  InterfaceReport iface = track_interface(traj, 1e-3);
  std::vector<double> lt, lr;
  for (std::size_t s = 0; s < iface.times.size(); ++s)
    if (iface.radii[s] > 0.0) {
      lt.push_back(std::log(t0 + iface.times[s]));
      lr.push_back(std::log(iface.radii[s]));
    }
  double exponent = ls_slope(lt, lr);
  const double beta = 1.0 / (m + 1.0);

  bool pass = !traj.failed && l1_err <= 1e-2 && std::abs(exponent - beta) <= 0.05 * beta;
  report(1, "Barenblatt validation",
         pass, fmt("L1 error %.3e, radius exponent %.4f vs %.4f", l1_err, exponent, beta));
}

void criterion_contraction() {
  Grid g = build_grid(1, {1.0}, {400});
  PhiSpec phi = PhiSpec::biofilm(1, 1, /*symmetric=*/false);
  ReactionSpec rx = ReactionSpec::monod(0.5, 0.1, 0.8, 0.5, 1.0, 1.0);
  RegularizedPhi phiR = regularize(phi, 1e3);
  double L = lipschitz_bound(rx);

  SolverConfig cfg;
  cfg.t_end = 0.2;
  cfg.snapshot_times = {0.05, 0.1, 0.15};

  int passed = 0;
  double worst = 1e300;
  for (int pair = 0; pair < 10; ++pair) {
    StateField v0 = StateField::zeros(g, RangeTag::nonneg);
    for (double& v : v0.values) v = 1.0;
    CoupledState a{random_field(g, 100 + 2 * pair, 0.5, RangeTag::nonneg), v0};
    CoupledState b{random_field(g, 101 + 2 * pair, 0.5, RangeTag::nonneg), v0};
    Trajectory ta = solve_coupled(a, phiR, rx, cfg);
    Trajectory tb = solve_coupled(b, phiR, rx, cfg);
    DiagnosticReport rep = check_l1_contraction(ta, tb, L);
    if (rep.passed && !ta.failed && !tb.failed) ++passed;
    worst = std::min(worst, rep.margin);
  }
  report(2, "L1 contraction", passed == 10,
         fmt("%d/10 pairs, worst margin %.3e, L = %.3f", passed, worst, L));
}

void criterion_barrier() {
  Grid g = build_grid(1, {1.0}, {400});
  PhiSpec phi = PhiSpec::biofilm(2, 3, /*symmetric=*/false);
  ReactionSpec rx = ReactionSpec::monod(0.5, 0.1, 0.8, 0.5, 1.0, 1.0);
  RegularizedPhi phiR = regularize(phi, 1e4);
  SolverConfig cfg;
  cfg.t_end = 1.0;

  std::string detail;
  bool pass = true;
  for (double eta : {0.1, 0.3}) {
    double delta = barrier_bound(g, phi, rx.f_sup(), eta);
    StateField u0 = StateField::zeros(g, RangeTag::nonneg);
    for (int k = 0; k < g.size(); ++k) {
      double x = g.point(k)[0];
      u0.values[k] = (1.0 - eta) * std::sin(M_PI * x);
    }
    StateField v0 = StateField::zeros(g, RangeTag::nonneg);
    for (double& v : v0.values) v = 1.0;
    Trajectory traj = solve_coupled(CoupledState{u0, v0}, phiR, rx, cfg);
    double sup = 0.0;
    for (const StepStats& s : traj.steps) sup = std::max(sup, s.sup_u);
    double bound = 1.0 - delta + 10.0 * g.h[0] * g.h[0];
    pass = pass && !traj.failed && sup <= bound;
    detail += fmt("eta=%.1f: sup %.5f <= %.5f (delta %.4f); ", eta, sup, bound, delta);
  }
  report(3, "barrier bound", pass, detail);
}

void criterion_comparison() {
  Grid g = build_grid(1, {1.0}, {400});
  RegularizedPhi phiR = regularize(PhiSpec::biofilm(2, 3), 1e3);
  ReactionSpec rx = ReactionSpec::scalar_decay(1.0);
  const double dt = 1e-3;
  const int nsteps = 200;

  int passed = 0;
  double worst = 0.0;
  for (int pair = 0; pair < 10; ++pair) {
    StateField lo = random_field(g, 300 + 2 * pair, 0.4, RangeTag::signed_open);
    StateField hi = lo;
    StateField gap = random_field(g, 301 + 2 * pair, 0.3, RangeTag::nonneg);
    for (int k = 0; k < g.size(); ++k) hi.values[k] += gap.values[k];
    bool ordered = true;
    for (int s = 0; s < nsteps; ++s) {
      lo = step_scalar(lo, dt, phiR, rx);
      hi = step_scalar(hi, dt, phiR, rx);
      for (int k = 0; k < g.size(); ++k) {
        double defect = lo.values[k] - hi.values[k];
        worst = std::max(worst, defect);
        if (defect > 1e-8) ordered = false;
      }
    }
    if (ordered) ++passed;
  }
  report(4, "comparison principle", passed == 10,
         fmt("%d/10 pairs ordered, worst defect %.3e", passed, worst));
}

void criterion_smoothing() {
  Grid g = build_grid(1, {1.0}, {400});
  PhiSpec phi = PhiSpec::biofilm(2, 3);
  RegularizedPhi phiR = regularize(phi, 1e3);
  ReactionSpec none = ReactionSpec::custom([](double, double) { return 0.0; }, nullptr, 0.0);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.snapshot_times = {0.1, 0.5};

  const std::vector<double> amps{0.9, 0.99, 0.999, 0.9995, 0.9997, 0.9998, 0.99985, 0.9999};
  std::vector<Trajectory> runs;
  double h1_min = 1e300, h1_max = 0.0;
  bool solved = true;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    StateField u0 = random_field(g, 500 + i, amps[i], RangeTag::signed_open);
    std::vector<double> pu(u0.values.size());
    for (std::size_t k = 0; k < pu.size(); ++k) pu[k] = phi.value(u0.values[k]);
    double h1 = norm(g, pu, NormKind::h1_semi);
    h1_min = std::min(h1_min, h1);
    h1_max = std::max(h1_max, h1);
    runs.push_back(solve_scalar(u0, phiR, none, cfg));
    solved = solved && !runs.back().failed;
  }
  DiagnosticReport rep = check_smoothing(runs, phiR);
  double decades = std::log10(h1_max / h1_min);
  bool pass = solved && decades >= 2.0 && rep.passed;
  report(5, "smoothing uniformity", pass,
         fmt("initial H1 span %.2f decades, t=1 spread %.3f (limit 10)", decades,
             rep.details.value("spread_ratio", 0.0)));
}

void criterion_r_sweep() {
  Scenario sc = load_scenario(scenario_path("biofilm_sweep.json"));
  Grid g = sc.make_grid();
  CoupledState s0{sc.make_u0(g), sc.make_v0(g)};
  RSweepReport rep = r_sweep(s0, sc.make_phi(), sc.make_reaction(), sc.solver,
                             sc.checks.value("sweep_tol", 1e-3));
  bool decreasing = true;
  for (std::size_t k = 1; k < rep.d.size(); ++k)
    decreasing = decreasing && rep.d[k] < rep.d[k - 1];
  std::string gaps;
  for (double d : rep.d) gaps += fmt("%.3e ", d);
  report(6, "R-sweep Cauchy convergence", rep.cauchy && decreasing,
         fmt("gaps: %sfinal <= %.0e", gaps.c_str(), rep.tol));
}

void criterion_level_set_decay() {
  Grid g = build_grid(1, {1.0}, {400});
  const double beta = 2.0;
  RegularizedPhi phiR = regularize(PhiSpec::biofilm(2, 3), 1e4);
  ReactionSpec rx = ReactionSpec::scalar_decay(beta);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.snapshot_times = {0.25, 0.5, 0.75};

  auto bump = [&](double center, double amp) {
    StateField f = StateField::zeros(g, RangeTag::signed_open);
    for (int k = 0; k < g.size(); ++k) {
      double s = 1.0 - std::pow((g.point(k)[0] - center) / 0.1, 2);
      f.values[k] = s > 0.0 ? amp * s * s : 0.0;
    }
    return f;
  };
  Trajectory t1 = solve_scalar(bump(0.3, 1e-4), phiR, rx, cfg);
  Trajectory t2 = solve_scalar(bump(0.7, 2e-4), phiR, rx, cfg);

  auto dist = [&](std::size_t s) {
    std::vector<double> d(g.size());
    for (int k = 0; k < g.size(); ++k)
      d[k] = t1.states[s].values[k] - t2.states[s].values[k];
    return norm(g, d, NormKind::l1);
  };
  double T = t1.times.back();
  double rate = std::log(dist(0) / dist(t1.times.size() - 1)) / T;
  DiagnosticReport rep = check_level_set_decay(t1, t2, rx, 1e-3, beta);
  bool pass = rate >= 0.9 * beta && rep.passed;
  report(7, "level-set decay", pass,
         fmt("measured rate %.4f >= %.2f, decay check %s", rate, 0.9 * beta,
             rep.passed ? "pass" : "fail"));
}

void criterion_attractor() {
  Grid g = build_grid(1, {1.0}, {50});
  auto bump_at = [&](double center) {
    std::vector<double> w(g.size(), 0.0);
    for (int i = 0; i < g.size(); ++i) {
      double s = 1.0 - std::pow((g.point(i)[0] - center) / 0.15, 2);
      w[i] = s > 0.0 ? s : 0.0;
    }
    double m = norm(g, w, NormKind::l1);
    for (double& v : w) v /= m;
    return w;
  };
  auto w0 = bump_at(0.5), w1 = bump_at(0.25), w2 = bump_at(0.75);

  // k = 0, 1, 2 parameter families
  SnapshotSet fam0;
  for (int k = 0; k < 6; ++k) {
    StateField f = StateField::zeros(g);
    for (int i = 0; i < g.size(); ++i) f.values[i] = 0.4 * w0[i];
    fam0.points.push_back(std::move(f));
  }
  double d0 = fractal_dimension(fam0, {0.4, 0.2, 0.1, 0.05, 0.025}).dim;

  SnapshotSet fam1;
  for (int k = 0; k < 120; ++k) {
    StateField f = StateField::zeros(g);
    for (int i = 0; i < g.size(); ++i) f.values[i] = 0.9 * k / 119.0 * w0[i];
    fam1.points.push_back(std::move(f));
  }
  double d1 = fractal_dimension(fam1, {0.3, 0.15, 0.075, 0.0375, 0.018}).dim;

  SnapshotSet fam2;
  const int side = 80;
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) {
      StateField f = StateField::zeros(g);
      for (int i = 0; i < g.size(); ++i)
        f.values[i] = 0.45 * (a * w1[i] + b * w2[i]) / (side - 1);
      fam2.points.push_back(std::move(f));
    }
  double d2 = fractal_dimension(fam2, {0.24, 0.12, 0.06, 0.03, 0.02}).dim;

  // scalar_decay omega-limit collapse and attraction rate
  const double lambda = 2.0;
  RegularizedPhi phiR = regularize(PhiSpec::biofilm(2, 3), 1e4);
  ReactionSpec dec = ReactionSpec::scalar_decay(lambda);
  StateField u0 = StateField::zeros(g);
  for (int i = 0; i < g.size(); ++i) u0.values[i] = 1e-4 * w0[i] / w0[g.size() / 2];
  SolverConfig cfg;
  cfg.dt = 1e-3;
  SnapshotSet omega = sample_omega_limit(u0, phiR, dec, cfg, 7.0, 4, 0.5);
  int balls = greedy_cover(omega, 1e-6).count;

  SolverConfig rcfg = cfg;
  rcfg.t_end = 3.0;
  for (int s = 1; s <= 12; ++s) rcfg.snapshot_times.push_back(0.25 * s);
  RateFit rate = fit_attraction_rate({solve_scalar(u0, phiR, dec, rcfg)}, omega);

  bool pass = std::abs(d0 - 0.0) <= 0.3 && std::abs(d1 - 1.0) <= 0.3 &&
              std::abs(d2 - 2.0) <= 0.3 && balls == 1 &&
              std::abs(rate.alpha_hat - lambda) <= 0.05 * lambda;
  report(8, "attractor dimension sanity", pass,
         fmt("dims %.2f/%.2f/%.2f, omega balls %d, rate %.4f vs lambda %.1f", d0, d1, d2,
             balls, rate.alpha_hat, lambda));
}

void criterion_energy() {
  bool pass = true;
  std::string detail;
  for (const auto& entry : fs::directory_iterator(PMRD_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    Scenario sc = load_scenario(entry.path().string());
    Grid g = sc.make_grid();
    RegularizedPhi phiR = regularize(sc.make_phi(), sc.solver.R_schedule.front());
    ReactionSpec rx = sc.make_reaction();
    Trajectory traj;
    if (sc.coupled()) {
      traj = solve_coupled(CoupledState{sc.make_u0(g), sc.make_v0(g)}, phiR, rx, sc.solver);
    } else {
      traj = solve_scalar(sc.make_u0(g), phiR, rx, sc.solver);
    }
    DiagnosticReport rep = check_energy(traj);
    bool mono = true;
    if (sc.reaction_kind == "none")
      for (std::size_t s = 2; s < traj.steps.size(); ++s)
        mono = mono && traj.steps[s].energy <= traj.steps[s - 1].energy + 1e-14;
    pass = pass && !traj.failed && rep.passed && mono;
    detail += fmt("%s: %.1e%s; ", sc.name.c_str(), rep.margin,
                  sc.reaction_kind == "none" ? (mono ? " mono" : " NOT-MONO") : "");
  }
  report(9, "energy identity", pass, detail);
}

void criterion_determinism() {
  fs::path base = fs::temp_directory_path() / "pmrd_acceptance_selftest";
  fs::remove_all(base);
  SelftestResult a = run_selftest((base / "a").string(), 42);
  SelftestResult b = run_selftest((base / "b").string(), 42);
  SelftestResult c = run_selftest((base / "c").string(), 43);
  bool pass = a.passed && b.passed && a.fingerprint == b.fingerprint &&
              a.fingerprint != c.fingerprint;
  report(10, "determinism", pass,
         fmt("fingerprints %s / %s, seed 43 -> %s", a.fingerprint.c_str(),
             b.fingerprint.c_str(), c.fingerprint.c_str()));
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  criterion_barenblatt();
  criterion_contraction();
  criterion_barrier();
  criterion_comparison();
  criterion_smoothing();
  criterion_r_sweep();
  criterion_level_set_decay();
  criterion_attractor();
  criterion_energy();
  criterion_determinism();
  double secs = std::chrono::duration<double>(clock::now() - t0).count();
  std::printf("%d/10 criteria passed in %.1f s\n", 10 - g_failures, secs);
  return g_failures == 0 ? 0 : 1;
}
