#include "pmrd/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <stdexcept>

namespace pmrd {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

// neighbour list with stencil weights of the Dirichlet Laplacian
struct Stencil {
  std::vector<std::array<int, 4>> nb;      // neighbour indices, -1 for boundary
  std::vector<std::array<double, 4>> wt;   // off-diagonal weights
  std::vector<double> diag;                // diagonal weight
  int n_nb = 0;
};

Stencil make_stencil(const Grid& g) {
  Stencil st;
  const int N = g.size();
  st.nb.resize(N);
  st.wt.resize(N);
  st.diag.resize(N);
  const double ihx2 = 1.0 / (g.h[0] * g.h[0]);
  if (g.dim == 1) {
    st.n_nb = 2;
    for (int i = 0; i < N; ++i) {
      st.nb[i] = {i > 0 ? i - 1 : -1, i + 1 < N ? i + 1 : -1, -1, -1};
      st.wt[i] = {ihx2, ihx2, 0, 0};
      st.diag[i] = -2.0 * ihx2;
    }
  } else {
    st.n_nb = 4;
    const double ihy2 = 1.0 / (g.h[1] * g.h[1]);
    const int nx = g.n[0], ny = g.n[1];
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        int k = j * nx + i;
        st.nb[k] = {i > 0 ? k - 1 : -1, i + 1 < nx ? k + 1 : -1, j > 0 ? k - nx : -1,
                    j + 1 < ny ? k + nx : -1};
        st.wt[k] = {ihx2, ihx2, ihy2, ihy2};
        st.diag[k] = -2.0 * ihx2 - 2.0 * ihy2;
      }
  }
  return st;
}

std::vector<double> apply_stencil(const Stencil& st, const std::vector<double>& w) {
  std::vector<double> out(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    double s = st.diag[k] * w[k];
    for (int q = 0; q < st.n_nb; ++q)
      if (st.nb[k][q] >= 0) s += st.wt[k][q] * w[st.nb[k][q]];
    out[k] = s;
  }
  return out;
}

double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

// Damped Newton on a generic residual/Jacobian pair over a flat unknown vector.
template <class Residual, class Jacobian>
std::vector<double> newton_solve(std::vector<double> z, const Residual& resid,
                                 const Jacobian& jac, const SolverConfig& cfg, int& iters_out,
                                 double& final_res) {
  std::vector<double> F = resid(z);
  double res = sup_norm(F);
  int iters = 0;
  Eigen::SparseLU<SpMat> lu;
  while (res >= cfg.newton_tol) {
    if (iters >= cfg.newton_max_iter)
      throw std::runtime_error("Newton did not converge: residual " + std::to_string(res));
    SpMat J = jac(z);
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw std::runtime_error("Newton Jacobian factorization failed");
    Eigen::Map<const Eigen::VectorXd> Fv(F.data(), long(F.size()));
    Eigen::VectorXd du = lu.solve(Fv);
    double s = 1.0;
    std::vector<double> trial(z.size()), Ft;
    double trial_res = 0.0;
    int halvings = 0;
    for (;; ++halvings) {
      for (std::size_t k = 0; k < z.size(); ++k) trial[k] = z[k] - s * du[long(k)];
      Ft = resid(trial);
      trial_res = sup_norm(Ft);
      if (trial_res < res || halvings >= cfg.max_halvings) break;
      s *= cfg.damping;
    }
    z.swap(trial);
    F.swap(Ft);
    res = trial_res;
    ++iters;
  }
  iters_out = iters;
  final_res = res;
  return z;
}

StepStats make_stats(double t, int iters, double res, const Grid& g,
                     const std::vector<double>& u, const std::vector<double>& v,
                     const RegularizedPhi& phiR, const ReactionSpec& reaction, bool coupled) {
  StepStats s;
  s.t = t;
  s.newton_iters = iters;
  s.residual = res;
  s.sup_u = sup_norm(u);
  const double meas = g.cell_measure();
  std::vector<double> pu(u.size());
  double E = 0.0, P = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    pu[k] = phiR.value(u[k]);
    E += phiR.primitive(u[k]);
    double vv = coupled ? v[k] : 0.0;
    P += reaction.eval_clamped(u[k], vv).f * pu[k];
  }
  s.energy = E * meas;
  s.reaction_power = P * meas;
  double h1 = norm(g, pu, NormKind::h1_semi);
  s.dissipation = h1 * h1;
  return s;
}

std::set<int> snapshot_steps(const SolverConfig& cfg, int nsteps) {
  std::set<int> idx{0, nsteps};
  for (double ts : cfg.snapshot_times) {
    int k = int(std::lround(ts / cfg.dt));
    idx.insert(std::clamp(k, 0, nsteps));
  }
  return idx;
}

}  // namespace

void SolverConfig::validate() const {
  if (dt <= 0.0) throw std::invalid_argument("solver.dt must be positive");
  if (t_end <= 0.0) throw std::invalid_argument("solver.t_end must be positive");
  if (newton_tol <= 0.0) throw std::invalid_argument("solver.newton_tol must be positive");
  if (newton_max_iter < 1) throw std::invalid_argument("solver.newton_max_iter must be >= 1");
  if (damping <= 0.0 || damping > 1.0) throw std::invalid_argument("solver.damping must be in (0,1]");
  if (R_schedule.empty()) throw std::invalid_argument("solver.R_schedule must be nonempty");
  for (std::size_t k = 0; k < R_schedule.size(); ++k) {
    if (R_schedule[k] <= 1.0) throw std::invalid_argument("solver.R_schedule entries must be > 1");
    if (k > 0 && R_schedule[k] <= R_schedule[k - 1])
      throw std::invalid_argument("solver.R_schedule must be strictly increasing");
  }
}

StateField step_scalar(const StateField& state, double dt, const RegularizedPhi& phiR,
                       const ReactionSpec& reaction, const SolverConfig& cfg) {
  if (dt <= 0.0) throw std::invalid_argument("step_scalar: dt must be positive");
  const Grid& g = state.grid;
  const Stencil st = make_stencil(g);
  const std::vector<double>& uo = state.values;
  const int N = g.size();

  auto resid = [&](const std::vector<double>& u) {
    std::vector<double> pu(N);
    for (int k = 0; k < N; ++k) pu[k] = phiR.value(u[k]);
    std::vector<double> lap = apply_stencil(st, pu);
    std::vector<double> F(N);
    for (int k = 0; k < N; ++k)
      F[k] = u[k] - uo[k] - dt * lap[k] - dt * reaction.eval_clamped(u[k]).f;
    return F;
  };
  auto jac = [&](const std::vector<double>& u) {
    std::vector<Trip> trips;
    trips.reserve(std::size_t(N) * (st.n_nb + 1));
    for (int k = 0; k < N; ++k) {
      double dk = 1.0 - dt * st.diag[k] * phiR.derivative(u[k]) - dt * reaction.f_u(u[k], 0.0);
      trips.emplace_back(k, k, dk);
      for (int q = 0; q < st.n_nb; ++q) {
        int j = st.nb[k][q];
        if (j >= 0) trips.emplace_back(k, j, -dt * st.wt[k][q] * phiR.derivative(u[j]));
      }
    }
    SpMat J(N, N);
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
  };

  int iters = 0;
  double res = 0.0;
  std::vector<double> u = newton_solve(uo, resid, jac, cfg, iters, res);
  StateField out = state;
  out.values = std::move(u);
  out.enforce_range();  // throws on range exit: retry with smaller dt
  return out;
}

CoupledState step_coupled(const CoupledState& state, double dt, const RegularizedPhi& phiR,
                          const ReactionSpec& reaction, const SolverConfig& cfg) {
  if (dt <= 0.0) throw std::invalid_argument("step_coupled: dt must be positive");
  const Grid& g = state.u.grid;
  const Stencil st = make_stencil(g);
  const int N = g.size();
  const double du_mult = reaction.d2, dv_mult = reaction.d1;

  std::vector<double> zo(2 * N);
  std::copy(state.u.values.begin(), state.u.values.end(), zo.begin());
  std::copy(state.v.values.begin(), state.v.values.end(), zo.begin() + N);

  auto resid = [&](const std::vector<double>& z) {
    std::vector<double> pu(N), vv(N);
    for (int k = 0; k < N; ++k) pu[k] = phiR.value(z[k]);
    std::copy(z.begin() + N, z.end(), vv.begin());
    std::vector<double> lap_u = apply_stencil(st, pu);
    std::vector<double> lap_v = apply_stencil(st, vv);
    std::vector<double> F(2 * N);
    for (int k = 0; k < N; ++k) {
      auto r = reaction.eval_clamped(z[k], z[N + k]);
      F[k] = z[k] - zo[k] - dt * du_mult * lap_u[k] - dt * r.f;
      F[N + k] = z[N + k] - zo[N + k] - dt * dv_mult * lap_v[k] - dt * r.g;
    }
    return F;
  };
  auto jac = [&](const std::vector<double>& z) {
    std::vector<Trip> trips;
    trips.reserve(std::size_t(N) * (2 * st.n_nb + 4));
    for (int k = 0; k < N; ++k) {
      double u = z[k], v = z[N + k];
      trips.emplace_back(k, k,
                         1.0 - dt * du_mult * st.diag[k] * phiR.derivative(u) -
                             dt * reaction.f_u(u, v));
      trips.emplace_back(k, N + k, -dt * reaction.f_v(u, v));
      trips.emplace_back(N + k, k, -dt * reaction.g_u(u, v));
      trips.emplace_back(N + k, N + k,
                         1.0 - dt * dv_mult * st.diag[k] - dt * reaction.g_v(u, v));
      for (int q = 0; q < st.n_nb; ++q) {
        int j = st.nb[k][q];
        if (j < 0) continue;
        trips.emplace_back(k, j, -dt * du_mult * st.wt[k][q] * phiR.derivative(z[j]));
        trips.emplace_back(N + k, N + j, -dt * dv_mult * st.wt[k][q]);
      }
    }
    SpMat J(2 * N, 2 * N);
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
  };

  int iters = 0;
  double res = 0.0;
  std::vector<double> z = newton_solve(zo, resid, jac, cfg, iters, res);
  CoupledState out = state;
  std::copy(z.begin(), z.begin() + N, out.u.values.begin());
  std::copy(z.begin() + N, z.end(), out.v.values.begin());
  out.enforce_range();
  return out;
}

Trajectory solve_scalar(const StateField& u0, const RegularizedPhi& phiR,
                        const ReactionSpec& reaction, const SolverConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  StateField u = u0;
  u.enforce_range();
  const int nsteps = std::max(1, int(std::lround(cfg.t_end / cfg.dt)));
  const std::set<int> snaps = snapshot_steps(cfg, nsteps);
  traj.times.push_back(0.0);
  traj.states.push_back(u);
  traj.steps.push_back(
      make_stats(0.0, 0, 0.0, u.grid, u.values, {}, phiR, reaction, false));
  for (int n = 1; n <= nsteps; ++n) {
    double t = n * cfg.dt;
    try {
      u = step_scalar(u, cfg.dt, phiR, reaction, cfg);
    } catch (const std::exception& e) {
      traj.failed = true;
      traj.failure = "step " + std::to_string(n) + ": " + e.what();
      break;
    }
    StepStats s = make_stats(t, 0, 0.0, u.grid, u.values, {}, phiR, reaction, false);
    traj.steps.push_back(s);
    if (snaps.count(n)) {
      traj.times.push_back(t);
      traj.states.push_back(u);
    }
  }
  return traj;
}

Trajectory solve_coupled(const CoupledState& s0, const RegularizedPhi& phiR,
                         const ReactionSpec& reaction, const SolverConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  traj.coupled = true;
  CoupledState s = s0;
  s.enforce_range();
  const int nsteps = std::max(1, int(std::lround(cfg.t_end / cfg.dt)));
  const std::set<int> snaps = snapshot_steps(cfg, nsteps);
  traj.times.push_back(0.0);
  traj.states.push_back(s.u);
  traj.vstates.push_back(s.v);
  traj.steps.push_back(
      make_stats(0.0, 0, 0.0, s.u.grid, s.u.values, s.v.values, phiR, reaction, true));
  for (int n = 1; n <= nsteps; ++n) {
    double t = n * cfg.dt;
    try {
      s = step_coupled(s, cfg.dt, phiR, reaction, cfg);
    } catch (const std::exception& e) {
      traj.failed = true;
      traj.failure = "step " + std::to_string(n) + ": " + e.what();
      break;
    }
    traj.steps.push_back(
        make_stats(t, 0, 0.0, s.u.grid, s.u.values, s.v.values, phiR, reaction, true));
    if (snaps.count(n)) {
      traj.times.push_back(t);
      traj.states.push_back(s.u);
      traj.vstates.push_back(s.v);
    }
  }
  return traj;
}

namespace {

RSweepReport sweep_impl(const std::vector<Trajectory>& runs, const std::vector<double>& Rs,
                        double tol) {
  RSweepReport rep;
  rep.R = Rs;
  rep.tol = tol;
  rep.runs = runs;
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    const Trajectory& A = runs[k];
    const Trajectory& B = runs[k + 1];
    std::size_t m = std::min(A.states.size(), B.states.size());
    double d = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      std::vector<double> diff(A.states[s].values.size());
      for (std::size_t i = 0; i < diff.size(); ++i)
        diff[i] = A.states[s].values[i] - B.states[s].values[i];
      double dd = norm(A.states[s].grid, diff, NormKind::l1);
      if (A.has_v() && B.has_v()) {
        for (std::size_t i = 0; i < diff.size(); ++i)
          diff[i] = A.vstates[s].values[i] - B.vstates[s].values[i];
        dd += norm(A.states[s].grid, diff, NormKind::l1);
      }
      d = std::max(d, dd);
    }
    rep.d.push_back(d);
  }
  bool dec = true;
  for (std::size_t k = 0; k + 1 < rep.d.size(); ++k)
    if (rep.d[k + 1] >= rep.d[k] && rep.d[k + 1] > 1e-15) dec = false;
  rep.cauchy = dec && !rep.d.empty() && rep.d.back() < tol;
  return rep;
}

}  // namespace

template <class State, class Solve>
static RSweepReport sweep_runs(const State& s0, const PhiSpec& phi, const ReactionSpec& reaction,
                               const SolverConfig& cfg, double tol, int workers,
                               const Solve& solve_one) {
  cfg.validate();
  if (cfg.R_schedule.size() < 3)
    throw std::invalid_argument("r_sweep: need at least 3 regularization indices");
  const std::size_t m = cfg.R_schedule.size();
  std::vector<Trajectory> runs(m);
  auto task = [&](std::size_t k) {
    SolverConfig c1 = cfg;
    c1.R_schedule = {cfg.R_schedule[k]};
    runs[k] = solve_one(s0, regularize(phi, cfg.R_schedule[k]), reaction, c1);
  };
  if (workers <= 1) {
    for (std::size_t k = 0; k < m; ++k) task(k);
  } else {
    std::vector<std::future<void>> futs;
    for (std::size_t k = 0; k < m; ++k)
      futs.push_back(std::async(std::launch::async, task, k));
    for (auto& f : futs) f.get();
  }
  return sweep_impl(runs, cfg.R_schedule, tol);
}

RSweepReport r_sweep(const StateField& u0, const PhiSpec& phi, const ReactionSpec& reaction,
                     const SolverConfig& cfg, double tol, int workers) {
  return sweep_runs(u0, phi, reaction, cfg, tol, workers,
                    [](const StateField& s, const RegularizedPhi& p, const ReactionSpec& r,
                       const SolverConfig& c) { return solve_scalar(s, p, r, c); });
}

RSweepReport r_sweep(const CoupledState& s0, const PhiSpec& phi, const ReactionSpec& reaction,
                     const SolverConfig& cfg, double tol, int workers) {
  return sweep_runs(s0, phi, reaction, cfg, tol, workers,
                    [](const CoupledState& s, const RegularizedPhi& p, const ReactionSpec& r,
                       const SolverConfig& c) { return solve_coupled(s, p, r, c); });
}

double barrier_bound(const Grid& grid, const PhiSpec& phi, double f_sup, double eta) {
  if (eta <= 0.0 || eta >= 1.0) throw std::invalid_argument("barrier_bound: eta in (0,1)");
  if (f_sup < 0.0) throw std::invalid_argument("barrier_bound: f_sup must be >= 0");
  const double c2 = phi.value(1.0 - eta / 2.0);
  const int N = grid.size();
  const Stencil st = make_stencil(grid);
  // solve -lap wt = f_sup with zero boundary; then w = c2 + wt
  std::vector<Trip> trips;
  for (int k = 0; k < N; ++k) {
    trips.emplace_back(k, k, -st.diag[k]);
    for (int q = 0; q < st.n_nb; ++q)
      if (st.nb[k][q] >= 0) trips.emplace_back(k, st.nb[k][q], -st.wt[k][q]);
  }
  SpMat A(N, N);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("barrier_bound: linear solve failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(N, f_sup);
  Eigen::VectorXd wt = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("barrier_bound: linear solve failed");
  double wsup = c2 + wt.maxCoeff();
  return 1.0 - phi.inverse(wsup + 1.0);
}

}  // namespace pmrd
