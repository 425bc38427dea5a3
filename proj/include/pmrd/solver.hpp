#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmrd/grid.hpp"
#include "pmrd/nonlinearity.hpp"

namespace pmrd {

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> R_schedule{1e4};  // single entry = plain solve
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double damping = 0.5;  // step shrink factor while the residual does not decrease
  int max_halvings = 30;
  std::vector<double> snapshot_times;  // t=0 and t_end are always recorded

  void validate() const;  // throws std::invalid_argument
};

/// Per-step record; energy quantities refer to the regularized nonlinearity:
/// energy = <Phi_R(u), 1>, dissipation = |grad phi_R(u)|_{L2}^2,
/// reaction_power = <f(u), phi_R(u)>.
struct StepStats {
  double t = 0.0;
  int newton_iters = 0;
  double residual = 0.0;
  double sup_u = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double reaction_power = 0.0;
};

struct Trajectory {
  std::vector<double> times;          // snapshot times, strictly increasing
  std::vector<StateField> states;     // u snapshots
  std::vector<StateField> vstates;    // v snapshots (empty for scalar runs)
  std::vector<StepStats> steps;
  bool coupled = false;
  bool failed = false;
  std::string failure;

  bool has_v() const { return !vstates.empty(); }
};

/// One backward-Euler step of u - dt lap phi_R(u) - dt f(u) = u_old by damped
/// Newton. Throws std::runtime_error on Newton failure and std::domain_error
/// if the accepted state leaves the admissible range (smaller dt advised).
StateField step_scalar(const StateField& state, double dt, const RegularizedPhi& phiR,
                       const ReactionSpec& reaction, const SolverConfig& cfg = {});

CoupledState step_coupled(const CoupledState& state, double dt, const RegularizedPhi& phiR,
                          const ReactionSpec& reaction, const SolverConfig& cfg = {});

/// Advances u0 to cfg.t_end with the first entry of cfg.R_schedule; on step
/// failure the trajectory is returned with failed=true and partial data.
Trajectory solve_scalar(const StateField& u0, const RegularizedPhi& phiR,
                        const ReactionSpec& reaction, const SolverConfig& cfg);

Trajectory solve_coupled(const CoupledState& s0, const RegularizedPhi& phiR,
                         const ReactionSpec& reaction, const SolverConfig& cfg);

/// Cauchy-convergence report for the regularization sweep. d[k] is the max
/// over snapshot times of the L1 distance between runs k and k+1 (u and v
/// distances summed for coupled runs).
struct RSweepReport {
  std::vector<double> R;
  std::vector<double> d;
  bool cauchy = false;   // d strictly decreasing and d.back() < tol
  double tol = 1e-3;
  std::vector<Trajectory> runs;  // one per R, in schedule order
};

RSweepReport r_sweep(const StateField& u0, const PhiSpec& phi, const ReactionSpec& reaction,
                     const SolverConfig& cfg, double tol = 1e-3, int workers = 1);
RSweepReport r_sweep(const CoupledState& s0, const PhiSpec& phi, const ReactionSpec& reaction,
                     const SolverConfig& cfg, double tol = 1e-3, int workers = 1);

/// Uniform-bound margin from the stationary barrier: solves -lap w = f_sup
/// with w = phi(1 - eta/2) on the boundary and returns
/// delta = 1 - phi^{-1}(|w|_sup + 1), so that trajectories with
/// u0 <= 1 - eta stay below 1 - delta (up to discretization error).
double barrier_bound(const Grid& grid, const PhiSpec& phi, double f_sup, double eta);

}  // namespace pmrd
