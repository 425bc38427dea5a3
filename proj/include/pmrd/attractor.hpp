#pragma once

#include <string>
#include <vector>

#include "pmrd/solver.hpp"

namespace pmrd {

/// Finite point cloud in the discretized L1 (or L2) phase space.
struct SnapshotSet {
  std::vector<StateField> points;  // shared grid and range tag
  NormKind metric = NormKind::l1;
  std::vector<std::string> provenance;  // scenario id / sample time per point
  bool complete = true;
  std::string warning;

  double distance(std::size_t i, std::size_t j) const;
  double distance_to(std::size_t i, const StateField& f) const;
};

/// Greedy epsilon-net: farthest-point selection, lowest index wins ties.
struct Covering {
  double eps = 0.0;
  int count = 0;
  std::vector<int> centers;
};

Covering greedy_cover(const SnapshotSet& set, double eps);

struct CoveringResult {
  std::vector<double> eps_list;   // decreasing
  std::vector<int> counts;        // non-decreasing along the list
  std::vector<std::vector<int>> centers;
};

CoveringResult cover_sweep(const SnapshotSet& set, std::vector<double> eps_list);

/// Least-squares slope of log N_eps vs log(1/eps) plus fit quality.
struct DimensionFit {
  double dim = 0.0;
  double r2 = 1.0;
  bool stable = true;  // r2 >= 0.9
  CoveringResult covers;
};

DimensionFit fractal_dimension(const SnapshotSet& set, const std::vector<double>& eps_list);

/// log2 of the greedy covering count (upper bound on the true entropy).
double epsilon_entropy(const SnapshotSet& set, double eps);

/// Exponential attraction fit: d(t) = min distance from trajectory states to
/// the candidate set; fits log d(t) = log Q - alpha t, ignoring samples at or
/// below the metric noise floor 1e-12.
struct RateFit {
  double alpha_hat = 0.0;
  double Q_hat = 0.0;
  double r2 = 0.0;
  bool saturated = false;  // too few samples above the noise floor
  std::vector<double> times, dists;
};

RateFit fit_attraction_rate(const std::vector<Trajectory>& trajectories,
                            const SnapshotSet& candidate);

/// Integrates past burn_in and samples every sample_gap thereafter; on solver
/// failure the partial set is returned with complete=false.
SnapshotSet sample_omega_limit(const StateField& u0, const RegularizedPhi& phiR,
                               const ReactionSpec& reaction, const SolverConfig& base_cfg,
                               double burn_in, int n_samples, double sample_gap);

}  // namespace pmrd
