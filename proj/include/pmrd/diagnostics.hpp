#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmrd/solver.hpp"

namespace pmrd {

/// Outcome of one verification check; margin is the worst-case signed slack
/// (passed iff margin >= 0, modulo explicit qualitative checks).
struct DiagnosticReport {
  std::string name;
  bool passed = false;
  double margin = 0.0;
  nlohmann::json details;  // per-time-sample table and fitted quantities

  nlohmann::json to_json() const;
};

/// |u1(t)-u2(t)|_L1 <= e^{Lt} (|u1(0)-u2(0)|_L1 + int_0^t |f1-f2|_L1) (1+eps_d)
/// at every common snapshot. The reaction-mismatch integral is only added when
/// both reactions are supplied; it is evaluated on traj2's states by trapezoid
/// over snapshots.
DiagnosticReport check_l1_contraction(const Trajectory& t1, const Trajectory& t2, double L,
                                      double eps_d = 0.05, const ReactionSpec* r1 = nullptr,
                                      const ReactionSpec* r2 = nullptr);

/// Per-step energy inequality
/// E(t^{n+1}) - E(t^n) + dt D(t^{n+1}) <= dt <f, phi_R(u)>^{n+1} + tol,
/// tol = 1e-8 (1+|E|); uses the per-step records stored by the solver.
DiagnosticReport check_energy(const Trajectory& traj, double tol_scale = 1e-8);

/// Smoothing uniformity across a family of runs: records |phi_R(u(t))|_{H1}^2
/// at t in {0.1, 0.5, 1} (nearest stored snapshots); passes when the t=1
/// values have max/min spread <= max_spread; also reports the least-squares
/// slope of log norm^2 vs log(1/t).
DiagnosticReport check_smoothing(const std::vector<Trajectory>& runs, const RegularizedPhi& phiR,
                                 double max_spread = 10.0);

/// Interpolation inequality |w|_sup <= C0 |w|_L1^g (H_alpha(w) + |w|_sup)^{1-g}
/// with g = alpha/(n+alpha) and a frozen calibration constant C0.
DiagnosticReport check_interpolation(const StateField& field, double alpha,
                                     double C0 = 0.0 /* 0 = frozen default */);

/// Exponential decay of the difference of small-amplitude runs in the
/// degenerate region: requires f_u(u,0) <= -beta for |u| <= 5 theta (sampled);
/// when both runs stay below 4 theta everywhere, asserts
/// |u1-u2|_L1(t) <= e^{-beta(1-eps_d)t} |u1-u2|_L1(0).
/// For mixed runs the S(4 theta)-restricted decay constant is reported only.
DiagnosticReport check_level_set_decay(const Trajectory& t1, const Trajectory& t2,
                                       const ReactionSpec& reaction, double theta, double beta,
                                       double eps_d = 0.05);

/// Closed-form source-type self-similar solution of u_t = lap(u^m) in
/// dimension dim at point x, normalized to the given total mass.
double barenblatt_profile(double m, double mass, int dim, double t,
                          const std::array<double, 2>& x);

/// Barenblatt free-boundary radius at time t (support radius of the profile).
double barenblatt_radius(double m, double mass, int dim, double t);

struct InterfaceReport {
  std::vector<double> times;
  std::vector<double> radii;       // max distance from initial-support centroid
  double max_growth_rate = 0.0;    // max per-step radius increase / dt
  std::array<double, 2> centroid{0.0, 0.0};
};

/// Support radius per snapshot (nodes with u > threshold), measured from the
/// centroid of the initial support.
InterfaceReport track_interface(const Trajectory& traj, double threshold);

}  // namespace pmrd
