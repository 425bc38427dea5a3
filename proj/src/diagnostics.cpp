#include "pmrd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pmrd {

namespace {

double l1_between(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return norm(g, d, NormKind::l1);
}

void require_paired(const Trajectory& t1, const Trajectory& t2) {
  if (t1.times.size() != t2.times.size())
    throw std::invalid_argument("paired trajectories must share snapshot times");
  for (std::size_t s = 0; s < t1.times.size(); ++s)
    if (std::abs(t1.times[s] - t2.times[s]) > 1e-12)
      throw std::invalid_argument("paired trajectories must share snapshot times");
  if (!t1.states.empty() && !t2.states.empty() &&
      !t1.states[0].grid.same_as(t2.states[0].grid))
    throw std::invalid_argument("paired trajectories must share the grid");
}

// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(x.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return den > 0 ? num / den : 0.0;
}

}  // namespace

nlohmann::json DiagnosticReport::to_json() const {
  return {{"name", name}, {"passed", passed}, {"margin", margin}, {"details", details}};
}

DiagnosticReport check_l1_contraction(const Trajectory& t1, const Trajectory& t2, double L,
                                      double eps_d, const ReactionSpec* r1,
                                      const ReactionSpec* r2) {
  require_paired(t1, t2);
  DiagnosticReport rep;
  rep.name = "l1_contraction";
  const Grid& g = t1.states[0].grid;
  const bool coupled = t1.has_v() && t2.has_v();

  auto dist_at = [&](std::size_t s) {
    double d = l1_between(g, t1.states[s].values, t2.states[s].values);
    if (coupled) d += l1_between(g, t1.vstates[s].values, t2.vstates[s].values);
    return d;
  };
  auto mismatch_at = [&](std::size_t s) {
    if (!r1 || !r2) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < t2.states[s].values.size(); ++k) {
      double u = t2.states[s].values[k];
      double v = coupled ? t2.vstates[s].values[k] : 0.0;
      auto a = r1->eval_clamped(u, v), b = r2->eval_clamped(u, v);
      acc += std::abs(a.f - b.f) + (coupled ? std::abs(a.g - b.g) : 0.0);
    }
    return acc * g.cell_measure();
  };

  const double d0 = dist_at(0);
  double margin = std::numeric_limits<double>::infinity();
  nlohmann::json table = nlohmann::json::array();
  double integral = 0.0;
  double prev_mis = mismatch_at(0);
  for (std::size_t s = 0; s < t1.times.size(); ++s) {
    double t = t1.times[s];
    if (s > 0) {
      double mis = mismatch_at(s);
      integral += 0.5 * (prev_mis + mis) * (t - t1.times[s - 1]);
      prev_mis = mis;
    }
    double lhs = dist_at(s);
    double rhs = std::exp(L * t) * (d0 + integral) * (1.0 + eps_d);
    margin = std::min(margin, rhs - lhs);
    table.push_back({{"t", t}, {"lhs", lhs}, {"rhs", rhs}});
  }
  rep.margin = margin;
  rep.passed = margin >= 0.0;
  rep.details = {{"L", L}, {"eps_d", eps_d}, {"initial", d0}, {"samples", table}};
  return rep;
}

DiagnosticReport check_energy(const Trajectory& traj, double tol_scale) {
  DiagnosticReport rep;
  rep.name = "energy";
  if (traj.steps.size() < 2) {
    rep.passed = true;
    rep.margin = 0.0;
    rep.details = {{"note", "fewer than 2 step records"}};
    return rep;
  }
  double margin = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t k = 1; k < traj.steps.size(); ++k) {
    const StepStats& a = traj.steps[k - 1];
    const StepStats& b = traj.steps[k];
    double dt = b.t - a.t;
    double lhs = b.energy - a.energy + dt * b.dissipation;
    double rhs = dt * b.reaction_power + tol_scale * (1.0 + std::abs(b.energy));
    double slack = rhs - lhs;
    if (slack < margin) {
      margin = slack;
      worst_t = b.t;
    }
    if (k < 64 || k + 1 == traj.steps.size())
      table.push_back({{"t", b.t}, {"E", b.energy}, {"D", b.dissipation},
                       {"P", b.reaction_power}, {"slack", slack}});
  }
  rep.margin = margin;
  rep.passed = margin >= 0.0 && !traj.failed;
  rep.details = {{"worst_t", worst_t}, {"samples", table}};
  return rep;
}

DiagnosticReport check_smoothing(const std::vector<Trajectory>& runs, const RegularizedPhi& phiR,
                                 double max_spread) {
  DiagnosticReport rep;
  rep.name = "smoothing";
  if (runs.size() < 5) throw std::invalid_argument("check_smoothing: need >= 5 runs");
  const std::array<double, 3> targets{0.1, 0.5, 1.0};
  std::vector<double> final_norms;
  std::vector<double> log_invt, log_norm;
  nlohmann::json table = nlohmann::json::array();
  for (const Trajectory& tr : runs) {
    if (tr.failed) {
      rep.passed = false;
      rep.margin = -std::numeric_limits<double>::infinity();
      rep.details = {{"note", "run failed: " + tr.failure}};
      return rep;
    }
    const Grid& g = tr.states[0].grid;
    nlohmann::json row = nlohmann::json::array();
    for (double tt : targets) {
      std::size_t best = 0;
      for (std::size_t s = 1; s < tr.times.size(); ++s)
        if (std::abs(tr.times[s] - tt) < std::abs(tr.times[best] - tt)) best = s;
      std::vector<double> pu(tr.states[best].values.size());
      for (std::size_t k = 0; k < pu.size(); ++k) pu[k] = phiR.value(tr.states[best].values[k]);
      double h1 = norm(g, pu, NormKind::h1_semi);
      double l2 = norm(g, pu, NormKind::l2);
      double sq = h1 * h1 + l2 * l2;
      row.push_back({{"t", tr.times[best]}, {"h1_sq", sq}});
      if (tt == 1.0) final_norms.push_back(sq);
      if (sq > 0.0) {
        log_invt.push_back(std::log(1.0 / tr.times[best]));
        log_norm.push_back(std::log(sq));
      }
    }
    table.push_back(row);
  }
  double mx = *std::max_element(final_norms.begin(), final_norms.end());
  double mn = *std::min_element(final_norms.begin(), final_norms.end());
  double ratio;
  if (mx <= 1e-300)
    ratio = 1.0;  // all-zero family is trivially uniform
  else
    ratio = mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity();
  double kappa_hat = log_invt.size() >= 2 ? ls_slope(log_invt, log_norm) : 0.0;
  rep.margin = max_spread - ratio;
  rep.passed = rep.margin >= 0.0;
  rep.details = {{"spread_ratio", ratio}, {"kappa_hat", kappa_hat}, {"samples", table}};
  return rep;
}

namespace {
constexpr double kInterpolationC0 = 4.0;  // frozen after calibration on hat/bump families
}

DiagnosticReport check_interpolation(const StateField& field, double alpha, double C0) {
  DiagnosticReport rep;
  rep.name = "interpolation";
  if (C0 <= 0.0) C0 = kInterpolationC0;
  const Grid& g = field.grid;
  double sup = norm(field, NormKind::sup);
  if (sup == 0.0) {
    rep.passed = true;
    rep.margin = 0.0;
    rep.details = {{"note", "zero field"}};
    return rep;
  }
  double l1 = norm(field, NormKind::l1);
  double hold = holder_seminorm(g, {TimeSlice{0.0, field.values}}, alpha);
  double gamma = alpha / (g.dim + alpha);
  double rhs = C0 * std::pow(l1, gamma) * std::pow(hold + sup, 1.0 - gamma);
  rep.margin = rhs - sup;
  rep.passed = rep.margin >= 0.0;
  rep.details = {{"C0", C0},
                 {"gamma", gamma},
                 {"sup", sup},
                 {"l1", l1},
                 {"holder", hold},
                 {"realized_constant", sup / (std::pow(l1, gamma) * std::pow(hold + sup, 1.0 - gamma))}};
  return rep;
}

DiagnosticReport check_level_set_decay(const Trajectory& t1, const Trajectory& t2,
                                       const ReactionSpec& reaction, double theta, double beta,
                                       double eps_d) {
  require_paired(t1, t2);
  if (theta <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("check_level_set_decay: theta, beta must be positive");
  // precondition: f_u(u, 0) <= -beta on |u| <= 5 theta (sampled)
  const double u_lo = (t1.states[0].range == RangeTag::nonneg) ? 0.0 : -5.0 * theta;
  for (int i = 0; i <= 100; ++i) {
    double u = u_lo + (5.0 * theta - u_lo) * i / 100.0;
    u = std::clamp(u, -1.0 + 1e-9, 1.0 - 1e-9);
    if (reaction.f_u(u, 0.0) > -beta + 1e-12)
      throw std::invalid_argument("check_level_set_decay: f_u >= -beta in the sampled range");
  }
  DiagnosticReport rep;
  rep.name = "level_set_decay";
  const Grid& g = t1.states[0].grid;

  bool small = true;
  for (const Trajectory* tr : {&t1, &t2})
    for (const StateField& s : tr->states)
      if (norm(s, NormKind::sup) >= 4.0 * theta) small = false;

  double d0 = l1_between(g, t1.states[0].values, t2.states[0].values);
  nlohmann::json table = nlohmann::json::array();
  if (small) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < t1.times.size(); ++s) {
      double t = t1.times[s];
      double lhs = l1_between(g, t1.states[s].values, t2.states[s].values);
      double rhs = std::exp(-beta * (1.0 - eps_d) * t) * d0;
      margin = std::min(margin, rhs - lhs);
      table.push_back({{"t", t}, {"lhs", lhs}, {"rhs", rhs}});
    }
    rep.margin = margin;
    rep.passed = margin >= 0.0;
    rep.details = {{"regime", "small_amplitude"}, {"beta", beta}, {"samples", table}};
    return rep;
  }

  // mixed regime: report the realized constant in
  // |u1-u2|_{L1(S(4theta))}(T) <= 0.5 |u1-u2|_{L1}(0) + C * tube
  LevelSets ls = level_sets(t1.states[0], 4.0 * theta);
  std::size_t last = t1.times.size() - 1;
  double restr = 0.0, tube = 0.0;
  for (std::size_t k = 0; k < t1.states[last].values.size(); ++k) {
    double d = std::abs(t1.states[last].values[k] - t2.states[last].values[k]);
    if (ls.S_mask[k])
      restr += d;
    else
      tube += std::abs(t1.states[last].values[k]) + std::abs(t2.states[last].values[k]);
  }
  restr *= g.cell_measure();
  tube *= g.cell_measure();
  double C = tube > 0.0 ? std::max(0.0, restr - 0.5 * d0) / tube : 0.0;
  rep.margin = 0.0;
  rep.passed = true;  // qualitative: the constant is reported, not asserted
  rep.details = {{"regime", "mixed"}, {"restricted_final", restr}, {"initial", d0},
                 {"tube_norm", tube}, {"realized_C", C}};
  return rep;
}

double barenblatt_profile(double m, double mass, int dim, double t,
                          const std::array<double, 2>& x) {
  if (t <= 0.0) throw std::domain_error("barenblatt_profile: t must be positive");
  if (m <= 1.0 || mass <= 0.0 || (dim != 1 && dim != 2))
    throw std::invalid_argument("barenblatt_profile: need m > 1, mass > 0, dim in {1,2}");
  const double n = dim;
  const double alpha = n / (n * (m - 1.0) + 2.0);
  const double betaexp = alpha / n;
  const double kcoef = alpha * (m - 1.0) / (2.0 * m * n);
  const double q = 1.0 / (m - 1.0);
  double C;
  if (dim == 1)
    C = std::pow(mass * std::sqrt(kcoef) / std::beta(0.5, q + 1.0), 1.0 / (q + 0.5));
  else
    C = std::pow(mass * kcoef * (q + 1.0) / std::numbers::pi, 1.0 / (q + 1.0));
  double r2 = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
  double core = C - kcoef * r2 * std::pow(t, -2.0 * betaexp);
  if (core <= 0.0) return 0.0;
  return std::pow(t, -alpha) * std::pow(core, q);
}

double barenblatt_radius(double m, double mass, int dim, double t) {
  if (t <= 0.0) throw std::domain_error("barenblatt_radius: t must be positive");
  const double n = dim;
  const double alpha = n / (n * (m - 1.0) + 2.0);
  const double betaexp = alpha / n;
  const double kcoef = alpha * (m - 1.0) / (2.0 * m * n);
  const double q = 1.0 / (m - 1.0);
  double C;
  if (dim == 1)
    C = std::pow(mass * std::sqrt(kcoef) / std::beta(0.5, q + 1.0), 1.0 / (q + 0.5));
  else
    C = std::pow(mass * kcoef * (q + 1.0) / std::numbers::pi, 1.0 / (q + 1.0));
  return std::sqrt(C / kcoef) * std::pow(t, betaexp);
}

InterfaceReport track_interface(const Trajectory& traj, double threshold) {
  InterfaceReport rep;
  if (traj.states.empty()) return rep;
  const Grid& g = traj.states[0].grid;
  // centroid of the initial support
  double cx = 0.0, cy = 0.0;
  int cnt = 0;
  for (int k = 0; k < g.size(); ++k)
    if (traj.states[0].values[k] > threshold) {
      auto p = g.point(k);
      cx += p[0];
      cy += p[1];
      ++cnt;
    }
  if (cnt > 0) {
    cx /= cnt;
    cy /= cnt;
  }
  rep.centroid = {cx, cy};
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    double r = 0.0;
    for (int k = 0; k < g.size(); ++k)
      if (traj.states[s].values[k] > threshold) {
        auto p = g.point(k);
        r = std::max(r, std::hypot(p[0] - cx, g.dim == 2 ? p[1] - cy : 0.0));
      }
    rep.times.push_back(traj.times[s]);
    rep.radii.push_back(r);
  }
  for (std::size_t s = 1; s < rep.radii.size(); ++s) {
    double dt = rep.times[s] - rep.times[s - 1];
    if (dt > 0.0)
      rep.max_growth_rate = std::max(rep.max_growth_rate, (rep.radii[s] - rep.radii[s - 1]) / dt);
  }
  return rep;
}

}  // namespace pmrd
