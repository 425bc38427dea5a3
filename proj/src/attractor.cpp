#include "pmrd/attractor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmrd {

namespace {

double field_dist(const Grid& g, const std::vector<double>& a, const std::vector<double>& b,
                  NormKind metric) {
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return norm(g, d, metric);
}

struct Fit {
  double slope = 0.0, intercept = 0.0, r2 = 1.0;
};

Fit ls_fit(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace

double SnapshotSet::distance(std::size_t i, std::size_t j) const {
  return field_dist(points[i].grid, points[i].values, points[j].values, metric);
}

double SnapshotSet::distance_to(std::size_t i, const StateField& f) const {
  return field_dist(points[i].grid, points[i].values, f.values, metric);
}

Covering greedy_cover(const SnapshotSet& set, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("greedy_cover: eps must be positive");
  Covering cov;
  cov.eps = eps;
  const std::size_t n = set.points.size();
  if (n == 0) return cov;
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  // first center: index 0 (the farthest-from-nothing tie broken by lowest index)
  int next = 0;
  for (;;) {
    cov.centers.push_back(next);
    for (std::size_t k = 0; k < n; ++k)
      min_dist[k] = std::min(min_dist[k], set.distance(k, std::size_t(next)));
    double worst = 0.0;
    int arg = -1;
    for (std::size_t k = 0; k < n; ++k)
      if (min_dist[k] > worst) {  // strict: ties resolve to the lowest index
        worst = min_dist[k];
        arg = int(k);
      }
    if (worst <= eps || arg < 0) break;
    next = arg;
  }
  cov.count = int(cov.centers.size());
  // hard coverage assertion (active in all build types)
  for (std::size_t k = 0; k < n; ++k)
    if (min_dist[k] > eps) throw std::logic_error("greedy_cover: coverage postcondition failed");
  return cov;
}

CoveringResult cover_sweep(const SnapshotSet& set, std::vector<double> eps_list) {
  std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
  CoveringResult res;
  for (double e : eps_list) {
    Covering c = greedy_cover(set, e);
    res.eps_list.push_back(e);
    res.counts.push_back(c.count);
    res.centers.push_back(std::move(c.centers));
  }
  return res;
}

DimensionFit fractal_dimension(const SnapshotSet& set, const std::vector<double>& eps_list) {
  if (eps_list.size() < 4)
    throw std::invalid_argument("fractal_dimension: need >= 4 epsilon values");
  double mx = *std::max_element(eps_list.begin(), eps_list.end());
  double mn = *std::min_element(eps_list.begin(), eps_list.end());
  if (mn <= 0.0 || mx / mn < 10.0)
    throw std::invalid_argument("fractal_dimension: eps_list must span >= 1 decade");
  DimensionFit fit;
  fit.covers = cover_sweep(set, eps_list);
  std::vector<double> x, y;
  for (std::size_t k = 0; k < fit.covers.eps_list.size(); ++k) {
    x.push_back(std::log(1.0 / fit.covers.eps_list[k]));
    y.push_back(std::log(double(std::max(1, fit.covers.counts[k]))));
  }
  Fit f = ls_fit(x, y);
  fit.dim = f.slope;
  fit.r2 = f.r2;
  fit.stable = f.r2 >= 0.9;
  return fit;
}

double epsilon_entropy(const SnapshotSet& set, double eps) {
  Covering c = greedy_cover(set, eps);
  return c.count > 0 ? std::log2(double(c.count)) : 0.0;
}

RateFit fit_attraction_rate(const std::vector<Trajectory>& trajectories,
                            const SnapshotSet& candidate) {
  if (candidate.points.empty())
    throw std::invalid_argument("fit_attraction_rate: empty candidate set");
  RateFit out;
  const double floor = 1e-12;
  for (const Trajectory& tr : trajectories) {
    for (std::size_t s = 0; s < tr.states.size(); ++s) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < candidate.points.size(); ++p)
        d = std::min(d, candidate.distance_to(p, tr.states[s]));
      out.times.push_back(tr.times[s]);
      out.dists.push_back(d);
    }
  }
  std::vector<double> x, y;
  for (std::size_t k = 0; k < out.times.size(); ++k)
    if (out.dists[k] > floor) {
      x.push_back(out.times[k]);
      y.push_back(std::log(out.dists[k]));
    }
  if (x.size() < 2) {
    out.saturated = true;
    return out;
  }
  Fit f = ls_fit(x, y);
  out.alpha_hat = -f.slope;
  out.Q_hat = std::exp(f.intercept);
  out.r2 = f.r2;
  return out;
}

SnapshotSet sample_omega_limit(const StateField& u0, const RegularizedPhi& phiR,
                               const ReactionSpec& reaction, const SolverConfig& base_cfg,
                               double burn_in, int n_samples, double sample_gap) {
  if (burn_in < 1.0) throw std::invalid_argument("sample_omega_limit: burn_in must be >= 1");
  if (n_samples < 2) throw std::invalid_argument("sample_omega_limit: need >= 2 samples");
  if (sample_gap <= 0.0) throw std::invalid_argument("sample_omega_limit: sample_gap must be > 0");
  SolverConfig cfg = base_cfg;
  cfg.t_end = burn_in + (n_samples - 1) * sample_gap;
  cfg.snapshot_times.clear();
  for (int k = 0; k < n_samples; ++k) cfg.snapshot_times.push_back(burn_in + k * sample_gap);
  Trajectory tr = solve_scalar(u0, phiR, reaction, cfg);
  SnapshotSet set;
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    if (tr.times[s] < burn_in - 0.5 * cfg.dt) continue;
    set.points.push_back(tr.states[s]);
    set.provenance.push_back("t=" + std::to_string(tr.times[s]));
  }
  if (tr.failed) {
    set.complete = false;
    set.warning = tr.failure;
  }
  return set;
}

}  // namespace pmrd
