#include "pmrd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace pmrd {

Grid build_grid(int dim, const std::vector<double>& extents, const std::vector<int>& n) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("build_grid: dim must be 1 or 2");
  if (int(extents.size()) != dim || int(n.size()) != dim)
    throw std::invalid_argument("build_grid: extents/n size must match dim");
  Grid g;
  g.dim = dim;
  for (int d = 0; d < dim; ++d) {
    if (extents[d] <= 0.0) throw std::invalid_argument("build_grid: extent must be positive");
    if (n[d] < 3) throw std::invalid_argument("build_grid: need at least 3 interior nodes per axis");
    g.extent[d] = extents[d];
    g.n[d] = n[d];
    g.h[d] = extents[d] / (n[d] + 1);
  }
  if (dim == 1) {
    g.extent[1] = 1.0;
    g.n[1] = 1;
    g.h[1] = 1.0;
  }
  return g;
}

StateField StateField::zeros(const Grid& g, RangeTag tag) {
  StateField f;
  f.grid = g;
  f.range = tag;
  f.values.assign(g.size(), 0.0);
  return f;
}

void StateField::enforce_range(double snap_tol) {
  for (double& v : values) {
    if (v >= 1.0) {
      if (v <= 1.0 + snap_tol)
        v = std::nextafter(1.0, 0.0);
      else
        throw std::domain_error("state left admissible range (value >= 1)");
    }
    if (range == RangeTag::nonneg) {
      if (v < 0.0) {
        if (v >= -snap_tol)
          v = 0.0;
        else
          throw std::domain_error("state left admissible range (value < 0)");
      }
    } else if (v <= -1.0) {
      if (v >= -1.0 - snap_tol)
        v = std::nextafter(-1.0, 0.0);
      else
        throw std::domain_error("state left admissible range (value <= -1)");
    }
  }
}

bool StateField::in_range() const {
  const double lo = (range == RangeTag::signed_open) ? -1.0 : 0.0;
  for (double v : values) {
    if (v >= 1.0) return false;
    if (range == RangeTag::nonneg ? v < lo : v <= lo) return false;
  }
  return true;
}

void CoupledState::enforce_range(double snap_tol) {
  u.enforce_range(snap_tol);
  // v lives in the closed interval [0,1]; tolerance 1e-10 per contract
  for (double& x : v.values) {
    if (x < -1e-10 || x > 1.0 + 1e-10)
      throw std::domain_error("nutrient left [0,1] beyond tolerance");
    x = std::clamp(x, 0.0, 1.0);
  }
  (void)snap_tol;
}

std::vector<double> laplacian_apply(const Grid& g, const std::vector<double>& w) {
  if (int(w.size()) != g.size()) throw std::invalid_argument("laplacian_apply: shape mismatch");
  std::vector<double> out(w.size());
  if (g.dim == 1) {
    const double ih2 = 1.0 / (g.h[0] * g.h[0]);
    const int n = g.n[0];
    for (int i = 0; i < n; ++i) {
      double wl = (i > 0) ? w[i - 1] : 0.0;
      double wr = (i + 1 < n) ? w[i + 1] : 0.0;
      out[i] = (wl - 2.0 * w[i] + wr) * ih2;
    }
  } else {
    const double ihx2 = 1.0 / (g.h[0] * g.h[0]), ihy2 = 1.0 / (g.h[1] * g.h[1]);
    const int nx = g.n[0], ny = g.n[1];
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        int k = j * nx + i;
        double wl = (i > 0) ? w[k - 1] : 0.0;
        double wr = (i + 1 < nx) ? w[k + 1] : 0.0;
        double wd = (j > 0) ? w[k - nx] : 0.0;
        double wu = (j + 1 < ny) ? w[k + nx] : 0.0;
        out[k] = (wl - 2.0 * w[k] + wr) * ihx2 + (wd - 2.0 * w[k] + wu) * ihy2;
      }
  }
  return out;
}

NormKind norm_kind_from(const std::string& name) {
  if (name == "l1") return NormKind::l1;
  if (name == "l2") return NormKind::l2;
  if (name == "h1_semi") return NormKind::h1_semi;
  if (name == "sup") return NormKind::sup;
  throw std::invalid_argument("unknown norm kind: " + name);
}

double norm(const Grid& g, const std::vector<double>& w, NormKind kind) {
  if (int(w.size()) != g.size()) throw std::invalid_argument("norm: shape mismatch");
  const double meas = g.cell_measure();
  switch (kind) {
    case NormKind::l1: {
      double s = 0.0;
      for (double v : w) s += std::abs(v);
      return s * meas;
    }
    case NormKind::l2: {
      double s = 0.0;
      for (double v : w) s += v * v;
      return std::sqrt(s * meas);
    }
    case NormKind::sup: {
      double s = 0.0;
      for (double v : w) s = std::max(s, std::abs(v));
      return s;
    }
    case NormKind::h1_semi: {
      // forward-difference gradient including the Dirichlet ghost edges, so
      // that <-lap w, w> = |grad w|^2 exactly in the discrete inner product
      double s = 0.0;
      if (g.dim == 1) {
        const int n = g.n[0];
        const double ih = 1.0 / g.h[0];
        for (int i = 0; i <= n; ++i) {
          double a = (i > 0) ? w[i - 1] : 0.0;
          double b = (i < n) ? w[i] : 0.0;
          double d = (b - a) * ih;
          s += d * d * g.h[0];
        }
      } else {
        const int nx = g.n[0], ny = g.n[1];
        const double ihx = 1.0 / g.h[0], ihy = 1.0 / g.h[1];
        for (int j = 0; j < ny; ++j)
          for (int i = 0; i <= nx; ++i) {
            double a = (i > 0) ? w[j * nx + i - 1] : 0.0;
            double b = (i < nx) ? w[j * nx + i] : 0.0;
            double d = (b - a) * ihx;
            s += d * d * meas;
          }
        for (int i = 0; i < nx; ++i)
          for (int j = 0; j <= ny; ++j) {
            double a = (j > 0) ? w[(j - 1) * nx + i] : 0.0;
            double b = (j < ny) ? w[j * nx + i] : 0.0;
            double d = (b - a) * ihy;
            s += d * d * meas;
          }
      }
      return std::sqrt(s);
    }
  }
  return 0.0;
}

double norm(const StateField& f, NormKind kind) { return norm(f.grid, f.values, kind); }

double holder_seminorm(const Grid& g, const std::vector<TimeSlice>& slices, double alpha,
                       std::uint64_t seed) {
  if (slices.empty()) throw std::invalid_argument("holder_seminorm: no snapshots");
  if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("holder_seminorm: alpha in (0,1]");
  const long N = g.size();
  const long P = long(slices.size()) * N;
  const long max_pairs = 1000000;
  double sup = 0.0;

  auto pair_quot = [&](long p, long q) {
    long sp = p / N, ip = p % N, sq = q / N, iq = q % N;
    double du = std::abs(slices[sp].values[ip] - slices[sq].values[iq]);
    if (du == 0.0) return 0.0;
    auto xp = g.point(int(ip)), xq = g.point(int(iq));
    double dx = std::hypot(xp[0] - xq[0], xp[1] - xq[1]);
    double dist = std::abs(slices[sp].t - slices[sq].t) + dx;
    if (dist == 0.0) return 0.0;
    return du / std::pow(dist, alpha);
  };

  if (P * (P - 1) / 2 <= max_pairs) {
    for (long p = 0; p < P; ++p)
      for (long q = p + 1; q < P; ++q) sup = std::max(sup, pair_quot(p, q));
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> pick(0, P - 1);
    for (long k = 0; k < max_pairs; ++k) {
      long p = pick(rng), q = pick(rng);
      if (p == q) continue;
      sup = std::max(sup, pair_quot(p, q));
    }
    // always include nearest-neighbour pairs: they dominate for smooth fields
    for (std::size_t s = 0; s < slices.size(); ++s) {
      for (long i = 0; i + 1 < N; ++i) {
        if (g.dim == 2 && (i + 1) % g.n[0] == 0) continue;
        sup = std::max(sup, pair_quot(long(s) * N + i, long(s) * N + i + 1));
      }
      if (g.dim == 2)
        for (long i = 0; i + g.n[0] < N; ++i)
          sup = std::max(sup, pair_quot(long(s) * N + i, long(s) * N + i + g.n[0]));
    }
  }
  return sup;
}

LevelSets level_sets(const StateField& u0, double theta) {
  if (theta <= 0.0) throw std::invalid_argument("level_sets: theta must be positive");
  const Grid& g = u0.grid;
  LevelSets ls;
  ls.theta = theta;
  const int N = g.size();
  ls.L_mask.assign(N, 0);
  ls.S_mask.assign(N, 0);
  for (int k = 0; k < N; ++k) {
    if (std::abs(u0.values[k]) > theta)
      ls.L_mask[k] = 1;
    else
      ls.S_mask[k] = 1;
  }
  // discrete boundary of S: S-nodes with an L-neighbour
  auto is_L = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= g.n[0] || (g.dim == 2 && j >= g.n[1])) return false;
    return ls.L_mask[g.index(i, j)] != 0;
  };
  const int ny = (g.dim == 2) ? g.n[1] : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      int k = g.index(i, j);
      if (!ls.S_mask[k]) continue;
      bool touches = is_L(i - 1, j) || is_L(i + 1, j);
      if (g.dim == 2) touches = touches || is_L(i, j - 1) || is_L(i, j + 1);
      if (touches) ls.boundary_nodes.push_back(k);
    }
  return ls;
}

double level_set_separation(const StateField& u0, double theta, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("level_set_separation: delta must be positive");
  LevelSets inner = level_sets(u0, theta + delta);  // S(theta+delta) is the larger S-set
  LevelSets outer = level_sets(u0, theta);
  if (inner.boundary_nodes.empty() || outer.boundary_nodes.empty())
    return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (int a : inner.boundary_nodes) {
    auto pa = u0.grid.point(a);
    for (int b : outer.boundary_nodes) {
      auto pb = u0.grid.point(b);
      best = std::min(best, std::hypot(pa[0] - pb[0], pa[1] - pb[1]));
    }
  }
  return best;
}

}  // namespace pmrd
