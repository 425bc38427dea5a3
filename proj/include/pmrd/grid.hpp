#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pmrd {

/// Uniform tensor grid on a rectangle with homogeneous Dirichlet boundary.
/// Only interior nodes are stored; ghost values on the boundary are 0.
/// 1D: nodes x_i = (i+1) h, i = 0..n-1, h = extent / (n+1).
struct Grid {
  int dim = 1;
  std::array<double, 2> extent{1.0, 1.0};
  std::array<int, 2> n{0, 0};
  std::array<double, 2> h{0.0, 0.0};

  int size() const { return dim == 1 ? n[0] : n[0] * n[1]; }
  double cell_measure() const { return dim == 1 ? h[0] : h[0] * h[1]; }
  int index(int i, int j = 0) const { return dim == 1 ? i : j * n[0] + i; }
  std::array<double, 2> point(int idx) const {
    if (dim == 1) return {(idx + 1) * h[0], 0.0};
    int i = idx % n[0], j = idx / n[0];
    return {(i + 1) * h[0], (j + 1) * h[1]};
  }
  bool same_as(const Grid& o) const {
    return dim == o.dim && n == o.n && extent == o.extent;
  }
};

Grid build_grid(int dim, const std::vector<double>& extents, const std::vector<int>& n);

enum class RangeTag { signed_open, nonneg };  // (-1,1) resp. [0,1)

/// Grid function over interior nodes with a declared admissible range.
struct StateField {
  Grid grid;
  RangeTag range = RangeTag::signed_open;
  std::vector<double> values;

  static StateField zeros(const Grid& g, RangeTag tag = RangeTag::signed_open);
  /// Throws std::domain_error if any node lies outside the tagged range
  /// by more than snap_tol (values within snap_tol are snapped into range).
  void enforce_range(double snap_tol = 1e-12);
  bool in_range() const;
};

/// Biomass u in [0,1) plus nutrient v in [0,1] (Dirichlet 0 on the boundary).
struct CoupledState {
  StateField u;  // nonneg tagged
  StateField v;
  void enforce_range(double snap_tol = 1e-12);
};

/// L(theta) = {x : |u0(x)| > theta}, S(theta) = complement (interior nodes).
struct LevelSets {
  double theta = 0.0;
  std::vector<std::uint8_t> L_mask, S_mask;  // per interior node, exclusive
  std::vector<int> boundary_nodes;           // nodes of S adjacent to L
};

std::vector<double> laplacian_apply(const Grid& g, const std::vector<double>& w);

enum class NormKind { l1, l2, h1_semi, sup };
NormKind norm_kind_from(const std::string& name);

double norm(const Grid& g, const std::vector<double>& w, NormKind kind);
double norm(const StateField& f, NormKind kind);

/// Time-stamped slice used by the space-time Hölder seminorm.
struct TimeSlice {
  double t = 0.0;
  std::vector<double> values;
};

/// sup over sampled pairs of |u(t,x) - u(s,y)| / (|t-s| + |x-y|)^alpha,
/// subsampled to at most 10^6 uniform random pairs (fixed seed); exhaustive
/// when the total pair count is below the cap.
double holder_seminorm(const Grid& g, const std::vector<TimeSlice>& slices, double alpha,
                       std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

LevelSets level_sets(const StateField& u0, double theta);

/// min distance between the discrete boundaries of S(theta+delta) and S(theta);
/// +inf when either boundary is empty.
double level_set_separation(const StateField& u0, double theta, double delta);

}  // namespace pmrd
