#include "pmrd/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "pmrd/diagnostics.hpp"
#include "pmrd/io.hpp"

namespace pmrd {

namespace {

using nlohmann::json;

[[noreturn]] void missing(const std::string& path) {
  throw std::invalid_argument("missing required key: " + path);
}

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) missing(path);
  return j.at(key);
}

double need_num(const json& j, const std::string& key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_number()) throw std::invalid_argument("key is not a number: " + path);
  return v.get<double>();
}

double opt_num(const json& j, const std::string& key, double dflt) {
  if (!j.is_object() || !j.contains(key)) return dflt;
  return j.at(key).get<double>();
}

}  // namespace

Scenario parse_scenario(const json& config) {
  Scenario sc;
  sc.raw = config;
  sc.name = config.value("name", std::string("run"));
  sc.seed = config.value("seed", std::uint64_t(1));

  const json& grid = need(config, "grid", "grid");
  sc.dim = int(need_num(grid, "dim", "grid.dim"));
  const json& ext = need(grid, "extents", "grid.extents");
  const json& nn = need(grid, "n", "grid.n");
  sc.extents = ext.get<std::vector<double>>();
  sc.n = nn.get<std::vector<int>>();

  const json& phi = need(config, "phi", "phi");
  sc.phi_kind = need(phi, "kind", "phi.kind").get<std::string>();
  if (sc.phi_kind == "biofilm") {
    sc.phi_a = need_num(phi, "a", "phi.a");
    sc.phi_b = need_num(phi, "b", "phi.b");
  } else if (sc.phi_kind == "power") {
    sc.phi_m = need_num(phi, "m", "phi.m");
  } else {
    throw std::invalid_argument("phi.kind must be 'biofilm' or 'power'");
  }

  if (config.contains("reaction")) {
    const json& rx = config.at("reaction");
    sc.reaction_kind = need(rx, "kind", "reaction.kind").get<std::string>();
    if (sc.reaction_kind == "scalar_decay") {
      sc.lambda = need_num(rx, "lambda", "reaction.lambda");
    } else if (sc.reaction_kind == "monod") {
      sc.K1 = need_num(rx, "K1", "reaction.K1");
      sc.K2 = need_num(rx, "K2", "reaction.K2");
      sc.K3 = need_num(rx, "K3", "reaction.K3");
      sc.K4 = need_num(rx, "K4", "reaction.K4");
      sc.d1 = opt_num(rx, "d1", 1.0);
      sc.d2 = opt_num(rx, "d2", 1.0);
    } else if (sc.reaction_kind != "none") {
      throw std::invalid_argument("reaction.kind must be 'none', 'scalar_decay' or 'monod'");
    }
  }

  sc.u0_spec = need(config, "u0", "u0");
  if (sc.coupled())
    sc.v0_spec = config.contains("v0") ? config.at("v0") : json{{"preset", "const"}, {"value", 1.0}};

  const json& sol = need(config, "solver", "solver");
  sc.solver.dt = need_num(sol, "dt", "solver.dt");
  sc.solver.t_end = need_num(sol, "t_end", "solver.t_end");
  if (sol.contains("R_schedule")) sc.solver.R_schedule = sol.at("R_schedule").get<std::vector<double>>();
  sc.solver.newton_tol = opt_num(sol, "newton_tol", 1e-10);
  sc.solver.newton_max_iter = int(opt_num(sol, "newton_max_iter", 50));
  sc.solver.damping = opt_num(sol, "damping", 0.5);
  if (sol.contains("snapshot_times"))
    sc.solver.snapshot_times = sol.at("snapshot_times").get<std::vector<double>>();
  sc.solver.validate();

  sc.checks = config.value("checks", json::object());

  // construct everything once to surface validation errors at parse time
  Grid g = sc.make_grid();
  sc.make_phi().validate();
  sc.make_reaction().validate();
  (void)g;
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json config;
  try {
    in >> config;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return parse_scenario(config);
}

Grid Scenario::make_grid() const { return build_grid(dim, extents, n); }

PhiSpec Scenario::make_phi() const {
  if (phi_kind == "power") return PhiSpec::power(phi_m);
  return PhiSpec::biofilm(phi_a, phi_b, /*symmetric=*/!coupled());
}

ReactionSpec Scenario::make_reaction() const {
  if (reaction_kind == "scalar_decay") return ReactionSpec::scalar_decay(lambda);
  if (reaction_kind == "monod") return ReactionSpec::monod(K1, K2, K3, K4, d1, d2);
  return ReactionSpec::custom([](double, double) { return 0.0; }, nullptr, 0.0);
}

StateField Scenario::make_u0(const Grid& g) const {
  RangeTag tag = coupled() ? RangeTag::nonneg : RangeTag::signed_open;
  StateField f = StateField::zeros(g, tag);
  if (u0_spec.contains("csv")) {
    Snapshot snap = read_snapshot_csv(u0_spec.at("csv").get<std::string>(), g);
    f.values = snap.u;
    f.enforce_range();
    return f;
  }
  std::string preset = need(u0_spec, "preset", "u0.preset").get<std::string>();
  if (preset == "zero") return f;
  if (preset == "bump") {
    std::vector<double> center = need(u0_spec, "center", "u0.center").get<std::vector<double>>();
    double radius = need_num(u0_spec, "radius", "u0.radius");
    double height = need_num(u0_spec, "height", "u0.height");
    for (int k = 0; k < g.size(); ++k) {
      auto p = g.point(k);
      double r2 = (p[0] - center[0]) * (p[0] - center[0]);
      if (g.dim == 2) r2 += (p[1] - center[1]) * (p[1] - center[1]);
      double s = 1.0 - r2 / (radius * radius);
      f.values[k] = s > 0.0 ? height * s * s : 0.0;
    }
    return f;
  }
  if (preset == "tent") {
    double height = need_num(u0_spec, "height", "u0.height");
    for (int k = 0; k < g.size(); ++k) {
      auto p = g.point(k);
      double v = 1.0 - 2.0 * std::abs(p[0] / g.extent[0] - 0.5);
      if (g.dim == 2) v *= 1.0 - 2.0 * std::abs(p[1] / g.extent[1] - 0.5);
      f.values[k] = height * v;
    }
    return f;
  }
  if (preset == "barenblatt") {
    double m = need_num(u0_spec, "m", "u0.m");
    double mass = need_num(u0_spec, "mass", "u0.mass");
    double t0 = need_num(u0_spec, "t0", "u0.t0");
    for (int k = 0; k < g.size(); ++k) {
      auto p = g.point(k);
      std::array<double, 2> x{p[0] - 0.5 * g.extent[0],
                              g.dim == 2 ? p[1] - 0.5 * g.extent[1] : 0.0};
      f.values[k] = barenblatt_profile(m, mass, g.dim, t0, x);
    }
    return f;
  }
  if (preset == "random") {
    double amplitude = need_num(u0_spec, "amplitude", "u0.amplitude");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const int modes = 6;
    std::vector<double> cx(modes), cy(modes);
    for (int q = 0; q < modes; ++q) {
      cx[q] = U(rng);
      cy[q] = U(rng);
    }
    double peak = 0.0;
    for (int k = 0; k < g.size(); ++k) {
      auto p = g.point(k);
      double v = 0.0;
      for (int q = 0; q < modes; ++q) {
        double s = std::sin((q + 1) * std::acos(-1.0) * p[0] / g.extent[0]);
        if (g.dim == 2) s *= std::sin((q + 1) * std::acos(-1.0) * p[1] / g.extent[1]);
        v += cx[q] * s;
      }
      f.values[k] = v;
      peak = std::max(peak, std::abs(v));
    }
    if (peak > 0.0)
      for (double& v : f.values) v *= amplitude / peak;
    if (tag == RangeTag::nonneg)
      for (double& v : f.values) v = std::abs(v);
    return f;
  }
  throw std::invalid_argument("unknown u0.preset: " + preset);
}

StateField Scenario::make_v0(const Grid& g) const {
  StateField f = StateField::zeros(g, RangeTag::nonneg);
  if (v0_spec.is_null() || !v0_spec.is_object()) return f;
  std::string preset = v0_spec.value("preset", std::string("const"));
  if (preset == "const") {
    double value = v0_spec.value("value", 1.0);
    for (double& v : f.values) v = value;
    return f;
  }
  if (preset == "zero") return f;
  throw std::invalid_argument("unknown v0.preset: " + preset);
}

}  // namespace pmrd
