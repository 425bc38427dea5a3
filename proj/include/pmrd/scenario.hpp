#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "pmrd/grid.hpp"
#include "pmrd/nonlinearity.hpp"
#include "pmrd/solver.hpp"

namespace pmrd {

/// One fully specified run: domain, nonlinearity, reaction, initial data,
/// solver settings and check parameters, parsed from a JSON config.
struct Scenario {
  std::string name = "run";
  std::uint64_t seed = 1;
  nlohmann::json raw;  // normalized config as parsed (persisted verbatim)

  // grid
  int dim = 1;
  std::vector<double> extents{1.0};
  std::vector<int> n{100};

  // nonlinearity
  std::string phi_kind = "biofilm";  // biofilm | power
  double phi_a = 1.0, phi_b = 1.0, phi_m = 2.0;

  // reaction
  std::string reaction_kind = "none";  // none | scalar_decay | monod
  double lambda = 0.0;
  double K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 1.0, d1 = 1.0, d2 = 1.0;

  // initial data
  nlohmann::json u0_spec;  // preset object or {"csv": path}
  nlohmann::json v0_spec;  // coupled runs only

  SolverConfig solver;
  nlohmann::json checks;  // optional parameters for named checks

  bool coupled() const { return reaction_kind == "monod"; }

  Grid make_grid() const;
  PhiSpec make_phi() const;
  ReactionSpec make_reaction() const;
  StateField make_u0(const Grid& g) const;
  StateField make_v0(const Grid& g) const;
};

/// Parses and validates a config document. Missing or ill-typed keys raise
/// std::invalid_argument naming the dotted key path (e.g. "solver.dt").
Scenario parse_scenario(const nlohmann::json& config);
Scenario load_scenario(const std::string& path);

}  // namespace pmrd
