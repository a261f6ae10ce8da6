#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dobcoord/graph.hpp"
#include "dobcoord/model.hpp"
#include "dobcoord/sim.hpp"
#include "dobcoord/synthesis.hpp"

namespace dobcoord::scenario {

struct SimulationSettings {
  sim::ControlLaw law = sim::ControlLaw::FullOrder;
  double t_end = 30.0;
  double step = 1e-3;
  std::uint64_t seed = 0;
  double error_after = 21.0;
  double convergence_tol = 2e-3;
};

/// Follower plant initial conditions: either one explicit vector per agent
/// or a seeded uniform draw from [-1, 1]^n per agent.
struct InitialSpec {
  bool random = true;
  std::vector<matops::Vector> x;
};

/// A fully bound scenario document.
struct Scenario {
  std::string name;
  std::vector<model::AgentModel> agents;
  std::vector<model::DisturbanceExosystem> disturbances;
  model::LeaderExosystem leader;
  graph::SwitchingSchedule schedule;
  SimulationSettings simulation;
  InitialSpec initials;
  synthesis::GainSpec gain_overrides;
};

/// Parses scenario text. Raises ParseError with a 1-based line/column for
/// syntax errors, unknown keys, missing blocks, and dimension mismatches.
Scenario parse_scenario(std::string_view text);

Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text form; parses back to an identical scenario. Matrices are
/// printed at 17 significant digits so values round-trip exactly.
std::string serialize_scenario(const Scenario& s);

/// Complete gain set as a `gains { ... }` block (same grammar the scenario
/// embeds), exact-decimal round-trip.
std::string serialize_gain_set(const synthesis::GainSet& gains);

/// Parses a standalone gain file: a single `gains { ... }` block.
synthesis::GainSpec parse_gain_file(std::string_view text);

/// Follower initials for a run: the explicit vectors, or a seeded uniform
/// draw from [-1, 1]^n using a platform-independent generator.
std::vector<matops::Vector> draw_initials(const Scenario& s,
                                          std::uint64_t seed);

/// The bundled reference scenario (three mass-damper-spring followers, a
/// harmonic leader, two switching graphs, published gain overrides).
const std::string& paper_example_text();

}  // namespace dobcoord::scenario
