#pragma once

// Run configuration: a single JSON document, every key optional except
// "scenario" for the scenario subcommand. Defaults are filled in on load and
// written back into every report.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "informon/algebra.hpp"
#include "informon/dynamics.hpp"
#include "informon/oracle.hpp"

namespace informon::cli {

struct StrategyConfig {
  double t_P = 0.1;
  double l_P = 0.1;
  int dim = 1;
  double mass = 1.0;
  double hbar = 1.0;
  std::optional<double> distance_bound;  // unset: unbounded
  std::optional<std::size_t> max_sources;
  std::size_t rounds_per_generation = 0;
  double band_limit = 0.0;
  std::string coupling = "exclusive";
  std::string boundary = "absorbing";
  /// Lattice half-width; unset: packets' reach (|x0| + 6 sigma0) plus padding.
  std::optional<double> half_width;
  double padding = 2.0;
  int generations = 2;
  double potential = 0.0;  // constant V
  bool full_content = false;
};

/// A packet with the weight and subprocess tag it enters the initial tapestry with.
struct WeightedPacket {
  oracle::PacketSpec packet;
  double weight = 1.0;
  std::string tag = "P";
};

struct GridConfig {
  double lo = -4.0;
  double hi = 4.0;
  std::size_t points = 81;
};

struct RefineConfig {
  std::vector<double> levels{0.2, 0.1, 0.05};
  double t_final = 0.2;
};

struct InitialInformon {
  std::vector<int> coords;
  std::string tag;
  Complex gamma{1.0, 0.0};
  std::string character = "scalar";
  std::string state;
};

struct ProcessConfig {
  std::string expr;
  std::size_t rounds = 1;
  std::size_t cap = 100000;
  std::size_t runs = 1000;
  std::map<std::string, algebra::PrimitiveSpec> primitives;
  algebra::CompatTable compat;
  /// Initial tapestry for algebra runs; empty: sampled from the packets.
  std::vector<InitialInformon> initial;
  /// Primitive ids whose activity marks the "dead" branch (cat scenario).
  std::vector<std::string> dead;
};

struct CheckConfig {
  std::string metric = "Linf";
  double tolerance = 1e-6;
  bool relative = false;
};

struct BoundsConfig {
  oracle::ButzerParams butzer{};
  double psi_max = 1.0;
  double c = 299792458.0;
};

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t rng_seed = 0;
  StrategyConfig strategy;
  std::vector<WeightedPacket> packets;
  GridConfig grid;
  RefineConfig refine;
  ProcessConfig process;
  std::vector<CheckConfig> checks;
  BoundsConfig bounds;
  std::string output_dir = "out";
};

inline const std::vector<std::string> kScenarios{"free_packet", "superposition", "two_slit",
                                                 "entanglement", "cat", "custom"};

/// Fills scenario-specific defaults (packets, process expression, checks).
/// Throws ConfigError on unknown keys, wrong types or invalid values.
ScenarioConfig config_from_json(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& c);

/// Strategy parameters at the configured spacing, with the box derived from
/// the packets when no half-width is given.
dynamics::StrategyParams strategy_params(const ScenarioConfig& c);
/// As above with l_P = t_P = level.
dynamics::StrategyParams strategy_params(const ScenarioConfig& c, double level);

}  // namespace informon::cli
