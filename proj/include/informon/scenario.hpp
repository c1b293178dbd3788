#pragma once

// Subcommand drivers. Each writes its CSV/JSON artifacts under the configured
// output directory and returns the report it also writes to disk.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "informon/config.hpp"

namespace informon::cli {

enum ExitCode : int {
  kPass = 0,
  kUnexpected = 1,
  kNumericalFail = 2,
  kConfigInvalid = 3,
  kCapExceeded = 4,
};

struct RunReport {
  nlohmann::json report;
  int exit_code = kPass;
  std::vector<std::string> files;  // relative to the output directory
};

/// Maps an exception escaping a driver onto the documented exit codes.
int exit_code_for(const std::exception& e);

/// Initial tapestry at generation 0 holding weight * packet(t = 0) for every
/// configured packet, one subprocess tag per packet.
CausalTapestry packet_tapestry(const ScenarioConfig& c, const dynamics::StrategyParams& params);
/// Exact reference: weighted sum of the packets, with the lattice's constant phase.
oracle::Reference packet_reference(const ScenarioConfig& c, const dynamics::StrategyParams& params);
/// Initial tapestry from process.initial, falling back to the packets.
CausalTapestry process_tapestry(const ScenarioConfig& c, const dynamics::StrategyParams& params);
/// Parses process.expr and binds the configured primitive attributes.
algebra::Expr process_expr(const ScenarioConfig& c);

RunReport run_evolve(const ScenarioConfig& c);
RunReport run_reconstruct(const ScenarioConfig& c);
RunReport run_pcm(const ScenarioConfig& c);
RunReport run_bounds(const ScenarioConfig& c);
RunReport run_parse(const std::string& text);
/// Dispatches on c.scenario.
RunReport run_scenario(const ScenarioConfig& c);

}  // namespace informon::cli
