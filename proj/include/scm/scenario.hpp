#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scm/chain_model.hpp"
#include "scm/coordination.hpp"
#include "scm/metrics.hpp"
#include "scm/negotiation.hpp"

namespace scm {

struct AgentConfig {
  AgentId id;
  Tier tier = Tier::Sale;
  std::set<std::string> services;
  /// Static in this version; feeds proposal scoring only.
  double reliability = 1.0;
  /// Ticks between shipping and arrival at the buyer (or, for raw material,
  /// between ordering from the external source and arrival).
  int lead_time = 1;
  double unit_price = 1.0;
  ReplenishmentPolicy policy;
  double initial_stock = 0.0;
  /// Service searched for when procuring; defaults to the upstream tier's service.
  std::string requires_service;
};

struct FailureSpec {
  AgentId kill_agent;
  Tick at_tick = 0;
};

/// Directed transmission delay override; links not listed use the default of 1.
struct LinkDelay {
  AgentId from;
  AgentId to;
  int delay = 1;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  Tick horizon = 0;
  CoordinationMode mode = CoordinationMode::Decentralized;
  std::vector<AgentConfig> agents;
  DemandParams demand;
  ScoreWeights weights;
  int bid_window = 2;
  CostParams costs;
  std::vector<FailureSpec> failures;
  /// Centralized mode only. Defaults to the smallest Production id.
  std::optional<AgentId> coordinator;
  int token_dwell = 5;
  std::vector<LinkDelay> links;

  const AgentConfig* find_agent(const AgentId& id) const;
  AgentId effective_coordinator() const;
};

/// Parses and validates. Throws ParseError for malformed JSON or wrong field types,
/// ValidationError (message starts with the field path) for broken invariants.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Throws ValidationError naming the violated invariant and the field path.
void validate_scenario(const ScenarioConfig& config);

nlohmann::json scenario_to_json(const ScenarioConfig& config);

}  // namespace scm
