#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scm/acl.hpp"
#include "scm/chain_model.hpp"
#include "scm/negotiation.hpp"
#include "scm/runtime.hpp"

namespace scm {

enum class CoordinationMode { Centralized, Decentralized, MobileManaged };

/// "centralized", "decentralized", "mobile".
std::string_view mode_name(CoordinationMode mode);
std::optional<CoordinationMode> parse_mode(std::string_view name);

// Centralized control ---------------------------------------------------------------

/// What the coordinator knows about one agent when planning.
struct PlanInput {
  AgentId agent;
  ChainAgentState state;
  ReplenishmentPolicy policy;
  int lead_time = 1;
  std::string item;
  /// Chosen supplier; nullopt for the external raw-material source.
  std::optional<AgentId> supplier;
};

struct PlannedOrder {
  AgentId buyer;
  std::optional<AgentId> supplier;
  std::string item;
  double quantity = 0.0;
};

/// Runs compute_order_quantity for every agent and keeps the positive orders, in
/// input order. Throws CoordinatorDown if the coordinator is not registered.
std::vector<PlannedOrder> centralized_plan(const Directory& directory, const AgentId& coordinator,
                                           std::span<const PlanInput> agents);

/// REQUEST messages that carry one planned order to its buyer and its supplier.
/// Parties equal to the coordinator are skipped: it applies those itself.
std::vector<AclMessage> order_requests(const AgentId& coordinator, const PlannedOrder& order,
                                       const std::string& conversation_id, Tick now);

// Decentralized procurement ---------------------------------------------------------

struct ProcureRequest {
  AgentId buyer;
  std::string item;
  double quantity = 0.0;
  Tick now = 0;
  int bid_window = 1;
  int planning_lead_time = 1;
  std::string conversation_id;
  ScoreWeights weights;
};

struct Procurement {
  /// Already moved to COLLECTING.
  NegotiationState negotiation;
  /// One CFP per candidate, identical content, ascending supplier id.
  std::vector<AclMessage> calls;
};

/// Opens a contract-net round with every candidate except the buyer itself.
/// nullopt for a non-positive quantity; throws NoSupplierFound when nobody is left.
std::optional<Procurement> decentralized_procure(const ProcureRequest& request,
                                                 std::span<const AgentDescriptor> candidates);

// Mobile management role ---------------------------------------------------------------

struct ManagementToken {
  AgentId holder;
  Tick acquired_at = 0;
  int dwell = 1;
  friend bool operator==(const ManagementToken&, const ManagementToken&) = default;
};

/// First registered id after `after` in ascending cyclic order (`after` itself
/// need not be registered). Throws NoEligibleHolder on an empty directory.
AgentId next_holder(const Directory& directory, const AgentId& after);

/// Hands the token on once dwell has elapsed; throws std::invalid_argument before.
ManagementToken transfer_token(const ManagementToken& token, const Directory& directory, Tick now);

/// Per-tick upkeep: transfer when the dwell has elapsed or the holder is gone.
/// Returns the new token if it moved.
std::optional<ManagementToken> maintain_token(const ManagementToken& token,
                                              const Directory& directory, Tick now);

}  // namespace scm
