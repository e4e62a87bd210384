#include <algorithm>

#include "scm/coordination.hpp"

namespace scm {

std::string_view mode_name(CoordinationMode mode) {
  switch (mode) {
    case CoordinationMode::Centralized: return "centralized";
    case CoordinationMode::Decentralized: return "decentralized";
    case CoordinationMode::MobileManaged: return "mobile";
  }
  return "?";
}

std::optional<CoordinationMode> parse_mode(std::string_view name) {
  if (name == "centralized") return CoordinationMode::Centralized;
  if (name == "decentralized") return CoordinationMode::Decentralized;
  if (name == "mobile") return CoordinationMode::MobileManaged;
  return std::nullopt;
}

std::vector<PlannedOrder> centralized_plan(const Directory& directory, const AgentId& coordinator,
                                           std::span<const PlanInput> agents) {
  if (!directory.contains(coordinator)) {
    throw CoordinatorDown("coordinator '" + coordinator.str() + "' is not registered");
  }
  std::vector<PlannedOrder> orders;
  for (const auto& in : agents) {
    const double quantity = compute_order_quantity(in.state, in.policy, in.lead_time);
    if (quantity > 0.0) orders.push_back(PlannedOrder{in.agent, in.supplier, in.item, quantity});
  }
  return orders;
}

std::vector<AclMessage> order_requests(const AgentId& coordinator, const PlannedOrder& order,
                                       const std::string& conversation_id, Tick now) {
  std::vector<AclMessage> out;
  auto send_to = [&](const AgentId& receiver) {
    if (receiver == coordinator) return;
    AclMessage m;
    m.performative = Performative::REQUEST;
    m.sender = coordinator;
    m.receiver = receiver;
    m.conversation_id = conversation_id;
    m.content = OrderRequest{order.item, order.quantity, order.buyer, order.supplier};
    m.sent_at = now;
    out.push_back(std::move(m));
  };
  send_to(order.buyer);
  if (order.supplier && *order.supplier != order.buyer) send_to(*order.supplier);
  return out;
}

std::optional<Procurement> decentralized_procure(const ProcureRequest& request,
                                                 std::span<const AgentDescriptor> candidates) {
  if (!(request.quantity > 0.0)) return std::nullopt;

  std::vector<AgentId> invited;
  for (const auto& c : candidates) {
    if (c.id != request.buyer) invited.push_back(c.id);
  }
  std::sort(invited.begin(), invited.end());
  if (invited.empty()) {
    throw NoSupplierFound("no supplier of '" + request.item + "' for " + request.buyer.str());
  }

  const Tick deadline = request.now + request.bid_window;
  NegotiationState state;
  state.conversation_id = request.conversation_id;
  state.call = CallForBids{request.item, request.quantity,
                           deadline + request.planning_lead_time, request.buyer};
  state.deadline = deadline;
  state.weights = request.weights;
  state.invited = invited;

  Procurement out;
  for (const auto& supplier : invited) {
    AclMessage m;
    m.performative = Performative::CFP;
    m.sender = request.buyer;
    m.receiver = supplier;
    m.conversation_id = request.conversation_id;
    m.content = state.call;
    m.reply_by = deadline;
    m.sent_at = request.now;
    out.calls.push_back(std::move(m));
  }
  out.negotiation = information_update(std::move(state), CallDispatched{});
  return out;
}

AgentId next_holder(const Directory& directory, const AgentId& after) {
  if (directory.empty()) throw NoEligibleHolder("no registered agent can hold the token");
  const auto& entries = directory.entries();
  auto it = entries.upper_bound(after);
  if (it == entries.end()) it = entries.begin();
  return it->first;
}

ManagementToken transfer_token(const ManagementToken& token, const Directory& directory,
                               Tick now) {
  if (now - token.acquired_at < token.dwell) {
    throw std::invalid_argument("token transfer before dwell elapsed");
  }
  return ManagementToken{next_holder(directory, token.holder), now, token.dwell};
}

std::optional<ManagementToken> maintain_token(const ManagementToken& token,
                                              const Directory& directory, Tick now) {
  if (!directory.contains(token.holder)) {
    return ManagementToken{next_holder(directory, token.holder), now, token.dwell};
  }
  if (now - token.acquired_at >= token.dwell) return transfer_token(token, directory, now);
  return std::nullopt;
}

}  // namespace scm
