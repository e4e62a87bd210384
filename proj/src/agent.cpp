#include <algorithm>

#include <fmt/format.h>

#include "scm/simulation.hpp"

namespace scm {

using nlohmann::json;

namespace {

json optional_id(const std::optional<AgentId>& id) {
  return id ? json(id->str()) : json(nullptr);
}

}  // namespace

ChainAgent::ChainAgent(AgentConfig config, SimSettings settings)
    : config_(std::move(config)), settings_(std::move(settings)) {
  state_.stock_level = config_.initial_stock;
}

double ChainAgent::pending_procurement() const {
  double pending = 0.0;
  for (const auto& [_, n] : negotiations_) {
    if (n.phase == NegotiationPhase::CFP_SENT || n.phase == NegotiationPhase::COLLECTING) {
      pending += n.call.quantity;
    }
  }
  return pending;
}

double ChainAgent::pipeline_books() const {
  double total = state_.scheduled_quantity();
  for (const auto& o : open_orders_) total += o.remaining;
  return total;
}

void ChainAgent::begin_tick() {
  order_placed_ = 0.0;
  new_orders_ = 0.0;
}

void ChainAgent::take_turn(TurnContext& ctx, std::span<const AclMessage> mailbox) {
  reconcile(ctx);
  for (const auto& message : mailbox) handle(ctx, message);
  close_due_negotiations(ctx);
  if (ctx.token_acquired_at()) broadcast_health(ctx);

  if (settings_.mode == CoordinationMode::Centralized) {
    if (config_.id == settings_.coordinator) plan_centrally(ctx);
  } else {
    procure(ctx);
  }
}

// Counterparts that left the directory will never ship or pay: write their
// remaining quantities off so the inventory position stays honest.
void ChainAgent::reconcile(TurnContext& ctx) {
  const auto& directory = ctx.directory();
  std::erase_if(open_orders_, [&](const OpenOrder& o) {
    if (!o.seller || directory.contains(*o.seller)) return false;
    state_.on_order = std::max(0.0, state_.on_order - o.remaining);
    ctx.record("deal_written_off", {{"conversation", o.conversation_id},
                                    {"seller", o.seller->str()},
                                    {"quantity", o.remaining}});
    return true;
  });
  std::erase_if(order_book_, [&](const OrderLine& line) {
    if (directory.contains(line.buyer)) return false;
    state_.backlog = std::max(0.0, state_.backlog - line.remaining);
    ctx.record("order_cancelled", {{"conversation", line.conversation_id},
                                   {"buyer", line.buyer.str()},
                                   {"quantity", line.remaining}});
    return true;
  });
  if (order_book_.empty() && config_.tier != Tier::Sale) state_.backlog = 0.0;
}

void ChainAgent::handle(TurnContext& ctx, const AclMessage& message) {
  switch (message.performative) {
    case Performative::CFP:
      handle_call(ctx, message, std::get<CallForBids>(message.content));
      break;
    case Performative::PROPOSE:
      handle_proposal(ctx, message);
      break;
    case Performative::ACCEPT_PROPOSAL:
      book_sale(message.sender, message.conversation_id,
                std::get<Award>(message.content).quantity);
      break;
    case Performative::REQUEST:
      handle_request(ctx, message, std::get<OrderRequest>(message.content));
      break;
    case Performative::INFORM:
      handle_status(ctx, message, std::get<StatusInfo>(message.content));
      break;
    case Performative::REJECT_PROPOSAL:
    case Performative::CONFIRM:
    case Performative::FAILURE:
      break;
  }
}

bool ChainAgent::supplies(const std::string& item) const {
  return std::any_of(config_.services.begin(), config_.services.end(),
                     [&](const std::string& s) { return item_for_service(s) == item; });
}

void ChainAgent::handle_call(TurnContext& ctx, const AclMessage& message,
                             const CallForBids& call) {
  if (is_expired(message, ctx.now()) || !supplies(call.item)) return;
  AclMessage bid;
  bid.performative = Performative::PROPOSE;
  bid.sender = config_.id;
  bid.receiver = message.sender;
  bid.conversation_id = message.conversation_id;
  bid.content = Proposal{config_.id,        call.item,           call.quantity,
                         config_.unit_price, config_.lead_time, config_.reliability};
  bid.sent_at = ctx.now();
  ctx.send(std::move(bid));
}

void ChainAgent::handle_proposal(TurnContext& ctx, const AclMessage& message) {
  const auto& proposal = std::get<Proposal>(message.content);
  auto it = negotiations_.find(message.conversation_id);
  if (it == negotiations_.end()) {
    ctx.record("proposal_rejected", {{"conversation", message.conversation_id},
                                     {"bidder", proposal.bidder.str()},
                                     {"reason", "unknown_conversation"}});
    return;
  }
  if (auto conv = conversations_.find(message.conversation_id); conv != conversations_.end()) {
    conv->second.record(message);
  }

  const auto admission = suggestion_check(message, it->second, ctx.now());
  if (const auto* reject = std::get_if<Reject>(&admission)) {
    ctx.record("proposal_rejected", {{"conversation", message.conversation_id},
                                     {"bidder", proposal.bidder.str()},
                                     {"reason", std::string(reject_reason_name(reject->reason))},
                                     {"deadline", it->second.deadline},
                                     {"phase", std::string(phase_name(it->second.phase))}});
    return;
  }
  it->second = information_update(std::move(it->second), ProposalAdmitted{proposal});
  ctx.record("proposal_admitted", {{"conversation", message.conversation_id},
                                   {"bidder", proposal.bidder.str()},
                                   {"deadline", it->second.deadline}});
}

void ChainAgent::handle_request(TurnContext& ctx, const AclMessage& message,
                                const OrderRequest& request) {
  if (request.buyer == config_.id) {
    book_purchase(ctx, message.conversation_id, request.supplier, request.quantity);
  } else if (request.supplier && *request.supplier == config_.id) {
    book_sale(request.buyer, message.conversation_id, request.quantity);
  }
}

void ChainAgent::handle_status(TurnContext& ctx, const AclMessage& message,
                               const StatusInfo& info) {
  if (info.topic == "chain_health") {
    if (!ctx.directory().contains(message.sender)) return;
    AclMessage report;
    report.performative = Performative::INFORM;
    report.sender = config_.id;
    report.receiver = message.sender;
    report.conversation_id = message.conversation_id;
    report.content = StatusInfo{"stock_report", {{config_.id.str(), state_.stock_level}}};
    report.sent_at = ctx.now();
    ctx.send(std::move(report));
  } else if (info.topic == "stock_report") {
    for (const auto& [name, stock] : info.stock) {
      if (!name.empty()) peer_reports_[AgentId(name)] = stock;
    }
  }
}

void ChainAgent::close_due_negotiations(TurnContext& ctx) {
  const Tick now = ctx.now();
  for (auto& [conversation_id, negotiation] : negotiations_) {
    if (negotiation.phase != NegotiationPhase::COLLECTING || now < negotiation.deadline) continue;

    negotiation = information_update(std::move(negotiation), DeadlineReached{});
    auto conv = conversations_.find(conversation_id);
    if (negotiation.phase == NegotiationPhase::FAILED) {
      if (conv != conversations_.end()) conv->second.close(ConversationState::Failed);
      ctx.record("negotiation_failed", {{"conversation", conversation_id},
                                        {"reason", "no_proposals"},
                                        {"quantity", negotiation.call.quantity}});
      continue;
    }

    auto settlement = clarify_and_settle(negotiation, ledger_, now);
    negotiation = std::move(settlement.state);
    ledger_ = std::move(settlement.ledger);
    for (auto& m : settlement.messages) {
      if (conv != conversations_.end()) conv->second.record(m);
      ctx.send(std::move(m));
    }
    if (conv != conversations_.end()) conv->second.close(ConversationState::Completed);

    const auto& deal = settlement.deal;
    supplier_lead_estimate_ = static_cast<int>(deal.promised_delivery - now);
    book_purchase(ctx, conversation_id, deal.seller, deal.quantity);
    ctx.record("negotiation_settled", {{"conversation", conversation_id},
                                       {"seller", deal.seller.str()},
                                       {"quantity", deal.quantity},
                                       {"unit_price", deal.unit_price},
                                       {"value", deal.value()},
                                       {"promised_delivery", deal.promised_delivery},
                                       {"proposals", negotiation.received.size()},
                                       {"deadline", negotiation.deadline}});
    ctx.record("order_placed", {{"conversation", conversation_id},
                                {"buyer", config_.id.str()},
                                {"supplier", deal.seller.str()},
                                {"quantity", deal.quantity}});
  }
}

void ChainAgent::broadcast_health(TurnContext& ctx) {
  const Tick acquired = *ctx.token_acquired_at();
  if (last_broadcast_ == acquired) return;
  last_broadcast_ = acquired;

  StatusInfo summary{"chain_health", {}};
  for (const auto& [peer, stock] : peer_reports_) summary.stock[peer.str()] = stock;
  summary.stock[config_.id.str()] = state_.stock_level;

  const auto conversation_id = fmt::format("health:{}:{}", config_.id.str(), acquired);
  std::size_t recipients = 0;
  for (const auto& peer : ctx.directory().ids()) {
    if (peer == config_.id) continue;
    AclMessage m;
    m.performative = Performative::INFORM;
    m.sender = config_.id;
    m.receiver = peer;
    m.conversation_id = conversation_id;
    m.content = summary;
    m.sent_at = ctx.now();
    ctx.send(std::move(m));
    ++recipients;
  }
  ctx.record("chain_health", {{"conversation", conversation_id}, {"recipients", recipients}});
}

int ChainAgent::planning_lead_time(int supplier_lead_time) const {
  // Ticks from the ordering decision until goods arrive.
  if (settings_.mode == CoordinationMode::Centralized) return 1 + supplier_lead_time;
  return settings_.bid_window + 1 + supplier_lead_time;
}

std::string ChainAgent::next_conversation_id() {
  return fmt::format("{}#{}", config_.id.str(), ++conversation_seq_);
}

void ChainAgent::procure(TurnContext& ctx) {
  if (config_.tier == Tier::RawMaterial) {
    const double quantity = compute_order_quantity(state_, config_.policy, config_.lead_time);
    if (quantity <= 0.0) return;
    const auto conversation_id = next_conversation_id();
    book_purchase(ctx, conversation_id, std::nullopt, quantity);
    ctx.record("order_placed", {{"conversation", conversation_id},
                                {"buyer", config_.id.str()},
                                {"supplier", nullptr},
                                {"quantity", quantity}});
    return;
  }

  ChainAgentState position = state_;
  position.on_order += pending_procurement();
  const double quantity = compute_order_quantity(
      position, config_.policy, planning_lead_time(supplier_lead_estimate_));
  if (quantity <= 0.0) return;

  ProcureRequest request{config_.id,
                         item_for_service(config_.requires_service),
                         quantity,
                         ctx.now(),
                         settings_.bid_window,
                         supplier_lead_estimate_,
                         next_conversation_id(),
                         settings_.weights};
  const auto candidates = ctx.directory().search(config_.requires_service);
  std::optional<Procurement> procurement;
  try {
    procurement = decentralized_procure(request, candidates);
  } catch (const NoSupplierFound&) {
    ctx.record("negotiation_failed", {{"conversation", request.conversation_id},
                                      {"reason", "no_supplier"},
                                      {"quantity", quantity}});
    return;
  }

  Conversation conversation(request.conversation_id, config_.id);
  json invited = json::array();
  for (auto& call : procurement->calls) {
    invited.push_back(call.receiver.str());
    conversation.record(call);
    ctx.send(std::move(call));
  }
  conversations_.emplace(request.conversation_id, std::move(conversation));
  ctx.record("negotiation_opened", {{"conversation", request.conversation_id},
                                    {"quantity", quantity},
                                    {"deadline", procurement->negotiation.deadline},
                                    {"invited", invited}});
  negotiations_.emplace(request.conversation_id, std::move(procurement->negotiation));
}

void ChainAgent::plan_centrally(TurnContext& ctx) {
  const ChainView* view = ctx.chain_view();
  if (view == nullptr) return;
  const auto entries = view->agents();
  std::map<AgentId, const ChainView::Entry*> by_id;
  for (const auto& e : entries) by_id.emplace(e.config->id, &e);

  std::vector<PlanInput> inputs;
  for (const auto& e : entries) {
    const AgentConfig& cfg = *e.config;
    PlanInput in;
    in.agent = cfg.id;
    in.state = *e.state;
    // Orders issued but not yet booked by the buyer are still in transit as messages.
    in.state.on_order += issued_[cfg.id] - e.ordered_total;
    in.policy = cfg.policy;

    if (cfg.tier == Tier::RawMaterial) {
      in.item = item_for_service(supply_service(cfg.tier));
      in.lead_time = planning_lead_time(cfg.lead_time);
      if (cfg.id == config_.id) in.lead_time = cfg.lead_time;
    } else {
      std::vector<Proposal> offers;
      in.item = item_for_service(cfg.requires_service);
      for (const auto& d : ctx.directory().search(cfg.requires_service)) {
        auto found = by_id.find(d.id);
        if (d.id == cfg.id || found == by_id.end()) continue;
        const AgentConfig& s = *found->second->config;
        offers.push_back(Proposal{s.id, in.item, 1.0, s.unit_price, s.lead_time, s.reliability});
      }
      if (offers.empty()) {
        ctx.record("no_supplier", {{"buyer", cfg.id.str()}, {"service", cfg.requires_service}});
        continue;
      }
      const auto& best = select_best(offers, settings_.weights);
      in.supplier = best.bidder;
      in.lead_time = planning_lead_time(best.lead_time);
    }
    inputs.push_back(std::move(in));
  }

  for (const auto& order : centralized_plan(ctx.directory(), config_.id, inputs)) {
    const auto conversation_id = next_conversation_id();
    issued_[order.buyer] += order.quantity;
    ctx.record("order_placed", {{"conversation", conversation_id},
                                {"buyer", order.buyer.str()},
                                {"supplier", optional_id(order.supplier)},
                                {"quantity", order.quantity}});
    for (auto& m : order_requests(config_.id, order, conversation_id, ctx.now())) {
      ctx.send(std::move(m));
    }
    if (order.buyer == config_.id) {
      book_purchase(ctx, conversation_id, order.supplier, order.quantity);
    } else if (order.supplier && *order.supplier == config_.id) {
      book_sale(order.buyer, conversation_id, order.quantity);
    }
  }
}

void ChainAgent::book_purchase(TurnContext& ctx, const std::string& conversation_id,
                               const std::optional<AgentId>& seller, double quantity) {
  ordered_total_ += quantity;
  order_placed_ += quantity;
  state_.on_order += quantity;
  if (seller) {
    open_orders_.push_back(OpenOrder{conversation_id, seller, quantity});
  } else {
    state_.schedule_delivery(ctx.now() + config_.lead_time, quantity);
  }
}

void ChainAgent::book_sale(const AgentId& buyer, const std::string& conversation_id,
                           double quantity) {
  order_book_.push_back(OrderLine{buyer, conversation_id, quantity});
  new_orders_ += quantity;
}

PhysicsOutcome ChainAgent::physics_step(Tick now, double external_demand) {
  PhysicsOutcome out;
  out.stock_before = state_.stock_level;

  auto pipeline = advance_pipeline(std::move(state_), now);
  out.arrivals = pipeline.arrivals;

  out.demand = config_.tier == Tier::Sale ? external_demand : new_orders_;
  auto fulfilled = fulfill_demand(std::move(pipeline.state), out.demand, now);
  state_ = std::move(fulfilled.state);
  out.shipped = fulfilled.shipped;
  out.shipped_on_time = fulfilled.shipped_on_time;
  state_.demand_expectation = forecast_demand(state_.sale_history, config_.policy.window);

  if (config_.tier == Tier::Sale) return out;

  double left = out.shipped;
  auto line = order_book_.begin();
  while (left > 0.0 && line != order_book_.end()) {
    const double amount = std::min(line->remaining, left);
    out.shipments.push_back(Shipment{line->buyer, line->conversation_id, amount});
    line->remaining -= amount;
    left -= amount;
    if (line->remaining > 0.0) break;
    ++line;
  }
  order_book_.erase(order_book_.begin(), line);
  if (state_.backlog == 0.0) order_book_.clear();
  return out;
}

void ChainAgent::receive_shipment(const std::string& conversation_id, double quantity,
                                  Tick arrival_tick) {
  state_.schedule_delivery(arrival_tick, quantity);
  auto it = std::find_if(open_orders_.begin(), open_orders_.end(),
                         [&](const OpenOrder& o) { return o.conversation_id == conversation_id; });
  if (it == open_orders_.end()) return;
  it->remaining -= quantity;
  if (it->remaining <= 1e-9) {
    // Rounding residue of a fully shipped order.
    state_.on_order -= it->remaining;
    open_orders_.erase(it);
  }
}

}  // namespace scm
