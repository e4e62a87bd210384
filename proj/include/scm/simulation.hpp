#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scm/acl.hpp"
#include "scm/chain_model.hpp"
#include "scm/coordination.hpp"
#include "scm/metrics.hpp"
#include "scm/negotiation.hpp"
#include "scm/runtime.hpp"
#include "scm/scenario.hpp"

namespace scm {

/// Read-only view of every live agent. Only the coordinator in Centralized mode is
/// ever handed one.
class ChainView {
public:
  struct Entry {
    const AgentConfig* config;
    const ChainAgentState* state;
    /// Cumulative quantity this agent has booked as a buyer.
    double ordered_total;
  };

  virtual ~ChainView() = default;
  /// Ascending by id.
  virtual std::vector<Entry> agents() const = 0;
};

/// Everything an agent may touch during its turn: its mailbox (passed separately),
/// the directory, an outbox, and the event log. No other agent's state is reachable.
class TurnContext {
public:
  virtual ~TurnContext() = default;

  virtual Tick now() const = 0;
  virtual const Directory& directory() const = 0;
  virtual void send(AclMessage message) = 0;
  virtual void record(std::string kind, nlohmann::json payload) = 0;
  /// Tick at which this agent acquired the management token, if it holds it.
  virtual std::optional<Tick> token_acquired_at() const = 0;
  /// Non-null only for the Centralized-mode coordinator.
  virtual const ChainView* chain_view() = 0;
};

struct SimSettings {
  CoordinationMode mode = CoordinationMode::Decentralized;
  ScoreWeights weights;
  int bid_window = 2;
  AgentId coordinator;
};

struct Shipment {
  AgentId buyer;
  std::string conversation_id;
  double quantity = 0.0;
};

struct PhysicsOutcome {
  double stock_before = 0.0;
  double arrivals = 0.0;
  double demand = 0.0;
  double shipped = 0.0;
  double shipped_on_time = 0.0;
  std::vector<Shipment> shipments;
};

/// One supply-chain tier member: buyer toward its upstream, seller toward its
/// downstream, and (in Centralized mode) possibly the coordinator.
class ChainAgent {
public:
  ChainAgent(AgentConfig config, SimSettings settings);

  const AgentConfig& config() const noexcept { return config_; }
  const AgentId& id() const noexcept { return config_.id; }
  const ChainAgentState& state() const noexcept { return state_; }
  const DealLedger& ledger() const noexcept { return ledger_; }
  const std::map<std::string, NegotiationState>& negotiations() const noexcept {
    return negotiations_;
  }
  const std::map<std::string, Conversation>& conversations() const noexcept {
    return conversations_;
  }
  double ordered_total() const noexcept { return ordered_total_; }
  double order_placed_this_tick() const noexcept { return order_placed_; }
  /// Quantity on open negotiations not yet awarded.
  double pending_procurement() const;
  /// Scheduled deliveries plus unshipped remainder of open orders.
  double pipeline_books() const;
  const std::map<AgentId, double>& peer_reports() const noexcept { return peer_reports_; }

  void begin_tick();

  /// Message-processing phase.
  void take_turn(TurnContext& ctx, std::span<const AclMessage> mailbox);

  /// Physics phase: arrivals, demand, FIFO shipping against the order book.
  /// `external_demand` is only used by Sale agents.
  PhysicsOutcome physics_step(Tick now, double external_demand);

  /// A supplier shipped `quantity` toward this agent under `conversation_id`.
  void receive_shipment(const std::string& conversation_id, double quantity, Tick arrival_tick);

private:
  struct OpenOrder {
    std::string conversation_id;
    std::optional<AgentId> seller;
    double remaining = 0.0;
  };
  struct OrderLine {
    AgentId buyer;
    std::string conversation_id;
    double remaining = 0.0;
  };

  void reconcile(TurnContext& ctx);
  void handle(TurnContext& ctx, const AclMessage& message);
  void handle_call(TurnContext& ctx, const AclMessage& message, const CallForBids& call);
  void handle_proposal(TurnContext& ctx, const AclMessage& message);
  void handle_request(TurnContext& ctx, const AclMessage& message, const OrderRequest& request);
  void handle_status(TurnContext& ctx, const AclMessage& message, const StatusInfo& info);
  void close_due_negotiations(TurnContext& ctx);
  void broadcast_health(TurnContext& ctx);
  void procure(TurnContext& ctx);
  void plan_centrally(TurnContext& ctx);
  void book_purchase(TurnContext& ctx, const std::string& conversation_id,
                     const std::optional<AgentId>& seller, double quantity);
  void book_sale(const AgentId& buyer, const std::string& conversation_id, double quantity);
  int planning_lead_time(int supplier_lead_time) const;
  bool supplies(const std::string& item) const;
  std::string next_conversation_id();

  AgentConfig config_;
  SimSettings settings_;
  ChainAgentState state_;

  // Buyer side.
  std::map<std::string, NegotiationState> negotiations_;
  std::map<std::string, Conversation> conversations_;
  DealLedger ledger_;
  std::vector<OpenOrder> open_orders_;
  double ordered_total_ = 0.0;
  int supplier_lead_estimate_ = 1;
  std::uint64_t conversation_seq_ = 0;

  // Seller side, FIFO.
  std::vector<OrderLine> order_book_;

  // Coordinator side: cumulative quantity issued per buyer.
  std::map<AgentId, double> issued_;

  // Mobile management.
  std::map<AgentId, double> peer_reports_;
  std::optional<Tick> last_broadcast_;

  double order_placed_ = 0.0;
  double new_orders_ = 0.0;
};

struct TokenSample {
  Tick tick = 0;
  std::size_t tokens = 0;
  std::optional<AgentId> holder;
};

/// Owns every agent, the directory, the message network and the clock, and drives
/// them one tick at a time.
class World {
public:
  explicit World(ScenarioConfig config);
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  /// Phases: scheduled kills, delivery, agent turns (ascending id), physics and
  /// token upkeep, snapshots, clock advance. Throws HorizonExceeded when done.
  void run_tick();
  void run_to_horizon();

  /// Deregisters the agent and discards messages queued to or from it.
  void kill(const AgentId& id);

  bool done() const noexcept { return clock_.done(); }
  Tick tick() const noexcept { return clock_.tick(); }
  const ScenarioConfig& config() const noexcept { return config_; }
  const Directory& directory() const noexcept { return directory_; }
  const EventLog& log() const noexcept { return log_; }
  EventLog& mutable_log() noexcept { return log_; }
  const std::vector<AgentSnapshot>& snapshots() const noexcept { return snapshots_; }
  const std::vector<TokenSample>& token_samples() const noexcept { return token_samples_; }
  const std::optional<ManagementToken>& token() const noexcept { return token_; }
  /// Number of times any agent obtained the global view.
  std::size_t chain_view_reads() const noexcept { return chain_view_reads_; }

  /// Live or killed agent; nullptr if unknown.
  const ChainAgent* agent(const AgentId& id) const;
  /// Every deal from every agent's ledger, ordered by (settled_at, conversation_id).
  std::vector<Deal> deals() const;

  /// Messages waiting for delivery at `tick`.
  std::vector<AclMessage> in_flight_at(Tick tick) const;
  /// Messages delivered this tick, as seen by `id` during its turn.
  const std::vector<AclMessage>& last_mailbox(const AgentId& id) const;

private:
  class Context;
  class View;

  int link_delay(const AgentId& from, const AgentId& to) const;
  void deliver(Tick now);
  void physics(Tick now);
  void sample(Tick now);

  ScenarioConfig config_;
  SimSettings settings_;
  SimClock clock_;
  Directory directory_;
  EventLog log_;
  std::map<AgentId, std::unique_ptr<ChainAgent>> live_;
  std::map<AgentId, std::unique_ptr<ChainAgent>> dead_;
  std::map<AgentId, DemandProcess> demand_;
  std::map<AgentId, std::vector<AclMessage>> mailboxes_;
  std::map<Tick, std::vector<AclMessage>> in_flight_;
  std::map<std::pair<AgentId, AgentId>, int> delays_;
  std::map<AgentId, std::int64_t> sent_this_tick_;
  std::map<AgentId, PhysicsOutcome> physics_this_tick_;
  std::optional<ManagementToken> token_;
  std::vector<AgentSnapshot> snapshots_;
  std::vector<TokenSample> token_samples_;
  std::size_t chain_view_reads_ = 0;
};

struct RunResult {
  ScenarioConfig config;
  EventLog log;
  std::vector<AgentSnapshot> snapshots;
  std::vector<Deal> deals;
  std::vector<TokenSample> token_samples;
  MetricsReport report;
  std::size_t chain_view_reads = 0;
  /// Set when a runtime error stopped the run early; the log then ends with a
  /// run_aborted marker.
  std::optional<std::string> aborted;
};

RunResult simulate(const ScenarioConfig& config);

}  // namespace scm
