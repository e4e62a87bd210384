#include <algorithm>

#include "scm/simulation.hpp"

namespace scm {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

class World::View final : public ChainView {
public:
  explicit View(const World& world) : world_(world) {}

  std::vector<Entry> agents() const override {
    std::vector<Entry> out;
    for (const auto& [id, agent] : world_.live_) {
      out.push_back(Entry{&agent->config(), &agent->state(), agent->ordered_total()});
    }
    return out;
  }

private:
  const World& world_;
};

class World::Context final : public TurnContext {
public:
  Context(World& world, const AgentId& self) : world_(world), self_(self), view_(world) {}

  Tick now() const override { return world_.clock_.tick(); }
  const Directory& directory() const override { return world_.directory_; }

  void send(AclMessage message) override {
    validate(message);
    const Tick now = world_.clock_.tick();
    const Tick deliver_at = now + world_.link_delay(message.sender, message.receiver);
    world_.log_.append(now, "message_sent", message.sender.str(), to_json(message));
    ++world_.sent_this_tick_[message.sender];
    world_.in_flight_[deliver_at].push_back(std::move(message));
  }

  void record(std::string kind, json payload) override {
    world_.log_.append(world_.clock_.tick(), std::move(kind), self_.str(), std::move(payload));
  }

  std::optional<Tick> token_acquired_at() const override {
    if (world_.token_ && world_.token_->holder == self_) return world_.token_->acquired_at;
    return std::nullopt;
  }

  const ChainView* chain_view() override {
    if (world_.settings_.mode != CoordinationMode::Centralized ||
        self_ != world_.settings_.coordinator) {
      return nullptr;
    }
    ++world_.chain_view_reads_;
    return &view_;
  }

private:
  World& world_;
  const AgentId& self_;
  View view_;
};

World::World(ScenarioConfig config)
    : config_(std::move(config)), clock_(config_.horizon) {
  validate_scenario(config_);
  settings_.mode = config_.mode;
  settings_.weights = config_.weights;
  settings_.bid_window = config_.bid_window;
  settings_.coordinator = config_.effective_coordinator();

  for (const auto& agent : config_.agents) {
    directory_.register_agent(AgentDescriptor{agent.id, agent.tier, agent.services});
    live_.emplace(agent.id, std::make_unique<ChainAgent>(agent, settings_));
  }
  std::uint64_t stream = 0;
  for (const auto& [id, agent] : live_) {
    if (agent->config().tier == Tier::Sale) {
      demand_.emplace(id, DemandProcess(config_.demand, splitmix64(config_.seed + stream++)));
    }
  }
  for (const auto& link : config_.links) delays_[{link.from, link.to}] = link.delay;

  if (config_.mode == CoordinationMode::MobileManaged) {
    token_ = ManagementToken{directory_.ids().front(), 0, config_.token_dwell};
    log_.append(0, "token_transfer", token_->holder.str(),
                {{"from", nullptr}, {"to", token_->holder.str()}});
  }
}

World::~World() = default;

int World::link_delay(const AgentId& from, const AgentId& to) const {
  auto it = delays_.find({from, to});
  return it == delays_.end() ? 1 : it->second;
}

void World::kill(const AgentId& id) {
  auto it = live_.find(id);
  if (it == live_.end()) return;
  const Tick now = clock_.tick();

  directory_.deregister(id);
  mailboxes_.erase(id);
  std::size_t dropped = 0;
  for (auto& [tick, messages] : in_flight_) {
    dropped += std::erase_if(messages, [&](const AclMessage& m) {
      return m.receiver == id || m.sender == id;
    });
  }
  dead_.insert(live_.extract(it));
  log_.append(now, "agent_kill", id.str(), {{"dropped_messages", dropped}});
  if (settings_.mode == CoordinationMode::Centralized && id == settings_.coordinator) {
    log_.append(now, "coordinator_down", id.str(), json::object());
  }
}

void World::deliver(Tick now) {
  auto node = in_flight_.extract(now);
  if (node.empty()) return;
  for (auto& message : node.mapped()) {
    if (live_.contains(message.receiver)) {
      mailboxes_[message.receiver].push_back(std::move(message));
    } else {
      log_.append(now, "message_dropped", message.receiver.str(),
                  {{"conversation", message.conversation_id},
                   {"performative", std::string(performative_name(message.performative))},
                   {"sender", message.sender.str()}});
    }
  }
}

void World::physics(Tick now) {
  for (auto& [id, agent] : live_) {
    double external = 0.0;
    if (auto d = demand_.find(id); d != demand_.end()) external = d->second.next(now);
    auto outcome = agent->physics_step(now, external);

    for (const auto& shipment : outcome.shipments) {
      const Tick arrival = now + agent->config().lead_time;
      auto buyer = live_.find(shipment.buyer);
      if (buyer == live_.end()) {
        log_.append(now, "shipment_lost", id.str(),
                    {{"buyer", shipment.buyer.str()},
                     {"conversation", shipment.conversation_id},
                     {"quantity", shipment.quantity}});
        continue;
      }
      buyer->second->receive_shipment(shipment.conversation_id, shipment.quantity, arrival);
      log_.append(now, "shipment", id.str(),
                  {{"buyer", shipment.buyer.str()},
                   {"conversation", shipment.conversation_id},
                   {"quantity", shipment.quantity},
                   {"arrival", arrival}});
    }
    physics_this_tick_[id] = std::move(outcome);
  }

  if (token_) {
    try {
      if (auto moved = maintain_token(*token_, directory_, now)) {
        log_.append(now, "token_transfer", moved->holder.str(),
                    {{"from", token_->holder.str()}, {"to", moved->holder.str()}});
        token_ = std::move(moved);
      }
    } catch (const NoEligibleHolder&) {
      log_.append(now, "token_lost", token_->holder.str(), json::object());
      token_.reset();
    }
  }
}

void World::sample(Tick now) {
  for (const auto& [id, agent] : live_) {
    const auto& state = agent->state();
    const auto& outcome = physics_this_tick_.at(id);
    AgentSnapshot s;
    s.tick = now;
    s.agent = id.str();
    s.tier = agent->config().tier;
    s.stock = state.stock_level;
    s.backlog = state.backlog;
    s.on_order = state.on_order;
    s.demand_seen = outcome.demand;
    s.order_placed = agent->order_placed_this_tick();
    auto sent = sent_this_tick_.find(id);
    s.messages_sent = sent == sent_this_tick_.end() ? 0 : sent->second;
    s.stock_before = outcome.stock_before;
    s.arrivals = outcome.arrivals;
    s.shipped = outcome.shipped;
    s.shipped_on_time = outcome.shipped_on_time;
    s.pipeline_books = agent->pipeline_books();
    snapshots_.push_back(std::move(s));
  }
  if (config_.mode == CoordinationMode::MobileManaged) {
    TokenSample sample{now, token_ ? 1u : 0u, std::nullopt};
    if (token_) sample.holder = token_->holder;
    token_samples_.push_back(std::move(sample));
  }
}

void World::run_tick() {
  if (clock_.done()) {
    throw HorizonExceeded("tick " + std::to_string(clock_.tick()) + " is the horizon");
  }
  const Tick now = clock_.tick();

  for (const auto& failure : config_.failures) {
    if (failure.at_tick == now) kill(failure.kill_agent);
  }

  sent_this_tick_.clear();
  physics_this_tick_.clear();
  mailboxes_.clear();
  for (auto& [_, agent] : live_) agent->begin_tick();

  deliver(now);

  for (auto& [id, agent] : live_) {
    Context ctx(*this, id);
    agent->take_turn(ctx, mailboxes_[id]);
  }

  physics(now);
  sample(now);
  clock_.advance();
}

void World::run_to_horizon() {
  while (!done()) run_tick();
}

const ChainAgent* World::agent(const AgentId& id) const {
  if (auto it = live_.find(id); it != live_.end()) return it->second.get();
  if (auto it = dead_.find(id); it != dead_.end()) return it->second.get();
  return nullptr;
}

std::vector<Deal> World::deals() const {
  std::vector<Deal> out;
  for (const auto* agents : {&live_, &dead_}) {
    for (const auto& [_, agent] : *agents) {
      const auto& deals = agent->ledger().deals();
      out.insert(out.end(), deals.begin(), deals.end());
    }
  }
  std::sort(out.begin(), out.end(), [](const Deal& a, const Deal& b) {
    return std::tie(a.settled_at, a.conversation_id) < std::tie(b.settled_at, b.conversation_id);
  });
  return out;
}

std::vector<AclMessage> World::in_flight_at(Tick tick) const {
  auto it = in_flight_.find(tick);
  return it == in_flight_.end() ? std::vector<AclMessage>{} : it->second;
}

const std::vector<AclMessage>& World::last_mailbox(const AgentId& id) const {
  static const std::vector<AclMessage> empty;
  auto it = mailboxes_.find(id);
  return it == mailboxes_.end() ? empty : it->second;
}

RunResult simulate(const ScenarioConfig& config) {
  World world(config);
  RunResult result;
  result.config = config;
  try {
    world.run_to_horizon();
  } catch (const std::exception& e) {
    result.aborted = e.what();
    world.mutable_log().append(world.tick(), "run_aborted", "", {{"error", e.what()}});
  }
  result.log = world.log();
  result.snapshots = world.snapshots();
  result.deals = world.deals();
  result.token_samples = world.token_samples();
  result.chain_view_reads = world.chain_view_reads();
  result.report = result.snapshots.empty()
                      ? MetricsReport::vacuous()
                      : compile_report(result.log, result.snapshots, config.costs);
  return result;
}

}  // namespace scm
