#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scm/chain_model.hpp"
#include "scm/core.hpp"

namespace scm {

struct AgentDescriptor {
  AgentId id;
  Tier tier = Tier::Sale;
  std::set<std::string> services;

  bool offers(const std::string& service) const { return services.contains(service); }
  friend bool operator==(const AgentDescriptor&, const AgentDescriptor&) = default;
};

/// Passive registration medium: agents publish what they offer and discover peers
/// through search. Not an agent itself.
class Directory {
public:
  /// Throws DuplicateId if the id is already registered.
  void register_agent(AgentDescriptor descriptor);
  /// Idempotent.
  void deregister(const AgentId& id);

  /// Registered descriptors offering `service`, ascending by id.
  std::vector<AgentDescriptor> search(const std::string& service) const;

  bool contains(const AgentId& id) const { return entries_.contains(id); }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Ascending.
  std::vector<AgentId> ids() const;

  const std::map<AgentId, AgentDescriptor>& entries() const noexcept { return entries_; }

private:
  std::map<AgentId, AgentDescriptor> entries_;
};

class SimClock {
public:
  explicit SimClock(Tick horizon);

  Tick tick() const noexcept { return tick_; }
  Tick horizon() const noexcept { return horizon_; }
  bool done() const noexcept { return tick_ >= horizon_; }

  /// Throws HorizonExceeded at tick == horizon.
  void advance();

private:
  Tick tick_ = 0;
  Tick horizon_ = 0;
};

/// One line of the append-only event log.
struct EventRecord {
  Tick tick = 0;
  std::string kind;
  std::string agent;
  nlohmann::json payload = nlohmann::json::object();
};

class EventLog {
public:
  void append(Tick tick, std::string kind, std::string agent,
              nlohmann::json payload = nlohmann::json::object());

  const std::vector<EventRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  /// One compact JSON object per line, keys sorted, '\n' terminated.
  std::string to_jsonl() const;

  static std::string encode_record(const EventRecord& record);

private:
  std::vector<EventRecord> records_;
};

}  // namespace scm
