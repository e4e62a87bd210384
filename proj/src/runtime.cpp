#include "scm/runtime.hpp"

namespace scm {

void Directory::register_agent(AgentDescriptor descriptor) {
  if (descriptor.id.empty()) throw std::invalid_argument("descriptor without id");
  const AgentId id = descriptor.id;
  auto [it, inserted] = entries_.try_emplace(id, std::move(descriptor));
  if (!inserted) throw DuplicateId("agent '" + id.str() + "' is already registered");
}

void Directory::deregister(const AgentId& id) { entries_.erase(id); }

std::vector<AgentDescriptor> Directory::search(const std::string& service) const {
  std::vector<AgentDescriptor> found;
  for (const auto& [id, descriptor] : entries_) {
    if (descriptor.offers(service)) found.push_back(descriptor);
  }
  return found;
}

std::vector<AgentId> Directory::ids() const {
  std::vector<AgentId> out;
  out.reserve(entries_.size());
  for (const auto& [id, _] : entries_) out.push_back(id);
  return out;
}

SimClock::SimClock(Tick horizon) : horizon_(horizon) {
  if (horizon < 0) throw std::invalid_argument("negative horizon");
}

void SimClock::advance() {
  if (tick_ >= horizon_) {
    throw HorizonExceeded("tick " + std::to_string(tick_) + " reached horizon");
  }
  ++tick_;
}

void EventLog::append(Tick tick, std::string kind, std::string agent, nlohmann::json payload) {
  records_.push_back(EventRecord{tick, std::move(kind), std::move(agent), std::move(payload)});
}

std::string EventLog::encode_record(const EventRecord& record) {
  // nlohmann::json objects are std::map backed, so dump() emits sorted keys.
  nlohmann::json line = {{"tick", record.tick},
                         {"kind", record.kind},
                         {"agent", record.agent},
                         {"payload", record.payload}};
  return line.dump();
}

std::string EventLog::to_jsonl() const {
  std::string out;
  for (const auto& record : records_) {
    out += encode_record(record);
    out += '\n';
  }
  return out;
}

}  // namespace scm
