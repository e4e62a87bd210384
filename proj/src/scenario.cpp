#include "scm/scenario.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace scm {

using nlohmann::json;

const AgentConfig* ScenarioConfig::find_agent(const AgentId& id) const {
  for (const auto& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

AgentId ScenarioConfig::effective_coordinator() const {
  if (coordinator) return *coordinator;
  std::optional<AgentId> best;
  for (const auto& a : agents) {
    if (a.tier == Tier::Production && (!best || a.id < *best)) best = a.id;
  }
  if (!best) throw ValidationError("coordinator: no Production agent to coordinate from");
  return *best;
}

namespace {

// Typed readers over a JSON object. `path` is the dotted location used in errors.

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

const json& field(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(join(path, key) + ": missing field");
  return *it;
}

double number_at(const json& obj, const std::string& path, const char* key) {
  const auto& v = field(obj, path, key);
  if (!v.is_number()) throw ParseError(join(path, key) + ": expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? number_at(obj, path, key) : fallback;
}

std::int64_t integer_at(const json& obj, const std::string& path, const char* key) {
  const auto& v = field(obj, path, key);
  if (!v.is_number_integer()) throw ParseError(join(path, key) + ": expected an integer");
  return v.get<std::int64_t>();
}

std::int64_t integer_or(const json& obj, const std::string& path, const char* key,
                        std::int64_t fallback) {
  return obj.contains(key) ? integer_at(obj, path, key) : fallback;
}

int small_int(std::int64_t v, const std::string& where) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ValidationError(where + ": out of range");
  }
  return static_cast<int>(v);
}

std::string string_at(const json& obj, const std::string& path, const char* key) {
  const auto& v = field(obj, path, key);
  if (!v.is_string()) throw ParseError(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

AgentId agent_id_at(const json& obj, const std::string& path, const char* key) {
  auto name = string_at(obj, path, key);
  if (name.empty()) throw ValidationError(join(path, key) + ": agent id must be nonempty");
  return AgentId(std::move(name));
}

ReplenishmentPolicy parse_policy(const json& j, const std::string& path) {
  ReplenishmentPolicy p;
  const auto kind = j.contains("kind") ? string_at(j, path, "kind") : "order_up_to";
  if (kind == "order_up_to") {
    p.kind = PolicyKind::OrderUpTo;
  } else if (kind == "safety_lead_time") {
    p.kind = PolicyKind::SafetyLeadTime;
  } else {
    throw ValidationError(path + ".kind: unknown policy '" + kind + "'");
  }
  p.window = small_int(integer_or(j, path, "window", p.window), path + ".window");
  p.safety_factor = number_or(j, path, "safety_factor", p.safety_factor);
  p.safety_lead_time =
      small_int(integer_or(j, path, "safety_lead_time", p.safety_lead_time), path + ".safety_lead_time");
  return p;
}

DemandParams parse_demand(const json& j, const std::string& path) {
  DemandParams d;
  const auto kind = string_at(j, path, "kind");
  if (kind == "constant") {
    d.kind = DemandKind::Constant;
  } else if (kind == "step") {
    d.kind = DemandKind::Step;
  } else if (kind == "seeded_noise") {
    d.kind = DemandKind::SeededNoise;
  } else {
    throw ValidationError(path + ".kind: unknown demand kind '" + kind + "'");
  }
  d.mean = number_at(j, path, "mean");
  d.amplitude = number_or(j, path, "amplitude", 0.0);
  d.step_tick = integer_or(j, path, "step_tick", 0);
  d.sigma = number_or(j, path, "sigma", 0.0);
  return d;
}

std::string_view demand_kind_name(DemandKind kind) {
  switch (kind) {
    case DemandKind::Constant: return "constant";
    case DemandKind::Step: return "step";
    case DemandKind::SeededNoise: return "seeded_noise";
  }
  return "?";
}

AgentConfig parse_agent(const json& j, const std::string& path) {
  AgentConfig a;
  a.id = agent_id_at(j, path, "id");
  const auto tier_text = string_at(j, path, "tier");
  const auto tier = parse_tier(tier_text);
  if (!tier) throw ValidationError(path + ".tier: unknown tier '" + tier_text + "'");
  a.tier = *tier;
  if (j.contains("services")) {
    const auto& services = j.at("services");
    if (!services.is_array()) throw ParseError(path + ".services: expected an array");
    for (std::size_t i = 0; i < services.size(); ++i) {
      if (!services[i].is_string()) {
        throw ParseError(fmt::format("{}.services[{}]: expected a string", path, i));
      }
      a.services.insert(services[i].get<std::string>());
    }
  }
  a.reliability = number_or(j, path, "reliability", a.reliability);
  a.lead_time = small_int(integer_or(j, path, "lead_time", a.lead_time), path + ".lead_time");
  a.unit_price = number_or(j, path, "unit_price", a.unit_price);
  a.initial_stock = number_or(j, path, "initial_stock", a.initial_stock);
  if (j.contains("policy")) a.policy = parse_policy(j.at("policy"), path + ".policy");
  a.requires_service =
      j.contains("requires") ? string_at(j, path, "requires") : required_service(a.tier);
  return a;
}

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

}  // namespace

void validate_scenario(const ScenarioConfig& c) {
  if (c.horizon < 0) violation("horizon", "must be nonnegative");
  if (c.bid_window < 1) violation("bid_window", "must be positive");
  if (c.token_dwell < 1) violation("token_dwell", "must be positive");
  if (!c.weights.valid()) violation("weights", "must be nonnegative and sum to 1");
  if (c.costs.holding < 0.0) violation("costs.h", "must be nonnegative");
  if (c.costs.backlog < 0.0) violation("costs.b", "must be nonnegative");
  if (c.demand.mean < 0.0) violation("demand.mean", "must be nonnegative");
  if (c.demand.sigma < 0.0) violation("demand.sigma", "must be nonnegative");
  if (c.agents.empty()) violation("agents", "at least one agent is required");

  std::set<AgentId> seen;
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const auto& a = c.agents[i];
    const auto path = fmt::format("agents[{}]", i);
    if (!seen.insert(a.id).second) violation(path + ".id", "duplicate id '" + a.id.str() + "'");
    if (a.tier != Tier::Sale && a.services.empty()) {
      violation(path + ".services", "supplier-capable agent offers no service");
    }
    if (!(a.reliability >= 0.0 && a.reliability <= 1.0)) {
      violation(path + ".reliability", "must lie in [0, 1]");
    }
    if (a.lead_time < 1) violation(path + ".lead_time", "must be >= 1");
    if (!(a.unit_price > 0.0)) violation(path + ".unit_price", "must be > 0");
    if (a.initial_stock < 0.0) violation(path + ".initial_stock", "must be nonnegative");
    if (a.policy.window < 1) violation(path + ".policy.window", "must be >= 1");
    if (a.policy.safety_factor < 0.0) {
      violation(path + ".policy.safety_factor", "must be nonnegative");
    }
    if (a.policy.safety_lead_time < 0) {
      violation(path + ".policy.safety_lead_time", "must be nonnegative");
    }
  }

  for (Tier tier : kAllTiers) {
    const bool present = std::any_of(c.agents.begin(), c.agents.end(),
                                     [&](const AgentConfig& a) { return a.tier == tier; });
    if (!present) {
      violation("agents", "tier invariant: no agent with tier '" + std::string(tier_name(tier)) +
                              "'");
    }
  }

  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const auto& a = c.agents[i];
    if (a.tier == Tier::RawMaterial) continue;
    const bool supplied = std::any_of(c.agents.begin(), c.agents.end(), [&](const AgentConfig& b) {
      return b.id != a.id && b.services.contains(a.requires_service);
    });
    if (!supplied) {
      violation(fmt::format("agents[{}].requires", i),
                "supplier invariant: no agent offers '" + a.requires_service + "' to '" +
                    a.id.str() + "'");
    }
  }

  for (std::size_t i = 0; i < c.failures.size(); ++i) {
    const auto& f = c.failures[i];
    const auto path = fmt::format("failures[{}]", i);
    if (!c.find_agent(f.kill_agent)) {
      violation(path + ".kill_agent", "unknown agent '" + f.kill_agent.str() + "'");
    }
    if (f.at_tick < 0) violation(path + ".at_tick", "must be nonnegative");
  }

  for (std::size_t i = 0; i < c.links.size(); ++i) {
    const auto& l = c.links[i];
    const auto path = fmt::format("links[{}]", i);
    if (!c.find_agent(l.from)) violation(path + ".from", "unknown agent '" + l.from.str() + "'");
    if (!c.find_agent(l.to)) violation(path + ".to", "unknown agent '" + l.to.str() + "'");
    if (l.from == l.to) violation(path, "link from an agent to itself");
    if (l.delay < 1) violation(path + ".delay", "must be >= 1");
  }

  if (c.coordinator && !c.find_agent(*c.coordinator)) {
    violation("coordinator", "unknown agent '" + c.coordinator->str() + "'");
  }
}

ScenarioConfig parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("scenario: expected a JSON object");

  ScenarioConfig c;
  const std::string top;
  const auto& seed = field(root, top, "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw ParseError("seed: expected an unsigned 64-bit integer");
  }
  c.seed = seed.get<std::uint64_t>();
  c.horizon = integer_at(root, top, "horizon");

  const auto mode_text = string_at(root, top, "mode");
  const auto mode = parse_mode(mode_text);
  if (!mode) throw ValidationError("mode: unknown coordination mode '" + mode_text + "'");
  c.mode = *mode;

  const auto& agents = field(root, top, "agents");
  if (!agents.is_array()) throw ParseError("agents: expected an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    c.agents.push_back(parse_agent(agents[i], fmt::format("agents[{}]", i)));
  }

  c.demand = parse_demand(field(root, top, "demand"), "demand");

  const auto& w = field(root, top, "weights");
  c.weights = ScoreWeights{number_at(w, "weights", "w_price"), number_at(w, "weights", "w_lead"),
                           number_at(w, "weights", "w_rel")};
  c.bid_window = small_int(integer_at(root, top, "bid_window"), "bid_window");

  const auto& costs = field(root, top, "costs");
  c.costs = CostParams{number_at(costs, "costs", "h"), number_at(costs, "costs", "b")};

  if (root.contains("failures")) {
    const auto& failures = root.at("failures");
    if (!failures.is_array()) throw ParseError("failures: expected an array");
    for (std::size_t i = 0; i < failures.size(); ++i) {
      const auto path = fmt::format("failures[{}]", i);
      c.failures.push_back(FailureSpec{agent_id_at(failures[i], path, "kill_agent"),
                                       integer_at(failures[i], path, "at_tick")});
    }
  }
  if (root.contains("coordinator")) c.coordinator = agent_id_at(root, top, "coordinator");
  c.token_dwell = small_int(integer_or(root, top, "token_dwell", c.token_dwell), "token_dwell");
  if (root.contains("links")) {
    const auto& links = root.at("links");
    if (!links.is_array()) throw ParseError("links: expected an array");
    for (std::size_t i = 0; i < links.size(); ++i) {
      const auto path = fmt::format("links[{}]", i);
      c.links.push_back(LinkDelay{agent_id_at(links[i], path, "from"),
                                  agent_id_at(links[i], path, "to"),
                                  small_int(integer_at(links[i], path, "delay"), path + ".delay")});
    }
  }

  validate_scenario(c);
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

json scenario_to_json(const ScenarioConfig& c) {
  json agents = json::array();
  for (const auto& a : c.agents) {
    agents.push_back(
        {{"id", a.id.str()},
         {"tier", std::string(tier_name(a.tier))},
         {"services", a.services},
         {"reliability", a.reliability},
         {"lead_time", a.lead_time},
         {"unit_price", a.unit_price},
         {"initial_stock", a.initial_stock},
         {"requires", a.requires_service},
         {"policy",
          {{"kind", a.policy.kind == PolicyKind::OrderUpTo ? "order_up_to" : "safety_lead_time"},
           {"window", a.policy.window},
           {"safety_factor", a.policy.safety_factor},
           {"safety_lead_time", a.policy.safety_lead_time}}}});
  }
  json failures = json::array();
  for (const auto& f : c.failures) {
    failures.push_back({{"kill_agent", f.kill_agent.str()}, {"at_tick", f.at_tick}});
  }
  json links = json::array();
  for (const auto& l : c.links) {
    links.push_back({{"from", l.from.str()}, {"to", l.to.str()}, {"delay", l.delay}});
  }
  json out = {{"seed", c.seed},
              {"horizon", c.horizon},
              {"mode", std::string(mode_name(c.mode))},
              {"agents", agents},
              {"demand",
               {{"kind", std::string(demand_kind_name(c.demand.kind))},
                {"mean", c.demand.mean},
                {"amplitude", c.demand.amplitude},
                {"step_tick", c.demand.step_tick},
                {"sigma", c.demand.sigma}}},
              {"weights",
               {{"w_price", c.weights.price},
                {"w_lead", c.weights.lead},
                {"w_rel", c.weights.reliability}}},
              {"bid_window", c.bid_window},
              {"costs", {{"h", c.costs.holding}, {"b", c.costs.backlog}}},
              {"failures", failures},
              {"token_dwell", c.token_dwell},
              {"links", links}};
  if (c.coordinator) out["coordinator"] = c.coordinator->str();
  return out;
}

}  // namespace scm
