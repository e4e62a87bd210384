#include "scm/acl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>

namespace scm {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Performative, std::string_view>, 8> kPerformatives = {{
    {Performative::CFP, "CFP"},
    {Performative::PROPOSE, "PROPOSE"},
    {Performative::ACCEPT_PROPOSAL, "ACCEPT_PROPOSAL"},
    {Performative::REJECT_PROPOSAL, "REJECT_PROPOSAL"},
    {Performative::INFORM, "INFORM"},
    {Performative::REQUEST, "REQUEST"},
    {Performative::CONFIRM, "CONFIRM"},
    {Performative::FAILURE, "FAILURE"},
}};

// Content tags, indexed like the Content variant.
constexpr std::array<std::string_view, 6> kContentTags = {
    "call_for_bids", "proposal", "award", "rejection", "status_info", "order_request"};

[[noreturn]] void invalid(const std::string& what) { throw InvalidMessage(what); }

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void validate_content(const AclMessage& m) {
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CallForBids>) {
          if (!finite_positive(c.quantity)) invalid("call for bids quantity must be > 0");
          if (c.latest_delivery < m.sent_at) invalid("latest_delivery precedes issuing tick");
          if (c.issuer.empty()) invalid("call for bids without issuer");
        } else if constexpr (std::is_same_v<T, Proposal>) {
          if (c.bidder.empty()) invalid("proposal without bidder");
          if (!finite_positive(c.quantity)) invalid("proposal quantity must be > 0");
          if (!finite_positive(c.unit_price)) invalid("unit_price must be > 0");
          if (c.lead_time < 1) invalid("lead_time must be >= 1");
          if (!(c.reliability >= 0.0 && c.reliability <= 1.0)) {
            invalid("reliability outside [0, 1]");
          }
        } else if constexpr (std::is_same_v<T, Award>) {
          if (!finite_positive(c.quantity)) invalid("award quantity must be > 0");
          if (!finite_positive(c.unit_price)) invalid("award unit_price must be > 0");
        } else if constexpr (std::is_same_v<T, StatusInfo>) {
          for (const auto& [name, value] : c.stock) {
            if (!std::isfinite(value)) invalid("non-finite stock for " + name);
          }
        } else if constexpr (std::is_same_v<T, OrderRequest>) {
          if (c.buyer.empty()) invalid("order request without buyer");
          if (!finite_positive(c.quantity)) invalid("order quantity must be > 0");
        }
      },
      m.content);
}

json content_to_json(const Content& content) {
  json j = std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CallForBids>) {
          return {{"issuer", c.issuer.str()},
                  {"item", c.item},
                  {"latest_delivery", c.latest_delivery},
                  {"quantity", c.quantity}};
        } else if constexpr (std::is_same_v<T, Proposal>) {
          return {{"bidder", c.bidder.str()},       {"item", c.item},
                  {"lead_time", c.lead_time},       {"quantity", c.quantity},
                  {"reliability", c.reliability},   {"unit_price", c.unit_price}};
        } else if constexpr (std::is_same_v<T, Award>) {
          return {{"item", c.item},
                  {"promised_delivery", c.promised_delivery},
                  {"quantity", c.quantity},
                  {"unit_price", c.unit_price}};
        } else if constexpr (std::is_same_v<T, Rejection>) {
          return {{"reason", c.reason}};
        } else if constexpr (std::is_same_v<T, StatusInfo>) {
          json stock = json::object();
          for (const auto& [name, value] : c.stock) stock[name] = value;
          return {{"stock", stock}, {"topic", c.topic}};
        } else {
          json out = {{"buyer", c.buyer.str()}, {"item", c.item}, {"quantity", c.quantity}};
          if (c.supplier) out["supplier"] = c.supplier->str();
          return out;
        }
      },
      content);
  j["type"] = std::string(kContentTags.at(content.index()));
  return j;
}

// Strict field readers. Any structural problem is a ParseError.

void expect_keys(const json& obj, std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " is not an object");
  for (auto key : required) {
    if (!obj.contains(std::string(key))) {
      throw ParseError(where + " missing key '" + std::string(key) + "'");
    }
  }
  for (const auto& [key, _] : obj.items()) {
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw ParseError(where + " has unexpected key '" + key + "'");
  }
}

std::string read_string(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ParseError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

double read_number(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t read_integer(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ParseError(std::string("'") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

AgentId read_agent(const json& obj, const char* key) {
  auto name = read_string(obj, key);
  if (name.empty()) throw InvalidMessage(std::string("'") + key + "' is an empty agent id");
  return AgentId(std::move(name));
}

Content content_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("content is not an object");
  if (!j.contains("type")) throw ParseError("content missing key 'type'");
  const std::string tag = read_string(j, "type");
  if (tag == "call_for_bids") {
    expect_keys(j, {"type", "issuer", "item", "latest_delivery", "quantity"}, {}, "content");
    return CallForBids{read_string(j, "item"), read_number(j, "quantity"),
                       read_integer(j, "latest_delivery"), read_agent(j, "issuer")};
  }
  if (tag == "proposal") {
    expect_keys(j, {"type", "bidder", "item", "lead_time", "quantity", "reliability", "unit_price"},
                {}, "content");
    const auto lead = read_integer(j, "lead_time");
    if (lead < 1 || lead > std::numeric_limits<int>::max()) {
      throw InvalidMessage("lead_time must be >= 1");
    }
    return Proposal{read_agent(j, "bidder"),        read_string(j, "item"),
                    read_number(j, "quantity"),     read_number(j, "unit_price"),
                    static_cast<int>(lead),         read_number(j, "reliability")};
  }
  if (tag == "award") {
    expect_keys(j, {"type", "item", "promised_delivery", "quantity", "unit_price"}, {}, "content");
    return Award{read_string(j, "item"), read_number(j, "quantity"), read_number(j, "unit_price"),
                 read_integer(j, "promised_delivery")};
  }
  if (tag == "rejection") {
    expect_keys(j, {"type", "reason"}, {}, "content");
    return Rejection{read_string(j, "reason")};
  }
  if (tag == "status_info") {
    expect_keys(j, {"type", "stock", "topic"}, {}, "content");
    StatusInfo info{read_string(j, "topic"), {}};
    const auto& stock = j.at("stock");
    if (!stock.is_object()) throw ParseError("'stock' must be an object");
    for (const auto& [name, value] : stock.items()) {
      if (!value.is_number()) throw ParseError("stock entries must be numbers");
      info.stock.emplace(name, value.get<double>());
    }
    return info;
  }
  if (tag == "order_request") {
    expect_keys(j, {"type", "buyer", "item", "quantity"}, {"supplier"}, "content");
    OrderRequest req{read_string(j, "item"), read_number(j, "quantity"), read_agent(j, "buyer"),
                     std::nullopt};
    if (j.contains("supplier")) req.supplier = read_agent(j, "supplier");
    return req;
  }
  throw InvalidMessage("unknown content type '" + tag + "'");
}

}  // namespace

std::string_view performative_name(Performative p) {
  for (const auto& [value, name] : kPerformatives) {
    if (value == p) return name;
  }
  return "?";
}

std::optional<Performative> parse_performative(std::string_view name) {
  for (const auto& [value, label] : kPerformatives) {
    if (label == name) return value;
  }
  return std::nullopt;
}

bool admissible(Performative p, const Content& content) {
  switch (p) {
    case Performative::CFP:
      return std::holds_alternative<CallForBids>(content);
    case Performative::PROPOSE:
      return std::holds_alternative<Proposal>(content);
    case Performative::ACCEPT_PROPOSAL:
      return std::holds_alternative<Award>(content);
    case Performative::REJECT_PROPOSAL:
    case Performative::FAILURE:
      return std::holds_alternative<Rejection>(content);
    case Performative::INFORM:
      return std::holds_alternative<StatusInfo>(content);
    case Performative::REQUEST:
    case Performative::CONFIRM:
      return std::holds_alternative<OrderRequest>(content);
  }
  return false;
}

void validate(const AclMessage& m) {
  if (m.sender.empty() || m.receiver.empty()) invalid("sender and receiver must be set");
  if (m.sender == m.receiver) invalid("sender equals receiver ('" + m.sender.str() + "')");
  if (m.conversation_id.empty()) invalid("empty conversation_id");
  if (m.protocol.empty()) invalid("empty protocol");
  if (m.reply_by && *m.reply_by < m.sent_at) invalid("reply_by precedes sent_at");
  if (!admissible(m.performative, m.content)) {
    invalid("content '" + std::string(kContentTags.at(m.content.index())) +
            "' not admissible for " + std::string(performative_name(m.performative)));
  }
  validate_content(m);
}

json to_json(const AclMessage& m) {
  json j = {{"content", content_to_json(m.content)},
            {"conversation_id", m.conversation_id},
            {"performative", std::string(performative_name(m.performative))},
            {"protocol", m.protocol},
            {"receiver", m.receiver.str()},
            {"sender", m.sender.str()},
            {"sent_at", m.sent_at}};
  if (m.reply_by) j["reply_by"] = *m.reply_by;
  return j;
}

std::string encode(const AclMessage& message) {
  validate(message);
  return to_json(message).dump();
}

AclMessage decode(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  expect_keys(j,
              {"content", "conversation_id", "performative", "protocol", "receiver", "sender",
               "sent_at"},
              {"reply_by"}, "message");

  AclMessage m;
  const auto perf_name = read_string(j, "performative");
  const auto perf = parse_performative(perf_name);
  if (!perf) throw InvalidMessage("unknown performative '" + perf_name + "'");
  m.performative = *perf;
  m.sender = read_agent(j, "sender");
  m.receiver = read_agent(j, "receiver");
  m.conversation_id = read_string(j, "conversation_id");
  m.protocol = read_string(j, "protocol");
  m.sent_at = read_integer(j, "sent_at");
  if (j.contains("reply_by")) m.reply_by = read_integer(j, "reply_by");
  m.content = content_from_json(j.at("content"));

  validate(m);
  if (to_json(m).dump() != bytes) throw ParseError("input is not in canonical form");
  return m;
}

Conversation::Conversation(std::string conversation_id, AgentId initiator)
    : id_(std::move(conversation_id)), initiator_(std::move(initiator)) {}

void Conversation::record(const AclMessage& message) {
  if (message.conversation_id != id_) {
    throw InvalidMessage("message for '" + message.conversation_id + "' recorded in '" + id_ +
                         "'");
  }
  auto key = [](const AclMessage& m) { return std::tie(m.sent_at, m.sender); };
  auto pos = std::upper_bound(transcript_.begin(), transcript_.end(), message,
                              [&](const AclMessage& a, const AclMessage& b) {
                                return key(a) < key(b);
                              });
  transcript_.insert(pos, message);
}

void Conversation::close(ConversationState final_state) { state_ = final_state; }

}  // namespace scm
