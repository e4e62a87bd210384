#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "scm/core.hpp"

namespace scm {

enum class Performative {
  CFP,
  PROPOSE,
  ACCEPT_PROPOSAL,
  REJECT_PROPOSAL,
  INFORM,
  REQUEST,
  CONFIRM,
  FAILURE,
};

std::string_view performative_name(Performative p);
std::optional<Performative> parse_performative(std::string_view name);

inline constexpr std::string_view kContractNet = "contract-net";

// Content variants. Each maps to exactly one performative (see `admissible`).

struct CallForBids {
  std::string item;
  double quantity = 0.0;
  Tick latest_delivery = 0;
  AgentId issuer;
  friend bool operator==(const CallForBids&, const CallForBids&) = default;
};

struct Proposal {
  AgentId bidder;
  std::string item;
  double quantity = 0.0;
  double unit_price = 0.0;
  int lead_time = 1;
  double reliability = 0.0;
  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct Award {
  std::string item;
  double quantity = 0.0;
  double unit_price = 0.0;
  Tick promised_delivery = 0;
  friend bool operator==(const Award&, const Award&) = default;
};

struct Rejection {
  std::string reason;
  friend bool operator==(const Rejection&, const Rejection&) = default;
};

/// Chain-health traffic: "chain_health" broadcasts from the management-token holder
/// and the "stock_report" replies they solicit.
struct StatusInfo {
  std::string topic;
  std::map<std::string, double> stock;
  friend bool operator==(const StatusInfo&, const StatusInfo&) = default;
};

/// Centrally issued order. `supplier` absent means the external source that feeds
/// raw-material agents.
struct OrderRequest {
  std::string item;
  double quantity = 0.0;
  AgentId buyer;
  std::optional<AgentId> supplier;
  friend bool operator==(const OrderRequest&, const OrderRequest&) = default;
};

using Content = std::variant<CallForBids, Proposal, Award, Rejection, StatusInfo, OrderRequest>;

struct AclMessage {
  Performative performative = Performative::INFORM;
  AgentId sender;
  AgentId receiver;
  std::string conversation_id;
  std::string protocol{kContractNet};
  Content content;
  std::optional<Tick> reply_by;
  Tick sent_at = 0;

  friend bool operator==(const AclMessage&, const AclMessage&) = default;
};

/// CFP<->CallForBids, PROPOSE<->Proposal, ACCEPT_PROPOSAL<->Award,
/// REJECT_PROPOSAL<->Rejection, INFORM<->StatusInfo, REQUEST<->OrderRequest,
/// CONFIRM<->OrderRequest, FAILURE<->Rejection.
bool admissible(Performative p, const Content& content);

/// Throws InvalidMessage naming the first violated invariant.
void validate(const AclMessage& message);

nlohmann::json to_json(const AclMessage& message);

/// Canonical single-line encoding with lexicographically ordered keys.
std::string encode(const AclMessage& message);

/// Accepts exactly the bytes `encode` produces. Throws ParseError for malformed or
/// non-canonical input and InvalidMessage for invariant violations.
AclMessage decode(std::string_view bytes);

/// Inclusive deadline: a reply at tick reply_by is on time.
constexpr bool is_expired(const AclMessage& message, Tick now) noexcept {
  return message.reply_by.has_value() && now > *message.reply_by;
}

enum class ConversationState { Open, Completed, Failed };

/// Transcript of one conversation, kept ordered by (sent_at, sender).
class Conversation {
public:
  Conversation(std::string conversation_id, AgentId initiator);

  /// Throws InvalidMessage if the message belongs to another conversation.
  void record(const AclMessage& message);
  void close(ConversationState final_state);

  const std::string& id() const noexcept { return id_; }
  const AgentId& initiator() const noexcept { return initiator_; }
  ConversationState state() const noexcept { return state_; }
  const std::vector<AclMessage>& transcript() const noexcept { return transcript_; }

private:
  std::string id_;
  AgentId initiator_;
  ConversationState state_ = ConversationState::Open;
  std::vector<AclMessage> transcript_;
};

}  // namespace scm
