#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scm/acl.hpp"
#include "scm/core.hpp"

namespace scm {

/// Weights for proposal scoring; must be nonnegative and sum to 1 (within 1e-9).
struct ScoreWeights {
  double price = 0.5;
  double lead = 0.3;
  double reliability = 0.2;

  bool valid() const noexcept;
};

enum class NegotiationPhase { CFP_SENT, COLLECTING, AWARDED, FAILED, SETTLED };

std::string_view phase_name(NegotiationPhase phase);

/// Buyer-side record of one contract-net round.
struct NegotiationState {
  std::string conversation_id;
  NegotiationPhase phase = NegotiationPhase::CFP_SENT;
  CallForBids call;
  std::vector<Proposal> received;
  Tick deadline = 0;
  ScoreWeights weights;
  /// Suppliers the call was sent to.
  std::vector<AgentId> invited;

  friend bool operator==(const NegotiationState&, const NegotiationState&) = default;
};

// Suggestion rules ------------------------------------------------------------

enum class RejectReason { WrongPhase, LateReply, InsufficientQuantity, ItemMismatch };

std::string_view reject_reason_name(RejectReason reason);

struct Admit {};
struct Reject {
  RejectReason reason;
};
using Admission = std::variant<Admit, Reject>;

/// Checks, in order: (a) a PROPOSE while COLLECTING, (b) not expired,
/// (c) quantity covers the call, (d) item matches. Reports the first failure.
Admission suggestion_check(const AclMessage& message, const NegotiationState& state, Tick now);

// Information rules -----------------------------------------------------------

/// The call for bids went out; CFP_SENT -> COLLECTING.
struct CallDispatched {};
struct ProposalAdmitted {
  Proposal proposal;
};
/// Deadline fired; COLLECTING -> AWARDED if anything was received, else FAILED.
struct DeadlineReached {};

using NegotiationEvent = std::variant<CallDispatched, ProposalAdmitted, DeadlineReached>;

/// Throws IllegalTransition for any move off the phase graph.
NegotiationState information_update(NegotiationState state, const NegotiationEvent& event);

// Scoring and selection ---------------------------------------------------------

/// w_price*np + w_lead*nl + w_rel*reliability with min-max normalisation over the
/// cohort (a degenerate attribute normalises to 1). Throws EmptyCohort.
double score_proposal(const Proposal& p, std::span<const Proposal> cohort, const ScoreWeights& w);

/// Scores closer than this are ties, broken by the smaller bidder id.
inline constexpr double kScoreTieEpsilon = 1e-12;

/// Highest score wins; ties go to the lexicographically smallest bidder.
/// Throws EmptyCohort.
const Proposal& select_best(std::span<const Proposal> cohort, const ScoreWeights& w);

// Clarification rules -----------------------------------------------------------

struct Deal {
  std::string conversation_id;
  AgentId buyer;
  AgentId seller;
  std::string item;
  double quantity = 0.0;
  double unit_price = 0.0;
  Tick promised_delivery = 0;
  Tick settled_at = 0;

  double value() const noexcept { return quantity * unit_price; }
  friend bool operator==(const Deal&, const Deal&) = default;
};

/// Append-only; one deal per conversation.
class DealLedger {
public:
  /// Throws DuplicateDeal.
  void append(Deal deal);
  bool contains(const std::string& conversation_id) const;

  const std::vector<Deal>& deals() const noexcept { return deals_; }
  std::size_t size() const noexcept { return deals_.size(); }
  double total_value() const noexcept;

private:
  std::vector<Deal> deals_;
};

struct Settlement {
  NegotiationState state;
  Deal deal;
  DealLedger ledger;
  /// One ACCEPT_PROPOSAL for the winner, then one REJECT_PROPOSAL per other proposal.
  std::vector<AclMessage> messages;
};

/// Throws IllegalTransition unless AWARDED, DuplicateDeal if already recorded.
Settlement clarify_and_settle(const NegotiationState& state, const DealLedger& ledger, Tick now);

}  // namespace scm
