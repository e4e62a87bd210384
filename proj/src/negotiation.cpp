#include "scm/negotiation.hpp"

#include <algorithm>
#include <cmath>

namespace scm {

bool ScoreWeights::valid() const noexcept {
  return price >= 0.0 && lead >= 0.0 && reliability >= 0.0 &&
         std::abs(price + lead + reliability - 1.0) <= 1e-9;
}

std::string_view phase_name(NegotiationPhase phase) {
  switch (phase) {
    case NegotiationPhase::CFP_SENT: return "CFP_SENT";
    case NegotiationPhase::COLLECTING: return "COLLECTING";
    case NegotiationPhase::AWARDED: return "AWARDED";
    case NegotiationPhase::FAILED: return "FAILED";
    case NegotiationPhase::SETTLED: return "SETTLED";
  }
  return "?";
}

std::string_view reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::WrongPhase: return "wrong_phase";
    case RejectReason::LateReply: return "late_reply";
    case RejectReason::InsufficientQuantity: return "insufficient_quantity";
    case RejectReason::ItemMismatch: return "item_mismatch";
  }
  return "?";
}

Admission suggestion_check(const AclMessage& message, const NegotiationState& state, Tick now) {
  const auto* proposal = std::get_if<Proposal>(&message.content);
  if (message.performative != Performative::PROPOSE || proposal == nullptr ||
      state.phase != NegotiationPhase::COLLECTING) {
    return Reject{RejectReason::WrongPhase};
  }
  if (is_expired(message, now) || now > state.deadline) return Reject{RejectReason::LateReply};
  if (proposal->quantity < state.call.quantity) return Reject{RejectReason::InsufficientQuantity};
  if (proposal->item != state.call.item) return Reject{RejectReason::ItemMismatch};
  return Admit{};
}

namespace {

[[noreturn]] void illegal(const NegotiationState& state, std::string_view event) {
  throw IllegalTransition(std::string(event) + " in phase " +
                          std::string(phase_name(state.phase)) + " of '" +
                          state.conversation_id + "'");
}

}  // namespace

NegotiationState information_update(NegotiationState state, const NegotiationEvent& event) {
  if (std::holds_alternative<CallDispatched>(event)) {
    if (state.phase != NegotiationPhase::CFP_SENT) illegal(state, "call dispatched");
    state.phase = NegotiationPhase::COLLECTING;
  } else if (const auto* admitted = std::get_if<ProposalAdmitted>(&event)) {
    if (state.phase != NegotiationPhase::COLLECTING) illegal(state, "proposal");
    state.received.push_back(admitted->proposal);
  } else {
    if (state.phase != NegotiationPhase::COLLECTING) illegal(state, "deadline");
    state.phase =
        state.received.empty() ? NegotiationPhase::FAILED : NegotiationPhase::AWARDED;
  }
  return state;
}

namespace {

struct Range {
  double min;
  double max;

  // (max - v) / (max - min), or 1 when the cohort does not discriminate.
  double normalise_lower_is_better(double v) const {
    if (max == min) return 1.0;
    return (max - v) / (max - min);
  }
};

struct CohortRanges {
  Range price;
  Range lead;
};

CohortRanges ranges_of(std::span<const Proposal> cohort) {
  if (cohort.empty()) throw EmptyCohort("cannot score against an empty cohort");
  CohortRanges r{{cohort.front().unit_price, cohort.front().unit_price},
                 {static_cast<double>(cohort.front().lead_time),
                  static_cast<double>(cohort.front().lead_time)}};
  for (const auto& p : cohort) {
    r.price.min = std::min(r.price.min, p.unit_price);
    r.price.max = std::max(r.price.max, p.unit_price);
    r.lead.min = std::min(r.lead.min, static_cast<double>(p.lead_time));
    r.lead.max = std::max(r.lead.max, static_cast<double>(p.lead_time));
  }
  return r;
}

double score_with(const Proposal& p, const CohortRanges& r, const ScoreWeights& w) {
  return w.price * r.price.normalise_lower_is_better(p.unit_price) +
         w.lead * r.lead.normalise_lower_is_better(static_cast<double>(p.lead_time)) +
         w.reliability * p.reliability;
}

}  // namespace

double score_proposal(const Proposal& p, std::span<const Proposal> cohort, const ScoreWeights& w) {
  return score_with(p, ranges_of(cohort), w);
}

const Proposal& select_best(std::span<const Proposal> cohort, const ScoreWeights& w) {
  const auto ranges = ranges_of(cohort);
  const Proposal* best = &cohort.front();
  double best_score = score_with(*best, ranges, w);
  for (const auto& p : cohort.subspan(1)) {
    const double s = score_with(p, ranges, w);
    if (s > best_score + kScoreTieEpsilon ||
        (std::abs(s - best_score) <= kScoreTieEpsilon && p.bidder < best->bidder)) {
      best = &p;
      best_score = s;
    }
  }
  return *best;
}

void DealLedger::append(Deal deal) {
  if (contains(deal.conversation_id)) {
    throw DuplicateDeal("conversation '" + deal.conversation_id + "' already settled");
  }
  deals_.push_back(std::move(deal));
}

bool DealLedger::contains(const std::string& conversation_id) const {
  return std::any_of(deals_.begin(), deals_.end(),
                     [&](const Deal& d) { return d.conversation_id == conversation_id; });
}

double DealLedger::total_value() const noexcept {
  double total = 0.0;
  for (const auto& d : deals_) total += d.value();
  return total;
}

Settlement clarify_and_settle(const NegotiationState& state, const DealLedger& ledger, Tick now) {
  if (state.phase != NegotiationPhase::AWARDED) illegal(state, "settle");
  if (ledger.contains(state.conversation_id)) {
    throw DuplicateDeal("conversation '" + state.conversation_id + "' already settled");
  }

  const Proposal& winner = select_best(state.received, state.weights);
  const auto winner_index = static_cast<std::size_t>(&winner - state.received.data());

  Settlement out{state, {}, ledger, {}};
  out.deal = Deal{state.conversation_id,
                  state.call.issuer,
                  winner.bidder,
                  state.call.item,
                  state.call.quantity,
                  winner.unit_price,
                  now + winner.lead_time,
                  now};
  out.ledger.append(out.deal);

  auto reply = [&](Performative p, const AgentId& to, Content content) {
    AclMessage m;
    m.performative = p;
    m.sender = state.call.issuer;
    m.receiver = to;
    m.conversation_id = state.conversation_id;
    m.content = std::move(content);
    m.sent_at = now;
    return m;
  };

  out.messages.push_back(reply(Performative::ACCEPT_PROPOSAL, winner.bidder,
                               Award{state.call.item, state.call.quantity, winner.unit_price,
                                     out.deal.promised_delivery}));
  for (std::size_t i = 0; i < state.received.size(); ++i) {
    if (i == winner_index) continue;
    out.messages.push_back(reply(Performative::REJECT_PROPOSAL, state.received[i].bidder,
                                 Rejection{"not selected"}));
  }
  out.state.phase = NegotiationPhase::SETTLED;
  return out;
}

}  // namespace scm
