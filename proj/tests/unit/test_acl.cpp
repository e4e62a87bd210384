#include <doctest.h>

#include "acl_fixtures.hpp"
#include "scm/acl.hpp"

using namespace scm;

namespace {

AclMessage example_cfp() {
  AclMessage m;
  m.performative = Performative::CFP;
  m.sender = AgentId("dist-1");
  m.receiver = AgentId("prod-1");
  m.conversation_id = "c-001";
  m.reply_by = 10;
  m.sent_at = 5;
  m.content = CallForBids{"widget", 20.0, 15, AgentId("dist-1")};
  return m;
}

}  // namespace

TEST_CASE("canonical bytes of the example call for bids") {
  // Written out by hand: keys sorted at every level, no whitespace.
  const std::string expected =
      R"({"content":{"issuer":"dist-1","item":"widget","latest_delivery":15,"quantity":20.0,)"
      R"("type":"call_for_bids"},"conversation_id":"c-001","performative":"CFP",)"
      R"("protocol":"contract-net","receiver":"prod-1","reply_by":10,"sender":"dist-1",)"
      R"("sent_at":5})";
  CHECK(encode(example_cfp()) == expected);
  CHECK(decode(expected) == example_cfp());
}

TEST_CASE("messages differing only in conversation id encode differently") {
  auto a = example_cfp();
  auto b = a;
  b.conversation_id = "c-002";
  CHECK(encode(a) != encode(b));
}

TEST_CASE("reply_by is omitted when absent") {
  auto m = example_cfp();
  m.reply_by.reset();
  CHECK(encode(m).find("reply_by") == std::string::npos);
  CHECK(decode(encode(m)) == m);
}

TEST_CASE("round trip over random valid messages") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto m = testing::random_message(rng);
    const auto bytes = encode(m);
    const auto back = decode(bytes);
    REQUIRE(back == m);
    CHECK(encode(back) == bytes);
  }
}

TEST_CASE("every invariant fixture is rejected with its error kind") {
  for (const auto& f : testing::invalid_wire_fixtures()) {
    CAPTURE(f.name);
    CAPTURE(f.bytes);
    try {
      decode(f.bytes);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == f.expected_kind);
    }
  }
}

TEST_CASE("encode refuses invalid messages") {
  auto m = example_cfp();
  m.receiver = m.sender;
  CHECK_THROWS_AS(encode(m), InvalidMessage);
  m = example_cfp();
  m.performative = Performative::PROPOSE;
  CHECK_THROWS_AS(encode(m), InvalidMessage);
}

TEST_CASE("admissibility table") {
  CHECK(admissible(Performative::CFP, CallForBids{}));
  CHECK(admissible(Performative::PROPOSE, Proposal{}));
  CHECK(admissible(Performative::ACCEPT_PROPOSAL, Award{}));
  CHECK(admissible(Performative::REJECT_PROPOSAL, Rejection{}));
  CHECK(admissible(Performative::INFORM, StatusInfo{}));
  CHECK(admissible(Performative::REQUEST, OrderRequest{}));
  CHECK_FALSE(admissible(Performative::PROPOSE, CallForBids{}));
  CHECK_FALSE(admissible(Performative::CFP, Award{}));
  CHECK_FALSE(admissible(Performative::INFORM, OrderRequest{}));
}

TEST_CASE("deadline boundary is inclusive") {
  auto m = example_cfp();
  CHECK_FALSE(is_expired(m, 10));
  CHECK(is_expired(m, 11));
  m.reply_by.reset();
  CHECK_FALSE(is_expired(m, 1'000'000));
}

TEST_CASE("performative names round trip") {
  for (auto p : {Performative::CFP, Performative::PROPOSE, Performative::ACCEPT_PROPOSAL,
                 Performative::REJECT_PROPOSAL, Performative::INFORM, Performative::REQUEST,
                 Performative::CONFIRM, Performative::FAILURE}) {
    CHECK(parse_performative(performative_name(p)) == p);
  }
  CHECK_FALSE(parse_performative("BRIBE"));
}

TEST_CASE("conversation transcript stays ordered and single-threaded") {
  Conversation c("c-001", AgentId("dist-1"));
  auto late = example_cfp();
  late.sent_at = 8;
  late.reply_by = 12;
  auto early = example_cfp();
  early.sender = AgentId("a");
  auto same_tick = example_cfp();
  c.record(late);
  c.record(same_tick);
  c.record(early);
  REQUIRE(c.transcript().size() == 3);
  CHECK(c.transcript()[0].sender == AgentId("a"));
  CHECK(c.transcript()[1].sender == AgentId("dist-1"));
  CHECK(c.transcript()[2].sent_at == 8);

  auto other = example_cfp();
  other.conversation_id = "c-002";
  CHECK_THROWS_AS(c.record(other), InvalidMessage);
  c.close(ConversationState::Completed);
  CHECK(c.state() == ConversationState::Completed);
}
