#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "scm/scenario.hpp"

using namespace scm;

namespace {

const std::filesystem::path kFixtures = std::filesystem::path(SCM_SOURCE_DIR) / "tests/fixtures";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal six agent scenario") {
  const auto c = load_scenario(kFixtures / "minimal.json");
  CHECK(c.agents.size() == 6);
  CHECK(c.seed == 7);
  CHECK(c.horizon == 30);
  CHECK(c.mode == CoordinationMode::Decentralized);
  CHECK(c.demand.kind == DemandKind::Constant);
  CHECK(c.token_dwell == 5);
  CHECK(c.effective_coordinator() == AgentId("prod"));
  const auto* store = c.find_agent(AgentId("store"));
  REQUIRE(store);
  CHECK(store->requires_service == "supply:raw");
  CHECK(store->policy.window == 4);
  CHECK(store->policy.safety_factor == 1.0);
  CHECK(c.find_agent(AgentId("nobody")) == nullptr);
}

TEST_CASE("scenario survives a JSON round trip") {
  const auto c = load_scenario(std::filesystem::path(SCM_SOURCE_DIR) / "scenarios/reference.json");
  const auto again = parse_scenario(scenario_to_json(c).dump());
  CHECK(scenario_to_json(again) == scenario_to_json(c));
  CHECK(again.links.size() == 1);
}

TEST_CASE("every invalid fixture is rejected with its named invariant") {
  const auto expectations = nlohmann::json::parse(slurp(kFixtures / "expectations.json"));
  std::size_t on_disk = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kFixtures)) {
    if (entry.path().filename().string().starts_with("invalid_")) ++on_disk;
  }
  CHECK(on_disk == expectations.size());

  for (const auto& [file, expect] : expectations.items()) {
    CAPTURE(file);
    try {
      load_scenario(kFixtures / file);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == expect.at("error").get<std::string>());
      CHECK(std::string(e.what()).find(expect.at("contains").get<std::string>()) !=
            std::string::npos);
    }
  }
}

TEST_CASE("missing files are parse errors") {
  CHECK_THROWS_AS(load_scenario(kFixtures / "does_not_exist.json"), ParseError);
}
