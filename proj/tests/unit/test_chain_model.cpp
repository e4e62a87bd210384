#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "scm/chain_model.hpp"

using namespace scm;

namespace {

std::vector<SaleRecord> history(std::initializer_list<double> qs) {
  std::vector<SaleRecord> out;
  Tick t = 0;
  for (double q : qs) out.push_back({t++, q});
  return out;
}

}  // namespace

TEST_CASE("tier names and topology") {
  for (Tier t : kAllTiers) CHECK(parse_tier(tier_name(t)) == t);
  CHECK_FALSE(parse_tier("warehouse"));
  CHECK_FALSE(upstream_of(Tier::RawMaterial));
  CHECK(upstream_of(Tier::Sale) == Tier::Distribution);
  CHECK(upstream_of(Tier::Production) == Tier::Transportation);
  CHECK(required_service(Tier::Storage) == "supply:raw");
  CHECK(required_service(Tier::RawMaterial).empty());
  CHECK(supply_service(Tier::Sale).empty());
  CHECK(item_for_service("supply:production") == "production");
}

TEST_CASE("forecast is a trailing moving average") {
  CHECK(forecast_demand({}, 4) == 0.0);
  CHECK(forecast_demand(history({4, 6}), 2) == 5.0);
  CHECK(forecast_demand(history({100, 4, 6}), 2) == 5.0);
  CHECK(forecast_demand(history({3, 6}), 4) == 4.5);
  for (int w = 1; w <= 6; ++w) CHECK(forecast_demand(history({7, 7, 7, 7, 7}), w) == 7.0);
}

TEST_CASE("order quantity example") {
  ChainAgentState s;
  s.stock_level = 10;
  s.on_order = 4;
  s.sale_history = history({5, 5});
  s.demand_expectation = 5;
  ReplenishmentPolicy p;
  p.safety_factor = 0.5;
  CHECK(order_up_to_level(5, p, 2) == 17.5);
  CHECK(s.inventory_position() == 14.0);
  CHECK(compute_order_quantity(s, p, 2) == 3.5);

  s.stock_level = 30;
  CHECK(compute_order_quantity(s, p, 2) == 0.0);
}

TEST_CASE("safety lead time policy plans over the padded lead time") {
  ReplenishmentPolicy p;
  p.kind = PolicyKind::SafetyLeadTime;
  p.safety_lead_time = 3;
  CHECK(order_up_to_level(4, p, 2) == 4.0 * 6);
}

TEST_CASE("pipeline arrivals") {
  ChainAgentState s;
  s.schedule_delivery(7, 3);
  s.schedule_delivery(5, 10);
  s.on_order = 13;
  CHECK(s.delivery_schedule.front().arrival_tick == 5);
  auto r = advance_pipeline(s, 5);
  CHECK(r.arrivals == 10);
  CHECK(r.state.stock_level == 10);
  CHECK(r.state.on_order == 3);
  CHECK(r.state.delivery_schedule == std::vector<ScheduledDelivery>{{7, 3}});

  auto none = advance_pipeline(r.state, 6);
  CHECK(none.arrivals == 0);
  CHECK(none.state == r.state);

  ChainAgentState two;
  two.schedule_delivery(5, 2);
  two.schedule_delivery(5, 3);
  two.on_order = 5;
  CHECK(advance_pipeline(two, 5).arrivals == 5);
}

TEST_CASE("fulfilment serves backlog first") {
  ChainAgentState s;
  s.stock_level = 10;
  auto r = fulfill_demand(s, 4, 0);
  CHECK(r.shipped == 4);
  CHECK(r.state.stock_level == 6);
  CHECK(r.shipped_on_time == 4);

  s.stock_level = 3;
  r = fulfill_demand(s, 5, 0);
  CHECK(r.shipped == 3);
  CHECK(r.state.backlog == 2);

  s.stock_level = 10;
  s.backlog = 2;
  r = fulfill_demand(s, 0, 0);
  CHECK(r.shipped == 2);
  CHECK(r.state.backlog == 0);
  CHECK(r.shipped_on_time == 0);

  // Old backlog absorbs the stock before the new demand sees any.
  s.stock_level = 5;
  s.backlog = 3;
  r = fulfill_demand(s, 4, 0);
  CHECK(r.shipped == 5);
  CHECK(r.shipped_on_time == 2);
  CHECK(r.state.backlog == 2);
  CHECK(r.state.sale_history.back().quantity == 4);
}

TEST_CASE("property: fulfilment conserves stock and keeps quantities nonnegative") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int i = 0; i < 2000; ++i) {
    ChainAgentState s;
    s.stock_level = (rng() % 4 == 0) ? 0.0 : u(rng);
    s.backlog = (rng() % 3 == 0) ? 0.0 : u(rng);
    const double demand = (rng() % 5 == 0) ? 0.0 : u(rng);
    const auto r = fulfill_demand(s, demand, 0);
    CHECK(r.shipped <= s.stock_level);
    CHECK(r.state.stock_level >= 0.0);
    CHECK(r.state.backlog >= 0.0);
    CHECK(std::abs(r.state.stock_level - (s.stock_level - r.shipped)) <= 1e-12);
    CHECK(std::abs(r.state.backlog - (s.backlog + demand - r.shipped)) <= 1e-9);
    if (s.stock_level > 0 && s.backlog > 0) CHECK(r.state.backlog < s.backlog + demand);
    if (s.stock_level > 0 && s.backlog > 0 && demand == 0) CHECK(r.state.backlog < s.backlog);
  }
}

TEST_CASE("constant and step demand") {
  DemandProcess constant({DemandKind::Constant, 7, 0, 0, 0}, 1);
  CHECK(constant.next(0) == 7);
  CHECK(constant.next(100) == 7);
  DemandProcess step({DemandKind::Step, 7, 3, 10, 0}, 1);
  CHECK(step.next(9) == 7);
  CHECK(step.next(10) == 10);
  DemandProcess negative({DemandKind::Step, 2, -5, 1, 0}, 1);
  CHECK(negative.next(0) == 2);
  CHECK(negative.next(1) == 0);
}

TEST_CASE("seeded noise matches a direct Box-Muller draw") {
  // Oracle: the polar-free Box-Muller transform on the same engine, both outputs used.
  std::mt19937_64 engine(99);
  auto uniform = [&] { return (static_cast<double>(engine() >> 11) + 1.0) / 9007199254740992.0; };
  std::vector<double> expected;
  for (int i = 0; i < 50; ++i) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 2.0 * std::numbers::pi * uniform();
    expected.push_back(std::max(0.0, 10 + 2 * r * std::cos(a)));
    expected.push_back(std::max(0.0, 10 + 2 * r * std::sin(a)));
  }
  DemandProcess noise({DemandKind::SeededNoise, 10, 0, 0, 2}, 99);
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(noise.next((Tick)i) == expected[i]);
}

TEST_CASE("seeded noise has the requested moments and is never negative") {
  DemandProcess noise({DemandKind::SeededNoise, 10, 0, 0, 2}, 42);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double d = noise.next(i);
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(10).epsilon(0.005));
  CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(2).epsilon(0.01));

  DemandProcess wide({DemandKind::SeededNoise, 1, 0, 0, 5}, 1);
  for (int i = 0; i < 10000; ++i) CHECK(wide.next(i) >= 0.0);
}
