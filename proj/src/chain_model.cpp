#include "scm/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace scm {

namespace {

struct TierInfo {
  Tier tier;
  std::string_view name;
  std::string_view service_slug;
};

constexpr std::array<TierInfo, 6> kTierInfo = {{
    {Tier::RawMaterial, "raw_material", "raw"},
    {Tier::Storage, "storage", "storage"},
    {Tier::Transportation, "transportation", "transport"},
    {Tier::Production, "production", "production"},
    {Tier::Distribution, "distribution", "distribution"},
    {Tier::Sale, "sale", ""},
}};

const TierInfo& info(Tier tier) { return kTierInfo.at(static_cast<std::size_t>(tier)); }

}  // namespace

std::string_view tier_name(Tier tier) { return info(tier).name; }

std::optional<Tier> parse_tier(std::string_view name) {
  for (const auto& entry : kTierInfo) {
    if (entry.name == name) return entry.tier;
  }
  return std::nullopt;
}

std::optional<Tier> upstream_of(Tier tier) {
  if (tier == Tier::RawMaterial) return std::nullopt;
  return static_cast<Tier>(static_cast<int>(tier) - 1);
}

std::string supply_service(Tier tier) {
  const auto slug = info(tier).service_slug;
  if (slug.empty()) return {};
  return "supply:" + std::string(slug);
}

std::string required_service(Tier tier) {
  const auto up = upstream_of(tier);
  return up ? supply_service(*up) : std::string{};
}

std::string item_for_service(std::string_view service) {
  constexpr std::string_view prefix = "supply:";
  if (service.starts_with(prefix)) service.remove_prefix(prefix.size());
  return std::string(service);
}

double ChainAgentState::scheduled_quantity() const noexcept {
  return std::accumulate(delivery_schedule.begin(), delivery_schedule.end(), 0.0,
                         [](double acc, const ScheduledDelivery& d) { return acc + d.quantity; });
}

void ChainAgentState::schedule_delivery(Tick arrival_tick, double quantity) {
  auto pos = std::upper_bound(
      delivery_schedule.begin(), delivery_schedule.end(), arrival_tick,
      [](Tick t, const ScheduledDelivery& d) { return t < d.arrival_tick; });
  delivery_schedule.insert(pos, ScheduledDelivery{arrival_tick, quantity});
}

DemandProcess::DemandProcess(DemandParams params, std::uint64_t seed)
    : params_(params), rng_(seed) {}

double DemandProcess::standard_normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  auto uniform = [this] {
    // 53 random bits in (0, 1]; excludes 0 so the log below is finite.
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  };
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

double DemandProcess::next(Tick tick) {
  double value = params_.mean;
  switch (params_.kind) {
    case DemandKind::Constant:
      break;
    case DemandKind::Step:
      if (tick >= params_.step_tick) value += params_.amplitude;
      break;
    case DemandKind::SeededNoise:
      value += params_.sigma * standard_normal();
      break;
  }
  return std::max(0.0, value);
}

double forecast_demand(const std::vector<SaleRecord>& history, int window) {
  if (history.empty() || window <= 0) return 0.0;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(window), history.size());
  double sum = 0.0;
  for (auto it = history.end() - static_cast<std::ptrdiff_t>(count); it != history.end(); ++it) {
    sum += it->quantity;
  }
  return sum / static_cast<double>(count);
}

double order_up_to_level(double forecast, const ReplenishmentPolicy& policy, int lead_time) {
  if (policy.kind == PolicyKind::SafetyLeadTime) {
    return forecast * static_cast<double>(lead_time + policy.safety_lead_time + 1);
  }
  return forecast * static_cast<double>(lead_time + 1) + policy.safety_factor * forecast;
}

double compute_order_quantity(const ChainAgentState& state, const ReplenishmentPolicy& policy,
                              int lead_time) {
  const double target = order_up_to_level(state.demand_expectation, policy, lead_time);
  return std::max(0.0, target - state.inventory_position());
}

PipelineResult advance_pipeline(ChainAgentState state, Tick now) {
  double arrivals = 0.0;
  auto& schedule = state.delivery_schedule;
  auto first = std::find_if(schedule.begin(), schedule.end(),
                            [now](const ScheduledDelivery& d) { return d.arrival_tick == now; });
  auto last = std::find_if(first, schedule.end(),
                           [now](const ScheduledDelivery& d) { return d.arrival_tick != now; });
  for (auto it = first; it != last; ++it) arrivals += it->quantity;
  schedule.erase(first, last);
  state.stock_level += arrivals;
  state.on_order -= arrivals;
  // Pieces of one order may not sum bit-exactly to the booked quantity.
  if (state.on_order < 0.0 && state.on_order > -1e-9) state.on_order = 0.0;
  return {std::move(state), arrivals};
}

FulfillResult fulfill_demand(ChainAgentState state, double demand, Tick now) {
  const double backlog_before = state.backlog;
  const double shipped = std::min(state.stock_level, demand + backlog_before);
  state.stock_level -= shipped;
  state.backlog = backlog_before + demand - shipped;
  // Exact zero when everything was served, so float residue never leaves a phantom backlog.
  if (shipped == demand + backlog_before) state.backlog = 0.0;
  state.sale_history.push_back(SaleRecord{now, demand});
  const double on_time = std::min(demand, std::max(0.0, shipped - backlog_before));
  return {std::move(state), shipped, on_time};
}

}  // namespace scm
