#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "scm/core.hpp"

namespace scm {

/// Chain tiers, ordered upstream to downstream.
enum class Tier : int {
  RawMaterial = 0,
  Storage,
  Transportation,
  Production,
  Distribution,
  Sale,
};

inline constexpr std::array<Tier, 6> kAllTiers = {Tier::RawMaterial,    Tier::Storage,
                                                  Tier::Transportation, Tier::Production,
                                                  Tier::Distribution,   Tier::Sale};

/// Config/JSON name, e.g. "raw_material".
std::string_view tier_name(Tier tier);
std::optional<Tier> parse_tier(std::string_view name);

/// Tier one step upstream; nullopt for RawMaterial.
std::optional<Tier> upstream_of(Tier tier);

/// Service a tier offers to its downstream neighbour ("supply:raw", ...).
/// Sale has no downstream and returns an empty string.
std::string supply_service(Tier tier);

/// Service an agent of `tier` must find in the directory to procure stock.
/// Empty for RawMaterial, which replenishes from an external source.
std::string required_service(Tier tier);

/// Item name carried in calls for bids for a service ("supply:raw" -> "raw").
std::string item_for_service(std::string_view service);

struct SaleRecord {
  Tick tick = 0;
  double quantity = 0.0;
  friend bool operator==(const SaleRecord&, const SaleRecord&) = default;
};

struct ScheduledDelivery {
  Tick arrival_tick = 0;
  double quantity = 0.0;
  friend bool operator==(const ScheduledDelivery&, const ScheduledDelivery&) = default;
};

/// Per-agent inventory state: stock level, sale data, demand expectation and
/// delivery schedule, plus the backlog and on-order bookkeeping the policies need.
struct ChainAgentState {
  double stock_level = 0.0;
  double backlog = 0.0;
  /// Scheduled deliveries plus awarded-but-unshipped quantities.
  double on_order = 0.0;
  std::vector<SaleRecord> sale_history;
  double demand_expectation = 0.0;
  /// Sorted by arrival_tick; equal ticks keep insertion order.
  std::vector<ScheduledDelivery> delivery_schedule;

  double inventory_position() const noexcept { return stock_level - backlog + on_order; }
  double scheduled_quantity() const noexcept;

  /// Inserts keeping the schedule sorted.
  void schedule_delivery(Tick arrival_tick, double quantity);

  friend bool operator==(const ChainAgentState&, const ChainAgentState&) = default;
};

enum class PolicyKind { OrderUpTo, SafetyLeadTime };

struct ReplenishmentPolicy {
  PolicyKind kind = PolicyKind::OrderUpTo;
  int window = 4;
  double safety_factor = 1.0;
  int safety_lead_time = 0;
};

enum class DemandKind { Constant, Step, SeededNoise };

struct DemandParams {
  DemandKind kind = DemandKind::Constant;
  double mean = 0.0;
  /// Step size for Step demand.
  double amplitude = 0.0;
  Tick step_tick = 0;
  double sigma = 0.0;
};

/// External consumer demand. SeededNoise draws N(mean, sigma) via Box-Muller on
/// mt19937_64 so the stream is identical on every standard library.
class DemandProcess {
public:
  DemandProcess(DemandParams params, std::uint64_t seed);

  /// Demand at `tick`; never negative. Must be called once per tick per stream.
  double next(Tick tick);

  const DemandParams& params() const noexcept { return params_; }

private:
  double standard_normal();

  DemandParams params_;
  std::mt19937_64 rng_;
  std::optional<double> spare_;
};

/// Moving average of the most recent min(window, |history|) quantities; 0 if empty.
double forecast_demand(const std::vector<SaleRecord>& history, int window);

/// Order-up-to target S = F(L+1) + sF against position P = stock - backlog + on_order;
/// returns max(0, S - P). SafetyLeadTime plans over L + Ls with no safety stock.
double compute_order_quantity(const ChainAgentState& state, const ReplenishmentPolicy& policy,
                              int lead_time);

/// Target level S used by compute_order_quantity.
double order_up_to_level(double forecast, const ReplenishmentPolicy& policy, int lead_time);

struct PipelineResult {
  ChainAgentState state;
  double arrivals = 0.0;
};

PipelineResult advance_pipeline(ChainAgentState state, Tick now);

struct FulfillResult {
  ChainAgentState state;
  double shipped = 0.0;
  /// Part of `shipped` that served this tick's demand rather than old backlog.
  double shipped_on_time = 0.0;
};

/// Backlog is served before new demand; (now, demand) is appended to sale_history.
FulfillResult fulfill_demand(ChainAgentState state, double demand, Tick now);

}  // namespace scm
