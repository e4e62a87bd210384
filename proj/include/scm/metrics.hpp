#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scm/chain_model.hpp"
#include "scm/runtime.hpp"

namespace scm {

/// Population statistics (denominator n).
struct SeriesStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Throws SeriesTooShort on an empty series.
SeriesStats series_stats(std::span<const double> series);

/// Var(orders) / Var(demand); nullopt when demand has zero variance.
/// Throws LengthMismatch or SeriesTooShort (fewer than 2 samples).
std::optional<double> bullwhip_ratio(std::span<const double> orders,
                                     std::span<const double> demand);

/// End-of-tick observation of one live agent.
struct AgentSnapshot {
  Tick tick = 0;
  std::string agent;
  Tier tier = Tier::Sale;
  double stock = 0.0;
  double backlog = 0.0;
  double on_order = 0.0;
  /// New demand observed this tick: customer demand at Sale, orders received elsewhere.
  double demand_seen = 0.0;
  double order_placed = 0.0;
  std::int64_t messages_sent = 0;
  // Not part of the CSV; used for conservation checks and fill rates.
  double stock_before = 0.0;
  double arrivals = 0.0;
  double shipped = 0.0;
  double shipped_on_time = 0.0;
  /// Scheduled deliveries plus awarded-but-unshipped quantity, from the agent's books.
  double pipeline_books = 0.0;
};

struct CostParams {
  double holding = 1.0;
  double backlog = 1.0;
};

struct TierMetrics {
  Tier tier = Tier::Sale;
  std::optional<double> bullwhip;
  double fill_rate = 1.0;
  double demand_total = 0.0;
  double orders_total = 0.0;
};

struct MetricsReport {
  /// Upstream to downstream; only tiers present in the snapshots.
  std::vector<TierMetrics> tiers;
  /// Customer-facing: Sale-tier on-time shipments over customer demand; 1 if no demand.
  double fill_rate = 1.0;
  /// Per agent-tick.
  double avg_inventory = 0.0;
  double avg_backlog = 0.0;
  double holding_cost = 0.0;
  double backlog_cost = 0.0;
  double total_cost = 0.0;
  std::map<std::string, std::int64_t> messages_sent;
  std::int64_t negotiations_settled = 0;
  std::int64_t negotiations_failed = 0;
  std::int64_t orders_issued = 0;

  std::int64_t total_messages() const;
  /// Largest single-agent fraction of all messages; 0 when nothing was sent.
  double max_message_share() const;

  /// Report for a run that never ticked: no demand, nothing stocked.
  static MetricsReport vacuous();
};

/// Throws EmptyLog when there are no snapshots.
MetricsReport compile_report(const EventLog& log, std::span<const AgentSnapshot> snapshots,
                             const CostParams& costs);

nlohmann::json report_to_json(const MetricsReport& report);

/// Rows "scope,metric,value"; one per tier metric plus the chain-wide figures.
std::string report_to_csv(const MetricsReport& report);

/// Header + one row per snapshot, columns tick..messages_sent.
std::string snapshots_to_csv(std::span<const AgentSnapshot> snapshots);

/// Shortest round-trip decimal for a double; used for every CSV number.
std::string format_number(double value);

}  // namespace scm
