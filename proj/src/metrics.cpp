#include "scm/metrics.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace scm {

SeriesStats series_stats(std::span<const double> series) {
  if (series.empty()) throw SeriesTooShort("statistics of an empty series");
  SeriesStats s;
  s.n = series.size();
  for (double v : series) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  for (double v : series) s.variance += (v - s.mean) * (v - s.mean);
  s.variance /= static_cast<double>(s.n);
  return s;
}

std::optional<double> bullwhip_ratio(std::span<const double> orders,
                                     std::span<const double> demand) {
  if (orders.size() != demand.size()) {
    throw LengthMismatch("orders has " + std::to_string(orders.size()) + " samples, demand " +
                         std::to_string(demand.size()));
  }
  if (demand.size() < 2) throw SeriesTooShort("bullwhip ratio needs at least 2 samples");
  const double demand_var = series_stats(demand).variance;
  if (demand_var == 0.0) return std::nullopt;
  return series_stats(orders).variance / demand_var;
}

std::int64_t MetricsReport::total_messages() const {
  std::int64_t total = 0;
  for (const auto& [_, n] : messages_sent) total += n;
  return total;
}

double MetricsReport::max_message_share() const {
  const auto total = total_messages();
  if (total == 0) return 0.0;
  std::int64_t top = 0;
  for (const auto& [_, n] : messages_sent) top = std::max(top, n);
  return static_cast<double>(top) / static_cast<double>(total);
}

MetricsReport MetricsReport::vacuous() { return MetricsReport{}; }

MetricsReport compile_report(const EventLog& log, std::span<const AgentSnapshot> snapshots,
                             const CostParams& costs) {
  if (snapshots.empty()) throw EmptyLog("no snapshots to report on");

  MetricsReport report;
  const auto [lo, hi] = std::minmax_element(
      snapshots.begin(), snapshots.end(),
      [](const AgentSnapshot& a, const AgentSnapshot& b) { return a.tick < b.tick; });
  const Tick first_tick = lo->tick;
  const auto ticks = static_cast<std::size_t>(hi->tick - first_tick + 1);

  struct TierSeries {
    std::vector<double> orders;
    std::vector<double> demand;
    double on_time = 0.0;
  };
  std::map<Tier, TierSeries> series;

  double stock_sum = 0.0;
  double backlog_sum = 0.0;
  for (const auto& s : snapshots) {
    auto& ts = series[s.tier];
    if (ts.orders.empty()) {
      ts.orders.assign(ticks, 0.0);
      ts.demand.assign(ticks, 0.0);
    }
    const auto i = static_cast<std::size_t>(s.tick - first_tick);
    ts.orders[i] += s.order_placed;
    ts.demand[i] += s.demand_seen;
    ts.on_time += s.shipped_on_time;
    stock_sum += s.stock;
    backlog_sum += s.backlog;
  }

  const auto rows = static_cast<double>(snapshots.size());
  report.avg_inventory = stock_sum / rows;
  report.avg_backlog = backlog_sum / rows;
  report.holding_cost = costs.holding * stock_sum;
  report.backlog_cost = costs.backlog * backlog_sum;
  report.total_cost = report.holding_cost + report.backlog_cost;

  for (const auto& [tier, ts] : series) {
    TierMetrics tm;
    tm.tier = tier;
    for (double v : ts.demand) tm.demand_total += v;
    for (double v : ts.orders) tm.orders_total += v;
    tm.fill_rate = tm.demand_total > 0.0 ? ts.on_time / tm.demand_total : 1.0;
    if (ticks >= 2) tm.bullwhip = bullwhip_ratio(ts.orders, ts.demand);
    if (tier == Tier::Sale) report.fill_rate = tm.fill_rate;
    report.tiers.push_back(tm);
  }

  for (const auto& s : snapshots) report.messages_sent.try_emplace(s.agent, 0);
  for (const auto& record : log.records()) {
    if (record.kind == "message_sent") {
      ++report.messages_sent[record.agent];
    } else if (record.kind == "negotiation_settled") {
      ++report.negotiations_settled;
    } else if (record.kind == "negotiation_failed") {
      ++report.negotiations_failed;
    } else if (record.kind == "order_placed") {
      ++report.orders_issued;
    }
  }
  return report;
}

nlohmann::json report_to_json(const MetricsReport& report) {
  using nlohmann::json;
  json tiers = json::array();
  for (const auto& t : report.tiers) {
    tiers.push_back({{"tier", std::string(tier_name(t.tier))},
                     {"bullwhip_ratio", t.bullwhip ? json(*t.bullwhip) : json(nullptr)},
                     {"fill_rate", t.fill_rate},
                     {"demand_total", t.demand_total},
                     {"orders_total", t.orders_total}});
  }
  json messages = json::object();
  for (const auto& [agent, n] : report.messages_sent) messages[agent] = n;
  return {{"tiers", tiers},
          {"fill_rate", report.fill_rate},
          {"avg_inventory", report.avg_inventory},
          {"avg_backlog", report.avg_backlog},
          {"holding_cost", report.holding_cost},
          {"backlog_cost", report.backlog_cost},
          {"total_cost", report.total_cost},
          {"messages_sent", messages},
          {"negotiations", {{"settled", report.negotiations_settled},
                            {"failed", report.negotiations_failed}}},
          {"orders_issued", report.orders_issued}};
}

std::string format_number(double value) { return fmt::format("{}", value); }

std::string report_to_csv(const MetricsReport& report) {
  std::string out = "scope,metric,value\n";
  auto row = [&](std::string_view scope, std::string_view metric, const std::string& value) {
    out += fmt::format("{},{},{}\n", scope, metric, value);
  };
  for (const auto& t : report.tiers) {
    const auto scope = fmt::format("tier:{}", tier_name(t.tier));
    row(scope, "bullwhip_ratio", t.bullwhip ? format_number(*t.bullwhip) : "undefined");
    row(scope, "fill_rate", format_number(t.fill_rate));
    row(scope, "demand_total", format_number(t.demand_total));
    row(scope, "orders_total", format_number(t.orders_total));
  }
  row("chain", "fill_rate", format_number(report.fill_rate));
  row("chain", "avg_inventory", format_number(report.avg_inventory));
  row("chain", "avg_backlog", format_number(report.avg_backlog));
  row("chain", "holding_cost", format_number(report.holding_cost));
  row("chain", "backlog_cost", format_number(report.backlog_cost));
  row("chain", "total_cost", format_number(report.total_cost));
  row("chain", "negotiations_settled", std::to_string(report.negotiations_settled));
  row("chain", "negotiations_failed", std::to_string(report.negotiations_failed));
  row("chain", "orders_issued", std::to_string(report.orders_issued));
  for (const auto& [agent, n] : report.messages_sent) {
    row(fmt::format("agent:{}", agent), "messages_sent", std::to_string(n));
  }
  return out;
}

std::string snapshots_to_csv(std::span<const AgentSnapshot> snapshots) {
  std::string out = "tick,agent,tier,stock,backlog,on_order,demand_seen,order_placed,messages_sent\n";
  for (const auto& s : snapshots) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", s.tick, s.agent, tier_name(s.tier),
                       format_number(s.stock), format_number(s.backlog),
                       format_number(s.on_order), format_number(s.demand_seen),
                       format_number(s.order_placed), s.messages_sent);
  }
  return out;
}

}  // namespace scm
