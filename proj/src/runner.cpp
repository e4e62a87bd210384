#include "scm/runner.hpp"

#include <fstream>
#include <future>

#include <fmt/format.h>

namespace scm {

namespace fs = std::filesystem;

namespace {

void write_atomically(const fs::path& target, const std::string& bytes) {
  fs::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + temp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to '" + temp.string() + "'");
  }
  fs::rename(temp, target);
}

struct MetricRow {
  std::string name;
  std::vector<std::string> values;
};

std::vector<MetricRow> comparison_rows(const std::vector<RunResult>& runs) {
  std::vector<MetricRow> rows;
  auto add = [&](std::string name, auto&& extract) {
    MetricRow row{std::move(name), {}};
    for (const auto& run : runs) row.values.push_back(extract(run.report));
    rows.push_back(std::move(row));
  };
  auto num = [](double v) { return format_number(v); };

  add("fill_rate", [&](const MetricsReport& r) { return num(r.fill_rate); });
  add("avg_inventory", [&](const MetricsReport& r) { return num(r.avg_inventory); });
  add("avg_backlog", [&](const MetricsReport& r) { return num(r.avg_backlog); });
  add("holding_cost", [&](const MetricsReport& r) { return num(r.holding_cost); });
  add("backlog_cost", [&](const MetricsReport& r) { return num(r.backlog_cost); });
  add("total_cost", [&](const MetricsReport& r) { return num(r.total_cost); });
  add("orders_issued", [](const MetricsReport& r) { return std::to_string(r.orders_issued); });
  add("negotiations_settled",
      [](const MetricsReport& r) { return std::to_string(r.negotiations_settled); });
  add("negotiations_failed",
      [](const MetricsReport& r) { return std::to_string(r.negotiations_failed); });
  add("messages_total", [](const MetricsReport& r) { return std::to_string(r.total_messages()); });
  add("max_message_share", [&](const MetricsReport& r) { return num(r.max_message_share()); });
  for (Tier tier : kAllTiers) {
    add(fmt::format("bullwhip:{}", tier_name(tier)), [&](const MetricsReport& r) {
      for (const auto& t : r.tiers) {
        if (t.tier == tier) return t.bullwhip ? num(*t.bullwhip) : std::string("undefined");
      }
      return std::string("undefined");
    });
    add(fmt::format("fill_rate:{}", tier_name(tier)), [&](const MetricsReport& r) {
      for (const auto& t : r.tiers) {
        if (t.tier == tier) return num(t.fill_rate);
      }
      return num(1.0);
    });
  }
  return rows;
}

}  // namespace

std::string deals_to_csv(std::span<const Deal> deals) {
  std::string out =
      "conversation_id,buyer,seller,item,quantity,unit_price,value,promised_delivery,settled_at\n";
  for (const auto& d : deals) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", d.conversation_id, d.buyer.str(),
                       d.seller.str(), d.item, format_number(d.quantity),
                       format_number(d.unit_price), format_number(d.value()),
                       d.promised_delivery, d.settled_at);
  }
  return out;
}

RunOutputs write_outputs(const RunResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  RunOutputs out{dir / "events.jsonl", dir / "snapshots.csv", dir / "metrics.json",
                 dir / "metrics.csv", dir / "deals.csv"};
  write_atomically(out.event_log, result.log.to_jsonl());
  write_atomically(out.snapshots, snapshots_to_csv(result.snapshots));
  write_atomically(out.metrics_json, report_to_json(result.report).dump(2) + "\n");
  write_atomically(out.metrics_csv, report_to_csv(result.report));
  write_atomically(out.deals, deals_to_csv(result.deals));
  return out;
}

RunReport run(const ScenarioConfig& config, const fs::path& dir) {
  RunReport report{simulate(config), {}};
  report.outputs = write_outputs(report.result, dir);
  return report;
}

Comparison compare(const ScenarioConfig& config, std::span<const CoordinationMode> modes) {
  if (modes.size() < 2) throw std::invalid_argument("compare needs at least two modes");
  std::vector<std::future<RunResult>> pending;
  for (auto mode : modes) {
    ScenarioConfig variant = config;
    variant.mode = mode;
    pending.push_back(std::async(std::launch::async,
                                 [v = std::move(variant)] { return simulate(v); }));
  }
  Comparison out;
  out.modes.assign(modes.begin(), modes.end());
  for (auto& f : pending) out.runs.push_back(f.get());
  return out;
}

std::string Comparison::to_text() const {
  const auto rows = comparison_rows(runs);
  std::size_t name_width = std::string_view("metric").size();
  std::size_t col_width = 0;
  for (const auto& row : rows) {
    name_width = std::max(name_width, row.name.size());
    for (const auto& v : row.values) col_width = std::max(col_width, v.size());
  }
  for (auto m : modes) col_width = std::max(col_width, mode_name(m).size());

  std::string out = fmt::format("{:<{}}", "metric", name_width);
  for (auto m : modes) out += fmt::format("  {:>{}}", mode_name(m), col_width);
  out += '\n';
  for (const auto& row : rows) {
    out += fmt::format("{:<{}}", row.name, name_width);
    for (const auto& v : row.values) out += fmt::format("  {:>{}}", v, col_width);
    out += '\n';
  }
  return out;
}

std::string Comparison::to_csv() const {
  std::string out = "metric";
  for (auto m : modes) out += fmt::format(",{}", mode_name(m));
  out += '\n';
  for (const auto& row : comparison_rows(runs)) {
    out += row.name;
    for (const auto& v : row.values) out += "," + v;
    out += '\n';
  }
  return out;
}

}  // namespace scm
