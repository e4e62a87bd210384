#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "scm/coordination.hpp"
#include "scm/metrics.hpp"
#include "scm/scenario.hpp"
#include "scm/simulation.hpp"

namespace scm {

struct RunOutputs {
  std::filesystem::path event_log;
  std::filesystem::path snapshots;
  std::filesystem::path metrics_json;
  std::filesystem::path metrics_csv;
  std::filesystem::path deals;
};

std::string deals_to_csv(std::span<const Deal> deals);

/// Writes every artifact of `result` into `dir` (created if missing). Each file is
/// written to a temporary name and renamed into place.
RunOutputs write_outputs(const RunResult& result, const std::filesystem::path& dir);

struct RunReport {
  RunResult result;
  RunOutputs outputs;
};

/// simulate + write_outputs.
RunReport run(const ScenarioConfig& config, const std::filesystem::path& dir);

struct Comparison {
  std::vector<CoordinationMode> modes;
  std::vector<RunResult> runs;

  /// Metric rows by mode columns, as aligned text.
  std::string to_text() const;
  std::string to_csv() const;
};

/// Runs the same config and seed once per mode (concurrently). Needs >= 2 modes.
Comparison compare(const ScenarioConfig& config, std::span<const CoordinationMode> modes);

}  // namespace scm
