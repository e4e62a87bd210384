// Command-line driver: simulate, compare and validate scenarios.
//
//   scm_sim simulate <scenario.json> [--out DIR]
//   scm_sim compare  <scenario.json> --modes centralized,decentralized,mobile [--out DIR]
//   scm_sim validate <scenario.json>
//
// Exit codes: 0 success, 2 validation/parse error, 3 runtime abort.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "scm/runner.hpp"
#include "scm/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("scm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("SCM_LOG_LEVEL");
  const std::string wanted = level ? level : "info";
  if (wanted == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (wanted == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    if (wanted != "info") spdlog::warn("unknown SCM_LOG_LEVEL '{}', using info", wanted);
    spdlog::set_level(spdlog::level::info);
  }
}

int simulate_command(const std::string& path, const std::string& out_dir) {
  const auto config = scm::load_scenario(path);
  spdlog::info("simulating {} ({} agents, horizon {}, mode {})", path, config.agents.size(),
               config.horizon, scm::mode_name(config.mode));
  const auto report = scm::run(config, out_dir);
  spdlog::debug("{} events, {} snapshots, {} deals", report.result.log.size(),
                report.result.snapshots.size(), report.result.deals.size());
  spdlog::info("wrote {}", report.outputs.event_log.parent_path().string());
  if (report.result.aborted) {
    spdlog::error("run aborted: {}", *report.result.aborted);
    return kExitRuntime;
  }
  std::cout << scm::report_to_json(report.result.report).dump(2) << '\n';
  return kExitOk;
}

int compare_command(const std::string& path, const std::vector<std::string>& mode_names,
                    const std::string& out_dir) {
  auto config = scm::load_scenario(path);
  std::vector<scm::CoordinationMode> modes;
  for (const auto& name : mode_names) {
    const auto mode = scm::parse_mode(name);
    if (!mode) throw scm::ValidationError("--modes: unknown mode '" + name + "'");
    modes.push_back(*mode);
  }
  if (modes.size() < 2) throw scm::ValidationError("--modes: at least two modes are required");

  const auto comparison = scm::compare(config, modes);
  for (std::size_t i = 0; i < comparison.runs.size(); ++i) {
    const auto& run = comparison.runs[i];
    if (run.aborted) {
      spdlog::error("{} run aborted: {}", scm::mode_name(modes[i]), *run.aborted);
      return kExitRuntime;
    }
  }
  std::cout << comparison.to_text();
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < comparison.runs.size(); ++i) {
      const auto dir = std::filesystem::path(out_dir) /
                       fmt::format("{}-{}", i, scm::mode_name(modes[i]));
      scm::write_outputs(comparison.runs[i], dir);
    }
    std::ofstream(std::filesystem::path(out_dir) / "compare.csv", std::ios::binary)
        << comparison.to_csv();
    spdlog::info("wrote {}", out_dir);
  }
  return kExitOk;
}

int validate_command(const std::string& path) {
  const auto config = scm::load_scenario(path);
  std::cout << "ok: " << config.agents.size() << " agents, horizon " << config.horizon
            << ", mode " << scm::mode_name(config.mode) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Multi-agent supply-chain simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir = "out";
  std::vector<std::string> modes;

  auto* simulate = app.add_subcommand("simulate", "Run one scenario and write its outputs");
  simulate->add_option("scenario", scenario, "Scenario JSON file")->required();
  simulate->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Run a scenario under several coordination modes");
  compare->add_option("scenario", scenario, "Scenario JSON file")->required();
  compare->add_option("--modes", modes, "Comma separated: centralized,decentralized,mobile")
      ->required()
      ->delimiter(',');
  compare->add_option("--out", compare_out, "Directory for per-mode outputs and compare.csv");

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", scenario, "Scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return simulate_command(scenario, out_dir);
    if (compare->parsed()) return compare_command(scenario, modes, compare_out);
    return validate_command(scenario);
  } catch (const scm::ParseError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const scm::ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}
