// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "acl_fixtures.hpp"
#include "scm/runner.hpp"

using namespace scm;
namespace fs = std::filesystem;

namespace {

const fs::path kReference = fs::path(SCM_SOURCE_DIR) / "scenarios/reference.json";

struct Outcome {
  bool pass = false;
  std::string detail;
};

ScenarioConfig reference(CoordinationMode mode = CoordinationMode::Decentralized) {
  auto c = load_scenario(kReference);
  c.mode = mode;
  return c;
}

// ---------------------------------------------------------------------------
// 1. select_best against an exact argmax over the attribute grid.

struct GridPoint {
  int price;  // 1..5
  int lead;   // 1..3
  int rel2;   // reliability * 2: 0, 1, 2
};

// Exact winner index: scores compared as integers after clearing denominators.
// Weights 0.5, 0.3, 0.2 become 5, 3, 2 (tenths); reliability halves add a factor 2.
std::size_t oracle_winner(const std::vector<GridPoint>& cohort,
                          const std::vector<std::string>& names) {
  int pmin = 99, pmax = -99, lmin = 99, lmax = -99;
  for (const auto& g : cohort) {
    pmin = std::min(pmin, g.price);
    pmax = std::max(pmax, g.price);
    lmin = std::min(lmin, g.lead);
    lmax = std::max(lmax, g.lead);
  }
  const long pd = pmax > pmin ? pmax - pmin : 1;
  const long ld = lmax > lmin ? lmax - lmin : 1;
  std::size_t best = 0;
  long best_score = -1;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const long pn = pmax > pmin ? pmax - cohort[i].price : 1;
    const long ln = lmax > lmin ? lmax - cohort[i].lead : 1;
    // 20 * pd * ld * score
    const long score = 10 * pn * ld + 6 * ln * pd + 2 * cohort[i].rel2 * pd * ld;
    if (score > best_score || (score == best_score && names[i] < names[best])) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

Outcome criterion_protocol_oracle() {
  std::vector<GridPoint> grid;
  for (int p = 1; p <= 5; ++p)
    for (int l = 1; l <= 3; ++l)
      for (int r = 0; r <= 2; ++r) grid.push_back({p, l, r});

  const ScoreWeights w{0.5, 0.3, 0.2};
  const std::vector<std::string> base_names = {"b0", "b1", "b2", "b3", "b4", "b5"};
  std::size_t cohorts = 0, mismatches = 0, ties = 0;
  std::vector<std::size_t> idx;
  std::vector<GridPoint> cohort;
  std::vector<std::string> names;
  std::vector<Proposal> proposals;

  // Multisets of size k as nondecreasing index sequences into the grid.
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t from) {
    if (idx.size() == k) {
      cohort.clear();
      names.clear();
      proposals.clear();
      // Rotate names so the smallest bidder is not always first in the cohort.
      const std::size_t shift = cohorts % k;
      for (std::size_t i = 0; i < k; ++i) {
        const auto& g = grid[idx[i]];
        cohort.push_back(g);
        names.push_back(base_names[(i + shift) % k]);
        proposals.push_back(Proposal{AgentId(names.back()), "item", 1.0,
                                     static_cast<double>(g.price), g.lead, g.rel2 / 2.0});
      }
      const auto expect = oracle_winner(cohort, names);
      const auto& got = select_best(proposals, w);
      if (got.bidder.str() != names[expect]) ++mismatches;
      for (std::size_t i = 1; i < k; ++i) {
        if (idx[i] == idx[i - 1]) {
          ++ties;
          break;
        }
      }
      ++cohorts;
      return;
    }
    for (std::size_t j = from; j < grid.size(); ++j) {
      idx.push_back(j);
      rec(k, j);
      idx.pop_back();
    }
  };
  for (std::size_t k = 1; k <= 6; ++k) rec(k, 0);

  return {mismatches == 0,
          fmt::format("{} cohorts of 1..6 proposals, {} with duplicated attribute tuples, "
                      "{} mismatches",
                      cohorts, ties, mismatches)};
}

// ---------------------------------------------------------------------------
// 2. Codec round trip and invariant fixtures.

Outcome criterion_codec() {
  std::mt19937_64 rng(20240601);
  std::size_t ok = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = testing::random_message(rng);
    try {
      if (decode(encode(m)) == m) ++ok;
    } catch (const std::exception&) {
    }
  }
  const auto fixtures = testing::invalid_wire_fixtures();
  std::size_t rejected = 0;
  for (const auto& f : fixtures) {
    try {
      decode(f.bytes);
    } catch (const Error& e) {
      if (e.kind() == f.expected_kind) ++rejected;
    }
  }
  return {ok == n && rejected == fixtures.size(),
          fmt::format("round trip {}/{}, fixtures rejected with the specified error {}/{}", ok, n,
                      rejected, fixtures.size())};
}

// ---------------------------------------------------------------------------
// 3. Conservation on the reference run.

Outcome criterion_conservation() {
  const auto config = reference();
  const auto run = simulate(config);
  constexpr double tol = 1e-9;
  std::map<std::string, const AgentSnapshot*> previous;
  std::map<std::string, double> inflow, outflow, first_stock, last_stock;
  std::size_t checks = 0, violations = 0, negatives = 0, pipeline = 0;
  double worst = 0.0;

  for (const auto& s : run.snapshots) {
    const double expected = s.stock_before + s.arrivals - s.shipped;
    worst = std::max(worst, std::abs(s.stock - expected));
    if (std::abs(s.stock - expected) > tol) ++violations;
    if (auto it = previous.find(s.agent); it != previous.end()) {
      if (std::abs(it->second->stock - s.stock_before) > tol) ++violations;
    } else {
      first_stock[s.agent] = s.stock_before;
    }
    if (s.stock < 0 || s.backlog < 0 || s.on_order < 0) ++negatives;
    if (std::abs(s.on_order - s.pipeline_books) > tol) ++pipeline;
    inflow[s.agent] += s.arrivals;
    outflow[s.agent] += s.shipped;
    last_stock[s.agent] = s.stock;
    previous[s.agent] = &s;
    ++checks;
  }
  for (const auto& [agent, start] : first_stock) {
    const double drift = (last_stock[agent] - start) - (inflow[agent] - outflow[agent]);
    if (std::abs(drift) > tol) ++violations;
  }
  const bool six_tiers = run.report.tiers.size() == 6;
  return {six_tiers && violations == 0 && negatives == 0 && pipeline == 0 && !run.aborted,
          fmt::format("{} agent-ticks, max per-tick error {:.3g}, {} balance violations, "
                      "{} negative observations, {} pipeline mismatches",
                      checks, worst, violations, negatives, pipeline)};
}

// ---------------------------------------------------------------------------
// 4. Bullwhip amplification.

Outcome criterion_bullwhip() {
  const auto config = reference();
  bool preconditions = config.demand.kind == DemandKind::SeededNoise &&
                       config.demand.mean == 10 && config.demand.sigma == 2 &&
                       config.seed == 42 && config.horizon == 500;
  for (const auto& a : config.agents) {
    preconditions = preconditions && a.policy.kind == PolicyKind::OrderUpTo &&
                    a.policy.window == 4 && a.policy.safety_factor == 1.0 && a.lead_time >= 2;
  }
  const auto run = simulate(config);
  std::map<Tier, double> ratio;
  bool all_defined = true;
  for (const auto& t : run.report.tiers) {
    if (t.bullwhip) {
      ratio[t.tier] = *t.bullwhip;
    } else {
      all_defined = false;
    }
  }
  bool at_least_one = all_defined && ratio.size() == 6;
  for (const auto& [_, r] : ratio) at_least_one = at_least_one && r >= 1.0;
  const double sale = ratio[Tier::Sale], dist = ratio[Tier::Distribution],
               prod = ratio[Tier::Production];
  const bool monotone = sale <= dist && dist <= prod;
  std::string listing;
  for (Tier t : kAllTiers) listing += fmt::format(" {}={:.3f}", tier_name(t), ratio[t]);
  return {preconditions && at_least_one && monotone,
          fmt::format("ratios{}; sale <= distribution <= production: {}", listing,
                      monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 5. Robustness asymmetry.

std::size_t orders_after(const RunResult& run, Tick tick) {
  std::size_t n = 0;
  for (const auto& r : run.log.records()) n += (r.kind == "order_placed" && r.tick > tick);
  return n;
}

double order_volume_after(const RunResult& run, Tick tick) {
  double v = 0;
  for (const auto& s : run.snapshots) v += s.tick > tick ? s.order_placed : 0.0;
  return v;
}

Outcome criterion_robustness() {
  constexpr Tick kill_tick = 250;

  auto central = reference(CoordinationMode::Centralized);
  const auto coordinator = central.effective_coordinator();
  central.failures = {{coordinator, kill_tick}};
  const auto central_run = simulate(central);
  const auto central_after = orders_after(central_run, kill_tick);
  const auto central_volume = order_volume_after(central_run, kill_tick);

  auto healthy = reference();
  auto killed = reference();
  std::vector<AgentId> producers;
  for (const auto& a : healthy.agents) {
    if (a.tier == Tier::Production) producers.push_back(a.id);
  }
  const AgentId victim = producers.front();
  killed.failures = {{victim, kill_tick}};
  const auto healthy_run = simulate(healthy);
  const auto killed_run = simulate(killed);
  const auto decentral_after = orders_after(killed_run, kill_tick);
  const double ratio = killed_run.report.fill_rate / healthy_run.report.fill_rate;

  const bool pass = producers.size() == 2 && victim == coordinator && central_after == 0 &&
                    central_volume == 0.0 && decentral_after > 0 && ratio >= 0.5;
  return {pass, fmt::format("centralized: coordinator {} killed, {} orders after tick {}; "
                            "decentralized: {} of {} producers killed, {} orders after, fill "
                            "rate {:.4f} vs {:.4f} without kill (ratio {:.3f})",
                            coordinator.str(), central_after, kill_tick, victim.str(),
                            producers.size(), decentral_after, killed_run.report.fill_rate,
                            healthy_run.report.fill_rate, ratio)};
}

// ---------------------------------------------------------------------------
// 6. Negotiation liveness and exclusivity.

Outcome criterion_negotiation() {
  const auto config = reference();
  const auto run = simulate(config);

  struct Track {
    Tick deadline = 0;
    std::optional<Tick> ended;
    std::string outcome;
    std::size_t accepts = 0, rejects = 0, admitted = 0, proposals_at_settle = 0;
    std::set<std::string> late_bidders;
    std::string seller;
  };
  std::map<std::string, Track> convs;
  std::size_t late = 0, double_ended = 0, orphan_events = 0;

  for (const auto& r : run.log.records()) {
    if (r.kind == "negotiation_opened") {
      convs[r.payload.at("conversation")].deadline = r.payload.at("deadline").get<Tick>();
      continue;
    }
    if (r.kind == "message_sent") {
      const auto perf = r.payload.at("performative").get<std::string>();
      if (perf != "ACCEPT_PROPOSAL" && perf != "REJECT_PROPOSAL") continue;
      auto it = convs.find(r.payload.at("conversation_id"));
      if (it == convs.end()) {
        ++orphan_events;
        continue;
      }
      (perf == "ACCEPT_PROPOSAL" ? it->second.accepts : it->second.rejects)++;
      continue;
    }
    const bool terminal = r.kind == "negotiation_settled" || r.kind == "negotiation_failed";
    if (!terminal && r.kind != "proposal_admitted" && r.kind != "proposal_rejected") continue;
    auto it = convs.find(r.payload.at("conversation"));
    if (it == convs.end()) {
      // no_supplier failures never open a round.
      if (r.kind != "negotiation_failed") ++orphan_events;
      continue;
    }
    auto& t = it->second;
    if (terminal) {
      if (t.ended) ++double_ended;
      t.ended = r.tick;
      t.outcome = r.kind;
      if (r.kind == "negotiation_settled") {
        t.proposals_at_settle = r.payload.at("proposals").get<std::size_t>();
        t.seller = r.payload.at("seller").get<std::string>();
      }
    } else if (r.kind == "proposal_admitted") {
      ++t.admitted;
    } else if (r.payload.contains("deadline") &&
               r.tick > r.payload.at("deadline").get<Tick>()) {
      t.late_bidders.insert(r.payload.at("bidder").get<std::string>());
      ++late;
    }
  }

  std::size_t settled = 0, failed = 0, open_at_horizon = 0, overdue = 0, bad_accepts = 0,
              mutated = 0;
  for (const auto& [id, t] : convs) {
    if (!t.ended) {
      if (t.deadline + 1 >= config.horizon) {
        ++open_at_horizon;
      } else {
        ++overdue;
      }
      continue;
    }
    if (*t.ended > t.deadline + 1) ++overdue;
    if (t.outcome == "negotiation_settled") {
      ++settled;
      if (t.accepts != 1 || t.accepts + t.rejects != t.proposals_at_settle) ++bad_accepts;
      if (t.proposals_at_settle != t.admitted || t.late_bidders.contains(t.seller)) ++mutated;
    } else {
      ++failed;
      if (t.accepts != 0) ++bad_accepts;
    }
  }
  const bool pass = overdue == 0 && double_ended == 0 && bad_accepts == 0 && mutated == 0 &&
                    orphan_events == 0 && late > 0 && settled > 0;
  return {pass, fmt::format("{} opened: {} settled, {} failed, {} still inside their window at "
                            "the horizon, {} overdue; {} bad accept counts; {} late proposals, "
                            "{} state mutations from them",
                            convs.size(), settled, failed, open_at_horizon, overdue,
                            bad_accepts, late, mutated)};
}

// ---------------------------------------------------------------------------
// 7. Mobile management token.

Outcome criterion_token() {
  const auto config = reference(CoordinationMode::MobileManaged);
  const auto run = simulate(config);
  const auto n = config.agents.size();
  const auto window = static_cast<std::size_t>(n * config.token_dwell);

  std::size_t bad_count = 0;
  for (const auto& s : run.token_samples) bad_count += (s.tokens != 1 || !s.holder);

  std::set<std::string> all;
  for (const auto& a : config.agents) all.insert(a.id.str());
  std::size_t windows = 0, incomplete = 0;
  const auto& samples = run.token_samples;
  for (std::size_t start = 0; start + window <= samples.size(); ++start) {
    std::set<std::string> seen;
    for (std::size_t i = start; i < start + window; ++i) {
      if (samples[i].holder) seen.insert(samples[i].holder->str());
    }
    ++windows;
    incomplete += (seen != all);
  }
  const bool pass = samples.size() == static_cast<std::size_t>(config.horizon) &&
                    bad_count == 0 && windows > 0 && incomplete == 0;
  return {pass, fmt::format("{} ticks sampled, {} with a token count other than 1; {} windows "
                            "of {} ticks, {} missing some agent",
                            samples.size(), bad_count, windows, window, incomplete)};
}

// ---------------------------------------------------------------------------
// 8. Determinism.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  const auto root = fs::temp_directory_path() / fmt::format("scm_acceptance_{}", ::getpid());
  fs::remove_all(root);
  const auto config = reference();
  const auto a = run(config, root / "a");
  const auto b = run(config, root / "b");
  std::size_t identical = 0;
  std::size_t bytes = 0;
  const std::pair<fs::path, fs::path> files[] = {
      {a.outputs.event_log, b.outputs.event_log},
      {a.outputs.snapshots, b.outputs.snapshots},
      {a.outputs.metrics_json, b.outputs.metrics_json}};
  for (const auto& [x, y] : files) {
    const auto bx = slurp(x);
    bytes += bx.size();
    identical += (!bx.empty() && bx == slurp(y));
  }
  fs::remove_all(root);
  return {identical == 3, fmt::format("{}/3 artifacts byte-identical ({} bytes compared)",
                                      identical, bytes)};
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {1, "protocol oracle equivalence", criterion_protocol_oracle},
      {2, "codec round trip", criterion_codec},
      {3, "conservation", criterion_conservation},
      {4, "bullwhip amplification", criterion_bullwhip},
      {5, "robustness asymmetry", criterion_robustness},
      {6, "negotiation liveness and exclusivity", criterion_negotiation},
      {7, "mobile token", criterion_token},
      {8, "determinism", criterion_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.2fs]\n", out.pass ? "PASS" : "FAIL", c.number,
                c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
