#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "echelon/agents.hpp"
#include "echelon/backend.hpp"
#include "echelon/optimal.hpp"
#include "echelon/scenario.hpp"

namespace echelon {

// Scenarios ------------------------------------------------------------------------

/// const-uni, dec-div, dec-uni, inc-div, inc-uni.
const std::vector<std::string>& builtin_scenario_names();
std::optional<ScenarioSpec> builtin_scenario(const std::string& name);

/// A built-in name, or a path to a scenario JSON file:
///   {"name": "...", "num_periods": 12, "lead_times": [...], "prod_capacities": [...],
///    "init_inventories": [...], "sale_prices": [...], "order_costs": [...],
///    "backlog_costs": [...], "holding_costs": [...],
///    "demand": {"kind": "constant", "value": 4} | {"kind": "increasing"} |
///              {"kind": "decreasing"} | {"kind": "explicit", "values": [...]}}
/// Throws ConfigError for unknown names and malformed files.
ScenarioSpec load_scenario(const std::string& name_or_path);
std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const std::string& text, const std::string& origin = "<string>");
void save_scenario(const ScenarioSpec& spec, const std::string& path);

/// Stable 64-bit hex digest of the canonical scenario JSON (name excluded).
std::string scenario_fingerprint(const ScenarioSpec& spec);

// Metrics --------------------------------------------------------------------------

/// |(opt - r) / opt| in percent, rounded to two decimals. Throws MetricError when opt = 0.
double relative_gap(Money opt, Money r);

struct Summary {
  double mean = 0;
  double stddev = 0;  // population standard deviation
};
Summary summarize(const std::vector<Money>& values);

// Optimum cache --------------------------------------------------------------------

struct OptEntry {
  std::string scenario;
  std::string fingerprint;
  Money opt = 0;
  OrderSchedule schedule;
};

/// Optimal values keyed by scenario fingerprint. Entries are re-certified on lookup: an
/// entry whose schedule does not evaluate to its recorded value is ignored, and
/// get_or_solve replaces it (counted by dropped()).
class OptCache {
 public:
  OptCache() = default;
  static OptCache load(const std::string& path);
  void save(const std::string& path) const;

  /// Cached entry, or solve() now (and remember the result when it is proven optimal).
  std::optional<OptEntry> lookup(const ScenarioSpec& spec) const;
  OptEntry get_or_solve(const ScenarioSpec& spec, const SolveBudget& budget = {});
  void put(OptEntry e);
  std::size_t size() const { return entries_.size(); }
  std::size_t dropped() const { return dropped_; }

 private:
  std::map<std::string, OptEntry> entries_;
  std::size_t dropped_ = 0;
};

/// data/opt_cache.json inside the source tree.
std::string default_opt_cache_path();

// Experiments ----------------------------------------------------------------------

enum class AgentKind {
  invagent_step,     // decision prompt + step description
  invagent_step_ss,  // + safety-stock strategy
  aim_rm,            // memory filled during the episode only
  aim_rm_log,        // memory preloaded from a rollout log, with usage instructions
  base_stock,
  tracking_demand,
  safety_stock,
  optimal_replay,
};

std::string to_string(AgentKind k);
AgentKind agent_kind_from_string(const std::string& s);
bool uses_language_model(AgentKind k);

struct RunConfig {
  std::string scenario = "const-uni";
  AgentKind agent = AgentKind::safety_stock;
  int episodes = 5;
  bool force_episodes = false;  // run all N even when the configuration is deterministic
  std::size_t k = 6;
  double tau = 2.0;
  BackendConfig backend;
  /// Decides for the language-model agents instead of a backend built from `backend`.
  std::shared_ptr<const DecisionBackend> custom_backend;
  std::optional<std::string> memory_log;     // aim-rm-log
  bool strict_log = false;
  std::optional<std::string> schedule_path;  // optimal-replay; solved when absent
  std::optional<std::string> prompt_dir;
  std::string out_dir;                       // empty: nothing is written
  std::optional<std::string> opt_cache_path;
  int parallel = 1;
  std::uint64_t seed = 0;                    // reserved, nothing is random yet
};

/// Throws ConfigError on N < 1, K < 0, tau < 0, missing log for aim-rm-log, or a remote
/// backend paired with a fixed policy.
void validate(const RunConfig& cfg);

struct EpisodeSummary {
  int episode = 0;
  Money total = 0;
  std::vector<Money> stage_rewards;
  std::size_t fallbacks = 0;
  RetrievalStats retrieval;
};

struct MetricsReport {
  std::string scenario;
  std::string agent;
  std::string backend;
  int episodes_requested = 0;
  std::vector<EpisodeSummary> episodes;
  std::vector<EnvState> traces;  // per episode, same order
  ScenarioSpec spec;
  double mean = 0;
  double stddev = 0;
  std::optional<Money> opt;
  std::optional<double> gap_percent;
  std::size_t memory_preloaded = 0;
  std::size_t log_lines_rejected = 0;

  std::vector<Money> totals() const;
};

/// Runs the episodes (in parallel up to cfg.parallel), aggregates, compares with the
/// optimum and writes, under cfg.out_dir: traces/episode_<i>.csv, transcripts.jsonl,
/// report.json and the series CSVs. When an episode throws, the completed episodes are
/// still written, report.json gets "status": "failed", a FAILED marker file holds the
/// message, and the exception is rethrown.
MetricsReport run_experiment(const RunConfig& cfg);

std::string report_to_json(const MetricsReport& report);

/// Rolls out `backend` on the scenario and writes one memory-log line per (stage,
/// period), tagged as rl_log. Returns the number of records.
std::size_t record_rollout_log(const ScenarioSpec& spec, const DecisionBackend& backend, const std::string& path,
                               int episodes = 1);

/// inventory.csv, backlog.csv, orders.csv and cumulative_relative_reward.csv for one
/// episode: columns period, stage_0..stage_{M-1}, demand, starting with period 0. The
/// reward panel divides cumulative rewards by Opt and adds a total column; it is
/// skipped when Opt is unknown or zero.
std::vector<std::string> emit_series(const MetricsReport& report, const std::string& dir, int episode = 0);

struct TraceEvaluation {
  std::vector<Money> totals;
  double mean = 0;
  double stddev = 0;
  std::optional<Money> opt;
  std::optional<double> gap_percent;
  std::optional<bool> matches_report;  // set when report.json is present
};

/// Recomputes the metrics of a run directory from traces/episode_*.csv alone and
/// cross-checks report.json when present.
TraceEvaluation evaluate_traces(const std::string& dir);

/// Reads the P column of a trace CSV and sums it.
Money trace_total(const std::string& csv_path);

}  // namespace echelon
