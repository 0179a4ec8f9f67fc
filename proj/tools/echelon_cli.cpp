#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>

#include <CLI11.hpp>

#include "echelon/errors.hpp"
#include "echelon/harness.hpp"
#include "echelon/optimal.hpp"

using namespace echelon;

namespace {

BackendConfig parse_backend(const std::string& spec) {
  BackendConfig cfg;
  if (spec == "remote") {
    cfg.kind = BackendConfig::Kind::remote;
    return cfg;
  }
  const std::string prefix = "scripted:";
  if (spec.rfind(prefix, 0) == 0) {
    cfg.kind = BackendConfig::Kind::scripted;
    cfg.policy.kind = policy_kind_from_string(spec.substr(prefix.size()));
    return cfg;
  }
  if (spec == "scripted") return cfg;
  throw ConfigError("backend must be 'remote' or 'scripted:<policy>', got '" + spec + "'");
}

/// "5000" is a node budget, "30s" / "2m" / "500ms" a wall-clock budget.
SolveBudget parse_budget(const std::string& text) {
  SolveBudget b;
  if (text.empty()) return b;
  static const std::regex re(R"(^(\d+)(ms|s|m)?$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("budget must look like 100000, 30s, 2m or 500ms");
  const long long v = std::stoll(m[1].str());
  const std::string unit = m[2].str();
  if (unit.empty()) {
    b.max_nodes = static_cast<std::uint64_t>(v);
  } else if (unit == "ms") {
    b.max_time = std::chrono::milliseconds(v);
  } else if (unit == "s") {
    b.max_time = std::chrono::milliseconds(v * 1000);
  } else {
    b.max_time = std::chrono::milliseconds(v * 60000);
  }
  return b;
}

std::string money(Money x) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2) << x;
  return o.str();
}

void print_report(const MetricsReport& r) {
  std::cout << "scenario " << r.scenario << ", agent " << r.agent << " (" << r.backend << ")\n";
  std::cout << "episodes run " << r.episodes.size() << " of " << r.episodes_requested << "\n";
  std::cout << "totals";
  for (Money x : r.totals()) std::cout << ' ' << money(x);
  std::cout << "\nmean " << money(r.mean) << ", std " << money(r.stddev) << "\n";
  if (r.opt) std::cout << "opt " << money(*r.opt) << "\n";
  if (r.gap_percent) std::cout << "gap " << std::fixed << std::setprecision(2) << *r.gap_percent << "%\n";
  std::size_t fallbacks = 0;
  for (const auto& e : r.episodes) fallbacks += e.fallbacks;
  if (fallbacks) std::cout << "fallback decisions " << fallbacks << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial supply-chain benchmark: run agents, solve the optimum, evaluate traces"};
  app.require_subcommand(1);

  // run
  RunConfig run_cfg;
  std::string agent = "safety-stock";
  std::string backend = "scripted:safety-stock";
  std::string effort = "medium";
  std::string memory_log;
  std::string prompt_dir;
  std::string schedule;
  std::string opt_cache;
  long long k = 6;
  double timeout_s = 120;
  auto* run = app.add_subcommand("run", "Run episodes of an agent on a scenario");
  run->add_option("--scenario", run_cfg.scenario, "Built-in name or scenario JSON file")->required();
  run->add_option("--agent", agent,
                  "invagent-step | invagent-step-ss | aim-rm | aim-rm-log | base-stock | tracking-demand | "
                  "safety-stock | optimal-replay");
  run->add_option("--episodes", run_cfg.episodes, "Episodes N")->capture_default_str();
  run->add_flag("--force-episodes", run_cfg.force_episodes, "Run all N episodes even for deterministic setups");
  run->add_option("--k", k, "Nearest neighbours retrieved")->capture_default_str();
  run->add_option("--tau", run_cfg.tau, "Distance threshold (strict)")->capture_default_str();
  run->add_option("--memory", memory_log, "Memory log (JSON Lines) preloaded for aim-rm-log");
  run->add_flag("--strict-log", run_cfg.strict_log, "Reject the whole log on any bad line");
  run->add_option("--backend", backend, "scripted:<policy> or remote")->capture_default_str();
  run->add_option("--endpoint", run_cfg.backend.endpoint, "Remote base URL, e.g. https://api.openai.com/v1");
  run->add_option("--model", run_cfg.backend.model, "Remote model name");
  run->add_option("--effort", effort, "Reasoning effort: medium | high")->capture_default_str();
  run->add_option("--timeout", timeout_s, "Remote request timeout in seconds")->capture_default_str();
  run->add_option("--retries", run_cfg.backend.max_retries, "Retries after a failed request")->capture_default_str();
  run->add_option("--max-concurrent", run_cfg.backend.max_concurrent, "Outstanding remote requests")
      ->capture_default_str();
  run->add_option("--api-key-env", run_cfg.backend.api_key_env, "Variable holding the API key")
      ->capture_default_str();
  run->add_option("--prompts", prompt_dir, "Directory overriding the built-in prompt templates");
  run->add_option("--schedule", schedule, "Order matrix replayed by optimal-replay");
  run->add_option("--opt-cache", opt_cache, "Optimum cache file");
  run->add_option("--parallel", run_cfg.parallel, "Episodes run concurrently")->capture_default_str();
  run->add_option("--seed", run_cfg.seed, "Reserved");
  run->add_option("--out", run_cfg.out_dir, "Output directory");

  // solve
  std::string solve_scenario;
  std::string export_ip_path;
  std::string budget_text;
  std::string schedule_out;
  std::string import_solution;
  std::string import_schedule;
  std::string solve_cache;
  auto* solve_cmd = app.add_subcommand("solve", "Exact optimum, LP export, or certificate check");
  solve_cmd->add_option("--scenario", solve_scenario, "Built-in name or scenario JSON file")->required();
  solve_cmd->add_option("--export-ip", export_ip_path, "Write the LP-format integer program and stop");
  solve_cmd->add_option("--budget", budget_text, "Node count (100000) or time (30s, 2m, 500ms)");
  solve_cmd->add_option("--schedule-out", schedule_out, "Write the best order matrix");
  solve_cmd->add_option("--import-solution", import_solution, "Evaluate the O_m_t values of a MILP solution file");
  solve_cmd->add_option("--import-schedule", import_schedule, "Evaluate a plain text order matrix");
  solve_cmd->add_option("--opt-cache", solve_cache, "Record a proven optimum in this cache file");

  // eval
  std::string traces_dir;
  auto* eval = app.add_subcommand("eval", "Recompute metrics from a run directory");
  eval->add_option("--traces", traces_dir, "Run output directory (containing traces/)")->required();

  // mklog
  std::string log_scenario;
  std::string log_policy = "safety-stock";
  std::string log_out;
  int log_episodes = 1;
  auto* mklog = app.add_subcommand("mklog", "Write a memory log from a scripted rollout");
  mklog->add_option("--scenario", log_scenario, "Built-in name or scenario JSON file")->required();
  mklog->add_option("--policy", log_policy, "base-stock | tracking-demand | safety-stock | optimal")
      ->capture_default_str();
  mklog->add_option("--out", log_out, "Log file")->required();
  mklog->add_option("--episodes", log_episodes, "Rollouts")->capture_default_str();

  // scenario
  std::string show_name;
  std::string show_out;
  auto* show = app.add_subcommand("scenario", "Print or save a scenario as JSON");
  show->add_option("--scenario", show_name, "Built-in name or scenario JSON file")->required();
  show->add_option("--out", show_out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::config);
  }

  try {
    if (*run) {
      if (k < 0) throw ConfigError("k must be >= 0");
      run_cfg.k = static_cast<std::size_t>(k);
      run_cfg.agent = agent_kind_from_string(agent);
      const int retries = run_cfg.backend.max_retries;
      const int concurrent = run_cfg.backend.max_concurrent;
      const std::string endpoint = run_cfg.backend.endpoint;
      const std::string model = run_cfg.backend.model;
      const std::string key_env = run_cfg.backend.api_key_env;
      run_cfg.backend = parse_backend(backend);
      run_cfg.backend.endpoint = endpoint;
      run_cfg.backend.model = model;
      run_cfg.backend.api_key_env = key_env;
      run_cfg.backend.max_retries = retries;
      run_cfg.backend.max_concurrent = concurrent;
      run_cfg.backend.effort = reasoning_effort_from_string(effort);
      if (!(timeout_s > 0)) throw ConfigError("timeout must be > 0");
      run_cfg.backend.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
      if (!memory_log.empty()) run_cfg.memory_log = memory_log;
      if (!prompt_dir.empty()) run_cfg.prompt_dir = prompt_dir;
      if (!schedule.empty()) run_cfg.schedule_path = schedule;
      if (!opt_cache.empty()) run_cfg.opt_cache_path = opt_cache;
      // Heuristic agents run their own policy; the default scripted backend is irrelevant for them.
      if (!uses_language_model(run_cfg.agent) && run_cfg.backend.kind == BackendConfig::Kind::scripted) {
        run_cfg.backend = BackendConfig{};
      }
      const auto report = run_experiment(run_cfg);
      print_report(report);
      if (!run_cfg.out_dir.empty()) std::cout << "wrote " << run_cfg.out_dir << "\n";
    } else if (*solve_cmd) {
      const auto spec = load_scenario(solve_scenario);
      if (!export_ip_path.empty()) {
        const auto stats = export_ip(spec, export_ip_path);
        std::cout << "wrote " << export_ip_path << ": " << stats.continuous_vars << " integer variables, "
                  << stats.binary_vars << " binaries, " << stats.constraints << " constraints\n";
        return 0;
      }
      if (!import_solution.empty() || !import_schedule.empty()) {
        const auto sched =
            import_solution.empty() ? read_schedule(import_schedule) : read_ip_solution(spec, import_solution);
        const Money value = evaluate_schedule(spec, sched);
        std::cout << "certificate " << spec.name << ": total reward " << money(value) << "\n";
        if (!schedule_out.empty()) write_schedule(sched, schedule_out);
        return 0;
      }
      const auto res = solve(spec, parse_budget(budget_text));
      std::cout << spec.name << ": " << to_string(res.status) << ", objective " << money(res.objective);
      if (res.status == SolveStatus::bound_only) std::cout << ", upper bound " << money(res.upper_bound);
      std::cout << ", " << res.nodes << " nodes, " << std::fixed << std::setprecision(3) << res.seconds << " s\n";
      write_schedule(res.schedule, std::cout);
      if (!schedule_out.empty()) write_schedule(res.schedule, schedule_out);
      if (!solve_cache.empty() && res.status == SolveStatus::optimal) {
        OptCache cache = OptCache::load(solve_cache);
        cache.put({spec.name, scenario_fingerprint(spec), res.objective, res.schedule});
        cache.save(solve_cache);
        std::cout << "cached in " << solve_cache << "\n";
      }
    } else if (*eval) {
      const auto ev = evaluate_traces(traces_dir);
      std::cout << "episodes " << ev.totals.size() << "\ntotals";
      for (Money x : ev.totals) std::cout << ' ' << money(x);
      std::cout << "\nmean " << money(ev.mean) << ", std " << money(ev.stddev) << "\n";
      if (ev.opt) std::cout << "opt " << money(*ev.opt) << "\n";
      if (ev.gap_percent) std::cout << "gap " << std::fixed << std::setprecision(2) << *ev.gap_percent << "%\n";
      if (ev.matches_report) std::cout << "report.json " << (*ev.matches_report ? "consistent" : "INCONSISTENT") << "\n";
      if (ev.matches_report && !*ev.matches_report) return static_cast<int>(ExitCode::io);
    } else if (*mklog) {
      const auto spec = load_scenario(log_scenario);
      std::shared_ptr<DecisionBackend> policy;
      if (log_policy == "optimal" || log_policy == "optimal-replay") {
        OptCache cache = OptCache::load(default_opt_cache_path());
        policy = std::make_shared<ScheduleBackend>(cache.get_or_solve(spec).schedule.orders, "optimal");
      } else {
        PolicyConfig pc;
        pc.kind = policy_kind_from_string(log_policy);
        policy = std::make_shared<ScriptedBackend>(spec, pc);
      }
      const auto n = record_rollout_log(spec, *policy, log_out, log_episodes);
      std::cout << "wrote " << n << " records to " << log_out << "\n";
    } else if (*show) {
      const auto spec = load_scenario(show_name);
      if (show_out.empty()) {
        std::cout << scenario_to_json(spec);
      } else {
        save_scenario(spec, show_out);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::unexpected);
  }
  return 0;
}
