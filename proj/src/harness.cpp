#include "echelon/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "echelon/errors.hpp"
#include "echelon/memory.hpp"
#include "echelon/policies.hpp"
#include "echelon/prompts.hpp"

#ifndef ECHELON_SOURCE_DIR
#define ECHELON_SOURCE_DIR "."
#endif

namespace echelon {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Scenarios ------------------------------------------------------------------------

namespace {

ScenarioSpec table_scenario(const std::string& name, bool diverse, DemandModel demand) {
  ScenarioSpec s;
  s.name = name;
  s.horizon = 12;
  s.demand = std::move(demand);
  for (int m = 0; m < 4; ++m) {
    StageParams p;
    p.stage_index = m;
    if (diverse) {
      p.init_inventory = 12 + 2 * m;
      p.lead_time = 1 + m;
      p.capacity = 20 + 2 * m;
      p.sale_price = 9 - m;
      p.order_cost = 8 - m;
    } else {
      p.init_inventory = 12;
      p.lead_time = 2;
      p.capacity = 20;
    }
    p.backlog_cost = 1;
    p.holding_cost = 1;
    s.stages.push_back(p);
  }
  return s;
}

template <typename T>
std::vector<T> column(const json& j, const char* key, std::size_t expected, const std::string& origin) {
  if (!j.contains(key)) throw ConfigError(origin + ": missing \"" + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(origin + ": \"" + key + "\" must be a list");
  if (expected != 0 && v.size() != expected) {
    throw ConfigError(origin + ": \"" + key + "\" has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(expected));
  }
  std::vector<T> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(origin + ": \"" + key + "\" must hold numbers");
    if constexpr (std::is_integral_v<T>) {
      if (!x.is_number_integer()) throw ConfigError(origin + ": \"" + key + "\" must hold integers");
    }
    out.push_back(x.get<T>());
  }
  return out;
}

}  // namespace

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {"const-uni", "dec-div", "dec-uni", "inc-div", "inc-uni"};
  return names;
}

std::optional<ScenarioSpec> builtin_scenario(const std::string& name) {
  if (name == "const-uni") return table_scenario(name, false, DemandModel::constant(4));
  if (name == "dec-div") return table_scenario(name, true, DemandModel::decreasing());
  if (name == "dec-uni") return table_scenario(name, false, DemandModel::decreasing());
  if (name == "inc-div") return table_scenario(name, true, DemandModel::increasing());
  if (name == "inc-uni") return table_scenario(name, false, DemandModel::increasing());
  return std::nullopt;
}

namespace {

ordered_json scenario_json(const ScenarioSpec& spec, bool with_name) {
  ordered_json j;
  if (with_name) j["name"] = spec.name;
  j["num_periods"] = spec.horizon;
  auto col = [&](auto get) {
    ordered_json a = ordered_json::array();
    for (const auto& s : spec.stages) a.push_back(get(s));
    return a;
  };
  j["lead_times"] = col([](const StageParams& s) { return s.lead_time; });
  j["prod_capacities"] = col([](const StageParams& s) { return s.capacity; });
  j["init_inventories"] = col([](const StageParams& s) { return s.init_inventory; });
  j["sale_prices"] = col([](const StageParams& s) { return s.sale_price; });
  j["order_costs"] = col([](const StageParams& s) { return s.order_cost; });
  j["backlog_costs"] = col([](const StageParams& s) { return s.backlog_cost; });
  j["holding_costs"] = col([](const StageParams& s) { return s.holding_cost; });
  ordered_json d;
  d["kind"] = to_string(spec.demand.kind);
  if (spec.demand.kind == DemandModel::Kind::constant) d["value"] = spec.demand.value;
  if (spec.demand.kind == DemandModel::Kind::explicit_series) d["values"] = spec.demand.series;
  j["demand"] = d;
  return j;
}

}  // namespace

std::string scenario_to_json(const ScenarioSpec& spec) { return scenario_json(spec, true).dump(2) + "\n"; }

ScenarioSpec scenario_from_json(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError(origin + ": not a JSON object");
  ScenarioSpec spec;
  try {
    spec.name = j.value("name", fs::path(origin).stem().string());
    if (!j.contains("num_periods") || !j["num_periods"].is_number_integer()) {
      throw ConfigError(origin + ": \"num_periods\" must be an integer");
    }
    spec.horizon = j["num_periods"].get<int>();
    const auto lead = column<int>(j, "lead_times", 0, origin);
    const std::size_t m = lead.size();
    const auto cap = column<Units>(j, "prod_capacities", m, origin);
    const auto inv = column<Units>(j, "init_inventories", m, origin);
    const auto price = column<Money>(j, "sale_prices", m, origin);
    const auto order = column<Money>(j, "order_costs", m, origin);
    const auto back = column<Money>(j, "backlog_costs", m, origin);
    const auto hold = column<Money>(j, "holding_costs", m, origin);
    for (std::size_t i = 0; i < m; ++i) {
      spec.stages.push_back({static_cast<int>(i), lead[i], cap[i], inv[i], price[i], order[i], back[i], hold[i]});
    }
    if (!j.contains("demand") || !j["demand"].is_object()) throw ConfigError(origin + ": \"demand\" must be an object");
    const auto& d = j["demand"];
    spec.demand.kind = demand_kind_from_string(d.value("kind", std::string{}));
    if (spec.demand.kind == DemandModel::Kind::constant) {
      if (!d.contains("value") || !d["value"].is_number_integer()) {
        throw ConfigError(origin + ": constant demand needs an integer \"value\"");
      }
      spec.demand.value = d["value"].get<Units>();
    }
    if (spec.demand.kind == DemandModel::Kind::explicit_series) {
      spec.demand.series = column<Units>(d, "values", 0, origin);
    }
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  validate(spec);
  return spec;
}

ScenarioSpec load_scenario(const std::string& name_or_path) {
  if (auto s = builtin_scenario(name_or_path)) return *s;
  std::ifstream f(name_or_path);
  if (!f) {
    std::string names;
    for (const auto& n : builtin_scenario_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + name_or_path + "' (built-in: " + names + "; or a JSON file path)");
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return scenario_from_json(ss.str(), name_or_path);
}

void save_scenario(const ScenarioSpec& spec, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << scenario_to_json(spec);
  if (!f) throw IoError("failed writing " + path);
}

std::string scenario_fingerprint(const ScenarioSpec& spec) {
  // FNV-1a over the canonical text; only needs to be stable, not cryptographic.
  const std::string text = scenario_json(spec, false).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

// Metrics --------------------------------------------------------------------------

double relative_gap(Money opt, Money r) {
  if (opt == 0) throw MetricError("relative gap is undefined for Opt = 0");
  const double pct = std::abs((opt - r) / opt) * 100.0;
  return std::round(pct * 100.0) / 100.0;
}

Summary summarize(const std::vector<Money>& values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

// Optimum cache --------------------------------------------------------------------

std::string default_opt_cache_path() { return std::string(ECHELON_SOURCE_DIR) + "/data/opt_cache.json"; }

OptCache OptCache::load(const std::string& path) {
  OptCache cache;
  std::ifstream f(path);
  if (!f) return cache;
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded() || !j.contains("entries") || !j["entries"].is_array()) {
    throw IngestError("malformed optimum cache " + path);
  }
  for (const auto& e : j["entries"]) {
    OptEntry entry;
    try {
      entry.scenario = e.at("scenario").get<std::string>();
      entry.fingerprint = e.at("fingerprint").get<std::string>();
      entry.opt = e.at("opt").get<Money>();
      entry.schedule.orders = e.at("schedule").get<std::vector<std::vector<Units>>>();
    } catch (const json::exception& ex) {
      throw IngestError("malformed optimum cache entry in " + path + ": " + ex.what());
    }
    cache.entries_[entry.fingerprint] = std::move(entry);
  }
  return cache;
}

void OptCache::save(const std::string& path) const {
  ordered_json j;
  j["entries"] = ordered_json::array();
  std::vector<const OptEntry*> sorted;
  for (const auto& [_, e] : entries_) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->scenario < b->scenario; });
  for (const auto* e : sorted) {
    ordered_json row;
    row["scenario"] = e->scenario;
    row["fingerprint"] = e->fingerprint;
    row["opt"] = e->opt;
    row["schedule"] = e->schedule.orders;
    j["entries"].push_back(row);
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << j.dump(2) << '\n';
  if (!f) throw IoError("failed writing " + path);
}

std::optional<OptEntry> OptCache::lookup(const ScenarioSpec& spec) const {
  auto it = entries_.find(scenario_fingerprint(spec));
  if (it == entries_.end()) return std::nullopt;
  try {
    if (evaluate_schedule(spec, it->second.schedule) != it->second.opt) return std::nullopt;
  } catch (const DomainError&) {
    return std::nullopt;
  }
  return it->second;
}

OptEntry OptCache::get_or_solve(const ScenarioSpec& spec, const SolveBudget& budget) {
  if (auto e = lookup(spec)) return *e;
  const auto fp = scenario_fingerprint(spec);
  if (entries_.count(fp)) {
    entries_.erase(fp);
    ++dropped_;
  }
  const SolveResult r = solve(spec, budget);
  if (r.status != SolveStatus::optimal) {
    throw MetricError("optimum of '" + spec.name + "' not proven within the budget (best " +
                      std::to_string(r.objective) + ", bound " + std::to_string(r.upper_bound) + ")");
  }
  OptEntry e{spec.name, fp, r.objective, r.schedule};
  put(e);
  return e;
}

void OptCache::put(OptEntry e) {
  auto fp = e.fingerprint;
  entries_[fp] = std::move(e);
}

// Experiments ----------------------------------------------------------------------

std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::invagent_step: return "invagent-step";
    case AgentKind::invagent_step_ss: return "invagent-step-ss";
    case AgentKind::aim_rm: return "aim-rm";
    case AgentKind::aim_rm_log: return "aim-rm-log";
    case AgentKind::base_stock: return "base-stock";
    case AgentKind::tracking_demand: return "tracking-demand";
    case AgentKind::safety_stock: return "safety-stock";
    case AgentKind::optimal_replay: return "optimal-replay";
  }
  return "?";
}

AgentKind agent_kind_from_string(const std::string& s) {
  for (AgentKind k : {AgentKind::invagent_step, AgentKind::invagent_step_ss, AgentKind::aim_rm, AgentKind::aim_rm_log,
                      AgentKind::base_stock, AgentKind::tracking_demand, AgentKind::safety_stock,
                      AgentKind::optimal_replay}) {
    std::string underscored = to_string(k);
    std::replace(underscored.begin(), underscored.end(), '-', '_');
    if (s == to_string(k) || s == underscored) return k;
  }
  throw ConfigError("unknown agent kind '" + s +
                    "' (invagent-step, invagent-step-ss, aim-rm, aim-rm-log, base-stock, tracking-demand, "
                    "safety-stock, optimal-replay)");
}

bool uses_language_model(AgentKind k) {
  return k == AgentKind::invagent_step || k == AgentKind::invagent_step_ss || k == AgentKind::aim_rm ||
         k == AgentKind::aim_rm_log;
}

void validate(const RunConfig& cfg) {
  if (cfg.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (!(cfg.tau >= 0)) throw ConfigError("tau must be >= 0");
  if (cfg.parallel < 1) throw ConfigError("parallel width must be >= 1");
  if (cfg.agent == AgentKind::aim_rm_log && !cfg.memory_log) {
    throw ConfigError("aim-rm-log needs a memory log (--memory)");
  }
  if (!uses_language_model(cfg.agent) && cfg.backend.kind == BackendConfig::Kind::remote) {
    throw ConfigError("agent " + to_string(cfg.agent) + " is a fixed policy; a remote backend applies only to "
                      "invagent-* and aim-rm* agents");
  }
  validate(cfg.backend);
}

std::vector<Money> MetricsReport::totals() const {
  std::vector<Money> out;
  for (const auto& e : episodes) out.push_back(e.total);
  return out;
}

namespace {

json cases_json(const std::optional<std::vector<SimilarCase>>& cases) {
  if (!cases) return nullptr;
  json a = json::array();
  for (const auto& c : *cases) {
    a.push_back({{"index", c.index},
                 {"distance", c.distance},
                 {"state_vec", c.record.state_vec},
                 {"action", c.record.action},
                 {"reward", c.record.reward}});
  }
  return a;
}

std::string transcript_line(const DecisionRecord& d) {
  ordered_json j;
  j["episode"] = d.episode;
  j["period"] = d.period;
  j["stage"] = d.stage;
  j["state_vec"] = d.state_vec;
  j["similar_cases"] = cases_json(d.similar_cases);
  j["system_prompt"] = d.system_prompt;
  j["prompt"] = d.prompt;
  j["raw_replies"] = d.decision.raw_replies;
  j["order"] = d.decision.order;
  j["reason"] = d.decision.reason;
  j["fallback"] = d.decision.fallback;
  j["reward"] = d.reward;
  return j.dump();
}

ordered_json report_json(const MetricsReport& r, const std::string& status, const std::string& error) {
  ordered_json j;
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  j["scenario"] = r.scenario;
  j["agent"] = r.agent;
  j["backend"] = r.backend;
  j["episodes_requested"] = r.episodes_requested;
  j["episodes_run"] = r.episodes.size();
  j["episode_totals"] = r.totals();
  j["mean"] = r.mean;
  j["std"] = r.stddev;
  j["opt"] = r.opt ? ordered_json(*r.opt) : ordered_json(nullptr);
  j["gap_percent"] = r.gap_percent ? ordered_json(*r.gap_percent) : ordered_json(nullptr);
  j["memory_preloaded"] = r.memory_preloaded;
  j["log_lines_rejected"] = r.log_lines_rejected;
  ordered_json eps = ordered_json::array();
  for (const auto& e : r.episodes) {
    ordered_json row;
    row["episode"] = e.episode;
    row["total"] = e.total;
    row["stage_rewards"] = e.stage_rewards;
    row["fallbacks"] = e.fallbacks;
    row["retrieval"] = {{"queries", e.retrieval.queries},
                        {"cases_delivered", e.retrieval.cases_delivered},
                        {"nonempty_queries", e.retrieval.nonempty_queries}};
    eps.push_back(row);
  }
  j["episodes"] = eps;
  return j;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write " + p.string());
  f << text;
  if (!f) throw IoError("failed writing " + p.string());
}

struct Prepared {
  ScenarioSpec spec;
  PromptBundle bundle;
  MemoryConfig mem;
  std::shared_ptr<const DecisionBackend> backend;
  std::optional<MemoryBank> preload;
  std::size_t rejected = 0;
};

Prepared prepare(const RunConfig& cfg) {
  validate(cfg);
  Prepared p;
  p.spec = load_scenario(cfg.scenario);
  p.bundle = cfg.prompt_dir ? load_prompt_bundle(*cfg.prompt_dir) : default_prompt_bundle();
  p.bundle.demand_description = describe_demand(p.spec);
  p.bundle.include_step_description = true;
  p.bundle.include_safety_stock = cfg.agent == AgentKind::invagent_step_ss;
  p.bundle.include_memory_usage = cfg.agent == AgentKind::aim_rm_log;
  p.bundle.include_case_list = cfg.agent == AgentKind::aim_rm;
  p.mem.enabled = cfg.agent == AgentKind::aim_rm || cfg.agent == AgentKind::aim_rm_log;
  p.mem.k = cfg.k;
  p.mem.tau = cfg.tau;

  auto scripted = [&](PolicyKind kind) {
    PolicyConfig pc;
    pc.kind = kind;
    return std::make_shared<ScriptedBackend>(p.spec, pc);
  };
  switch (cfg.agent) {
    case AgentKind::base_stock: p.backend = scripted(PolicyKind::base_stock); break;
    case AgentKind::tracking_demand: p.backend = scripted(PolicyKind::tracking_demand); break;
    case AgentKind::safety_stock: p.backend = scripted(PolicyKind::safety_stock); break;
    case AgentKind::optimal_replay: {
      OrderSchedule sched;
      if (cfg.schedule_path) {
        sched = read_schedule(*cfg.schedule_path);
        check_schedule(p.spec, sched);
      } else {
        OptCache cache = OptCache::load(cfg.opt_cache_path.value_or(default_opt_cache_path()));
        sched = cache.get_or_solve(p.spec).schedule;
      }
      p.backend = std::make_shared<ScheduleBackend>(sched.orders, "optimal-replay");
      break;
    }
    default: p.backend = cfg.custom_backend ? cfg.custom_backend : make_backend(cfg.backend, p.spec); break;
  }

  if (cfg.agent == AgentKind::aim_rm_log) {
    p.preload.emplace(p.spec);
    const auto rep = import_log(*p.preload, *cfg.memory_log, cfg.strict_log);
    p.rejected = rep.rejected.size();
  }
  check_bundle(p.bundle, p.spec, p.mem);
  return p;
}

}  // namespace

std::string report_to_json(const MetricsReport& report) { return report_json(report, "ok", "").dump(2) + "\n"; }

MetricsReport run_experiment(const RunConfig& cfg) {
  Prepared prep = prepare(cfg);

  MetricsReport report;
  report.scenario = prep.spec.name;
  report.agent = to_string(cfg.agent);
  report.backend = prep.backend->name();
  report.episodes_requested = cfg.episodes;
  report.spec = prep.spec;
  report.memory_preloaded = prep.preload ? prep.preload->total_records() : 0;
  report.log_lines_rejected = prep.rejected;

  const int n_run = prep.backend->deterministic() && !cfg.force_episodes ? 1 : cfg.episodes;
  std::vector<std::optional<EpisodeResult>> results(n_run);
  std::vector<std::exception_ptr> errors(n_run);
  {
    std::mutex mu;
    int next = 0;
    auto worker = [&] {
      for (;;) {
        int i = 0;
        {
          std::lock_guard lock(mu);
          if (next >= n_run) return;
          i = next++;
        }
        try {
          results[i] = run_episode(prep.spec, *prep.backend, prep.bundle, prep.mem, i,
                                   prep.preload ? &*prep.preload : nullptr);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const int width = std::min(cfg.parallel, n_run);
    std::vector<std::thread> pool;
    for (int w = 1; w < width; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  std::exception_ptr first_error;
  std::string error_text;
  for (int i = 0; i < n_run; ++i) {
    if (errors[i]) {
      if (!first_error) {
        first_error = errors[i];
        try {
          std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
          error_text = "episode " + std::to_string(i) + ": " + e.what();
        } catch (...) {
          error_text = "episode " + std::to_string(i) + ": unknown error";
        }
      }
      continue;
    }
    auto& r = *results[i];
    report.episodes.push_back({r.episode, r.total_reward, r.stage_rewards, r.fallback_count, r.retrieval});
    report.traces.push_back(r.trace);
  }
  const auto s = summarize(report.totals());
  report.mean = s.mean;
  report.stddev = s.stddev;

  if (!first_error) {
    try {
      OptCache cache = OptCache::load(cfg.opt_cache_path.value_or(default_opt_cache_path()));
      report.opt = cache.get_or_solve(prep.spec).opt;
      if (*report.opt != 0) report.gap_percent = relative_gap(*report.opt, report.mean);
    } catch (const MetricError&) {
      report.opt.reset();
    }
  }

  if (!cfg.out_dir.empty()) {
    const fs::path out(cfg.out_dir);
    fs::create_directories(out / "traces");
    for (std::size_t i = 0; i < report.traces.size(); ++i) {
      write_trace_csv(report.traces[i],
                      (out / "traces" / ("episode_" + std::to_string(report.episodes[i].episode) + ".csv")).string());
    }
    {
      std::ofstream f(out / "transcripts.jsonl");
      if (!f) throw IoError("cannot write transcripts in " + out.string());
      for (int i = 0; i < n_run; ++i) {
        if (!results[i]) continue;
        for (const auto& d : results[i]->decisions) f << transcript_line(d) << '\n';
      }
    }
    write_text(out / "report.json",
               report_json(report, first_error ? "failed" : "ok", error_text).dump(2) + "\n");
    if (first_error) {
      write_text(out / "FAILED", error_text + "\n");
    } else {
      std::error_code ec;
      fs::remove(out / "FAILED", ec);
      if (!report.traces.empty()) emit_series(report, (out / "series").string());
    }
  }

  if (first_error) std::rethrow_exception(first_error);
  return report;
}

std::size_t record_rollout_log(const ScenarioSpec& spec, const DecisionBackend& backend, const std::string& path,
                               int episodes) {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  PromptBundle bundle = default_prompt_bundle();
  bundle.demand_description = describe_demand(spec);
  std::ofstream f(path);
  if (!f) throw IoError("cannot write memory log " + path);
  std::size_t n = 0;
  for (int e = 0; e < episodes; ++e) {
    const auto res = run_episode(spec, backend, bundle, MemoryConfig{}, e);
    for (const auto& d : res.decisions) {
      MemoryRecord rec{d.state_vec, d.decision.order, d.reward, {e, d.period, RecordSource::rl_log}};
      f << to_log_line(d.stage, rec) << '\n';
      ++n;
    }
  }
  if (!f) throw IoError("failed writing memory log " + path);
  return n;
}

std::vector<std::string> emit_series(const MetricsReport& report, const std::string& dir, int episode) {
  if (episode < 0 || static_cast<std::size_t>(episode) >= report.traces.size()) {
    throw DomainError("report has no episode " + std::to_string(episode));
  }
  const EnvState& tr = report.traces[episode];
  const int M = static_cast<int>(tr.stages.size());
  const int T = tr.period;
  fs::create_directories(dir);

  auto header = [&](std::ostream& o, bool total) {
    o << "period";
    for (int m = 0; m < M; ++m) o << ",stage_" << m;
    if (total) o << ",total";
    o << ",demand\n";
  };
  std::vector<std::string> written;
  auto panel = [&](const std::string& name, auto value) {
    const fs::path p = fs::path(dir) / (name + ".csv");
    std::ostringstream o;
    header(o, false);
    for (int t = 0; t <= T; ++t) {
      o << t;
      for (int m = 0; m < M; ++m) o << ',' << value(tr.stages[m], t);
      o << ',' << tr.demand[t] << '\n';
    }
    write_text(p, o.str());
    written.push_back(p.string());
  };
  panel("inventory", [](const StageSeries& s, int t) { return s.inventory[t]; });
  panel("backlog", [](const StageSeries& s, int t) { return s.backlog[t]; });
  panel("orders", [](const StageSeries& s, int t) { return s.order[t]; });

  if (report.opt && *report.opt != 0) {
    const Money opt = *report.opt;
    const fs::path p = fs::path(dir) / "cumulative_relative_reward.csv";
    std::ostringstream o;
    o << std::setprecision(15);
    header(o, true);
    std::vector<Money> cum(M, 0.0);
    for (int t = 0; t <= T; ++t) {
      Money total = 0;
      o << t;
      for (int m = 0; m < M; ++m) {
        cum[m] += tr.stages[m].profit[t];
        total += cum[m];
        o << ',' << cum[m] / opt;
      }
      o << ',' << total / opt << ',' << tr.demand[t] << '\n';
    }
    write_text(p, o.str());
    written.push_back(p.string());
  }
  return written;
}

Money trace_total(const std::string& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw IngestError("cannot read trace " + csv_path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("t,m,D,O,R,S,B,I,P", 0) != 0) {
    throw IngestError(csv_path + ": not a trace file");
  }
  Money total = 0;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    try {
      std::size_t used = 0;
      const std::string cell = line.substr(comma + 1);
      total += std::stod(cell, &used);
      if (comma == std::string::npos || used != cell.size()) throw std::invalid_argument("P");
    } catch (const std::exception&) {
      throw IngestError(csv_path + ":" + std::to_string(lineno) + ": unreadable profit");
    }
  }
  return total;
}

TraceEvaluation evaluate_traces(const std::string& dir) {
  const fs::path traces = fs::path(dir) / "traces";
  if (!fs::is_directory(traces)) throw IngestError("no traces directory under " + dir);
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(traces)) {
    const auto name = entry.path().filename().string();
    int idx = 0;
    char tail = 0;
    if (std::sscanf(name.c_str(), "episode_%d.cs%c", &idx, &tail) == 2 && name.size() > 4 &&
        name.substr(name.size() - 4) == ".csv") {
      files.emplace_back(idx, entry.path());
    }
  }
  if (files.empty()) throw IngestError("no episode_*.csv traces under " + traces.string());
  std::sort(files.begin(), files.end());

  TraceEvaluation ev;
  for (const auto& [_, p] : files) ev.totals.push_back(trace_total(p.string()));
  const auto s = summarize(ev.totals);
  ev.mean = s.mean;
  ev.stddev = s.stddev;

  const fs::path report = fs::path(dir) / "report.json";
  if (fs::exists(report)) {
    std::ifstream f(report);
    json j = json::parse(f, nullptr, false);
    if (j.is_discarded()) throw IngestError("malformed " + report.string());
    if (j.contains("opt") && j["opt"].is_number()) ev.opt = j["opt"].get<Money>();
    bool same = j.contains("episode_totals") && j["episode_totals"].is_array() &&
                j["episode_totals"].size() == ev.totals.size();
    if (same) {
      for (std::size_t i = 0; i < ev.totals.size(); ++i) {
        same = same && std::abs(j["episode_totals"][i].get<double>() - ev.totals[i]) < 1e-6;
      }
      same = same && j.contains("mean") && std::abs(j["mean"].get<double>() - ev.mean) < 1e-6;
    }
    ev.matches_report = same;
  }
  if (ev.opt && *ev.opt != 0) ev.gap_percent = relative_gap(*ev.opt, ev.mean);
  return ev;
}

}  // namespace echelon
