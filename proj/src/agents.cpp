#include "echelon/agents.hpp"

#include "echelon/errors.hpp"
#include "echelon/policies.hpp"

namespace echelon {

std::vector<Units> run_round(Environment& env, MemoryBank* memory, const DecisionBackend& backend,
                             const PromptBundle& bundle, const MemoryConfig& mem_cfg, int period,
                             std::vector<DecisionRecord>* records, const RoundOptions& opts) {
  if (env.period() + 1 != period) {
    throw ProtocolError("round for period " + std::to_string(period) + " but environment is at period " +
                        std::to_string(env.period() + 1));
  }
  const int m_count = env.num_stages();
  for (int m = 0; m < m_count; ++m) {
    if (env.order_submitted(m)) throw ProtocolError("orders already buffered for period " + std::to_string(period));
  }
  if (mem_cfg.enabled && memory == nullptr) throw ConfigError("memory enabled but no memory bank given");

  const auto& spec = env.spec();
  const CapRule cap_rule = opts.policy_hint ? opts.policy_hint->safety_stock.cap_rule : CapRule::supplier_capacity;
  const int sales_window = opts.policy_hint && opts.policy_hint->lead_time_max ? *opts.policy_hint->lead_time_max
                                                                                : spec.max_lead_time();

  std::vector<Units> actions(m_count, 0);
  std::vector<DecisionRecord> round(m_count);
  for (int m = 0; m < m_count; ++m) {
    DecisionContext ctx;
    ctx.observation = env.observe(m);
    ctx.period = period;
    ctx.stage = m;
    ctx.num_stages = m_count;
    ctx.downstream_order = m == 0 ? spec.demand_at(period) : actions[m - 1];
    ctx.demand_description = bundle.demand_description;
    ctx.prod_capacity = order_cap(spec, m, cap_rule);
    ctx.recent_sales = env.sales_window(m, sales_window);

    auto& rec = round[m];
    rec.episode = opts.episode;
    rec.period = period;
    rec.stage = m;
    rec.state_vec = ctx.observation.state_vector();
    if (mem_cfg.enabled) {
      ctx.similar_cases = memory->stage(m).retrieve(rec.state_vec, mem_cfg.k, mem_cfg.tau);
      rec.similar_cases = ctx.similar_cases;
    }
    rec.system_prompt = build_system_prompt(bundle, ctx);
    rec.prompt = build_prompt(bundle, ctx);
    rec.decision = backend.decide(rec.system_prompt, rec.prompt, ctx);
    if (rec.decision.order < 0) throw BackendError("backend returned a negative order");
    env.submit_order(m, rec.decision.order);
    actions[m] = rec.decision.order;
  }

  const StepOutcome step = env.advance_period();
  for (int m = 0; m < m_count; ++m) {
    auto& rec = round[m];
    rec.reward = step.rewards[m];
    if (mem_cfg.enabled) {
      memory->stage(m).insert({rec.state_vec, rec.decision.order, rec.reward, {opts.episode, period, RecordSource::live}});
    }
    if (opts.observer) opts.observer(rec);
    if (records) records->push_back(std::move(rec));
  }
  return actions;
}

void check_bundle(const PromptBundle& bundle, const ScenarioSpec& spec, const MemoryConfig& mem_cfg) {
  Environment env(spec);
  DecisionContext ctx;
  ctx.observation = env.observe(0);
  ctx.period = 1;
  ctx.num_stages = spec.num_stages();
  ctx.downstream_order = spec.demand_at(1);
  ctx.demand_description = bundle.demand_description;
  if (mem_cfg.enabled) ctx.similar_cases = std::vector<SimilarCase>{};
  build_system_prompt(bundle, ctx);
  build_prompt(bundle, ctx);
}

EpisodeResult run_episode(const ScenarioSpec& spec, const DecisionBackend& backend, const PromptBundle& bundle,
                          const MemoryConfig& mem_cfg, int episode, const MemoryBank* preload,
                          const RoundOptions& opts) {
  check_bundle(bundle, spec, mem_cfg);
  Environment env(spec);
  std::optional<MemoryBank> memory;
  if (mem_cfg.enabled) memory = preload ? *preload : MemoryBank(spec);

  RoundOptions round_opts = opts;
  round_opts.episode = episode;

  EpisodeResult result;
  result.episode = episode;
  for (int t = 1; t <= spec.horizon; ++t) {
    run_round(env, memory ? &*memory : nullptr, backend, bundle, mem_cfg, t, &result.decisions, round_opts);
  }

  result.trace = env.state();
  result.total_reward = env.total_reward();
  result.stage_rewards.assign(spec.num_stages(), 0.0);
  for (int m = 0; m < spec.num_stages(); ++m) {
    for (int t = 1; t <= spec.horizon; ++t) result.stage_rewards[m] += env.profit(m, t);
  }
  for (const auto& d : result.decisions) {
    if (d.decision.fallback) ++result.fallback_count;
    if (d.similar_cases) {
      ++result.retrieval.queries;
      result.retrieval.cases_delivered += d.similar_cases->size();
      if (!d.similar_cases->empty()) ++result.retrieval.nonempty_queries;
    }
  }
  result.memory = std::move(memory);
  return result;
}

}  // namespace echelon
