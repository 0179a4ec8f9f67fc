#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "echelon/backend.hpp"
#include "echelon/env.hpp"
#include "echelon/memory.hpp"
#include "echelon/prompts.hpp"

namespace echelon {

struct MemoryConfig {
  bool enabled = false;
  std::size_t k = 6;
  double tau = 2.0;
};

/// Everything that happened for one (stage, period) decision.
struct DecisionRecord {
  int episode = 0;
  int period = 0;
  int stage = 0;
  std::vector<double> state_vec;
  std::optional<std::vector<SimilarCase>> similar_cases;
  std::string system_prompt;
  std::string prompt;
  Decision decision;
  Money reward = 0;  // realized P[m][t]
};

struct RetrievalStats {
  std::size_t queries = 0;
  std::size_t cases_delivered = 0;
  std::size_t nonempty_queries = 0;
};

/// Per-stage step of one round, used to capture what the backend was given.
using DecisionObserver = std::function<void(const DecisionRecord&)>;

struct RoundOptions {
  int episode = 0;
  const PolicyConfig* policy_hint = nullptr;  // cap rule quoted in the safety-stock section
  DecisionObserver observer;
};

/// One period of the multi-stage decision loop. For m = 0..M-1: observe, retrieve
/// similar cases (memory enabled), build the prompt, decide, submit. Then the period is
/// committed and each stage's memory gains (pre-decision state, order, realized profit).
/// `memory` may be null when memory is disabled. Returns the orders by stage.
std::vector<Units> run_round(Environment& env, MemoryBank* memory, const DecisionBackend& backend,
                             const PromptBundle& bundle, const MemoryConfig& mem_cfg, int period,
                             std::vector<DecisionRecord>* records = nullptr, const RoundOptions& opts = {});

/// Renders every enabled section once for period 1 so that an unbound placeholder is
/// reported before any decision is requested. Throws TemplateError.
void check_bundle(const PromptBundle& bundle, const ScenarioSpec& spec, const MemoryConfig& mem_cfg);

struct EpisodeResult {
  int episode = 0;
  EnvState trace;
  Money total_reward = 0;
  std::vector<Money> stage_rewards;
  std::size_t fallback_count = 0;
  RetrievalStats retrieval;
  std::vector<DecisionRecord> decisions;
  std::optional<MemoryBank> memory;  // final stores when memory was enabled
};

/// Resets a fresh environment, runs every period and collects the result. `preload`
/// seeds the memory (copied) when memory is enabled.
EpisodeResult run_episode(const ScenarioSpec& spec, const DecisionBackend& backend, const PromptBundle& bundle,
                          const MemoryConfig& mem_cfg, int episode = 0, const MemoryBank* preload = nullptr,
                          const RoundOptions& opts = {});

}  // namespace echelon
