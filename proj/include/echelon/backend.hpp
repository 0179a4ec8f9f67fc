#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "echelon/policies.hpp"
#include "echelon/prompts.hpp"
#include "echelon/scenario.hpp"

namespace echelon {

struct Decision {
  Units order = 0;
  std::string reason;
  bool fallback = false;                  // produced by the fallback policy after backend failure
  std::vector<std::string> raw_replies;   // remote only, one per attempt
};

enum class ReasoningEffort { medium, high };

std::string to_string(ReasoningEffort e);
ReasoningEffort reasoning_effort_from_string(const std::string& s);

struct BackendConfig {
  enum class Kind { scripted, remote };

  Kind kind = Kind::scripted;
  PolicyConfig policy;  // scripted

  // remote
  std::string endpoint;  // base URL, e.g. https://api.openai.com/v1
  std::string model;
  ReasoningEffort effort = ReasoningEffort::medium;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 2;  // attempts = 1 + max_retries
  int max_concurrent = 4;
  std::string api_key_env = "OPENAI_API_KEY";
  PolicyConfig fallback;  // safety-stock, z = 0
};

/// Throws ConfigError when a remote config lacks endpoint or model.
void validate(const BackendConfig& cfg);

/// Turns a prompt into an order. Implementations are safe to share across threads.
class DecisionBackend {
 public:
  virtual ~DecisionBackend() = default;
  virtual Decision decide(const std::string& system_prompt, const std::string& prompt,
                          const DecisionContext& ctx) const = 0;
  virtual std::string name() const = 0;
  /// True when identical inputs always give identical decisions.
  virtual bool deterministic() const = 0;
};

/// Wraps a closed-form policy; the prompt is ignored.
class ScriptedBackend : public DecisionBackend {
 public:
  ScriptedBackend(ScenarioSpec spec, PolicyConfig policy);
  Decision decide(const std::string& system_prompt, const std::string& prompt,
                  const DecisionContext& ctx) const override;
  std::string name() const override;
  bool deterministic() const override { return true; }

 private:
  ScenarioSpec spec_;
  PolicyConfig policy_;
};

/// Replays a fixed order matrix, orders[m][t - 1].
class ScheduleBackend : public DecisionBackend {
 public:
  explicit ScheduleBackend(std::vector<std::vector<Units>> orders, std::string label = "schedule");
  Decision decide(const std::string& system_prompt, const std::string& prompt,
                  const DecisionContext& ctx) const override;
  std::string name() const override { return label_; }
  bool deterministic() const override { return true; }

 private:
  std::vector<std::vector<Units>> orders_;
  std::string label_;
};

struct ParsedReply {
  Units order = 0;
  std::string reason;
};

/// Reads {"order": n, "reason": "..."} from a model reply, also inside code fences or
/// surrounding prose. Otherwise salvages the last integer labelled as an order and uses
/// the whole text as the reason. Negative or missing orders give nullopt.
std::optional<ParsedReply> parse_reply(const std::string& content);

/// Chat-completions client: POST {endpoint}/chat/completions with a system and a user
/// message. Transport errors and unusable replies are retried; after the last attempt
/// the configured fallback policy decides and the decision is flagged.
class RemoteBackend : public DecisionBackend {
 public:
  RemoteBackend(BackendConfig cfg, ScenarioSpec spec);
  ~RemoteBackend() override;

  Decision decide(const std::string& system_prompt, const std::string& prompt,
                  const DecisionContext& ctx) const override;
  std::string name() const override { return "remote:" + cfg_.model; }
  bool deterministic() const override { return false; }

  /// Request body sent for one decision.
  std::string request_body(const std::string& system_prompt, const std::string& prompt) const;

 private:
  struct Limiter;

  BackendConfig cfg_;
  ScriptedBackend fallback_;
  std::unique_ptr<Limiter> limiter_;
};

std::shared_ptr<DecisionBackend> make_backend(const BackendConfig& cfg, const ScenarioSpec& spec);

}  // namespace echelon
