#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "echelon/env.hpp"
#include "echelon/memory.hpp"
#include "echelon/scenario.hpp"

namespace echelon {

/// Prompt text pieces plus which optional parts are switched on. Templates use
/// `{name}` placeholders; `{{` and `}}` produce literal braces, and a brace not
/// followed by an identifier and `}` is copied as is.
struct PromptBundle {
  std::string system;
  std::string decision;
  std::string step_description;
  std::string safety_stock;
  std::string memory_usage;
  std::string case_list;           // bare similar-case list, used without memory_usage
  std::string demand_description;  // already rendered for the scenario

  bool include_step_description = true;
  bool include_safety_stock = false;
  bool include_memory_usage = false;
  bool include_case_list = false;
};

/// Bundle from the templates compiled into the binary. `demand_description` is left
/// empty; fill it with describe_demand().
PromptBundle default_prompt_bundle();

/// Same, with every `<name>.txt` found in `dir` overriding the built-in template
/// (system, decision, step_description, safety_stock, memory_usage, case_list).
PromptBundle load_prompt_bundle(const std::string& dir);

/// Renders the demand-description template matching the scenario's demand kind.
std::string describe_demand(const ScenarioSpec& spec);

/// Everything a decision backend gets for one (stage, period).
struct DecisionContext {
  Observation observation;
  int period = 0;
  int stage = 0;
  int num_stages = 0;
  std::optional<std::vector<SimilarCase>> similar_cases;  // set only when memory is enabled
  Units downstream_order = 0;  // O[m-1][t]; customer demand for the retailer
  std::string demand_description;
  std::optional<Units> prod_capacity;  // cap quoted by the safety-stock section
  std::vector<Units> recent_sales;     // tracking-demand window, oldest first
};

using Bindings = std::map<std::string, std::string>;

/// Substitutes placeholders. Throws TemplateError naming the first unbound placeholder.
std::string render_template(const std::string& tmpl, const Bindings& bindings);

/// Placeholder values for a context: period, stage, num_stages, top_stage, lead_time,
/// inventory, backlog, upstream_backlog, sales, deliveries, demand_description,
/// downstream, downstream_order, prod_capacity, similar_cases.
Bindings context_bindings(const DecisionContext& ctx);

std::string format_similar_cases(const std::vector<SimilarCase>& cases);

/// User prompt: decision, then step description, then safety stock and/or memory
/// usage, each section separated by a blank line. The bare case list is appended only
/// when memory usage is off. Pure function of its inputs.
std::string build_prompt(const PromptBundle& bundle, const DecisionContext& ctx);

std::string build_system_prompt(const PromptBundle& bundle, const DecisionContext& ctx);

}  // namespace echelon
