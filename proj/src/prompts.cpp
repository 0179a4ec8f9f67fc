#include "echelon/prompts.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "echelon/errors.hpp"
#include "echelon/prompt_assets.hpp"

namespace echelon {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string join(const std::vector<Units>& xs) {
  std::ostringstream o;
  o << '[';
  for (std::size_t i = 0; i < xs.size(); ++i) o << (i ? ", " : "") << xs[i];
  o << ']';
  return o.str();
}

std::string format_number(double x) {
  std::ostringstream o;
  o << std::setprecision(12) << x;
  return o.str();
}

std::string trim_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::optional<std::string> read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PromptBundle default_prompt_bundle() {
  PromptBundle b;
  b.system = trim_trailing_newlines(std::string(assets::system));
  b.decision = trim_trailing_newlines(std::string(assets::decision));
  b.step_description = trim_trailing_newlines(std::string(assets::step_description));
  b.safety_stock = trim_trailing_newlines(std::string(assets::safety_stock));
  b.memory_usage = trim_trailing_newlines(std::string(assets::memory_usage));
  b.case_list = trim_trailing_newlines(std::string(assets::case_list));
  return b;
}

PromptBundle load_prompt_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("prompt directory " + dir + " does not exist");
  PromptBundle b = default_prompt_bundle();
  const std::pair<const char*, std::string*> slots[] = {
      {"system", &b.system},
      {"decision", &b.decision},
      {"step_description", &b.step_description},
      {"safety_stock", &b.safety_stock},
      {"memory_usage", &b.memory_usage},
      {"case_list", &b.case_list},
  };
  for (const auto& [name, slot] : slots) {
    if (auto text = read_text(fs::path(dir) / (std::string(name) + ".txt"))) *slot = trim_trailing_newlines(*text);
  }
  return b;
}

std::string describe_demand(const ScenarioSpec& spec) {
  std::vector<Units> values;
  for (int t = 1; t <= spec.horizon; ++t) values.push_back(spec.demand_at(t));
  Bindings b{{"horizon", std::to_string(spec.horizon)}, {"values", join(values)},
             {"value", std::to_string(spec.demand.value)}};
  std::string_view tmpl;
  switch (spec.demand.kind) {
    case DemandModel::Kind::constant: tmpl = assets::demand_constant; break;
    case DemandModel::Kind::increasing: tmpl = assets::demand_increasing; break;
    case DemandModel::Kind::decreasing: tmpl = assets::demand_decreasing; break;
    case DemandModel::Kind::explicit_series: tmpl = assets::demand_explicit; break;
  }
  return render_template(trim_trailing_newlines(std::string(tmpl)), b);
}

std::string render_template(const std::string& tmpl, const Bindings& bindings) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out += '{';
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out += '}';
      i += 2;
      continue;
    }
    if (c == '{' && i + 1 < tmpl.size() && is_ident_start(tmpl[i + 1])) {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_ident_char(tmpl[j])) ++j;
      if (j < tmpl.size() && tmpl[j] == '}') {
        const std::string name = tmpl.substr(i + 1, j - i - 1);
        auto it = bindings.find(name);
        if (it == bindings.end()) throw TemplateError("unbound placeholder {" + name + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return out;
}

std::string format_similar_cases(const std::vector<SimilarCase>& cases) {
  if (cases.empty()) return "[]";
  std::ostringstream o;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    o << (i ? "\n" : "") << "- state_vec: [";
    for (std::size_t j = 0; j < c.record.state_vec.size(); ++j) {
      o << (j ? ", " : "") << format_number(c.record.state_vec[j]);
    }
    o << "], action: " << c.record.action << ", reward: " << format_number(c.record.reward)
      << ", distance: " << std::fixed << std::setprecision(3) << c.distance << std::defaultfloat;
  }
  return o.str();
}

Bindings context_bindings(const DecisionContext& ctx) {
  const auto& obs = ctx.observation;
  Bindings b;
  b["period"] = std::to_string(ctx.period);
  b["stage"] = std::to_string(ctx.stage);
  b["num_stages"] = std::to_string(ctx.num_stages);
  b["top_stage"] = std::to_string(ctx.num_stages - 1);
  b["lead_time"] = std::to_string(obs.lead_time);
  b["inventory"] = std::to_string(obs.inventory);
  b["backlog"] = std::to_string(obs.backlog);
  b["upstream_backlog"] = std::to_string(obs.upstream_backlog);
  b["sales"] = join(obs.sales_history);
  b["deliveries"] = join(obs.deliveries);
  b["demand_description"] = ctx.demand_description;
  b["downstream"] = ctx.stage == 0 ? "the customers" : "stage " + std::to_string(ctx.stage - 1);
  b["downstream_order"] = std::to_string(ctx.downstream_order);
  b["prod_capacity"] = ctx.prod_capacity ? std::to_string(*ctx.prod_capacity) + " unit(s)" : "no limit";
  b["similar_cases"] = format_similar_cases(ctx.similar_cases.value_or(std::vector<SimilarCase>{}));
  return b;
}

std::string build_prompt(const PromptBundle& bundle, const DecisionContext& ctx) {
  const Bindings b = context_bindings(ctx);
  std::string out = render_template(bundle.decision, b);
  auto append = [&](const std::string& section) {
    out += "\n\n";
    out += render_template(section, b);
  };
  if (bundle.include_step_description) append(bundle.step_description);
  if (bundle.include_safety_stock) append(bundle.safety_stock);
  if (bundle.include_memory_usage) {
    append(bundle.memory_usage);
  } else if (bundle.include_case_list) {
    append(bundle.case_list);
  }
  return out;
}

std::string build_system_prompt(const PromptBundle& bundle, const DecisionContext& ctx) {
  return render_template(bundle.system, context_bindings(ctx));
}

}  // namespace echelon
