#include "echelon/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "echelon/errors.hpp"

namespace echelon {

namespace {

Units stock_level(const Observation& obs, StockBasis basis) {
  switch (basis) {
    case StockBasis::on_hand: return obs.inventory;
    case StockBasis::position: return obs.inventory + obs.in_transit() + obs.upstream_backlog;
  }
  return obs.inventory;
}

Units round_units(double x, Rounding r) {
  // Guard against 2.9999999 style residue from the averaging.
  constexpr double eps = 1e-9;
  switch (r) {
    case Rounding::half_up: return static_cast<Units>(std::floor(x + 0.5 + eps));
    case Rounding::truncate: return static_cast<Units>(std::trunc(x + (x >= 0 ? eps : -eps)));
  }
  return 0;
}

}  // namespace

Units base_stock_order(const Observation& obs, const StageParams& params, StockBasis basis) {
  return std::max<Units>(0, params.capacity - stock_level(obs, basis));
}

Units tracking_demand_order(const Observation& obs, std::span<const Units> recent_sales, StockBasis basis,
                            Rounding rounding) {
  if (recent_sales.empty()) throw ConfigError("tracking-demand needs L_max >= 1");
  const double mean_sales =
      static_cast<double>(std::accumulate(recent_sales.begin(), recent_sales.end(), Units{0})) /
      static_cast<double>(recent_sales.size());
  const double target = mean_sales * obs.lead_time + static_cast<double>(obs.backlog);
  return std::max<Units>(0, round_units(target - static_cast<double>(stock_level(obs, basis)), rounding));
}

Forecast forecast(const ForecastModel& model, int t, int lead_time) {
  if (t < 1 || t > model.horizon) {
    throw DomainError("forecast period " + std::to_string(t) + " outside [1, " + std::to_string(model.horizon) + "]");
  }
  const int last = std::min(t + lead_time, model.horizon);
  Units sum = 0;
  for (int u = t; u <= last; ++u) sum += demand_at(model.demand, u, model.horizon);
  return {static_cast<double>(sum) / static_cast<double>(last - t + 1), 0.0};
}

std::optional<Units> order_cap(const ScenarioSpec& spec, int stage, CapRule rule) {
  switch (rule) {
    case CapRule::supplier_capacity:
      if (stage + 1 < spec.num_stages()) return spec.stages[stage + 1].capacity;
      return std::nullopt;
    case CapRule::own_capacity: return spec.stages[stage].capacity;
    case CapRule::unclamped: return std::nullopt;
  }
  return std::nullopt;
}

Units safety_stock_order(const Observation& obs, const Forecast& fc, const SafetyStockParams& ss,
                         std::optional<Units> cap) {
  const double cover = obs.lead_time + 1.0;
  const double target = cover * fc.mu_hat + ss.z * fc.sigma_hat * std::sqrt(cover);
  const double gap = target - static_cast<double>(obs.inventory_position());
  Units qty = std::max<Units>(0, round_units(gap, Rounding::half_up));
  if (cap) qty = std::min(qty, *cap);
  return qty;
}

Units safety_stock_order(const Observation& obs, const ScenarioSpec& spec, const SafetyStockParams& ss) {
  const Forecast fc = forecast({spec.demand, spec.horizon}, obs.period, obs.lead_time);
  return safety_stock_order(obs, fc, ss, order_cap(spec, obs.stage, ss.cap_rule));
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::base_stock: return "base-stock";
    case PolicyKind::tracking_demand: return "tracking-demand";
    case PolicyKind::safety_stock: return "safety-stock";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "base-stock" || s == "base_stock") return PolicyKind::base_stock;
  if (s == "tracking-demand" || s == "tracking_demand") return PolicyKind::tracking_demand;
  if (s == "safety-stock" || s == "safety_stock") return PolicyKind::safety_stock;
  throw ConfigError("unknown policy '" + s + "'");
}

Units policy_order(const PolicyConfig& cfg, const ScenarioSpec& spec, const Observation& obs,
                   std::span<const Units> recent_sales) {
  switch (cfg.kind) {
    case PolicyKind::base_stock: return base_stock_order(obs, spec.stages[obs.stage], cfg.basis);
    case PolicyKind::tracking_demand:
      return tracking_demand_order(obs, recent_sales, cfg.basis, cfg.tracking_rounding);
    case PolicyKind::safety_stock: return safety_stock_order(obs, spec, cfg.safety_stock);
  }
  return 0;
}

Units policy_order(const PolicyConfig& cfg, const Environment& env, int stage) {
  const Observation obs = env.observe(stage);
  const int window = cfg.lead_time_max.value_or(env.spec().max_lead_time());
  if (window <= 0) throw ConfigError("tracking-demand needs L_max >= 1");
  const auto sales = env.sales_window(stage, window);
  return policy_order(cfg, env.spec(), obs, sales);
}

}  // namespace echelon
