#pragma once

#include <optional>
#include <span>
#include <string>

#include "echelon/env.hpp"
#include "echelon/scenario.hpp"

namespace echelon {

/// Which stock figure a heuristic compares against its target.
enum class StockBasis {
  on_hand,   // I[m][t-1]
  position,  // I[m][t-1] + in-transit deliveries + upstream backlog still owed to us
};

enum class Rounding { half_up, truncate };

/// Order up to the stage capacity.
///
/// With the default `position` basis the published Base-Stock rewards are reproduced
/// exactly; `on_hand` is the literal "c - I" form.
Units base_stock_order(const Observation& obs, const StageParams& params,
                       StockBasis basis = StockBasis::position);

/// Tracking-demand: target = mean(recent sales over L_max periods) * L_m + own backlog.
/// `recent_sales` holds the last L_max sales of this stage, oldest first, zero-padded
/// before period 1. Throws ConfigError when it is empty.
Units tracking_demand_order(const Observation& obs, std::span<const Units> recent_sales,
                            StockBasis basis = StockBasis::position, Rounding rounding = Rounding::truncate);

struct ForecastModel {
  DemandModel demand;
  int horizon = 0;
};

struct Forecast {
  double mu_hat = 0;
  double sigma_hat = 0;
};

/// Mean of the known demand over periods t .. min(t + L, T); sigma is zero for
/// deterministic demand.
Forecast forecast(const ForecastModel& model, int t, int lead_time);

enum class CapRule { supplier_capacity, own_capacity, unclamped };

struct SafetyStockParams {
  double z = 0.0;
  CapRule cap_rule = CapRule::supplier_capacity;
};

/// Capacity that clamps a safety-stock order, nullopt when unclamped. The top stage has
/// no supplier capacity, so supplier_capacity leaves it unclamped.
std::optional<Units> order_cap(const ScenarioSpec& spec, int stage, CapRule rule);

/// Lead-time-safe order-up-to. Position = inventory + sum(deliveries) - backlog,
/// target = (L + 1) mu + z sigma sqrt(L + 1), order = clamp(round(target - position), 0, cap).
Units safety_stock_order(const Observation& obs, const Forecast& fc, const SafetyStockParams& ss,
                         std::optional<Units> cap);

/// Convenience overload that forecasts from the scenario and derives the cap.
Units safety_stock_order(const Observation& obs, const ScenarioSpec& spec, const SafetyStockParams& ss);

/// Scripted decision rules selectable by name.
enum class PolicyKind { base_stock, tracking_demand, safety_stock };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& s);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::safety_stock;
  SafetyStockParams safety_stock;
  StockBasis basis = StockBasis::position;
  Rounding tracking_rounding = Rounding::truncate;
  std::optional<int> lead_time_max;  // tracking-demand window; defaults to the scenario max
};

/// Evaluates a policy for one stage against the live environment (the tracking rule
/// needs a sales window longer than the observation carries).
Units policy_order(const PolicyConfig& cfg, const Environment& env, int stage);

/// Same, from an observation plus the stage's recent sales over the tracking window.
Units policy_order(const PolicyConfig& cfg, const ScenarioSpec& spec, const Observation& obs,
                   std::span<const Units> recent_sales);

}  // namespace echelon
