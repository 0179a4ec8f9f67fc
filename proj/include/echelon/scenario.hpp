#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace echelon {

using Units = std::int64_t;
using Money = double;

struct StageParams {
  int stage_index = 0;
  int lead_time = 1;
  Units capacity = 0;
  Units init_inventory = 0;
  Money sale_price = 0;
  Money order_cost = 0;
  Money backlog_cost = 0;
  Money holding_cost = 0;

  bool operator==(const StageParams&) const = default;
};

/// Deterministic customer demand at the retailer.
struct DemandModel {
  enum class Kind { constant, increasing, decreasing, explicit_series };

  Kind kind = Kind::constant;
  Units value = 0;             // constant
  std::vector<Units> series;   // explicit_series, series[t - 1] is the demand of period t

  static DemandModel constant(Units v) { return {Kind::constant, v, {}}; }
  static DemandModel increasing() { return {Kind::increasing, 0, {}}; }
  static DemandModel decreasing() { return {Kind::decreasing, 0, {}}; }
  static DemandModel explicit_values(std::vector<Units> v) { return {Kind::explicit_series, 0, std::move(v)}; }

  bool operator==(const DemandModel&) const = default;
};

std::string to_string(DemandModel::Kind kind);
DemandModel::Kind demand_kind_from_string(const std::string& s);

/// Demand of period t (1-based) for a horizon of `horizon` periods.
/// increasing: 2 + ceil(t/3); decreasing: 2 + ceil((12 - (t-1))/3).
/// Throws DomainError when t is outside [1, horizon].
Units demand_at(const DemandModel& model, int t, int horizon);

/// One supply chain instance. stages[0] is the retailer, stages.back() buys from an
/// unlimited raw-material supplier.
struct ScenarioSpec {
  std::string name;
  std::vector<StageParams> stages;
  int horizon = 0;
  DemandModel demand;

  int num_stages() const { return static_cast<int>(stages.size()); }
  Units demand_at(int t) const { return echelon::demand_at(demand, t, horizon); }
  int max_lead_time() const;

  bool operator==(const ScenarioSpec&) const = default;
};

/// Throws ConfigError describing the first violated constraint. A zero horizon is
/// only accepted when `allow_empty_horizon` is set (the solver's degenerate case).
void validate(const ScenarioSpec& spec, bool allow_empty_horizon = false);

}  // namespace echelon
