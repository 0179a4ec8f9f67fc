#include "echelon/scenario.hpp"

#include <algorithm>
#include <string>

#include "echelon/errors.hpp"

namespace echelon {

namespace {

Units ceil_div(Units num, Units den) { return (num + den - 1) / den; }

}  // namespace

std::string to_string(DemandModel::Kind kind) {
  switch (kind) {
    case DemandModel::Kind::constant: return "constant";
    case DemandModel::Kind::increasing: return "increasing";
    case DemandModel::Kind::decreasing: return "decreasing";
    case DemandModel::Kind::explicit_series: return "explicit";
  }
  return "unknown";
}

DemandModel::Kind demand_kind_from_string(const std::string& s) {
  if (s == "constant") return DemandModel::Kind::constant;
  if (s == "increasing") return DemandModel::Kind::increasing;
  if (s == "decreasing") return DemandModel::Kind::decreasing;
  if (s == "explicit") return DemandModel::Kind::explicit_series;
  throw ConfigError("unknown demand kind '" + s + "'");
}

Units demand_at(const DemandModel& model, int t, int horizon) {
  if (t < 1 || t > horizon) {
    throw DomainError("demand period " + std::to_string(t) + " outside [1, " + std::to_string(horizon) + "]");
  }
  switch (model.kind) {
    case DemandModel::Kind::constant:
      return model.value;
    case DemandModel::Kind::increasing:
      return 2 + ceil_div(t, 3);
    case DemandModel::Kind::decreasing:
      // The published pattern is anchored on a 12-period horizon.
      return 2 + ceil_div(12 - (t - 1), 3);
    case DemandModel::Kind::explicit_series:
      if (static_cast<std::size_t>(t) > model.series.size()) {
        throw DomainError("explicit demand has no value for period " + std::to_string(t));
      }
      return model.series[t - 1];
  }
  return 0;
}

int ScenarioSpec::max_lead_time() const {
  int lmax = 0;
  for (const auto& s : stages) lmax = std::max(lmax, s.lead_time);
  return lmax;
}

void validate(const ScenarioSpec& spec, bool allow_empty_horizon) {
  if (spec.stages.empty()) throw ConfigError("scenario '" + spec.name + "' has no stages");
  if (spec.horizon < 0 || (spec.horizon == 0 && !allow_empty_horizon)) {
    throw ConfigError("scenario '" + spec.name + "' needs num_periods >= 1");
  }
  for (std::size_t i = 0; i < spec.stages.size(); ++i) {
    const auto& s = spec.stages[i];
    const std::string where = "stage " + std::to_string(i) + ": ";
    if (s.stage_index != static_cast<int>(i)) throw ConfigError(where + "stage indices must be contiguous from 0");
    if (s.lead_time < 1) throw ConfigError(where + "lead time must be >= 1");
    if (s.capacity < 0) throw ConfigError(where + "capacity must be >= 0");
    if (s.init_inventory < 0) throw ConfigError(where + "initial inventory must be >= 0");
    if (s.sale_price < 0 || s.order_cost < 0 || s.backlog_cost < 0 || s.holding_cost < 0) {
      throw ConfigError(where + "prices and costs must be >= 0");
    }
  }
  if (spec.demand.kind == DemandModel::Kind::constant && spec.demand.value < 0) {
    throw ConfigError("constant demand must be >= 0");
  }
  if (spec.demand.kind == DemandModel::Kind::explicit_series) {
    if (spec.demand.series.size() < static_cast<std::size_t>(spec.horizon)) {
      throw ConfigError("explicit demand lists fewer values than num_periods");
    }
    if (std::any_of(spec.demand.series.begin(), spec.demand.series.end(), [](Units d) { return d < 0; })) {
      throw ConfigError("explicit demand values must be >= 0");
    }
  }
}

}  // namespace echelon
