#include "echelon/env.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include "echelon/errors.hpp"

namespace echelon {

std::vector<double> Observation::state_vector() const {
  std::vector<double> v;
  v.reserve(4 + sales_history.size() + deliveries.size());
  v.push_back(static_cast<double>(inventory));
  v.push_back(static_cast<double>(backlog));
  v.push_back(static_cast<double>(upstream_backlog));
  v.push_back(static_cast<double>(lead_time));
  for (Units s : sales_history) v.push_back(static_cast<double>(s));
  for (Units r : deliveries) v.push_back(static_cast<double>(r));
  return v;
}

Units Observation::in_transit() const { return std::accumulate(deliveries.begin(), deliveries.end(), Units{0}); }

Units Observation::inventory_position() const { return inventory + in_transit() - backlog; }

Environment::Environment(ScenarioSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  reset();
}

void Environment::reset() {
  const int m_count = num_stages();
  const auto len = static_cast<std::size_t>(spec_.horizon) + 1;
  state_ = EnvState{};
  state_.period = 0;
  state_.stages.assign(m_count, StageSeries{});
  for (int m = 0; m < m_count; ++m) {
    auto& s = state_.stages[m];
    s.inventory.assign(len, 0);
    s.backlog.assign(len, 0);
    s.sales.assign(len, 0);
    s.shipment.assign(len, 0);
    s.order.assign(len, 0);
    s.profit.assign(len, 0.0);
    s.inventory[0] = spec_.stages[m].init_inventory;
  }
  state_.demand.assign(len, 0);
  state_.buffered.assign(m_count, std::nullopt);
}

void Environment::check_stage(int stage) const {
  if (stage < 0 || stage >= num_stages()) {
    throw DomainError("stage " + std::to_string(stage) + " outside [0, " + std::to_string(num_stages()) + ")");
  }
}

void Environment::check_period(int period) const {
  if (period > state_.period) {
    throw DomainError("period " + std::to_string(period) + " not yet committed (current " +
                      std::to_string(state_.period) + ")");
  }
}

void Environment::submit_order(int stage, Units quantity) {
  check_stage(stage);
  if (done()) throw ProtocolError("episode already complete");
  if (quantity < 0) throw DomainError("order quantity must be non-negative, got " + std::to_string(quantity));
  auto& slot = state_.buffered[stage];
  if (slot) {
    throw ProtocolError("stage " + std::to_string(stage) + " already ordered in period " +
                        std::to_string(state_.period + 1));
  }
  slot = quantity;
}

bool Environment::order_submitted(int stage) const {
  check_stage(stage);
  return state_.buffered[stage].has_value();
}

Units Environment::inventory(int stage, int period) const {
  check_stage(stage);
  if (period <= 0) return spec_.stages[stage].init_inventory;
  check_period(period);
  return state_.stages[stage].inventory[period];
}

Units Environment::backlog(int stage, int period) const {
  check_stage(stage);
  if (period <= 0) return 0;
  check_period(period);
  return state_.stages[stage].backlog[period];
}

Units Environment::sales(int stage, int period) const {
  check_stage(stage);
  if (period <= 0) return 0;
  check_period(period);
  return state_.stages[stage].sales[period];
}

Units Environment::shipment(int stage, int period) const {
  check_stage(stage);
  if (period <= 0) return 0;
  check_period(period);
  return state_.stages[stage].shipment[period];
}

Units Environment::order(int stage, int period) const {
  check_stage(stage);
  if (period <= 0) return 0;
  check_period(period);
  return state_.stages[stage].order[period];
}

Money Environment::profit(int stage, int period) const {
  check_stage(stage);
  if (period <= 0) return 0;
  check_period(period);
  return state_.stages[stage].profit[period];
}

Units Environment::demand(int period) const {
  if (period <= 0) return 0;
  check_period(period);
  return state_.demand[period];
}

std::optional<Units> Environment::supplier_shippable(int stage) const {
  check_stage(stage);
  if (stage == num_stages() - 1) return std::nullopt;
  const int t = state_.period + 1;
  const int up = stage + 1;
  const Units available = inventory(up, t - 1) + shipment(up, t - spec_.stages[up].lead_time);
  return std::min(spec_.stages[up].capacity, available);
}

Units Environment::preview_shipment(int stage, Units quantity) const {
  check_stage(stage);
  if (stage == num_stages() - 1) return quantity;
  const int t = state_.period + 1;
  const Units wanted = backlog(stage + 1, t - 1) + quantity;
  return std::min(wanted, *supplier_shippable(stage));
}

std::vector<Units> Environment::sales_window(int stage, int length) const {
  check_stage(stage);
  std::vector<Units> out;
  out.reserve(std::max(length, 0));
  const int t = state_.period + 1;
  for (int tau = t - length; tau < t; ++tau) out.push_back(sales(stage, tau));
  return out;
}

StepOutcome Environment::advance_period() {
  if (done()) throw ProtocolError("episode already complete");
  const int m_count = num_stages();
  for (int m = 0; m < m_count; ++m) {
    if (!state_.buffered[m]) {
      throw ProtocolError("stage " + std::to_string(m) + " has not ordered for period " +
                          std::to_string(state_.period + 1));
    }
  }

  const int t = state_.period + 1;
  const Units demand_t = spec_.demand_at(t);

  std::vector<Units> orders(m_count);
  std::vector<Units> ship(m_count);
  std::vector<Units> arrival(m_count);
  for (int m = 0; m < m_count; ++m) {
    orders[m] = *state_.buffered[m];
    arrival[m] = shipment(m, t - spec_.stages[m].lead_time);
  }
  // Top-down; each shipment only reads period t-1 values and past shipments.
  for (int m = m_count - 1; m >= 0; --m) ship[m] = preview_shipment(m, orders[m]);

  for (int m = 0; m < m_count; ++m) {
    const auto& p = spec_.stages[m];
    const Units inv_prev = inventory(m, t - 1);
    const Units back_prev = backlog(m, t - 1);
    Units sold = 0;
    Units incoming = 0;
    if (m == 0) {
      sold = std::min({back_prev + demand_t, p.capacity, inv_prev + arrival[m]});
      incoming = demand_t;
    } else {
      sold = ship[m - 1];
      incoming = orders[m - 1];
    }
    const Units back = back_prev + incoming - sold;
    const Units inv = inv_prev + arrival[m] - sold;

    auto& s = state_.stages[m];
    s.order[t] = orders[m];
    s.shipment[t] = ship[m];
    s.sales[t] = sold;
    s.backlog[t] = back;
    s.inventory[t] = inv;
    s.profit[t] = p.sale_price * static_cast<Money>(sold) - p.order_cost * static_cast<Money>(ship[m]) -
                  p.backlog_cost * static_cast<Money>(back) - p.holding_cost * static_cast<Money>(inv);
  }
  state_.demand[t] = demand_t;
  state_.period = t;
  std::fill(state_.buffered.begin(), state_.buffered.end(), std::nullopt);

  StepOutcome out;
  out.rewards.reserve(m_count);
  out.next_observations.reserve(m_count);
  for (int m = 0; m < m_count; ++m) {
    out.rewards.push_back(state_.stages[m].profit[t]);
    out.next_observations.push_back(observe(m));
  }
  out.done = done();
  return out;
}

Observation Environment::observe(int stage) const {
  check_stage(stage);
  const int t = state_.period + 1;
  Observation obs;
  obs.stage = stage;
  obs.period = t;
  obs.lead_time = spec_.stages[stage].lead_time;
  obs.inventory = inventory(stage, t - 1);
  obs.backlog = backlog(stage, t - 1);
  obs.upstream_backlog = stage + 1 < num_stages() ? backlog(stage + 1, t - 1) : 0;
  obs.sales_history.reserve(obs.lead_time);
  obs.deliveries.reserve(obs.lead_time);
  for (int tau = t - obs.lead_time; tau < t; ++tau) {
    obs.sales_history.push_back(sales(stage, tau));
    obs.deliveries.push_back(shipment(stage, tau));
  }
  return obs;
}

Money Environment::realized_reward() const {
  Money total = 0;
  for (const auto& s : state_.stages) {
    for (int t = 1; t <= state_.period; ++t) total += s.profit[t];
  }
  return total;
}

Money Environment::total_reward() const {
  if (!done()) {
    throw ProtocolError("episode incomplete: period " + std::to_string(state_.period) + " of " +
                        std::to_string(spec_.horizon));
  }
  return realized_reward();
}

void write_trace_csv(const EnvState& state, std::ostream& out) {
  const auto old_precision = out.precision(15);
  out << "t,m,D,O,R,S,B,I,P\n";
  for (int t = 1; t <= state.period; ++t) {
    for (std::size_t m = 0; m < state.stages.size(); ++m) {
      const auto& s = state.stages[m];
      out << t << ',' << m << ',' << state.demand[t] << ',' << s.order[t] << ',' << s.shipment[t] << ','
          << s.sales[t] << ',' << s.backlog[t] << ',' << s.inventory[t] << ',' << s.profit[t] << '\n';
    }
  }
  out.precision(old_precision);
}

void write_trace_csv(const EnvState& state, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write trace file " + path);
  write_trace_csv(state, f);
  if (!f) throw IoError("failed writing trace file " + path);
}

void write_trace_csv(const Environment& env, std::ostream& out) { write_trace_csv(env.state(), out); }

void write_trace_csv(const Environment& env, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write trace file " + path);
  write_trace_csv(env.state(), f);
  if (!f) throw IoError("failed writing trace file " + path);
}

}  // namespace echelon
