#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "echelon/scenario.hpp"

namespace echelon {

/// What stage m sees when deciding in period t. Every quantity refers to the end of
/// period t-1; windows cover periods t-L_m .. t-1, oldest first, zero before period 1.
struct Observation {
  int stage = 0;
  int period = 0;
  Units inventory = 0;
  Units backlog = 0;
  Units upstream_backlog = 0;
  int lead_time = 1;
  std::vector<Units> sales_history;
  std::vector<Units> deliveries;

  /// [inventory, backlog, upstream_backlog, lead_time, sales..., deliveries...],
  /// dimension 4 + 2 * lead_time.
  std::vector<double> state_vector() const;
  /// Inventory position: on hand plus everything shipped toward this stage but not yet
  /// arrived, including this period's arrival, minus own backlog.
  Units inventory_position() const;
  Units in_transit() const;

  bool operator==(const Observation&) const = default;
};

inline int state_dimension(int lead_time) { return 4 + 2 * lead_time; }

/// Per-stage series indexed by period 0..T. Entry 0 is the pre-episode state.
struct StageSeries {
  std::vector<Units> inventory;
  std::vector<Units> backlog;
  std::vector<Units> sales;
  std::vector<Units> shipment;
  std::vector<Units> order;
  std::vector<Money> profit;

  bool operator==(const StageSeries&) const = default;
};

struct EnvState {
  int period = 0;  // last committed period
  std::vector<StageSeries> stages;
  std::vector<Units> demand;                      // demand[t], demand[0] = 0
  std::vector<std::optional<Units>> buffered;     // orders for period + 1

  bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
  std::vector<Money> rewards;
  std::vector<Observation> next_observations;
  bool done = false;
};

/// Serial multi-echelon supply chain with deterministic demand.
///
/// A period is two-phase: every stage submits its order with submit_order(), then
/// advance_period() commits the whole period at once:
///   arrivals   R[m][t-L_m] join inventory
///   shipments  R[m][t] = min(B[m+1][t-1] + O[m][t], c[m+1], I[m+1][t-1] + R[m+1][t-L_{m+1}]),
///              R[M-1][t] = O[M-1][t]
///   sales      S[m][t] = R[m-1][t], S[0][t] = min(B[0][t-1] + D[t], c[0], I[0][t-1] + R[0][t-L_0])
///   backlog    B[m][t] = B[m][t-1] + O[m-1][t] - S[m][t]  (O[-1] is customer demand)
///   inventory  I[m][t] = I[m][t-1] + R[m][t-L_m] - S[m][t]
///   profit     P[m][t] = p_m S - r_m R - k_m B - h_m I
class Environment {
 public:
  explicit Environment(ScenarioSpec spec);

  const ScenarioSpec& spec() const { return spec_; }
  const EnvState& state() const { return state_; }
  int num_stages() const { return spec_.num_stages(); }
  int period() const { return state_.period; }
  int horizon() const { return spec_.horizon; }
  bool done() const { return state_.period >= spec_.horizon; }

  void reset();

  void submit_order(int stage, Units quantity);
  bool order_submitted(int stage) const;
  StepOutcome advance_period();

  Observation observe(int stage) const;

  /// Sum of all recorded profits; throws ProtocolError before the last period.
  Money total_reward() const;
  /// Profit accumulated so far, allowed mid-episode.
  Money realized_reward() const;

  // History lookups. Periods <= 0 read as the pre-episode state (zero flows,
  // initial inventory); periods beyond the committed one are an error.
  Units inventory(int stage, int period) const;
  Units backlog(int stage, int period) const;
  Units sales(int stage, int period) const;
  Units shipment(int stage, int period) const;
  Units order(int stage, int period) const;
  Money profit(int stage, int period) const;
  Units demand(int period) const;

  /// Shipment toward `stage` that `quantity` would trigger in the upcoming period.
  Units preview_shipment(int stage, Units quantity) const;
  /// Units the supplier of `stage` could ship in the upcoming period (capacity and
  /// availability, before its backlog is served). Unlimited for the top stage.
  std::optional<Units> supplier_shippable(int stage) const;
  /// Sales of `stage` over the last `length` committed periods, oldest first.
  std::vector<Units> sales_window(int stage, int length) const;

 private:
  void check_stage(int stage) const;
  void check_period(int period) const;

  ScenarioSpec spec_;
  EnvState state_;
};

/// One row per (period, stage): t,m,D,O,R,S,B,I,P.
void write_trace_csv(const EnvState& state, std::ostream& out);
void write_trace_csv(const EnvState& state, const std::string& path);
void write_trace_csv(const Environment& env, std::ostream& out);
void write_trace_csv(const Environment& env, const std::string& path);

}  // namespace echelon
