#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "echelon/env.hpp"
#include "echelon/scenario.hpp"

namespace echelon {

/// Order matrix O[m][t], stored as orders[m][t - 1].
struct OrderSchedule {
  std::vector<std::vector<Units>> orders;

  static OrderSchedule zeros(int num_stages, int horizon);
  int num_stages() const { return static_cast<int>(orders.size()); }
  int horizon() const { return orders.empty() ? 0 : static_cast<int>(orders.front().size()); }
  Units at(int stage, int period) const { return orders[stage][period - 1]; }
  Units& at(int stage, int period) { return orders[stage][period - 1]; }

  bool operator==(const OrderSchedule&) const = default;
};

/// Throws DomainError unless the schedule is M x T with non-negative entries.
void check_schedule(const ScenarioSpec& spec, const OrderSchedule& sched);

/// Replays the schedule through the environment and returns the total reward.
Money evaluate_schedule(const ScenarioSpec& spec, const OrderSchedule& sched);

/// Replays the schedule and returns the finished environment.
Environment simulate_schedule(const ScenarioSpec& spec, const OrderSchedule& sched);

/// Orders placed in a finished or partial rollout.
OrderSchedule schedule_of(const Environment& env);

enum class BoundKind {
  /// Network relaxation of the remaining horizon (see completion_upper_bound).
  flow,
  /// Realized reward plus every remaining demand unit sold at the full price of every
  /// stage with no cost at all.
  simple,
};

/// Upper bound on the total reward of any completion of `env`: the committed periods,
/// plus the orders already buffered for the next period, plus free choices afterwards.
///
/// The remaining horizon is relaxed to a min-cost flow over (stage, period) inventory
/// nodes: units are held (holding cost), shipped downstream within the supplier
/// capacity and arriving after the lead time (order cost minus the supplier's sale
/// price), bought by the top stage (order cost) or sold to customers within the retailer
/// capacity (sale price plus the backlog cost saved until the horizon). Ordering
/// mechanics and upstream backlog costs are dropped, so the bound never underestimates.
Money completion_upper_bound(const Environment& env, BoundKind kind = BoundKind::flow);

enum class SolveStatus { optimal, bound_only };

std::string to_string(SolveStatus s);

struct SolveBudget {
  std::optional<std::uint64_t> max_nodes;
  std::optional<std::chrono::milliseconds> max_time;
  /// Explicit cap on every order, e.g. to compare against an enumeration with the same cap.
  std::optional<Units> order_ceiling;
  BoundKind bound = BoundKind::flow;
  /// Skip a node when the same state was already reached with at least as much reward.
  bool use_transpositions = true;
  /// Seed the incumbent with heuristic rollouts.
  bool seed_with_heuristics = true;
};

struct SolveResult {
  Money objective = 0;      // evaluate_schedule(schedule)
  OrderSchedule schedule;
  std::uint64_t nodes = 0;
  SolveStatus status = SolveStatus::optimal;
  Money upper_bound = 0;    // equals objective when status is optimal
  double seconds = 0;
};

/// Exact centralized optimum by depth-first branch and bound. Periods are branched
/// chronologically and stages top-down inside a period; each candidate order is
/// bounded before it is explored and children are visited best bound first.
///
/// Candidate orders for stage m in period t never exceed
///   * what the supplier can ship this period minus its existing backlog to m
///     (an unshipped order only adds supplier backlog; ordering later ships the same),
///   * the retailer-bound demand plus backlogs, and c_m times the periods in which the
///     units could still be passed on, when no internal transfer earns a margin,
///   * SolveBudget::order_ceiling. With an explicit ceiling the first reduction is
///     dropped, so the result is the optimum over schedules whose entries stay within it.
/// Exhausting the budget yields status bound_only with the best schedule found and an
/// upper bound over every unexplored subtree.
SolveResult solve(const ScenarioSpec& spec, const SolveBudget& budget = {});

/// Largest order worth considering for `stage` in the upcoming period of `env`.
Units order_ceiling(const Environment& env, int stage, std::optional<Units> explicit_cap = std::nullopt);

// Integer program export -----------------------------------------------------------

struct IpStats {
  std::size_t continuous_vars = 0;  // O, R, S, B, I per (stage, period)
  std::size_t binary_vars = 0;      // min-selection indicators
  std::size_t constraints = 0;
};

/// Writes the planning problem in LP format. Variables O_m_t, R_m_t, S_m_t, B_m_t,
/// I_m_t (integers) plus binaries selecting the active term of every min. Each min
/// z = min(a, b, c) is encoded as z <= a, z <= b, z <= c and z >= term - M (1 - y_term)
/// with exactly one y_term = 1. The objective maximizes the total reward.
IpStats export_ip(const ScenarioSpec& spec, std::ostream& out);
IpStats export_ip(const ScenarioSpec& spec, const std::string& path);

/// Plain text order matrix: one line per stage, T whitespace-separated integers.
/// Lines starting with '#' and blank lines are ignored.
OrderSchedule read_schedule(std::istream& in);
OrderSchedule read_schedule(const std::string& path);
void write_schedule(const OrderSchedule& sched, std::ostream& out);
void write_schedule(const OrderSchedule& sched, const std::string& path);

/// Reads the O_m_t values out of a solution file of an external MILP solver. Accepts
/// "name value" or "name = value" pairs per line (HiGHS, CBC, Gurobi .sol and similar
/// layouts); non-integral values are rounded to the nearest integer.
OrderSchedule read_ip_solution(const ScenarioSpec& spec, const std::string& path);

}  // namespace echelon
