#pragma once

#include <cstdint>
#include <vector>

namespace echelon {

/// Min-cost flow of free value on a small directed graph, by successive shortest
/// paths with a label-correcting search (arc costs may be negative; the graph given
/// must not contain a negative cycle).
///
/// Arc costs are lexicographic pairs (priority, money). Arcs with priority -1 are
/// "forced": the optimum routes as many units through them as possible before money
/// is considered at all. This models fixed node supplies that must go somewhere.
class MinCostFlow {
 public:
  using Flow = std::int64_t;
  static constexpr Flow unbounded = Flow{1} << 50;

  explicit MinCostFlow(int num_nodes);

  int add_node();
  /// Returns the arc id.
  int add_arc(int from, int to, Flow capacity, double cost, bool forced = false);

  struct Result {
    double cost = 0;    // money part of the optimum
    Flow flow = 0;      // units sent from source to sink
    Flow forced = 0;    // units sent through forced arcs
  };

  /// Sends flow from `source` to `sink` while a path of negative lexicographic cost
  /// exists. Can be called once per instance.
  Result solve(int source, int sink);

  Flow flow_on(int arc) const;
  int num_nodes() const { return static_cast<int>(head_.size()); }

 private:
  struct Arc {
    int to;
    int next;
    Flow residual;
    std::int64_t priority;
    double cost;
  };

  std::vector<int> head_;
  std::vector<Arc> arcs_;
  std::vector<Flow> capacity_;
};

}  // namespace echelon
