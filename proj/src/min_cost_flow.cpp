#include "echelon/min_cost_flow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "echelon/errors.hpp"

namespace echelon {

namespace {

struct Dist {
  std::int64_t priority;
  double money;
};

constexpr double kEps = 1e-9;

bool less(const Dist& a, const Dist& b) {
  if (a.priority != b.priority) return a.priority < b.priority;
  return a.money < b.money - kEps;
}

}  // namespace

MinCostFlow::MinCostFlow(int num_nodes) : head_(num_nodes, -1) {}

int MinCostFlow::add_node() {
  head_.push_back(-1);
  return static_cast<int>(head_.size()) - 1;
}

int MinCostFlow::add_arc(int from, int to, Flow capacity, double cost, bool forced) {
  if (from < 0 || to < 0 || from >= num_nodes() || to >= num_nodes()) throw DomainError("arc endpoint out of range");
  if (capacity < 0) throw DomainError("arc capacity must be >= 0");
  const int id = static_cast<int>(arcs_.size());
  const std::int64_t prio = forced ? -1 : 0;
  arcs_.push_back({to, head_[from], capacity, prio, cost});
  head_[from] = id;
  arcs_.push_back({from, head_[to], 0, -prio, -cost});
  head_[to] = id + 1;
  capacity_.push_back(capacity);
  return id / 2;
}

MinCostFlow::Flow MinCostFlow::flow_on(int arc) const { return capacity_[arc] - arcs_[2 * arc].residual; }

MinCostFlow::Result MinCostFlow::solve(int source, int sink) {
  const int n = num_nodes();
  const Dist inf{std::numeric_limits<std::int64_t>::max(), 0};
  std::vector<Dist> dist(n);
  std::vector<int> via(n);
  std::vector<char> queued(n);
  std::deque<int> queue;
  Result res;

  for (;;) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(via.begin(), via.end(), -1);
    dist[source] = {0, 0};
    queue.assign(1, source);
    std::fill(queued.begin(), queued.end(), 0);
    queued[source] = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      queued[u] = 0;
      for (int a = head_[u]; a != -1; a = arcs_[a].next) {
        const Arc& arc = arcs_[a];
        if (arc.residual <= 0) continue;
        const Dist cand{dist[u].priority + arc.priority, dist[u].money + arc.cost};
        if (less(cand, dist[arc.to])) {
          dist[arc.to] = cand;
          via[arc.to] = a;
          if (!queued[arc.to]) {
            queued[arc.to] = 1;
            queue.push_back(arc.to);
          }
        }
      }
    }
    if (via[sink] == -1) break;
    const Dist d = dist[sink];
    if (!(d.priority < 0 || (d.priority == 0 && d.money < -kEps))) break;

    Flow push = unbounded;
    for (int v = sink; v != source; v = arcs_[via[v] ^ 1].to) push = std::min(push, arcs_[via[v]].residual);
    if (push >= unbounded) throw DomainError("min-cost flow is unbounded");
    for (int v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
      arcs_[via[v]].residual -= push;
      arcs_[via[v] ^ 1].residual += push;
    }
    res.flow += push;
    res.forced += -d.priority * push;
    res.cost += d.money * static_cast<double>(push);
  }
  return res;
}

}  // namespace echelon
