#include "echelon/optimal.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "echelon/errors.hpp"
#include "echelon/min_cost_flow.hpp"
#include "echelon/policies.hpp"

namespace echelon {

OrderSchedule OrderSchedule::zeros(int num_stages, int horizon) {
  return {std::vector<std::vector<Units>>(num_stages, std::vector<Units>(horizon, 0))};
}

void check_schedule(const ScenarioSpec& spec, const OrderSchedule& sched) {
  if (sched.num_stages() != spec.num_stages()) {
    throw DomainError("schedule has " + std::to_string(sched.num_stages()) + " stage rows, scenario has " +
                      std::to_string(spec.num_stages()));
  }
  for (int m = 0; m < sched.num_stages(); ++m) {
    if (static_cast<int>(sched.orders[m].size()) != spec.horizon) {
      throw DomainError("schedule row " + std::to_string(m) + " has " + std::to_string(sched.orders[m].size()) +
                        " periods, scenario has " + std::to_string(spec.horizon));
    }
    for (Units o : sched.orders[m]) {
      if (o < 0) throw DomainError("schedule row " + std::to_string(m) + " has a negative order");
    }
  }
}

Environment simulate_schedule(const ScenarioSpec& spec, const OrderSchedule& sched) {
  check_schedule(spec, sched);
  Environment env(spec);
  for (int t = 1; t <= spec.horizon; ++t) {
    for (int m = 0; m < spec.num_stages(); ++m) env.submit_order(m, sched.at(m, t));
    env.advance_period();
  }
  return env;
}

Money evaluate_schedule(const ScenarioSpec& spec, const OrderSchedule& sched) {
  if (spec.horizon == 0) {
    validate(spec, true);
    check_schedule(spec, sched);
    return 0;
  }
  return simulate_schedule(spec, sched).total_reward();
}

OrderSchedule schedule_of(const Environment& env) {
  auto s = OrderSchedule::zeros(env.num_stages(), env.horizon());
  for (int m = 0; m < env.num_stages(); ++m) {
    for (int t = 1; t <= env.period(); ++t) s.at(m, t) = env.order(m, t);
  }
  return s;
}

std::string to_string(SolveStatus s) { return s == SolveStatus::optimal ? "optimal" : "bound_only"; }

// Bounds ---------------------------------------------------------------------------

namespace {

/// Customer units still to be served in period tau >= t: the carried backlog is due at t.
Units pending_demand(const Environment& env, int tau) {
  const int t = env.period() + 1;
  Units pend = env.spec().demand_at(tau);
  if (tau == t) pend += env.backlog(0, t - 1);
  return pend;
}

Money simple_bound(const Environment& env) {
  const auto& spec = env.spec();
  const int t = env.period() + 1;
  const int T = spec.horizon;
  Units pend = 0;
  for (int tau = t; tau <= T; ++tau) pend += pending_demand(env, tau);
  Money bound = env.realized_reward() + spec.stages[0].sale_price * static_cast<Money>(pend);
  for (int m = 1; m < spec.num_stages(); ++m) {
    const Money margin = spec.stages[m].sale_price - spec.stages[m - 1].order_cost;
    if (margin > 0) bound += margin * static_cast<Money>(spec.stages[m].capacity * (T - t + 1));
  }
  return bound;
}

Money flow_bound(const Environment& env) {
  const auto& spec = env.spec();
  const int M = spec.num_stages();
  const int T = spec.horizon;
  const int t = env.period() + 1;
  const int span = T - t + 1;
  const auto& st = spec.stages;

  const int n_a = M * span;
  const int q0 = n_a;
  const int end = q0 + span;
  const int src = end + 1;
  const int snk = end + 2;
  MinCostFlow g(snk + 1);
  auto a_node = [&](int m, int tau) { return m * span + (tau - t); };
  auto q_node = [&](int tau) { return q0 + (tau - t); };

  std::vector<Units> supply(n_a, 0);
  Money constant = env.realized_reward();

  for (int m = 0; m < M; ++m) {
    supply[a_node(m, t)] += env.inventory(m, t - 1);
    const int L = st[m].lead_time;
    for (int u = std::max(1, t - L); u <= t - 1; ++u) {
      if (u + L <= T) supply[a_node(m, u + L)] += env.shipment(m, u);
    }
  }

  const auto& buffered = env.state().buffered;
  for (int m = 0; m < M; ++m) {
    if (!buffered[m]) continue;
    const Units r = env.preview_shipment(m, *buffered[m]);
    const int L = st[m].lead_time;
    if (t + L <= T) supply[a_node(m, t + L)] += r;
    constant -= st[m].order_cost * static_cast<Money>(r);
    if (m + 1 < M) {
      supply[a_node(m + 1, t)] -= r;
      constant += st[m + 1].sale_price * static_cast<Money>(r);
    }
  }

  for (int i = 0; i < n_a; ++i) {
    if (supply[i] < 0) throw DomainError("negative supply in completion bound");
    if (supply[i] > 0) g.add_arc(src, i, supply[i], 0.0, true);
  }

  for (int m = 0; m < M; ++m) {
    const Money h = st[m].holding_cost;
    for (int tau = t; tau <= T; ++tau) {
      g.add_arc(a_node(m, tau), tau < T ? a_node(m, tau + 1) : end, MinCostFlow::unbounded, h);
    }
  }
  for (int m = 0; m + 1 < M; ++m) {
    const int L = st[m].lead_time;
    const Money cost = st[m].order_cost - st[m + 1].sale_price;
    for (int tau = buffered[m] ? t + 1 : t; tau <= T; ++tau) {
      const int to = tau + L <= T ? a_node(m, tau + L) : end;
      g.add_arc(a_node(m + 1, tau), to, st[m + 1].capacity, cost);
    }
  }
  {
    const int top = M - 1;
    const int L = st[top].lead_time;
    for (int tau = (buffered[top] ? t + 1 : t) + L; tau <= T; ++tau) {
      g.add_arc(src, a_node(top, tau), MinCostFlow::unbounded, st[top].order_cost);
    }
  }

  const Money p0 = st[0].sale_price;
  const Money k0 = st[0].backlog_cost;
  for (int tau = t; tau <= T; ++tau) {
    const Money remaining = static_cast<Money>(T - tau + 1);
    const Units pend = pending_demand(env, tau);
    constant -= k0 * remaining * static_cast<Money>(pend);
    g.add_arc(a_node(0, tau), q_node(tau), st[0].capacity, -(p0 + k0 * remaining));
    if (tau > t) g.add_arc(q_node(tau), q_node(tau - 1), MinCostFlow::unbounded, 0.0);
    if (pend > 0) g.add_arc(q_node(tau), snk, pend, 0.0);
  }
  g.add_arc(end, snk, MinCostFlow::unbounded, 0.0);

  const auto res = g.solve(src, snk);
  const Units total_supply = std::accumulate(supply.begin(), supply.end(), Units{0});
  if (res.forced != total_supply) throw DomainError("completion bound could not route fixed stock");
  return constant - res.cost;
}

}  // namespace

Money completion_upper_bound(const Environment& env, BoundKind kind) {
  if (env.done()) return env.realized_reward();
  return kind == BoundKind::flow ? flow_bound(env) : simple_bound(env);
}

// Search ---------------------------------------------------------------------------

Units order_ceiling(const Environment& env, int stage, std::optional<Units> explicit_cap) {
  const auto& spec = env.spec();
  const int M = spec.num_stages();
  const int t = env.period() + 1;
  const int T = spec.horizon;
  const auto& p = spec.stages[stage];
  Units cap = 0;
  if (stage + 1 < M) {
    // Moving the unshippable part of an order to a later period only works when the later
    // order may grow, so an explicit cap disables this reduction.
    if (explicit_cap) return *explicit_cap;
    cap = std::max<Units>(0, *env.supplier_shippable(stage) - env.backlog(stage + 1, t - 1));
  } else {
    // Stock the top stage can never pass on only costs money, and cutting that order
    // leaves every other quantity unchanged.
    const Units passable_after_arrival = p.capacity * std::max(0, T - t - p.lead_time + 1);
    Units held = env.inventory(stage, t - 1);
    for (int u = std::max(1, t - p.lead_time); u <= t - 1; ++u) held += env.shipment(stage, u);
    const Units passable_total = p.capacity * (T - t + 1);
    cap = std::max<Units>(0, std::min(passable_after_arrival, passable_total - held));
  }
  if (explicit_cap) cap = std::min(cap, *explicit_cap);
  return cap;
}

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<Units>& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Units x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

class Search {
 public:
  Search(const ScenarioSpec& spec, const SolveBudget& budget)
      : spec_(spec), budget_(budget), start_(std::chrono::steady_clock::now()) {}

  SolveResult run() {
    Environment root(spec_);
    seed_incumbent(root);
    const Money root_bound = completion_upper_bound(root, budget_.bound);
    residual_ = -std::numeric_limits<Money>::infinity();
    if (!best_ || root_bound > best_value_ + kEps) descend(root, spec_.num_stages() - 1);

    SolveResult out;
    out.nodes = nodes_;
    out.schedule = best_ ? *best_ : OrderSchedule::zeros(spec_.num_stages(), spec_.horizon);
    out.objective = evaluate_schedule(spec_, out.schedule);
    out.status = aborted_ ? SolveStatus::bound_only : SolveStatus::optimal;
    out.upper_bound = aborted_ ? std::max(out.objective, std::min(residual_, root_bound)) : out.objective;
    out.seconds = elapsed();
    return out;
  }

 private:
  static constexpr Money kEps = 1e-7;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void seed_incumbent(const Environment& root) {
    if (!budget_.seed_with_heuristics) return;
    for (PolicyKind kind : {PolicyKind::safety_stock, PolicyKind::base_stock, PolicyKind::tracking_demand}) {
      PolicyConfig cfg;
      cfg.kind = kind;
      Environment env = root;
      for (int t = 1; t <= spec_.horizon; ++t) {
        for (int m = 0; m < spec_.num_stages(); ++m) {
          Units o = policy_order(cfg, env, m);
          if (budget_.order_ceiling) o = std::min(o, *budget_.order_ceiling);
          env.submit_order(m, o);
        }
        env.advance_period();
      }
      offer(env);
    }
  }

  void offer(const Environment& env) {
    const Money v = env.total_reward();
    if (!best_ || v > best_value_ + kEps) {
      best_value_ = v;
      best_ = schedule_of(env);
    }
  }

  bool out_of_budget() {
    if (aborted_) return true;
    if (budget_.max_nodes && nodes_ >= *budget_.max_nodes) aborted_ = true;
    if (budget_.max_time && (nodes_ & 63) == 0 &&
        std::chrono::steady_clock::now() - start_ >= *budget_.max_time) {
      aborted_ = true;
    }
    return aborted_;
  }

  std::vector<Units> state_key(const Environment& env) const {
    const int t = env.period();
    std::vector<Units> key;
    key.push_back(t);
    for (int m = 0; m < spec_.num_stages(); ++m) {
      key.push_back(env.inventory(m, t));
      key.push_back(env.backlog(m, t));
      for (int u = t - spec_.stages[m].lead_time + 1; u <= t; ++u) key.push_back(env.shipment(m, u));
    }
    return key;
  }

  /// Returns true when the node is dominated by an earlier visit of the same state.
  bool seen_better(const Environment& env) {
    if (!budget_.use_transpositions) return false;
    auto key = state_key(env);
    const Money v = env.realized_reward();
    auto it = table_.find(key);
    if (it != table_.end()) {
      if (it->second >= v - kEps) return true;
      it->second = v;
      return false;
    }
    if (table_.size() < kTableLimit) table_.emplace(std::move(key), v);
    return false;
  }

  /// `env` has orders buffered for the stages above `stage`; decide `stage` next.
  void descend(Environment& env, int stage) {
    ++nodes_;
    if (stage < 0) {
      env.advance_period();
      if (env.done()) {
        offer(env);
        return;
      }
      if (seen_better(env)) return;
      stage = spec_.num_stages() - 1;
    }

    const Units cap = order_ceiling(env, stage, budget_.order_ceiling);
    struct Child {
      Units order;
      Money bound;
    };
    std::vector<Child> children;
    children.reserve(static_cast<std::size_t>(cap) + 1);
    for (Units o = cap; o >= 0; --o) {
      Environment probe = env;
      probe.submit_order(stage, o);
      const bool period_complete = stage == 0;
      Money b;
      if (period_complete) {
        probe.advance_period();
        b = completion_upper_bound(probe, budget_.bound);
      } else {
        b = completion_upper_bound(probe, budget_.bound);
      }
      children.push_back({o, b});
    }
    std::stable_sort(children.begin(), children.end(),
                     [](const Child& a, const Child& b) { return a.bound > b.bound; });

    for (const auto& c : children) {
      if (best_ && c.bound <= best_value_ + kEps) break;
      if (out_of_budget()) {
        residual_ = std::max(residual_, c.bound);
        continue;
      }
      Environment child = env;
      child.submit_order(stage, c.order);
      descend(child, stage - 1);
    }
  }

  static constexpr std::size_t kTableLimit = 4'000'000;

  const ScenarioSpec& spec_;
  SolveBudget budget_;
  std::chrono::steady_clock::time_point start_;
  std::optional<OrderSchedule> best_;
  Money best_value_ = 0;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  Money residual_ = 0;
  std::unordered_map<std::vector<Units>, Money, VecHash> table_;
};

}  // namespace

SolveResult solve(const ScenarioSpec& spec, const SolveBudget& budget) {
  validate(spec, true);
  if (budget.order_ceiling && *budget.order_ceiling < 0) throw ConfigError("order ceiling must be >= 0");
  if (spec.horizon == 0) {
    SolveResult r;
    r.schedule = OrderSchedule::zeros(spec.num_stages(), 0);
    return r;
  }
  return Search(spec, budget).run();
}

// Integer program export -----------------------------------------------------------

namespace {

std::string var(char kind, int m, int t) { return std::string(1, kind) + "_" + std::to_string(m) + "_" + std::to_string(t); }

/// Linear expression with a constant part, printed as "+ 3 x - y".
struct Expr {
  std::vector<std::pair<double, std::string>> terms;
  double constant = 0;

  Expr& add(double c, const std::string& v) {
    if (c != 0) terms.emplace_back(c, v);
    return *this;
  }
};

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(15);
  o << x;
  return o.str();
}

std::string render_terms(const std::vector<std::pair<double, std::string>>& terms) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& [c, v] = terms[i];
    const double a = std::abs(c);
    if (i > 0 && i % 8 == 0) out += "\n   ";
    if (i == 0) {
      out += c < 0 ? "- " : "";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    if (a != 1) out += fmt(a) + " ";
    out += v;
  }
  return out.empty() ? "0" : out;
}

class LpWriter {
 public:
  explicit LpWriter(std::ostream& out) : out_(out) {}

  /// lhs (op) rhs where both sides are expressions; variables move left, constants right.
  void constraint(const Expr& lhs, const std::string& op, const Expr& rhs) {
    std::vector<std::pair<double, std::string>> terms = lhs.terms;
    for (const auto& [c, v] : rhs.terms) terms.emplace_back(-c, v);
    const double k = rhs.constant - lhs.constant;
    rows_ << " c" << ++count_ << ": " << render_terms(terms) << ' ' << op << ' ' << fmt(k) << '\n';
  }

  std::size_t count() const { return count_; }
  std::string rows() const { return rows_.str(); }

 private:
  std::ostream& out_;
  std::ostringstream rows_;
  std::size_t count_ = 0;
};

Expr term_var(const std::string& v) { return Expr{}.add(1, v); }
Expr term_const(double c) {
  Expr e;
  e.constant = c;
  return e;
}

}  // namespace

IpStats export_ip(const ScenarioSpec& spec, std::ostream& out) {
  validate(spec, true);
  const int M = spec.num_stages();
  const int T = spec.horizon;
  const auto& st = spec.stages;

  // Upper bounds on orders that keep an optimal solution (see order_ceiling).
  std::vector<Units> o_max(M);
  for (int m = 0; m < M; ++m) o_max[m] = m + 1 < M ? st[m + 1].capacity : st[m].capacity * T;
  Units total_demand = 0;
  for (int t = 1; t <= T; ++t) total_demand += spec.demand_at(t);
  Units big = total_demand + 1;
  for (int m = 0; m < M; ++m) big += st[m].init_inventory + st[m].capacity + 2 * T * o_max[m];
  const double big_m = static_cast<double>(big);

  // Period-0 values are constants.
  auto B = [&](int m, int t) { return t <= 0 ? term_const(0) : term_var(var('B', m, t)); };
  auto I = [&](int m, int t) {
    return t <= 0 ? term_const(static_cast<double>(st[m].init_inventory)) : term_var(var('I', m, t));
  };
  auto R = [&](int m, int t) { return t <= 0 ? term_const(0) : term_var(var('R', m, t)); };
  auto sum = [](Expr a, const Expr& b) {
    a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
    a.constant += b.constant;
    return a;
  };

  LpWriter w(out);
  std::vector<std::string> binaries;
  auto encode_min = [&](const std::string& z, const std::array<Expr, 3>& parts, const std::string& tag) {
    Expr pick;
    for (int i = 0; i < 3; ++i) {
      const std::string y = "y" + tag + "_" + std::to_string(i);
      binaries.push_back(y);
      w.constraint(term_var(z), "<=", parts[i]);
      // z >= part - big (1 - y)
      Expr rhs = parts[i];
      rhs.constant -= big_m;
      rhs.add(big_m, y);
      w.constraint(term_var(z), ">=", rhs);
      pick.add(1, y);
    }
    w.constraint(pick, "=", term_const(1));
  };

  Expr objective;
  for (int t = 1; t <= T; ++t) {
    const double d = static_cast<double>(spec.demand_at(t));
    for (int m = 0; m < M; ++m) {
      const int L = st[m].lead_time;
      // Shipment toward m.
      if (m + 1 < M) {
        const int Lu = st[m + 1].lead_time;
        encode_min(var('R', m, t),
                   {sum(B(m + 1, t - 1), term_var(var('O', m, t))), term_const(static_cast<double>(st[m + 1].capacity)),
                    sum(I(m + 1, t - 1), R(m + 1, t - Lu))},
                   "R_" + std::to_string(m) + "_" + std::to_string(t));
      } else {
        w.constraint(term_var(var('R', m, t)), "=", term_var(var('O', m, t)));
      }
      // Sales of m.
      Expr incoming;
      if (m == 0) {
        encode_min(var('S', 0, t),
                   {sum(B(0, t - 1), term_const(d)), term_const(static_cast<double>(st[0].capacity)),
                    sum(I(0, t - 1), R(0, t - L))},
                   "S_0_" + std::to_string(t));
        incoming = term_const(d);
      } else {
        w.constraint(term_var(var('S', m, t)), "=", R(m - 1, t));
        incoming = term_var(var('O', m - 1, t));
      }
      // Backlog and inventory balance.
      Expr b_rhs = sum(B(m, t - 1), incoming);
      b_rhs.add(-1, var('S', m, t));
      w.constraint(term_var(var('B', m, t)), "=", b_rhs);
      Expr i_rhs = sum(I(m, t - 1), R(m, t - L));
      i_rhs.add(-1, var('S', m, t));
      w.constraint(term_var(var('I', m, t)), "=", i_rhs);

      objective.add(st[m].sale_price, var('S', m, t));
      objective.add(-st[m].order_cost, var('R', m, t));
      objective.add(-st[m].backlog_cost, var('B', m, t));
      objective.add(-st[m].holding_cost, var('I', m, t));
    }
  }

  out << "\\ Serial supply chain plan: " << spec.name << ", " << M << " stages, " << T << " periods\n";
  out << "\\ Maximizes the total reward over O (orders), R (shipments), S (sales), B (backlog), I (inventory).\n";
  out << "Maximize\n obj: " << render_terms(objective.terms) << "\n";
  out << "Subject To\n" << w.rows();
  out << "Bounds\n";
  for (int m = 0; m < M; ++m) {
    for (int t = 1; t <= T; ++t) out << " 0 <= " << var('O', m, t) << " <= " << o_max[m] << '\n';
  }
  out << "General\n";
  for (int m = 0; m < M; ++m) {
    for (int t = 1; t <= T; ++t) {
      for (char k : {'O', 'R', 'S', 'B', 'I'}) out << ' ' << var(k, m, t) << '\n';
    }
  }
  out << "Binary\n";
  for (const auto& y : binaries) out << ' ' << y << '\n';
  out << "End\n";

  IpStats stats;
  stats.continuous_vars = static_cast<std::size_t>(5 * M * T);
  stats.binary_vars = binaries.size();
  stats.constraints = w.count();
  return stats;
}

IpStats export_ip(const ScenarioSpec& spec, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  auto stats = export_ip(spec, f);
  if (!f) throw IoError("failed writing " + path);
  return stats;
}

// Schedule files -------------------------------------------------------------------

OrderSchedule read_schedule(std::istream& in) {
  OrderSchedule s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::vector<Units> values;
    std::string tok;
    while (row >> tok) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw IngestError("schedule line " + std::to_string(lineno) + ": not an integer: " + tok);
      if (v < 0) throw IngestError("schedule line " + std::to_string(lineno) + ": negative order");
      values.push_back(v);
    }
    if (!s.orders.empty() && values.size() != s.orders.front().size()) {
      throw IngestError("schedule line " + std::to_string(lineno) + ": expected " +
                        std::to_string(s.orders.front().size()) + " values");
    }
    s.orders.push_back(std::move(values));
  }
  return s;
}

OrderSchedule read_schedule(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IngestError("cannot read schedule " + path);
  return read_schedule(f);
}

void write_schedule(const OrderSchedule& sched, std::ostream& out) {
  out << "# one row per stage (0 = retailer), one column per period\n";
  for (const auto& row : sched.orders) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
    out << '\n';
  }
}

void write_schedule(const OrderSchedule& sched, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  write_schedule(sched, f);
  if (!f) throw IoError("failed writing " + path);
}

OrderSchedule read_ip_solution(const ScenarioSpec& spec, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IngestError("cannot read solution " + path);
  auto sched = OrderSchedule::zeros(spec.num_stages(), spec.horizon);
  std::string line;
  std::size_t found = 0;
  while (std::getline(f, line)) {
    for (char& c : line) {
      if (c == '=') c = ' ';
    }
    std::istringstream row(line);
    std::string name;
    double value = 0;
    if (!(row >> name >> value)) continue;
    int m = 0;
    int t = 0;
    char tail = 0;
    if (std::sscanf(name.c_str(), "O_%d_%d%c", &m, &t, &tail) != 2) continue;
    if (m < 0 || m >= spec.num_stages() || t < 1 || t > spec.horizon) {
      throw IngestError("solution names " + name + " outside the scenario");
    }
    const auto v = static_cast<Units>(std::llround(value));
    if (v < 0) throw IngestError("solution assigns a negative order to " + name);
    sched.at(m, t) = v;
    ++found;
  }
  if (found == 0 && spec.horizon > 0) throw IngestError("no O_m_t values in " + path);
  return sched;
}

}  // namespace echelon
