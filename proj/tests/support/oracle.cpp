#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

Rollout simulate(const echelon::ScenarioSpec& spec, const std::vector<std::vector<Units>>& orders) {
  const int M = spec.num_stages();
  const int T = spec.horizon;
  Rollout r;
  auto grid = [&] { return std::vector<std::vector<Units>>(M, std::vector<Units>(T + 1, 0)); };
  r.I = grid();
  r.B = grid();
  r.R = grid();
  r.S = grid();
  r.O = grid();
  r.P.assign(M, std::vector<Money>(T + 1, 0.0));
  r.D.assign(T + 1, 0);
  for (int m = 0; m < M; ++m) r.I[m][0] = spec.stages[m].init_inventory;

  auto shipped = [&](int m, int u) -> Units { return u >= 1 ? r.R[m][u] : 0; };

  for (int t = 1; t <= T; ++t) {
    r.D[t] = spec.demand_at(t);
    for (int m = 0; m < M; ++m) r.O[m][t] = orders[m][t - 1];
    // Shipments, top stage first so R[m+1][t] is known when stage m+1's arrivals matter.
    r.R[M - 1][t] = r.O[M - 1][t];
    for (int m = M - 2; m >= 0; --m) {
      const auto& up = spec.stages[m + 1];
      const Units want = r.B[m + 1][t - 1] + r.O[m][t];
      const Units avail = r.I[m + 1][t - 1] + shipped(m + 1, t - up.lead_time);
      r.R[m][t] = std::min({want, up.capacity, avail});
    }
    for (int m = 0; m < M; ++m) {
      const auto& s = spec.stages[m];
      const Units arrive = shipped(m, t - s.lead_time);
      Units demand_in;
      if (m == 0) {
        demand_in = r.D[t];
        r.S[0][t] = std::min({r.B[0][t - 1] + r.D[t], s.capacity, r.I[0][t - 1] + arrive});
      } else {
        demand_in = r.O[m - 1][t];
        r.S[m][t] = r.R[m - 1][t];
      }
      r.B[m][t] = r.B[m][t - 1] + demand_in - r.S[m][t];
      r.I[m][t] = r.I[m][t - 1] + arrive - r.S[m][t];
      r.P[m][t] = s.sale_price * static_cast<Money>(r.S[m][t]) - s.order_cost * static_cast<Money>(r.R[m][t]) -
                  s.backlog_cost * static_cast<Money>(r.B[m][t]) - s.holding_cost * static_cast<Money>(r.I[m][t]);
      r.total += r.P[m][t];
    }
  }
  return r;
}

namespace {

void odometer(std::vector<std::vector<Units>>& x, const std::vector<std::pair<int, int>>& cells, Units ceiling,
              const std::function<void()>& visit) {
  for (auto [m, t] : cells) x[m][t] = 0;
  for (;;) {
    visit();
    std::size_t i = 0;
    for (; i < cells.size(); ++i) {
      auto& v = x[cells[i].first][cells[i].second];
      if (v < ceiling) {
        ++v;
        break;
      }
      v = 0;
    }
    if (i == cells.size()) return;
  }
}

}  // namespace

BruteForce enumerate(const echelon::ScenarioSpec& spec, Units ceiling) {
  const int M = spec.num_stages();
  const int T = spec.horizon;
  std::vector<std::vector<Units>> x(M, std::vector<Units>(T, 0));
  std::vector<std::pair<int, int>> cells;
  for (int m = 0; m < M; ++m) {
    for (int t = 0; t < T; ++t) cells.emplace_back(m, t);
  }
  BruteForce bf;
  bool first = true;
  odometer(x, cells, ceiling, [&] {
    const Money v = simulate(spec, x).total;
    ++bf.evaluated;
    if (first || v > bf.best) {
      bf.best = v;
      bf.argmax = x;
      first = false;
    }
  });
  return bf;
}

Money best_completion(const echelon::ScenarioSpec& spec, const std::vector<std::vector<Units>>& prefix, int t,
                      const std::vector<std::pair<int, Units>>& fixed_now, Units ceiling) {
  const int M = spec.num_stages();
  const int T = spec.horizon;
  std::vector<std::vector<Units>> x = prefix;
  x.resize(M);
  for (auto& row : x) row.resize(T, 0);
  std::vector<std::pair<int, int>> cells;
  for (int m = 0; m < M; ++m) {
    for (int u = t; u <= T; ++u) {
      const bool fixed = u == t && std::any_of(fixed_now.begin(), fixed_now.end(),
                                               [&](const auto& f) { return f.first == m; });
      if (!fixed) cells.emplace_back(m, u - 1);
    }
  }
  for (auto [m, o] : fixed_now) x[m][t - 1] = o;
  Money best = -INFINITY;
  odometer(x, cells, ceiling, [&] { best = std::max(best, simulate(spec, x).total); });
  return best;
}

std::vector<echelon::SimilarCase> knn(const std::vector<echelon::MemoryRecord>& records,
                                      const std::vector<double>& query, std::size_t k, double tau) {
  std::vector<echelon::SimilarCase> all;
  for (std::size_t i = 0; i < records.size(); ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < query.size(); ++j) acc += (query[j] - records[i].state_vec[j]) * (query[j] - records[i].state_vec[j]);
    all.push_back({records[i], std::sqrt(acc), i});
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.distance < b.distance; });
  if (all.size() > k) all.resize(k);
  std::vector<echelon::SimilarCase> out;
  for (const auto& c : all) {
    if (c.distance < tau) out.push_back(c);
  }
  return out;
}

echelon::ScenarioSpec random_spec(std::mt19937_64& rng, int max_stages, int max_horizon, int param_max,
                                  int demand_max, int max_lead) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  echelon::ScenarioSpec s;
  s.name = "random";
  const int M = pick(1, max_stages);
  s.horizon = pick(1, max_horizon);
  for (int m = 0; m < M; ++m) {
    echelon::StageParams p;
    p.stage_index = m;
    p.lead_time = pick(1, std::min(max_lead, std::max(1, param_max)));
    p.capacity = pick(0, param_max);
    p.init_inventory = pick(0, param_max);
    p.sale_price = pick(0, param_max);
    p.order_cost = pick(0, param_max);
    p.backlog_cost = pick(0, param_max);
    p.holding_cost = pick(0, param_max);
    s.stages.push_back(p);
  }
  std::vector<Units> d;
  for (int t = 0; t < s.horizon; ++t) d.push_back(pick(0, demand_max));
  s.demand = echelon::DemandModel::explicit_values(d);
  return s;
}

std::vector<std::vector<Units>> random_orders(std::mt19937_64& rng, int stages, int horizon, Units max_order) {
  std::uniform_int_distribution<Units> dist(0, max_order);
  std::vector<std::vector<Units>> x(stages, std::vector<Units>(horizon));
  for (auto& row : x) {
    for (auto& v : row) v = dist(rng);
  }
  return x;
}

}  // namespace oracle
