#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "echelon/env.hpp"
#include "echelon/errors.hpp"
#include "echelon/harness.hpp"
#include "support/oracle.hpp"

using namespace echelon;

namespace {

void run_orders(Environment& env, const std::vector<std::vector<Units>>& orders) {
  for (int t = 1; t <= env.horizon(); ++t) {
    for (int m = 0; m < env.num_stages(); ++m) env.submit_order(m, orders[m][t - 1]);
    env.advance_period();
  }
}

ScenarioSpec single_stage(Units init, Units demand, int horizon) {
  ScenarioSpec s;
  s.name = "single";
  s.horizon = horizon;
  s.stages.push_back({0, 1, 10, init, 0, 0, 1, 1});
  s.demand = DemandModel::constant(demand);
  return s;
}

}  // namespace

TEST(Env, ResetMatchesTable) {
  Environment cu(load_scenario("const-uni"));
  EXPECT_EQ(cu.period(), 0);
  for (int m = 0; m < 4; ++m) {
    EXPECT_EQ(cu.inventory(m, 0), 12);
    EXPECT_EQ(cu.backlog(m, 0), 0);
  }
  Environment id(load_scenario("inc-div"));
  for (int m = 0; m < 4; ++m) {
    EXPECT_EQ(id.inventory(m, 0), 12 + 2 * m);
    EXPECT_EQ(id.observe(m).lead_time, m + 1);
  }
}

TEST(Env, FirstObservationHasZeroHistory) {
  Environment env(load_scenario("dec-div"));
  for (int m = 0; m < 4; ++m) {
    const auto obs = env.observe(m);
    EXPECT_EQ(obs.sales_history, std::vector<Units>(m + 1, 0));
    EXPECT_EQ(obs.deliveries, std::vector<Units>(m + 1, 0));
    EXPECT_EQ(obs.state_vector().size(), static_cast<std::size_t>(state_dimension(m + 1)));
  }
  EXPECT_EQ(env.observe(3).upstream_backlog, 0);
}

TEST(Env, SubmitProtocol) {
  Environment env(load_scenario("const-uni"));
  const auto before = env.state();
  env.submit_order(0, 4);
  EXPECT_EQ(env.state().stages, before.stages);
  EXPECT_THROW(env.submit_order(0, 4), ProtocolError);
  EXPECT_NO_THROW(env.submit_order(3, 0));
  EXPECT_THROW(env.submit_order(1, -1), DomainError);
  EXPECT_THROW(env.advance_period(), ProtocolError);
  EXPECT_THROW(env.submit_order(4, 1), DomainError);
  EXPECT_THROW(env.total_reward(), ProtocolError);
}

TEST(Env, FirstPeriodByHand) {
  Environment env(load_scenario("const-uni"));
  for (int m = 0; m < 4; ++m) env.submit_order(m, 0);
  const auto out = env.advance_period();
  EXPECT_EQ(env.sales(0, 1), 4);
  EXPECT_EQ(env.backlog(0, 1), 0);
  EXPECT_EQ(env.inventory(0, 1), 8);
  EXPECT_DOUBLE_EQ(env.profit(0, 1), -8);
  EXPECT_DOUBLE_EQ(out.rewards[0], -8);
  EXPECT_FALSE(out.done);
}

TEST(Env, EmptyChainBacklogTelescopes) {
  auto spec = load_scenario("const-uni");
  for (auto& s : spec.stages) s.init_inventory = 0;
  Environment env(spec);
  run_orders(env, std::vector<std::vector<Units>>(4, std::vector<Units>(12, 0)));
  for (int t = 1; t <= 12; ++t) {
    EXPECT_EQ(env.sales(0, t), 0);
    EXPECT_EQ(env.backlog(0, t), 4 * t);
  }
  EXPECT_DOUBLE_EQ(env.total_reward(), -4.0 * 78);
}

TEST(Env, TopStageShipsExactlyItsOrder) {
  Environment env(load_scenario("const-uni"));
  env.submit_order(3, 7);
  for (int m = 0; m < 3; ++m) env.submit_order(m, 0);
  env.advance_period();
  EXPECT_EQ(env.shipment(3, 1), 7);
  env.submit_order(3, 500);
  for (int m = 0; m < 3; ++m) env.submit_order(m, 0);
  env.advance_period();
  EXPECT_EQ(env.shipment(3, 2), 500);
}

TEST(Env, DeliveriesWindow) {
  Environment env(load_scenario("const-uni"));
  for (int m = 0; m < 4; ++m) env.submit_order(m, 4);
  env.advance_period();
  EXPECT_EQ(env.observe(0).deliveries, (std::vector<Units>{0, 4}));
  EXPECT_EQ(env.observe(0).sales_history, (std::vector<Units>{0, 4}));
}

TEST(Env, AllZeroScheduleTotalIsCostSum) {
  const auto spec = load_scenario("const-uni");
  Environment env(spec);
  run_orders(env, std::vector<std::vector<Units>>(4, std::vector<Units>(12, 0)));
  Money expected = 0;
  for (int m = 0; m < 4; ++m) {
    for (int t = 1; t <= 12; ++t) expected -= env.backlog(m, t) + env.inventory(m, t);
  }
  EXPECT_DOUBLE_EQ(env.total_reward(), expected);
}

TEST(Env, SingleStageHoldingOnly) {
  Environment env(single_stage(7, 0, 1));
  env.submit_order(0, 0);
  env.advance_period();
  EXPECT_DOUBLE_EQ(env.total_reward(), -7);
  EXPECT_TRUE(env.done());
  EXPECT_THROW(env.submit_order(0, 0), ProtocolError);
}

TEST(Env, ResetRestoresInitialState) {
  Environment env(load_scenario("inc-uni"));
  const auto fresh = env.state();
  for (int m = 0; m < 4; ++m) env.submit_order(m, 3);
  env.advance_period();
  env.reset();
  EXPECT_EQ(env.state(), fresh);
}

TEST(Env, TraceCsvHasOneRowPerStagePeriod) {
  Environment env(load_scenario("const-uni"));
  run_orders(env, std::vector<std::vector<Units>>(4, std::vector<Units>(12, 4)));
  std::ostringstream out;
  write_trace_csv(env, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,m,D,O,R,S,B,I,P");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 48);
}

// Randomized instances against the straight-line oracle and the accounting identities.
TEST(EnvProperties, RandomInstancesMatchOracle) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto spec = oracle::random_spec(rng, 3, 4, 5, 5);
    const auto orders = oracle::random_orders(rng, spec.num_stages(), spec.horizon, 5);
    Environment env(spec);
    run_orders(env, orders);
    const auto ref = oracle::simulate(spec, orders);
    const int M = spec.num_stages();
    for (int m = 0; m < M; ++m) {
      const auto& st = spec.stages[m];
      Units cum_in = 0, cum_out = 0, cum_demand = 0;
      for (int t = 1; t <= spec.horizon; ++t) {
        SCOPED_TRACE(::testing::Message() << "trial " << trial << " m " << m << " t " << t);
        ASSERT_EQ(env.inventory(m, t), ref.I[m][t]);
        ASSERT_EQ(env.backlog(m, t), ref.B[m][t]);
        ASSERT_EQ(env.sales(m, t), ref.S[m][t]);
        ASSERT_EQ(env.shipment(m, t), ref.R[m][t]);
        ASSERT_EQ(env.profit(m, t), ref.P[m][t]);  // bit-exact
        for (Units v : {env.inventory(m, t), env.backlog(m, t), env.sales(m, t), env.shipment(m, t), env.order(m, t)}) {
          ASSERT_GE(v, 0);
        }
        ASSERT_LE(env.sales(m, t), st.capacity);
        if (m + 1 < M) {
          ASSERT_LE(env.shipment(m, t), spec.stages[m + 1].capacity);
          ASSERT_LE(env.shipment(m, t),
                    env.inventory(m + 1, t - 1) + env.shipment(m + 1, t - spec.stages[m + 1].lead_time));
        }
        cum_in += env.shipment(m, t - st.lead_time);
        cum_out += env.sales(m, t);
        cum_demand += m == 0 ? env.demand(t) : env.order(m - 1, t);
        ASSERT_EQ(env.inventory(m, t), st.init_inventory + cum_in - cum_out);
        ASSERT_EQ(env.backlog(m, t), cum_demand - cum_out);
        ASSERT_EQ(env.profit(m, t), st.sale_price * env.sales(m, t) - st.order_cost * env.shipment(m, t) -
                                        st.backlog_cost * env.backlog(m, t) - st.holding_cost * env.inventory(m, t));
      }
    }
    ASSERT_EQ(env.total_reward(), ref.total);
    Environment again(spec);
    run_orders(again, orders);
    ASSERT_EQ(again.state(), env.state());
  }
}
