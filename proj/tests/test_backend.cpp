#include <gtest/gtest.h>

#include <cstdlib>

#include "echelon/agents.hpp"
#include "echelon/backend.hpp"
#include "echelon/errors.hpp"
#include "echelon/harness.hpp"
#include "support/mock_llm.hpp"

using namespace echelon;

namespace {

BackendConfig remote_config(const std::string& url, int retries = 2) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::remote;
  cfg.endpoint = url;
  cfg.model = "mock-model";
  cfg.max_retries = retries;
  cfg.timeout = std::chrono::milliseconds(2000);
  cfg.api_key_env = "ECHELON_TEST_KEY";
  return cfg;
}

DecisionContext first_context(const Environment& env, int stage) {
  DecisionContext ctx;
  ctx.observation = env.observe(stage);
  ctx.period = 1;
  ctx.stage = stage;
  ctx.num_stages = env.num_stages();
  return ctx;
}

}  // namespace

TEST(ParseReply, Forms) {
  auto r = parse_reply(R"({"order": 7, "reason": "cover demand"})");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->order, 7);
  EXPECT_EQ(r->reason, "cover demand");
  r = parse_reply("```json\n{\"order\": 3, \"reason\": \"x\"}\n```");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->order, 3);
  r = parse_reply("I think we should place an order of 12 units this round.");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->order, 12);
  EXPECT_FALSE(parse_reply("no idea"));
  EXPECT_FALSE(parse_reply(R"({"order": -4})"));
  EXPECT_FALSE(parse_reply(""));
}

TEST(Scripted, MatchesPolicy) {
  const auto spec = load_scenario("const-uni");
  Environment env(spec);
  PolicyConfig cfg;
  cfg.kind = PolicyKind::base_stock;
  ScriptedBackend b(spec, cfg);
  EXPECT_EQ(b.decide("", "", first_context(env, 0)).order, 8);
  EXPECT_TRUE(b.deterministic());
}

TEST(Remote, ValidConfigRequired) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::remote;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.endpoint = "http://127.0.0.1:1";
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.model = "m";
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Remote, RequestShapeAndAuth) {
  mock::Server server([](const mock::Request&) { return mock::ok(R"({"order": 5, "reason": "ok"})"); });
  ::setenv("ECHELON_TEST_KEY", "secret-token", 1);
  const auto spec = load_scenario("const-uni");
  Environment env(spec);
  RemoteBackend b(remote_config(server.base_url()), spec);
  const auto d = b.decide("SYS", "Round 1. You manage stage 0 of 4", first_context(env, 0));
  EXPECT_EQ(d.order, 5);
  EXPECT_FALSE(d.fallback);
  const auto log = server.log();
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].authorization, "Bearer secret-token");
  EXPECT_EQ(log[0].body["model"], "mock-model");
  EXPECT_EQ(log[0].system, "SYS");
  EXPECT_EQ(log[0].period, 1);
  EXPECT_EQ(log[0].stage, 0);
  ::unsetenv("ECHELON_TEST_KEY");
}

TEST(Remote, RetriesThenSucceeds) {
  mock::Server server([](const mock::Request& r) {
    if (r.attempt == 0) return mock::fail(500, "boom");
    if (r.attempt == 1) return mock::ok("I refuse to answer");
    return mock::ok(R"({"order": 9, "reason": "third time"})");
  });
  const auto spec = load_scenario("const-uni");
  Environment env(spec);
  RemoteBackend b(remote_config(server.base_url(), 2), spec);
  const auto d = b.decide("s", "Round 1. You manage stage 0 of 4", first_context(env, 0));
  EXPECT_EQ(d.order, 9);
  EXPECT_FALSE(d.fallback);
  EXPECT_EQ(d.raw_replies.size(), 3u);
  EXPECT_EQ(server.requests(), 3u);
}

TEST(Remote, FallbackAfterExhaustedRetries) {
  mock::Server server([](const mock::Request&) { return mock::ok("garbage"); });
  const auto spec = load_scenario("const-uni");
  Environment env(spec);
  RemoteBackend b(remote_config(server.base_url(), 1), spec);
  const auto d = b.decide("s", "Round 1. You manage stage 0 of 4", first_context(env, 0));
  EXPECT_TRUE(d.fallback);
  EXPECT_EQ(d.order, 0);  // safety stock at the steady position
  EXPECT_EQ(server.requests(), 2u);
}

TEST(Remote, UnreachableEndpointFallsBack) {
  const auto spec = load_scenario("const-uni");
  Environment env(spec);
  auto cfg = remote_config("http://127.0.0.1:1/v1", 0);
  cfg.timeout = std::chrono::milliseconds(300);
  RemoteBackend b(cfg, spec);
  const auto d = b.decide("s", "p", first_context(env, 0));
  EXPECT_TRUE(d.fallback);
}

TEST(Remote, EpisodeThroughMockMatchesScripted) {
  const auto spec = load_scenario("dec-div");
  const auto script = mock::safety_stock_orders(spec);
  mock::Server server([&](const mock::Request& r) {
    const auto it = script.find({r.period, r.stage});
    if (it == script.end()) return mock::fail(400, "unknown");
    return mock::ok(R"({"order": )" + std::to_string(it->second) + R"(, "reason": "script"})");
  });
  RemoteBackend remote(remote_config(server.base_url()), spec);
  ScriptedBackend scripted(spec, PolicyConfig{});
  auto bundle = default_prompt_bundle();
  bundle.demand_description = describe_demand(spec);
  const auto a = run_episode(spec, remote, bundle, {});
  const auto b = run_episode(spec, scripted, bundle, {});
  EXPECT_EQ(a.total_reward, b.total_reward);
  EXPECT_EQ(a.fallback_count, 0u);
  EXPECT_EQ(server.requests(), 48u);
}
