#include <gtest/gtest.h>

#include "echelon/errors.hpp"
#include "echelon/harness.hpp"
#include "echelon/prompts.hpp"

using namespace echelon;

namespace {

DecisionContext context_for(const Environment& env, int stage) {
  DecisionContext ctx;
  ctx.observation = env.observe(stage);
  ctx.period = env.period() + 1;
  ctx.stage = stage;
  ctx.num_stages = env.num_stages();
  ctx.downstream_order = 4;
  ctx.demand_description = describe_demand(env.spec());
  ctx.prod_capacity = 20;
  return ctx;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Templates, Render) {
  EXPECT_EQ(render_template("a {x} b", {{"x", "1"}}), "a 1 b");
  EXPECT_EQ(render_template("{{x}} {x}", {{"x", "2"}}), "{x} 2");
  EXPECT_EQ(render_template(R"({"order": n})", {}), R"({"order": n})");
  try {
    render_template("{missing}", {});
    FAIL();
  } catch (const TemplateError& e) {
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
}

TEST(Prompts, DecisionSectionShowsState) {
  Environment env(load_scenario("const-uni"));
  const auto bundle = default_prompt_bundle();
  const auto p = build_prompt(bundle, context_for(env, 0));
  EXPECT_NE(p.find("Lead Time: 2 round(s)"), std::string::npos);
  EXPECT_NE(p.find("Inventory Level: 12 unit(s)"), std::string::npos);
  EXPECT_NE(p.find("Round 1."), std::string::npos);
  EXPECT_EQ(p.find("similar_cases"), std::string::npos);
}

TEST(Prompts, SectionOrderAndToggles) {
  Environment env(load_scenario("inc-div"));
  auto bundle = default_prompt_bundle();
  auto ctx = context_for(env, 1);
  const auto base = build_prompt(bundle, ctx);

  bundle.include_step_description = false;
  const auto bare = build_prompt(bundle, ctx);
  EXPECT_LT(bare.size(), base.size());

  bundle = default_prompt_bundle();
  bundle.include_safety_stock = true;
  bundle.include_memory_usage = true;
  ctx.similar_cases = std::vector<SimilarCase>{};
  const auto full = build_prompt(bundle, ctx);
  const auto ss_pos = full.find(render_template(bundle.safety_stock, context_bindings(ctx)).substr(0, 40));
  const auto mu_pos = full.find("similar_cases:");
  ASSERT_NE(ss_pos, std::string::npos);
  ASSERT_NE(mu_pos, std::string::npos);
  EXPECT_LT(ss_pos, mu_pos);
  EXPECT_EQ(build_prompt(bundle, ctx), full);
}

TEST(Prompts, CaseListOnlyWithoutUsageInstructions) {
  Environment env(load_scenario("const-uni"));
  auto bundle = default_prompt_bundle();
  auto ctx = context_for(env, 0);
  ctx.similar_cases = std::vector<SimilarCase>{};
  bundle.include_case_list = true;
  const auto list_only = build_prompt(bundle, ctx);
  EXPECT_EQ(count(list_only, "Similar past cases"), 1u);
  bundle.include_memory_usage = true;
  const auto both = build_prompt(bundle, ctx);
  EXPECT_EQ(count(both, "Similar past cases"), 0u);
  EXPECT_EQ(count(both, "similar_cases:"), 1u);
}

TEST(Prompts, SimilarCasesFormatting) {
  SimilarCase c;
  c.record.state_vec = {12, 0, 0, 2, 4, 4, 0, 4};
  c.record.action = 4;
  c.record.reward = -8;
  c.distance = 0;
  EXPECT_EQ(format_similar_cases({c}),
            "- state_vec: [12, 0, 0, 2, 4, 4, 0, 4], action: 4, reward: -8, distance: 0.000");
  EXPECT_EQ(format_similar_cases({}), "[]");
}

TEST(Prompts, DemandDescriptions) {
  for (const auto& name : builtin_scenario_names()) {
    EXPECT_FALSE(describe_demand(load_scenario(name)).empty()) << name;
  }
  EXPECT_NE(describe_demand(load_scenario("const-uni")).find('4'), std::string::npos);
}

TEST(Prompts, SystemPromptRenders) {
  Environment env(load_scenario("const-uni"));
  const auto s = build_system_prompt(default_prompt_bundle(), context_for(env, 2));
  EXPECT_FALSE(s.empty());
  EXPECT_EQ(s.find('{' + std::string("stage}")), std::string::npos);
}
