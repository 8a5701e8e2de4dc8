#include <gtest/gtest.h>

#include "meip/concept_parser.hpp"
#include "meip/envs/didactic.hpp"
#include "meip/envs/fork.hpp"
#include "meip/maxent_irl.hpp"

using namespace meip;

namespace {

std::vector<Concept> place_features(const Schema& schema) {
  std::vector<Concept> out;
  for (const char* p : {"S0", "S1", "b1", "g"})
    out.push_back(parse_concept(std::string("exists at(") + p + ")", schema));
  return out;
}

std::vector<Concept> mark_features(const Schema& schema) {
  std::vector<Concept> out;
  for (const char* t : {"exists mark(L1@left)", "exists mark(L1@right)", "exists mark(L2@left)", "exists mark(L2@right)"})
    out.push_back(parse_concept(t, schema));
  return out;
}

RankingModel features_for(const Environment& env, const std::vector<Concept>& cs, const std::vector<Plan>& demos) {
  return make_ranking_model(env.schema(), cs, demos);
}

Plan desired(const DidacticEnv& env) {
  Plan p;
  History h = initial_history(env);
  auto outs = checked_outcomes(env, h, "a1");
  h.push_back(outs[0].state);
  h.push_back(checked_outcomes(env, h, "go")[0].state);
  p.states = h;
  p.actions = {"a1", "go"};
  return p;
}

}  // namespace

TEST(MaxEnt, UnvisitedSlipStateGetsLowestReward) {
  DidacticEnv env(0.1);
  std::vector<Plan> demos(10, desired(env));
  auto res = maxent_irl_train(demos, env, features_for(env, place_features(env.schema()), demos));
  ASSERT_TRUE(res.converged);
  EXPECT_LT(res.gradient_norm, 1e-4);
  auto reward_at = [&](const char* place) {
    for (const auto& n : enumerate_tree(env).nodes)
      if (DidacticEnv::location(n.state) == place) return score_state(res.model, n.state);
    ADD_FAILURE() << place;
    return 0.0;
  };
  EXPECT_LT(reward_at("b1"), std::min({reward_at("S0"), reward_at("S1"), reward_at("g")}));
}

TEST(MaxEnt, MatchesFeatureExpectationsWithoutPrior) {
  ForkEnv env;
  auto plan = [&](const char* a, const char* b) { return plan_from_actions(env, {a, b}); };
  std::vector<Plan> demos{plan("left", "left"), plan("left", "right"), plan("left", "left"), plan("right", "left")};
  MaxEntConfig cfg;
  cfg.l2 = 0.0;
  auto res = maxent_irl_train(demos, env, features_for(env, mark_features(env.schema()), demos), cfg);
  ASSERT_TRUE(res.converged);
  auto tree = enumerate_tree(env);
  std::vector<double> r;
  std::vector<std::vector<double>> f;
  for (const auto& n : tree.nodes) {
    r.push_back(score_state(res.model, n.state));
    f.push_back(reward_features(res.model, n.state));
  }
  auto mu = expected_features(tree, soft_policy(tree, r), f);
  auto emp = empirical_features(res.model, demos);
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(mu[i], emp[i], 1e-3);
}

TEST(MaxEnt, UniformDemosAreAFixedPoint) {
  ForkEnv env;
  std::vector<Plan> demos;
  for (const char* a : {"left", "right"})
    for (const char* b : {"left", "right"}) demos.push_back(plan_from_actions(env, {a, b}));
  MaxEntConfig cfg;
  cfg.l2 = 0.0;
  auto res = maxent_irl_train(demos, env, features_for(env, mark_features(env.schema()), demos), cfg);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 0u);
  for (double t : res.model.parameters()) EXPECT_NEAR(t, 0.0, 1e-9);
}

TEST(MaxEnt, SoftPolicyIsBoltzmannOverTrajectories) {
  ForkEnv env;
  auto tree = enumerate_tree(env);
  std::vector<double> r(tree.nodes.size(), 0.0);
  for (std::size_t n = 0; n < tree.nodes.size(); ++n)
    if (tree.nodes[n].state.value("mark", {"L1", "left"}) != 0.0 && tree.parent[n] == 0) r[n] = std::log(3.0);
  auto pol = soft_policy(tree, r);
  EXPECT_NEAR(pol.probability(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(pol.value[0], std::log(8.0), 1e-12);
}

TEST(MaxEnt, SampledPlansFollowPolicyAndEnvironment) {
  DidacticEnv env(0.3);
  auto m = features_for(env, place_features(env.schema()), {desired(env)});
  auto plans = maxent_sample_plans(env, m, 20000, 7);
  // uniform over a1, a2; S1 only through a1 without slip
  int s1 = 0;
  for (const auto& p : plans) {
    replay_plan(env, p);
    s1 += DidacticEnv::is_desired(p.states);
  }
  EXPECT_NEAR(s1 / 20000.0, 0.35, 0.015);
}

TEST(MaxEnt, RejectsBadInput) {
  DidacticEnv env(0.1);
  MaxEntConfig cfg;
  cfg.l2 = -1.0;
  auto feats = features_for(env, place_features(env.schema()), {desired(env)});
  EXPECT_THROW(maxent_irl_train({desired(env)}, env, feats, cfg), ConfigError);
  EXPECT_THROW(maxent_irl_train({desired(env)}, env, features_for(env, {}, {desired(env)})), Error);
  EXPECT_THROW(maxent_irl_train({}, env, feats), Error);
  Plan bad = desired(env);
  std::swap(bad.states[1], bad.states[2]);
  EXPECT_THROW(maxent_irl_train({bad}, env, feats), Error);
}
