#include <gtest/gtest.h>

#include <algorithm>

#include "meip/concept_parser.hpp"
#include "meip/envs/ritual.hpp"
#include "meip/pursuit.hpp"

using namespace meip;

namespace {

// Cells x, y. Starts with p(x), q(x). Actions: "drop" (clear p), "move" (q
// from x to y) and six no-ops "stay0".."stay5". Two actions per plan.
class OverlapEnv : public Environment {
 public:
  OverlapEnv() {
    schema_.add({"p", FluentKind::kPredicate, ValueDomain::kBoolean, {"cell"}});
    schema_.add({"q", FluentKind::kPredicate, ValueDomain::kBoolean, {"cell"}});
    entities_ = make_entities({{"x", "cell"}, {"y", "cell"}});
  }
  const Schema& schema() const override { return schema_; }
  std::string problem_id() const override { return "overlap"; }
  std::size_t horizon() const override { return 3; }
  State initial_state() const override {
    State s(problem_id(), entities_);
    s.set("p", {"x"}, 1.0);
    s.set("q", {"x"}, 1.0);
    return s;
  }
  std::vector<std::string> legal_actions(const History& h) const override {
    if (h.size() >= 3) return {};
    std::vector<std::string> out{"drop", "move"};
    for (int i = 0; i < 6; ++i) out.push_back("stay" + std::to_string(i));
    return out;
  }
  std::vector<Outcome> outcomes(const History& h, const std::string& a) const override {
    State s = h.back();
    if (a == "drop") s.set("p", {"x"}, 0.0);
    if (a == "move" && s.value("q", {"x"}) != 0.0) {
      s.set("q", {"x"}, 0.0);
      s.set("q", {"y"}, 1.0);
    }
    return {{s, 1.0}};
  }

 private:
  Schema schema_;
  std::shared_ptr<const std::vector<Entity>> entities_;
};

std::vector<Plan> ritual_demos(const RitualEnv& env) {
  std::vector<Plan> out;
  for (const char* b : {"1", "3", "1", "3", "1"})
    out.push_back(plan_from_actions(env, {"S1:torch:all", std::string("S2:bamboo:") + b, "S3:clay:4"}));
  return out;
}

PursuitConfig ritual_pursuit(std::uint64_t seed) {
  PursuitConfig cfg;
  cfg.epsilon = 0.02;
  cfg.seed = seed;
  cfg.enumeration.fluents = {"picked"};
  cfg.enumeration.negations = false;
  cfg.enumeration.restricted_domains = false;
  cfg.enumeration.filters = {{"object", {"torch", "bamboo", "clay"}}, {"stage", {"S1", "S2", "S3"}}};
  return cfg;
}

LearnerConfig cheap_learner() {
  LearnerConfig lc;
  lc.max_iterations = 5;
  return lc;
}

PlannerConfig cheap_planner() {
  PlannerConfig pc;
  pc.iterations = 500;
  pc.inverse_temperature = 5.0;
  return pc;
}

}  // namespace

TEST(Pursuit, FilterKeepsExactlyTheVaryingConcepts) {
  Schema schema({{"p", FluentKind::kPredicate, ValueDomain::kBoolean, {"cell"}},
                 {"q", FluentKind::kPredicate, ValueDomain::kBoolean, {"cell"}},
                 {"r", FluentKind::kPredicate, ValueDomain::kBoolean, {"cell"}}});
  auto ents = make_entities({{"a", "cell"}, {"b", "cell"}});
  State s0("t", ents), s1("t", ents), s2("t", ents);
  s1.set_time_index(1);
  s2.set_time_index(2);
  s1.set("p", {"a"}, 1.0);
  s2.set("p", {"a"}, 1.0);
  s2.set("q", {"b"}, 1.0);
  for (State* s : {&s0, &s1, &s2}) s->set("r", {"a"}, 1.0);  // r never changes
  std::vector<PairSample> pairs{{s0, s1, 1, PairClass::kDemoDemo}, {s1, s2, 1, PairClass::kDemoDemo}};
  std::vector<Concept> cands;
  for (const char* t : {"exists p(_)", "count q(_)", "forall r(_)", "count r(_)", "forall p(_)"})
    cands.push_back(parse_concept(t, schema));
  auto kept = filter_constant_concepts(cands, pairs, schema);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(print(kept[0]), "exists p(_)");
  EXPECT_EQ(print(kept[1]), "count q(_)");
  EXPECT_THROW(filter_constant_concepts(cands, {}, schema), Error);
}

TEST(Pursuit, KeepsClayCountAcrossRitualDemo) {
  RitualEnv env;
  auto demos = ritual_demos(env);
  auto c = parse_concept("count picked(clay@S3)", env.schema());
  EXPECT_EQ(filter_constant_concepts({c}, build_pairs({demos[0]}, {}), env.schema()).size(), 1u);
}

TEST(Pursuit, UnreachableThresholdGivesEmptySet) {
  RitualEnv env;
  auto cfg = ritual_pursuit(0);
  cfg.epsilon = 10.0;
  auto res = pursue(ritual_demos(env), env, cfg, cheap_learner(), cheap_planner());
  EXPECT_TRUE(res.concepts.empty());
  ASSERT_FALSE(res.trace.empty());
  EXPECT_FALSE(res.trace.back().accepted);
}

TEST(Pursuit, RejectsBadConfig) {
  RitualEnv env;
  PursuitConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(pursue(ritual_demos(env), env, cfg, cheap_learner(), cheap_planner()), ConfigError);
  cfg = PursuitConfig{};
  cfg.beta = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(pursue({}, env, PursuitConfig{}, cheap_learner(), cheap_planner()), Error);
}

TEST(Pursuit, FindsRitualGroundTruth) {
  RitualEnv env;
  auto res = pursue(ritual_demos(env), env, ritual_pursuit(0), cheap_learner(), cheap_planner());
  std::vector<std::string> got;
  for (const auto& c : res.concepts) got.push_back(print(c));
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<std::string>{"count picked(clay@S3)", "exists picked(bamboo@S2)",
                                           "forall picked(torch@S1)"}));
  std::set<std::string> slots;
  for (const auto& c : res.concepts) EXPECT_TRUE(slots.insert(complexity(c).slot_key).second);
  for (const auto& s : res.trace) {
    if (s.accepted) {
      EXPECT_GT(s.slot_margin, 0.02);
    }
  }
  EXPECT_EQ(res.model.concepts().size(), 3u);
}

TEST(Pursuit, DeterministicGivenSeed) {
  RitualEnv env;
  auto cfg = ritual_pursuit(4);
  cfg.seeds = 1;
  auto a = pursue(ritual_demos(env), env, cfg, cheap_learner(), cheap_planner());
  auto b = pursue(ritual_demos(env), env, cfg, cheap_learner(), cheap_planner());
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].concept_text, b.trace[i].concept_text);
    EXPECT_EQ(a.trace[i].slot_margin, b.trace[i].slot_margin);
  }
  EXPECT_EQ(a.model, b.model);
}

TEST(Pursuit, ConjunctionReplacesSubsumedConcept) {
  OverlapEnv env;
  // demo A drops p; demo B moves q off the p cell
  std::vector<Plan> demos{plan_from_actions(env, {"stay0", "drop"}), plan_from_actions(env, {"stay0", "drop"}),
                          plan_from_actions(env, {"stay0", "drop"}), plan_from_actions(env, {"move", "stay0"})};
  auto pairs = build_pairs(demos, {});
  auto simple = parse_concept("count p(_)", env.schema());
  auto conj = parse_concept("count (p & q)(_)", env.schema());
  auto a = detail::ordered_pairs(simple, pairs, env.schema());
  auto b = detail::ordered_pairs(conj, pairs, env.schema());
  EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  EXPECT_GT(b.size(), a.size());

  PursuitConfig cfg;
  cfg.max_level = 2;
  cfg.epsilon = 0.01;
  cfg.require_consistent = false;
  cfg.enumeration.restricted_domains = false;
  cfg.enumeration.negations = false;
  auto res = pursue(demos, env, cfg, cheap_learner(), cheap_planner());
  std::size_t size_before = 0;
  bool replaced = false;
  for (const auto& s : res.trace) {
    if (!s.accepted) continue;
    if (s.level == 1) ++size_before;
    if (!s.replaced.empty()) {
      replaced = true;
      EXPECT_EQ(s.replaced, std::vector<std::string>{"count p(_)"});
    }
  }
  ASSERT_TRUE(replaced);
  EXPECT_EQ(res.concepts.size(), size_before);
  EXPECT_TRUE(std::any_of(res.concepts.begin(), res.concepts.end(),
                          [](const Concept& c) { return print(c) == "count (p & q)(_)"; }));
}
