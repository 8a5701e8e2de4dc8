#include <gtest/gtest.h>

#include <random>
#include <set>

#include "meip/concept_enum.hpp"
#include "meip/concept_eval.hpp"
#include "meip/concept_parser.hpp"

using namespace meip;

namespace {

Schema ritual_schema() {
  return Schema({{"picked", FluentKind::kPredicate, ValueDomain::kBoolean, {"object", "stage"}}});
}

std::vector<Entity> ritual_entities() {
  std::vector<Entity> es;
  for (int s = 1; s <= 3; ++s) es.push_back({"S" + std::to_string(s), "stage"});
  for (const char* type : {"torch", "clay", "bamboo"})
    for (int i = 0; i < 5; ++i) es.push_back({std::string(type) + std::to_string(i), std::string("object.") + type});
  return es;
}

State empty_state() { return State("p", make_entities(ritual_entities())); }

}  // namespace

TEST(ConceptParse, RoundTripsCanonicalText) {
  auto schema = ritual_schema();
  for (const char* text : {"forall picked(torch@S1)", "count picked(clay@S3)", "exists !picked(_@_)",
                           "forall (!picked & picked)(torch@S1)", "lt(count picked(_@S1), count picked(_@S2))"}) {
    Concept c = parse_concept(text, schema);
    EXPECT_EQ(print(c), text);
    EXPECT_EQ(parse_concept(print(c), schema), c);
  }
}

TEST(ConceptParse, CanonicalizesConjunctionOrderAndDoubleNegation) {
  auto schema = Schema({{"a", FluentKind::kPredicate, ValueDomain::kBoolean, {"x"}},
                        {"b", FluentKind::kPredicate, ValueDomain::kBoolean, {"x"}}});
  EXPECT_EQ(parse_concept("forall (b & a & b)(_)", schema), parse_concept("forall a & b(_)", schema));
  EXPECT_EQ(parse_concept("exists !!a(_)", schema), parse_concept("exists a(_)", schema));
  EXPECT_EQ(print(parse_concept("forall (b & a)(_)", schema)), "forall (a & b)(_)");
}

TEST(ConceptParse, CommaSeparatedFiltersAccepted) {
  auto schema = ritual_schema();
  EXPECT_EQ(print(parse_concept("forall picked(torch, S1)", schema)), "forall picked(torch@S1)");
}

TEST(ConceptParse, ErrorsCarryPosition) {
  auto schema = ritual_schema();
  try {
    parse_concept("forall pikced(torch@S1)", schema);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 7u);
  }
  EXPECT_THROW(parse_concept("forall picked(torch)", schema), ParseError);
  EXPECT_THROW(parse_concept("forall picked(torch@S1", schema), ParseError);
  EXPECT_THROW(parse_concept("sometimes picked(_@_)", schema), ParseError);
  EXPECT_THROW(parse_concept("forall picked(_@_) extra", schema), ParseError);
  EXPECT_THROW(parse_concept("max picked(_@_)", schema), ParseError);
}

TEST(ConceptEval, ForallAndCountOnRitualState) {
  auto schema = ritual_schema();
  State s = empty_state();
  for (int i = 0; i < 5; ++i) s.set("picked", {"torch" + std::to_string(i), "S1"}, 1.0);
  for (int i = 0; i < 4; ++i) s.set("picked", {"clay" + std::to_string(i), "S3"}, 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("forall picked(torch@S1)", schema), s, schema), 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("count picked(clay@S3)", schema), s, schema), 4.0);
  EXPECT_EQ(evaluate_concept(parse_concept("forall picked(clay@S3)", schema), s, schema), 0.0);
  EXPECT_EQ(evaluate_concept(parse_concept("exists picked(bamboo@_)", schema), s, schema), 0.0);
  EXPECT_EQ(evaluate_concept(parse_concept("count !picked(torch@_)", schema), s, schema), 10.0);
}

TEST(ConceptEval, EmptyDomainSemantics) {
  auto schema = Schema({{"picked", FluentKind::kPredicate, ValueDomain::kBoolean, {"object", "stage"}},
                        {"weight", FluentKind::kFunction, ValueDomain::kReal, {"object"}}});
  State s = empty_state();
  EXPECT_EQ(evaluate_concept(parse_concept("forall picked(nothing@S1)", schema), s, schema), 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("exists picked(nothing@S1)", schema), s, schema), 0.0);
  EXPECT_EQ(evaluate_concept(parse_concept("count picked(nothing@S1)", schema), s, schema), 0.0);
  EXPECT_THROW(evaluate_concept(parse_concept("max weight(nothing)", schema), s, schema), EvaluationError);
  EXPECT_THROW(evaluate_concept(parse_concept("avg weight(nothing)", schema), s, schema), EvaluationError);
}

TEST(ConceptEval, AggregatorsAndRestrictedDomains) {
  auto schema = Schema({{"big", FluentKind::kPredicate, ValueDomain::kBoolean, {"object"}},
                        {"weight", FluentKind::kFunction, ValueDomain::kReal, {"object"}}});
  State s("p", make_entities({{"a", "object"}, {"b", "object"}, {"c", "object"}}));
  s.set("weight", {"a"}, 1.0);
  s.set("weight", {"b"}, 4.0);
  s.set("weight", {"c"}, 7.0);
  s.set("big", {"b"}, 1.0);
  s.set("big", {"c"}, 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("max weight(_)", schema), s, schema), 7.0);
  EXPECT_EQ(evaluate_concept(parse_concept("min weight(_)", schema), s, schema), 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("avg weight(_)", schema), s, schema), 4.0);
  EXPECT_EQ(evaluate_concept(parse_concept("min weight(_) in ext(big)", schema), s, schema), 4.0);
  EXPECT_EQ(evaluate_concept(parse_concept("avg weight(_) in ext(big)", schema), s, schema), 5.5);
}

TEST(ConceptEval, PermutationAndClosure) {
  auto schema = Schema({{"on", FluentKind::kPredicate, ValueDomain::kBoolean, {"block", "block"}}});
  State s("p", make_entities({{"a", "block"}, {"b", "block"}, {"c", "block"}}));
  s.set("on", {"a", "b"}, 1.0);
  s.set("on", {"b", "c"}, 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("exists perm(on, 0, 1)(b@a)", schema), s, schema), 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("exists on(a@c)", schema), s, schema), 0.0);
  EXPECT_EQ(evaluate_concept(parse_concept("exists closure(on)(a@c)", schema), s, schema), 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("count closure(on)(_@_)", schema), s, schema), 3.0);
}

TEST(ConceptEval, CompoundTerms) {
  auto schema = ritual_schema();
  State s = empty_state();
  s.set("picked", {"torch0", "S1"}, 1.0);
  auto c = parse_concept("lt(count picked(_@S2), count picked(_@S1))", schema);
  EXPECT_EQ(evaluate_concept(c, s, schema), 1.0);
  EXPECT_EQ(evaluate_concept(parse_concept("sub(count picked(_@S1), count picked(_@_))", schema), s, schema), 0.0);
}

TEST(ConceptEval, AbsentGroundingsReadAsFalse) {
  auto schema = ritual_schema();
  State s = empty_state();
  EXPECT_EQ(evaluate_concept(parse_concept("forall !picked(_@_)", schema), s, schema), 1.0);
}

TEST(ConceptEnumerate, LevelZeroRejected) {
  EXPECT_THROW(enumerate_concepts(ritual_schema(), 0), ConfigError);
}

TEST(ConceptEnumerate, SingleBinaryPredicateLevelOneSlotHasThreeQuantifiers) {
  auto schema = ritual_schema();
  auto all = enumerate_concepts(schema, 1);
  std::map<std::string, std::set<Quantifier>> slots;
  for (const auto& e : all) slots[e.complexity.slot_key].insert(e.value.quantifier);
  ASSERT_TRUE(slots.count("P:picked(_@_)"));
  EXPECT_EQ(slots["P:picked(_@_)"], (std::set<Quantifier>{Quantifier::kForall, Quantifier::kExists, Quantifier::kCount}));
  // picked and !picked over the wildcard product; no same-class argument pairs
  EXPECT_EQ(all.size(), 6u);
}

TEST(ConceptEnumerate, HandEnumeratedTwoPredicateLevelTwo) {
  auto schema = Schema({{"a", FluentKind::kPredicate, ValueDomain::kBoolean, {"x"}},
                        {"b", FluentKind::kPredicate, ValueDomain::kBoolean, {"x"}}});
  EnumerationOptions opt;
  opt.restricted_domains = false;
  auto all = enumerate_concepts(schema, 2, opt);
  std::set<std::string> got;
  for (const auto& e : all) got.insert(print(e.value));
  // level 1: {a, !a, b, !b}; level 2: a&b, a&!b, !a&b, !a&!b; each with 3 quantifiers
  std::set<std::string> want;
  for (std::string q : {"forall ", "exists ", "count "}) {
    for (std::string p : {"a(_)", "!a(_)", "b(_)", "!b(_)", "(!a & !b)(_)", "(!a & b)(_)", "(!b & a)(_)",
                          "(a & b)(_)"})
      want.insert(q + p);
  }
  EXPECT_EQ(got, want);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LE(all[i - 1].complexity.level, all[i].complexity.level);
}

TEST(ConceptEnumerate, CapExceededRaises) {
  EnumerationOptions opt;
  opt.cap = 5;
  EXPECT_THROW(enumerate_concepts(ritual_schema(), 2, opt), CapacityError);
}

TEST(ConceptEnumerate, FiltersExpandSlots) {
  EnumerationOptions opt;
  opt.filters["object"] = {"torch", "clay", "bamboo"};
  opt.filters["stage"] = {"S1", "S2", "S3"};
  auto all = enumerate_concepts(ritual_schema(), 1, opt);
  std::set<std::string> got;
  for (const auto& e : all) got.insert(print(e.value));
  EXPECT_TRUE(got.count("forall picked(torch@S1)"));
  EXPECT_TRUE(got.count("exists picked(bamboo@S3)"));
  EXPECT_EQ(all.size(), 2u * 9u * 3u);
}

TEST(ConceptProperty, CountEqualsBruteForceAndLiftingInvariant) {
  auto schema = ritual_schema();
  std::mt19937_64 rng(7);
  auto concepts = enumerate_concepts(schema, 2);
  for (int trial = 0; trial < 20; ++trial) {
    State s = empty_state();
    std::bernoulli_distribution coin(0.4);
    for (const auto& o : s.entities())
      for (const auto& st : s.entities())
        if (o.cls != "stage" && st.cls == "stage" && coin(rng)) s.set("picked", {o.id, st.id}, 1.0);
    // renaming entities (same classes) must not change concept values
    std::vector<Entity> renamed;
    std::map<std::string, std::string> alias;
    for (const auto& e : s.entities()) {
      std::string id = e.cls == "stage" ? e.id : "z" + e.id;
      alias[e.id] = id;
      renamed.push_back({id, e.cls});
    }
    State t("p", make_entities(renamed));
    for (const auto& [name, rows] : s.table())
      for (const auto& [args, v] : rows) {
        Args a;
        for (const auto& x : args) a.push_back(alias[x]);
        t.set(name, a, v);
      }
    for (const auto& e : concepts) {
      const auto& c = e.value;
      if (c.quantifier == Quantifier::kCount && !c.domain) {
        double brute = 0;
        for (const auto& o : s.entities())
          for (const auto& st : s.entities())
            if (o.cls != "stage" && st.cls == "stage" && detail::holds(c.source, {o.id, st.id}, s, schema)) ++brute;
        EXPECT_EQ(evaluate_concept(c, s, schema), brute) << print(c);
      }
      EXPECT_EQ(evaluate_concept(c, s, schema), evaluate_concept(c, t, schema)) << print(c);
    }
  }
}
