#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "meip/concept_eval.hpp"
#include "meip/concept_parser.hpp"
#include "meip/fold/fixtures.hpp"

using namespace meip;
using namespace meip::fold;

namespace {

FoldScene square() { return fixture_scene("square"); }

Line vertical(double x) { return Line::from_normal({x, 0.0}, 0.0); }

double count_concept(const std::string& text, const State& s) {
  return evaluate_concept(parse_concept(text, fold_schema()), s, fold_schema());
}

bool same_polygon(const std::vector<Vec2>& a, const std::vector<Vec2>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& v : a)
    if (std::none_of(b.begin(), b.end(), [&](Vec2 w) { return near(v, w, tol); })) return false;
  return true;
}

Line random_line(const FoldScene& s, std::mt19937_64& rng) {
  auto [lo, hi] = s.bounds();
  std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y), ut(0.0, kPi);
  return Line::from_normal({ux(rng), uy(rng)}, ut(rng));
}

FoldScene transformed(const std::string& name, double angle, Vec2 shift) {
  auto j = fixture_description(name);
  auto move = [&](nlohmann::json& pts) {
    for (auto& p : pts) {
      double x = p[0], y = p[1];
      p = {std::cos(angle) * x - std::sin(angle) * y + shift.x, std::sin(angle) * x + std::cos(angle) * y + shift.y};
    }
  };
  for (auto& poly : j["polygons"]) {
    move(poly["vertices"]);
    if (poly.contains("marks"))
      for (auto& m : poly["marks"]) move(m["region"]);
  }
  return parse_scene(j);
}

}  // namespace

TEST(FoldScene, UnitSquareParses) {
  auto s = square();
  ASSERT_EQ(s.pieces().size(), 1u);
  EXPECT_DOUBLE_EQ(s.material_area(), 1.0);
  EXPECT_DOUBLE_EQ(s.silhouette_area(), 1.0);
  EXPECT_EQ(s.vertices().size(), 4u);
  EXPECT_EQ(s.edges().size(), 4u);
  EXPECT_EQ(s.layer_count(), 1u);
}

TEST(FoldScene, ShirtHasThreePolygons) {
  auto s = fixture_scene("shirt");
  EXPECT_EQ(s.pieces().size(), 3u);
  EXPECT_DOUBLE_EQ(s.visible_fraction("logo"), 1.0);
  EXPECT_DOUBLE_EQ(s.visible_fraction("neck"), 1.0);
}

TEST(FoldScene, RejectsBadPolygons) {
  using V = std::vector<Vec2>;
  EXPECT_THROW(FoldScene::build("bow", {V{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}), GeometryError);
  EXPECT_THROW(FoldScene::build("flat", {V{{0, 0}, {1, 0}, {2, 0}}}), GeometryError);
  EXPECT_THROW(FoldScene::build("two", {V{{0, 0}, {1, 0}}}), GeometryError);
  EXPECT_THROW(FoldScene::build("dart", {V{{0, 0}, {2, 0}, {1, 0.5}, {1, 2}}}), GeometryError);
  EXPECT_THROW(parse_scene(nlohmann::json{{"polygons", 3}}), FormatError);
}

TEST(FoldScene, ClockwiseInputIsNormalized) {
  auto s = FoldScene::build("cw", {{{0, 0}, {0, 1}, {1, 1}, {1, 0}}});
  EXPECT_GT(s.pieces()[0].area(), 0.0);
}

TEST(FoldScene, MidlineFoldHalvesSquare) {
  auto s = apply_fold(square(), vertical(0.5));
  EXPECT_NEAR(s.silhouette_area(), 0.5, 1e-12);
  EXPECT_NEAR(s.material_area(), 1.0, 1e-12);
  EXPECT_EQ(s.layer_count(), 2u);
  auto [lo, hi] = s.bounds();
  // exact tie: the side with the leftmost-lowest vertex stays
  EXPECT_NEAR(lo.x, 0.0, 1e-12);
  EXPECT_NEAR(hi.x, 0.5, 1e-12);
  EXPECT_NEAR(hi.y, 1.0, 1e-12);
}

TEST(FoldScene, FoldOutsideSilhouetteFails) {
  EXPECT_THROW(apply_fold(square(), vertical(2.0)), GeometryError);
  EXPECT_THROW(apply_fold(square(), vertical(1.0)), GeometryError);
}

TEST(FoldScene, SmallerFlapGoesBehind) {
  auto s = apply_fold(fixture_scene("rectangle"), vertical(0.5));
  ASSERT_EQ(s.pieces().size(), 2u);
  const Piece& back = s.pieces()[0];
  const Piece& front = s.pieces()[1];
  EXPECT_LT(back.layer, front.layer);
  EXPECT_NEAR(back.area(), 0.5, 1e-12);
  EXPECT_NEAR(front.area(), 1.5, 1e-12);
  EXPECT_FALSE(back.face_up);
  EXPECT_TRUE(front.face_up);
  for (const auto& v : back.vertices) EXPECT_GE(v.x, 0.5 - 1e-12);
  EXPECT_NEAR(s.silhouette_area(), 1.5, 1e-12);
}

TEST(FoldScene, EntityIdsAreNeverReused) {
  auto s0 = square();
  auto s1 = apply_fold(s0, vertical(0.5));
  auto s2 = apply_fold(s1, Line::from_normal({0.0, 0.5}, kPi / 2));
  std::set<std::string> before;
  for (const auto& p : s0.pieces()) before.insert(p.id);
  for (const auto& p : s1.pieces()) EXPECT_FALSE(before.count(p.id)) << p.id;
  // the vertex at a shared position keeps its id
  EXPECT_EQ(s2.vertex_id({0, 0}), s0.vertex_id({0, 0}));
}

TEST(FoldScene, LogoCoveredAfterFoldingBodyOverIt) {
  auto s = fixture_scene("shirt");
  // fold the bottom half of the body up over the front: the flap goes behind, logo stays visible
  auto up = apply_fold(s, Line::from_normal({0.0, 1.5}, kPi / 2));
  EXPECT_DOUBLE_EQ(up.visible_fraction("logo"), 1.0);
  // the narrow top strip (neck) is the smaller side: it flips behind, face down
  auto down = apply_fold(s, Line::from_normal({0.0, 2.5}, kPi / 2));
  EXPECT_DOUBLE_EQ(down.visible_fraction("neck"), 0.0);
  EXPECT_DOUBLE_EQ(down.visible_fraction("logo"), 1.0);
}

TEST(FoldFluents, SquareGeometry) {
  auto st = evaluate_fold_fluents(square());
  EXPECT_DOUBLE_EQ(count_concept("max EdgeLength(_)", st), 1.0);
  EXPECT_DOUBLE_EQ(count_concept("count Parallel(_@_)", st), 4.0);       // 2 opposite pairs, both orders
  EXPECT_DOUBLE_EQ(count_concept("count Perpendicular(_@_)", st), 8.0);  // 4 adjacent pairs, both orders
  EXPECT_DOUBLE_EQ(count_concept("max Vt2VtDistance(_@_)", st), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(count_concept("count VertexInPolygon(_@_)", st), 0.0);
  EXPECT_DOUBLE_EQ(count_concept("count VertexOnEdge(_@_)", st), 0.0);
}

TEST(FoldFluents, TriangleDistances) {
  auto s = FoldScene::build("tri", {{{0, 0}, {3, 0}, {0, 4}}});
  auto st = evaluate_fold_fluents(s);
  EXPECT_DOUBLE_EQ(st.value("Vt2VtDistance", {s.vertex_id({3, 0}), s.vertex_id({0, 4})}), 5.0);
  EXPECT_DOUBLE_EQ(st.value("Vt2EdgeDistance", {s.vertex_id({0, 0}), s.edge_id({3, 0}, {0, 4})}), 2.4);
  EXPECT_DOUBLE_EQ(st.value("Perpendicular", {s.edge_id({0, 0}, {3, 0}), s.edge_id({0, 4}, {0, 0})}), 1.0);
  EXPECT_DOUBLE_EQ(count_concept("count Parallel(_@_)", st), 0.0);
}

TEST(FoldFluents, TuckedSleeveVerticesLieInsideBody) {
  auto s = fixture_scene("shirt");
  auto st0 = evaluate_fold_fluents(s);
  auto tucked = apply_fold(s, vertical(0.0));
  auto st1 = evaluate_fold_fluents(tucked);
  EXPECT_EQ(count_concept("count VertexInPolygon(_@_)", st0), 0.0);
  EXPECT_GT(count_concept("count VertexInPolygon(_@_)", st1), 0.0);
  EXPECT_GT(count_concept("count EdgeOnEdge(_@_)", st1), 0.0);
}

TEST(FoldFluents, RigidMotionInvariance) {
  for (const std::string name : {"shirt", "sweater"}) {
    auto a = evaluate_fold_fluents(fixture_scene(name));
    auto b = evaluate_fold_fluents(transformed(name, 0.7, {3.0, -1.5}));
    ASSERT_EQ(a.entities(), b.entities());
    ASSERT_EQ(a.table().size(), b.table().size());
    for (const auto& [fluent, rows] : a.table()) {
      ASSERT_TRUE(b.table().count(fluent)) << fluent;
      const auto& other = b.table().at(fluent);
      ASSERT_EQ(rows.size(), other.size()) << fluent;
      for (const auto& [args, v] : rows) EXPECT_NEAR(b.value(fluent, args), v, 1e-9) << fluent;
    }
  }
}

TEST(FoldActions, LabelRoundTrip) {
  FoldAction a{3, 1, 2, 7};
  EXPECT_EQ(FoldAction::parse(a.label()), a);
  EXPECT_THROW(FoldAction::parse("1,2,3"), FormatError);
  EXPECT_THROW(FoldAction::parse("1,2,3,4x"), FormatError);
  EXPECT_THROW(action_line(square(), {8, 0, 0, 0}, {}), GeometryError);
}

TEST(FoldActions, NoDuplicateChordsAndAllLegal) {
  Discretization d{3, 1, 4};
  auto s = square();
  auto acts = enumerate_actions(s, d);
  ASSERT_FALSE(acts.empty());
  for (std::size_t i = 0; i < acts.size(); ++i) {
    Line li = action_line(s, acts[i], d);
    EXPECT_NO_THROW(apply_fold(s, li));
    for (std::size_t j = i + 1; j < acts.size(); ++j) {
      Line lj = action_line(s, acts[j], d);
      const bool same_dir = std::abs(cross(li.dir, lj.dir)) < 1e-9;
      const bool same_line = same_dir && std::abs(lj.side(li.point)) < 1e-9;
      EXPECT_FALSE(same_line) << acts[i].label() << " vs " << acts[j].label();
    }
  }
}

TEST(FoldActions, MidlinesPresent) {
  Discretization d;
  auto s = square();
  bool v = false, h = false;
  for (const auto& a : enumerate_actions(s, d)) {
    Line l = action_line(s, a, d);
    if (a.theta == 0 && std::abs(l.side({0.5, 0.3})) < 1e-12) v = true;
    if (a.theta == d.angles / 2 && std::abs(l.side({0.3, 0.5})) < 1e-12) h = true;
  }
  EXPECT_TRUE(v);
  EXPECT_TRUE(h);
}

TEST(FoldProposal, PeaksAtExemplarAndVanishesFarAway) {
  Discretization d;
  ProposalConfig cfg;
  std::vector<FoldAction> ex{{2, 3, 1, 4}};
  EXPECT_DOUBLE_EQ(action_proposal(ex, ex[0], d, cfg), 1.0);
  EXPECT_LT(action_proposal(ex, {7, 3, 1, 4}, d, cfg), 1e-5);
  EXPECT_LT(action_proposal(ex, {2, 3, 1, 0}, d, cfg), action_proposal(ex, {2, 3, 1, 3}, d, cfg));
  // angles wrap around
  EXPECT_DOUBLE_EQ(action_proposal({{0, 0, 0, 0}}, {0, 0, 0, 7}, d, cfg),
                   action_proposal({{0, 0, 0, 0}}, {0, 0, 0, 1}, d, cfg));
  EXPECT_DOUBLE_EQ(action_proposal({}, {5, 5, 0, 0}, d, cfg), 1.0);
}

TEST(FoldProposal, FastPathMatchesFilteredEnumeration) {
  Discretization d;
  auto demos = scripted_demos("shirt", d);
  auto ex = exemplars_of(demos);
  for (const std::string name : {"shirt", "sweater", "rectangle"}) {
    auto s = fixture_scene(name);
    EXPECT_EQ(proposed_actions(s, ex, d), propose(enumerate_actions(s, d), ex, d)) << name;
  }
}

TEST(FoldProposal, TopKeepsEveryDemoAction) {
  Discretization d;
  std::vector<Plan> all;
  for (const std::string g : {"square", "rectangle", "shirt"})
    for (auto& p : scripted_demos(g, d)) all.push_back(p);
  ASSERT_EQ(all.size(), 15u);
  auto ex = exemplars_of(all);
  for (const std::string g : {"square", "rectangle", "shirt"}) {
    FoldEnv narrowed(fixture_scene(g), 3, d, ex);
    for (const auto& p : all) {
      if (p.problem_id() == g) {
        EXPECT_NO_THROW(replay_plan(narrowed, p));
      }
    }
    EXPECT_LE(narrowed.legal_actions(initial_history(narrowed)).size(), 20u);
  }
}

TEST(FoldEnv, PlansReplayAndStopAfterBudget) {
  Discretization d;
  FoldEnv env(fixture_scene("square"), 2, d);
  auto first = nearest_action(env.initial_scene(), {0, 0.5}, d);
  auto half = apply_fold(env.initial_scene(), action_line(env.initial_scene(), first, d));
  auto second = nearest_action(half, {4, 0.5}, d);
  auto p = plan_from_actions(env, {first.label(), second.label()});
  EXPECT_EQ(p.states.size(), 3u);
  EXPECT_TRUE(env.legal_actions(p.states).empty());
  EXPECT_NEAR(scene_of(p.states.back()).silhouette_area(), 0.25, 1e-12);
  EXPECT_THROW(plan_from_actions(env, {"7,7,3,0"}), EnvironmentError);
  State bare = p.states.back();
  bare.set_payload(nullptr);
  EXPECT_THROW(scene_of(bare), EnvironmentError);
}

TEST(FoldProperties, RandomFoldsConserveMaterialAndShrink) {
  std::mt19937_64 rng(11);
  for (const std::string name : {"square", "rectangle", "shirt", "sweater"}) {
    for (int trial = 0; trial < 20; ++trial) {
      FoldScene s = fixture_scene(name);
      const double material = s.material_area();
      for (int k = 0; k < 4; ++k) {
        Line l = random_line(s, rng);
        FoldScene next;
        try {
          next = apply_fold(s, l);
        } catch (const GeometryError&) {
          continue;
        }
        EXPECT_NEAR(next.material_area(), material, 1e-6 * material);
        EXPECT_LE(next.silhouette_area(), s.silhouette_area() + 1e-9);
        EXPECT_GE(next.layer_count(), s.layer_count() + 1);
        for (const auto& p : next.pieces()) EXPECT_NO_THROW(checked_polygon(p.vertices));
        s = std::move(next);
      }
    }
  }
}

TEST(FoldProperties, ReflectingTheFlapBackRestoresIt) {
  std::mt19937_64 rng(5);
  for (const std::string name : {"square", "rectangle"}) {
    auto s = fixture_scene(name);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
      Line l = random_line(s, rng);
      FoldScene out;
      try {
        out = apply_fold(s, l);
      } catch (const GeometryError&) {
        continue;
      }
      ASSERT_EQ(out.pieces().size(), 2u);
      const Piece& flap = out.pieces()[0];
      ASSERT_FALSE(flap.face_up);
      std::vector<Vec2> back;
      for (const auto& v : flap.vertices) back.push_back(l.reflect(v));
      const auto& original = s.pieces()[0].vertices;
      const auto a = clip_polygon(original, l, +1), b = clip_polygon(original, l, -1);
      EXPECT_TRUE(same_polygon(back, a, 1e-9) || same_polygon(back, b, 1e-9));
      for (const auto& v : flap.vertices) EXPECT_TRUE(near(l.reflect(l.reflect(v)), v, 1e-12));
      ++checked;
    }
    EXPECT_GT(checked, 10);
  }
}
