#pragma once

#include <cmath>

#include "meip/fold/scene.hpp"
#include "meip/state.hpp"

namespace meip::fold {

inline constexpr double kAngleTol = kPi / 180.0;  // 1 degree

/// The ten folding fluents.
inline const Schema& fold_schema() {
  static const Schema s({
      {"EdgeLength", FluentKind::kFunction, ValueDomain::kReal, {"edge"}},
      {"Logo", FluentKind::kFunction, ValueDomain::kReal, {"garment"}},
      {"Neck", FluentKind::kFunction, ValueDomain::kReal, {"garment"}},
      {"Vt2VtDistance", FluentKind::kFunction, ValueDomain::kReal, {"vertex", "vertex"}},
      {"Vt2EdgeDistance", FluentKind::kFunction, ValueDomain::kReal, {"vertex", "edge"}},
      {"Parallel", FluentKind::kPredicate, ValueDomain::kBoolean, {"edge", "edge"}},
      {"Perpendicular", FluentKind::kPredicate, ValueDomain::kBoolean, {"edge", "edge"}},
      {"VertexOnEdge", FluentKind::kPredicate, ValueDomain::kBoolean, {"vertex", "edge"}},
      {"EdgeOnEdge", FluentKind::kPredicate, ValueDomain::kBoolean, {"edge", "edge"}},
      {"VertexInPolygon", FluentKind::kPredicate, ValueDomain::kBoolean, {"vertex", "polygon"}},
  });
  return s;
}

/// Grounded fluent table of a scene. Binary fluents range over distinct
/// entities; VertexOnEdge excludes an edge's own endpoints and VertexInPolygon
/// means strictly inside.
inline State evaluate_fold_fluents(const FoldScene& scene) {
  const auto vs = scene.vertices();
  const auto es = scene.edges();
  std::vector<Entity> ents{{"cloth", "garment"}};
  for (const auto& p : scene.pieces()) ents.push_back({p.id, "polygon"});
  for (const auto& e : es) ents.push_back({e.id, "edge"});
  for (const auto& v : vs) ents.push_back({v.id, "vertex"});
  State s(scene.name(), make_entities(std::move(ents)));

  s.set("Logo", {"cloth"}, scene.visible_fraction("logo"));
  s.set("Neck", {"cloth"}, scene.visible_fraction("neck"));
  for (const auto& e : es) s.set("EdgeLength", {e.id}, norm(e.b - e.a));
  for (const auto& v : vs)
    for (const auto& w : vs)
      if (v.id != w.id) s.set("Vt2VtDistance", {v.id, w.id}, norm(v.a - w.a));
  for (const auto& v : vs)
    for (const auto& e : es) {
      double d = segment_distance(v.a, e.a, e.b);
      s.set("Vt2EdgeDistance", {v.id, e.id}, d <= kTol ? 0.0 : d);
      bool endpoint = near(v.a, e.a) || near(v.a, e.b);
      if (!endpoint && d <= kTol) s.set("VertexOnEdge", {v.id, e.id}, 1.0);
    }
  for (const auto& e : es)
    for (const auto& f : es) {
      if (e.id == f.id) continue;
      Vec2 de = e.b - e.a, df = f.b - f.a;
      double sin_a = std::abs(cross(de, df)) / (norm(de) * norm(df));
      double cos_a = std::abs(dot(de, df)) / (norm(de) * norm(df));
      const bool parallel = sin_a <= std::sin(kAngleTol);
      if (parallel) s.set("Parallel", {e.id, f.id}, 1.0);
      if (cos_a <= std::sin(kAngleTol)) s.set("Perpendicular", {e.id, f.id}, 1.0);
      if (parallel) {
        // collinear within tolerance and overlapping with positive length
        double off_a = std::abs(cross(de, f.a - e.a)) / norm(de);
        double off_b = std::abs(cross(de, f.b - e.a)) / norm(de);
        if (off_a <= kTol && off_b <= kTol) {
          double len = norm(de);
          double t0 = dot(f.a - e.a, de) / len, t1 = dot(f.b - e.a, de) / len;
          double overlap = std::min(len, std::max(t0, t1)) - std::max(0.0, std::min(t0, t1));
          if (overlap > kTol) s.set("EdgeOnEdge", {e.id, f.id}, 1.0);
        }
      }
    }
  for (const auto& v : vs)
    for (const auto& p : scene.pieces())
      if (strictly_inside(v.a, p.vertices)) s.set("VertexInPolygon", {v.id, p.id}, 1.0);
  return s;
}

}  // namespace meip::fold
