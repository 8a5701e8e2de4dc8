#pragma once

// Built-in cloth fixtures and scripted folding demonstrations.

#include <map>
#include <string>
#include <vector>

#include "meip/fold/env.hpp"

namespace meip::fold {

inline nlohmann::json fixture_description(const std::string& name) {
  using nlohmann::json;
  auto poly = [](std::vector<std::pair<double, double>> vs) {
    json out = json::array();
    for (auto [x, y] : vs) out.push_back({x, y});
    return out;
  };
  if (name == "square") return {{"name", "square"}, {"polygons", {{{"vertices", poly({{0, 0}, {1, 0}, {1, 1}, {0, 1}})}}}}};
  if (name == "rectangle")
    return {{"name", "rectangle"}, {"polygons", {{{"vertices", poly({{0, 0}, {2, 0}, {2, 1}, {0, 1}})}}}}};
  if (name == "shirt")
    return {{"name", "shirt"},
            {"polygons",
             {{{"vertices", poly({{0, 0}, {2, 0}, {2, 3}, {0, 3}})},
               {"marks",
                {{{"name", "logo"}, {"region", poly({{0.7, 1.7}, {1.3, 1.7}, {1.3, 2.3}, {0.7, 2.3}})}},
                 {{"name", "neck"}, {"region", poly({{0.8, 2.75}, {1.2, 2.75}, {1.2, 2.95}, {0.8, 2.95}})}}}}},
              {{"vertices", poly({{-1, 1.8}, {0, 2}, {0, 3}, {-1, 2.6}})}},
              {{"vertices", poly({{2, 2}, {3, 1.8}, {3, 2.6}, {2, 3}})}}}}};
  if (name == "sweater")
    return {{"name", "sweater"},
            {"polygons",
             {{{"vertices", poly({{0, 0}, {2.2, 0}, {2.2, 2.8}, {1.6, 3.2}, {0.6, 3.2}, {0, 2.8}})},
               {"marks",
                {{{"name", "logo"}, {"region", poly({{0.8, 1.6}, {1.4, 1.6}, {1.4, 2.2}, {0.8, 2.2}})}},
                 {{"name", "neck"}, {"region", poly({{0.8, 2.9}, {1.4, 2.9}, {1.4, 3.1}, {0.8, 3.1}})}}}}},
              {{"vertices", poly({{0, 2.0}, {0, 2.8}, {-1.6, 1.9}, {-1.3, 1.4}})}},
              {{"vertices", poly({{2.2, 2.0}, {3.5, 1.4}, {3.8, 1.9}, {2.2, 2.8}})}}}}};
  throw ConfigError("unknown cloth fixture '" + name + "' (square, rectangle, shirt, sweater)");
}

inline FoldScene fixture_scene(const std::string& name) { return parse_scene(fixture_description(name)); }

/// A scripted fold: normal-angle index and the fold line's position as a
/// fraction of the current bounding box along that normal.
struct ScriptedFold {
  int theta;
  double fraction;
};

/// The legal action whose line has normal angle `theta` and lies closest to
/// the requested fraction of the scene's extent.
inline FoldAction nearest_action(const FoldScene& scene, const ScriptedFold& f, const Discretization& d) {
  const double ang = kPi * f.theta / d.angles;
  Vec2 n{std::cos(ang), std::sin(ang)};
  auto [lo, hi] = scene.bounds();
  double a = 1e300, b = -1e300;
  for (Vec2 c : {lo, hi, Vec2{lo.x, hi.y}, Vec2{hi.x, lo.y}}) {
    a = std::min(a, dot(c, n));
    b = std::max(b, dot(c, n));
  }
  const double target = a + f.fraction * (b - a);
  std::optional<FoldAction> best;
  double best_d = 1e300;
  for (const auto& act : enumerate_actions(scene, d)) {
    if (act.theta != f.theta) continue;
    Line l = action_line(scene, act, d);
    double dist = std::abs(dot(l.point, l.normal()) - target);
    if (dist < best_d - 1e-12) {
      best_d = dist;
      best = act;
    }
  }
  if (!best) throw GeometryError("no legal fold with angle index " + std::to_string(f.theta));
  return *best;
}

/// Five three-fold scripts per training garment (square, rectangle, shirt).
/// The demonstrator halves along the axes; scripts differ in order and
/// orientation. Shirt scripts tuck both sleeves and halve the body, in either order.
inline const std::map<std::string, std::vector<std::vector<ScriptedFold>>>& fold_scripts() {
  static const std::map<std::string, std::vector<std::vector<ScriptedFold>>> s{
      {"square",
       {{{0, 0.5}, {4, 0.5}, {0, 0.5}},
        {{4, 0.5}, {0, 0.5}, {4, 0.5}},
        {{0, 0.5}, {0, 0.5}, {4, 0.5}},
        {{4, 0.5}, {4, 0.5}, {0, 0.5}},
        {{0, 0.5}, {4, 0.5}, {4, 0.5}}}},
      {"rectangle",
       {{{0, 0.5}, {0, 0.5}, {4, 0.5}},
        {{0, 0.5}, {4, 0.5}, {0, 0.5}},
        {{4, 0.5}, {0, 0.5}, {0, 0.5}},
        {{0, 0.5}, {0, 0.5}, {0, 0.5}},
        {{4, 0.5}, {0, 0.5}, {4, 0.5}}}},
      {"shirt",
       {{{0, 0.25}, {0, 0.67}, {4, 0.5}},
        {{0, 0.75}, {0, 0.33}, {4, 0.5}},
        {{4, 0.5}, {0, 0.25}, {0, 0.67}},
        {{0, 0.25}, {0, 0.67}, {0, 0.5}},
        {{4, 0.5}, {0, 0.75}, {0, 0.33}}}},
  };
  return s;
}

/// Demo plans of one garment on an unnarrowed environment.
inline std::vector<Plan> scripted_demos(const std::string& garment, const Discretization& d = {}) {
  auto it = fold_scripts().find(garment);
  if (it == fold_scripts().end()) throw ConfigError("no scripted demos for '" + garment + "'");
  FoldEnv env(fixture_scene(garment), 3, d);
  std::vector<Plan> out;
  for (const auto& script : it->second) {
    std::vector<std::string> actions;
    FoldScene s = env.initial_scene();
    for (const auto& f : script) {
      auto a = nearest_action(s, f, d);
      actions.push_back(a.label());
      s = s.folded(action_line(s, a, d));
    }
    out.push_back(plan_from_actions(env, actions));
  }
  return out;
}

inline std::vector<FoldAction> exemplars_of(const std::vector<Plan>& demos) {
  std::vector<FoldAction> out;
  for (const auto& p : demos)
    for (const auto& a : p.actions) {
      auto fa = FoldAction::parse(a);
      if (std::find(out.begin(), out.end(), fa) == out.end()) out.push_back(fa);
    }
  return out;
}

}  // namespace meip::fold
