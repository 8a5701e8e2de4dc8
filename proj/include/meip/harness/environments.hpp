#pragma once

// Environment descriptors: JSON objects that name a world and its parameters,
// stored with every demo so the record can be replayed.
//
//   {"kind": "didactic", "p": 0.1}
//   {"kind": "ritual", "stages": 3, "inventory": 5, "ordered": false}
//   {"kind": "fold", "fixture": "shirt" | "scene": {...}, "folds": 3,
//    "discretization": {"grid": 8, "radii": 4, "angles": 8},
//    "exemplars": "scripted" | "none" | ["x,y,r,theta", ...], "top_k": 20}

#include <memory>
#include <string>

#include "meip/envs/didactic.hpp"
#include "meip/envs/ritual.hpp"
#include "meip/fold/fixtures.hpp"
#include "meip/harness/io.hpp"

namespace meip {

inline const std::vector<fold::FoldAction>& scripted_exemplars() {
  static const std::vector<fold::FoldAction> ex = [] {
    std::vector<Plan> all;
    for (const auto& [g, scripts] : fold::fold_scripts())
      for (auto& p : fold::scripted_demos(g)) all.push_back(std::move(p));
    return fold::exemplars_of(all);
  }();
  return ex;
}

/// Fills defaults so equal worlds get equal descriptors.
inline json normalize_descriptor(const json& d) {
  if (!d.is_object() || !d.contains("kind")) throw ConfigError("environment descriptor needs a 'kind'");
  const auto kind = d.at("kind").get<std::string>();
  json out = d;
  if (kind == "didactic") {
    detail::check_keys(d, {"kind", "p"}, "didactic descriptor");
    out["p"] = detail::get_or(d, "p", 0.1);
  } else if (kind == "ritual") {
    detail::check_keys(d, {"kind", "stages", "inventory", "ordered"}, "ritual descriptor");
    out["stages"] = detail::get_or<std::size_t>(d, "stages", 3);
    out["inventory"] = detail::get_or<std::size_t>(d, "inventory", 5);
    out["ordered"] = detail::get_or(d, "ordered", false);
  } else if (kind == "fold") {
    detail::check_keys(d, {"kind", "fixture", "scene", "folds", "discretization", "exemplars", "top_k"},
                       "fold descriptor");
    if (d.contains("fixture") == d.contains("scene"))
      throw ConfigError("fold descriptor needs exactly one of 'fixture' and 'scene'");
    out["folds"] = detail::get_or<std::size_t>(d, "folds", 3);
    json disc = detail::get_or(d, "discretization", json::object());
    detail::check_keys(disc, {"grid", "radii", "angles"}, "fold discretization");
    fold::Discretization def;
    out["discretization"] = {{"grid", detail::get_or(disc, "grid", def.grid)},
                             {"radii", detail::get_or(disc, "radii", def.radii)},
                             {"angles", detail::get_or(disc, "angles", def.angles)}};
    out["exemplars"] = detail::get_or(d, "exemplars", json("scripted"));
    out["top_k"] = detail::get_or<std::size_t>(d, "top_k", fold::ProposalConfig{}.top_k);
  } else {
    throw ConfigError("unknown environment kind '" + kind + "' (didactic, ritual, fold)");
  }
  return out;
}

/// Descriptor from a CLI argument: "builtin:didactic[:p]",
/// "builtin:ritual[:inventory]", "builtin:fold:<fixture>", or a JSON file
/// holding either a descriptor or a bare fold scene.
inline json parse_environment_arg(const std::string& arg) {
  const std::string prefix = "builtin:";
  if (arg.rfind(prefix, 0) == 0) {
    std::string rest = arg.substr(prefix.size());
    auto colon = rest.find(':');
    std::string name = rest.substr(0, colon);
    std::string param = colon == std::string::npos ? "" : rest.substr(colon + 1);
    try {
      if (name == "didactic")
        return normalize_descriptor({{"kind", "didactic"}, {"p", param.empty() ? 0.1 : std::stod(param)}});
      if (name == "ritual")
        return normalize_descriptor(
            {{"kind", "ritual"}, {"inventory", param.empty() ? std::size_t{5} : std::stoul(param)}});
    } catch (const std::logic_error&) {
      throw ConfigError("bad parameter in environment '" + arg + "'");
    }
    if (name == "fold") {
      if (param.empty()) throw ConfigError("builtin:fold needs a fixture, e.g. builtin:fold:shirt");
      fold::fixture_description(param);  // validates the name
      return normalize_descriptor({{"kind", "fold"}, {"fixture", param}});
    }
    throw ConfigError("unknown builtin environment '" + name + "' (didactic, ritual, fold)");
  }
  json j = read_json_file(arg);
  if (j.contains("polygons")) return normalize_descriptor({{"kind", "fold"}, {"scene", j}});
  return normalize_descriptor(j);
}

inline std::unique_ptr<Environment> make_environment(const json& descriptor) {
  const json d = normalize_descriptor(descriptor);
  const auto kind = d.at("kind").get<std::string>();
  if (kind == "didactic") return std::make_unique<DidacticEnv>(d.at("p").get<double>());
  if (kind == "ritual")
    return std::make_unique<RitualEnv>(d.at("stages").get<std::size_t>(), d.at("inventory").get<std::size_t>(),
                                       d.at("ordered").get<bool>());
  fold::FoldScene scene = d.contains("fixture") ? fold::fixture_scene(d.at("fixture").get<std::string>())
                                                : fold::parse_scene(d.at("scene"));
  const auto& dj = d.at("discretization");
  fold::Discretization disc{dj.at("grid").get<int>(), dj.at("radii").get<int>(), dj.at("angles").get<int>()};
  std::vector<fold::FoldAction> ex;
  const auto& ej = d.at("exemplars");
  if (ej.is_string()) {
    const auto mode = ej.get<std::string>();
    if (mode == "scripted") {
      fold::Discretization def;
      if (disc.grid != def.grid || disc.radii != def.radii || disc.angles != def.angles)
        throw ConfigError("scripted exemplars exist only for the default discretization");
      ex = scripted_exemplars();
    } else if (mode != "none") {
      throw ConfigError("fold exemplars must be 'scripted', 'none' or a list of actions");
    }
  } else {
    for (const auto& a : ej) ex.push_back(fold::FoldAction::parse(a.get<std::string>()));
  }
  fold::ProposalConfig prop;
  prop.top_k = d.at("top_k").get<std::size_t>();
  return std::make_unique<fold::FoldEnv>(std::move(scene), d.at("folds").get<std::size_t>(), disc, std::move(ex),
                                         prop);
}

/// Demo records of the scripted folding demonstrations (5 per garment).
inline std::vector<DemoRecord> scripted_fold_records() {
  std::vector<DemoRecord> out;
  for (const std::string g : {"square", "rectangle", "shirt"}) {
    json desc = normalize_descriptor({{"kind", "fold"}, {"fixture", g}});
    for (auto& p : fold::scripted_demos(g)) out.push_back({g, desc, std::move(p)});
  }
  return out;
}

/// Rebuilds a plan through `env` from its actions so states carry whatever
/// the environment attaches (fold scenes). Recorded fluents must agree.
inline Plan resimulate(const Environment& env, const Plan& p) {
  Plan q = plan_from_actions(env, p.actions);
  q.source = p.source;
  if (q.states.size() != p.states.size()) throw EnvironmentError("replayed plan has a different length");
  for (std::size_t t = 0; t < q.states.size(); ++t)
    for (const auto& [name, rows] : p.states[t].table())
      for (const auto& [args, v] : rows)
        if (std::abs(q.states[t].value(name, args) - v) > 1e-9 * std::max(1.0, std::abs(v)))
          throw EnvironmentError("recorded state " + std::to_string(t) + " disagrees with the environment on " +
                                 name);
  return q;
}

}  // namespace meip
