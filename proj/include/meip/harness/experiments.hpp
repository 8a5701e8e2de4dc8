#pragma once

// Experiment runner: learn on training worlds, transfer to test worlds, plan,
// evaluate both MEIP and the MaxEnt-IRL baseline. Reports are JSON with the
// effective config, its hash, every seed used and any flags.

#include <map>
#include <set>
#include <string>

#include "meip/harness/environments.hpp"
#include "meip/harness/eval.hpp"
#include "meip/harness/parallel.hpp"

namespace meip {

namespace detail {

inline json estimate_to_json(const ProbabilityEstimate& e) {
  return {{"p", e.p}, {"lo", e.lo}, {"hi", e.hi}, {"hits", e.hits}, {"episodes", e.episodes}};
}

inline json matching_to_json(const MatchingReport& r) {
  json m = json::array();
  for (const auto& x : r.matching) m.push_back({{"concept", x.concept_text}, {"rate", x.rate}});
  return {{"matching", m}, {"mean_matching", r.mean_matching}, {"tau", r.tau}, {"plans", r.plans},
          {"convergences", r.convergences}};
}

inline json training_to_json(const TrainingResult& r) {
  json trace = json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"iteration", t.iteration}, {"demo_tau", t.demo_tau}, {"sample_tau", t.sample_tau},
                     {"objective", t.objective}, {"violated", t.violated}, {"step", t.step}});
  return {{"converged", r.converged}, {"iterations", r.trace.size()}, {"trace", trace}};
}

inline json maxent_to_json(const MaxEntResult& r) {
  return {{"converged", r.converged}, {"iterations", r.iterations}, {"gradient_norm", r.gradient_norm},
          {"theta", r.model.parameters()}};
}

inline std::vector<Concept> parse_concepts(const json& texts, const Schema& schema) {
  std::vector<Concept> out;
  for (const auto& t : texts) out.push_back(parse_concept(t.get<std::string>(), schema));
  return out;
}

/// defaults <- overrides, rejecting keys the defaults do not have at the top level.
inline json merge_config(json defaults, const json& overrides, const std::string& where) {
  if (overrides.is_null()) return defaults;
  if (!overrides.is_object()) throw ConfigError(where + " config must be an object");
  for (const auto& [k, v] : overrides.items())
    if (!defaults.contains(k)) throw ConfigError("unknown key '" + k + "' in " + where + " config");
  defaults.merge_patch(overrides);
  return defaults;
}

inline std::vector<Plan> load_or(const json& cfg, const std::function<std::vector<Plan>()>& make) {
  if (cfg.at("demos").is_null()) return make();
  return plans_of(read_demos(cfg.at("demos").get<std::string>()));
}

inline json base_report(const std::string& name, const json& cfg) {
  return {{"experiment", name}, {"config", cfg}, {"config_hash", config_hash(cfg)}, {"flags", json::array()}};
}

inline std::vector<double> g_along(const RankingModel& m, const Plan& p) {
  std::vector<double> out;
  for (const auto& s : p.states) out.push_back(score_state(m, s));
  return out;
}

inline bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

}  // namespace detail

/// Demos of the route S0 -> S1 -> g under a1, by rejection of slipped episodes.
inline std::vector<Plan> didactic_demos(double p, std::size_t count, std::uint64_t seed) {
  if (p >= 1.0) throw ConfigError("no demos exist when a1 always slips");
  DidacticEnv env(p);
  std::mt19937_64 rng(seed);
  std::vector<Plan> out;
  while (out.size() < count) {
    History h = initial_history(env);
    Plan plan;
    for (const char* a : {"a1", "go"}) {
      h.push_back(sample_transition(env, h, a, rng).state);
      plan.actions.push_back(a);
    }
    plan.states = h;
    if (DidacticEnv::is_desired(h)) out.push_back(std::move(plan));
  }
  return out;
}

/// The five ritual demonstrations: all torches at S1, some bamboo at S2, four clay at S3.
inline std::vector<Plan> ritual_demos(const RitualEnv& env) {
  std::vector<Plan> out;
  for (const char* b : {"1", "3", "1", "3", "1"})
    out.push_back(plan_from_actions(env, {"S1:torch:all", std::string("S2:bamboo:") + b, "S3:clay:4"}));
  return out;
}

inline json default_experiment_config(const std::string& name) {
  json learner, planner, maxent;
  to_json(maxent, MaxEntConfig{});
  if (name == "prob-shift") {
    to_json(learner, LearnerConfig{});
    PlannerConfig pc;
    pc.iterations = 300;
    to_json(planner, pc);
    return {{"seed", 0},
            {"threads", 0},
            {"demos", nullptr},
            {"train_p", 0.1},
            {"demo_count", 5},
            {"test_ps", {0.1, 0.2, 0.3, 0.9}},
            {"episodes", 1000},
            {"meaningful_max_p", 0.85},
            {"concepts", {"exists at(S0)", "exists at(S1)", "exists at(b1)", "exists at(g)"}},
            {"bins", 8},
            {"learner", learner},
            {"planner", planner},
            {"maxent", maxent}};
  }
  if (name == "ritual") {
    LearnerConfig lc;
    lc.max_iterations = 50;
    to_json(learner, lc);
    to_json(planner, PlannerConfig{});
    return {{"seed", 0},
            {"threads", 0},
            {"demos", nullptr},
            {"stages", 3},
            {"train_inventory", 5},
            {"train_ordered", false},
            {"test_inventories", {5, 6}},
            {"convergences", 20},
            {"baseline_samples", 1000},
            {"concepts", {"forall picked(torch@S1)", "exists picked(bamboo@S2)", "count picked(clay@S3)"}},
            {"targets", {1, 1, 4}},
            {"bins", 8},
            {"learner", learner},
            {"planner", planner},
            {"maxent", maxent}};
  }
  if (name == "folding") {
    LearnerConfig lc;
    lc.loss = LossKind::kTanhDiscriminator;
    lc.average_iterates = true;
    lc.accumulate_samples = false;
    lc.samples = 30;
    lc.C = 10.0;
    lc.max_iterations = 20;
    to_json(learner, lc);
    PlannerConfig pc;
    pc.iterations = 500;
    pc.inverse_temperature = 10.0;
    to_json(planner, pc);
    return {{"seed", 0},
            {"threads", 0},
            {"demos", nullptr},
            {"folds", 3},
            {"heldout_per_problem", 1},
            {"eval_fixtures", {"shirt", "sweater"}},
            {"greedy_iterations", 3000},
            {"concepts",
             {"avg Vt2VtDistance(_@_)", "max EdgeLength(_)", "count EdgeOnEdge(_@_)", "count VertexInPolygon(_@_)",
              "count Perpendicular(_@_)", "count Parallel(_@_)", "count (!Parallel & !Perpendicular)(_@_)",
              "max Logo(_)", "max Neck(_)"}},
            {"bins", 4},
            {"baseline", true},
            {"learner", learner},
            {"planner", planner},
            {"maxent", maxent}};
  }
  throw ConfigError("unknown experiment '" + name + "' (prob-shift, ritual, folding)");
}

inline json run_prob_shift(const json& overrides = nullptr) {
  const json cfg = detail::merge_config(default_experiment_config("prob-shift"), overrides, "prob-shift");
  json rep = detail::base_report("prob-shift", cfg);
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const std::size_t threads = cfg.at("threads").get<std::size_t>();
  const std::size_t episodes = cfg.at("episodes").get<std::size_t>();
  LearnerConfig lc = cfg.at("learner").get<LearnerConfig>();
  PlannerConfig pc = cfg.at("planner").get<PlannerConfig>();
  const MaxEntConfig mc = cfg.at("maxent").get<MaxEntConfig>();
  const json seeds = {{"demos", seed + 5}, {"learner", seed}, {"planner", seed}, {"meip_episodes", seed + 11},
                      {"baseline_episodes", seed + 12}};
  rep["seeds"] = seeds;
  lc.seed = seeds["learner"];
  pc.seed = seeds["planner"];

  const DidacticEnv train(cfg.at("train_p").get<double>());
  auto demos = detail::load_or(cfg, [&] {
    return didactic_demos(train.slip(), cfg.at("demo_count").get<std::size_t>(), seeds["demos"]);
  });
  auto concepts = detail::parse_concepts(cfg.at("concepts"), train.schema());
  auto init = make_ranking_model(train.schema(), concepts, demos, cfg.at("bins").get<std::size_t>());
  const auto meip = meip_train(demos, train, init, lc, pc);
  const auto base = maxent_irl_train(demos, train, init, mc);
  rep["training"] = {{"meip", detail::training_to_json(meip)}, {"baseline", detail::maxent_to_json(base)}};
  if (!meip.converged) rep["flags"].push_back("meip did not converge");
  if (!base.converged) rep["flags"].push_back("baseline did not converge");

  auto desired = [](const Plan& p) { return DidacticEnv::is_desired(p.states); };
  json results = json::array();
  for (const auto& pj : cfg.at("test_ps")) {
    const double p = pj.get<double>();
    const DidacticEnv test(p);  // transfer instance, never the training one
    EpisodeRunner run = [&](std::mt19937_64& rng) {
      PlannerConfig tc = pc;
      tc.seed = rng();
      auto tree = mcts_converge(test, meip.model, tc);
      return execute_greedy(tree, rng);
    };
    auto m = eval_desired_sequence(run, desired, episodes, seeds["meip_episodes"], threads);
    auto plans = maxent_sample_plans(test, base.model, episodes, seeds["baseline_episodes"], mc.node_cap);
    std::size_t hits = 0, via_b1 = 0;
    for (const auto& pl : plans) {
      hits += desired(pl);
      via_b1 += pl.actions.front() == "a2";
    }
    const bool meaningful = p <= cfg.at("meaningful_max_p").get<double>();
    json r = {{"p", p},
              {"target", 1.0 - p},
              {"meaningful", meaningful},
              {"meip", detail::estimate_to_json(m)},
              {"baseline", detail::estimate_to_json(wilson_interval(hits, plans.size()))},
              {"baseline_first_a2", static_cast<double>(via_b1) / static_cast<double>(plans.size())}};
    if (!meaningful) {
      r["note"] = "slip probability too high: neither agent can separate the routes";
      rep["flags"].push_back("p=" + pj.dump() + " not meaningful");
    }
    results.push_back(r);
  }
  rep["results"] = results;
  rep["model"] = model_to_json(meip.model);
  rep["baseline_model"] = model_to_json(base.model);
  return rep;
}

inline json run_ritual(const json& overrides = nullptr) {
  const json cfg = detail::merge_config(default_experiment_config("ritual"), overrides, "ritual");
  json rep = detail::base_report("ritual", cfg);
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const std::size_t threads = cfg.at("threads").get<std::size_t>();
  const std::size_t conv = cfg.at("convergences").get<std::size_t>();
  LearnerConfig lc = cfg.at("learner").get<LearnerConfig>();
  PlannerConfig pc = cfg.at("planner").get<PlannerConfig>();
  const MaxEntConfig mc = cfg.at("maxent").get<MaxEntConfig>();
  const json seeds = {{"learner", seed + 1}, {"planner", seed}, {"convergences", seed + 1000},
                      {"baseline_samples", seed + 3}};
  rep["seeds"] = seeds;
  lc.seed = seeds["learner"];
  pc.seed = seeds["planner"];

  const std::size_t stages = cfg.at("stages").get<std::size_t>();
  const RitualEnv train(stages, cfg.at("train_inventory").get<std::size_t>(), cfg.at("train_ordered").get<bool>());
  auto demos = detail::load_or(cfg, [&] { return ritual_demos(train); });
  auto concepts = detail::parse_concepts(cfg.at("concepts"), train.schema());
  const auto targets = cfg.at("targets").get<std::vector<double>>();
  if (targets.size() != concepts.size()) throw ConfigError("ritual needs one target per concept");
  auto init = make_ranking_model(train.schema(), concepts, demos, cfg.at("bins").get<std::size_t>());
  const auto meip = meip_train(demos, train, init, lc, pc);
  const auto base = maxent_irl_train(demos, train, init, mc);
  rep["training"] = {{"meip", detail::training_to_json(meip)}, {"baseline", detail::maxent_to_json(base)}};
  if (!meip.converged) rep["flags"].push_back("meip did not converge");
  if (!base.converged) rep["flags"].push_back("baseline did not converge");

  std::vector<ConceptTarget> ts;
  for (std::size_t i = 0; i < concepts.size(); ++i) ts.push_back({concepts[i], targets[i]});
  OrderExtractor order = [](const Plan& p) { return RitualEnv::stage_order(p.states); };
  json results = json::array();
  for (const auto& inv : cfg.at("test_inventories")) {
    const RitualEnv test(stages, inv.get<std::size_t>(), false);
    std::vector<Plan> greedy(conv);
    parallel_for(conv, threads, [&](std::size_t k) {
      PlannerConfig kc = pc;
      kc.seed = task_seed(seeds["convergences"], k);
      auto tree = mcts_converge(test, meip.model, kc);
      std::mt19937_64 rng(kc.seed);
      greedy[k] = execute_greedy(tree, rng);
    });
    auto base_plans =
        maxent_sample_plans(test, base.model, cfg.at("baseline_samples").get<std::size_t>(), seeds["baseline_samples"],
                            mc.node_cap);
    json series = json::array();
    for (const auto& p : greedy) series.push_back({{"actions", p.actions}, {"tau", order_tau(order(p))}});
    results.push_back({{"inventory", inv},
                       {"meip", detail::matching_to_json(eval_matching(greedy, ts, test.schema(), order, conv))},
                       {"baseline", detail::matching_to_json(eval_matching(base_plans, ts, test.schema(), order, 0))},
                       {"meip_plans", series}});
  }
  rep["results"] = results;
  rep["model"] = model_to_json(meip.model);
  rep["baseline_model"] = model_to_json(base.model);
  return rep;
}

namespace detail {

/// Fold environment of a demo's world, narrowed around `exemplars`.
inline std::unique_ptr<Environment> fold_env_for(json descriptor, const std::vector<fold::FoldAction>& exemplars,
                                                 std::size_t folds) {
  json labels = json::array();
  for (const auto& a : exemplars) labels.push_back(a.label());
  descriptor["exemplars"] = labels;
  descriptor["folds"] = folds;
  return make_environment(descriptor);
}

}  // namespace detail

inline json run_folding(const json& overrides = nullptr) {
  const json cfg = detail::merge_config(default_experiment_config("folding"), overrides, "folding");
  json rep = detail::base_report("folding", cfg);
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const std::size_t threads = cfg.at("threads").get<std::size_t>();
  const std::size_t folds = cfg.at("folds").get<std::size_t>();
  LearnerConfig lc = cfg.at("learner").get<LearnerConfig>();
  PlannerConfig pc = cfg.at("planner").get<PlannerConfig>();
  const MaxEntConfig mc = cfg.at("maxent").get<MaxEntConfig>();
  const json seeds = {{"learner", seed}, {"planner", seed}, {"greedy", seed + 100}};
  rep["seeds"] = seeds;
  lc.seed = seeds["learner"];
  pc.seed = seeds["planner"];

  std::vector<DemoRecord> records = cfg.at("demos").is_null() ? scripted_fold_records()
                                                                : read_demos(cfg.at("demos").get<std::string>());
  // group by problem in file order; the last `heldout_per_problem` of each are held out
  std::vector<std::string> problems;
  std::map<std::string, std::vector<const DemoRecord*>> by_problem;
  for (const auto& r : records) {
    if (r.environment.value("kind", "") != "fold") throw ConfigError("folding demo '" + r.problem_id + "' is not a fold record");
    if (!by_problem.count(r.problem_id)) problems.push_back(r.problem_id);
    by_problem[r.problem_id].push_back(&r);
  }
  const std::size_t held_n = cfg.at("heldout_per_problem").get<std::size_t>();
  std::vector<Plan> all, train, held;
  for (const auto& r : records) all.push_back(r.plan);
  const auto exemplars = fold::exemplars_of(all);

  std::vector<std::unique_ptr<Environment>> envs;
  std::vector<TrainingProblem> tps;
  std::vector<MaxEntProblem> mps;
  for (const auto& id : problems) {
    const auto& rs = by_problem[id];
    if (rs.size() <= held_n) throw ConfigError("problem '" + id + "' has too few demos to hold some out");
    envs.push_back(detail::fold_env_for(rs.front()->environment, exemplars, folds));
    std::vector<Plan> ds;
    for (std::size_t i = 0; i < rs.size(); ++i) (i + held_n >= rs.size() ? held : ds).push_back(rs[i]->plan);
    train.insert(train.end(), ds.begin(), ds.end());
    tps.push_back({envs.back().get(), ds});
    mps.push_back({envs.back().get(), ds});
  }
  auto concepts = detail::parse_concepts(cfg.at("concepts"), fold::fold_schema());
  auto init = make_ranking_model(fold::fold_schema(), concepts, train, cfg.at("bins").get<std::size_t>());
  const auto meip = meip_train(tps, init, lc, pc);
  rep["training"] = {{"meip", detail::training_to_json(meip)}};
  if (!meip.converged) rep["flags"].push_back("meip did not converge");
  rep["exemplars"] = exemplars.size();

  auto plan_report = [&](const RankingModel& m, const Plan& p) {
    auto g = detail::g_along(m, p);
    return json{{"problem_id", p.problem_id()}, {"actions", p.actions}, {"g", g},
                {"strictly_increasing", detail::strictly_increasing(g)}};
  };
  json heldj = json::array();
  for (const auto& p : held) heldj.push_back(plan_report(meip.model, p));
  json meipj = {{"train_tau", kendall_tau(meip.model, train)}, {"heldout_tau", kendall_tau(meip.model, held)},
                {"heldout", heldj}};

  const auto fixtures = cfg.at("eval_fixtures").get<std::vector<std::string>>();
  std::vector<std::unique_ptr<Environment>> eval_envs;
  for (const auto& f : fixtures)
    eval_envs.push_back(detail::fold_env_for(normalize_descriptor({{"kind", "fold"}, {"fixture", f}}), exemplars, folds));
  std::vector<Plan> greedy(fixtures.size());
  parallel_for(fixtures.size(), threads, [&](std::size_t k) {
    PlannerConfig gc = pc;
    gc.iterations = cfg.at("greedy_iterations").get<std::size_t>();
    gc.seed = task_seed(seeds["greedy"], k);
    greedy[k] = plan_greedy(*eval_envs[k], meip.model, gc);
  });
  json greedyj = json::array();
  for (const auto& p : greedy) greedyj.push_back(plan_report(meip.model, p));
  meipj["greedy"] = greedyj;
  rep["meip"] = meipj;
  rep["model"] = model_to_json(meip.model);

  if (cfg.at("baseline").get<bool>()) {
    const auto base = maxent_irl_train(mps, init, mc);
    rep["training"]["baseline"] = detail::maxent_to_json(base);
    if (!base.converged) rep["flags"].push_back("baseline did not converge");
    json bh = json::array();
    for (const auto& p : held) bh.push_back(plan_report(base.model, p));
    json bg = json::array();
    for (const auto& e : eval_envs) bg.push_back(plan_report(base.model, maxent_greedy_plan(*e, base.model, mc.node_cap)));
    rep["baseline"] = {{"train_tau", kendall_tau(base.model, train)}, {"heldout_tau", kendall_tau(base.model, held)},
                       {"heldout", bh}, {"greedy", bg}};
    rep["baseline_model"] = model_to_json(base.model);
  }
  return rep;
}

inline json run_experiment(const std::string& name, const json& overrides = nullptr) {
  if (name == "prob-shift") return run_prob_shift(overrides);
  if (name == "ritual") return run_ritual(overrides);
  if (name == "folding") return run_folding(overrides);
  throw ConfigError("unknown experiment '" + name + "' (prob-shift, ritual, folding)");
}

}  // namespace meip
