// meip: learn, plan, pursue, evaluate and run experiments from the shell.
// Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 non-convergence.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "meip/harness/experiments.hpp"
#include "meip/harness/server.hpp"

using namespace meip;

namespace {

constexpr int kOk = 0, kFailure = 1, kConfigError = 2, kNotConverged = 3;

struct Options {
  std::string demos, env, config, out, model, actions, experiment;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
  int port = 8080;
};

json load_config(const Options& o) { return o.config.empty() ? json::object() : read_json_file(o.config); }

void emit(const Options& o, const json& j) {
  if (o.out.empty()) std::cout << j.dump(2) << '\n';
  else write_json_file(o.out, j);
}

template <class T>
T section(const json& cfg, const char* key) {
  return cfg.contains(key) ? cfg.at(key).get<T>() : T{};
}

/// Demos grouped by problem, each with the environment it was recorded in
/// (or --env for all). Fold worlds are narrowed around the demos' own folds.
struct Problems {
  std::vector<std::unique_ptr<Environment>> envs;
  std::vector<TrainingProblem> problems;
  std::vector<Plan> all;
};

Problems load_problems(const Options& o, const json& cfg) {
  if (o.demos.empty()) throw ConfigError("--demos is required");
  auto records = read_demos(o.demos);
  if (records.empty()) throw ConfigError("demo file '" + o.demos + "' holds no demos");
  Problems p;
  for (const auto& r : records) p.all.push_back(r.plan);
  const bool narrow = cfg.value("exemplars_from_demos", true);
  json exemplars = json::array();
  for (const auto& a : fold::exemplars_of([&] {
         std::vector<Plan> folds;
         for (const auto& r : records)
           if (r.environment.value("kind", "") == "fold") folds.push_back(r.plan);
         return folds;
       }()))
    exemplars.push_back(a.label());
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, fresh] = index.try_emplace(r.problem_id, p.problems.size());
    if (fresh) {
      json desc = o.env.empty() ? r.environment : parse_environment_arg(o.env);
      if (desc.empty()) throw ConfigError("demo '" + r.problem_id + "' names no environment; pass --env");
      desc = normalize_descriptor(desc);
      if (desc.at("kind") == "fold" && narrow && !exemplars.empty()) desc["exemplars"] = exemplars;
      p.envs.push_back(make_environment(desc));
      p.problems.push_back({p.envs.back().get(), {}});
    }
    p.problems[it->second].demos.push_back(r.plan);
  }
  return p;
}

RankingModel initial_model(const json& cfg, const Schema& schema, const std::vector<Plan>& demos) {
  if (!cfg.contains("concepts")) throw ConfigError("config needs a 'concepts' list");
  std::vector<Concept> cs;
  for (const auto& t : cfg.at("concepts")) cs.push_back(parse_concept(t.get<std::string>(), schema));
  return make_ranking_model(schema, cs, demos, cfg.value("bins", std::size_t{8}));
}

int cmd_learn(const Options& o) {
  json cfg = load_config(o);
  auto lc = section<LearnerConfig>(cfg, "learner");
  auto pc = section<PlannerConfig>(cfg, "planner");
  if (o.seed) lc.seed = pc.seed = *o.seed;
  auto p = load_problems(o, cfg);
  auto res = meip_train(p.problems, initial_model(cfg, p.problems.front().env->schema(), p.all), lc, pc);
  json out = model_to_json(res.model);
  out["training"] = detail::training_to_json(res);
  out["training"]["demo_tau"] = kendall_tau(res.model, p.all);
  out["config_hash"] = config_hash(cfg);
  emit(o, out);
  if (!res.converged) {
    std::cerr << "meip: learning did not converge in " << lc.max_iterations << " iterations\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_baseline(const Options& o) {
  json cfg = load_config(o);
  auto mc = section<MaxEntConfig>(cfg, "maxent");
  auto p = load_problems(o, cfg);
  std::vector<MaxEntProblem> mps;
  for (const auto& t : p.problems) mps.push_back({t.env, t.demos});
  auto res = maxent_irl_train(mps, initial_model(cfg, p.problems.front().env->schema(), p.all), mc);
  json out = model_to_json(res.model);
  out["training"] = detail::maxent_to_json(res);
  out["config_hash"] = config_hash(cfg);
  emit(o, out);
  if (!res.converged) {
    std::cerr << "meip: maxent did not converge\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_pursue(const Options& o) {
  json cfg = load_config(o);
  auto lc = section<LearnerConfig>(cfg, "learner");
  auto pc = section<PlannerConfig>(cfg, "planner");
  auto qc = section<PursuitConfig>(cfg, "pursuit");
  if (o.seed) lc.seed = pc.seed = qc.seed = *o.seed;
  auto p = load_problems(o, cfg);
  if (p.problems.size() != 1) throw ConfigError("pursue works on the demos of one problem");
  auto res = pursue(p.problems.front().demos, *p.problems.front().env, qc, lc, pc);
  json concepts = json::array(), trace = json::array();
  for (const auto& c : res.concepts) concepts.push_back(print(c));
  for (const auto& s : res.trace)
    trace.push_back({{"concept", s.concept_text}, {"level", s.level}, {"margin", s.margin},
                     {"slot_margin", s.slot_margin}, {"log_prior", s.log_prior}, {"accepted", s.accepted},
                     {"replaced", s.replaced}});
  emit(o, {{"concepts", concepts}, {"trace", trace}, {"model", model_to_json(res.model)},
           {"config_hash", config_hash(cfg)}});
  return kOk;
}

int cmd_plan(const Options& o) {
  if (o.env.empty()) throw ConfigError("--env is required");
  json desc = parse_environment_arg(o.env);
  std::vector<DemoRecord> recs;
  if (!o.actions.empty()) {  // replay given actions into a record
    std::vector<std::string> acts;
    std::stringstream ss(o.actions);
    for (std::string a; std::getline(ss, a, ';');) acts.push_back(a);
    if (desc.at("kind") == "fold") {
      desc["exemplars"] = "none";
      recs.push_back(FoldService::replay_record(desc, acts));
    } else {
      auto env = make_environment(desc);
      Plan p = plan_from_actions(*env, acts);
      recs.push_back({p.problem_id(), desc, std::move(p)});
    }
  } else {
    if (o.model.empty()) throw ConfigError("plan needs --model (or --actions to replay)");
    json cfg = load_config(o);
    auto pc = section<PlannerConfig>(cfg, "planner");
    if (o.seed) pc.seed = *o.seed;
    auto model = model_from_json(read_json_file(o.model));
    auto env = make_environment(desc);
    std::vector<Plan> plans;
    if (o.episodes && *o.episodes > 0) plans = sample_plans(*env, model, [&] {
        PlannerConfig c = pc;
        c.samples = *o.episodes;
        return c;
      }());
    else plans.push_back(plan_greedy(*env, model, pc));
    for (auto& p : plans) recs.push_back({p.problem_id(), desc, std::move(p)});
  }
  if (o.out.empty()) write_demos(std::cout, recs);
  else write_demos(o.out, recs);
  return kOk;
}

int cmd_eval(const Options& o) {
  if (o.model.empty()) throw ConfigError("eval needs --model");
  if (o.demos.empty()) throw ConfigError("eval needs --demos");
  auto model = model_from_json(read_json_file(o.model));
  auto plans = plans_of(read_demos(o.demos));
  json per = json::array();
  for (const auto& p : plans) {
    json g = json::array();
    for (const auto& s : p.states) g.push_back(score_state(model, s));
    per.push_back({{"problem_id", p.problem_id()}, {"actions", p.actions}, {"g", g}, {"tau", kendall_tau(model, {p})}});
  }
  emit(o, {{"tau", kendall_tau(model, plans)}, {"plans", per}});
  return kOk;
}

int cmd_experiment(const Options& o) {
  json cfg = load_config(o);
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.episodes) {
    if (o.experiment == "prob-shift") cfg["episodes"] = *o.episodes;
    else if (o.experiment == "ritual") cfg["baseline_samples"] = *o.episodes;
    else throw ConfigError("--episodes does not apply to the " + o.experiment + " experiment");
  }
  if (!o.demos.empty()) cfg["demos"] = o.demos;
  auto rep = run_experiment(o.experiment, cfg);
  emit(o, rep);
  for (const auto& f : rep.at("flags")) std::cerr << "meip: flag: " << f.get<std::string>() << '\n';
  return kOk;
}

int cmd_serve(const Options& o) {
  json cfg = load_config(o);
  detail::check_keys(cfg, {"demo_store", "model_dir", "max_folds", "replay_folds", "planner"}, "serve config");
  ServiceConfig sc;
  sc.demo_store = cfg.value("demo_store", sc.demo_store);
  sc.model_dir = cfg.value("model_dir", sc.model_dir);
  sc.max_folds = cfg.value("max_folds", sc.max_folds);
  sc.replay_folds = cfg.value("replay_folds", sc.replay_folds);
  sc.planner = section<PlannerConfig>(cfg, "planner");
  if (o.seed) sc.planner.seed = *o.seed;
  FoldService svc(sc);
  httplib::Server http;
  install_routes(http, svc);
  std::cerr << "meip: serving on port " << o.port << '\n';
  if (!http.listen("0.0.0.0", o.port)) throw Error("cannot listen on port " + std::to_string(o.port));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum entropy inverse planning"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    c->add_option("--out", o.out, "output file (stdout when omitted)");
    c->add_option("--seed", o.seed, "master seed");
  };
  auto* learn = app.add_subcommand("learn", "fit a ranking model to demos");
  auto* plan = app.add_subcommand("plan", "plan with a model, or replay --actions into a record");
  auto* pur = app.add_subcommand("pursue", "select concepts for the demos");
  auto* eval = app.add_subcommand("eval", "score demo plans under a model");
  auto* base = app.add_subcommand("baseline-irl", "fit the MaxEnt-IRL baseline");
  auto* exp = app.add_subcommand("run-experiment", "run prob-shift, ritual or folding");
  auto* serve = app.add_subcommand("serve", "start the folding demonstration service");
  for (auto* c : {learn, plan, pur, eval, base, exp, serve}) common(c);
  for (auto* c : {learn, pur, eval, base, exp})
    c->add_option("--demos", o.demos, "demo file (JSON lines)")->check(CLI::ExistingFile);
  for (auto* c : {learn, pur, base, plan})
    c->add_option("--env", o.env, "environment: builtin:NAME or descriptor/scene file");
  for (auto* c : {plan, eval}) c->add_option("--model", o.model, "model file")->check(CLI::ExistingFile);
  plan->add_option("--actions", o.actions, "';'-separated actions to replay");
  plan->add_option("--episodes", o.episodes, "number of sampled plans (greedy plan when omitted)");
  exp->add_option("experiment", o.experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember({"prob-shift", "ritual", "folding"}));
  exp->add_option("--episodes", o.episodes, "evaluation episodes");
  serve->add_option("--port", o.port, "listening port")->check(CLI::Range(1, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  try {
    if (*learn) return cmd_learn(o);
    if (*plan) return cmd_plan(o);
    if (*pur) return cmd_pursue(o);
    if (*eval) return cmd_eval(o);
    if (*base) return cmd_baseline(o);
    if (*exp) return cmd_experiment(o);
    if (*serve) return cmd_serve(o);
  } catch (const ConfigError& e) {
    std::cerr << "meip: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FormatError& e) {
    std::cerr << "meip: format error: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    std::cerr << "meip: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "meip: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
