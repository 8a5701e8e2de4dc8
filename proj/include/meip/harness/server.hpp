#pragma once

// Folding demonstration service. Sessions hold one cloth and the folds made
// so far; committing appends a DemoRecord to the demo store. Bodies are JSON.
//
//   POST /session                 {"fixture": "shirt"} | {"scene": {...}}, optional "max_folds"
//                                 -> {"id", ...state}
//   GET  /session/{id}/state      -> {"id", "step", "actions", "scene"}
//   POST /session/{id}/fold       {"x", "y", "r", "theta"} -> state, 409 if illegal
//   POST /session/{id}/commit     -> {"problem_id", "states", "actions", "record"}
//   GET  /session/{id}/replay?model=ID -> {"model", "steps": [{"action", "g", "scene"}]}
//
// Errors are {"error": message} with 400 (bad request), 404 (unknown session
// or model) or 409 (illegal fold, nothing to commit).

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <regex>

#include <httplib.h>

#include "meip/harness/environments.hpp"

namespace meip {

struct ServiceConfig {
  std::string demo_store = "demos.jsonl";
  std::string model_dir;  // models are <model_dir>/<ID>.json
  std::size_t max_folds = 8;
  PlannerConfig planner;  // for replay
  std::size_t replay_folds = 3;
};

class FoldService {
 public:
  struct Reply {
    int status = 200;
    json body;
  };

  explicit FoldService(ServiceConfig cfg) : cfg_(std::move(cfg)) {}

  void register_model(const std::string& id, RankingModel m) {
    std::lock_guard<std::mutex> lock(mu_);
    models_.insert_or_assign(id, std::make_shared<const RankingModel>(std::move(m)));
  }

  Reply create(const json& req) {
    try {
      if (!req.is_object()) return error(400, "request body must be an object");
      detail::check_keys(req, {"fixture", "scene", "max_folds"}, "session request");
      json desc = {{"kind", "fold"}, {"exemplars", "none"}};
      if (req.contains("fixture")) desc["fixture"] = req.at("fixture");
      if (req.contains("scene")) desc["scene"] = req.at("scene");
      desc["folds"] = detail::get_or(req, "max_folds", cfg_.max_folds);
      desc = normalize_descriptor(desc);
      auto s = std::make_shared<Session>();
      s->descriptor = desc;
      s->env = make_environment(desc);
      s->history = initial_history(*s->env);
      std::string id;
      {
        std::lock_guard<std::mutex> lock(mu_);
        id = "s" + std::to_string(++counter_);
        sessions_[id] = s;
      }
      std::lock_guard<std::mutex> lock(s->mu);
      json out = state_of(*s);
      out["id"] = id;
      return {200, out};
    } catch (const Error& e) {
      return error(400, e.what());
    } catch (const json::exception& e) {
      return error(400, e.what());
    }
  }

  Reply state(const std::string& id) {
    auto s = find(id);
    if (!s) return error(404, "unknown session '" + id + "'");
    std::lock_guard<std::mutex> lock(s->mu);
    json out = state_of(*s);
    out["id"] = id;
    return {200, out};
  }

  Reply fold(const std::string& id, const json& req) {
    auto s = find(id);
    if (!s) return error(404, "unknown session '" + id + "'");
    fold::FoldAction a;
    try {
      detail::check_keys(req, {"x", "y", "r", "theta"}, "fold request");
      a = {req.at("x").get<int>(), req.at("y").get<int>(), req.at("r").get<int>(), req.at("theta").get<int>()};
    } catch (const std::exception& e) {
      return error(400, e.what());
    }
    std::lock_guard<std::mutex> lock(s->mu);
    if (s->history.size() > s->descriptor.at("folds").get<std::size_t>())
      return error(409, "fold budget of this session is used up");
    const auto& env = static_cast<const fold::FoldEnv&>(*s->env);
    std::optional<fold::FoldAction> c;
    try {
      c = fold::canonical_action(fold::scene_of(s->history.back()), a, env.discretization());
    } catch (const GeometryError& e) {
      return error(409, e.what());
    }
    if (!c) return error(409, "fold " + a.label() + " does not split the cloth");
    s->history.push_back(checked_outcomes(env, s->history, c->label()).front().state);
    s->actions.push_back(c->label());
    json out = state_of(*s);
    out["id"] = id;
    return {200, out};
  }

  Reply commit(const std::string& id) {
    auto s = find(id);
    if (!s) return error(404, "unknown session '" + id + "'");
    std::lock_guard<std::mutex> lock(s->mu);
    if (s->actions.empty()) return error(409, "no folds to commit");
    DemoRecord rec = replay_record(s->descriptor, s->actions);
    {
      std::lock_guard<std::mutex> store(store_mu_);
      append_demo(cfg_.demo_store, rec);
    }
    return {200, {{"problem_id", rec.problem_id}, {"states", rec.plan.states.size()}, {"actions", rec.plan.actions},
                  {"record", demo_to_json(rec)}}};
  }

  Reply replay(const std::string& id, const std::string& model_id) {
    auto s = find(id);
    if (!s) return error(404, "unknown session '" + id + "'");
    auto m = model(model_id);
    if (!m) return error(404, "unknown model '" + model_id + "'");
    json desc;
    {
      std::lock_guard<std::mutex> lock(s->mu);
      desc = s->descriptor;
    }
    try {
      desc["folds"] = cfg_.replay_folds;
      desc["exemplars"] = "scripted";
      auto env = make_environment(desc);
      Plan p = plan_greedy(*env, *m, cfg_.planner);
      json steps = json::array();
      for (std::size_t t = 0; t < p.states.size(); ++t)
        steps.push_back({{"step", t},
                         {"action", t == 0 ? json(nullptr) : json(p.actions[t - 1])},
                         {"g", score_state(*m, p.states[t])},
                         {"scene", fold::scene_to_json(fold::scene_of(p.states[t]))}});
      return {200, {{"model", model_id}, {"steps", steps}}};
    } catch (const Error& e) {
      return error(400, e.what());
    }
  }

  /// The record the CLI produces for the same environment and actions.
  static DemoRecord replay_record(const json& descriptor, const std::vector<std::string>& actions) {
    json desc = normalize_descriptor(descriptor);
    desc["folds"] = actions.size();
    auto env = make_environment(desc);
    Plan p = plan_from_actions(*env, actions);
    return {p.problem_id(), desc, std::move(p)};
  }

 private:
  struct Session {
    std::mutex mu;  // one writer per session
    json descriptor;
    std::unique_ptr<Environment> env;
    History history;
    std::vector<std::string> actions;
  };

  static Reply error(int status, const std::string& msg) { return {status, {{"error", msg}}}; }

  static json state_of(const Session& s) {
    return {{"step", s.history.size() - 1},
            {"actions", s.actions},
            {"max_folds", s.descriptor.at("folds")},
            {"scene", fold::scene_to_json(fold::scene_of(s.history.back()))}};
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::shared_ptr<const RankingModel> model(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = models_.find(id); it != models_.end()) return it->second;
    if (cfg_.model_dir.empty() || !std::regex_match(id, std::regex("[A-Za-z0-9_-]+"))) return nullptr;
    const auto path = std::filesystem::path(cfg_.model_dir) / (id + ".json");
    if (!std::filesystem::exists(path)) return nullptr;
    auto m = std::make_shared<const RankingModel>(model_from_json(read_json_file(path.string())));
    models_[id] = m;
    return m;
  }

  ServiceConfig cfg_;
  std::mutex mu_, store_mu_;
  std::size_t counter_ = 0;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<const RankingModel>> models_;
};

/// Routes of `svc` on an httplib server; the caller listens.
inline void install_routes(httplib::Server& http, FoldService& svc) {
  auto send = [](httplib::Response& res, const FoldService::Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto body = [](const httplib::Request& req) -> std::optional<json> {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::exception&) {
      return std::nullopt;
    }
  };
  auto bad_json = FoldService::Reply{400, {{"error", "request body is not valid JSON"}}};
  http.Post("/session", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    auto b = body(req);
    send(res, b ? svc.create(*b) : bad_json);
  });
  http.Get("/session/:id/state", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.state(req.path_params.at("id")));
  });
  http.Post("/session/:id/fold", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    auto b = body(req);
    send(res, b ? svc.fold(req.path_params.at("id"), *b) : bad_json);
  });
  http.Post("/session/:id/commit", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.commit(req.path_params.at("id")));
  });
  http.Get("/session/:id/replay", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("model")) return send(res, {400, {{"error", "replay needs ?model=ID"}}});
    send(res, svc.replay(req.path_params.at("id"), req.get_param_value("model")));
  });
}

}  // namespace meip
