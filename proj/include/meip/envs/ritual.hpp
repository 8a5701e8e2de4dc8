#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "meip/environment.hpp"

namespace meip {

/// Ritual world: visit every stage once; at each visit pick one object type and a
/// quantity. Action labels are "S<k>:<type>:<qty>", "S<k>:<type>:all" or
/// "S<k>:none". picked(object, stage) marks the objects taken at a stage and
/// visited(stage) the stages already entered.
class RitualEnv : public Environment {
 public:
  RitualEnv(std::size_t stages = 3, std::size_t inventory = 5, bool ordered = false,
            std::vector<std::string> types = {"torch", "bamboo", "clay"})
      : stages_(stages), inventory_(inventory), ordered_(ordered), types_(std::move(types)) {
    if (stages < 1) throw ConfigError("ritual needs at least one stage");
    if (inventory < 1) throw ConfigError("ritual inventory must be at least 1");
    if (types_.empty()) throw ConfigError("ritual needs at least one object type");
    schema_.add({"picked", FluentKind::kPredicate, ValueDomain::kBoolean, {"object", "stage"}});
    schema_.add({"visited", FluentKind::kPredicate, ValueDomain::kBoolean, {"stage"}});
    std::vector<Entity> es;
    for (std::size_t k = 1; k <= stages; ++k) es.push_back({stage_id(k), "stage"});
    for (const auto& t : types_)
      for (std::size_t i = 0; i < inventory; ++i) es.push_back({object_id(t, i), "object." + t});
    entities_ = make_entities(std::move(es));
  }

  std::size_t stages() const { return stages_; }
  std::size_t inventory() const { return inventory_; }
  bool ordered() const { return ordered_; }
  const std::vector<std::string>& types() const { return types_; }

  const Schema& schema() const override { return schema_; }
  std::string problem_id() const override {
    return "ritual-" + std::to_string(stages_) + "x" + std::to_string(inventory_) + (ordered_ ? "-ordered" : "");
  }
  std::size_t horizon() const override { return stages_ + 1; }
  State initial_state() const override { return State(problem_id(), entities_); }

  static std::string stage_id(std::size_t k) { return "S" + std::to_string(k); }
  static std::string object_id(const std::string& type, std::size_t i) { return type + std::to_string(i); }

  std::vector<std::string> legal_actions(const History& h) const override {
    std::vector<std::string> out;
    const State& s = h.back();
    for (std::size_t k = 1; k <= stages_; ++k) {
      if (s.value("visited", {stage_id(k)}) != 0.0) continue;
      const std::string st = stage_id(k);
      out.push_back(st + ":none");
      for (const auto& t : types_) {
        for (std::size_t q = 1; q < inventory_; ++q) out.push_back(st + ":" + t + ":" + std::to_string(q));
        out.push_back(st + ":" + t + ":all");
      }
      if (ordered_) break;
    }
    return out;
  }

  std::vector<Outcome> outcomes(const History& h, const std::string& action) const override {
    auto legal = legal_actions(h);
    if (std::find(legal.begin(), legal.end(), action) == legal.end())
      throw EnvironmentError("illegal ritual action '" + action + "'");
    State s = h.back();
    auto first = action.find(':');
    const std::string st = action.substr(0, first);
    s.set("visited", {st}, 1.0);
    if (action.compare(first + 1, std::string::npos, "none") != 0) {
      auto second = action.find(':', first + 1);
      const std::string type = action.substr(first + 1, second - first - 1);
      const std::string qty = action.substr(second + 1);
      const std::size_t n = qty == "all" ? inventory_ : std::stoul(qty);
      for (std::size_t i = 0; i < n; ++i) s.set("picked", {object_id(type, i), st}, 1.0);
    }
    return {{s, 1.0}};
  }

  /// Order in which stages were entered along a plan, as 1-based stage numbers.
  static std::vector<int> stage_order(const std::vector<State>& states) {
    std::vector<int> order;
    for (std::size_t i = 1; i < states.size(); ++i)
      for (const auto& e : states[i].entities())
        if (e.cls == "stage" && states[i].value("visited", {e.id}) != 0.0 &&
            states[i - 1].value("visited", {e.id}) == 0.0)
          order.push_back(std::stoi(e.id.substr(1)));
    return order;
  }

 private:
  std::size_t stages_;
  std::size_t inventory_;
  bool ordered_;
  std::vector<std::string> types_;
  Schema schema_;
  std::shared_ptr<const std::vector<Entity>> entities_;
};

}  // namespace meip
