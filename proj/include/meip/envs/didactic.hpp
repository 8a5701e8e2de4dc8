#pragma once

#include <string>
#include <vector>

#include "meip/environment.hpp"

namespace meip {

/// Four-place MDP {S0, S1, b1, g}: a1 reaches S1 with probability 1 - p and
/// slips to b1 otherwise, a2 always goes to b1, and both then move on to g.
class DidacticEnv : public Environment {
 public:
  explicit DidacticEnv(double p) : p_(p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("didactic slip probability must lie in [0, 1]");
    schema_.add({"at", FluentKind::kPredicate, ValueDomain::kBoolean, {"place"}});
    schema_.add({"visited", FluentKind::kPredicate, ValueDomain::kBoolean, {"place"}});
    entities_ = make_entities({{"S0", "place"}, {"S1", "place"}, {"b1", "place"}, {"g", "place"}});
  }

  double slip() const { return p_; }
  const Schema& schema() const override { return schema_; }
  std::string problem_id() const override { return "didactic"; }
  std::size_t horizon() const override { return 3; }

  State initial_state() const override { return at_place(State(problem_id(), entities_), "S0"); }

  std::vector<std::string> legal_actions(const History& h) const override {
    const std::string here = location(h.back());
    if (here == "S0") return {"a1", "a2"};
    if (here == "S1" || here == "b1") return {"go"};
    return {};
  }

  std::vector<Outcome> outcomes(const History& h, const std::string& action) const override {
    const State& s = h.back();
    const std::string here = location(s);
    if (here == "S0" && action == "a1") {
      std::vector<Outcome> out;
      if (p_ < 1.0) out.push_back({at_place(s, "S1"), 1.0 - p_});
      if (p_ > 0.0) out.push_back({at_place(s, "b1"), p_});
      return out;
    }
    if (here == "S0" && action == "a2") return {{at_place(s, "b1"), 1.0}};
    if ((here == "S1" || here == "b1") && action == "go") return {{at_place(s, "g"), 1.0}};
    throw EnvironmentError("illegal action '" + action + "' at " + here);
  }

  static std::string location(const State& s) {
    for (const auto& e : s.entities())
      if (s.value("at", {e.id}) != 0.0) return e.id;
    throw EnvironmentError("didactic state has no location");
  }

  /// Whether a plan realized the demonstrated route S0 -> S1 -> g.
  static bool is_desired(const std::vector<State>& states) {
    if (states.size() != 3) return false;
    return location(states[0]) == "S0" && location(states[1]) == "S1" && location(states[2]) == "g";
  }

 private:
  static State at_place(State s, const std::string& where) {
    for (const auto& e : s.entities()) s.set("at", {e.id}, 0.0);
    s.set("at", {where}, 1.0);
    s.set("visited", {where}, 1.0);
    return s;
  }

  double p_;
  Schema schema_;
  std::shared_ptr<const std::vector<Entity>> entities_;
};

}  // namespace meip
