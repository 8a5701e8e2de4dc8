#pragma once

#include <string>
#include <vector>

#include "meip/environment.hpp"

namespace meip {

/// Two consecutive binary choices with deterministic transitions: exactly four
/// trajectories. The fluent mark(level, choice) records each decision.
class ForkEnv : public Environment {
 public:
  ForkEnv() {
    schema_.add({"mark", FluentKind::kPredicate, ValueDomain::kBoolean, {"level", "choice"}});
    entities_ = make_entities({{"L1", "level"}, {"L2", "level"}, {"left", "choice"}, {"right", "choice"}});
  }

  const Schema& schema() const override { return schema_; }
  std::string problem_id() const override { return "fork"; }
  std::size_t horizon() const override { return 3; }
  State initial_state() const override { return State(problem_id(), entities_); }

  std::vector<std::string> legal_actions(const History& h) const override {
    if (h.size() >= 3) return {};
    return {"left", "right"};
  }

  std::vector<Outcome> outcomes(const History& h, const std::string& action) const override {
    if (h.size() >= 3 || (action != "left" && action != "right"))
      throw EnvironmentError("illegal fork action '" + action + "'");
    State s = h.back();
    s.set("mark", {h.size() == 1 ? "L1" : "L2", action}, 1.0);
    return {{s, 1.0}};
  }

 private:
  Schema schema_;
  std::shared_ptr<const std::vector<Entity>> entities_;
};

}  // namespace meip
