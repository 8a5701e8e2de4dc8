#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "meip/error.hpp"
#include "meip/state.hpp"

namespace meip {

/// States visited so far, oldest first. Transitions may depend on all of it.
using History = std::vector<State>;

struct Outcome {
  State state;
  double probability = 1.0;
  bool failure = false;  // absorbing: the episode ends here without further reward
};

/// A planning problem: fluent schema, initial state, legal actions and exact
/// transition probabilities over histories.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const Schema& schema() const = 0;
  virtual std::string problem_id() const = 0;
  virtual State initial_state() const = 0;
  /// Legal actions after `h`; empty exactly when `h` is terminal.
  virtual std::vector<std::string> legal_actions(const History& h) const = 0;
  /// Successor distribution of `action` after `h`; probabilities sum to 1.
  virtual std::vector<Outcome> outcomes(const History& h, const std::string& action) const = 0;
  /// Upper bound on plan length in states.
  virtual std::size_t horizon() const = 0;

  bool is_terminal(const History& h) const { return legal_actions(h).empty(); }
};

/// Outcome distribution with time indices filled in and probabilities checked.
inline std::vector<Outcome> checked_outcomes(const Environment& env, const History& h, const std::string& action) {
  auto outs = env.outcomes(h, action);
  if (outs.empty()) throw EnvironmentError("action '" + action + "' has no outcomes");
  double total = 0.0;
  for (auto& o : outs) {
    if (o.probability < 0.0) throw EnvironmentError("negative transition probability");
    total += o.probability;
    o.state.set_time_index(h.size());
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw EnvironmentError("transition probabilities of '" + action + "' sum to " + std::to_string(total));
  return outs;
}

/// Samples a successor of `action` after `h`.
template <class Rng>
Outcome sample_transition(const Environment& env, const History& h, const std::string& action, Rng& rng) {
  auto outs = checked_outcomes(env, h, action);
  if (outs.size() == 1) return std::move(outs.front());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng), acc = 0.0;
  for (auto& o : outs) {
    acc += o.probability;
    if (x < acc) return std::move(o);
  }
  return std::move(outs.back());
}

inline History initial_history(const Environment& env) {
  State s = env.initial_state();
  s.set_time_index(0);
  if (s.problem_id().empty()) s.set_problem_id(env.problem_id());
  return {s};
}

/// Checks that a recorded plan is a legal trajectory of `env`: same initial
/// state, legal actions, and every successor reachable with positive probability.
inline void replay_plan(const Environment& env, const Plan& plan) {
  plan.validate();
  History h = initial_history(env);
  if (h.front().key() != plan.states.front().key()) throw EnvironmentError("plan does not start at the initial state");
  for (std::size_t i = 0; i + 1 < plan.states.size(); ++i) {
    const std::string& a = i < plan.actions.size() ? plan.actions[i] : std::string();
    std::vector<std::string> actions = a.empty() ? env.legal_actions(h) : std::vector<std::string>{a};
    if (!a.empty()) {
      auto legal = env.legal_actions(h);
      if (std::find(legal.begin(), legal.end(), a) == legal.end())
        throw EnvironmentError("illegal action '" + a + "' at step " + std::to_string(i));
    }
    bool found = false;
    for (const auto& act : actions) {
      for (auto& o : checked_outcomes(env, h, act))
        if (o.probability > 0.0 && o.state.key() == plan.states[i + 1].key()) {
          h.push_back(o.state);
          found = true;
          break;
        }
      if (found) break;
    }
    if (!found) throw EnvironmentError("state " + std::to_string(i + 1) + " is unreachable");
  }
}

/// Builds a plan by applying `actions` from the initial state; every action
/// must have a single outcome.
inline Plan plan_from_actions(const Environment& env, const std::vector<std::string>& actions,
                              PlanSource source = PlanSource::kDemonstration) {
  Plan p;
  p.source = source;
  History h = initial_history(env);
  for (const auto& a : actions) {
    auto legal = env.legal_actions(h);
    if (std::find(legal.begin(), legal.end(), a) == legal.end())
      throw EnvironmentError("illegal action '" + a + "' at step " + std::to_string(h.size() - 1));
    auto outs = checked_outcomes(env, h, a);
    if (outs.size() != 1) throw EnvironmentError("action '" + a + "' is stochastic; give the states explicitly");
    h.push_back(outs.front().state);
  }
  p.states = std::move(h);
  p.actions = actions;
  return p;
}

/// Explicit trajectory tree for small environments.
struct TreeNode {
  State state;
  bool failure = false;
  struct Branch {
    std::string action;
    std::vector<std::pair<double, std::size_t>> children;  // (probability, node index)
  };
  std::vector<Branch> branches;  // empty at leaves
};

struct TrajectoryTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<std::size_t> parent;
};

inline TrajectoryTree enumerate_tree(const Environment& env, std::size_t node_cap = 2000000) {
  TrajectoryTree t;
  History h = initial_history(env);
  t.nodes.push_back({h.front(), false, {}});
  t.parent.push_back(0);
  std::function<void(std::size_t, History&)> grow = [&](std::size_t idx, History& hist) {
    if (t.nodes[idx].failure) return;
    if (hist.size() > env.horizon()) throw EnvironmentError("trajectory exceeds the environment horizon");
    for (const auto& a : env.legal_actions(hist)) {
      TreeNode::Branch b{a, {}};
      for (auto& o : checked_outcomes(env, hist, a)) {
        if (o.probability <= 0.0) continue;
        if (t.nodes.size() >= node_cap) throw CapacityError("trajectory tree exceeds its node cap");
        t.nodes.push_back({o.state, o.failure, {}});
        t.parent.push_back(idx);
        b.children.emplace_back(o.probability, t.nodes.size() - 1);
      }
      t.nodes[idx].branches.push_back(std::move(b));
    }
    for (std::size_t bi = 0; bi < t.nodes[idx].branches.size(); ++bi)
      for (std::size_t ci = 0; ci < t.nodes[idx].branches[bi].children.size(); ++ci) {
        std::size_t child = t.nodes[idx].branches[bi].children[ci].second;
        hist.push_back(t.nodes[child].state);
        grow(child, hist);
        hist.pop_back();
      }
  };
  grow(0, h);
  return t;
}

/// States from the root down to `leaf`.
inline std::vector<State> tree_path(const TrajectoryTree& t, std::size_t leaf) {
  std::vector<State> out;
  for (std::size_t i = leaf;; i = t.parent[i]) {
    out.push_back(t.nodes[i].state);
    if (i == 0) break;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace meip
