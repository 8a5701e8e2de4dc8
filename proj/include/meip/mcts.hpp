#pragma once

// Monte Carlo tree search over histories with the plan's Kendall tau under the
// current ranking function as the (non-Markovian) return.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "meip/environment.hpp"
#include "meip/ranking.hpp"

namespace meip {

struct PlannerConfig {
  std::size_t iterations = 3000;
  double exploration = 1.0;
  /// Sampling draws plans with probability proportional to exp(beta * tau).
  double inverse_temperature = 1.0;
  std::size_t samples = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (iterations < 1) throw ConfigError("planner iterations must be at least 1");
    if (!(exploration >= 0.0)) throw ConfigError("UCB exploration coefficient must be non-negative");
    if (!(inverse_temperature >= 0.0)) throw ConfigError("inverse temperature must be non-negative");
  }
};

using Scorer = std::function<double(const State&)>;

/// Memoizes g by state key; scores depend only on fluent values.
inline Scorer make_scorer(const RankingModel& model) {
  auto cache = std::make_shared<std::unordered_map<std::string, double>>();
  return [model, cache](const State& s) {
    auto key = s.key();
    if (auto it = cache->find(key); it != cache->end()) return it->second;
    double g = score_state(model, s);
    cache->emplace(std::move(key), g);
    return g;
  };
}

class SearchTree {
 public:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Edge {
    bool created = false;
    std::vector<Outcome> outcomes;
    std::vector<std::size_t> children;  // parallel to outcomes; kNone until visited
    std::size_t visits = 0;
    double value_sum = 0.0;
    double mean() const { return visits ? value_sum / static_cast<double>(visits) : 0.0; }
  };

  struct Node {
    State state;
    double g = 0.0;
    std::size_t parent = kNone;
    bool failure = false;
    bool listed = false;
    std::vector<std::string> actions;
    std::vector<Edge> edges;  // parallel to actions
    std::size_t visits = 0;
    double value_sum = 0.0;
    double soft_max = -std::numeric_limits<double>::infinity();  // running log-sum-exp of beta * value
    double soft_sum = 0.0;
    bool terminal() const { return failure || (listed && actions.empty()); }
    bool has_edges() const {
      return std::any_of(edges.begin(), edges.end(), [](const Edge& e) { return e.created; });
    }
    double log_mean_exp() const { return soft_max + std::log(soft_sum / static_cast<double>(visits)); }
  };

  SearchTree(const Environment& env, History prefix, Scorer score, PlannerConfig cfg)
      : env_(&env), score_(std::move(score)), cfg_(cfg), rng_(cfg.seed) {
    if (prefix.empty()) throw Error("search needs a non-empty history");
    for (std::size_t i = 0; i + 1 < prefix.size(); ++i) prefix_g_.push_back(score_(prefix[i]));
    Node root;
    root.state = prefix.back();
    root.g = score_(root.state);
    prefix.pop_back();
    prefix_ = std::move(prefix);
    nodes_.push_back(std::move(root));
  }

  const Environment& env() const { return *env_; }
  const PlannerConfig& config() const { return cfg_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  const History& prefix() const { return prefix_; }
  const Scorer& scorer() const { return score_; }

  /// Runs `iterations` select/expand/rollout/backup passes.
  void run(std::size_t iterations) {
    for (std::size_t i = 0; i < iterations; ++i) iterate();
  }

  /// Full history (prefix + tree path) ending at node `n`.
  History history(std::size_t n) const {
    std::vector<std::size_t> chain;
    for (std::size_t i = n; i != kNone; i = nodes_[i].parent) chain.push_back(i);
    History h = prefix_;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) h.push_back(nodes_[*it].state);
    return h;
  }

  /// Soft value log E[exp(beta * tau)] summed over action sequences below `n`.
  double soft_value(std::size_t n) const {
    const Node& node = nodes_[n];
    if (node.terminal() || !node.has_edges()) return node.visits ? node.log_mean_exp() : 0.0;
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> qs;
    for (std::size_t a = 0; a < node.edges.size(); ++a)
      if (node.edges[a].created) {
        qs.push_back(soft_q(n, a));
        m = std::max(m, qs.back());
      }
    double acc = 0.0;
    for (double q : qs) acc += std::exp(q - m);
    return m + std::log(acc);
  }

  /// Soft value of taking action `a` at node `n`, averaging visited outcomes by probability.
  double soft_q(std::size_t n, std::size_t a) const {
    const Edge& e = nodes_[n].edges[a];
    std::vector<std::pair<double, double>> terms;  // (probability, value)
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t o = 0; o < e.outcomes.size(); ++o)
      if (e.children[o] != kNone && nodes_[e.children[o]].visits > 0) {
        double v = soft_value(e.children[o]);
        terms.emplace_back(e.outcomes[o].probability, v);
        m = std::max(m, v);
      }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    double num = 0.0, den = 0.0;
    for (auto [p, v] : terms) {
      num += p * std::exp(v - m);
      den += p;
    }
    return m + std::log(num / den);
  }

  /// Creates (once) the child reached through outcome `o` of action `a` at node `n`.
  std::size_t child(std::size_t n, std::size_t a, std::size_t o) {
    Edge& e = nodes_[n].edges[a];
    if (e.children[o] != kNone) return e.children[o];
    Node c;
    c.state = e.outcomes[o].state;
    c.failure = e.outcomes[o].failure;
    c.g = score_(c.state);
    c.parent = n;
    nodes_.push_back(std::move(c));
    nodes_[n].edges[a].children[o] = nodes_.size() - 1;
    return nodes_.size() - 1;
  }

  void list_actions(std::size_t n) {
    Node& node = nodes_[n];
    if (node.listed) return;
    node.listed = true;
    if (node.failure) return;
    History h = history(n);
    if (h.size() > env_->horizon()) throw EnvironmentError("plan exceeds the environment horizon");
    node.actions = env_->legal_actions(h);
    node.edges.assign(node.actions.size(), Edge{});
  }

  void create_edge(std::size_t n, std::size_t a) {
    list_actions(n);
    Edge& e = nodes_[n].edges[a];
    if (e.created) return;
    History h = history(n);
    e.outcomes = checked_outcomes(*env_, h, nodes_[n].actions[a]);
    e.children.assign(e.outcomes.size(), kNone);
    e.created = true;
  }

  std::size_t sample_outcome(const Edge& e, std::mt19937_64& rng) const {
    if (e.outcomes.size() == 1) return 0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng), acc = 0.0;
    for (std::size_t o = 0; o < e.outcomes.size(); ++o) {
      acc += e.outcomes[o].probability;
      if (x < acc) return o;
    }
    return e.outcomes.size() - 1;
  }

  /// Uniform random continuation of `h` to a terminal history; appends scores to `g`.
  void rollout(History& h, std::vector<double>& g, std::vector<std::string>* actions, std::mt19937_64& rng) const {
    for (;;) {
      auto legal = env_->legal_actions(h);
      if (legal.empty()) return;
      if (h.size() >= env_->horizon()) throw EnvironmentError("plan exceeds the environment horizon");
      std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
      const std::string& a = legal[pick(rng)];
      Outcome o = sample_transition(*env_, h, a, rng);
      if (actions) actions->push_back(a);
      if (o.failure) return;
      g.push_back(score_(o.state));
      h.push_back(std::move(o.state));
    }
  }

  static double tau_of(const std::vector<double>& g) { return g.size() < 2 ? 0.0 : tau_from_scores(g); }

 private:
  void iterate() {
    std::vector<std::size_t> path{0};
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // (node, action)
    std::size_t n = 0;
    for (;;) {
      list_actions(n);
      if (nodes_[n].terminal()) break;
      Node& node = nodes_[n];
      std::vector<std::size_t> untried;
      for (std::size_t a = 0; a < node.edges.size(); ++a)
        if (!node.edges[a].created) untried.push_back(a);
      std::size_t a;
      bool expanded = false;
      if (!untried.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, untried.size() - 1);
        a = untried[pick(rng_)];
        create_edge(n, a);
        expanded = true;
      } else {
        a = select_ucb(n);
      }
      std::size_t o = sample_outcome(nodes_[n].edges[a], rng_);
      bool fresh = nodes_[n].edges[a].children[o] == kNone;
      std::size_t c = child(n, a, o);
      edges.emplace_back(n, a);
      path.push_back(c);
      n = c;
      if (expanded || fresh) break;
    }

    std::vector<double> g = prefix_g_;
    for (std::size_t i : path)
      if (!nodes_[i].failure) g.push_back(nodes_[i].g);
    if (!nodes_[n].terminal()) {
      History h = history(n);
      rollout(h, g, nullptr, rng_);
    }
    const double v = tau_of(g);
    const double bv = cfg_.inverse_temperature * v;
    for (std::size_t i : path) {
      Node& node = nodes_[i];
      ++node.visits;
      node.value_sum += v;
      if (bv > node.soft_max) {
        node.soft_sum = node.soft_sum * std::exp(node.soft_max - bv) + 1.0;
        node.soft_max = bv;
      } else {
        node.soft_sum += std::exp(bv - node.soft_max);
      }
    }
    for (auto [i, a] : edges) {
      ++nodes_[i].edges[a].visits;
      nodes_[i].edges[a].value_sum += v;
    }
  }

  std::size_t select_ucb(std::size_t n) const {
    const Node& node = nodes_[n];
    const double log_n = std::log(static_cast<double>(std::max<std::size_t>(node.visits, 1)));
    std::size_t best = 0;
    double best_u = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < node.edges.size(); ++a) {
      const Edge& e = node.edges[a];
      double u = e.visits == 0 ? std::numeric_limits<double>::infinity()
                               : e.mean() + cfg_.exploration * std::sqrt(log_n / static_cast<double>(e.visits));
      if (u > best_u) {
        best_u = u;
        best = a;
      }
    }
    return best;
  }

  const Environment* env_;
  Scorer score_;
  PlannerConfig cfg_;
  std::mt19937_64 rng_;
  History prefix_;
  std::vector<double> prefix_g_;
  std::vector<Node> nodes_;
};

/// Builds a search tree rooted after `h` (the initial history by default) and
/// runs the configured number of iterations.
inline SearchTree mcts_converge(const Environment& env, const Scorer& score, const PlannerConfig& cfg,
                                History h = {}) {
  cfg.validate();
  if (h.empty()) h = initial_history(env);
  SearchTree tree(env, std::move(h), score, cfg);
  tree.run(cfg.iterations);
  return tree;
}

inline SearchTree mcts_converge(const Environment& env, const RankingModel& model, const PlannerConfig& cfg,
                                History h = {}) {
  return mcts_converge(env, make_scorer(model), cfg, std::move(h));
}

/// Draws complete plans: actions follow the softmax of soft action values,
/// outcomes follow the environment, and uniform rollouts finish plans that
/// leave the tree.
inline std::vector<Plan> sample_plans(SearchTree& tree, std::size_t count, std::uint64_t seed) {
  if (!tree.root().terminal() && !tree.root().has_edges()) throw Error("cannot sample from an unexpanded root");
  std::mt19937_64 rng(seed);
  std::vector<Plan> out;
  for (std::size_t k = 0; k < count; ++k) {
    Plan p;
    p.source = PlanSource::kSampled;
    History h = tree.history(0);
    std::vector<double> unused;
    std::size_t n = 0;
    bool off_tree = false;
    while (!off_tree) {
      const auto& node = tree.nodes()[n];
      if (node.terminal()) break;
      if (!node.has_edges()) {
        off_tree = true;
        break;
      }
      std::vector<std::size_t> idx;
      std::vector<double> q;
      for (std::size_t a = 0; a < node.edges.size(); ++a)
        if (node.edges[a].created) {
          double v = tree.soft_q(n, a);
          if (!std::isfinite(v)) continue;
          idx.push_back(a);
          q.push_back(v);
        }
      if (idx.empty()) {
        off_tree = true;
        break;
      }
      double m = *std::max_element(q.begin(), q.end());
      std::vector<double> w;
      for (double v : q) w.push_back(std::exp(v - m));
      std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
      std::size_t a = idx[pick(rng)];
      std::size_t o = tree.sample_outcome(node.edges[a], rng);
      const Outcome& oc = node.edges[a].outcomes[o];
      p.actions.push_back(node.actions[a]);
      if (oc.failure) break;
      h.push_back(oc.state);
      std::size_t c = node.edges[a].children[o];
      if (c == SearchTree::kNone) {
        off_tree = true;
        break;
      }
      n = c;
    }
    if (off_tree) tree.rollout(h, unused, &p.actions, rng);
    p.states = std::move(h);
    if (p.actions.size() + 1 != p.states.size()) p.actions.resize(p.states.size() - 1);
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<Plan> sample_plans(const Environment& env, const RankingModel& model, const PlannerConfig& cfg) {
  SearchTree tree = mcts_converge(env, model, cfg);
  return sample_plans(tree, cfg.samples, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
}

namespace detail {

/// Greedy action index at node `n`: highest mean value among visited edges,
/// ties to the first legal action.
inline std::size_t greedy_action(const SearchTree& tree, std::size_t n) {
  const auto& node = tree.nodes()[n];
  std::size_t best = SearchTree::kNone;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < node.edges.size(); ++a) {
    const auto& e = node.edges[a];
    if (!e.created || e.visits == 0) continue;
    if (e.mean() > best_v) {
      best_v = e.mean();
      best = a;
    }
  }
  return best;
}

}  // namespace detail

/// Root-to-terminal plan following the greedy action and, at chance nodes, the
/// most probable outcome. Searches again from any node the tree left unexpanded.
inline Plan plan_greedy(const Environment& env, const Scorer& score, const PlannerConfig& cfg, History h = {}) {
  if (h.empty()) h = initial_history(env);
  Plan p;
  p.source = PlanSource::kSampled;
  std::uint64_t seed = cfg.seed;
  while (!env.is_terminal(h)) {
    PlannerConfig c = cfg;
    c.seed = seed++;
    SearchTree tree = mcts_converge(env, score, c, h);
    std::size_t n = 0;
    for (;;) {
      const auto& node = tree.nodes()[n];
      if (node.terminal()) break;
      std::size_t a = detail::greedy_action(tree, n);
      if (a == SearchTree::kNone) break;
      const auto& e = node.edges[a];
      std::size_t o = static_cast<std::size_t>(
          std::max_element(e.outcomes.begin(), e.outcomes.end(),
                           [](const Outcome& x, const Outcome& y) { return x.probability < y.probability; }) -
          e.outcomes.begin());
      p.actions.push_back(node.actions[a]);
      if (e.outcomes[o].failure) {
        p.states = std::move(h);
        return p;
      }
      h.push_back(e.outcomes[o].state);
      if (e.children[o] == SearchTree::kNone) break;
      n = e.children[o];
    }
  }
  p.states = std::move(h);
  return p;
}

inline Plan plan_greedy(const Environment& env, const RankingModel& model, const PlannerConfig& cfg) {
  return plan_greedy(env, make_scorer(model), cfg);
}

/// Executes the greedy policy against the environment's own stochasticity,
/// reusing `tree` while the realized history stays inside it.
template <class Rng>
Plan execute_greedy(const SearchTree& tree, Rng& rng) {
  const Environment& env = tree.env();
  Plan p;
  p.source = PlanSource::kSampled;
  History h = tree.history(0);
  const SearchTree* cur = &tree;
  std::unique_ptr<SearchTree> owned;
  std::size_t n = 0;
  std::uint64_t replans = 0;
  while (!env.is_terminal(h)) {
    std::size_t a = detail::greedy_action(*cur, n);
    if (a == SearchTree::kNone) {
      PlannerConfig c = tree.config();
      c.seed = tree.config().seed + 7919 * ++replans + h.size();
      owned = std::make_unique<SearchTree>(mcts_converge(env, tree.scorer(), c, h));
      cur = owned.get();
      n = 0;
      continue;
    }
    const auto& node = cur->nodes()[n];
    const auto& e = node.edges[a];
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng), acc = 0.0;
    std::size_t o = e.outcomes.size() - 1;
    for (std::size_t k = 0; k < e.outcomes.size(); ++k) {
      acc += e.outcomes[k].probability;
      if (x < acc) {
        o = k;
        break;
      }
    }
    p.actions.push_back(node.actions[a]);
    if (e.outcomes[o].failure) break;
    h.push_back(e.outcomes[o].state);
    if (e.children[o] == SearchTree::kNone) {
      n = 0;
      PlannerConfig c = tree.config();
      c.seed = tree.config().seed + 7919 * ++replans + h.size();
      if (env.is_terminal(h)) break;
      owned = std::make_unique<SearchTree>(mcts_converge(env, tree.scorer(), c, h));
      cur = owned.get();
    } else {
      n = e.children[o];
    }
  }
  p.states = std::move(h);
  return p;
}

}  // namespace meip
