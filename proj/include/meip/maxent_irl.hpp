#pragma once

// MaxEnt inverse reinforcement learning baseline: Markovian state reward with
// the same piecewise-linear concept basis as the ranking function, fitted by
// matching feature expectations under the causal soft-optimal policy on the
// exact trajectory tree.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "meip/environment.hpp"
#include "meip/ranking.hpp"

namespace meip {

struct MaxEntConfig {
  double l2 = 0.1;  // Gaussian prior weight on theta
  std::size_t max_iterations = 20000;
  double tolerance = 1e-4;  // on the gradient's Euclidean norm
  double initial_step = 0.5;
  std::size_t node_cap = 2000000;

  void validate() const {
    if (!(l2 >= 0.0)) throw ConfigError("maxent l2 weight must be non-negative");
    if (max_iterations < 1) throw ConfigError("maxent needs at least one iteration");
    if (!(tolerance > 0.0)) throw ConfigError("maxent tolerance must be positive");
    if (!(initial_step > 0.0)) throw ConfigError("maxent step must be positive");
  }
};

/// Reward r(s) = theta . basis(f(s)); the reward table is a RankingModel whose
/// parameters are theta.
inline std::vector<double> reward_features(const RankingModel& m, const State& s) {
  return m.basis(m.features(s));
}

/// Soft-optimal policy on an explicit tree: V(n) = log sum_a exp Q(n, a) and
/// Q(n, a) = sum_o P(o) (r(o) + V(o)).
struct SoftPolicy {
  std::vector<double> value;                 // per node
  std::vector<std::vector<double>> q;        // per node, per branch
  std::vector<double> reward;                // per node

  double probability(std::size_t node, std::size_t branch) const {
    return std::exp(q[node][branch] - value[node]);
  }
};

inline SoftPolicy soft_policy(const TrajectoryTree& t, const std::vector<double>& reward) {
  SoftPolicy pol;
  pol.reward = reward;
  pol.value.assign(t.nodes.size(), 0.0);
  pol.q.resize(t.nodes.size());
  // children always follow their parent in node order
  for (std::size_t n = t.nodes.size(); n-- > 0;) {
    const auto& node = t.nodes[n];
    if (node.branches.empty()) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& b : node.branches) {
      double q = 0.0;
      for (auto [p, c] : b.children) q += p * (reward[c] + pol.value[c]);
      pol.q[n].push_back(q);
      mx = std::max(mx, q);
    }
    double acc = 0.0;
    for (double q : pol.q[n]) acc += std::exp(q - mx);
    pol.value[n] = mx + std::log(acc);
  }
  return pol;
}

/// Expected per-feature sums over the states after the root under the policy.
inline std::vector<double> expected_features(const TrajectoryTree& t, const SoftPolicy& pol,
                                             const std::vector<std::vector<double>>& feats) {
  const std::size_t k = feats.empty() ? 0 : feats.front().size();
  std::vector<double> reach(t.nodes.size(), 0.0), mu(k, 0.0);
  reach[0] = 1.0;
  for (std::size_t n = 0; n < t.nodes.size(); ++n) {
    if (reach[n] == 0.0) continue;
    if (n != 0)
      for (std::size_t i = 0; i < k; ++i) mu[i] += reach[n] * feats[n][i];
    const auto& node = t.nodes[n];
    for (std::size_t b = 0; b < node.branches.size(); ++b) {
      double pa = pol.probability(n, b);
      for (auto [p, c] : node.branches[b].children) reach[c] += reach[n] * pa * p;
    }
  }
  return mu;
}

/// Mean per-plan feature sums over the states after the first.
inline std::vector<double> empirical_features(const RankingModel& m, const std::vector<Plan>& demos) {
  if (demos.empty()) throw Error("feature expectation needs at least one demonstration");
  std::vector<double> mu(m.parameter_count(), 0.0);
  for (const auto& d : demos)
    for (std::size_t t = 1; t < d.states.size(); ++t) {
      auto f = reward_features(m, d.states[t]);
      for (std::size_t i = 0; i < f.size(); ++i) mu[i] += f[i];
    }
  for (double& v : mu) v /= static_cast<double>(demos.size());
  return mu;
}

struct MaxEntResult {
  RankingModel model;  // parameters hold theta
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// One environment with its demonstrations.
struct MaxEntProblem {
  const Environment* env = nullptr;
  std::vector<Plan> demos;
};

/// Fits theta starting from `init` (its knots fix the feature map). With
/// several problems the objective is the demo-weighted mean log-likelihood.
inline MaxEntResult maxent_irl_train(const std::vector<MaxEntProblem>& problems, const RankingModel& init,
                                     const MaxEntConfig& cfg = {}) {
  cfg.validate();
  if (init.concepts().empty()) throw Error("maxent needs at least one feature concept");
  if (problems.empty()) throw Error("maxent needs at least one problem");
  std::size_t total = 0;
  for (const auto& p : problems) {
    if (!p.env) throw Error("maxent problem has no environment");
    if (p.demos.empty()) throw Error("maxent needs at least one demonstration per problem");
    for (const auto& d : p.demos) replay_plan(*p.env, d);
    total += p.demos.size();
  }
  MaxEntResult res;
  const std::size_t k = init.parameter_count();
  struct Prepared {
    double weight;
    std::vector<double> mu_d;
    TrajectoryTree tree;
    std::vector<std::vector<double>> feats;
  };
  std::vector<Prepared> prep;
  for (const auto& p : problems) {
    Prepared q{static_cast<double>(p.demos.size()) / static_cast<double>(total), empirical_features(init, p.demos),
               enumerate_tree(*p.env, cfg.node_cap), {}};
    q.feats.reserve(q.tree.nodes.size());
    for (const auto& n : q.tree.nodes) q.feats.push_back(reward_features(init, n.state));
    prep.push_back(std::move(q));
  }

  // objective sum_p w_p (theta.mu_d - log Z) - l2/2 |theta|^2, concave; log Z = V(root)
  auto evaluate = [&](const std::vector<double>& th, std::vector<double>* grad) {
    double obj = 0.0;
    if (grad) grad->assign(k, 0.0);
    for (const auto& q : prep) {
      std::vector<double> r(q.tree.nodes.size(), 0.0);
      for (std::size_t n = 0; n < r.size(); ++n)
        for (std::size_t i = 0; i < k; ++i) r[n] += th[i] * q.feats[n][i];
      auto pol = soft_policy(q.tree, r);
      obj -= q.weight * pol.value[0];
      for (std::size_t i = 0; i < k; ++i) obj += q.weight * th[i] * q.mu_d[i];
      if (grad) {
        auto mu = expected_features(q.tree, pol, q.feats);
        for (std::size_t i = 0; i < k; ++i) (*grad)[i] += q.weight * (q.mu_d[i] - mu[i]);
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      obj -= 0.5 * cfg.l2 * th[i] * th[i];
      if (grad) (*grad)[i] -= cfg.l2 * th[i];
    }
    if (!std::isfinite(obj)) throw NumericalError("maxent objective is not finite");
    return obj;
  };
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };

  std::vector<double> g, th = init.parameters();
  double obj = evaluate(th, &g);
  double step = cfg.initial_step;
  std::vector<double> prev_th, prev_g;
  for (std::size_t it = 0;; ++it) {
    res.iterations = it;
    res.gradient_norm = norm(g);
    if (res.gradient_norm < cfg.tolerance) {
      res.converged = true;
      break;
    }
    if (it == cfg.max_iterations) break;
    if (!prev_th.empty()) {  // Barzilai-Borwein step for an ascent problem
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double s = th[i] - prev_th[i], y = g[i] - prev_g[i];
        ss += s * s;
        sy += s * y;
      }
      if (sy < 0.0) step = std::min(ss / -sy, 1e6);
    }
    std::vector<double> cand(k), cand_g;
    double cand_obj = 0.0;
    const double gg = res.gradient_norm * res.gradient_norm;
    for (int tries = 0;; ++tries) {
      for (std::size_t i = 0; i < k; ++i) cand[i] = th[i] + step * g[i];
      cand_obj = evaluate(cand, &cand_g);
      if (cand_obj >= obj + 1e-4 * step * gg) break;
      step *= 0.5;
      if (tries > 60)
        throw NumericalError("maxent line search failed at iteration " + std::to_string(it) +
                             " (gradient norm " + std::to_string(res.gradient_norm) + ")");
    }
    prev_th = std::move(th);
    prev_g = std::move(g);
    th = cand;
    g = cand_g;
    obj = cand_obj;
  }
  res.model = init.with_parameters(th);
  return res;
}

inline MaxEntResult maxent_irl_train(const std::vector<Plan>& demos, const Environment& env, const RankingModel& init,
                                     const MaxEntConfig& cfg = {}) {
  if (demos.empty()) throw Error("maxent needs at least one demonstration");
  return maxent_irl_train(std::vector<MaxEntProblem>{{&env, demos}}, init, cfg);
}

/// Samples `count` plans from the soft-optimal policy of `model` in `env`.
inline std::vector<Plan> maxent_sample_plans(const Environment& env, const RankingModel& model, std::size_t count,
                                             std::uint64_t seed, std::size_t node_cap = 2000000) {
  const auto tree = enumerate_tree(env, node_cap);
  std::vector<double> r;
  r.reserve(tree.nodes.size());
  for (const auto& n : tree.nodes) r.push_back(score_state(model, n.state));
  const auto pol = soft_policy(tree, r);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Plan> out;
  for (std::size_t j = 0; j < count; ++j) {
    Plan p;
    p.source = PlanSource::kSampled;
    std::size_t n = 0;
    p.states.push_back(tree.nodes[0].state);
    while (!tree.nodes[n].branches.empty()) {
      const auto& node = tree.nodes[n];
      double x = u(rng), acc = 0.0;
      std::size_t b = node.branches.size() - 1;
      for (std::size_t i = 0; i < node.branches.size(); ++i) {
        acc += pol.probability(n, i);
        if (x < acc) {
          b = i;
          break;
        }
      }
      x = u(rng);
      acc = 0.0;
      const auto& kids = node.branches[b].children;
      std::size_t c = kids.back().second;
      for (auto [prob, idx] : kids) {
        acc += prob;
        if (x < acc) {
          c = idx;
          break;
        }
      }
      p.actions.push_back(node.branches[b].action);
      p.states.push_back(tree.nodes[c].state);
      n = c;
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// Most probable plan under the soft-optimal policy: the best branch at each
/// node, then its most likely outcome.
inline Plan maxent_greedy_plan(const Environment& env, const RankingModel& model, std::size_t node_cap = 2000000) {
  const auto tree = enumerate_tree(env, node_cap);
  std::vector<double> r;
  r.reserve(tree.nodes.size());
  for (const auto& n : tree.nodes) r.push_back(score_state(model, n.state));
  const auto pol = soft_policy(tree, r);
  Plan p;
  p.source = PlanSource::kSampled;
  std::size_t n = 0;
  p.states.push_back(tree.nodes[0].state);
  while (!tree.nodes[n].branches.empty()) {
    const auto& node = tree.nodes[n];
    std::size_t b = 0;
    for (std::size_t i = 1; i < node.branches.size(); ++i)
      if (pol.q[n][i] > pol.q[n][b]) b = i;
    const auto& kids = node.branches[b].children;
    std::size_t c = kids.front().second;
    double best = kids.front().first;
    for (auto [prob, idx] : kids)
      if (prob > best) best = prob, c = idx;
    p.actions.push_back(node.branches[b].action);
    p.states.push_back(tree.nodes[c].state);
    n = c;
  }
  return p;
}

}  // namespace meip
