#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "meip/concept_eval.hpp"
#include "meip/environment.hpp"
#include "meip/harness/parallel.hpp"

namespace meip {

struct ProbabilityEstimate {
  double p = 0.0;
  double lo = 0.0;  // Wilson 95% interval
  double hi = 0.0;
  std::size_t hits = 0;
  std::size_t episodes = 0;
};

inline ProbabilityEstimate wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054) {
  if (n == 0) throw Error("wilson interval needs at least one trial");
  if (hits > n) throw Error("more hits than trials");
  ProbabilityEstimate e;
  e.hits = hits;
  e.episodes = n;
  const double nn = static_cast<double>(n);
  e.p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double centre = (e.p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z * std::sqrt(e.p * (1.0 - e.p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
  e.lo = std::max(0.0, centre - half);
  e.hi = std::min(1.0, centre + half);
  return e;
}

/// One stochastic episode under an agent's policy.
using EpisodeRunner = std::function<Plan(std::mt19937_64&)>;
using PlanPredicate = std::function<bool(const Plan&)>;

/// Monte Carlo frequency of plans satisfying `desired` over `episodes` runs.
/// Episode i draws from its own stream task_seed(seed, i), so the result does
/// not depend on `threads`.
inline ProbabilityEstimate eval_desired_sequence(const EpisodeRunner& run, const PlanPredicate& desired,
                                                 std::size_t episodes, std::uint64_t seed, std::size_t threads = 1) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  std::vector<char> hit(episodes, 0);
  parallel_for(episodes, threads, [&](std::size_t i) {
    std::mt19937_64 rng(task_seed(seed, i));
    hit[i] = desired(run(rng)) ? 1 : 0;
  });
  std::size_t hits = 0;
  for (char h : hit) hits += h;
  return wilson_interval(hits, episodes);
}

/// A reference concept and the terminal value that counts as a match.
struct ConceptTarget {
  Concept concept_value;
  double target = 1.0;
};

struct MatchingRate {
  std::string concept_text;
  double rate = 0.0;
};

struct MatchingReport {
  std::vector<MatchingRate> matching;
  double mean_matching = 0.0;
  double tau = 0.0;  // mean ordinal score against the reference ordering
  std::size_t plans = 0;
  std::size_t convergences = 0;
};

/// Kendall tau between a visiting order and the ascending reference 1..n.
/// `order[k]` is the reference rank of the k-th visited item.
inline double order_tau(const std::vector<int>& order) {
  if (order.size() < 2) return 0.0;
  long c = 0, n = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      c += (order[j] > order[i]) - (order[j] < order[i]);
      ++n;
    }
  return static_cast<double>(c) / static_cast<double>(n);
}

using OrderExtractor = std::function<std::vector<int>(const Plan&)>;

/// Terminal-state matching rates of `targets` and the mean ordinal tau.
inline MatchingReport eval_matching(const std::vector<Plan>& plans, const std::vector<ConceptTarget>& targets,
                                    const Schema& schema, const OrderExtractor& order, std::size_t convergences) {
  if (plans.empty()) throw Error("eval_matching needs at least one plan");
  MatchingReport r;
  r.plans = plans.size();
  r.convergences = convergences;
  const double n = static_cast<double>(plans.size());
  for (const auto& t : targets) {
    std::size_t hit = 0;
    for (const auto& p : plans) hit += evaluate_concept(t.concept_value, p.states.back(), schema) == t.target;
    r.matching.push_back({print(t.concept_value), static_cast<double>(hit) / n});
    r.mean_matching += static_cast<double>(hit) / n;
  }
  if (!targets.empty()) r.mean_matching /= static_cast<double>(targets.size());
  if (order) {
    for (const auto& p : plans) r.tau += order_tau(order(p));
    r.tau /= n;
  }
  return r;
}

}  // namespace meip
