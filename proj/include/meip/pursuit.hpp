#pragma once

// Concept pursuit: grow the concept set level by level, greedily adding the
// candidate with the largest gain in demo-versus-sample tau margin.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "meip/concept_enum.hpp"
#include "meip/concept_eval.hpp"
#include "meip/learn.hpp"

namespace meip {

/// Which sampled plans a candidate's tau margin is measured against.
enum class MarginReference {
  kOwnSamples,      // plans sampled from the model trained with the candidate
  kCurrentSamples,  // plans sampled from the model of the current set, shared by all candidates
};

struct PursuitConfig {
  double epsilon = 0.05;
  std::size_t max_level = 1;
  double beta = 1.0;  // prior P(c) ~ exp(-beta * level)
  std::size_t candidate_cap = 100000;
  std::size_t seeds = 3;
  /// Plans sampled from each trained model to estimate its expected tau.
  std::size_t margin_samples = 100;
  /// Drop concepts whose terminal value differs between demos of one problem.
  bool require_consistent = true;
  MarginReference reference = MarginReference::kCurrentSamples;
  EnumerationOptions enumeration;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("pursuit threshold epsilon must be positive");
    if (!(beta >= 0.0)) throw ConfigError("prior decay beta must be non-negative");
    if (max_level < 1) throw ConfigError("pursuit max level must be at least 1");
    if (seeds < 1) throw ConfigError("pursuit needs at least one seed");
    if (margin_samples < 1) throw ConfigError("pursuit needs at least one margin sample");
  }
};

struct PursuitStep {
  std::string concept_text;
  std::size_t level = 0;
  double margin = 0.0;       // gain of this concept over the current set
  double slot_margin = 0.0;  // best gain among its slot-mates
  double log_prior = 0.0;    // -beta * level
  bool accepted = false;
  std::vector<std::string> replaced;
};

struct PursuitResult {
  RankingModel model;
  std::vector<Concept> concepts;
  std::vector<PursuitStep> trace;
};

/// Keeps concepts whose value differs across at least one of the state pairs.
inline std::vector<Concept> filter_constant_concepts(const std::vector<Concept>& candidates,
                                                     const std::vector<PairSample>& pairs, const Schema& schema) {
  if (pairs.empty()) throw Error("filter_constant_concepts needs at least one state pair");
  std::vector<Concept> out;
  for (const auto& c : candidates) {
    bool varies = false;
    for (const auto& p : pairs) {
      if (evaluate_concept(c, p.lo, schema) != evaluate_concept(c, p.hi, schema)) {
        varies = true;
        break;
      }
    }
    if (varies) out.push_back(c);
  }
  return out;
}

namespace detail {

/// Slot-mate preference: lifted, then exact count, then existence.
inline int quantifier_rank(Quantifier q) {
  switch (q) {
    case Quantifier::kForall: return 0;
    case Quantifier::kCount: return 1;
    case Quantifier::kExists: return 2;
    default: return 3;
  }
}

/// True when every demo of a problem ends with the same concept value.
inline bool consistent_on_demos(const Concept& c, const std::vector<Plan>& demos, const Schema& schema) {
  std::map<std::string, double> seen;
  for (const auto& d : demos) {
    double v = evaluate_concept(c, d.states.back(), schema);
    auto [it, fresh] = seen.emplace(d.problem_id(), v);
    if (!fresh && it->second != v) return false;
  }
  return true;
}

/// Demo pairs a concept orders, as indices into `pairs`.
inline std::set<std::size_t> ordered_pairs(const Concept& c, const std::vector<PairSample>& pairs,
                                           const Schema& schema) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (evaluate_concept(c, pairs[i].lo, schema) != evaluate_concept(c, pairs[i].hi, schema)) out.insert(i);
  return out;
}

/// Simpler concepts of `delta` whose source is a conjunct of `c`'s source, with
/// the same quantifier, filters and domain.
inline std::vector<std::size_t> related_simpler(const Concept& c, const std::vector<Concept>& delta) {
  std::vector<std::size_t> out;
  if (c.kind != Concept::Kind::kAtomic || c.source.op != PredOp::kAnd) return out;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const Concept& d = delta[i];
    if (d.kind != Concept::Kind::kAtomic || d.quantifier != c.quantifier || d.filters != c.filters ||
        d.domain != c.domain)
      continue;
    const auto& ops = c.source.operands;
    auto parts = d.source.op == PredOp::kAnd ? d.source.operands : std::vector<PredExpr>{d.source};
    bool inside = std::all_of(parts.begin(), parts.end(), [&](const PredExpr& p) {
      return std::find(ops.begin(), ops.end(), p) != ops.end();
    });
    if (inside && parts.size() < ops.size()) out.push_back(i);
  }
  return out;
}

}  // namespace detail

namespace detail {

inline RankingModel train_on(const std::vector<Plan>& demos, const Environment& env,
                             const std::vector<Concept>& concepts, const LearnerConfig& lcfg,
                             const PlannerConfig& pcfg, std::uint64_t seed) {
  LearnerConfig lc = lcfg;
  lc.seed = seed;
  return meip_train(demos, env, make_ranking_model(env.schema(), concepts, demos), lc, pcfg).model;
}

/// Plans sampled from `model`, or uniformly when there are no concepts yet.
inline std::vector<Plan> sample_from(const Environment& env, const std::optional<RankingModel>& model,
                                     const PlannerConfig& pcfg, std::size_t count, std::uint64_t seed) {
  PlannerConfig pc = pcfg;
  pc.seed = seed ^ 0xa5a5a5a5ULL;
  pc.samples = count;
  if (model) return sample_plans(env, *model, pc);
  pc.iterations = 1;
  auto tree = mcts_converge(env, Scorer([](const State&) { return 0.0; }), pc);
  return sample_plans(tree, count, pc.seed);
}

}  // namespace detail

/// Mean over seeds of (mean demo tau - mean sampled tau) after training on
/// `concepts`. With `reference` given, seed k measures against reference[k]
/// instead of the trained model's own samples.
inline double concept_margin(const std::vector<Plan>& demos, const Environment& env,
                             const std::vector<Concept>& concepts, const LearnerConfig& lcfg,
                             const PlannerConfig& pcfg, std::size_t seeds, std::uint64_t seed,
                             std::size_t samples = 50,
                             const std::vector<std::vector<Plan>>* reference = nullptr) {
  if (concepts.empty()) return 0.0;
  if (reference && reference->size() < seeds) throw Error("one reference batch per seed required");
  double acc = 0.0;
  for (std::size_t k = 0; k < seeds; ++k) {
    const std::uint64_t sk = seed * 7919ULL + k;
    auto model = detail::train_on(demos, env, concepts, lcfg, pcfg, sk);
    auto sampled = reference ? (*reference)[k] : detail::sample_from(env, model, pcfg, samples, sk);
    acc += kendall_tau(model, demos) - kendall_tau(model, sampled);
  }
  return acc / static_cast<double>(seeds);
}

inline PursuitResult pursue(const std::vector<Plan>& demos, const Environment& env, const PursuitConfig& cfg,
                            const LearnerConfig& lcfg, const PlannerConfig& pcfg) {
  cfg.validate();
  if (demos.empty()) throw Error("pursue needs at least one demonstration");
  const Schema& schema = env.schema();
  EnumerationOptions opt = cfg.enumeration;
  opt.cap = cfg.candidate_cap;
  auto enumerated = enumerate_concepts(schema, cfg.max_level, opt);
  auto demo_pairs = build_pairs(demos, {});

  PursuitResult result;
  std::vector<Concept> delta;
  std::set<std::string> used_slots;
  std::uint64_t round = 0;

  for (std::size_t level = 1; level <= cfg.max_level; ++level) {
    std::vector<Concept> pool;
    for (const auto& e : enumerated)
      if (e.complexity.level == level) pool.push_back(e.value);
    pool = filter_constant_concepts(pool, demo_pairs, schema);
    if (cfg.require_consistent)
      std::erase_if(pool, [&](const Concept& c) { return !detail::consistent_on_demos(c, demos, schema); });

    for (;;) {
      const std::uint64_t rseed = cfg.seed * 104729ULL + round++;
      std::vector<std::vector<Plan>> ref;
      const std::vector<std::vector<Plan>>* ref_ptr = nullptr;
      if (cfg.reference == MarginReference::kCurrentSamples) {
        for (std::size_t k = 0; k < cfg.seeds; ++k) {
          const std::uint64_t sk = rseed * 7919ULL + k;
          std::optional<RankingModel> current;
          if (!delta.empty()) current = detail::train_on(demos, env, delta, lcfg, pcfg, sk);
          ref.push_back(detail::sample_from(env, current, pcfg, cfg.margin_samples, sk));
        }
        ref_ptr = &ref;
      }
      const double base =
          concept_margin(demos, env, delta, lcfg, pcfg, cfg.seeds, rseed, cfg.margin_samples, ref_ptr);
      // slot key -> (gain, pool index) of each free slot-mate
      std::map<std::string, std::vector<std::pair<double, std::size_t>>> slots;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto key = complexity(pool[i]).slot_key;
        if (used_slots.count(key)) continue;
        auto trial = delta;
        trial.push_back(pool[i]);
        double m;
        try {
          m = concept_margin(demos, env, trial, lcfg, pcfg, cfg.seeds, rseed, cfg.margin_samples, ref_ptr);
        } catch (const Error& e) {
          throw Error("while evaluating candidate '" + print(pool[i]) + "': " + e.what());
        }
        slots[key].emplace_back(m - base, i);
      }
      if (slots.empty()) break;

      const std::vector<std::pair<double, std::size_t>>* best = nullptr;
      double best_gain = -1e300;
      for (const auto& [key, mates] : slots) {
        double g = -1e300;
        for (auto [m, i] : mates) g = std::max(g, m);
        if (g > best_gain) {
          best_gain = g;
          best = &mates;
        }
      }
      auto rep = *std::min_element(best->begin(), best->end(), [&](const auto& a, const auto& b) {
        return detail::quantifier_rank(pool[a.second].quantifier) < detail::quantifier_rank(pool[b.second].quantifier);
      });
      const Concept chosen = pool[rep.second];
      PursuitStep step;
      step.concept_text = print(chosen);
      step.level = level;
      step.margin = rep.first;
      step.slot_margin = best_gain;
      step.log_prior = -cfg.beta * static_cast<double>(level);
      if (!(best_gain > cfg.epsilon)) {
        result.trace.push_back(step);
        break;
      }
      step.accepted = true;
      const auto mine = detail::ordered_pairs(chosen, demo_pairs, schema);
      for (std::size_t r : detail::related_simpler(chosen, delta)) {
        auto theirs = detail::ordered_pairs(delta[r], demo_pairs, schema);
        if (std::includes(mine.begin(), mine.end(), theirs.begin(), theirs.end()) && mine.size() > theirs.size())
          step.replaced.push_back(print(delta[r]));
      }
      for (const auto& text : step.replaced) {
        auto it = std::find_if(delta.begin(), delta.end(), [&](const Concept& c) { return print(c) == text; });
        used_slots.erase(complexity(*it).slot_key);
        delta.erase(it);
      }
      delta.push_back(chosen);
      used_slots.insert(complexity(chosen).slot_key);
      result.trace.push_back(step);
    }
  }

  result.concepts = delta;
  if (!delta.empty()) {
    LearnerConfig lc = lcfg;
    lc.seed = cfg.seed;
    result.model = meip_train(demos, env, make_ranking_model(schema, delta, demos), lc, pcfg).model;
  }
  return result;
}

}  // namespace meip
