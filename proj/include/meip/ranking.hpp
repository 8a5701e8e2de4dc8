#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "meip/concept.hpp"
#include "meip/concept_eval.hpp"
#include "meip/state.hpp"

namespace meip {

/// Knot positions and the value of one concept's score term at each knot.
/// Between knots the term interpolates linearly; outside it clamps.
struct ConceptBins {
  std::vector<double> knots;
  std::vector<double> weights;
  bool operator==(const ConceptBins&) const = default;
};

/// Continuous piecewise-linear ranking function g(s) = sum_i g_i(f_i(s)).
class RankingModel {
 public:
  RankingModel() = default;
  RankingModel(Schema schema, std::vector<Concept> concepts, std::vector<ConceptBins> bins)
      : schema_(std::move(schema)), concepts_(std::move(concepts)), bins_(std::move(bins)) {
    if (concepts_.size() != bins_.size()) throw Error("one bin set per concept required");
    for (std::size_t i = 0; i < bins_.size(); ++i) {
      const auto& b = bins_[i];
      if (b.knots.size() < 3) throw Error("a concept needs at least 2 bins");
      if (b.knots.size() != b.weights.size()) throw Error("knot and weight counts differ");
      for (std::size_t j = 1; j < b.knots.size(); ++j)
        if (!(b.knots[j] > b.knots[j - 1])) throw Error("knot positions must strictly increase");
      concepts_[i] = canonical(concepts_[i]);
      check(concepts_[i], schema_);
    }
  }

  const Schema& schema() const { return schema_; }
  const std::vector<Concept>& concepts() const { return concepts_; }
  const std::vector<ConceptBins>& bins() const { return bins_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& b : bins_) n += b.weights.size();
    return n;
  }

  std::vector<double> parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (const auto& b : bins_) p.insert(p.end(), b.weights.begin(), b.weights.end());
    return p;
  }

  RankingModel with_parameters(std::span<const double> p) const {
    if (p.size() != parameter_count()) throw Error("parameter vector has the wrong length");
    RankingModel out = *this;
    std::size_t k = 0;
    for (auto& b : out.bins_)
      for (auto& w : b.weights) w = p[k++];
    return out;
  }

  std::vector<double> features(const State& s) const {
    std::vector<double> f;
    f.reserve(concepts_.size());
    for (const auto& c : concepts_) f.push_back(evaluate_concept(c, s, schema_));
    return f;
  }

  /// Interpolation coefficients: g(s) = basis(f) . parameters().
  std::vector<double> basis(std::span<const double> f) const {
    std::vector<double> out(parameter_count(), 0.0);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < bins_.size(); ++i) {
      auto [j, t] = locate(bins_[i], f[i]);
      out[offset + j] += 1.0 - t;
      if (t > 0.0) out[offset + j + 1] += t;
      offset += bins_[i].weights.size();
    }
    return out;
  }

  double score_features(std::span<const double> f) const {
    double g = 0.0;
    for (std::size_t i = 0; i < bins_.size(); ++i) {
      auto [j, t] = locate(bins_[i], f[i]);
      const auto& w = bins_[i].weights;
      g += t > 0.0 ? (1.0 - t) * w[j] + t * w[j + 1] : w[j];
    }
    return g;
  }

  bool operator==(const RankingModel&) const = default;

 private:
  static std::pair<std::size_t, double> locate(const ConceptBins& b, double x) {
    const auto& k = b.knots;
    if (x <= k.front()) return {0, 0.0};
    if (x >= k.back()) return {k.size() - 1, 0.0};
    std::size_t j = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), x) - k.begin()) - 1;
    double t = (x - k[j]) / (k[j + 1] - k[j]);
    return {j, t};
  }

  Schema schema_;
  std::vector<Concept> concepts_;
  std::vector<ConceptBins> bins_;
};

/// g(s) for one state.
inline double score_state(const RankingModel& m, const State& s) { return m.score_features(m.features(s)); }

/// Sign of g(late) - g(early), compared exactly.
inline int concordance_scores(double early, double late) {
  if (late > early) return 1;
  if (late < early) return -1;
  return 0;
}

inline int concordance(const RankingModel& m, const State& early, const State& late) {
  if (early.problem_id() == late.problem_id() && early.time_index() >= late.time_index())
    throw Error("concordance expects the earlier state first");
  return concordance_scores(score_state(m, early), score_state(m, late));
}

/// Non-Markovian step rewards R(s^i) for i = 1..h-1 (0-based) computed from a
/// score sequence; they sum to the plan's Kendall tau.
inline std::vector<double> stepwise_rewards_from_scores(std::span<const double> g) {
  const std::size_t h = g.size();
  if (h < 2) throw Error("stepwise rewards need a plan of length >= 2");
  const double coef = 2.0 / (static_cast<double>(h) * static_cast<double>(h - 1));
  std::vector<double> r;
  r.reserve(h - 1);
  for (std::size_t i = 1; i < h; ++i) {
    int acc = 0;
    for (std::size_t j = 0; j < i; ++j) acc += concordance_scores(g[j], g[i]);
    r.push_back(coef * acc);
  }
  return r;
}

inline double tau_from_scores(std::span<const double> g) {
  double tau = 0.0;
  for (double r : stepwise_rewards_from_scores(g)) tau += r;
  return tau;
}

inline std::vector<double> plan_scores(const RankingModel& m, const Plan& p) {
  std::vector<double> g;
  g.reserve(p.states.size());
  for (const auto& s : p.states) g.push_back(score_state(m, s));
  return g;
}

inline std::vector<double> stepwise_rewards(const RankingModel& m, const Plan& p) {
  return stepwise_rewards_from_scores(plan_scores(m, p));
}

/// Mean per-plan Kendall tau of the states' temporal order against g.
inline double kendall_tau(const RankingModel& m, const std::vector<Plan>& plans) {
  if (plans.empty()) throw Error("kendall_tau needs at least one plan");
  double acc = 0.0;
  for (const auto& p : plans) {
    if (p.horizon() < 2) throw Error("kendall_tau needs plans of length >= 2");
    acc += tau_from_scores(plan_scores(m, p));
  }
  return acc / static_cast<double>(plans.size());
}

enum class PairClass { kDemoDemo, kGenGen, kDemoGen };

/// Ordinal training pair: the label d says g(hi) - g(lo) should have sign d.
struct PairSample {
  State lo;
  State hi;
  int label = 1;
  PairClass cls = PairClass::kDemoDemo;
};

/// Ordinal relations for contrastive training, drawn within one problem only:
/// later demo states above earlier ones, later sampled states not above earlier
/// ones, and demo states not below sampled states at the same index.
inline std::vector<PairSample> build_pairs(const std::vector<Plan>& demos, const std::vector<Plan>& sampled) {
  if (demos.empty()) throw Error("build_pairs needs at least one demonstration");
  std::vector<PairSample> out;
  for (const auto& d : demos)
    for (std::size_t m = 0; m < d.states.size(); ++m)
      for (std::size_t n = m + 1; n < d.states.size(); ++n)
        out.push_back({d.states[m], d.states[n], +1, PairClass::kDemoDemo});
  for (const auto& z : sampled)
    for (std::size_t m = 0; m < z.states.size(); ++m)
      for (std::size_t n = m + 1; n < z.states.size(); ++n)
        out.push_back({z.states[m], z.states[n], -1, PairClass::kGenGen});
  for (const auto& d : demos)
    for (const auto& z : sampled) {
      if (d.problem_id() != z.problem_id()) continue;
      const std::size_t len = std::min(d.states.size(), z.states.size());
      for (std::size_t m = 0; m < len; ++m) out.push_back({z.states[m], d.states[m], +1, PairClass::kDemoGen});
    }
  return out;
}

/// Equal-width knots over each concept's observed range on the demos, widened
/// by `expand` of the range on both sides. Weights start at zero.
inline RankingModel make_ranking_model(const Schema& schema, std::vector<Concept> concepts,
                                       const std::vector<Plan>& demos, std::size_t bins = 8,
                                       double expand = 0.1) {
  if (bins < 2) throw Error("at least 2 bins are required");
  std::vector<ConceptBins> all;
  for (auto& c : concepts) {
    c = canonical(c);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& d : demos)
      for (const auto& s : d.states) {
        double v = evaluate_concept(c, s, schema);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    double width = hi - lo;
    if (width <= 0.0) width = 1.0;
    lo -= expand * width;
    hi += expand * width;
    ConceptBins b;
    for (std::size_t j = 0; j <= bins; ++j)
      b.knots.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(bins));
    b.weights.assign(bins + 1, 0.0);
    all.push_back(std::move(b));
  }
  return RankingModel(schema, std::move(concepts), std::move(all));
}

}  // namespace meip
