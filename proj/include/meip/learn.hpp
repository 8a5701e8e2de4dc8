#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <unordered_map>
#include <string>
#include <vector>

#include "meip/environment.hpp"
#include "meip/mcts.hpp"
#include "meip/ranking.hpp"

namespace meip {

enum class LossKind { kHingeSvm, kTanhDiscriminator };

struct LearnerConfig {
  double C = 1.0;
  std::size_t max_iterations = 50;
  double tolerance = 1e-3;
  std::size_t samples = 5;
  LossKind loss = LossKind::kHingeSvm;
  std::uint64_t seed = 0;
  /// Inner optimizer budget per update.
  std::size_t solver_iterations = 3000;
  /// Keep sampled plans from earlier iterations in the pair pool.
  bool accumulate_samples = true;
  /// Normalize pair weights per plan class.
  bool balance_pairs = true;
  /// Replace omega by the running mean of the per-iteration fits, which damps
  /// oscillation when samples get as good as the demos.
  bool average_iterates = false;

  void validate() const {
    if (!(C > 0.0)) throw ConfigError("SVM regularization C must be positive");
    if (samples < 1) throw ConfigError("sampled-plan count must be at least 1");
    if (max_iterations < 1) throw ConfigError("max outer iterations must be at least 1");
    if (!(tolerance > 0.0)) throw ConfigError("convergence tolerance must be positive");
  }
};

/// A pair in basis space: the label says x . omega should be >= 1 (hinge) or positive (tanh).
struct EncodedPair {
  std::vector<double> x;  // basis(hi) - basis(lo)
  double label = 1.0;
  double weight = 1.0;
  PairClass cls = PairClass::kDemoDemo;
};

/// Drops pairs whose two states have identical basis vectors; they carry no signal.
inline std::vector<EncodedPair> encode_pairs(const RankingModel& m, const std::vector<PairSample>& pairs) {
  std::vector<EncodedPair> out;
  std::unordered_map<std::string, std::vector<double>> cache;
  auto basis_of = [&](const State& s) -> const std::vector<double>& {
    auto key = s.key();
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(std::move(key), m.basis(m.features(s))).first;
    return it->second;
  };
  for (const auto& p : pairs) {
    const auto& hi = basis_of(p.hi);
    const auto& lo = basis_of(p.lo);
    EncodedPair e;
    e.x.resize(hi.size());
    bool zero = true;
    for (std::size_t i = 0; i < hi.size(); ++i) {
      e.x[i] = hi[i] - lo[i];
      zero = zero && e.x[i] == 0.0;
    }
    if (zero) continue;
    e.label = p.label;
    e.cls = p.cls;
    out.push_back(std::move(e));
  }
  return out;
}

/// Per-plan normalization: demo pairs weigh 1/|demos|, sampled pairs 1/|samples|
/// and cross pairs 1/(|demos| |samples|), so matching statistics cancel.
inline void balance_pairs(std::vector<EncodedPair>& pairs, std::size_t demos, std::size_t samples) {
  for (auto& p : pairs) {
    switch (p.cls) {
      case PairClass::kDemoDemo: p.weight = 1.0 / static_cast<double>(demos); break;
      case PairClass::kGenGen: p.weight = 1.0 / static_cast<double>(samples); break;
      case PairClass::kDemoGen: p.weight = 1.0 / static_cast<double>(demos * samples); break;
    }
  }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// (1/2)|w|^2 + C sum_k weight_k max(0, 1 - label_k x_k . w)
inline double svm_objective(const std::vector<EncodedPair>& pairs, const std::vector<double>& w, double C) {
  double obj = 0.5 * dot(w, w);
  for (const auto& p : pairs) obj += C * p.weight * std::max(0.0, 1.0 - p.label * dot(p.x, w));
  return obj;
}

inline double violated_fraction(const std::vector<EncodedPair>& pairs, const std::vector<double>& w) {
  if (pairs.empty()) return 0.0;
  std::size_t bad = 0;
  for (const auto& p : pairs) bad += p.label * dot(p.x, w) <= 0.0;
  return static_cast<double>(bad) / static_cast<double>(pairs.size());
}

/// -sum_k label_k tanh(x_k . w) and its gradient.
inline double discriminator_loss(const std::vector<EncodedPair>& pairs, const std::vector<double>& w,
                                 std::vector<double>* grad = nullptr) {
  double loss = 0.0;
  if (grad) grad->assign(w.size(), 0.0);
  for (const auto& p : pairs) {
    double t = std::tanh(dot(p.x, w));
    loss -= p.weight * p.label * t;
    if (grad)
      for (std::size_t i = 0; i < w.size(); ++i) (*grad)[i] -= p.weight * p.label * (1.0 - t * t) * p.x[i];
  }
  return loss;
}

inline double discriminator_loss(const std::vector<PairSample>& pairs, const RankingModel& m,
                                 std::vector<double>* grad = nullptr) {
  return discriminator_loss(encode_pairs(m, pairs), m.parameters(), grad);
}

struct SolverTrace {
  std::vector<double> objective;  // value after each accepted step, starting with the initial point
};

namespace detail {

/// Descent with backtracking: a step is accepted only if it lowers the objective.
template <class Objective, class Direction>
std::vector<double> backtracking_descent(std::vector<double> w, const Objective& f, const Direction& dir,
                                         std::size_t max_iter, SolverTrace* trace) {
  double fw = f(w);
  if (!std::isfinite(fw)) throw NumericalError("non-finite objective at the starting point");
  if (trace) trace->objective.push_back(fw);
  double eta = 1.0;
  std::size_t stalls = 0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<double> d = dir(w);
    double norm = std::sqrt(dot(d, d));
    if (norm < 1e-12) break;
    bool accepted = false;
    for (double step = eta; step > 1e-14; step *= 0.5) {
      std::vector<double> cand(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) cand[i] = w[i] + step * d[i];
      double fc = f(cand);
      if (!std::isfinite(fc)) throw NumericalError("non-finite objective during line search");
      if (fc < fw) {
        stalls = fw - fc < 1e-13 * std::max(1.0, std::abs(fw)) ? stalls + 1 : 0;
        w = std::move(cand);
        fw = fc;
        eta = std::min(step * 2.0, 1e3);
        accepted = true;
        if (trace) trace->objective.push_back(fw);
        break;
      }
    }
    if (!accepted || stalls > 50) break;
  }
  return w;
}

}  // namespace detail

/// Ranking SVM over knot weights. Dual coordinate descent solves the QP; an
/// iterate replaces the current solution only when it lowers the primal
/// objective, starting from the model's own (warm-start) parameters.
inline RankingModel fit_ranking_svm(const std::vector<EncodedPair>& pairs, const RankingModel& m,
                                    const LearnerConfig& cfg, SolverTrace* trace = nullptr) {
  cfg.validate();
  if (pairs.empty()) throw Error("fit_ranking_svm needs at least one informative pair");
  const std::size_t dim = m.parameter_count();
  std::vector<double> best = m.parameters();
  double best_obj = svm_objective(pairs, best, cfg.C);
  if (!std::isfinite(best_obj)) throw NumericalError("non-finite SVM objective at the starting point");
  if (trace) trace->objective.push_back(best_obj);
  auto accept = [&](const std::vector<double>& w) {
    double obj = svm_objective(pairs, w, cfg.C);
    if (!std::isfinite(obj)) throw NumericalError("non-finite SVM objective");
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
      if (trace) trace->objective.push_back(obj);
    }
  };

  std::vector<double> alpha(pairs.size(), 0.0), w(dim, 0.0), qdiag(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) qdiag[k] = dot(pairs[k].x, pairs[k].x);
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::mt19937_64 rng(0x51ed2701ULL);
  for (std::size_t epoch = 0; epoch < cfg.solver_iterations; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double worst = 0.0;
    for (std::size_t k : order) {
      const auto& p = pairs[k];
      const double upper = cfg.C * p.weight;
      const double grad = p.label * dot(p.x, w) - 1.0;
      double pg = grad;
      if (alpha[k] <= 0.0) pg = std::min(grad, 0.0);
      else if (alpha[k] >= upper) pg = std::max(grad, 0.0);
      worst = std::max(worst, std::abs(pg));
      if (pg == 0.0) continue;
      const double next = std::clamp(alpha[k] - grad / qdiag[k], 0.0, upper);
      const double delta = (next - alpha[k]) * p.label;
      alpha[k] = next;
      for (std::size_t i = 0; i < dim; ++i) w[i] += delta * p.x[i];
    }
    accept(w);
    if (worst < 1e-10) break;
  }

  // primal subgradient polish with backtracking
  auto f = [&](const std::vector<double>& v) { return svm_objective(pairs, v, cfg.C); };
  auto dir = [&](const std::vector<double>& v) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = -v[i];
    for (const auto& p : pairs)
      if (p.label * dot(p.x, v) < 1.0)
        for (std::size_t i = 0; i < v.size(); ++i) d[i] += cfg.C * p.weight * p.label * p.x[i];
    return d;
  };
  SolverTrace polish;
  best = detail::backtracking_descent(best, f, dir, 200, &polish);
  if (trace && polish.objective.size() > 1)
    trace->objective.insert(trace->objective.end(), polish.objective.begin() + 1, polish.objective.end());
  return m.with_parameters(best);
}

inline RankingModel fit_ranking_svm(const std::vector<PairSample>& pairs, const RankingModel& m,
                                    const LearnerConfig& cfg, SolverTrace* trace = nullptr) {
  return fit_ranking_svm(encode_pairs(m, pairs), m, cfg, trace);
}

/// Minimizes (1/2)|w|^2 + C * discriminator_loss.
inline RankingModel fit_discriminator(const std::vector<EncodedPair>& pairs, const RankingModel& m,
                                      const LearnerConfig& cfg, SolverTrace* trace = nullptr) {
  cfg.validate();
  if (pairs.empty()) throw Error("fit_discriminator needs at least one informative pair");
  auto f = [&](const std::vector<double>& w) { return 0.5 * dot(w, w) + cfg.C * discriminator_loss(pairs, w); };
  auto dir = [&](const std::vector<double>& w) {
    std::vector<double> g;
    discriminator_loss(pairs, w, &g);
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = -(w[i] + cfg.C * g[i]);
    return g;
  };
  auto w = detail::backtracking_descent(m.parameters(), f, dir, cfg.solver_iterations, trace);
  return m.with_parameters(w);
}

struct TraceRecord {
  std::size_t iteration = 0;
  double demo_tau = 0.0;
  double sample_tau = 0.0;
  double objective = 0.0;
  double violated = 0.0;
  double step = 0.0;  // max-norm change of omega
};

struct TrainingResult {
  RankingModel model;
  std::vector<TraceRecord> trace;
  bool converged = false;
};

/// One training problem: its world model and the demos recorded in it.
struct TrainingProblem {
  const Environment* env = nullptr;
  std::vector<Plan> demos;
};

/// Alternates MCTS sampling under the current ranking function with ranking
/// updates on demo/sample pairs until omega stops moving. Each problem is
/// sampled in its own environment; pairs never mix problems.
inline TrainingResult meip_train(const std::vector<TrainingProblem>& problems, RankingModel model,
                                 const LearnerConfig& cfg, PlannerConfig pcfg) {
  cfg.validate();
  pcfg.validate();
  if (problems.empty()) throw Error("meip_train needs at least one problem");
  std::vector<Plan> demos;
  for (const auto& pr : problems) {
    if (!pr.env) throw Error("training problem without an environment");
    if (pr.demos.empty()) throw Error("meip_train needs at least one demonstration per problem");
    for (std::size_t i = 0; i < pr.demos.size(); ++i) {
      try {
        replay_plan(*pr.env, pr.demos[i]);
      } catch (const EnvironmentError& e) {
        throw EnvironmentError("demonstration " + std::to_string(demos.size() + i) +
                               " is not a legal trajectory: " + e.what());
      }
    }
    demos.insert(demos.end(), pr.demos.begin(), pr.demos.end());
  }
  TrainingResult result;
  std::vector<Plan> pool;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    std::vector<Plan> sampled;
    for (std::size_t k = 0; k < problems.size(); ++k) {
      PlannerConfig pc = pcfg;
      pc.seed = cfg.seed * 1000003ULL + it + 7777777ULL * k;
      pc.samples = cfg.samples;
      SearchTree tree = mcts_converge(*problems[k].env, model, pc);
      auto z = sample_plans(tree, cfg.samples, pc.seed ^ 0x5bd1e995ULL);
      sampled.insert(sampled.end(), z.begin(), z.end());
    }
    if (!cfg.accumulate_samples) pool.clear();
    pool.insert(pool.end(), sampled.begin(), sampled.end());

    auto pairs = encode_pairs(model, build_pairs(demos, pool));
    if (cfg.balance_pairs) balance_pairs(pairs, demos.size(), pool.size());
    TraceRecord rec;
    rec.iteration = it;
    rec.demo_tau = kendall_tau(model, demos);
    rec.sample_tau = kendall_tau(model, sampled);
    RankingModel next = model;
    if (!pairs.empty())
      next = cfg.loss == LossKind::kHingeSvm ? fit_ranking_svm(pairs, model, cfg) : fit_discriminator(pairs, model, cfg);
    auto a = model.parameters();
    auto b = next.parameters();
    if (cfg.average_iterates) {
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = a[i] + (b[i] - a[i]) / static_cast<double>(it + 1);
      next = next.with_parameters(b);
    }
    for (std::size_t i = 0; i < a.size(); ++i) rec.step = std::max(rec.step, std::abs(a[i] - b[i]));
    rec.objective = svm_objective(pairs, b, cfg.C);
    rec.violated = violated_fraction(pairs, b);
    model = std::move(next);
    result.trace.push_back(rec);
    if (rec.step < cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.model = std::move(model);
  return result;
}

inline TrainingResult meip_train(const std::vector<Plan>& demos, const Environment& env, RankingModel model,
                                 const LearnerConfig& cfg, PlannerConfig pcfg) {
  if (demos.empty()) throw Error("meip_train needs at least one demonstration");
  return meip_train(std::vector<TrainingProblem>{{&env, demos}}, std::move(model), cfg, pcfg);
}

}  // namespace meip
