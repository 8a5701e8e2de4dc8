#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "meip/concept.hpp"
#include "meip/state.hpp"

namespace meip {

/// Entity classes are dotted paths ("object.torch"); a fluent argument class
/// matches its own path and every refinement of it.
inline bool class_matches(const std::string& entity_cls, const std::string& arg_cls) {
  if (arg_cls == "*" || arg_cls == entity_cls) return true;
  return entity_cls.size() > arg_cls.size() && entity_cls.compare(0, arg_cls.size(), arg_cls) == 0 &&
         entity_cls[arg_cls.size()] == '.';
}

/// A filter names an entity id, a class, or a segment of a class path; "_" matches all.
inline bool filter_matches(const Entity& e, const std::string& filter) {
  if (filter == "_" || filter == e.id || filter == e.cls) return true;
  std::size_t start = 0;
  while (start <= e.cls.size()) {
    std::size_t dot = e.cls.find('.', start);
    std::size_t end = dot == std::string::npos ? e.cls.size() : dot;
    if (e.cls.compare(start, end - start, filter) == 0 && end - start == filter.size()) return true;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return false;
}

namespace detail {

inline bool holds(const PredExpr& p, const Args& args, const State& s, const Schema& schema);

inline bool closure_holds(const PredExpr& inner, const Args& args, const State& s, const Schema& schema) {
  auto cls = arg_classes(inner, schema);
  std::vector<std::string> nodes;
  for (const auto& e : s.entities())
    if (class_matches(e.cls, cls[1])) nodes.push_back(e.id);
  // depth is capped by the entity count
  std::set<std::string> seen{args[0]};
  std::deque<std::pair<std::string, std::size_t>> frontier{{args[0], 0}};
  const std::size_t cap = s.entities().size();
  while (!frontier.empty()) {
    auto [at, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= cap) continue;
    for (const auto& n : nodes) {
      if (!holds(inner, Args{at, n}, s, schema)) continue;
      if (n == args[1]) return true;
      if (seen.insert(n).second) frontier.emplace_back(n, depth + 1);
    }
  }
  return false;
}

inline bool holds(const PredExpr& p, const Args& args, const State& s, const Schema& schema) {
  switch (p.op) {
    case PredOp::kPrimitive: return s.value(p.name, args) != 0.0;
    case PredOp::kNot: return !holds(p.operands.front(), args, s, schema);
    case PredOp::kAnd:
      return std::all_of(p.operands.begin(), p.operands.end(),
                         [&](const PredExpr& o) { return holds(o, args, s, schema); });
    case PredOp::kPerm: {
      Args swapped = args;
      std::swap(swapped[p.perm_i], swapped[p.perm_j]);
      return holds(p.operands.front(), swapped, s, schema);
    }
    case PredOp::kClosure: return closure_holds(p.operands.front(), args, s, schema);
  }
  return false;
}

/// Calls `visit` for every tuple of the domain: entities matching the argument
/// classes and filters, restricted to ext(domain) when one is given.
inline void for_each_grounding(const Concept& c, const State& s, const Schema& schema,
                               const std::function<void(const Args&)>& visit) {
  auto cls = source_classes(c, schema);
  std::vector<std::vector<const Entity*>> choices(cls.size());
  for (std::size_t k = 0; k < cls.size(); ++k)
    for (const auto& e : s.entities())
      if (class_matches(e.cls, cls[k]) && filter_matches(e, c.filters[k])) choices[k].push_back(&e);
  for (const auto& ch : choices)
    if (ch.empty()) return;
  std::vector<std::size_t> idx(cls.size(), 0);
  Args args(cls.size());
  for (;;) {
    for (std::size_t k = 0; k < cls.size(); ++k) args[k] = choices[k][idx[k]]->id;
    if (!c.domain || holds(*c.domain, args, s, schema)) visit(args);
    std::size_t k = cls.size();
    while (k > 0) {
      --k;
      if (++idx[k] < choices[k].size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

}  // namespace detail

/// Value of a concept on a state. Booleans read as 0/1, `count` as the number of
/// satisfying groundings. Aggregators over an empty domain throw.
inline double evaluate_concept(const Concept& c, const State& s, const Schema& schema) {
  if (c.kind == Concept::Kind::kCompound) {
    std::vector<double> v;
    v.reserve(c.terms.size());
    for (const auto& t : c.terms) v.push_back(evaluate_concept(t, s, schema));
    switch (c.op) {
      case CompoundOp::kLt: return v[0] < v[1] ? 1.0 : 0.0;
      case CompoundOp::kLe: return v[0] <= v[1] ? 1.0 : 0.0;
      case CompoundOp::kEq: return v[0] == v[1] ? 1.0 : 0.0;
      case CompoundOp::kNe: return v[0] != v[1] ? 1.0 : 0.0;
      case CompoundOp::kAdd: {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc;
      }
      case CompoundOp::kSub: {
        double acc = v[0];
        for (std::size_t i = 1; i < v.size(); ++i) acc -= v[i];
        return acc;
      }
      case CompoundOp::kMul: {
        double acc = 1.0;
        for (double x : v) acc *= x;
        return acc;
      }
    }
    return 0.0;
  }

  switch (c.quantifier) {
    case Quantifier::kForall: {
      bool all = true;
      detail::for_each_grounding(c, s, schema, [&](const Args& a) {
        if (all && !detail::holds(c.source, a, s, schema)) all = false;
      });
      return all ? 1.0 : 0.0;
    }
    case Quantifier::kExists: {
      bool any = false;
      detail::for_each_grounding(c, s, schema, [&](const Args& a) {
        if (!any && detail::holds(c.source, a, s, schema)) any = true;
      });
      return any ? 1.0 : 0.0;
    }
    case Quantifier::kCount: {
      double n = 0.0;
      detail::for_each_grounding(c, s, schema, [&](const Args& a) {
        if (detail::holds(c.source, a, s, schema)) n += 1.0;
      });
      return n;
    }
    case Quantifier::kMax:
    case Quantifier::kMin:
    case Quantifier::kAvg: {
      std::size_t n = 0;
      double acc = c.quantifier == Quantifier::kAvg ? 0.0
                   : c.quantifier == Quantifier::kMax ? -std::numeric_limits<double>::infinity()
                                                      : std::numeric_limits<double>::infinity();
      detail::for_each_grounding(c, s, schema, [&](const Args& a) {
        double v = s.value(c.source.name, a);
        ++n;
        if (c.quantifier == Quantifier::kAvg) acc += v;
        else if (c.quantifier == Quantifier::kMax) acc = std::max(acc, v);
        else acc = std::min(acc, v);
      });
      if (n == 0)
        throw EvaluationError(std::string(quantifier_keyword(c.quantifier)) +
                              " over an empty domain in '" + print(c) + "'");
      return c.quantifier == Quantifier::kAvg ? acc / static_cast<double>(n) : acc;
    }
  }
  return 0.0;
}

}  // namespace meip
