#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "meip/concept.hpp"

namespace meip {

struct EnumerationOptions {
  /// Candidate argument filters per fluent argument class. Classes without an
  /// entry only use the wildcard "_".
  std::map<std::string, std::vector<std::string>> filters;
  /// Hard limit on the number of generated concepts.
  std::size_t cap = 100000;
  /// Also generate `in ext(Q)` domains restricted by a level-1 predicate.
  bool restricted_domains = true;
  /// Primitive predicates and functions to build from; empty means all.
  std::vector<std::string> fluents;
  /// Also generate negated predicates.
  bool negations = true;
};

struct EnumeratedConcept {
  Concept value;
  ConceptComplexity complexity;
};

namespace detail {

struct SignedExpr {
  PredExpr expr;
  std::string text;
};

inline void add_checked(std::vector<EnumeratedConcept>& out, std::set<std::string>& seen, Concept c,
                        std::size_t max_level, std::size_t cap) {
  c = canonical(c);
  auto cx = complexity(c);
  if (cx.level > max_level) return;
  if (!seen.insert(print(c)).second) return;
  if (out.size() >= cap)
    throw CapacityError("concept enumeration exceeds the cap of " + std::to_string(cap) +
                        "; raise the cap or lower the level");
  out.push_back({std::move(c), std::move(cx)});
}

inline std::vector<Args> filter_product(const std::vector<std::string>& classes,
                                        const EnumerationOptions& opt) {
  std::vector<Args> out{Args{}};
  for (const auto& cls : classes) {
    std::vector<std::string> choices{"_"};
    if (auto it = opt.filters.find(cls); it != opt.filters.end()) choices = it->second;
    std::vector<Args> next;
    for (const auto& prefix : out)
      for (const auto& f : choices) {
        Args a = prefix;
        a.push_back(f);
        next.push_back(std::move(a));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

/// All atomic concepts over `schema` with at most `max_level` primitives,
/// sorted ascending by level, then slot key, then quantifier. Transitive
/// closures are never generated.
inline std::vector<EnumeratedConcept> enumerate_concepts(const Schema& schema, std::size_t max_level,
                                                         const EnumerationOptions& opt = {}) {
  if (max_level < 1) throw ConfigError("enumerate_concepts needs max_level >= 1");

  // level-1 predicate expressions grouped by argument-class signature
  std::map<std::vector<std::string>, std::vector<detail::SignedExpr>> base;
  auto wanted = [&](const Fluent& f) {
    return opt.fluents.empty() || std::find(opt.fluents.begin(), opt.fluents.end(), f.name) != opt.fluents.end();
  };
  for (const auto& f : schema.fluents()) {
    if (f.kind != FluentKind::kPredicate || !wanted(f)) continue;
    std::vector<PredExpr> forms{PredExpr::primitive(f.name)};
    for (std::size_t i = 0; i < f.arity(); ++i)
      for (std::size_t j = i + 1; j < f.arity(); ++j)
        if (f.arg_classes[i] == f.arg_classes[j])
          forms.push_back(PredExpr::permute(PredExpr::primitive(f.name), i, j));
    auto& bucket = base[f.arg_classes];
    for (auto& p : forms) {
      bucket.push_back({p, print(p)});
      if (!opt.negations) continue;
      PredExpr n = PredExpr::negate(p);
      bucket.push_back({n, print(n)});
    }
  }

  std::vector<EnumeratedConcept> out;
  std::set<std::string> seen;
  const Quantifier quants[] = {Quantifier::kForall, Quantifier::kExists, Quantifier::kCount};
  const Quantifier aggs[] = {Quantifier::kMax, Quantifier::kMin, Quantifier::kAvg};

  auto emit = [&](const PredExpr& source, const std::vector<std::string>& classes, bool aggregate,
                  const std::optional<PredExpr>& domain) {
    for (const auto& filters : detail::filter_product(classes, opt)) {
      for (Quantifier q : aggregate ? std::vector<Quantifier>(std::begin(aggs), std::end(aggs))
                                    : std::vector<Quantifier>(std::begin(quants), std::end(quants))) {
        Concept c;
        c.quantifier = q;
        c.source = source;
        c.filters = filters;
        c.domain = domain;
        detail::add_checked(out, seen, std::move(c), max_level, opt.cap);
      }
    }
  };

  for (const auto& [classes, exprs] : base) {
    // conjunctions of k distinct level-1 expressions, never pairing P with !P
    std::vector<std::vector<std::size_t>> combos;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
      if (!cur.empty()) combos.push_back(cur);
      if (cur.size() == max_level) return;
      for (std::size_t i = start; i < exprs.size(); ++i) {
        bool clash = false;
        for (std::size_t j : cur) {
          const auto& a = exprs[i].expr;
          const auto& b = exprs[j].expr;
          if ((a.op == PredOp::kNot && a.operands.front() == b) ||
              (b.op == PredOp::kNot && b.operands.front() == a))
            clash = true;
        }
        if (clash) continue;
        cur.push_back(i);
        rec(i + 1);
        cur.pop_back();
      }
    };
    rec(0);
    for (const auto& combo : combos) {
      PredExpr source = combo.size() == 1 ? exprs[combo[0]].expr : [&] {
        std::vector<PredExpr> parts;
        for (std::size_t i : combo) parts.push_back(exprs[i].expr);
        return PredExpr::conjunction(std::move(parts));
      }();
      emit(source, classes, false, std::nullopt);
      if (opt.restricted_domains && combo.size() < max_level)
        for (const auto& d : exprs) {
          if (d.expr.op == PredOp::kNot) continue;
          if (combo.size() == 1 && exprs[combo[0]].text == d.text) continue;
          emit(source, classes, false, d.expr);
        }
    }
  }

  for (const auto& f : schema.fluents()) {
    if (f.kind != FluentKind::kFunction || f.domain == ValueDomain::kBoolean || !wanted(f)) continue;
    PredExpr src = PredExpr::primitive(f.name);
    emit(src, f.arg_classes, true, std::nullopt);
    if (opt.restricted_domains && max_level >= 2)
      if (auto it = base.find(f.arg_classes); it != base.end())
        for (const auto& d : it->second)
          if (d.expr.op != PredOp::kNot) emit(src, f.arg_classes, true, d.expr);
  }

  std::stable_sort(out.begin(), out.end(), [](const EnumeratedConcept& a, const EnumeratedConcept& b) {
    if (a.complexity.level != b.complexity.level) return a.complexity.level < b.complexity.level;
    if (a.complexity.slot_key != b.complexity.slot_key) return a.complexity.slot_key < b.complexity.slot_key;
    return static_cast<int>(a.value.quantifier) < static_cast<int>(b.value.quantifier);
  });
  return out;
}

}  // namespace meip
