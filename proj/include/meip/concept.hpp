#pragma once

// First-order concept AST: quantified or aggregated valuations of predicate
// expressions over entity domains, plus compound terms built from other
// concepts. Nodes are plain values; `canonical()` yields the normal form whose
// printed text is used as identity everywhere (model files, slot keys).

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "meip/error.hpp"
#include "meip/state.hpp"

namespace meip {

enum class PredOp { kPrimitive, kNot, kAnd, kPerm, kClosure };

struct PredExpr {
  PredOp op = PredOp::kPrimitive;
  std::string name;                // primitive fluent name
  std::vector<PredExpr> operands;  // kNot/kPerm/kClosure: 1, kAnd: >= 2
  std::size_t perm_i = 0;
  std::size_t perm_j = 0;

  static PredExpr primitive(std::string n) {
    PredExpr e;
    e.name = std::move(n);
    return e;
  }
  static PredExpr negate(PredExpr p) {
    PredExpr e;
    e.op = PredOp::kNot;
    e.operands.push_back(std::move(p));
    return e;
  }
  static PredExpr conjunction(std::vector<PredExpr> ps) {
    PredExpr e;
    e.op = PredOp::kAnd;
    e.operands = std::move(ps);
    return e;
  }
  static PredExpr permute(PredExpr p, std::size_t i, std::size_t j) {
    PredExpr e;
    e.op = PredOp::kPerm;
    e.operands.push_back(std::move(p));
    e.perm_i = i;
    e.perm_j = j;
    return e;
  }
  static PredExpr closure(PredExpr p) {
    PredExpr e;
    e.op = PredOp::kClosure;
    e.operands.push_back(std::move(p));
    return e;
  }

  bool operator==(const PredExpr&) const = default;
};

enum class Quantifier { kForall, kExists, kCount, kMax, kMin, kAvg };

inline bool is_aggregator(Quantifier q) {
  return q == Quantifier::kMax || q == Quantifier::kMin || q == Quantifier::kAvg;
}

inline const char* quantifier_keyword(Quantifier q) {
  switch (q) {
    case Quantifier::kForall: return "forall";
    case Quantifier::kExists: return "exists";
    case Quantifier::kCount: return "count";
    case Quantifier::kMax: return "max";
    case Quantifier::kMin: return "min";
    case Quantifier::kAvg: return "avg";
  }
  return "?";
}

/// Relations and functions that combine concept values into a new concept.
enum class CompoundOp { kLt, kLe, kEq, kNe, kAdd, kSub, kMul };

inline const char* compound_keyword(CompoundOp op) {
  switch (op) {
    case CompoundOp::kLt: return "lt";
    case CompoundOp::kLe: return "le";
    case CompoundOp::kEq: return "eq";
    case CompoundOp::kNe: return "ne";
    case CompoundOp::kAdd: return "add";
    case CompoundOp::kSub: return "sub";
    case CompoundOp::kMul: return "mul";
  }
  return "?";
}

inline bool compound_is_predicate(CompoundOp op) {
  return op == CompoundOp::kLt || op == CompoundOp::kLe || op == CompoundOp::kEq ||
         op == CompoundOp::kNe;
}

struct Concept {
  enum class Kind { kAtomic, kCompound };
  Kind kind = Kind::kAtomic;

  // kAtomic
  Quantifier quantifier = Quantifier::kForall;
  PredExpr source;                 // predicate expression, or a primitive function for aggregators
  Args filters;                    // one per argument: entity id, class name or "_"
  std::optional<PredExpr> domain;  // ext(P); nullopt means the universe U

  // kCompound
  CompoundOp op = CompoundOp::kLt;
  std::vector<Concept> terms;

  bool operator==(const Concept&) const = default;
};

struct ConceptComplexity {
  std::size_t level = 0;
  std::string slot_key;
  bool operator==(const ConceptComplexity&) const = default;
};

namespace detail {

inline bool needs_parens(const PredExpr& p) { return p.op == PredOp::kAnd; }

}  // namespace detail

inline std::string print(const PredExpr& p) {
  switch (p.op) {
    case PredOp::kPrimitive: return p.name;
    case PredOp::kNot: {
      const auto& inner = p.operands.front();
      return detail::needs_parens(inner) ? "!(" + print(inner) + ")" : "!" + print(inner);
    }
    case PredOp::kAnd: {
      std::string out;
      for (std::size_t i = 0; i < p.operands.size(); ++i) {
        if (i) out += " & ";
        out += print(p.operands[i]);
      }
      return out;
    }
    case PredOp::kPerm:
      return "perm(" + print(p.operands.front()) + ", " + std::to_string(p.perm_i) + ", " +
             std::to_string(p.perm_j) + ")";
    case PredOp::kClosure: return "closure(" + print(p.operands.front()) + ")";
  }
  return {};
}

namespace detail {

inline std::string print_valuation(const Concept& c) {
  std::string src = print(c.source);
  if (needs_parens(c.source)) src = "(" + src + ")";
  std::string out = src + "(";
  for (std::size_t i = 0; i < c.filters.size(); ++i) {
    if (i) out += "@";
    out += c.filters[i];
  }
  out += ")";
  if (c.domain) out += " in ext(" + print(*c.domain) + ")";
  return out;
}

}  // namespace detail

inline std::string print(const Concept& c) {
  if (c.kind == Concept::Kind::kAtomic)
    return std::string(quantifier_keyword(c.quantifier)) + " " + detail::print_valuation(c);
  std::string out = std::string(compound_keyword(c.op)) + "(";
  for (std::size_t i = 0; i < c.terms.size(); ++i) {
    if (i) out += ", ";
    out += print(c.terms[i]);
  }
  return out + ")";
}

/// Normal form: flattened, sorted, deduplicated conjunctions and no double negation.
inline PredExpr canonical(const PredExpr& p) {
  switch (p.op) {
    case PredOp::kPrimitive: return p;
    case PredOp::kNot: {
      PredExpr inner = canonical(p.operands.front());
      if (inner.op == PredOp::kNot) return inner.operands.front();
      return PredExpr::negate(std::move(inner));
    }
    case PredOp::kAnd: {
      std::vector<PredExpr> flat;
      for (const auto& o : p.operands) {
        PredExpr c = canonical(o);
        if (c.op == PredOp::kAnd)
          flat.insert(flat.end(), c.operands.begin(), c.operands.end());
        else
          flat.push_back(std::move(c));
      }
      std::sort(flat.begin(), flat.end(),
                [](const PredExpr& a, const PredExpr& b) { return print(a) < print(b); });
      flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
      if (flat.size() == 1) return flat.front();
      return PredExpr::conjunction(std::move(flat));
    }
    case PredOp::kPerm: {
      PredExpr e = PredExpr::permute(canonical(p.operands.front()), std::min(p.perm_i, p.perm_j),
                                     std::max(p.perm_i, p.perm_j));
      return e;
    }
    case PredOp::kClosure: return PredExpr::closure(canonical(p.operands.front()));
  }
  return p;
}

inline Concept canonical(const Concept& c) {
  Concept out = c;
  if (c.kind == Concept::Kind::kAtomic) {
    out.source = canonical(c.source);
    if (c.domain) out.domain = canonical(*c.domain);
  } else {
    for (auto& t : out.terms) t = canonical(t);
  }
  return out;
}

/// Argument classes of a predicate expression; validates arities along the way.
inline std::vector<std::string> arg_classes(const PredExpr& p, const Schema& schema) {
  switch (p.op) {
    case PredOp::kPrimitive: {
      const Fluent* f = schema.find(p.name);
      if (!f) throw SchemaError("unknown fluent '" + p.name + "'");
      if (f->kind != FluentKind::kPredicate)
        throw SchemaError("'" + p.name + "' is a function, not a predicate");
      return f->arg_classes;
    }
    case PredOp::kNot: return arg_classes(p.operands.front(), schema);
    case PredOp::kAnd: {
      auto first = arg_classes(p.operands.front(), schema);
      for (std::size_t i = 1; i < p.operands.size(); ++i) {
        auto other = arg_classes(p.operands[i], schema);
        if (other.size() != first.size())
          throw SchemaError("arity mismatch in conjunction '" + print(p) + "'");
        if (other != first)
          throw SchemaError("argument classes differ in conjunction '" + print(p) + "'");
      }
      return first;
    }
    case PredOp::kPerm: {
      auto cls = arg_classes(p.operands.front(), schema);
      if (cls.size() < 2) throw SchemaError("perm needs arity > 1 in '" + print(p) + "'");
      if (p.perm_i >= cls.size() || p.perm_j >= cls.size() || p.perm_i == p.perm_j)
        throw SchemaError("perm indices out of range in '" + print(p) + "'");
      if (cls[p.perm_i] != cls[p.perm_j])
        throw SchemaError("perm swaps arguments of different classes in '" + print(p) + "'");
      return cls;
    }
    case PredOp::kClosure: {
      auto cls = arg_classes(p.operands.front(), schema);
      if (cls.size() != 2 || cls[0] != cls[1])
        throw SchemaError("closure needs a binary relation over one class in '" + print(p) + "'");
      return cls;
    }
  }
  return {};
}

/// Argument classes of the valuation source of an atomic concept.
inline std::vector<std::string> source_classes(const Concept& c, const Schema& schema) {
  if (is_aggregator(c.quantifier)) {
    if (c.source.op != PredOp::kPrimitive)
      throw SchemaError("aggregators take a primitive function, got '" + print(c.source) + "'");
    const Fluent& f = schema.at(c.source.name);
    if (f.kind != FluentKind::kFunction || f.domain == ValueDomain::kBoolean)
      throw SchemaError("aggregator over non-numeric source '" + f.name + "'");
    return f.arg_classes;
  }
  return arg_classes(c.source, schema);
}

/// Verifies names, arities and value domains against a schema.
inline void check(const Concept& c, const Schema& schema) {
  if (c.kind == Concept::Kind::kCompound) {
    if (c.terms.size() < 2)
      throw SchemaError(std::string("'") + compound_keyword(c.op) + "' needs at least two terms");
    if (compound_is_predicate(c.op) && c.terms.size() != 2)
      throw SchemaError(std::string("'") + compound_keyword(c.op) + "' is binary");
    for (const auto& t : c.terms) check(t, schema);
    return;
  }
  auto cls = source_classes(c, schema);
  if (c.filters.size() != cls.size())
    throw SchemaError("'" + print(c) + "' gives " + std::to_string(c.filters.size()) +
                      " argument filters for arity " + std::to_string(cls.size()));
  if (c.domain) {
    auto dcls = arg_classes(*c.domain, schema);
    if (dcls != cls) throw SchemaError("domain dimension does not match source in '" + print(c) + "'");
  }
}

inline ValueDomain value_domain(const Concept& c) {
  if (c.kind == Concept::Kind::kCompound)
    return compound_is_predicate(c.op) ? ValueDomain::kBoolean : ValueDomain::kReal;
  switch (c.quantifier) {
    case Quantifier::kForall:
    case Quantifier::kExists: return ValueDomain::kBoolean;
    case Quantifier::kCount: return ValueDomain::kInteger;
    default: return ValueDomain::kReal;
  }
}

inline std::size_t primitive_count(const PredExpr& p) {
  if (p.op == PredOp::kPrimitive) return 1;
  std::size_t n = 0;
  for (const auto& o : p.operands) n += primitive_count(o);
  return n;
}

inline ConceptComplexity complexity(const Concept& raw) {
  Concept c = canonical(raw);
  ConceptComplexity out;
  if (c.kind == Concept::Kind::kCompound) {
    for (const auto& t : c.terms) out.level += complexity(t).level;
    out.slot_key = print(c);
    return out;
  }
  out.level = primitive_count(c.source) + (c.domain ? primitive_count(*c.domain) : 0);
  out.slot_key = std::string(is_aggregator(c.quantifier) ? "F:" : "P:") + detail::print_valuation(c);
  return out;
}

}  // namespace meip
