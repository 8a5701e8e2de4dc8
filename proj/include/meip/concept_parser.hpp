#pragma once

// Concrete syntax (LL(1)):
//
//   concept  := quant pexpr args [ "in" domain ]
//             | agg IDENT args [ "in" domain ]
//             | compound "(" concept { "," concept } ")"
//   quant    := "forall" | "exists" | "count"
//   agg      := "max" | "min" | "avg"
//   compound := "lt" | "le" | "eq" | "ne" | "add" | "sub" | "mul"
//   pexpr    := punary { "&" punary }
//   punary   := "!" punary | "perm" "(" pexpr "," INT "," INT ")"
//             | "closure" "(" pexpr ")" | IDENT | "(" pexpr ")"
//   args     := "(" filter { ("@" | ",") filter } ")"
//   filter   := IDENT | "_"
//   domain   := "U" | "ext" "(" pexpr ")"

#include <cctype>
#include <string>
#include <string_view>

#include "meip/concept.hpp"

namespace meip {

namespace detail {

class ConceptParser {
 public:
  ConceptParser(std::string_view text, const Schema& schema) : text_(text), schema_(schema) {}

  Concept parse() {
    Concept c = parse_concept();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return c;
  }

 private:
  enum class Tok { kIdent, kInt, kSymbol, kEnd };

  struct Token {
    Tok kind = Tok::kEnd;
    std::string text;
    std::size_t pos = 0;
  };

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  static bool ident_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
  }

  Token peek() {
    skip_ws();
    Token t;
    t.pos = pos_;
    if (pos_ >= text_.size()) return t;
    char ch = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t end = pos_;
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
      if (end < text_.size() && ident_char(text_[end])) {
        while (end < text_.size() && ident_char(text_[end])) ++end;
        t.kind = Tok::kIdent;
      } else {
        t.kind = Tok::kInt;
      }
      t.text = std::string(text_.substr(pos_, end - pos_));
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t end = pos_;
      while (end < text_.size() && ident_char(text_[end])) ++end;
      t.kind = Tok::kIdent;
      t.text = std::string(text_.substr(pos_, end - pos_));
      return t;
    }
    t.kind = Tok::kSymbol;
    t.text = std::string(1, ch);
    return t;
  }

  Token next() {
    Token t = peek();
    pos_ = t.pos + t.text.size();
    return t;
  }

  void expect(const std::string& sym) {
    Token t = next();
    if (t.text != sym || t.kind == Tok::kEnd)
      fail("expected '" + sym + "'" + (t.kind == Tok::kEnd ? " before end of input" : ", found '" + t.text + "'"),
           t.pos);
  }

  static bool is_quantifier(const std::string& s, Quantifier& q) {
    if (s == "forall") q = Quantifier::kForall;
    else if (s == "exists") q = Quantifier::kExists;
    else if (s == "count") q = Quantifier::kCount;
    else if (s == "max") q = Quantifier::kMax;
    else if (s == "min") q = Quantifier::kMin;
    else if (s == "avg") q = Quantifier::kAvg;
    else return false;
    return true;
  }

  static bool is_compound(const std::string& s, CompoundOp& op) {
    if (s == "lt") op = CompoundOp::kLt;
    else if (s == "le") op = CompoundOp::kLe;
    else if (s == "eq") op = CompoundOp::kEq;
    else if (s == "ne") op = CompoundOp::kNe;
    else if (s == "add") op = CompoundOp::kAdd;
    else if (s == "sub") op = CompoundOp::kSub;
    else if (s == "mul") op = CompoundOp::kMul;
    else return false;
    return true;
  }

  Concept parse_concept() {
    Token head = next();
    if (head.kind != Tok::kIdent) fail("expected a quantifier, aggregator or compound keyword", head.pos);
    Concept c;
    Quantifier q;
    CompoundOp op;
    if (is_quantifier(head.text, q)) {
      c.quantifier = q;
      std::size_t src_pos = peek().pos;
      if (is_aggregator(q)) {
        Token f = next();
        if (f.kind != Tok::kIdent) fail("expected a function name", f.pos);
        const Fluent* fl = schema_.find(f.text);
        if (!fl) fail("unknown fluent '" + f.text + "'", f.pos);
        c.source = PredExpr::primitive(f.text);
      } else {
        c.source = parse_pexpr();
      }
      c.filters = parse_args();
      if (peek().kind == Tok::kIdent && peek().text == "in") {
        next();
        Token d = next();
        if (d.text == "U") {
        } else if (d.text == "ext") {
          expect("(");
          c.domain = parse_pexpr();
          expect(")");
        } else {
          fail("expected 'U' or 'ext'", d.pos);
        }
      }
      try {
        check(c, schema_);
      } catch (const SchemaError& e) {
        fail(e.what(), src_pos);
      }
      return canonical(c);
    }
    if (is_compound(head.text, op)) {
      c.kind = Concept::Kind::kCompound;
      c.op = op;
      expect("(");
      c.terms.push_back(parse_concept());
      while (peek().text == ",") {
        next();
        c.terms.push_back(parse_concept());
      }
      expect(")");
      try {
        check(c, schema_);
      } catch (const SchemaError& e) {
        fail(e.what(), head.pos);
      }
      return canonical(c);
    }
    fail("unknown keyword '" + head.text + "'", head.pos);
  }

  PredExpr parse_pexpr() {
    std::vector<PredExpr> parts;
    parts.push_back(parse_punary());
    while (peek().kind == Tok::kSymbol && peek().text == "&") {
      next();
      parts.push_back(parse_punary());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return PredExpr::conjunction(std::move(parts));
  }

  std::size_t parse_index() {
    Token t = next();
    if (t.kind != Tok::kInt) fail("expected an argument index", t.pos);
    return static_cast<std::size_t>(std::stoul(t.text));
  }

  PredExpr parse_punary() {
    Token t = next();
    if (t.kind == Tok::kSymbol && t.text == "!") return PredExpr::negate(parse_punary());
    if (t.kind == Tok::kSymbol && t.text == "(") {
      PredExpr inner = parse_pexpr();
      expect(")");
      return inner;
    }
    if (t.kind != Tok::kIdent) fail("expected a predicate", t.pos);
    if (t.text == "perm") {
      expect("(");
      PredExpr inner = parse_pexpr();
      expect(",");
      std::size_t i = parse_index();
      expect(",");
      std::size_t j = parse_index();
      expect(")");
      return PredExpr::permute(std::move(inner), i, j);
    }
    if (t.text == "closure") {
      expect("(");
      PredExpr inner = parse_pexpr();
      expect(")");
      return PredExpr::closure(std::move(inner));
    }
    if (!schema_.find(t.text)) fail("unknown fluent '" + t.text + "'", t.pos);
    return PredExpr::primitive(t.text);
  }

  Args parse_args() {
    expect("(");
    Args out;
    for (;;) {
      Token f = next();
      if (f.kind != Tok::kIdent && f.kind != Tok::kInt) fail("expected an argument filter", f.pos);
      out.push_back(f.text);
      Token sep = peek();
      if (sep.text == "@" || sep.text == ",") {
        next();
        continue;
      }
      break;
    }
    expect(")");
    return out;
  }

  std::string_view text_;
  const Schema& schema_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses concept text into its canonical AST, checking names and arities.
inline Concept parse_concept(std::string_view text, const Schema& schema) {
  return detail::ConceptParser(text, schema).parse();
}

}  // namespace meip
