#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "strata/term.hpp"

namespace strata {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

enum class CompareOp { Lt, Le, Gt, Ge };

const char* toString(CompareOp op);

struct BodyLiteral;

// Ordered literal sequence; evaluated strictly left to right.
struct Body {
  std::vector<BodyLiteral> literals;

  bool empty() const { return literals.empty(); }
};

struct Ordinary {
  Atom atom;
};

// p(x op bound, args) STH inner: instances of p whose time x is as close as
// possible to `bound` from the side given by `op`. The time variable of
// `pattern` is x.
struct Comprehension {
  Atom pattern;
  CompareOp op = CompareOp::Le;
  TimeTerm bound;
  Body inner;

  const std::string& boundVar() const { return pattern.time.var; }
};

struct Builtin {
  Term expr;
};

struct Let {
  std::string var;
  Term value;
};

struct Choose {
  std::string var;
  Term candidates;
};

struct Match {
  Term pattern;
  Term scrutinee;
};

struct Collect {
  std::string var;
  Term templ;
  Body inner;
};

struct Negation {
  Body body;
};

struct BodyLiteral {
  std::variant<Ordinary, Comprehension, Builtin, Let, Choose, Match, Collect, Negation> node;
  SourceLoc loc;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
};

struct Head {
  // An empty atom list denotes FAIL.
  std::vector<Atom> atoms;

  bool isFail() const { return atoms.empty(); }
  static Head fail() { return Head{}; }
};

struct Annotation {
  std::string key;
  std::vector<std::string> values;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Rule {
  Head head;
  Body body;
  std::vector<Annotation> annotations;
  SourceLoc loc;

  // Values of all `@preds` annotations, in order.
  std::vector<std::string> declaredPreds() const;
  bool isFact() const;
};

// Parameter sorts recognised by `#pred` declarations and CSV ingestion.
enum class Sort { Time, Int, String, Bool, Term, Any };

struct PredicateDecl {
  std::string name;
  std::vector<Sort> params;  // exactly one Sort::Time
  std::vector<std::string> labels;

  std::size_t arity() const { return params.size(); }
  std::size_t timePosition() const;
};

struct Program {
  std::vector<Rule> rules;
  std::map<std::string, PredicateDecl> declarations;
  std::map<std::string, Term> constants;
  std::map<std::string, std::size_t> arities;

  // Argument index (0-based, counting the time argument) where the time
  // term is written. Defaults to 0.
  std::size_t timePosition(const std::string& predicate) const;
};

std::set<std::string> varsOf(const Body& b);
std::set<std::string> varsOf(const Head& h);
std::set<std::string> varsOf(const BodyLiteral& l);

// Variables bound by the positive part of the body, i.e. the domain of a
// body matcher. Variables local to NOT blocks and inner bodies are excluded.
std::set<std::string> positiveVars(const Body& b);

// Variables bound by one literal when evaluated under `bound`.
std::set<std::string> bindsOf(const BodyLiteral& l);

Body apply(const Substitution& s, const Body& b);
Head apply(const Substitution& s, const Head& h);

// Structural equality, ignoring source locations.
bool sameStructure(const Body& a, const Body& b);
bool sameStructure(const Rule& a, const Rule& b);
bool sameStructure(const Program& a, const Program& b);

}  // namespace strata
