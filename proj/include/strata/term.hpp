#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace strata {

// Canonical discrete time. Datetime literals are converted to epoch seconds
// by the parser, so every time point in the engine is an integer.
using TimePoint = std::int64_t;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when evaluation reaches a variable. Compile-time binding checks
// should make this unreachable for accepted programs.
class NonGroundEvaluation : public EvalError {
 public:
  using EvalError::EvalError;
};

class TypeMismatch : public EvalError {
 public:
  using EvalError::EvalError;
};

// Immutable first-order term with built-in value payloads. Copies share the
// underlying node.
class Term {
 public:
  // Declaration order is the canonical kind order used by operator<.
  enum class Kind : std::uint8_t { Bool, Int, Str, Set, Seq, Ctor, Call, Var };

  Term();  // Int 0

  static Term integer(std::int64_t v);
  static Term boolean(bool v);
  static Term string(std::string s);
  static Term var(std::string name);
  // Elements are sorted into canonical order and deduplicated.
  static Term set(std::vector<Term> elems);
  static Term seq(std::vector<Term> elems);
  static Term ctor(std::string symbol, std::vector<Term> args);
  // Application of a built-in operator; reduced by evalGround.
  static Term call(std::string op, std::vector<Term> args);

  Kind kind() const;
  bool isVar() const { return kind() == Kind::Var; }
  bool isValue() const;  // Bool, Int, Str, Set or Seq
  bool isGround() const;

  std::int64_t asInt() const;
  bool asBool() const;
  // Name of a variable, symbol of a constructor, operator of a call, or the
  // text of a string.
  const std::string& text() const;
  // Arguments of Ctor and Call, elements of Set and Seq.
  const std::vector<Term>& args() const;

  std::size_t hash() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }
  // Total canonical order: kind tag first, then payload, then arguments.
  static int compare(const Term& a, const Term& b);

  struct Node;

 private:
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

// Time term: a constant, a variable, or a variable plus a non-negative offset.
struct TimeTerm {
  std::string var;  // empty for constants
  TimePoint offset = 0;

  static TimeTerm constant(TimePoint t) { return TimeTerm{{}, t}; }
  static TimeTerm variable(std::string v, TimePoint k = 0) {
    return TimeTerm{std::move(v), k};
  }

  bool isGround() const { return var.empty(); }
  // Only meaningful for ground time terms.
  TimePoint value() const { return offset; }
  Term toTerm() const;

  friend auto operator<=>(const TimeTerm&, const TimeTerm&) = default;
};

struct Atom {
  std::string predicate;
  TimeTerm time;
  std::vector<Term> args;

  bool isGround() const;
  std::size_t hash() const;
  std::size_t arity() const { return args.size() + 1; }

  friend bool operator==(const Atom& a, const Atom& b);
  // Canonical model order: time, then predicate, then arguments.
  friend bool operator<(const Atom& a, const Atom& b);
};

struct AtomHash {
  std::size_t operator()(const Atom& a) const { return a.hash(); }
};

// Mapping from variable names to ground terms.
class Substitution {
 public:
  using Map = std::map<std::string, Term>;

  Substitution() = default;
  explicit Substitution(Map m) : map_(std::move(m)) {}

  const Term* lookup(const std::string& name) const;
  bool binds(const std::string& name) const { return map_.count(name) != 0; }
  void bind(const std::string& name, Term value);
  Substitution with(const std::string& name, Term value) const;

  const Map& map() const { return map_; }
  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }

  friend bool operator==(const Substitution&, const Substitution&) = default;
  friend bool operator<(const Substitution& a, const Substitution& b) {
    return a.map_ < b.map_;
  }

 private:
  Map map_;
};

Term apply(const Substitution& s, const Term& t);
TimeTerm apply(const Substitution& s, const TimeTerm& t);
Atom apply(const Substitution& s, const Atom& a);

void collectVars(const Term& t, std::set<std::string>& out);
std::set<std::string> varsOf(const Term& t);
std::set<std::string> varsOf(const Atom& a);

// Reduces every built-in call in a ground term to a value. Constructor
// arguments are evaluated recursively.
Term evalGround(const Term& t);
Atom evalGround(const Atom& a);

// Evaluates every ground built-in call inside `t`, leaving non-ground parts
// untouched. Used to prepare patterns before matching.
Term foldGround(const Term& t);

// True when `op` names a built-in function usable in prefix call syntax.
bool isBuiltinFunction(const std::string& name);

// One-way matching: binds variables in `pattern` so that it equals `ground`.
// Variables already bound in `s` must agree.
bool matchTerm(const Term& pattern, const Term& ground, Substitution& s);

}  // namespace strata

template <>
struct std::hash<strata::Term> {
  std::size_t operator()(const strata::Term& t) const { return t.hash(); }
};

template <>
struct std::hash<strata::Atom> {
  std::size_t operator()(const strata::Atom& a) const { return a.hash(); }
};
