#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "strata/engine.hpp"

// ALCIF knowledge bases compiled to rule programs over reified IsA/HasA
// atoms. Concepts, roles and individuals are ordinary constructor terms.
namespace strata::dl {

class UnsupportedGCI : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KBParseError : public std::runtime_error {
 public:
  KBParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class Role {
 public:
  static Role named(const std::string& name);
  static Role inverse(const Role& r);  // Inv(Inv(r)) = r
  // Accepts RN(name) and Inv(...) terms; throws UnsupportedGCI otherwise.
  static Role fromTerm(const Term& t);

  bool isInverse() const;
  const Term& term() const { return t_; }

  friend bool operator==(const Role& a, const Role& b) { return a.t_ == b.t_; }
  friend bool operator<(const Role& a, const Role& b) { return a.t_ < b.t_; }

 private:
  explicit Role(Term t) : t_(std::move(t)) {}
  Term t_;
};

class Concept {
 public:
  enum class Kind { Name, Top, Bottom, Not, And, Or, Exists, Forall };

  static Concept name(const std::string& n);
  static Concept top();
  static Concept bottom();
  static Concept negation(const Concept& c);
  static Concept conjunction(const Concept& a, const Concept& b);
  static Concept disjunction(const Concept& a, const Concept& b);
  static Concept exists(const Role& r, const Concept& c);
  static Concept forall(const Role& r, const Concept& c);
  static Concept fromTerm(const Term& t);

  Kind kind() const;
  // Sub-concepts of Not/And/Or/Exists/Forall.
  Concept operand(std::size_t i = 0) const;
  Role role() const;  // Exists/Forall only
  const Term& term() const { return t_; }

  friend bool operator==(const Concept& a, const Concept& b) { return a.t_ == b.t_; }
  friend bool operator<(const Concept& a, const Concept& b) { return a.t_ < b.t_; }

 private:
  explicit Concept(Term t) : t_(std::move(t)) {}
  Term t_;
};

class Individual {
 public:
  static Individual named(const std::string& n);
  static Individual fromTerm(const Term& t);
  const Term& term() const { return t_; }

  friend bool operator==(const Individual& a, const Individual& b) { return a.t_ == b.t_; }
  friend bool operator<(const Individual& a, const Individual& b) { return a.t_ < b.t_; }

 private:
  explicit Individual(Term t) : t_(std::move(t)) {}
  Term t_;
};

struct GCI {
  Concept sub;
  Concept sup;
};

struct ConceptAssertion {
  Individual individual;
  Concept type;
};

struct RoleAssertion {
  Individual from;
  Individual to;
  Role role;
};

struct KnowledgeBase {
  std::vector<GCI> tbox;
  std::vector<ConceptAssertion> concepts;
  std::vector<RoleAssertion> roles;
  std::set<Role> functional;
};

// Negation normal form with Top/Bottom simplification.
Concept nnf(const Concept& c);

// Concept syntax: constructor terms (CN("A"), And2(..), Exists(RN("r"), ..))
// where bare identifiers stand for concept, role and individual names and
// Top/Bottom for the constants.
Concept parseConcept(std::string_view text);
Role parseRole(std::string_view text);
Individual parseIndividual(std::string_view text);
KnowledgeBase parseKB(std::string_view text);

// Declarations plus the tableau library rules, as rule-language source.
std::string libraryRules(const std::set<Role>& functional = {});

struct Translation {
  Program program;
  std::vector<Atom> facts;
};

// Rule-language source for the TBox part of `kb`.
std::string translateTBox(const KnowledgeBase& kb);
Translation translateKB(const KnowledgeBase& kb);

enum class Verdict { Sat, Unsat, Undecided };

struct SatResult {
  Verdict verdict = Verdict::Undecided;
  ModelSet models;
  std::optional<Interpretation> witness;
  std::string limit;  // set when undecided
};

SatResult isSatisfiable(const KnowledgeBase& kb, Limits limits = {});

enum class Entailment { Entailed, NotEntailed, Undecided };

// IsA(a, nnf(c), τ) at each model's final time layer, for every model.
Entailment entailedInstance(const SatResult& sat, const Individual& a, const Concept& c);
Entailment entailedInstance(const KnowledgeBase& kb, const Individual& a, const Concept& c,
                            Limits limits = {});

// Individuals with two distinct neighbours over a functional role in one
// time layer; empty when the invariant holds.
std::vector<std::string> functionalViolations(const Interpretation& model,
                                              const std::set<Role>& functional);

const char* toString(Verdict v);
const char* toString(Entailment e);

}  // namespace strata::dl
