#include "doctest.h"
#include "oracles.hpp"
#include "strata/dl.hpp"
#include "strata/parser.hpp"

using namespace strata;
using namespace strata::dl;

namespace {

std::string show(const Concept& c) { return printTerm(c.term()); }

KnowledgeBase family() { return parseKB(oracle::readFile(oracle::programPath("family.kb"))); }

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("roles normalise double inversion") {
  Role r = Role::named("father");
  CHECK(Role::inverse(Role::inverse(r)) == r);
  CHECK(Role::inverse(r).isInverse());
  CHECK(printTerm(Role::inverse(r).term()) == "Inv(RN(\"father\"))");
  CHECK(parseRole("Inv(Inv(father))") == r);
}

TEST_CASE("concept syntax") {
  CHECK(show(parseConcept("Person")) == "CN(\"Person\")");
  CHECK(show(parseConcept("Exists(father, Person)")) == "Exists(RN(\"father\"), CN(\"Person\"))");
  CHECK(show(parseConcept("Forall(Inv(father), Rich)")) == "Forall(Inv(RN(\"father\")), CN(\"Rich\"))");
  CHECK(parseConcept("Top").kind() == Concept::Kind::Top);
  CHECK(parseConcept("And2(A, B)").operand(1) == Concept::name("B"));
  CHECK_THROWS_AS(parseConcept("Exists(father)"), UnsupportedGCI);
  CHECK_THROWS_AS(parseConcept("AtLeast(2, r, A)"), UnsupportedGCI);
}

TEST_CASE("nnf") {
  auto A = Concept::name("A"), B = Concept::name("B");
  auto r = Role::named("r");
  CHECK(nnf(Concept::negation(Concept::conjunction(A, B))) ==
        Concept::disjunction(Concept::negation(A), Concept::negation(B)));
  CHECK(nnf(Concept::negation(Concept::exists(r, A))) == Concept::forall(r, Concept::negation(A)));
  CHECK(nnf(Concept::negation(Concept::negation(A))) == A);
  CHECK(nnf(Concept::negation(Concept::top())) == Concept::bottom());
  CHECK(nnf(Concept::conjunction(A, Concept::top())) == A);
  CHECK(nnf(Concept::disjunction(A, Concept::top())) == Concept::top());
}

TEST_CASE("property: nnf is idempotent and pushes negation to names") {
  oracle::Rng rng(8);
  auto gen = [&](auto&& self, int depth) -> Concept {
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    if (depth == 0) return pick(6) == 0 ? Concept::top() : Concept::name(pick(2) ? "A" : "B");
    Role r = pick(2) ? Role::named("r") : Role::inverse(Role::named("r"));
    switch (pick(5)) {
      case 0: return Concept::negation(self(self, depth - 1));
      case 1: return Concept::conjunction(self(self, depth - 1), self(self, depth - 1));
      case 2: return Concept::disjunction(self(self, depth - 1), self(self, depth - 1));
      case 3: return Concept::exists(r, self(self, depth - 1));
      default: return Concept::forall(r, self(self, depth - 1));
    }
  };
  auto negationOnNames = [](auto&& self, const Concept& c) -> bool {
    switch (c.kind()) {
      case Concept::Kind::Not: return c.operand().kind() == Concept::Kind::Name;
      case Concept::Kind::And:
      case Concept::Kind::Or: return self(self, c.operand(0)) && self(self, c.operand(1));
      case Concept::Kind::Exists:
      case Concept::Kind::Forall: return self(self, c.operand());
      default: return true;
    }
  };
  for (int i = 0; i < 500; ++i) {
    Concept c = gen(gen, 3);
    Concept n = nnf(c);
    CHECK(nnf(n) == n);
    CHECK(negationOnNames(negationOnNames, n));
  }
}

TEST_CASE("KB file format") {
  KnowledgeBase kb = family();
  CHECK(kb.tbox.size() == 4);
  CHECK(kb.concepts.size() == 2);
  CHECK(kb.roles.size() == 2);
  CHECK(kb.functional == std::set<Role>{Role::named("father")});
  CHECK_THROWS_AS(parseKB("gci: A B\n"), KBParseError);
  try {
    parseKB("abox: a : A\nfunctional: Inv(r)\n");
    FAIL("expected an error");
  } catch (const KBParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("GCI translation") {
  std::string text = translateTBox(family());
  CHECK(contains(text,
                 "IsA(x, CN(\"Rich\"), time) OR IsA(x, CN(\"Poor\"), time) :- IsA(x, CN(\"Person\"), time)."));
  CHECK(contains(text, "IsA(x, Forall(Inv(RN(\"father\")), CN(\"Rich\")), time) :- IsA(x, CN(\"Rich\"), time)."));
  CHECK(contains(text, "FAIL :- IsA(x, CN(\"Poor\"), time), IsA(x, CN(\"Rich\"), time)."));
  CHECK(contains(text, "IsA(x, Exists(RN(\"father\"), CN(\"Person\")), time) :- IsA(x, CN(\"Person\"), time)."));
}

TEST_CASE("negated and universal premises move to the head") {
  std::string text = translateTBox(parseKB("gci: And2(A, Not(B)) SUBSUMED C\n"));
  CHECK(contains(text, "IsA(x, CN(\"C\"), time) OR IsA(x, CN(\"B\"), time) :- IsA(x, CN(\"A\"), time)."));
  text = translateTBox(parseKB("gci: Forall(r, A) SUBSUMED C\n"));
  CHECK(contains(text, "Exists(RN(\"r\"), Not(CN(\"A\")))"));
}

TEST_CASE("existential premises expand in place") {
  std::string text = translateTBox(parseKB("gci: Exists(r, A) SUBSUMED Bottom\n"));
  CHECK(contains(text, "FAIL :- "));
  CHECK(contains(text, "Neighbour(x, RN(\"r\"), "));
}

TEST_CASE("translated programs pass the stratification check") {
  Translation tr = translateKB(family());
  CHECK(analyze(tr.program).ok());
  CHECK(tr.facts.size() == 4);
  Analysis a = analyze(tr.program);
  CHECK(a.strata.of("Blocked") < a.strata.of("TimePlus1"));
  CHECK(a.strata.of("Label") < a.strata.of("TimePlus1"));
}

TEST_CASE("example KB verdicts") {
  SatResult sat = isSatisfiable(family());
  REQUIRE((sat.verdict == Verdict::Sat));
  CHECK(sat.models.size() >= 2);
  CHECK(sat.witness.has_value());
  auto fred = Individual::named("Fred"), bob = Individual::named("Bob"), anne = Individual::named("Anne");
  CHECK((entailedInstance(sat, fred, Concept::name("Poor")) == Entailment::Entailed));
  CHECK((entailedInstance(sat, bob, Concept::name("Rich")) == Entailment::NotEntailed));
  CHECK((entailedInstance(sat, bob, Concept::name("Poor")) == Entailment::NotEntailed));
  CHECK((entailedInstance(sat, anne, Concept::name("Person")) == Entailment::Entailed));
  CHECK((entailedInstance(sat, anne, Concept::name("Rich")) == Entailment::NotEntailed));
  CHECK((entailedInstance(sat, fred, Concept::exists(Role::named("father"), Concept::name("Person"))) ==
         Entailment::Entailed));
}

TEST_CASE("both answers for Bob occur") {
  SatResult sat = isSatisfiable(family());
  bool rich = false, poor = false;
  for (const auto& m : sat.models) {
    for (const auto& a : m.atoms()) {
      if (a.predicate != "IsA" || a.time.value() != *m.maxTime()) continue;
      if (a.args[0] != Individual::named("Bob").term()) continue;
      rich = rich || a.args[1] == Concept::name("Rich").term();
      poor = poor || a.args[1] == Concept::name("Poor").term();
    }
  }
  CHECK(rich);
  CHECK(poor);
}

TEST_CASE("unsatisfiable knowledge bases") {
  KnowledgeBase kb = family();
  kb.concepts.push_back({Individual::named("Fred"), Concept::name("Rich")});
  SatResult sat = isSatisfiable(kb);
  CHECK((sat.verdict == Verdict::Unsat));
  CHECK(sat.models.empty());
  CHECK_FALSE(sat.witness);

  KnowledgeBase clash = parseKB("abox: a : And2(C, Not(C))\n");
  CHECK((isSatisfiable(clash).verdict == Verdict::Unsat));
  KnowledgeBase bottom = parseKB("abox: a : Bottom\n");
  CHECK((isSatisfiable(bottom).verdict == Verdict::Unsat));
}

TEST_CASE("universal restrictions propagate over inverse roles") {
  KnowledgeBase kb = parseKB(
      "gci: A SUBSUMED Forall(Inv(r), B)\n"
      "abox: (a, b) : r\n"
      "abox: b : A\n");
  CHECK((entailedInstance(kb, Individual::named("a"), Concept::name("B")) == Entailment::Entailed));
}

TEST_CASE("functional roles reuse the existing neighbour") {
  KnowledgeBase kb = parseKB(
      "gci: A SUBSUMED Exists(f, B)\n"
      "abox: a : A\n"
      "abox: (a, b) : f\n"
      "functional: f\n");
  SatResult sat = isSatisfiable(kb);
  REQUIRE((sat.verdict == Verdict::Sat));
  CHECK((entailedInstance(sat, Individual::named("b"), Concept::name("B")) == Entailment::Entailed));
  for (const auto& m : sat.models) CHECK(functionalViolations(m, kb.functional).empty());
}

TEST_CASE("blocking stops infinite successor chains") {
  Limits lim;
  lim.maxTime = 100;
  SatResult sat = isSatisfiable(parseKB(oracle::readFile(oracle::programPath("cycle.kb"))), lim);
  REQUIRE((sat.verdict == Verdict::Sat));
  for (const auto& m : sat.models) {
    CHECK(m.bucket("Blocked") != nullptr);
    CHECK(*m.maxTime() < 100);
  }
}

TEST_CASE("limits make the verdict undecided") {
  KnowledgeBase kb = parseKB("gci: Top SUBSUMED Exists(r, A)\ngci: A SUBSUMED Exists(s, B)\nabox: a : A\n");
  Limits lim;
  lim.maxSteps = 5;
  SatResult sat = isSatisfiable(kb, lim);
  CHECK((sat.verdict != Verdict::Unsat));
  CHECK_FALSE(sat.limit.empty());
  CHECK((entailedInstance(sat, Individual::named("a"), Concept::name("A")) == Entailment::Undecided));
}

TEST_CASE("functional invariant checker") {
  Interpretation bad({Atom{"Neighbour", TimeTerm::constant(0),
                           {Individual::named("a").term(), Role::named("f").term(), Individual::named("b").term()}},
                      Atom{"Neighbour", TimeTerm::constant(0),
                           {Individual::named("a").term(), Role::named("f").term(), Individual::named("c").term()}}});
  CHECK(functionalViolations(bad, {Role::named("f")}).size() == 1);
  CHECK(functionalViolations(bad, {Role::named("g")}).empty());
}
