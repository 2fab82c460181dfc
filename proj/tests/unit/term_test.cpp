#include <random>

#include "doctest.h"
#include "strata/parser.hpp"
#include "strata/term.hpp"

using namespace strata;

namespace {

Term I(std::int64_t v) { return Term::integer(v); }
Term S(const char* s) { return Term::string(s); }
Term call(const char* op, std::vector<Term> args) { return Term::call(op, std::move(args)); }

}  // namespace

TEST_CASE("canonical kind order") {
  std::vector<Term> ts = {Term::var("x"), call("+", {I(1), I(2)}), Term::ctor("f", {}), Term::seq({}),
                          Term::set({}), S("a"), I(3), Term::boolean(true)};
  std::sort(ts.begin(), ts.end());
  CHECK(ts[0].kind() == Term::Kind::Bool);
  CHECK(ts[1].kind() == Term::Kind::Int);
  CHECK(ts[2].kind() == Term::Kind::Str);
  CHECK(ts[3].kind() == Term::Kind::Set);
  CHECK(ts[4].kind() == Term::Kind::Seq);
  CHECK(ts[5].kind() == Term::Kind::Ctor);
  CHECK(ts[6].kind() == Term::Kind::Call);
  CHECK(ts[7].kind() == Term::Kind::Var);
}

TEST_CASE("sets are sorted and deduplicated") {
  Term s = Term::set({I(3), I(1), I(3), I(2)});
  REQUIRE(s.args().size() == 3);
  CHECK(s.args()[0] == I(1));
  CHECK(s.args()[2] == I(3));
  CHECK(s == Term::set({I(2), I(1), I(3)}));
  CHECK(Term::seq({I(1), I(2)}) != Term::seq({I(2), I(1)}));
}

TEST_CASE("groundness and variables") {
  Term t = Term::ctor("f", {Term::var("x"), Term::ctor("g", {Term::var("y"), I(1)})});
  CHECK_FALSE(t.isGround());
  CHECK(varsOf(t) == std::set<std::string>{"x", "y"});
  Substitution s;
  s.bind("x", I(1));
  s.bind("y", S("b"));
  CHECK(apply(s, t).isGround());
  CHECK(printTerm(apply(s, t)) == "f(1, g(\"b\", 1))");
}

TEST_CASE("arithmetic and comparison builtins") {
  CHECK(evalGround(call("+", {I(2), I(3)})) == I(5));
  CHECK(evalGround(call("-", {I(2), I(3)})) == I(-1));
  CHECK(evalGround(call("*", {I(4), I(3)})) == I(12));
  CHECK(evalGround(call("/", {I(7), I(2)})) == I(3));
  CHECK(evalGround(call("%", {I(7), I(2)})) == I(1));
  CHECK(evalGround(call("<", {I(1), I(2)})) == Term::boolean(true));
  CHECK(evalGround(call(">=", {I(1), I(2)})) == Term::boolean(false));
  CHECK(evalGround(call("==", {S("a"), S("a")})) == Term::boolean(true));
  CHECK(evalGround(call("&&", {Term::boolean(true), Term::boolean(false)})) == Term::boolean(false));
  CHECK(evalGround(call("!", {Term::boolean(false)})) == Term::boolean(true));
}

TEST_CASE("collection builtins") {
  Term s = Term::set({I(1), I(2)});
  CHECK(evalGround(call("size", {s})) == I(2));
  CHECK(evalGround(call("contains", {s, I(2)})) == Term::boolean(true));
  CHECK(evalGround(call("contains", {s, I(5)})) == Term::boolean(false));
  CHECK(evalGround(call("toSet", {Term::seq({I(2), I(1), I(2)})})) == s);
  CHECK(evalGround(call("range", {I(1), I(3)})) == Term::seq({I(1), I(2), I(3)}));
  CHECK(evalGround(call("union", {s, Term::set({I(3)})})) == Term::set({I(1), I(2), I(3)}));
  CHECK(evalGround(call("isEmpty", {Term::set({})})) == Term::boolean(true));
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(evalGround(call("+", {I(1), S("a")})), TypeMismatch);
  CHECK_THROWS_AS(evalGround(call("/", {I(1), I(0)})), EvalError);
  CHECK_THROWS_AS(evalGround(call("+", {Term::var("x"), I(1)})), NonGroundEvaluation);
}

TEST_CASE("evaluation inside constructors") {
  Term t = Term::ctor("f", {call("+", {I(1), I(1)})});
  CHECK(evalGround(t) == Term::ctor("f", {I(2)}));
}

TEST_CASE("foldGround leaves variables alone") {
  Term t = Term::ctor("f", {call("+", {I(1), I(1)}), call("+", {Term::var("x"), I(1)})});
  Term f = foldGround(t);
  CHECK(f.args()[0] == I(2));
  CHECK(f.args()[1].kind() == Term::Kind::Call);
}

TEST_CASE("matchTerm") {
  Substitution s;
  Term pat = Term::ctor("f", {Term::var("x"), Term::var("x")});
  CHECK(matchTerm(pat, Term::ctor("f", {I(1), I(1)}), s));
  CHECK(*s.lookup("x") == I(1));
  Substitution s2;
  CHECK_FALSE(matchTerm(pat, Term::ctor("f", {I(1), I(2)}), s2));
  Substitution s3;
  s3.bind("x", I(2));
  CHECK_FALSE(matchTerm(Term::var("x"), I(1), s3));
}

TEST_CASE("atom order is time first") {
  Atom a{"z", TimeTerm::constant(1), {}};
  Atom b{"a", TimeTerm::constant(2), {}};
  Atom c{"b", TimeTerm::constant(1), {I(0)}};
  CHECK(a < b);
  CHECK(c < a);
  CHECK_FALSE(b < a);
}

TEST_CASE("property: compare is a total order consistent with equality and hash") {
  std::mt19937 rng(11);
  auto gen = [&](auto&& self, int depth) -> Term {
    switch (std::uniform_int_distribution<int>(0, depth > 0 ? 6 : 3)(rng)) {
      case 0: return I(std::uniform_int_distribution<int>(-2, 2)(rng));
      case 1: return S(std::uniform_int_distribution<int>(0, 1)(rng) ? "a" : "b");
      case 2: return Term::boolean(std::uniform_int_distribution<int>(0, 1)(rng));
      case 3: return Term::var(std::uniform_int_distribution<int>(0, 1)(rng) ? "x" : "y");
      case 4: return Term::set({self(self, depth - 1), self(self, depth - 1)});
      case 5: return Term::seq({self(self, depth - 1)});
      default: return Term::ctor("f", {self(self, depth - 1), self(self, depth - 1)});
    }
  };
  for (int i = 0; i < 2000; ++i) {
    Term a = gen(gen, 2), b = gen(gen, 2), c = gen(gen, 2);
    int ab = Term::compare(a, b);
    CHECK(ab == -Term::compare(b, a));
    CHECK((ab == 0) == (a == b));
    if (a == b) CHECK(a.hash() == b.hash());
    if (a < b && b < c) CHECK(a < c);
  }
}

TEST_CASE("property: printTerm round-trips through parseTerm") {
  std::mt19937 rng(3);
  auto gen = [&](auto&& self, int depth) -> Term {
    switch (std::uniform_int_distribution<int>(0, depth > 0 ? 5 : 2)(rng)) {
      case 0: return I(std::uniform_int_distribution<int>(-5, 20)(rng));
      case 1: return S(std::uniform_int_distribution<int>(0, 1)(rng) ? "red" : "q\"uote");
      case 2: return Term::boolean(std::uniform_int_distribution<int>(0, 1)(rng));
      case 3: return Term::set({self(self, depth - 1), self(self, depth - 1)});
      case 4: return Term::seq({self(self, depth - 1), self(self, depth - 1)});
      default: return Term::ctor("Node", {self(self, depth - 1)});
    }
  };
  for (int i = 0; i < 500; ++i) {
    Term t = gen(gen, 3);
    CHECK(evalGround(parseTerm(printTerm(t))) == t);
  }
}
