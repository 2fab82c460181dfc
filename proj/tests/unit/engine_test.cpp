#include "doctest.h"
#include "oracles.hpp"
#include "strata/engine.hpp"
#include "strata/parser.hpp"

using namespace strata;

namespace {

std::vector<std::vector<std::string>> shown(const ModelSet& ms) {
  std::vector<std::vector<std::string>> out;
  for (const auto& m : ms) {
    std::vector<std::string> atoms;
    for (const auto& a : m.atoms()) atoms.push_back(printAtom(a));
    out.push_back(atoms);
  }
  return out;
}

ModelSet run(const std::string& text, Limits lim = {}) { return saturate(parseProgram(text), {}, lim); }

Atom fact(const std::string& text, const Program* p = nullptr) { return parseAtom(text, p); }

}  // namespace

TEST_CASE("possible models of the split example") {
  auto ms = run(oracle::readFile(oracle::programPath("split.rules")));
  CHECK(shown(ms) == std::vector<std::vector<std::string>>{{"a(0)", "b(0)"}, {"a(0)", "b(0)", "c(0)"}});
}

TEST_CASE("splitHead enumerates subsets smallest first") {
  Program p = parseProgram("a(time) OR c(time) OR a(time) :- b(time).\nFAIL :- b(time).");
  Substitution s;
  s.bind("time", Term::integer(0));
  auto subsets = splitHead(p.rules[0].head, s);
  REQUIRE(subsets);
  std::vector<std::vector<std::string>> got;
  for (const auto& sub : *subsets) {
    std::vector<std::string> names;
    for (const auto& a : sub) names.push_back(printAtom(a));
    got.push_back(names);
  }
  CHECK(got == std::vector<std::vector<std::string>>{{"a(0)"}, {"c(0)"}, {"a(0)", "c(0)"}});
  CHECK_FALSE(splitHead(p.rules[1].head, s));
}

TEST_CASE("FAIL closes paths") {
  CHECK(run("a(0).\nFAIL :- a(0).").empty());
  CHECK(shown(run("a(0) OR b(0).\nFAIL :- a(0).")) == std::vector<std::vector<std::string>>{{"b(0)"}});
  CHECK(run("FAIL.").empty());
}

TEST_CASE("time advances through derived atoms") {
  auto ms = run("p(0).\np(time + 1) :- p(time), time < 4.");
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].size() == 5);
  CHECK(ms[0].maxTime() == 4);
}

TEST_CASE("stratified negation") {
  auto ms = run("q(0). q(1). r(1).\np(time) :- q(time), NOT(r(time)).");
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].contains(fact("p(0)")));
  CHECK_FALSE(ms[0].contains(fact("p(1)")));
}

TEST_CASE("negation over the past") {
  auto ms = run("e(1). e(2). e(5).\nfirst(time) :- e(time), NOT(e(t), t < time).");
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].contains(fact("first(1)")));
  CHECK_FALSE(ms[0].contains(fact("first(2)")));
}

TEST_CASE("an annotated rule can restart a lower stratum") {
  auto ms = run("q(0).\np(time) : @preds(\"Late\") :- q(time), NOT(r(time)).\nr(time) :- p(time).");
  REQUIRE(ms.size() == 1);
  CHECK(shown(ms)[0] == std::vector<std::string>{"p(0)", "q(0)", "r(0)"});
}

TEST_CASE("disjunctions branch at each time point") {
  auto ms = run("e(0). e(1).\na(time) OR b(time) :- e(time).");
  CHECK(ms.size() == 9);
}

TEST_CASE("rejected programs") {
  CHECK_THROWS_AS(Engine(parseProgram("p(time) :- q(time), NOT(p(time)).")), ProgramRejected);
  CHECK_THROWS_AS(Engine(parseProgram("a(time) :- b(time), c(t >= time).")), ProgramRejected);
  CHECK_THROWS_AS(Engine(parseProgram(oracle::readFile(oracle::programPath("sbtp_five.rules"))), {.sbtOnly = true}),
                  ProgramRejected);
  try {
    Engine e(parseProgram("a(time, x) :- b(time)."));
  } catch (const ProgramRejected& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].code == "RANGE");
  }
}

TEST_CASE("max-time limit") {
  Limits lim;
  lim.maxTime = 30;
  try {
    run("p(0).\np(time + 1) :- p(time).", lim);
    FAIL("expected a limit");
  } catch (const LimitExceeded& e) {
    CHECK(e.limit() == "max-time");
    CHECK(e.partial().empty());
  }
}

TEST_CASE("max-models limit keeps the models found so far") {
  Limits lim;
  lim.maxModels = 1;
  try {
    run("e(0).\na(0) OR b(0) OR c(0) :- e(0).", lim);
    FAIL("expected a limit");
  } catch (const LimitExceeded& e) {
    CHECK(e.limit() == "max-models");
    CHECK(e.partial().size() == 1);
  }
  lim.maxModels = 7;
  CHECK(run("e(0).\na(0) OR b(0) OR c(0) :- e(0).", lim).size() == 7);
}

TEST_CASE("max-steps limit") {
  Limits lim;
  lim.maxSteps = 3;
  CHECK_THROWS_AS(run("p(0).\np(time + 1) :- p(time), time < 10.", lim), LimitExceeded);
}

TEST_CASE("trace events") {
  Engine e(parseProgram(oracle::readFile(oracle::programPath("split.rules"))));
  std::vector<TraceEvent> events;
  e.setTrace([&](const TraceEvent& ev) { events.push_back(ev); });
  e.saturate({});
  REQUIRE_FALSE(events.empty());
  bool disjunctive = false;
  for (const auto& ev : events) disjunctive = disjunctive || ev.head.size() == 2;
  CHECK(disjunctive);
  CHECK(formatTrace(events.front()).rfind("[time 0 / stratum ", 0) == 0);
  TraceEvent fail{3, 1, 4, 0, {}, 0};
  CHECK(formatTrace(fail) == "[time 3 / stratum 1] rule#5 fired: FAIL");
}

TEST_CASE("facts passed to saturate") {
  Program p = parseProgram("#pred E(int, time).\n#pred F(int, time).\nF(x, time) :- E(x, time), x > 1.");
  auto ms = saturate(p, {fact("E(1, 5)", &p), fact("E(2, 6)", &p)});
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].contains(fact("F(2, 6)", &p)));
  CHECK(ms[0].size() == 3);
}

TEST_CASE("addFacts extends the retained paths") {
  Program p = parseProgram(oracle::readFile(oracle::programPath("traffic.rules")));
  Engine e(p);
  e.saturate({fact("Change(1, 1, \"green\")", &p)});
  auto ms = e.addFacts({fact("Change(3, 1, \"red\")", &p)});
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].contains(fact("Faulty(3, 1, 1)", &p)));
}

TEST_CASE("addFacts at the current time point reopens it") {
  Program p = parseProgram(oracle::readFile(oracle::programPath("traffic.rules")));
  std::vector<Atom> a = {fact("Change(2, 1, \"green\")", &p)};
  std::vector<Atom> b = {fact("Change(2, 2, \"red\")", &p)};
  Engine e(p);
  e.saturate(a);
  auto inc = e.addFacts(b);
  std::vector<Atom> all = a;
  all.insert(all.end(), b.begin(), b.end());
  CHECK(inc == saturate(p, all));
}

TEST_CASE("addFacts rejects facts older than the clock") {
  Program p = parseProgram(oracle::readFile(oracle::programPath("traffic.rules")));
  Engine e(p);
  e.saturate({fact("Change(5, 1, \"green\")", &p)});
  try {
    e.addFacts({fact("Change(3, 1, \"red\")", &p)});
    FAIL("expected StaleFact");
  } catch (const StaleFact& s) {
    CHECK(s.clock() == 5);
    CHECK(s.fact().time.value() == 3);
  }
}

TEST_CASE("property: incremental disjunctive saturation equals batch") {
  Program p = parseProgram(
      "a(time) OR b(time) :- e(time).\n"
      "c(time) :- e(time), a(t < time).\n"
      "FAIL :- b(time), c(time).\n");
  oracle::Rng rng(17);
  for (int i = 0; i < 60; ++i) {
    std::set<TimePoint> ts;
    for (int k = std::uniform_int_distribution<int>(1, 5)(rng); k > 0; --k) {
      ts.insert(std::uniform_int_distribution<int>(0, 8)(rng));
    }
    std::vector<Atom> facts;
    for (TimePoint t : ts) facts.push_back({"e", TimeTerm::constant(t), {}});
    std::size_t cut = std::uniform_int_distribution<std::size_t>(0, facts.size())(rng);
    Engine e(p);
    e.saturate({facts.begin(), facts.begin() + cut});
    CHECK(e.addFacts({facts.begin() + cut, facts.end()}) == saturate(p, facts));
  }
}

TEST_CASE("property: every model satisfies every rule instance") {
  oracle::Rng rng(2718);
  int n = 0;
  while (n < 200) {
    auto prog = oracle::randomPropProgram(rng);
    Program p = parseProgram(prog.text());
    ModelSet ms;
    try {
      ms = saturate(p, {});
    } catch (const ProgramRejected&) {
      continue;
    }
    ++n;
    for (const auto& m : ms) CHECK_MESSAGE(verifyModel(p, m).empty(), prog.text());
  }
  Program traffic = parseProgram(oracle::readFile(oracle::programPath("traffic.rules")));
  for (int i = 0; i < 30; ++i) {
    for (const auto& m : saturate(traffic, oracle::changeFacts(oracle::randomStream(rng)))) {
      CHECK(verifyModel(traffic, m).empty());
    }
  }
}

TEST_CASE("verifyModel reports violated instances") {
  Program p = parseProgram("a(time) :- b(time).");
  Interpretation bad({fact("b(2)")});
  CHECK(verifyModel(p, bad).size() == 1);
  Interpretation good({fact("b(2)"), fact("a(2)")});
  CHECK(verifyModel(p, good).empty());
}

TEST_CASE("property: model sets are canonical and deterministic") {
  oracle::Rng rng(31337);
  int n = 0;
  while (n < 100) {
    auto prog = oracle::randomPropProgram(rng);
    Program p = parseProgram(prog.text());
    try {
      auto a = saturate(p, {});
      auto b = saturate(p, {});
      ++n;
      CHECK(a == b);
      CHECK(std::is_sorted(a.begin(), a.end()));
      CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
      CHECK(canonicalModels(a) == a);
    } catch (const ProgramRejected&) {
    }
  }
}
