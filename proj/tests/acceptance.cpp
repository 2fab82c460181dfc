// Acceptance criteria: one PASS/FAIL line each, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "strata/cli.hpp"
#include "strata/dl.hpp"
#include "strata/engine.hpp"
#include "strata/parser.hpp"
#include "strata/stratify.hpp"

using namespace strata;
namespace orc = strata::oracle;

namespace {

struct Criterion {
  int id;
  const char* name;
  double limitSeconds;
  std::function<std::string()> run;  // empty string on success
};

Program load(const std::string& name) { return parseProgram(orc::readFile(orc::programPath(name))); }

std::set<std::vector<std::string>> printed(const ModelSet& ms) {
  std::set<std::vector<std::string>> out;
  for (const auto& m : ms) {
    std::vector<std::string> atoms;
    for (const auto& a : m.atoms()) atoms.push_back(printAtom(a));
    out.insert(atoms);
  }
  return out;
}

std::string possibleModels() {
  auto ms = saturate(load("split.rules"), {});
  std::set<std::vector<std::string>> want = {{"a(0)", "b(0)"}, {"a(0)", "b(0)", "c(0)"}};
  if (printed(ms) != want || ms.size() != 2) return "unexpected model set";
  return {};
}

std::string stratification() {
  Program p = load("sbtp_five.rules");
  if (p.rules.size() != 5) return "expected five rules";
  if (!analyze(p).ok()) return "SBTP rejects a rule";
  std::set<std::size_t> rejected;
  for (const auto& v : analyze(p, {.sbtOnly = true}).violations) rejected.insert(v.rule);
  if (rejected != std::set<std::size_t>{2, 3, 4}) return "SBT-only accepts a rule other than 1-2";
  return {};
}

std::string matcherOracle() {
  orc::Rng rng(20200702);
  auto dom = orc::matcherDomain();
  std::set<std::string> kinds;
  int cases = 0;
  while (cases < 2000) {
    orc::MatcherCase c;
    if (!orc::randomMatcherCase(rng, c)) continue;
    ++cases;
    auto kk = orc::literalKinds(c.body);
    kinds.insert(kk.begin(), kk.end());
    std::set<Substitution> got;
    try {
      auto all = matchAll(c.interpretation, c.body);
      got.insert(all.begin(), all.end());
    } catch (const std::exception& e) {
      return "matcher threw on '" + c.text + "': " + e.what();
    }
    if (got != orc::groundBody(c.interpretation, c.body, dom)) return "disagreement on '" + c.text + "'";
  }
  for (const char* k : {"ordinary", "cmp<", "cmp<=", "cmp>", "cmp>=", "builtin", "LET", "CHOOSE", "MATCH",
                        "COLLECT", "NOT"}) {
    if (!kinds.count(k)) return std::string("no case exercised ") + k;
  }
  return {};
}

std::string modelOracle() {
  orc::Rng rng(1984);
  int accepted = 0, tries = 0;
  while (accepted < 1000) {
    if (++tries > 50000) return "too few stratified programs generated";
    auto prog = orc::randomPropProgram(rng);
    Program p = parseProgram(prog.text());
    try {
      Engine e(p);
      auto got = orc::toAtomSets(e.saturate({}));
      ++accepted;
      if (got != orc::splitModels(prog)) return "disagreement on\n" + prog.text();
    } catch (const ProgramRejected&) {
    }
  }
  return {};
}

const std::set<std::string> kTrafficPreds = {"State", "FullState", "MovingState", "Faulty"};

std::string traffic() {
  Program p = load("traffic.rules");
  orc::Rng rng(7);
  for (int i = 0; i < 150; ++i) {
    auto stream = orc::randomStream(rng);
    auto ms = saturate(p, orc::changeFacts(stream));
    if (ms.size() != 1) return "expected exactly one model";
    if (orc::project(ms[0], kTrafficPreds) != orc::trafficExpected(stream)) {
      return "disagreement on stream " + std::to_string(i);
    }
  }
  return {};
}

std::string incrementality() {
  Program p = load("traffic.rules");
  orc::Rng rng(7);
  for (int i = 0; i < 150; ++i) {
    auto facts = orc::changeFacts(orc::randomStream(rng));
    std::size_t cut = std::uniform_int_distribution<std::size_t>(0, facts.size())(rng);
    Engine e(p);
    e.saturate({facts.begin(), facts.begin() + cut});
    auto inc = e.addFacts({facts.begin() + cut, facts.end()});
    if (inc != saturate(p, facts)) return "model sets differ on stream " + std::to_string(i);
  }
  return {};
}

// Models of every DL run above, with the functional roles of their KB.
std::vector<std::pair<Interpretation, std::set<dl::Role>>> dlModels;

std::string dlExample() {
  auto kb = dl::parseKB(orc::readFile(orc::programPath("family.kb")));
  auto sat = dl::isSatisfiable(kb);
  if (sat.verdict != dl::Verdict::Sat) return "example KB not SAT";
  for (const auto& m : sat.models) dlModels.push_back({m, kb.functional});
  auto fred = dl::Individual::named("Fred"), bob = dl::Individual::named("Bob");
  auto rich = dl::Concept::name("Rich"), poor = dl::Concept::name("Poor");
  if (dl::entailedInstance(sat, fred, poor) != dl::Entailment::Entailed) return "Fred:Poor not entailed";
  if (dl::entailedInstance(sat, bob, rich) != dl::Entailment::NotEntailed) return "Bob:Rich entailed";
  if (dl::entailedInstance(sat, bob, poor) != dl::Entailment::NotEntailed) return "Bob:Poor entailed";
  kb.concepts.push_back({fred, rich});
  auto unsat = dl::isSatisfiable(kb);
  if (unsat.verdict != dl::Verdict::Unsat) return "adding Fred:Rich is not UNSAT";
  return {};
}

std::string dlBlocking() {
  for (bool functional : {false, true}) {
    auto kb = dl::parseKB(orc::readFile(orc::programPath("cycle.kb")));
    if (functional) kb.functional.insert(dl::Role::named("r"));
    Limits lim;
    lim.maxTime = 100;
    auto sat = dl::isSatisfiable(kb, lim);
    if (sat.verdict != dl::Verdict::Sat) return "cyclic KB did not terminate as SAT";
    bool blocked = false;
    for (const auto& m : sat.models) blocked = blocked || m.bucket("Blocked") != nullptr;
    if (!blocked) return "no Blocked atom derived";
    for (const auto& m : sat.models) dlModels.push_back({m, kb.functional});
  }
  return {};
}

std::string functionalInvariant() {
  if (dlModels.empty()) return "no models collected";
  for (const auto& [m, roles] : dlModels) {
    auto bad = dl::functionalViolations(m, roles);
    if (!bad.empty()) return "violation at " + bad.front();
  }
  return {};
}

std::string determinism() {
  auto path = [](const char* n) { return orc::programPath(n); };
  std::vector<std::vector<std::string>> calls = {
      {"run", path("split.rules")},
      {"run", path("split.rules"), "--json"},
      {"run", path("sbtp_five.rules")},
      {"run", path("traffic.rules"), "--facts", "Change=" + path("traffic.csv"), "--header"},
      {"run", path("traffic.rules"), "--facts", "Change=" + path("traffic.csv"), "--header", "--json"},
      {"trace", path("traffic.rules"), "--facts", "Change=" + path("traffic.csv"), "--header"},
      {"dl", path("family.kb"), "--show-models"},
      {"dl", path("family.kb"), "--entails", "Fred : Poor", "--json"},
      {"dl", path("cycle.kb"), "--max-time", "100", "--show-models"},
  };
  for (const auto& args : calls) {
    std::string first;
    for (int k = 0; k < 2; ++k) {
      std::ostringstream out, err;
      int code = runCli(args, out, err);
      std::string all = std::to_string(code) + "\n" + out.str() + err.str();
      if (k == 0) first = all;
      else if (all != first) return "output differs for " + args[0] + " " + args[1];
    }
  }
  return {};
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "possible models of the split example", 1, possibleModels},
      {2, "SBTP/SBT classification of the five rules", 1, stratification},
      {3, "matcher equals brute-force grounding", 60, matcherOracle},
      {4, "saturate equals split-program enumeration", 120, modelOracle},
      {5, "traffic lights equal stream scanning", 30, traffic},
      {6, "addFacts equals batch saturation", 30, incrementality},
      {7, "DL example KB verdicts", 10, dlExample},
      {8, "DL termination by blocking", 10, dlBlocking},
      {9, "functional-role invariant", 1, functionalInvariant},
      {10, "double-run byte equality", 30, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string why;
    try {
      why = c.run();
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (why.empty() && secs >= c.limitSeconds) why = "too slow";
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.3f s, limit %.0f s", secs, c.limitSeconds);
    std::cout << (why.empty() ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << " (" << timing << ")";
    if (!why.empty()) std::cout << ": " << why;
    std::cout << "\n";
    failed += !why.empty();
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
