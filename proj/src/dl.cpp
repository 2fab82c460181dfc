#include "strata/dl.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "strata/parser.hpp"

namespace strata::dl {

KBParseError::KBParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

Term ctor(const char* name, std::vector<Term> args) { return Term::ctor(name, std::move(args)); }

bool isCtor(const Term& t, const char* name, std::size_t arity) {
  return t.kind() == Term::Kind::Ctor && t.text() == name && t.args().size() == arity;
}

// Bare identifiers and strings name things; anything else must already be
// the expected constructor.
std::optional<std::string> bareName(const Term& t) {
  if (t.isVar() || t.kind() == Term::Kind::Str) return t.text();
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Terms

Role Role::named(const std::string& name) { return Role(ctor("RN", {Term::string(name)})); }

Role Role::inverse(const Role& r) {
  if (r.isInverse()) return Role(r.t_.args()[0]);
  return Role(ctor("Inv", {r.t_}));
}

Role Role::fromTerm(const Term& t) {
  if (auto n = bareName(t)) return named(*n);
  if (isCtor(t, "RN", 1)) {
    if (auto n = bareName(t.args()[0])) return named(*n);
  }
  if (isCtor(t, "Inv", 1)) return inverse(fromTerm(t.args()[0]));
  throw UnsupportedGCI("not a role: " + printTerm(t));
}

bool Role::isInverse() const { return isCtor(t_, "Inv", 1); }

Concept Concept::name(const std::string& n) { return Concept(ctor("CN", {Term::string(n)})); }
Concept Concept::top() { return Concept(ctor("Top", {})); }
Concept Concept::bottom() { return Concept(ctor("Bottom", {})); }
Concept Concept::negation(const Concept& c) { return Concept(ctor("Not", {c.t_})); }
Concept Concept::conjunction(const Concept& a, const Concept& b) {
  return Concept(ctor("And2", {a.t_, b.t_}));
}
Concept Concept::disjunction(const Concept& a, const Concept& b) {
  return Concept(ctor("Or2", {a.t_, b.t_}));
}
Concept Concept::exists(const Role& r, const Concept& c) {
  return Concept(ctor("Exists", {r.term(), c.t_}));
}
Concept Concept::forall(const Role& r, const Concept& c) {
  return Concept(ctor("Forall", {r.term(), c.t_}));
}

Concept Concept::fromTerm(const Term& t) {
  if (auto n = bareName(t)) {
    if (t.isVar() && *n == "Top") return top();
    if (t.isVar() && *n == "Bottom") return bottom();
    return name(*n);
  }
  if (isCtor(t, "CN", 1)) {
    if (auto n = bareName(t.args()[0])) return name(*n);
  }
  if (isCtor(t, "Top", 0)) return top();
  if (isCtor(t, "Bottom", 0)) return bottom();
  if (isCtor(t, "Not", 1)) return negation(fromTerm(t.args()[0]));
  if (isCtor(t, "And2", 2)) return conjunction(fromTerm(t.args()[0]), fromTerm(t.args()[1]));
  if (isCtor(t, "Or2", 2)) return disjunction(fromTerm(t.args()[0]), fromTerm(t.args()[1]));
  if (isCtor(t, "Exists", 2)) return exists(Role::fromTerm(t.args()[0]), fromTerm(t.args()[1]));
  if (isCtor(t, "Forall", 2)) return forall(Role::fromTerm(t.args()[0]), fromTerm(t.args()[1]));
  throw UnsupportedGCI("not an ALCIF concept: " + printTerm(t));
}

Concept::Kind Concept::kind() const {
  const std::string& s = t_.text();
  if (s == "CN") return Kind::Name;
  if (s == "Top") return Kind::Top;
  if (s == "Bottom") return Kind::Bottom;
  if (s == "Not") return Kind::Not;
  if (s == "And2") return Kind::And;
  if (s == "Or2") return Kind::Or;
  if (s == "Exists") return Kind::Exists;
  return Kind::Forall;
}

Concept Concept::operand(std::size_t i) const {
  Kind k = kind();
  if (k == Kind::Exists || k == Kind::Forall) return Concept(t_.args()[1]);
  return Concept(t_.args().at(i));
}

Role Concept::role() const { return Role::fromTerm(t_.args()[0]); }

Individual Individual::named(const std::string& n) { return Individual(ctor("Name", {Term::string(n)})); }

Individual Individual::fromTerm(const Term& t) {
  if (auto n = bareName(t)) return named(*n);
  if (isCtor(t, "Name", 1)) {
    if (auto n = bareName(t.args()[0])) return named(*n);
  }
  throw UnsupportedGCI("not an individual name: " + printTerm(t));
}

// ---------------------------------------------------------------------------
// NNF

namespace {

using K = Concept::Kind;

Concept mkAnd(const Concept& a, const Concept& b) {
  if (a.kind() == K::Bottom || b.kind() == K::Bottom) return Concept::bottom();
  if (a.kind() == K::Top) return b;
  if (b.kind() == K::Top) return a;
  return Concept::conjunction(a, b);
}

Concept mkOr(const Concept& a, const Concept& b) {
  if (a.kind() == K::Top || b.kind() == K::Top) return Concept::top();
  if (a.kind() == K::Bottom) return b;
  if (b.kind() == K::Bottom) return a;
  return Concept::disjunction(a, b);
}

Concept mkExists(const Role& r, const Concept& c) {
  if (c.kind() == K::Bottom) return Concept::bottom();
  return Concept::exists(r, c);
}

Concept mkForall(const Role& r, const Concept& c) {
  if (c.kind() == K::Top) return Concept::top();
  return Concept::forall(r, c);
}

Concept nnfNeg(const Concept& c);

}  // namespace

Concept nnf(const Concept& c) {
  switch (c.kind()) {
    case K::Name:
    case K::Top:
    case K::Bottom:
      return c;
    case K::Not:
      return nnfNeg(c.operand());
    case K::And:
      return mkAnd(nnf(c.operand(0)), nnf(c.operand(1)));
    case K::Or:
      return mkOr(nnf(c.operand(0)), nnf(c.operand(1)));
    case K::Exists:
      return mkExists(c.role(), nnf(c.operand()));
    case K::Forall:
      return mkForall(c.role(), nnf(c.operand()));
  }
  return c;
}

namespace {

// nnf(Not(c))
Concept nnfNeg(const Concept& c) {
  switch (c.kind()) {
    case K::Name:
      return Concept::negation(c);
    case K::Top:
      return Concept::bottom();
    case K::Bottom:
      return Concept::top();
    case K::Not:
      return nnf(c.operand());
    case K::And:
      return mkOr(nnfNeg(c.operand(0)), nnfNeg(c.operand(1)));
    case K::Or:
      return mkAnd(nnfNeg(c.operand(0)), nnfNeg(c.operand(1)));
    case K::Exists:
      return mkForall(c.role(), nnfNeg(c.operand()));
    case K::Forall:
      return mkExists(c.role(), nnfNeg(c.operand()));
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsing

namespace {

Term parseTermOrThrow(std::string_view text) {
  try {
    return parseTerm(text);
  } catch (const ParseError& e) {
    throw UnsupportedGCI(e.what());
  }
}

std::string trimmed(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Concept parseConcept(std::string_view text) { return Concept::fromTerm(parseTermOrThrow(text)); }
Role parseRole(std::string_view text) { return Role::fromTerm(parseTermOrThrow(text)); }
Individual parseIndividual(std::string_view text) {
  return Individual::fromTerm(parseTermOrThrow(text));
}

KnowledgeBase parseKB(std::string_view text) {
  KnowledgeBase kb;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    if (auto c = raw.find("//"); c != std::string::npos) raw.erase(c);
    std::string line = trimmed(raw);
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw KBParseError(lineNo, "expected 'gci:', 'abox:' or 'functional:'");
    std::string kind = trimmed(std::string_view(line).substr(0, colon));
    std::string rest = trimmed(std::string_view(line).substr(colon + 1));
    try {
      if (kind == "gci") {
        auto at = rest.find("SUBSUMED");
        if (at == std::string::npos) throw KBParseError(lineNo, "expected 'SUBSUMED' in GCI");
        kb.tbox.push_back({parseConcept(rest.substr(0, at)), parseConcept(rest.substr(at + 8))});
      } else if (kind == "abox") {
        if (!rest.empty() && rest[0] == '(') {
          auto close = rest.find(')');
          auto sep = close == std::string::npos ? close : rest.find(':', close);
          auto comma = rest.find(',');
          if (sep == std::string::npos || comma == std::string::npos || comma > close) {
            throw KBParseError(lineNo, "expected '(a, b) : role'");
          }
          Individual a = parseIndividual(rest.substr(1, comma - 1));
          Individual b = parseIndividual(rest.substr(comma + 1, close - comma - 1));
          kb.roles.push_back({a, b, parseRole(rest.substr(sep + 1))});
        } else {
          auto sep = rest.find(':');
          if (sep == std::string::npos) throw KBParseError(lineNo, "expected 'individual : concept'");
          kb.concepts.push_back({parseIndividual(rest.substr(0, sep)), parseConcept(rest.substr(sep + 1))});
        }
      } else if (kind == "functional") {
        Role r = parseRole(rest);
        if (r.isInverse()) throw KBParseError(lineNo, "functional roles must be role names");
        kb.functional.insert(r);
      } else {
        throw KBParseError(lineNo, "unknown declaration '" + kind + "'");
      }
    } catch (const UnsupportedGCI& e) {
      throw KBParseError(lineNo, e.what());
    }
  }
  return kb;
}

// ---------------------------------------------------------------------------
// Translation

std::string libraryRules(const std::set<Role>& functional) {
  std::string fr = "{";
  for (const auto& r : functional) {
    if (fr.size() > 1) fr += ", ";
    fr += printTerm(r.term());
  }
  fr += "}";
  return R"(#pred IsA(term, term, time).
#pred HasA(term, term, term, time).
#pred Neighbour(term, term, term, time).
#pred Label(term, term, time).
#pred Child(term, term, time).
#pred Anc(term, term, time).
#pred Blocked(term, term, time).
#pred Step(time, int).
#const functionalRoles = )" +
         fr + R"(.

// Boolean connectives
IsA(x, c1, time) AND IsA(x, c2, time) :- IsA(x, And2(c1, c2), time).
IsA(x, c1, time) OR IsA(x, c2, time) :- IsA(x, Or2(c1, c2), time).

// Every individual is an instance of Top
IsA(x, Top(), time) :- IsA(x, c, time).
IsA(x, Top(), time) :- HasA(x, r, y, time).
IsA(y, Top(), time) :- HasA(x, r, y, time).

// Neighbours in both directions
Neighbour(x, r, y, time) :- HasA(x, r, y, time).
Neighbour(y, Inv(RN(n)), x, time) :- HasA(x, r, y, time), MATCH(RN(n), r).
Neighbour(y, r2, x, time) :- HasA(x, r, y, time), MATCH(Inv(r2), r).

// Clashes
FAIL :- IsA(x, Not(c), time), IsA(x, c, time).
FAIL :- IsA(x, Bottom(), time).

// Quantifiers
IsA(y, c, time) :- Neighbour(x, r, y, time), IsA(x, Forall(r, c), time).

HasA(x, r, s, time + 1) AND IsA(s, c, time + 1) AND Step(time + 1, time) : @preds("TimePlus1") :-
  IsA(x, Exists(r, c), time), !(functionalRoles contains r),
  NOT(Neighbour(x, r, y, time), IsA(y, c, time)), NOT(Blocked(x, _, time)),
  LET(s, Succ(r, c, x)).

HasA(x, r, s, time + 1) AND IsA(s, c, time + 1) AND Step(time + 1, time) : @preds("TimePlus1") :-
  IsA(x, Exists(r, c), time), functionalRoles contains r,
  NOT(Neighbour(x, r, y, time)), NOT(Blocked(x, _, time)),
  LET(s, Succ(r, x)).

IsA(y, c, time) :- IsA(x, Exists(r, c), time), functionalRoles contains r, Neighbour(x, r, y, time).

// Carry-over into a new layer
IsA(x, c, time) :- Step(time, prev), prev < time, IsA(x, c, prev).
HasA(x, r, y, time) :- Step(time, prev), prev < time, HasA(x, r, y, prev).

// Blocking
Label(x, cs, time) :- IsA(x, _, time), COLLECT(cs, c STH IsA(x, c, time)).
Child(x, y, time) :- HasA(x, r, y, time), MATCH(Succ(r2, c, p), y), p == x.
Child(x, y, time) :- HasA(x, r, y, time), MATCH(Succ(r2, p), y), p == x.
Anc(x, y, time) :- Child(x, y, time).
Anc(x, z, time) :- Anc(x, y, time), Child(y, z, time).
Blocked(y, x, time) :- Anc(x, y, time), Label(y, ly, time), Label(x, lx, time), ly == lx,
  HasA(y1, r, y, time), HasA(x1, r, x, time),
  Label(y1, ly1, time), Label(x1, lx1, time), ly1 == lx1.
Blocked(y, x, time) :- Anc(x, y, time), Blocked(x, _, time).
)";
}

namespace {

struct Alternative {
  std::vector<std::string> body;
  std::vector<std::pair<std::string, Concept>> moved;  // head disjuncts
};

std::string isA(const std::string& v, const Concept& c) {
  return "IsA(" + v + ", " + printTerm(c.term()) + ", time)";
}

class GciTranslator {
 public:
  std::vector<Alternative> premise(const std::string& v, const Concept& c) {
    switch (c.kind()) {
      case K::Name:
      case K::Top:
        return {Alternative{{isA(v, c)}, {}}};
      case K::Bottom:
        return {};
      case K::Not:
        return {Alternative{{}, {{v, nnf(Concept::negation(c))}}}};
      case K::Forall:
        return {Alternative{{}, {{v, nnf(Concept::negation(c))}}}};
      case K::Or: {
        auto a = premise(v, c.operand(0));
        auto b = premise(v, c.operand(1));
        a.insert(a.end(), b.begin(), b.end());
        return a;
      }
      case K::And: {
        auto a = premise(v, c.operand(0));
        auto b = premise(v, c.operand(1));
        std::vector<Alternative> out;
        for (const auto& x : a) {
          for (const auto& y : b) {
            Alternative z = x;
            z.body.insert(z.body.end(), y.body.begin(), y.body.end());
            z.moved.insert(z.moved.end(), y.moved.begin(), y.moved.end());
            out.push_back(std::move(z));
          }
        }
        return out;
      }
      case K::Exists: {
        std::string y = "y" + std::to_string(++fresh_);
        auto inner = premise(y, c.operand());
        for (auto& alt : inner) {
          alt.body.push_back("Neighbour(" + v + ", " + printTerm(c.role().term()) + ", " + y + ", time)");
        }
        return inner;
      }
    }
    return {};
  }

  void rules(const GCI& g, std::vector<std::string>& out) {
    fresh_ = 0;
    Concept sup = nnf(g.sup);
    for (auto& alt : premise("x", nnf(g.sub))) {
      std::vector<std::pair<std::string, Concept>> disjuncts;
      flattenOr("x", sup, disjuncts);
      disjuncts.insert(disjuncts.end(), alt.moved.begin(), alt.moved.end());
      emit(alt.body, disjuncts, out);
    }
  }

 private:
  static void flattenOr(const std::string& v, const Concept& c,
                        std::vector<std::pair<std::string, Concept>>& out) {
    if (c.kind() == K::Or) {
      flattenOr(v, c.operand(0), out);
      flattenOr(v, c.operand(1), out);
    } else {
      out.emplace_back(v, c);
    }
  }

  static void emit(std::vector<std::string> body, std::vector<std::pair<std::string, Concept>> disjuncts,
                   std::vector<std::string>& out) {
    std::vector<std::pair<std::string, Concept>> head;
    for (auto& [v, c] : disjuncts) {
      // A Top disjunct makes the rule trivially satisfied.
      if (c.kind() == K::Top) return;
      if (c.kind() == K::Bottom) continue;
      bool dup = std::any_of(head.begin(), head.end(),
                             [&](const auto& h) { return h.first == v && h.second == c; });
      if (!dup) head.emplace_back(v, c);
    }
    if (head.size() == 1 && head[0].second.kind() == K::And) {
      emit(body, {{head[0].first, head[0].second.operand(0)}}, out);
      emit(body, {{head[0].first, head[0].second.operand(1)}}, out);
      return;
    }
    if (body.empty()) body.push_back(isA("x", Concept::top()));
    std::sort(body.begin(), body.end());
    body.erase(std::unique(body.begin(), body.end()), body.end());
    std::string rule;
    if (head.empty()) {
      rule = "FAIL";
    } else {
      for (std::size_t i = 0; i < head.size(); ++i) {
        if (i) rule += " OR ";
        rule += isA(head[i].first, head[i].second);
      }
    }
    rule += " :- ";
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) rule += ", ";
      rule += body[i];
    }
    out.push_back(rule + ".");
  }

  int fresh_ = 0;
};

}  // namespace

std::string translateTBox(const KnowledgeBase& kb) {
  std::vector<std::string> rules;
  GciTranslator t;
  for (const auto& g : kb.tbox) t.rules(g, rules);
  std::string out;
  for (const auto& r : rules) out += r + "\n";
  return out;
}

Translation translateKB(const KnowledgeBase& kb) {
  for (const auto& r : kb.functional) {
    if (r.isInverse()) throw UnsupportedGCI("functional roles must be role names");
  }
  Translation t;
  t.program = parseProgram(libraryRules(kb.functional) + "\n// TBox\n" + translateTBox(kb));
  for (const auto& a : kb.concepts) {
    t.facts.push_back(Atom{"IsA", TimeTerm::constant(0), {a.individual.term(), nnf(a.type).term()}});
  }
  for (const auto& a : kb.roles) {
    if (a.role.isInverse()) {
      t.facts.push_back(
          Atom{"HasA", TimeTerm::constant(0), {a.to.term(), Role::inverse(a.role).term(), a.from.term()}});
    } else {
      t.facts.push_back(Atom{"HasA", TimeTerm::constant(0), {a.from.term(), a.role.term(), a.to.term()}});
    }
  }
  return t;
}

SatResult isSatisfiable(const KnowledgeBase& kb, Limits limits) {
  Translation t = translateKB(kb);
  Engine engine(std::move(t.program));
  engine.setLimits(limits);
  SatResult r;
  try {
    r.models = engine.saturate(t.facts);
  } catch (const LimitExceeded& e) {
    r.models = e.partial();
    r.limit = e.limit();
  }
  if (!r.models.empty()) {
    r.verdict = Verdict::Sat;
    r.witness = r.models.front();
  } else {
    r.verdict = r.limit.empty() ? Verdict::Unsat : Verdict::Undecided;
  }
  return r;
}

Entailment entailedInstance(const SatResult& sat, const Individual& a, const Concept& c) {
  if (!sat.limit.empty()) return Entailment::Undecided;
  Term target = nnf(c).term();
  for (const auto& m : sat.models) {
    auto last = m.maxTime();
    if (!last) return Entailment::NotEntailed;
    if (!m.contains(Atom{"IsA", TimeTerm::constant(*last), {a.term(), target}})) {
      return Entailment::NotEntailed;
    }
  }
  return Entailment::Entailed;
}

Entailment entailedInstance(const KnowledgeBase& kb, const Individual& a, const Concept& c, Limits limits) {
  return entailedInstance(isSatisfiable(kb, limits), a, c);
}

std::vector<std::string> functionalViolations(const Interpretation& model, const std::set<Role>& functional) {
  std::vector<std::string> out;
  const auto* buckets = model.bucket("Neighbour");
  if (!buckets) return out;
  for (const auto& [t, atoms] : *buckets) {
    std::map<std::pair<Term, Term>, std::set<Term>> fillers;
    for (const auto& a : atoms) {
      if (a.args.size() != 3) continue;
      const Term& role = a.args[1];
      bool isFunctional = std::any_of(functional.begin(), functional.end(),
                                      [&](const Role& r) { return r.term() == role; });
      if (isFunctional) fillers[{a.args[0], role}].insert(a.args[2]);
    }
    for (const auto& [key, ys] : fillers) {
      if (ys.size() > 1) {
        out.push_back(printTerm(key.first) + " has " + std::to_string(ys.size()) + " " +
                      printTerm(key.second) + "-neighbours at time " + std::to_string(t));
      }
    }
  }
  return out;
}

const char* toString(Verdict v) {
  switch (v) {
    case Verdict::Sat:
      return "SAT";
    case Verdict::Unsat:
      return "UNSAT";
    case Verdict::Undecided:
      return "UNDECIDED";
  }
  return "?";
}

const char* toString(Entailment e) {
  switch (e) {
    case Entailment::Entailed:
      return "ENTAILED";
    case Entailment::NotEntailed:
      return "NOT-ENTAILED";
    case Entailment::Undecided:
      return "UNDECIDED";
  }
  return "?";
}

}  // namespace strata::dl
