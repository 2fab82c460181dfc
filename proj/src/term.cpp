#include "strata/term.hpp"

#include <algorithm>
#include <unordered_set>

namespace strata {

struct Term::Node {
  Kind kind;
  std::int64_t num = 0;
  std::string text;
  std::vector<Term> args;
  std::size_t hash = 0;
  bool ground = true;
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Term::Term() : Term(integer(0)) {}

static std::shared_ptr<Term::Node> finish(std::shared_ptr<Term::Node> n);

Term Term::integer(std::int64_t v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Int;
  n->num = v;
  return Term(finish(n));
}

Term Term::boolean(bool v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Bool;
  n->num = v ? 1 : 0;
  return Term(finish(n));
}

Term Term::string(std::string s) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Str;
  n->text = std::move(s);
  return Term(finish(n));
}

Term Term::var(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->text = std::move(name);
  return Term(finish(n));
}

Term Term::set(std::vector<Term> elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Set;
  n->args = std::move(elems);
  return Term(finish(n));
}

Term Term::seq(std::vector<Term> elems) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Seq;
  n->args = std::move(elems);
  return Term(finish(n));
}

Term Term::ctor(std::string symbol, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Ctor;
  n->text = std::move(symbol);
  n->args = std::move(args);
  return Term(finish(n));
}

Term Term::call(std::string op, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->text = std::move(op);
  n->args = std::move(args);
  return Term(finish(n));
}

static std::shared_ptr<Term::Node> finish(std::shared_ptr<Term::Node> n) {
  std::size_t h = static_cast<std::size_t>(n->kind) * 0x100000001b3ULL;
  h = mix(h, std::hash<std::int64_t>{}(n->num));
  h = mix(h, std::hash<std::string>{}(n->text));
  bool ground = n->kind != Term::Kind::Var;
  for (const auto& a : n->args) {
    h = mix(h, a.hash());
    ground = ground && a.isGround();
  }
  n->hash = h;
  n->ground = ground;
  return n;
}

Term::Kind Term::kind() const { return node_->kind; }

bool Term::isValue() const {
  switch (kind()) {
    case Kind::Bool:
    case Kind::Int:
    case Kind::Str:
    case Kind::Set:
    case Kind::Seq:
      return true;
    default:
      return false;
  }
}

bool Term::isGround() const { return node_->ground; }

std::int64_t Term::asInt() const {
  if (kind() != Kind::Int) throw TypeMismatch("expected an integer");
  return node_->num;
}

bool Term::asBool() const {
  if (kind() != Kind::Bool) throw TypeMismatch("expected a boolean");
  return node_->num != 0;
}

const std::string& Term::text() const { return node_->text; }
const std::vector<Term>& Term::args() const { return node_->args; }
std::size_t Term::hash() const { return node_->hash; }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return Term::compare(a, b) == 0;
}

int Term::compare(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return 0;
  const Node& x = *a.node_;
  const Node& y = *b.node_;
  if (x.kind != y.kind) return x.kind < y.kind ? -1 : 1;
  if (x.num != y.num) return x.num < y.num ? -1 : 1;
  if (int c = x.text.compare(y.text); c != 0) return c < 0 ? -1 : 1;
  if (x.args.size() != y.args.size()) return x.args.size() < y.args.size() ? -1 : 1;
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (int c = compare(x.args[i], y.args[i]); c != 0) return c;
  }
  return 0;
}

Term TimeTerm::toTerm() const {
  if (var.empty()) return Term::integer(offset);
  if (offset == 0) return Term::var(var);
  return Term::call("+", {Term::var(var), Term::integer(offset)});
}

bool Atom::isGround() const {
  if (!time.isGround()) return false;
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.isGround(); });
}

std::size_t Atom::hash() const {
  std::size_t h = std::hash<std::string>{}(predicate);
  h = mix(h, std::hash<std::string>{}(time.var));
  h = mix(h, std::hash<TimePoint>{}(time.offset));
  for (const auto& a : args) h = mix(h, a.hash());
  return h;
}

bool operator==(const Atom& a, const Atom& b) {
  return a.time == b.time && a.predicate == b.predicate && a.args == b.args;
}

bool operator<(const Atom& a, const Atom& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.predicate != b.predicate) return a.predicate < b.predicate;
  return a.args < b.args;
}

const Term* Substitution::lookup(const std::string& name) const {
  auto it = map_.find(name);
  return it == map_.end() ? nullptr : &it->second;
}

void Substitution::bind(const std::string& name, Term value) {
  map_.insert_or_assign(name, std::move(value));
}

Substitution Substitution::with(const std::string& name, Term value) const {
  Substitution s = *this;
  s.bind(name, std::move(value));
  return s;
}

Term apply(const Substitution& s, const Term& t) {
  if (t.isGround() || s.empty()) return t;
  if (t.isVar()) {
    const Term* v = s.lookup(t.text());
    return v ? *v : t;
  }
  std::vector<Term> args;
  args.reserve(t.args().size());
  bool changed = false;
  for (const auto& a : t.args()) {
    args.push_back(apply(s, a));
    changed = changed || !(args.back() == a);
  }
  if (!changed) return t;
  switch (t.kind()) {
    case Term::Kind::Set:
      return Term::set(std::move(args));
    case Term::Kind::Seq:
      return Term::seq(std::move(args));
    case Term::Kind::Ctor:
      return Term::ctor(t.text(), std::move(args));
    case Term::Kind::Call:
      return Term::call(t.text(), std::move(args));
    default:
      return t;
  }
}

TimeTerm apply(const Substitution& s, const TimeTerm& t) {
  if (t.isGround()) return t;
  const Term* v = s.lookup(t.var);
  if (!v) return t;
  if (v->kind() != Term::Kind::Int) {
    throw TypeMismatch("time variable '" + t.var + "' bound to a non-integer");
  }
  return TimeTerm::constant(v->asInt() + t.offset);
}

Atom apply(const Substitution& s, const Atom& a) {
  Atom out{a.predicate, apply(s, a.time), {}};
  out.args.reserve(a.args.size());
  for (const auto& t : a.args) out.args.push_back(apply(s, t));
  return out;
}

void collectVars(const Term& t, std::set<std::string>& out) {
  if (t.isGround()) return;
  if (t.isVar()) {
    out.insert(t.text());
    return;
  }
  for (const auto& a : t.args()) collectVars(a, out);
}

std::set<std::string> varsOf(const Term& t) {
  std::set<std::string> out;
  collectVars(t, out);
  return out;
}

std::set<std::string> varsOf(const Atom& a) {
  std::set<std::string> out;
  if (!a.time.isGround()) out.insert(a.time.var);
  for (const auto& t : a.args) collectVars(t, out);
  return out;
}

namespace {

const std::unordered_set<std::string>& builtinFunctions() {
  static const std::unordered_set<std::string> names = {
      "size",  "contains", "member", "toSet", "toList", "union",
      "range", "isEmpty",  "min",    "max",   "abs",    "Set",
      "List"};
  return names;
}

const std::vector<Term>& collection(const Term& t, const char* op) {
  if (t.kind() != Term::Kind::Set && t.kind() != Term::Kind::Seq) {
    throw TypeMismatch(std::string(op) + ": expected a set or sequence");
  }
  return t.args();
}

void expectArity(const Term& call, std::size_t n) {
  if (call.args().size() != n) {
    throw TypeMismatch(call.text() + ": expected " + std::to_string(n) + " argument(s)");
  }
}

int orderCompare(const Term& a, const Term& b, const std::string& op) {
  if (a.kind() == Term::Kind::Int && b.kind() == Term::Kind::Int) {
    return a.asInt() < b.asInt() ? -1 : (a.asInt() > b.asInt() ? 1 : 0);
  }
  if (a.kind() == Term::Kind::Str && b.kind() == Term::Kind::Str) {
    int c = a.text().compare(b.text());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  throw TypeMismatch("'" + op + "' needs two integers or two strings");
}

Term evalCall(const std::string& op, const std::vector<Term>& v, const Term& call) {
  if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") {
    expectArity(call, 2);
    std::int64_t a = v[0].asInt(), b = v[1].asInt();
    if (op == "+") return Term::integer(a + b);
    if (op == "-") return Term::integer(a - b);
    if (op == "*") return Term::integer(a * b);
    if (b == 0) throw TypeMismatch("division by zero");
    return Term::integer(op == "/" ? a / b : a % b);
  }
  if (op == "neg") {
    expectArity(call, 1);
    return Term::integer(-v[0].asInt());
  }
  if (op == "==") return expectArity(call, 2), Term::boolean(v[0] == v[1]);
  if (op == "!=") return expectArity(call, 2), Term::boolean(v[0] != v[1]);
  if (op == "<" || op == "<=" || op == ">" || op == ">=") {
    expectArity(call, 2);
    int c = orderCompare(v[0], v[1], op);
    if (op == "<") return Term::boolean(c < 0);
    if (op == "<=") return Term::boolean(c <= 0);
    if (op == ">") return Term::boolean(c > 0);
    return Term::boolean(c >= 0);
  }
  if (op == "&&") return expectArity(call, 2), Term::boolean(v[0].asBool() && v[1].asBool());
  if (op == "||") return expectArity(call, 2), Term::boolean(v[0].asBool() || v[1].asBool());
  if (op == "!") return expectArity(call, 1), Term::boolean(!v[0].asBool());
  if (op == "Set") return Term::set(v);
  if (op == "List") return Term::seq(v);
  if (op == "size") {
    expectArity(call, 1);
    if (v[0].kind() == Term::Kind::Str) return Term::integer(static_cast<std::int64_t>(v[0].text().size()));
    return Term::integer(static_cast<std::int64_t>(collection(v[0], "size").size()));
  }
  if (op == "isEmpty") {
    expectArity(call, 1);
    return Term::boolean(collection(v[0], "isEmpty").empty());
  }
  if (op == "contains" || op == "member") {
    expectArity(call, 2);
    const Term& coll = op == "contains" ? v[0] : v[1];
    const Term& elem = op == "contains" ? v[1] : v[0];
    const auto& items = collection(coll, op.c_str());
    if (coll.kind() == Term::Kind::Set) {
      return Term::boolean(std::binary_search(items.begin(), items.end(), elem));
    }
    return Term::boolean(std::find(items.begin(), items.end(), elem) != items.end());
  }
  if (op == "toSet") return expectArity(call, 1), Term::set(collection(v[0], "toSet"));
  if (op == "toList") return expectArity(call, 1), Term::seq(collection(v[0], "toList"));
  if (op == "union") {
    expectArity(call, 2);
    std::vector<Term> all = collection(v[0], "union");
    const auto& rhs = collection(v[1], "union");
    all.insert(all.end(), rhs.begin(), rhs.end());
    if (v[0].kind() == Term::Kind::Seq && v[1].kind() == Term::Kind::Seq) return Term::seq(std::move(all));
    return Term::set(std::move(all));
  }
  if (op == "range") {
    expectArity(call, 2);
    std::vector<Term> out;
    for (std::int64_t i = v[0].asInt(); i <= v[1].asInt(); ++i) out.push_back(Term::integer(i));
    return Term::seq(std::move(out));
  }
  if (op == "min" || op == "max") {
    expectArity(call, 2);
    int c = orderCompare(v[0], v[1], op);
    return (op == "min") == (c <= 0) ? v[0] : v[1];
  }
  if (op == "abs") {
    expectArity(call, 1);
    std::int64_t a = v[0].asInt();
    return Term::integer(a < 0 ? -a : a);
  }
  throw TypeMismatch("unknown built-in '" + op + "'");
}

}  // namespace

bool isBuiltinFunction(const std::string& name) { return builtinFunctions().count(name) != 0; }

Term evalGround(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Var:
      throw NonGroundEvaluation("cannot evaluate unbound variable '" + t.text() + "'");
    case Term::Kind::Bool:
    case Term::Kind::Int:
    case Term::Kind::Str:
      return t;
    case Term::Kind::Set:
    case Term::Kind::Seq:
    case Term::Kind::Ctor: {
      if (!t.isGround()) throw NonGroundEvaluation("cannot evaluate a non-ground term");
      bool hasCall = false;
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) {
        args.push_back(evalGround(a));
        hasCall = hasCall || !(args.back() == a);
      }
      if (!hasCall) return t;
      if (t.kind() == Term::Kind::Set) return Term::set(std::move(args));
      if (t.kind() == Term::Kind::Seq) return Term::seq(std::move(args));
      return Term::ctor(t.text(), std::move(args));
    }
    case Term::Kind::Call: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(evalGround(a));
      return evalCall(t.text(), args, t);
    }
  }
  return t;
}

Atom evalGround(const Atom& a) {
  if (!a.time.isGround()) throw NonGroundEvaluation("atom '" + a.predicate + "' has a non-ground time");
  Atom out{a.predicate, a.time, {}};
  out.args.reserve(a.args.size());
  for (const auto& t : a.args) out.args.push_back(evalGround(t));
  return out;
}

Term foldGround(const Term& t) {
  if (t.isGround()) return evalGround(t);
  if (t.isVar()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(foldGround(a));
  switch (t.kind()) {
    case Term::Kind::Seq:
      return Term::seq(std::move(args));
    case Term::Kind::Ctor:
      return Term::ctor(t.text(), std::move(args));
    case Term::Kind::Call:
      return Term::call(t.text(), std::move(args));
    default:
      return t;
  }
}

bool matchTerm(const Term& pattern, const Term& ground, Substitution& s) {
  if (pattern.isGround()) return pattern == ground;
  if (pattern.isVar()) {
    if (const Term* bound = s.lookup(pattern.text())) return *bound == ground;
    s.bind(pattern.text(), ground);
    return true;
  }
  if (pattern.kind() != ground.kind() || pattern.text() != ground.text() ||
      pattern.args().size() != ground.args().size()) {
    return false;
  }
  if (pattern.kind() == Term::Kind::Call) return false;
  // Sets are canonically ordered only once ground, so positional matching
  // is restricted to sequences and constructors.
  if (pattern.kind() == Term::Kind::Set) {
    return evalGround(apply(s, pattern)) == ground;
  }
  for (std::size_t i = 0; i < pattern.args().size(); ++i) {
    if (!matchTerm(pattern.args()[i], ground.args()[i], s)) return false;
  }
  return true;
}

}  // namespace strata
