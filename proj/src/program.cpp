#include "strata/program.hpp"

#include <algorithm>

namespace strata {

const char* toString(CompareOp op) {
  switch (op) {
    case CompareOp::Lt:
      return "<";
    case CompareOp::Le:
      return "<=";
    case CompareOp::Gt:
      return ">";
    case CompareOp::Ge:
      return ">=";
  }
  return "?";
}

std::vector<std::string> Rule::declaredPreds() const {
  std::vector<std::string> out;
  for (const auto& a : annotations) {
    if (a.key == "preds") out.insert(out.end(), a.values.begin(), a.values.end());
  }
  return out;
}

bool Rule::isFact() const {
  return body.empty() && head.atoms.size() == 1 && head.atoms[0].isGround();
}

std::size_t PredicateDecl::timePosition() const {
  auto it = std::find(params.begin(), params.end(), Sort::Time);
  return it == params.end() ? 0 : static_cast<std::size_t>(it - params.begin());
}

std::size_t Program::timePosition(const std::string& predicate) const {
  auto it = declarations.find(predicate);
  return it == declarations.end() ? 0 : it->second.timePosition();
}

namespace {

void addVars(const TimeTerm& t, std::set<std::string>& out) {
  if (!t.isGround()) out.insert(t.var);
}

void addVars(const Atom& a, std::set<std::string>& out) {
  addVars(a.time, out);
  for (const auto& t : a.args) collectVars(t, out);
}

void addVars(const Body& b, std::set<std::string>& out);

void addVars(const BodyLiteral& l, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Ordinary>) {
          addVars(n.atom, out);
        } else if constexpr (std::is_same_v<T, Comprehension>) {
          addVars(n.pattern, out);
          addVars(n.bound, out);
          addVars(n.inner, out);
        } else if constexpr (std::is_same_v<T, Builtin>) {
          collectVars(n.expr, out);
        } else if constexpr (std::is_same_v<T, Let>) {
          out.insert(n.var);
          collectVars(n.value, out);
        } else if constexpr (std::is_same_v<T, Choose>) {
          out.insert(n.var);
          collectVars(n.candidates, out);
        } else if constexpr (std::is_same_v<T, Match>) {
          collectVars(n.pattern, out);
          collectVars(n.scrutinee, out);
        } else if constexpr (std::is_same_v<T, Collect>) {
          out.insert(n.var);
          collectVars(n.templ, out);
          addVars(n.inner, out);
        } else {
          addVars(n.body, out);
        }
      },
      l.node);
}

void addVars(const Body& b, std::set<std::string>& out) {
  for (const auto& l : b.literals) addVars(l, out);
}

Atom applyAtom(const Substitution& s, const Atom& a) { return apply(s, a); }

}  // namespace

std::set<std::string> varsOf(const BodyLiteral& l) {
  std::set<std::string> out;
  addVars(l, out);
  return out;
}

std::set<std::string> varsOf(const Body& b) {
  std::set<std::string> out;
  addVars(b, out);
  return out;
}

std::set<std::string> varsOf(const Head& h) {
  std::set<std::string> out;
  for (const auto& a : h.atoms) addVars(a, out);
  return out;
}

std::set<std::string> bindsOf(const BodyLiteral& l) {
  std::set<std::string> out;
  if (auto o = l.as<Ordinary>()) {
    addVars(o->atom, out);
  } else if (auto c = l.as<Comprehension>()) {
    addVars(c->pattern, out);
  } else if (auto let = l.as<Let>()) {
    out.insert(let->var);
  } else if (auto ch = l.as<Choose>()) {
    out.insert(ch->var);
  } else if (auto m = l.as<Match>()) {
    collectVars(m->pattern, out);
  } else if (auto col = l.as<Collect>()) {
    out.insert(col->var);
  }
  return out;
}

std::set<std::string> positiveVars(const Body& b) {
  std::set<std::string> out;
  for (const auto& l : b.literals) {
    auto v = bindsOf(l);
    out.insert(v.begin(), v.end());
  }
  return out;
}

Body apply(const Substitution& s, const Body& b) {
  Body out;
  out.literals.reserve(b.literals.size());
  for (const auto& l : b.literals) {
    BodyLiteral r{l.node, l.loc};
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Ordinary>) {
            n.atom = applyAtom(s, n.atom);
          } else if constexpr (std::is_same_v<T, Comprehension>) {
            // The bound variable is local to the comprehension.
            Substitution::Map m = s.map();
            m.erase(n.boundVar());
            Substitution inner(std::move(m));
            std::string x = n.boundVar();
            n.pattern = applyAtom(inner, n.pattern);
            n.pattern.time = TimeTerm::variable(x);
            n.bound = apply(s, n.bound);
            n.inner = apply(inner, n.inner);
          } else if constexpr (std::is_same_v<T, Builtin>) {
            n.expr = apply(s, n.expr);
          } else if constexpr (std::is_same_v<T, Let>) {
            n.value = apply(s, n.value);
          } else if constexpr (std::is_same_v<T, Choose>) {
            n.candidates = apply(s, n.candidates);
          } else if constexpr (std::is_same_v<T, Match>) {
            n.pattern = apply(s, n.pattern);
            n.scrutinee = apply(s, n.scrutinee);
          } else if constexpr (std::is_same_v<T, Collect>) {
            n.templ = apply(s, n.templ);
            n.inner = apply(s, n.inner);
          } else {
            n.body = apply(s, n.body);
          }
        },
        r.node);
    out.literals.push_back(std::move(r));
  }
  return out;
}

Head apply(const Substitution& s, const Head& h) {
  Head out;
  for (const auto& a : h.atoms) out.atoms.push_back(apply(s, a));
  return out;
}

namespace {

bool sameTime(const TimeTerm& a, const TimeTerm& b) { return a == b; }

bool sameLiteral(const BodyLiteral& a, const BodyLiteral& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Ordinary>) {
          return x.atom == y.atom;
        } else if constexpr (std::is_same_v<T, Comprehension>) {
          return x.pattern == y.pattern && x.op == y.op && sameTime(x.bound, y.bound) &&
                 sameStructure(x.inner, y.inner);
        } else if constexpr (std::is_same_v<T, Builtin>) {
          return x.expr == y.expr;
        } else if constexpr (std::is_same_v<T, Let>) {
          return x.var == y.var && x.value == y.value;
        } else if constexpr (std::is_same_v<T, Choose>) {
          return x.var == y.var && x.candidates == y.candidates;
        } else if constexpr (std::is_same_v<T, Match>) {
          return x.pattern == y.pattern && x.scrutinee == y.scrutinee;
        } else if constexpr (std::is_same_v<T, Collect>) {
          return x.var == y.var && x.templ == y.templ && sameStructure(x.inner, y.inner);
        } else {
          return sameStructure(x.body, y.body);
        }
      },
      a.node);
}

}  // namespace

bool sameStructure(const Body& a, const Body& b) {
  if (a.literals.size() != b.literals.size()) return false;
  for (std::size_t i = 0; i < a.literals.size(); ++i) {
    if (!sameLiteral(a.literals[i], b.literals[i])) return false;
  }
  return true;
}

bool sameStructure(const Rule& a, const Rule& b) {
  return a.head.atoms == b.head.atoms && a.annotations == b.annotations &&
         sameStructure(a.body, b.body);
}

bool sameStructure(const Program& a, const Program& b) {
  if (a.rules.size() != b.rules.size()) return false;
  for (std::size_t i = 0; i < a.rules.size(); ++i) {
    if (!sameStructure(a.rules[i], b.rules[i])) return false;
  }
  if (a.declarations.size() != b.declarations.size()) return false;
  for (const auto& [name, d] : a.declarations) {
    auto it = b.declarations.find(name);
    if (it == b.declarations.end() || it->second.params != d.params) return false;
  }
  return a.constants == b.constants;
}

}  // namespace strata
