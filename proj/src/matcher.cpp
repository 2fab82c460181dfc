#include "strata/matcher.hpp"

#include <algorithm>

namespace strata {

Interpretation::Interpretation(const std::vector<Atom>& atoms) {
  for (const auto& a : atoms) insert(a);
}

bool Interpretation::insert(const Atom& a) {
  if (!a.isGround()) throw EvalError("cannot insert non-ground atom into an interpretation");
  if (!preds_[a.predicate][a.time.value()].insert(a).second) return false;
  ++times_[a.time.value()];
  ++size_;
  return true;
}

bool Interpretation::contains(const Atom& a) const {
  auto p = preds_.find(a.predicate);
  if (p == preds_.end()) return false;
  auto t = p->second.find(a.time.value());
  return t != p->second.end() && t->second.count(a) != 0;
}

const Interpretation::TimeBuckets* Interpretation::bucket(const std::string& predicate) const {
  auto p = preds_.find(predicate);
  return p == preds_.end() ? nullptr : &p->second;
}

std::vector<Atom> Interpretation::atoms() const {
  std::vector<Atom> out;
  out.reserve(size_);
  for (const auto& [pred, buckets] : preds_) {
    for (const auto& [t, set] : buckets) out.insert(out.end(), set.begin(), set.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<TimePoint> Interpretation::nextTimeAfter(std::optional<TimePoint> t) const {
  auto it = t ? times_.upper_bound(*t) : times_.begin();
  if (it == times_.end()) return std::nullopt;
  return it->first;
}

std::optional<TimePoint> Interpretation::maxTime() const {
  if (times_.empty()) return std::nullopt;
  return times_.rbegin()->first;
}

namespace {

// Matches the non-time arguments of `pattern` (already instantiated and
// folded) against a ground atom.
bool matchArgs(const std::vector<Term>& pattern, const Atom& ground, Substitution& s) {
  if (pattern.size() != ground.args.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (!matchTerm(pattern[i], ground.args[i], s)) return false;
  }
  return true;
}

std::vector<Term> preparedArgs(const Substitution& s, const std::vector<Term>& args) {
  std::vector<Term> out;
  out.reserve(args.size());
  for (const auto& a : args) out.push_back(foldGround(apply(s, a)));
  return out;
}

Term evalBound(const Substitution& s, const Term& t) {
  Term g = apply(s, t);
  if (!g.isGround()) {
    throw NonGroundEvaluation("non-ground expression at evaluation point: free variables remain");
  }
  return evalGround(g);
}

TimePoint evalTime(const Substitution& s, const TimeTerm& t) {
  TimeTerm g = apply(s, t);
  if (!g.isGround()) throw NonGroundEvaluation("time variable '" + t.var + "' is unbound");
  return g.value();
}

class Matcher {
 public:
  Matcher(const Interpretation& I, MatchCallback cb) : I_(I), cb_(std::move(cb)) {}

  // Returns false when the enumeration was stopped.
  bool run(const std::vector<BodyLiteral>& lits, std::size_t i, const Substitution& s) {
    if (i == lits.size()) return cb_(s);
    const BodyLiteral& l = lits[i];
    if (auto o = l.as<Ordinary>()) return ordinary(lits, i, o->atom, s);
    if (auto c = l.as<Comprehension>()) return comprehension(lits, i, *c, s);
    if (auto b = l.as<Builtin>()) {
      Term v = evalBound(s, b->expr);
      if (v.kind() != Term::Kind::Bool) throw TypeMismatch("built-in literal is not a boolean");
      return v.asBool() ? run(lits, i + 1, s) : true;
    }
    if (auto let = l.as<Let>()) return run(lits, i + 1, s.with(let->var, evalBound(s, let->value)));
    if (auto ch = l.as<Choose>()) {
      Term ts = evalBound(s, ch->candidates);
      if (ts.kind() != Term::Kind::Set && ts.kind() != Term::Kind::Seq) {
        throw TypeMismatch("CHOOSE expects a collection");
      }
      // Canonical order, no duplicates.
      std::set<Term> cands(ts.args().begin(), ts.args().end());
      for (const auto& t : cands) {
        if (!run(lits, i + 1, s.with(ch->var, t))) return false;
      }
      return true;
    }
    if (auto m = l.as<Match>()) {
      Term scrutinee = evalBound(s, m->scrutinee);
      Substitution s2 = s;
      if (!matchTerm(foldGround(apply(s, m->pattern)), scrutinee, s2)) return true;
      return run(lits, i + 1, s2);
    }
    if (auto col = l.as<Collect>()) {
      std::vector<Term> items;
      Matcher inner(I_, [&](const Substitution& d) {
        items.push_back(evalBound(d, col->templ));
        return true;
      });
      inner.run(col->inner.literals, 0, s);
      return run(lits, i + 1, s.with(col->var, Term::set(std::move(items))));
    }
    const auto& neg = std::get<Negation>(l.node);
    if (!holdsNot(I_, neg.body, s)) return true;
    return run(lits, i + 1, s);
  }

 private:
  bool ordinary(const std::vector<BodyLiteral>& lits, std::size_t i, const Atom& a,
                const Substitution& s) {
    const auto* buckets = I_.bucket(a.predicate);
    if (!buckets) return true;
    std::vector<Term> args = preparedArgs(s, a.args);
    TimeTerm tt = apply(s, a.time);
    auto tryAtom = [&](const Atom& g) {
      Substitution s2 = s;
      if (!tt.isGround()) {
        s2.bind(tt.var, Term::integer(g.time.value() - tt.offset));
      }
      if (!matchArgs(args, g, s2)) return true;
      return run(lits, i + 1, s2);
    };
    if (tt.isGround()) {
      auto it = buckets->find(tt.value());
      if (it == buckets->end()) return true;
      for (const auto& g : it->second) {
        if (!tryAtom(g)) return false;
      }
      return true;
    }
    for (const auto& [t, set] : *buckets) {
      for (const auto& g : set) {
        if (!tryAtom(g)) return false;
      }
    }
    return true;
  }

  bool comprehension(const std::vector<BodyLiteral>& lits, std::size_t i, const Comprehension& c,
                     const Substitution& s) {
    const auto* buckets = I_.bucket(c.pattern.predicate);
    if (!buckets) return true;
    TimePoint bound = evalTime(s, c.bound);
    std::vector<Term> args = preparedArgs(s, c.pattern.args);
    const std::string& x = c.boundVar();

    auto qualifying = [&](const std::set<Atom>& set, TimePoint t) {
      std::vector<Substitution> out;
      for (const auto& g : set) {
        Substitution s2 = s.with(x, Term::integer(t));
        if (!matchArgs(args, g, s2)) continue;
        if (!c.inner.empty() && !satisfiable(I_, c.inner, s2)) continue;
        out.push_back(std::move(s2));
      }
      return out;
    };
    auto emit = [&](const std::vector<Substitution>& found) {
      for (const auto& s2 : found) {
        if (!run(lits, i + 1, s2)) return false;
      }
      return true;
    };

    if (c.op == CompareOp::Le || c.op == CompareOp::Lt) {
      auto end = c.op == CompareOp::Le ? buckets->upper_bound(bound) : buckets->lower_bound(bound);
      for (auto it = std::make_reverse_iterator(end); it != buckets->rend(); ++it) {
        auto found = qualifying(it->second, it->first);
        if (!found.empty()) return emit(found);
      }
    } else {
      auto it = c.op == CompareOp::Ge ? buckets->lower_bound(bound) : buckets->upper_bound(bound);
      for (; it != buckets->end(); ++it) {
        auto found = qualifying(it->second, it->first);
        if (!found.empty()) return emit(found);
      }
    }
    return true;
  }

  const Interpretation& I_;
  MatchCallback cb_;
};

}  // namespace

bool matchBody(const Interpretation& I, const Body& body, const Substitution& seed,
               const MatchCallback& cb) {
  Matcher m(I, cb);
  return m.run(body.literals, 0, seed);
}

std::vector<Substitution> matchAll(const Interpretation& I, const Body& body, const Substitution& seed) {
  std::vector<Substitution> out;
  matchBody(I, body, seed, [&](const Substitution& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

bool satisfiable(const Interpretation& I, const Body& body, const Substitution& seed) {
  bool found = false;
  matchBody(I, body, seed, [&](const Substitution&) {
    found = true;
    return false;
  });
  return found;
}

bool holdsNot(const Interpretation& I, const Body& body, const Substitution& seed) {
  return !satisfiable(I, body, seed);
}

}  // namespace strata
