#include "strata/stratify.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "strata/parser.hpp"

namespace strata {

std::vector<std::string> CallGraph::successors(const std::string& node) const {
  std::vector<std::string> out;
  auto it = std::lower_bound(edges.begin(), edges.end(), CallEdge{node, "", false});
  for (; it != edges.end() && it->from == node; ++it) {
    if (out.empty() || out.back() != it->to) out.push_back(it->to);
  }
  return out;
}

int Stratification::of(const std::string& node) const {
  auto it = stratumOf.find(node);
  return it == stratumOf.end() ? -1 : it->second;
}

std::vector<std::string> headNodes(const Rule& r, std::size_t index) {
  auto declared = r.declaredPreds();
  if (!declared.empty()) return declared;
  if (r.head.isFail()) return {"$fail#" + std::to_string(index)};
  std::vector<std::string> out;
  for (const auto& a : r.head.atoms) out.push_back(a.predicate);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

void addBodyEdges(const Body& b, const std::vector<std::string>& heads, bool negative,
                  std::set<CallEdge>& edges) {
  auto add = [&](const std::string& to, bool neg) {
    for (const auto& h : heads) edges.insert({h, to, neg});
  };
  for (const auto& l : b.literals) {
    if (auto o = l.as<Ordinary>()) {
      add(o->atom.predicate, negative);
    } else if (auto c = l.as<Comprehension>()) {
      add(c->pattern.predicate, negative);
      add(c->pattern.predicate, true);
      addBodyEdges(c->inner, heads, true, edges);
      if (!negative) addBodyEdges(c->inner, heads, false, edges);
    } else if (auto col = l.as<Collect>()) {
      addBodyEdges(col->inner, heads, true, edges);
      if (!negative) addBodyEdges(col->inner, heads, false, edges);
    } else if (auto n = l.as<Negation>()) {
      addBodyEdges(n->body, heads, true, edges);
    }
  }
}

}  // namespace

CallGraph buildCallGraph(const Program& p) {
  std::set<std::string> nodes;
  std::set<CallEdge> edges;
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const Rule& r = p.rules[i];
    auto heads = headNodes(r, i);
    nodes.insert(heads.begin(), heads.end());
    for (const auto& a : r.head.atoms) nodes.insert(a.predicate);
    for (const auto& a : heads) {
      for (const auto& b : heads) {
        if (a != b) edges.insert({a, b, false});
      }
    }
    addBodyEdges(r.body, heads, false, edges);
  }
  for (const auto& e : edges) nodes.insert(e.to);
  CallGraph g;
  g.nodes.assign(nodes.begin(), nodes.end());
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

Stratification computeStrata(const CallGraph& g) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& n : g.nodes) adj[n] = g.successors(n);

  // Tarjan: components are emitted callees first, which is stratum order.
  std::map<std::string, int> index, low;
  std::set<std::string> onStack;
  std::vector<std::string> stack;
  int counter = 0;
  Stratification s;

  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    onStack.insert(v);
    for (const auto& w : adj[v]) {
      if (!index.count(w)) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (onStack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        onStack.erase(w);
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      int id = static_cast<int>(s.components.size());
      for (const auto& m : comp) s.stratumOf[m] = id;
      s.components.push_back(std::move(comp));
    }
  };
  for (const auto& n : g.nodes) {
    if (!index.count(n)) visit(n);
  }
  return s;
}

std::optional<Violation> checkRangeRestricted(const Rule& r, std::size_t index) {
  auto pos = positiveVars(r.body);
  std::vector<std::string> missing;
  for (const auto& v : varsOf(r.head)) {
    if (!pos.count(v)) missing.push_back(v);
  }
  if (missing.empty()) return std::nullopt;
  std::string list;
  for (const auto& v : missing) list += (list.empty() ? "" : ", ") + v;
  return Violation{"RANGE", index, r.loc,
                   "head variable(s) " + list + " do not occur in the positive body"};
}

namespace {

// Syntactic order constraints between time variables and constants.
// Difference constraints u - v <= w between time variables over the
// integers. Constants are offsets from the variable "".
class Order {
 public:
  // Records the comparisons in a built-in expression, splitting conjunctions.
  void fromBuiltin(const Term& e) {
    if (e.kind() != Term::Kind::Call || e.args().size() != 2) return;
    const std::string& op = e.text();
    if (op == "&&") {
      fromBuiltin(e.args()[0]);
      fromBuiltin(e.args()[1]);
      return;
    }
    auto a = point(e.args()[0]);
    auto b = point(e.args()[1]);
    if (!a || !b) return;
    if (op == "<") constrain(*a, *b, true);
    if (op == "<=") constrain(*a, *b, false);
    if (op == ">") constrain(*b, *a, true);
    if (op == ">=") constrain(*b, *a, false);
    if (op == "==") {
      constrain(*a, *b, false);
      constrain(*b, *a, false);
    }
  }

  void fromComprehension(const Comprehension& c) {
    const TimeTerm& x = c.pattern.time;
    switch (c.op) {
      case CompareOp::Lt:
        constrain(x, c.bound, true);
        break;
      case CompareOp::Le:
        constrain(x, c.bound, false);
        break;
      case CompareOp::Gt:
        constrain(c.bound, x, true);
        break;
      case CompareOp::Ge:
        constrain(c.bound, x, false);
        break;
    }
  }

  void fromBody(const Body& b) {
    for (const auto& l : b.literals) {
      if (auto bi = l.as<Builtin>()) fromBuiltin(bi->expr);
      if (auto c = l.as<Comprehension>()) fromComprehension(*c);
    }
  }

  // 0: no relation known, 1: a <= b, 2: a < b.
  int relation(const TimeTerm& a, const TimeTerm& b) {
    auto w = bound(a.var, b.var);
    if (!w) return 0;
    TimePoint diff = *w + a.offset - b.offset;  // a - b <= diff
    return diff < 0 ? 2 : (diff == 0 ? 1 : 0);
  }

 private:
  static std::optional<TimeTerm> point(const Term& t) {
    if (t.isVar()) return TimeTerm::variable(t.text());
    if (t.kind() == Term::Kind::Int) return TimeTerm::constant(t.asInt());
    if (t.kind() != Term::Kind::Call || t.args().size() != 2) return std::nullopt;
    if (t.text() != "+" && t.text() != "-") return std::nullopt;
    const Term& v = t.args()[0];
    const Term& k = t.args()[1];
    if (!v.isVar() || k.kind() != Term::Kind::Int) return std::nullopt;
    return TimeTerm{v.text(), t.text() == "+" ? k.asInt() : -k.asInt()};
  }

  // a < b or a <= b.
  void constrain(const TimeTerm& a, const TimeTerm& b, bool strict) {
    TimePoint w = b.offset - a.offset - (strict ? 1 : 0);
    nodes_.insert(a.var);
    nodes_.insert(b.var);
    auto [it, fresh] = d_.try_emplace({a.var, b.var}, w);
    if (!fresh) it->second = std::min(it->second, w);
    closed_ = false;
  }

  std::optional<TimePoint> bound(const std::string& u, const std::string& v) {
    if (u == v) return 0;
    close();
    auto it = d_.find({u, v});
    if (it == d_.end()) return std::nullopt;
    return it->second;
  }

  void close() {
    if (closed_) return;
    for (const auto& k : nodes_) {
      for (const auto& i : nodes_) {
        auto ik = d_.find({i, k});
        if (ik == d_.end() || i == k) continue;
        for (const auto& j : nodes_) {
          auto kj = d_.find({k, j});
          if (kj == d_.end() || k == j) continue;
          TimePoint w = ik->second + kj->second;
          auto [it, fresh] = d_.try_emplace({i, j}, w);
          if (!fresh) it->second = std::min(it->second, w);
        }
      }
    }
    closed_ = true;
  }

  std::set<std::string> nodes_;
  std::map<std::pair<std::string, std::string>, TimePoint> d_;
  bool closed_ = true;
};

struct RuleChecker {
  const Program& prog;
  const Stratification& strata;
  CheckOptions opts;
  std::size_t index;
  const Rule& rule;
  int headStratum;
  TimeTerm anchor;
  std::vector<Violation> out;

  void report(const std::string& code, SourceLoc loc, const std::string& msg) {
    out.push_back({code, index, loc, msg});
  }

  static std::string show(const TimeTerm& t) { return printTimeTerm(t); }

  // Literal inside NOT, a comprehension inner body or a COLLECT body, or the
  // comprehension atom itself.
  void checkNested(const std::string& pred, const TimeTerm& t, SourceLoc loc, Order& ord,
                   const char* what) {
    int r = ord.relation(t, anchor);
    if (r == 2) return;
    int ps = strata.of(pred);
    if (r == 1 && !opts.sbtOnly && ps < headStratum) return;
    std::string msg = std::string(what) + " '" + pred + "' at time " + show(t) + " must be < " +
                      show(anchor);
    if (!opts.sbtOnly) msg += ", or <= with '" + pred + "' in a lower stratum than the head";
    report("SBTP-c.ii", loc, msg);
  }

  void checkInner(const Body& b, Order outer) {
    outer.fromBody(b);
    for (const auto& l : b.literals) {
      if (auto o = l.as<Ordinary>()) {
        checkNested(o->atom.predicate, o->atom.time, l.loc, outer, "literal");
      } else if (auto c = l.as<Comprehension>()) {
        if (opts.sbtOnly) report("SBT-compr", l.loc, "comprehensions are not allowed in SBT mode");
        checkNested(c->pattern.predicate, c->pattern.time, l.loc, outer, "comprehension");
        checkInner(c->inner, outer);
      } else if (auto col = l.as<Collect>()) {
        if (opts.sbtOnly) report("SBT-compr", l.loc, "COLLECT is not allowed in SBT mode");
        checkInner(col->inner, outer);
      } else if (auto n = l.as<Negation>()) {
        checkInner(n->body, outer);
      }
    }
  }

  void run() {
    Order ord;
    ord.fromBody(rule.body);
    for (const auto& h : rule.head.atoms) {
      if (ord.relation(anchor, h.time) == 0) {
        report("SBTP-b", rule.loc,
               "head '" + h.predicate + "' at time " + show(h.time) + " is not constrained >= " +
                   show(anchor));
      }
    }
    for (const auto& l : rule.body.literals) {
      if (auto o = l.as<Ordinary>()) {
        if (ord.relation(o->atom.time, anchor) == 0) {
          report("SBTP-c.i", l.loc,
                 "literal '" + o->atom.predicate + "' at time " + show(o->atom.time) +
                     " is not constrained <= " + show(anchor));
        }
      } else if (auto c = l.as<Comprehension>()) {
        if (opts.sbtOnly) report("SBT-compr", l.loc, "comprehensions are not allowed in SBT mode");
        checkNested(c->pattern.predicate, c->pattern.time, l.loc, ord, "comprehension");
        checkInner(c->inner, ord);
      } else if (auto col = l.as<Collect>()) {
        if (opts.sbtOnly) report("SBT-compr", l.loc, "COLLECT is not allowed in SBT mode");
        checkInner(col->inner, ord);
      } else if (auto n = l.as<Negation>()) {
        checkInner(n->body, ord);
      }
    }
  }
};

int headStratumOf(const Rule& r, std::size_t i, const Stratification& s) {
  int best = 0;
  for (const auto& n : headNodes(r, i)) best = std::max(best, s.of(n));
  return best;
}

}  // namespace

std::vector<Violation> checkSBTP(const Program& p, const Stratification& s, CheckOptions opts,
                                 std::vector<std::optional<TimeTerm>>* anchors) {
  std::vector<Violation> out;
  if (anchors) anchors->assign(p.rules.size(), std::nullopt);
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const Rule& r = p.rules[i];
    if (r.body.empty()) {
      // Facts, body-less disjunctions over constants, and unconditional FAIL.
      continue;
    }
    std::vector<TimeTerm> candidates;
    for (const auto& l : r.body.literals) {
      if (auto o = l.as<Ordinary>()) {
        if (o->atom.time.offset == 0 || o->atom.time.isGround()) {
          if (std::find(candidates.begin(), candidates.end(), o->atom.time) == candidates.end()) {
            candidates.push_back(o->atom.time);
          }
        }
      }
    }
    if (candidates.empty()) {
      out.push_back({"SBTP-a", i, r.loc,
                     "no positive ordinary body literal provides a time variable"});
      continue;
    }
    std::vector<Violation> first;
    bool found = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      RuleChecker rc{p, s, opts, i, r, headStratumOf(r, i, s), candidates[c], {}};
      rc.run();
      if (rc.out.empty()) {
        if (anchors) (*anchors)[i] = candidates[c];
        found = true;
        break;
      }
      if (c == 0) first = std::move(rc.out);
    }
    if (!found) out.insert(out.end(), first.begin(), first.end());
  }
  return out;
}

Analysis analyze(const Program& p, CheckOptions opts) {
  Analysis a;
  a.graph = buildCallGraph(p);
  a.strata = computeStrata(a.graph);
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    if (auto v = checkRangeRestricted(p.rules[i], i)) a.violations.push_back(*v);
  }
  std::vector<std::optional<TimeTerm>> anchors;
  auto sbtp = checkSBTP(p, a.strata, opts, &anchors);
  a.violations.insert(a.violations.end(), sbtp.begin(), sbtp.end());
  std::stable_sort(a.violations.begin(), a.violations.end(),
                   [](const Violation& x, const Violation& y) { return x.rule < y.rule; });
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    RuleInfo info;
    info.headNodes = headNodes(p.rules[i], i);
    info.stratum = headStratumOf(p.rules[i], i, a.strata);
    info.anchor = anchors[i];
    a.rules.push_back(std::move(info));
  }
  return a;
}

std::string render(const Violation& v, const std::string& file) {
  return file + ":" + std::to_string(v.loc.line) + ":" + std::to_string(v.loc.column) + ": [" + v.code +
         "] rule " + std::to_string(v.rule + 1) + ": " + v.message;
}

}  // namespace strata
