#include "strata/engine.hpp"

#include <algorithm>
#include <set>

#include "strata/parser.hpp"

namespace strata {

ProgramRejected::ProgramRejected(std::vector<Violation> v)
    : std::runtime_error(v.empty() ? "program rejected"
                                   : "program rejected: [" + v.front().code + "] " + v.front().message),
      violations_(std::move(v)) {}

LimitExceeded::LimitExceeded(std::string limit, std::size_t path, ModelSet partial)
    : std::runtime_error("limit " + limit + " exceeded on path " + std::to_string(path)),
      limit_(std::move(limit)),
      path_(path),
      partial_(std::move(partial)) {}

StaleFact::StaleFact(const Atom& fact, TimePoint clock)
    : std::runtime_error("fact " + printAtom(fact) + " is older than the current time " +
                         std::to_string(clock)),
      fact_(fact),
      clock_(clock) {}

std::string formatTrace(const TraceEvent& e, const Program* decls) {
  std::string out = "[time " + std::to_string(e.time) + " / stratum " + std::to_string(e.stratum) +
                    "] rule#" + std::to_string(e.rule + 1) + " fired: ";
  if (e.head.empty()) return out + "FAIL";
  for (std::size_t i = 0; i < e.head.size(); ++i) {
    if (i) out += " OR ";
    out += printAtom(e.head[i], decls);
  }
  return out;
}

namespace {

std::vector<Atom> groundHead(const Head& h, const Substitution& s) {
  std::vector<Atom> out;
  for (const auto& a : h.atoms) {
    Atom g = apply(s, a);
    if (!g.isGround()) throw NonGroundEvaluation("head atom '" + a.predicate + "' is not ground");
    g = evalGround(g);
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(std::move(g));
  }
  return out;
}

std::vector<std::vector<Atom>> subsetsOf(const std::vector<Atom>& atoms) {
  std::vector<std::vector<Atom>> out;
  std::size_t n = atoms.size();
  std::vector<std::size_t> idx;
  for (std::size_t k = 1; k <= n; ++k) {
    idx.resize(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
      std::vector<Atom> s;
      for (auto i : idx) s.push_back(atoms[i]);
      out.push_back(std::move(s));
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

}  // namespace

std::optional<std::vector<std::vector<Atom>>> splitHead(const Head& h, const Substitution& s) {
  if (h.isFail()) return std::nullopt;
  return subsetsOf(groundHead(h, s));
}

std::vector<std::string> verifyModel(const Program& p, const Interpretation& model) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const Rule& r = p.rules[i];
    matchBody(model, r.body, {}, [&](const Substitution& s) {
      if (r.head.isFail()) {
        out.push_back("rule#" + std::to_string(i + 1) + ": FAIL body is satisfied");
        return true;
      }
      auto heads = groundHead(r.head, s);
      bool ok = std::any_of(heads.begin(), heads.end(), [&](const Atom& a) { return model.contains(a); });
      if (!ok) {
        out.push_back("rule#" + std::to_string(i + 1) + ": no head atom of " + printAtom(heads.front(), &p) +
                      (heads.size() > 1 ? " OR ..." : "") + " holds");
      }
      return true;
    });
  }
  return out;
}

ModelSet canonicalModels(std::vector<Interpretation> models) {
  std::vector<std::pair<std::vector<Atom>, std::size_t>> keyed;
  keyed.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) keyed.emplace_back(models[i].atoms(), i);
  std::sort(keyed.begin(), keyed.end());
  ModelSet out;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].first == keyed[i - 1].first) continue;
    out.push_back(std::move(models[keyed[i].second]));
  }
  return out;
}

// ---------------------------------------------------------------------------

enum class Status { Open, Exhausted, Closed };

struct Engine::Path {
  Interpretation I;
  std::set<std::pair<std::size_t, std::vector<Term>>> applied;
  std::optional<TimePoint> clock;  // time being processed, or last processed
  bool midTime = false;
  int stratum = 0;
  Status status = Status::Open;
  std::size_t iterations = 0;
  std::size_t id = 0;
  // State before `clock` was processed; used when facts arrive at `clock`.
  std::shared_ptr<const Path> checkpoint;
};

Engine::Engine(Program p, CheckOptions opts) : program_(std::move(p)) {
  analysis_ = analyze(program_, opts);
  if (!analysis_.ok()) throw ProgramRejected(analysis_.violations);
  int maxStratum = 0;
  std::set<TimePoint> constants;
  for (std::size_t i = 0; i < program_.rules.size(); ++i) {
    const Rule& r = program_.rules[i];
    if (r.isFact()) {
      programFacts_.push_back(evalGround(r.head.atoms[0]));
      continue;
    }
    if (r.body.empty() && r.head.isFail()) {
      unconditionalFail_ = true;
      continue;
    }
    CompiledRule c;
    c.index = i;
    c.stratum = analysis_.rules[i].stratum;
    const auto& anchor = analysis_.rules[i].anchor;
    if (r.body.empty()) {
      TimePoint t = r.head.atoms[0].time.value();
      for (const auto& a : r.head.atoms) t = std::min(t, a.time.value());
      c.anchorTime = t;
    } else if (anchor && anchor->isGround()) {
      c.anchorTime = anchor->value();
    } else if (anchor) {
      c.anchorVar = anchor->var;
      for (const auto& l : r.body.literals) {
        if (auto o = l.as<Ordinary>(); o && o->atom.time == *anchor) {
          c.anchorPred = o->atom.predicate;
          break;
        }
      }
    }
    if (c.anchorTime) constants.insert(*c.anchorTime);
    auto vars = positiveVars(r.body);
    c.keyVars.assign(vars.begin(), vars.end());
    maxStratum = std::max(maxStratum, c.stratum);
    rules_.push_back(std::move(c));
  }
  byStratum_.resize(static_cast<std::size_t>(maxStratum) + 1);
  for (std::size_t k = 0; k < rules_.size(); ++k) {
    byStratum_[static_cast<std::size_t>(rules_[k].stratum)].push_back(k);
  }
  constantTimes_.assign(constants.begin(), constants.end());
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;
Engine& Engine::operator=(Engine&&) noexcept = default;

std::size_t Engine::pathCount() const { return paths_.size(); }

ModelSet Engine::models() const {
  std::vector<Interpretation> out;
  for (const auto& p : paths_) {
    if (p->status == Status::Exhausted) out.push_back(p->I);
  }
  return canonicalModels(std::move(out));
}

std::size_t Engine::distinctModels() const { return models().size(); }

ModelSet Engine::saturate(const std::vector<Atom>& facts) {
  paths_.clear();
  stack_.clear();
  steps_ = 0;
  auto root = std::make_unique<Path>();
  for (const auto& a : programFacts_) root->I.insert(a);
  for (const auto& a : facts) root->I.insert(evalGround(a));
  if (unconditionalFail_) root->status = Status::Closed;
  paths_.push_back(std::move(root));
  if (paths_.back()->status == Status::Open) stack_.push_back(0);
  run();
  return models();
}

ModelSet Engine::addFacts(const std::vector<Atom>& facts) {
  if (facts.empty()) return models();
  auto minIt = std::min_element(facts.begin(), facts.end(), [](const Atom& a, const Atom& b) {
    return a.time.value() < b.time.value();
  });
  TimePoint m = minIt->time.value();
  for (const auto& p : paths_) {
    if (p->status != Status::Open && p->clock && *p->clock > m) throw StaleFact(*minIt, *p->clock);
  }

  std::vector<std::unique_ptr<Path>> next;
  std::set<const Path*> restored;
  auto resume = [&](std::unique_ptr<Path> p) {
    for (const auto& a : facts) p->I.insert(evalGround(a));
    p->status = Status::Open;
    p->midTime = false;
    p->id = next.size();
    stack_.push_back(next.size());
    next.push_back(std::move(p));
  };
  for (auto& p : paths_) {
    if (p->clock && *p->clock == m) {
      if (p->checkpoint && restored.insert(p->checkpoint.get()).second) {
        resume(std::make_unique<Path>(*p->checkpoint));
      }
      continue;
    }
    if (p->status == Status::Exhausted) {
      resume(std::move(p));
    } else {
      // Closed before the new facts' time: stays closed.
      p->id = next.size();
      next.push_back(std::move(p));
    }
  }
  paths_ = std::move(next);
  // Depth-first order: first path on top of the stack.
  std::reverse(stack_.begin(), stack_.end());
  run();
  return models();
}

void Engine::run() {
  while (!stack_.empty()) {
    std::size_t k = stack_.back();
    stack_.pop_back();
    Path& p = *paths_[k];
    if (p.status != Status::Open) continue;
    if (runPath(p) && limits_.maxModels && !stack_.empty() && distinctModels() >= limits_.maxModels) {
      throw LimitExceeded("max-models", p.id, models());
    }
  }
}

std::optional<TimePoint> Engine::nextTime(const Path& p) const {
  std::optional<TimePoint> t = p.I.nextTimeAfter(p.clock);
  auto it = p.clock ? std::upper_bound(constantTimes_.begin(), constantTimes_.end(), *p.clock)
                    : constantTimes_.begin();
  if (it != constantTimes_.end() && (!t || *it < *t)) t = *it;
  return t;
}

// Returns true when the path ends exhausted.
bool Engine::runPath(Path& p) {
  for (;;) {
    if (!p.midTime) {
      auto tau = nextTime(p);
      if (!tau) {
        p.status = Status::Exhausted;
        return true;
      }
      if (++p.iterations > limits_.maxTime) throw LimitExceeded("max-time", p.id, models());
      auto cp = std::make_shared<Path>();
      cp->I = p.I;
      cp->applied = p.applied;
      cp->clock = p.clock;
      cp->iterations = p.iterations - 1;
      p.checkpoint = std::move(cp);
      p.clock = tau;
      p.midTime = true;
      p.stratum = 0;
    }
    if (!processTime(p)) return false;
    p.midTime = false;
  }
}

// Saturates all strata at the path's current time. Returns false if the
// path was closed.
bool Engine::processTime(Path& p) {
  const TimePoint tau = *p.clock;
  int sigma = p.stratum;
  const int top = static_cast<int>(byStratum_.size());
  while (sigma < top) {
    p.stratum = sigma;
    int restartAt = sigma;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t k : byStratum_[static_cast<std::size_t>(sigma)]) {
        const CompiledRule& cr = rules_[k];
        const Rule& rule = program_.rules[cr.index];
        Substitution seed;
        if (cr.anchorTime) {
          if (*cr.anchorTime != tau) continue;
        } else if (cr.anchorVar) {
          if (!cr.anchorPred.empty()) {
            const auto* b = p.I.bucket(cr.anchorPred);
            if (!b || !b->count(tau)) continue;
          }
          seed.bind(*cr.anchorVar, Term::integer(tau));
        }
        std::vector<Substitution> matchers;
        try {
          matchers = matchAll(p.I, rule.body, seed);
        } catch (const EvalError& e) {
          throw EvalError("rule#" + std::to_string(cr.index + 1) + ": " + e.what());
        }
        for (const auto& g : matchers) {
          std::vector<Term> key;
          key.reserve(cr.keyVars.size());
          for (const auto& v : cr.keyVars) key.push_back(*g.lookup(v));
          if (!p.applied.emplace(cr.index, std::move(key)).second) continue;
          ++steps_;
          if (limits_.maxSteps && steps_ > limits_.maxSteps) {
            throw LimitExceeded("max-steps", p.id, models());
          }
          TraceEvent ev{tau, sigma, cr.index, p.id, {}, 0};
          if (rule.head.isFail()) {
            if (trace_) trace_(ev);
            p.status = Status::Closed;
            return false;
          }
          auto heads = groundHead(rule.head, g);
          ev.head = heads;
          if (trace_) trace_(ev);

          auto addAll = [&](Path& q, const std::vector<Atom>& atoms) {
            bool any = false;
            for (const auto& a : atoms) {
              if (!q.I.insert(a)) continue;
              any = true;
              if (a.time.value() == tau) {
                int s = analysis_.strata.of(a.predicate);
                if (s >= 0 && s < restartAt) restartAt = s;
              }
            }
            return any;
          };

          if (heads.size() == 1) {
            if (addAll(p, heads)) changed = true;
            continue;
          }
          auto subsets = subsetsOf(heads);
          std::vector<Interpretation> seen;
          std::vector<std::unique_ptr<Path>> siblings;
          Interpretation base = p.I;
          for (std::size_t b = 0; b < subsets.size(); ++b) {
            Interpretation candidate = base;
            for (const auto& a : subsets[b]) candidate.insert(a);
            if (std::find(seen.begin(), seen.end(), candidate) != seen.end()) continue;
            seen.push_back(candidate);
            if (b == 0) continue;
            auto q = std::make_unique<Path>(p);
            int saveRestart = restartAt;
            addAll(*q, subsets[b]);
            // A sibling restarts at the lowest stratum its new atoms touch.
            q->stratum = std::min(restartAt, sigma);
            restartAt = saveRestart;
            siblings.push_back(std::move(q));
          }
          if (addAll(p, subsets[0])) changed = true;
          for (auto it = siblings.rbegin(); it != siblings.rend(); ++it) {
            (*it)->id = paths_.size();
            stack_.push_back(paths_.size());
            paths_.push_back(std::move(*it));
          }
        }
      }
    }
    sigma = restartAt < sigma ? restartAt : sigma + 1;
  }
  p.stratum = 0;
  return true;
}

ModelSet saturate(const Program& p, const std::vector<Atom>& facts, Limits limits) {
  Engine e(p);
  e.setLimits(limits);
  return e.saturate(facts);
}

}  // namespace strata
