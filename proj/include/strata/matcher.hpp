#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "strata/program.hpp"

namespace strata {

// A set of ground atoms, bucketed by predicate and time.
class Interpretation {
 public:
  using TimeBuckets = std::map<TimePoint, std::set<Atom>>;

  Interpretation() = default;
  explicit Interpretation(const std::vector<Atom>& atoms);

  // Returns true if the atom was not present before.
  bool insert(const Atom& a);
  bool contains(const Atom& a) const;

  const TimeBuckets* bucket(const std::string& predicate) const;
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // All atoms in canonical order: time, predicate, arguments.
  std::vector<Atom> atoms() const;
  // Smallest atom time strictly greater than `t`.
  std::optional<TimePoint> nextTimeAfter(std::optional<TimePoint> t) const;
  std::optional<TimePoint> maxTime() const;

  friend bool operator==(const Interpretation& a, const Interpretation& b) {
    return a.size_ == b.size_ && a.preds_ == b.preds_;
  }
  friend bool operator<(const Interpretation& a, const Interpretation& b) {
    return a.atoms() < b.atoms();
  }

 private:
  std::map<std::string, TimeBuckets> preds_;
  std::map<TimePoint, std::size_t> times_;
  std::size_t size_ = 0;
};

// Return false to stop the enumeration.
using MatchCallback = std::function<bool(const Substitution&)>;

// Enumerates the body matchers of `body` extending `seed`, strictly left to
// right. Each result binds the seed variables plus every variable bound by
// the positive body; variables local to NOT blocks, comprehension inner
// bodies and COLLECT bodies are not included. Returns false if the callback
// stopped the enumeration.
bool matchBody(const Interpretation& I, const Body& body, const Substitution& seed,
               const MatchCallback& cb);

std::vector<Substitution> matchAll(const Interpretation& I, const Body& body,
                                   const Substitution& seed = {});

// True iff `body` has at least one matcher extending `seed`.
bool satisfiable(const Interpretation& I, const Body& body, const Substitution& seed = {});

// NOT semantics: true iff `body` has no matcher extending `seed`.
bool holdsNot(const Interpretation& I, const Body& body, const Substitution& seed = {});

}  // namespace strata
