#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strata/program.hpp"

namespace strata {

struct CallEdge {
  std::string from;
  std::string to;
  bool negative = false;

  friend auto operator<=>(const CallEdge&, const CallEdge&) = default;
};

// Nodes are predicate names plus one pseudo-node `$fail#k` per FAIL rule k.
// A rule annotated with @preds(...) is represented by the annotated names in
// place of its head predicates.
struct CallGraph {
  std::vector<std::string> nodes;  // sorted
  std::vector<CallEdge> edges;     // sorted, unique

  std::vector<std::string> successors(const std::string& node) const;
};

struct Stratification {
  std::map<std::string, int> stratumOf;
  // SCCs in stratum order; members sorted.
  std::vector<std::vector<std::string>> components;

  int of(const std::string& node) const;  // -1 if unknown
};

struct Violation {
  std::string code;  // RANGE, SBTP-a, SBTP-b, SBTP-c.i, SBTP-c.ii, SBT-compr
  std::size_t rule = 0;
  SourceLoc loc;
  std::string message;
};

struct CheckOptions {
  // Plain SBT: NOT blocks must be strictly earlier, no comprehensions.
  bool sbtOnly = false;
};

// Per-rule result of the analysis, consumed by the engine.
struct RuleInfo {
  int stratum = 0;
  // Time term of the positive literal that drives the rule; empty for
  // body-less rules.
  std::optional<TimeTerm> anchor;
  std::vector<std::string> headNodes;
};

struct Analysis {
  CallGraph graph;
  Stratification strata;
  std::vector<RuleInfo> rules;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

std::vector<std::string> headNodes(const Rule& r, std::size_t index);

CallGraph buildCallGraph(const Program& p);
Stratification computeStrata(const CallGraph& g);

std::optional<Violation> checkRangeRestricted(const Rule& r, std::size_t index = 0);

// Checks every rule against the time/predicate stratification conditions.
// `anchors`, if given, receives the selected anchor for each rule.
std::vector<Violation> checkSBTP(const Program& p, const Stratification& s, CheckOptions opts = {},
                                 std::vector<std::optional<TimeTerm>>* anchors = nullptr);

Analysis analyze(const Program& p, CheckOptions opts = {});

// `file:line:col: [code] message`
std::string render(const Violation& v, const std::string& file);

}  // namespace strata
