#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "strata/matcher.hpp"
#include "strata/program.hpp"
#include "strata/stratify.hpp"

namespace strata {

// Sorted canonically and free of duplicates.
using ModelSet = std::vector<Interpretation>;

struct Limits {
  std::size_t maxModels = 0;      // 0: unlimited
  std::size_t maxTime = 10000;    // time points processed per path
  std::size_t maxSteps = 0;       // rule firings over all paths; 0: unlimited
};

class ProgramRejected : public std::runtime_error {
 public:
  explicit ProgramRejected(std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class LimitExceeded : public std::runtime_error {
 public:
  LimitExceeded(std::string limit, std::size_t path, ModelSet partial);
  const std::string& limit() const { return limit_; }
  std::size_t path() const { return path_; }
  const ModelSet& partial() const { return partial_; }

 private:
  std::string limit_;
  std::size_t path_;
  ModelSet partial_;
};

class StaleFact : public std::runtime_error {
 public:
  StaleFact(const Atom& fact, TimePoint clock);
  const Atom& fact() const { return fact_; }
  TimePoint clock() const { return clock_; }

 private:
  Atom fact_;
  TimePoint clock_;
};

struct TraceEvent {
  TimePoint time = 0;
  int stratum = 0;
  std::size_t rule = 0;
  std::size_t path = 0;
  std::vector<Atom> head;  // empty for FAIL
  // Index of the chosen subset for a disjunctive head, 0 otherwise.
  std::size_t branch = 0;
};

using TraceSink = std::function<void(const TraceEvent&)>;

// `[time τ / stratum σ] rule#k fired: head`
std::string formatTrace(const TraceEvent& e, const Program* decls = nullptr);

// All non-empty subsets of the distinct ground head atoms, smallest first and
// lexicographic in head position. std::nullopt stands for FAIL.
std::optional<std::vector<std::vector<Atom>>> splitHead(const Head& h, const Substitution& s);

// Returns a description of every ground rule instance violated by `model`;
// empty when the model satisfies the program.
std::vector<std::string> verifyModel(const Program& p, const Interpretation& model);

ModelSet canonicalModels(std::vector<Interpretation> models);

class Engine {
 public:
  // Throws ProgramRejected if the program fails range restriction or SBTP.
  explicit Engine(Program p, CheckOptions opts = {});
  ~Engine();
  Engine(Engine&&) noexcept;
  Engine& operator=(Engine&&) noexcept;

  const Program& program() const { return program_; }
  const Analysis& analysis() const { return analysis_; }

  void setLimits(Limits l) { limits_ = l; }
  void setTrace(TraceSink sink) { trace_ = std::move(sink); }

  // Starts from scratch with the program facts plus `facts`.
  ModelSet saturate(const std::vector<Atom>& facts);

  // Adds facts with current or later times and resumes all retained paths.
  ModelSet addFacts(const std::vector<Atom>& facts);

  ModelSet models() const;
  std::size_t steps() const { return steps_; }
  std::size_t pathCount() const;

 private:
  struct Path;
  struct CompiledRule {
    std::size_t index = 0;
    int stratum = 0;
    std::optional<std::string> anchorVar;
    std::optional<TimePoint> anchorTime;
    std::string anchorPred;
    std::vector<std::string> keyVars;
  };

  void run();
  bool runPath(Path& p);
  bool processTime(Path& p);
  std::optional<TimePoint> nextTime(const Path& p) const;
  std::size_t distinctModels() const;

  Program program_;
  Analysis analysis_;
  Limits limits_;
  TraceSink trace_;
  std::vector<CompiledRule> rules_;
  std::vector<std::vector<std::size_t>> byStratum_;
  std::vector<TimePoint> constantTimes_;
  std::vector<Atom> programFacts_;
  bool unconditionalFail_ = false;

  std::vector<std::unique_ptr<Path>> paths_;
  std::vector<std::size_t> stack_;
  std::size_t steps_ = 0;
};

// One-shot convenience wrapper.
ModelSet saturate(const Program& p, const std::vector<Atom>& facts, Limits limits = {});

}  // namespace strata
