#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "strata/program.hpp"

namespace strata {

struct Diagnostic {
  enum class Kind { Syntax, Binding, Arity, Type };
  Kind kind = Kind::Syntax;
  SourceLoc loc;
  std::string message;
};

const char* toString(Diagnostic::Kind k);

// Thrown by parseProgram. Syntax errors abort at the first offending token;
// binding and arity errors are collected over the whole program.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

class RowError : public std::runtime_error {
 public:
  RowError(std::size_t row, const std::string& what);
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

Program parseProgram(std::string_view text);

// Parses a single ground term in the rule-language term syntax. Bare
// identifiers are returned as variables.
Term parseTerm(std::string_view text);

// Parses one ground atom, e.g. `Change(5, 2, "red")`. Uses the time
// position declared in `decls`, if given.
Atom parseAtom(std::string_view text, const Program* decls = nullptr);

// ISO-8601 date-time (YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM|-HH:MM]) to epoch
// seconds. Date-times without an offset are read as UTC.
std::optional<TimePoint> parseDateTime(std::string_view text);

// One atom per row; columns follow the declared parameter order. No header
// row unless `skipHeader`.
std::vector<Atom> parseFactsCSV(std::string_view text, const PredicateDecl& schema,
                                bool skipHeader = false);

std::string printTerm(const Term& t);
std::string printTimeTerm(const TimeTerm& t);
std::string printAtom(const Atom& a, const Program* decls = nullptr);
std::string printBody(const Body& b, const Program* decls = nullptr);
std::string printRule(const Rule& r, const Program* decls = nullptr);
std::string printProgram(const Program& p);

}  // namespace strata
