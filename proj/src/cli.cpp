#include "strata/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "strata/dl.hpp"
#include "strata/engine.hpp"
#include "strata/parser.hpp"
#include "strata/stratify.hpp"

namespace strata {

namespace {

using nlohmann::json;

struct Options {
  std::vector<std::string> programs;
  std::vector<std::string> facts;
  std::vector<std::string> only;
  std::string entails;
  bool header = false;
  bool json = false;
  bool trace = false;
  bool sbtOnly = false;
  bool showStrata = false;
  bool showModels = false;
  std::size_t maxModels = 0;
  std::size_t maxTime = 10000;
  std::size_t maxSteps = 0;
};

struct InputError {
  std::string message;
};

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError{path + ": cannot open file"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Several program files are parsed as one text; this maps global line
// numbers back to files.
struct Source {
  struct Part {
    std::string file;
    int firstLine;
  };
  std::string text;
  std::vector<Part> parts;

  void add(const std::string& file) {
    std::string body = readFile(file);
    if (!body.empty() && body.back() != '\n') body += '\n';
    int first = 1 + static_cast<int>(std::count(text.begin(), text.end(), '\n'));
    parts.push_back({file, first});
    text += body;
  }

  std::pair<std::string, SourceLoc> locate(SourceLoc loc) const {
    const Part* p = &parts.front();
    for (const auto& part : parts) {
      if (part.firstLine <= loc.line) p = &part;
    }
    return {p->file, SourceLoc{loc.line - p->firstLine + 1, loc.column}};
  }
};

std::string where(const Source& src, SourceLoc loc) {
  auto [file, l] = src.locate(loc);
  return file + ":" + std::to_string(l.line) + ":" + std::to_string(l.column);
}

Limits limitsOf(const Options& o) { return Limits{o.maxModels, o.maxTime, o.maxSteps}; }

bool keep(const Options& o, const Atom& a) {
  return o.only.empty() || std::find(o.only.begin(), o.only.end(), a.predicate) != o.only.end();
}

json modelsJson(const ModelSet& models, const Program& p, const Options& o) {
  json arr = json::array();
  for (const auto& m : models) {
    json atoms = json::array();
    for (const auto& a : m.atoms()) {
      if (keep(o, a)) atoms.push_back(printAtom(a, &p));
    }
    arr.push_back(std::move(atoms));
  }
  return arr;
}

void printModels(std::ostream& out, const ModelSet& models, const Program& p, const Options& o) {
  for (std::size_t i = 0; i < models.size(); ++i) {
    out << "% model " << (i + 1) << "\n";
    for (const auto& a : models[i].atoms()) {
      if (keep(o, a)) out << printAtom(a, &p) << ".\n";
    }
  }
}

int reportParseError(const ParseError& e, const Source& src, std::ostream& err) {
  for (const auto& d : e.diagnostics()) {
    err << where(src, d.loc) << ": " << toString(d.kind) << ": " << d.message << "\n";
  }
  return kExitInput;
}

Program loadProgram(const Options& o, Source& src) {
  if (o.programs.empty()) throw InputError{"no program file given"};
  for (const auto& f : o.programs) src.add(f);
  return parseProgram(src.text);
}

std::vector<Atom> loadFacts(const Options& o, const Program& p) {
  std::vector<Atom> out;
  for (const auto& spec : o.facts) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError{"--facts expects PRED=FILE, got '" + spec + "'"};
    std::string pred = spec.substr(0, eq);
    std::string path = spec.substr(eq + 1);
    std::string text = readFile(path);
    PredicateDecl schema;
    if (auto it = p.declarations.find(pred); it != p.declarations.end()) {
      schema = it->second;
    } else {
      std::size_t arity = 0;
      if (auto a = p.arities.find(pred); a != p.arities.end()) {
        arity = a->second;
      } else {
        std::string first = text.substr(0, text.find('\n'));
        arity = static_cast<std::size_t>(std::count(first.begin(), first.end(), ',')) + 1;
      }
      schema.name = pred;
      schema.params.assign(arity, Sort::Any);
      schema.labels.assign(arity, "any");
      schema.params[0] = Sort::Time;
      schema.labels[0] = "time";
    }
    try {
      auto atoms = parseFactsCSV(text, schema, o.header);
      out.insert(out.end(), atoms.begin(), atoms.end());
    } catch (const RowError& e) {
      throw InputError{path + ": " + e.what()};
    }
  }
  return out;
}

json violationJson(const Violation& v, const Source& src) {
  auto [file, loc] = src.locate(v.loc);
  return json{{"file", file}, {"line", loc.line}, {"column", loc.column}, {"code", v.code},
              {"rule", v.rule + 1}, {"message", v.message}};
}

std::string renderViolation(const Violation& v, const Source& src) {
  auto [file, loc] = src.locate(v.loc);
  Violation local = v;
  local.loc = loc;
  return render(local, file);
}

int cmdCheck(const Options& o, std::ostream& out, std::ostream& err) {
  Source src;
  Program p;
  try {
    p = loadProgram(o, src);
  } catch (const ParseError& e) {
    return reportParseError(e, src, err);
  }
  Analysis a = analyze(p, CheckOptions{o.sbtOnly});
  if (o.json) {
    json diags = json::array();
    for (const auto& v : a.violations) diags.push_back(violationJson(v, src));
    json strata = json::array();
    for (const auto& comp : a.strata.components) strata.push_back(comp);
    json doc{{"ok", a.ok()}, {"rules", p.rules.size()}, {"diagnostics", diags}};
    if (o.showStrata) doc["strata"] = strata;
    out << doc.dump(2) << "\n";
  } else {
    for (const auto& v : a.violations) out << renderViolation(v, src) << "\n";
    if (o.showStrata) {
      for (std::size_t i = 0; i < a.strata.components.size(); ++i) {
        out << "stratum " << i << ":";
        for (const auto& n : a.strata.components[i]) out << " " << n;
        out << "\n";
      }
    }
    if (a.ok()) out << "ok: " << p.rules.size() << " rules\n";
  }
  return a.ok() ? kExitOk : kExitRejected;
}

int cmdRun(const Options& o, std::ostream& out, std::ostream& err) {
  Source src;
  Program p;
  try {
    p = loadProgram(o, src);
  } catch (const ParseError& e) {
    return reportParseError(e, src, err);
  }
  std::vector<Atom> facts = loadFacts(o, p);
  std::optional<Engine> engine;
  try {
    engine.emplace(p, CheckOptions{o.sbtOnly});
  } catch (const ProgramRejected& e) {
    for (const auto& v : e.violations()) err << renderViolation(v, src) << "\n";
    return kExitRejected;
  }
  engine->setLimits(limitsOf(o));
  std::vector<TraceEvent> events;
  if (o.trace) {
    engine->setTrace([&](const TraceEvent& e) { events.push_back(e); });
  }

  ModelSet models;
  std::string limit;
  try {
    models = engine->saturate(facts);
  } catch (const LimitExceeded& e) {
    models = e.partial();
    limit = e.what();
  } catch (const EvalError& e) {
    err << "evaluation error: " << e.what() << "\n";
    return kExitInput;
  }

  if (o.json) {
    json m = modelsJson(models, p, o);
    if (o.trace) {
      json tr = json::array();
      for (const auto& e : events) {
        json head = json::array();
        for (const auto& a : e.head) head.push_back(printAtom(a, &p));
        tr.push_back(json{{"time", e.time}, {"stratum", e.stratum}, {"rule", e.rule + 1},
                          {"path", e.path}, {"fail", e.head.empty()}, {"head", head}});
      }
      json doc{{"trace", tr}, {"models", m}};
      if (!limit.empty()) doc["partial"] = limit;
      out << doc.dump(2) << "\n";
    } else {
      out << m.dump(2) << "\n";
    }
  } else {
    for (const auto& e : events) out << formatTrace(e, &p) << "\n";
    printModels(out, models, p, o);
    if (!limit.empty()) out << "% partial: " << limit << "\n";
  }
  if (!limit.empty()) {
    err << limit << "\n";
    return kExitLimit;
  }
  if (models.empty()) {
    if (!o.json) out << "% no models\n";
    return kExitNoModels;
  }
  return kExitOk;
}

int cmdDL(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.programs.size() != 1) throw InputError{"dl expects exactly one knowledge base file"};
  dl::KnowledgeBase kb;
  std::optional<std::pair<dl::Individual, dl::Concept>> query;
  try {
    kb = dl::parseKB(readFile(o.programs[0]));
    if (!o.entails.empty()) {
      auto sep = o.entails.find(':');
      if (sep == std::string::npos) throw InputError{"--entails expects \"individual : concept\""};
      query.emplace(dl::parseIndividual(o.entails.substr(0, sep)), dl::parseConcept(o.entails.substr(sep + 1)));
    }
  } catch (const dl::KBParseError& e) {
    std::string msg = e.what();
    msg = msg.substr(msg.find(": ") + 2);
    err << o.programs[0] << ":" << e.line() << ": KBParseError: " << msg << "\n";
    return kExitInput;
  } catch (const dl::UnsupportedGCI& e) {
    err << "--entails: " << e.what() << "\n";
    return kExitInput;
  }

  dl::SatResult sat = dl::isSatisfiable(kb, limitsOf(o));
  std::optional<dl::Entailment> ent;
  if (query) ent = dl::entailedInstance(sat, query->first, query->second);
  for (const auto& m : sat.models) {
    for (const auto& v : dl::functionalViolations(m, kb.functional)) err << "functional role violated: " << v << "\n";
  }

  dl::Translation tr = dl::translateKB(kb);
  if (o.json) {
    json doc{{"verdict", dl::toString(sat.verdict)}, {"models", sat.models.size()}};
    if (ent) doc["entailment"] = dl::toString(*ent);
    if (!sat.limit.empty()) doc["limit"] = sat.limit;
    if (o.showModels) doc["interpretations"] = modelsJson(sat.models, tr.program, o);
    out << doc.dump(2) << "\n";
  } else {
    out << dl::toString(sat.verdict) << "\n";
    if (ent) out << dl::toString(*ent) << "\n";
    if (o.showModels) printModels(out, sat.models, tr.program, o);
  }
  if (!sat.limit.empty()) err << "limit " << sat.limit << " reached\n";
  if (sat.verdict == dl::Verdict::Undecided || (ent && *ent == dl::Entailment::Undecided)) return kExitLimit;
  if (sat.verdict == dl::Verdict::Unsat) return kExitNoModels;
  return kExitOk;
}

void addRunOptions(CLI::App* cmd, Options& o) {
  cmd->add_option("--facts", o.facts, "Facts from CSV, PRED=FILE (repeatable)");
  cmd->add_flag("--header", o.header, "CSV files have a header row");
  cmd->add_option("--max-models", o.maxModels, "Stop after N models (0: all)");
  cmd->add_option("--max-time", o.maxTime, "Time points processed per path");
  cmd->add_option("--max-steps", o.maxSteps, "Rule firings in total (0: unlimited)");
  cmd->add_option("--only", o.only, "Print only these predicates")->delimiter(',');
  cmd->add_flag("--json", o.json, "JSON output");
  cmd->add_flag("--sbt-only", o.sbtOnly, "Require plain stratification by time");
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"strata: stratified disjunctive logic programs over time"};
  app.require_subcommand(1);
  Options o;

  auto* check = app.add_subcommand("check", "Check range restriction and stratification");
  check->add_option("--program,program", o.programs, "Program files")->required();
  check->add_flag("--sbt-only", o.sbtOnly, "Require plain stratification by time");
  check->add_flag("--show-strata", o.showStrata, "Print the strata");
  check->add_flag("--json", o.json, "JSON diagnostics");

  auto* run = app.add_subcommand("run", "Compute the models of a program");
  run->add_option("--program,program", o.programs, "Program files")->required();
  addRunOptions(run, o);
  run->add_flag("--trace", o.trace, "Print rule firings");

  auto* trace = app.add_subcommand("trace", "Like run, printing every rule firing");
  trace->add_option("--program,program", o.programs, "Program files")->required();
  addRunOptions(trace, o);

  auto* dlc = app.add_subcommand("dl", "Decide an ALCIF knowledge base");
  dlc->add_option("--program,--kb,kb", o.programs, "Knowledge base file")->required();
  dlc->add_option("--entails", o.entails, "Instance query \"individual : concept\"");
  dlc->add_option("--max-models", o.maxModels, "Stop after N models (0: all)");
  dlc->add_option("--max-time", o.maxTime, "Time points processed per path");
  dlc->add_option("--max-steps", o.maxSteps, "Rule firings in total (0: unlimited)");
  dlc->add_option("--only", o.only, "Print only these predicates")->delimiter(',');
  dlc->add_flag("--show-models", o.showModels, "Print the models");
  dlc->add_flag("--json", o.json, "JSON output");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (check->parsed()) return cmdCheck(o, out, err);
    if (run->parsed()) return cmdRun(o, out, err);
    if (trace->parsed()) {
      o.trace = true;
      return cmdRun(o, out, err);
    }
    return cmdDL(o, out, err);
  } catch (const InputError& e) {
    err << e.message << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace strata
