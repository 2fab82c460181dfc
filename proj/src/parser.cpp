#include "strata/parser.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <sstream>

namespace strata {

const char* toString(Diagnostic::Kind k) {
  switch (k) {
    case Diagnostic::Kind::Syntax:
      return "SyntaxError";
    case Diagnostic::Kind::Binding:
      return "BindingError";
    case Diagnostic::Kind::Arity:
      return "ArityError";
    case Diagnostic::Kind::Type:
      return "TypeError";
  }
  return "Error";
}

namespace {

std::string joinDiagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    if (i) os << "\n";
    os << diags[i].loc.line << ":" << diags[i].loc.column << ": " << toString(diags[i].kind) << ": "
       << diags[i].message;
  }
  return os.str();
}

}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diags)
    : std::runtime_error(joinDiagnostics(diags)), diags_(std::move(diags)) {}

RowError::RowError(std::size_t row, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

// ---------------------------------------------------------------------------
// Date-times

std::optional<TimePoint> parseDateTime(std::string_view s) {
  auto digits = [&](std::size_t pos, std::size_t n) -> std::optional<int> {
    if (pos + n > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2), h = digits(11, 2), mi = digits(14, 2);
  if (!y || !mo || !d || !h || !mi || s.size() < 16 || s[4] != '-' || s[7] != '-' ||
      (s[10] != 'T' && s[10] != ' ') || s[13] != ':') {
    return std::nullopt;
  }
  std::size_t pos = 16;
  int sec = 0;
  if (pos < s.size() && s[pos] == ':') {
    auto ss = digits(pos + 1, 2);
    if (!ss) return std::nullopt;
    sec = *ss;
    pos += 3;
    // Fractional seconds are truncated.
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    }
  }
  std::int64_t offset = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      auto oh = digits(pos + 1, 2), om = digits(pos + 4, 2);
      if (!oh || !om || s[pos + 3] != ':') return std::nullopt;
      offset = (*oh * 3600 + *om * 60) * (s[pos] == '+' ? 1 : -1);
      pos += 6;
    }
  }
  if (pos != s.size()) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || sec > 60) return std::nullopt;
  std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * 86400 + *h * 3600 + *mi * 60 + sec - offset;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Ident, Int, Str, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t num = 0;
  SourceLoc loc;
  bool spaceBefore = false;
};

struct SyntaxFail {
  SourceLoc loc;
  std::string message;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      bool space = skipSpace();
      Token t;
      t.loc = {line_, col_};
      t.spaceBefore = space;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lexNumber(t);
      } else if (c == '"') {
        lexString(t);
      } else {
        lexPunct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool skipSpace() {
    bool any = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        any = true;
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        any = true;
      } else if (src_.substr(pos_, 2) == "/*") {
        SourceLoc at{line_, col_};
        advance();
        advance();
        while (pos_ < src_.size() && src_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= src_.size()) throw SyntaxFail{at, "unterminated comment"};
        advance();
        advance();
        any = true;
      } else {
        break;
      }
    }
    return any;
  }

  void lexNumber(Token& t) {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    if (pos_ - start == 4 && pos_ + 1 < src_.size() && src_[pos_] == '-' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      std::size_t end = pos_;
      while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) ||
                                   src_[end] == '-' || src_[end] == ':' || src_[end] == '+' ||
                                   src_[end] == '.')) {
        ++end;
      }
      // A trailing '.' terminates the rule, not the date-time.
      while (end > pos_ && src_[end - 1] == '.') --end;
      if (auto dt = parseDateTime(src_.substr(start, end - start))) {
        while (pos_ < end) advance();
        t.kind = Tok::Int;
        t.num = *dt;
        t.text = std::string(src_.substr(start, end - start));
        return;
      }
    }
    t.kind = Tok::Int;
    t.text = std::string(src_.substr(start, pos_ - start));
    try {
      t.num = std::stoll(t.text);
    } catch (const std::out_of_range&) {
      throw SyntaxFail{t.loc, "integer literal out of range"};
    }
  }

  void lexString(Token& t) {
    advance();
    std::string value;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      char c = src_[pos_];
      if (c == '\\' && pos_ + 1 < src_.size()) {
        advance();
        char e = src_[pos_];
        switch (e) {
          case 'n':
            value += '\n';
            break;
          case 't':
            value += '\t';
            break;
          default:
            value += e;
        }
      } else if (c == '\n') {
        throw SyntaxFail{t.loc, "unterminated string literal"};
      } else {
        value += c;
      }
      advance();
    }
    if (pos_ >= src_.size()) throw SyntaxFail{t.loc, "unterminated string literal"};
    advance();
    t.kind = Tok::Str;
    t.text = std::move(value);
  }

  void lexPunct(Token& t) {
    static const char* const two[] = {":-", "<=", ">=", "==", "!=", "&&", "||"};
    t.kind = Tok::Punct;
    for (const char* p : two) {
      if (src_.substr(pos_, 2) == p) {
        t.text = p;
        advance();
        advance();
        return;
      }
    }
    if (src_.substr(pos_, 3) == "\xE2\x89\xA4" || src_.substr(pos_, 3) == "\xE2\x89\xA5") {
      t.text = src_[pos_ + 2] == '\xA4' ? "<=" : ">=";
      for (int i = 0; i < 3; ++i) advance();
      return;
    }
    static const std::string one = "()[]{},.:@#<>=+-*/%!";
    char c = src_[pos_];
    if (one.find(c) == std::string::npos) {
      throw SyntaxFail{t.loc, std::string("unexpected character '") + c + "'"};
    }
    t.text = std::string(1, c);
    advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

bool isKeyword(const std::string& s) {
  return s == "NOT" || s == "FAIL" || s == "OR" || s == "AND" || s == "STH" || s == "LET" ||
         s == "CHOOSE" || s == "MATCH" || s == "COLLECT";
}

bool isMethodName(const std::string& s) {
  return s == "size" || s == "toSet" || s == "toList" || s == "contains" || s == "isEmpty" ||
         s == "union" || s == "member";
}

bool isInfix(const std::string& op) {
  static const char* const ops[] = {"+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||"};
  return std::find_if(std::begin(ops), std::end(ops), [&](const char* o) { return op == o; }) !=
         std::end(ops);
}

std::optional<CompareOp> compareOp(const std::string& op) {
  if (op == "<") return CompareOp::Lt;
  if (op == "<=") return CompareOp::Le;
  if (op == ">") return CompareOp::Gt;
  if (op == ">=") return CompareOp::Ge;
  return std::nullopt;
}

Sort sortFromLabel(std::string label) {
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (label == "time") return Sort::Time;
  if (label == "int" || label == "integer") return Sort::Int;
  if (label == "string" || label == "str") return Sort::String;
  if (label == "bool" || label == "boolean") return Sort::Bool;
  if (label == "term") return Sort::Term;
  return Sort::Any;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, Program* prog) : toks_(std::move(toks)), prog_(prog) {}

  void parseProgram() {
    while (peek().kind != Tok::End) {
      if (isPunct("#")) {
        parseDirective();
      } else {
        parseRule();
      }
    }
  }

  Term parseStandaloneTerm() {
    Term t = parseExpr();
    expectEnd();
    return t;
  }

  Atom parseStandaloneAtom() {
    SourceLoc at = peek().loc;
    Term t = parseExpr();
    if (isPunct(".")) next();
    expectEnd();
    return toAtom(t, at, false);
  }

  std::vector<Diagnostic>& diagnostics() { return diags_; }

 private:
  // -- token helpers -------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool isPunct(const char* p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool isIdent(const char* s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == s;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxFail{peek().loc, msg}; }
  std::string describe(const Token& t) const {
    switch (t.kind) {
      case Tok::End:
        return "end of input";
      case Tok::Str:
        return "string \"" + t.text + "\"";
      default:
        return "'" + t.text + "'";
    }
  }
  void expectPunct(const char* p) {
    if (!isPunct(p)) fail(std::string("expected '") + p + "' but found " + describe(peek()));
    next();
  }
  std::string expectIdent(const char* what) {
    if (peek().kind != Tok::Ident || isKeyword(peek().text)) {
      fail(std::string("expected ") + what + " but found " + describe(peek()));
    }
    return next().text;
  }
  void expectEnd() {
    if (peek().kind != Tok::End) fail("unexpected " + describe(peek()));
  }

  // -- directives ----------------------------------------------------------

  void parseDirective() {
    expectPunct("#");
    std::string kind = expectIdent("directive name");
    if (kind == "pred") {
      SourceLoc at = peek().loc;
      std::string name = expectIdent("predicate name");
      expectPunct("(");
      PredicateDecl decl;
      decl.name = name;
      if (!isPunct(")")) {
        for (;;) {
          std::string label = expectIdent("parameter sort");
          decl.labels.push_back(label);
          decl.params.push_back(sortFromLabel(label));
          if (!isPunct(",")) break;
          next();
        }
      }
      expectPunct(")");
      expectPunct(".");
      if (std::count(decl.params.begin(), decl.params.end(), Sort::Time) != 1) {
        throw SyntaxFail{at, "#pred " + name + " must have exactly one 'time' parameter"};
      }
      if (auto it = prog_->arities.find(name); it != prog_->arities.end()) {
        if (it->second != decl.arity()) {
          diags_.push_back({Diagnostic::Kind::Arity, at,
                            "predicate '" + name + "' declared with arity " + std::to_string(decl.arity()) +
                                " but used with arity " + std::to_string(it->second)});
        }
      }
      prog_->arities[name] = decl.arity();
      prog_->declarations[name] = std::move(decl);
    } else if (kind == "const") {
      SourceLoc at = peek().loc;
      std::string name = expectIdent("constant name");
      expectPunct("=");
      Term value = parseExpr();
      expectPunct(".");
      if (!value.isGround()) throw SyntaxFail{at, "constant '" + name + "' must be ground"};
      prog_->constants[name] = value;
    } else {
      fail("unknown directive '#" + kind + "'");
    }
  }

  // -- rules ---------------------------------------------------------------

  void parseRule() {
    SourceLoc at = peek().loc;
    Head head;
    bool conjunctive = false;
    if (isIdent("FAIL")) {
      next();
    } else {
      head.atoms.push_back(parseHeadAtom());
      std::string joiner;
      while (isIdent("OR") || isIdent("AND")) {
        std::string j = next().text;
        if (!joiner.empty() && j != joiner) {
          fail("a head cannot mix OR and AND");
        }
        joiner = j;
        head.atoms.push_back(parseHeadAtom());
      }
      conjunctive = joiner == "AND";
    }
    std::vector<Annotation> annotations;
    if (isPunct(":")) {
      next();
      for (;;) {
        expectPunct("@");
        Annotation a;
        a.key = expectIdent("annotation name");
        if (isPunct("(")) {
          next();
          if (!isPunct(")")) {
            for (;;) {
              if (peek().kind != Tok::Str) fail("annotation arguments must be strings");
              a.values.push_back(next().text);
              if (!isPunct(",")) break;
              next();
            }
          }
          expectPunct(")");
        }
        annotations.push_back(std::move(a));
        if (isPunct(",") && isPunct("@", 1)) {
          next();
        } else if (!isPunct("@")) {
          break;
        }
      }
    }
    Body body;
    if (isPunct(":-")) {
      next();
      body = parseBody();
    }
    expectPunct(".");

    std::vector<Rule> rules;
    if (conjunctive) {
      for (auto& a : head.atoms) rules.push_back(Rule{Head{{a}}, body, annotations, at});
    } else {
      rules.push_back(Rule{std::move(head), std::move(body), std::move(annotations), at});
    }
    for (auto& r : rules) {
      checkRule(r);
      prog_->rules.push_back(std::move(r));
    }
  }

  Atom parseHeadAtom() {
    SourceLoc at = peek().loc;
    Term t = parseExpr();
    return toAtom(t, at, false);
  }

  Body parseBody() {
    Body b;
    parseLiteral(b.literals);
    while (isPunct(",")) {
      next();
      parseLiteral(b.literals);
    }
    return b;
  }

  void skipAscription() {
    if (!isPunct(":")) return;
    next();
    expectIdent("type name");
    if (isPunct("[")) {
      int depth = 0;
      do {
        if (isPunct("[")) ++depth;
        if (isPunct("]")) --depth;
        if (peek().kind == Tok::End) fail("unterminated type ascription");
        next();
      } while (depth > 0);
    }
  }

  std::string parseBinder() {
    if (peek().kind != Tok::Ident || isKeyword(peek().text) || peek().text == "_") {
      fail("expected a variable but found " + describe(peek()));
    }
    std::string v = next().text;
    if (prog_->constants.count(v)) fail("'" + v + "' is a declared constant, not a variable");
    skipAscription();
    return v;
  }

  void parseLiteral(std::vector<BodyLiteral>& out) {
    SourceLoc at = peek().loc;
    if (peek().kind == Tok::Ident && isPunct("(", 1)) {
      const std::string& kw = peek().text;
      if (kw == "NOT") {
        next();
        next();
        Body inner = parseBody();
        expectPunct(")");
        for (const auto& l : inner.literals) {
          if (l.is<Negation>()) throw SyntaxFail{l.loc, "NOT directly inside NOT is not allowed"};
        }
        out.push_back({Negation{std::move(inner)}, at});
        return;
      }
      if (kw == "LET" || kw == "CHOOSE") {
        bool let = kw == "LET";
        next();
        next();
        std::string v = parseBinder();
        expectPunct(",");
        Term t = parseExpr();
        expectPunct(")");
        if (let) {
          out.push_back({Let{v, t}, at});
        } else {
          out.push_back({Choose{v, t}, at});
        }
        return;
      }
      if (kw == "MATCH") {
        next();
        next();
        Term pattern = parseExpr();
        expectPunct(",");
        Term scrutinee = parseExpr();
        expectPunct(")");
        out.push_back({Match{pattern, scrutinee}, at});
        return;
      }
      if (kw == "COLLECT") {
        next();
        next();
        std::string v = parseBinder();
        expectPunct(",");
        Term templ = parseExpr();
        if (!isIdent("STH")) fail("expected STH in COLLECT");
        next();
        Body inner = parseBody();
        expectPunct(")");
        out.push_back({Collect{v, templ, std::move(inner)}, at});
        return;
      }
    }
    if (isPunct("(")) {
      std::size_t save = pos_;
      try {
        next();
        Body group = parseBody();
        expectPunct(")");
        if (isPunct(",") || isPunct(".") || isPunct(")") || peek().kind == Tok::End) {
          for (auto& l : group.literals) out.push_back(std::move(l));
          return;
        }
      } catch (const SyntaxFail&) {
      }
      pos_ = save;
    }
    Term e = parseExpr();
    if (e.kind() == Term::Kind::Ctor) {
      out.push_back(classifyAtom(e, at));
      return;
    }
    if (isIdent("STH")) fail("STH must follow a comprehension atom");
    out.push_back({Builtin{e}, at});
  }

  BodyLiteral classifyAtom(const Term& e, SourceLoc at) {
    std::size_t tp = prog_->timePosition(e.text());
    if (e.args().empty()) throw SyntaxFail{at, "atom '" + e.text() + "' needs a time argument"};
    if (tp >= e.args().size()) {
      throw SyntaxFail{at, "atom '" + e.text() + "' has no argument at its declared time position"};
    }
    const Term& ta = e.args()[tp];
    if (ta.kind() == Term::Kind::Call && ta.args().size() == 2 && ta.args()[0].isVar()) {
      if (auto op = compareOp(ta.text())) {
        Comprehension c;
        c.pattern.predicate = e.text();
        c.pattern.time = TimeTerm::variable(ta.args()[0].text());
        for (std::size_t i = 0; i < e.args().size(); ++i) {
          if (i != tp) c.pattern.args.push_back(e.args()[i]);
        }
        c.op = *op;
        c.bound = toTimeTerm(ta.args()[1], at);
        if (isIdent("STH")) {
          next();
          if (isPunct("(")) {
            next();
            c.inner = parseBody();
            expectPunct(")");
          } else {
            parseLiteral(c.inner.literals);
          }
        }
        return {std::move(c), at};
      }
    }
    Atom a = toAtom(e, at, true);
    if (isIdent("STH")) fail("STH must follow a comprehension atom");
    return {Ordinary{std::move(a)}, at};
  }

  TimeTerm toTimeTerm(const Term& t, SourceLoc at) const {
    if (t.kind() == Term::Kind::Int) return TimeTerm::constant(t.asInt());
    if (t.isVar()) return TimeTerm::variable(t.text());
    if (t.kind() == Term::Kind::Call && t.text() == "+" && t.args().size() == 2) {
      const Term& a = t.args()[0];
      const Term& b = t.args()[1];
      const Term* v = a.kind() == Term::Kind::Int ? &b : &a;
      const Term* k = a.kind() == Term::Kind::Int ? &a : &b;
      if (k->kind() == Term::Kind::Int && k->asInt() >= 0) {
        TimeTerm inner = toTimeTerm(*v, at);
        if (!inner.isGround()) return TimeTerm::variable(inner.var, inner.offset + k->asInt());
      }
    }
    throw SyntaxFail{at, "invalid time term '" + printTerm(t) + "'"};
  }

  Atom toAtom(const Term& e, SourceLoc at, bool body) const {
    if (e.kind() != Term::Kind::Ctor) throw SyntaxFail{at, "expected an atom"};
    std::size_t tp = prog_->timePosition(e.text());
    if (e.args().empty()) throw SyntaxFail{at, "atom '" + e.text() + "' needs a time argument"};
    if (tp >= e.args().size()) {
      throw SyntaxFail{at, "atom '" + e.text() + "' has no argument at its declared time position"};
    }
    Atom a;
    a.predicate = e.text();
    a.time = toTimeTerm(e.args()[tp], at);
    for (std::size_t i = 0; i < e.args().size(); ++i) {
      if (i != tp) a.args.push_back(e.args()[i]);
    }
    (void)body;
    return a;
  }

  // -- expressions ---------------------------------------------------------

  Term mk(const std::string& op, std::vector<Term> args) {
    Term t = Term::call(op, std::move(args));
    if (t.isGround()) {
      try {
        return evalGround(t);
      } catch (const EvalError& e) {
        fail(e.what());
      }
    }
    return t;
  }

  Term parseExpr() { return parseOr(); }

  Term parseOr() {
    Term l = parseAnd();
    while (isPunct("||")) {
      next();
      l = mk("||", {l, parseAnd()});
    }
    return l;
  }

  Term parseAnd() {
    Term l = parseCmp();
    while (isPunct("&&")) {
      next();
      l = mk("&&", {l, parseCmp()});
    }
    return l;
  }

  Term parseCmp() {
    Term l = parseAdd();
    static const char* const ops[] = {"<", "<=", ">", ">=", "==", "!=", "="};
    for (const char* op : ops) {
      if (isPunct(op)) {
        next();
        std::string o = std::string(op) == "=" ? "==" : op;
        return mk(o, {l, parseAdd()});
      }
    }
    if (isIdent("contains")) {
      next();
      return mk("contains", {l, parseAdd()});
    }
    if (isIdent("to")) {
      next();
      return mk("range", {l, parseAdd()});
    }
    return l;
  }

  Term parseAdd() {
    Term l = parseMul();
    while (isPunct("+") || isPunct("-")) {
      std::string op = next().text;
      l = mk(op, {l, parseMul()});
    }
    return l;
  }

  Term parseMul() {
    Term l = parseUnary();
    while (isPunct("*") || isPunct("/") || isPunct("%")) {
      std::string op = next().text;
      l = mk(op, {l, parseUnary()});
    }
    return l;
  }

  Term parseUnary() {
    if (isPunct("!")) {
      next();
      return mk("!", {parseUnary()});
    }
    if (isPunct("-")) {
      next();
      if (peek().kind == Tok::Int && !peek().spaceBefore) return Term::integer(-next().num);
      return mk("neg", {parseUnary()});
    }
    return parsePostfix();
  }

  Term parsePostfix() {
    Term t = parsePrimary();
    while (isPunct(".") && !peek().spaceBefore && peek(1).kind == Tok::Ident &&
           !peek(1).spaceBefore && isMethodName(peek(1).text)) {
      next();
      std::string name = next().text;
      std::vector<Term> args{t};
      if (isPunct("(") && !peek().spaceBefore) {
        auto more = parseArgs(")");
        args.insert(args.end(), more.begin(), more.end());
      }
      t = mk(name, std::move(args));
    }
    return t;
  }

  std::vector<Term> parseArgs(const char* close) {
    next();  // opening bracket
    std::vector<Term> args;
    if (!isPunct(close)) {
      for (;;) {
        args.push_back(parseExpr());
        if (!isPunct(",")) break;
        next();
      }
    }
    expectPunct(close);
    return args;
  }

  Term parsePrimary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
        return Term::integer(next().num);
      case Tok::Str:
        return Term::string(next().text);
      case Tok::Ident: {
        if (isKeyword(t.text)) fail("unexpected keyword '" + t.text + "'");
        std::string name = next().text;
        if (isPunct("(") && !peek().spaceBefore) {
          auto args = parseArgs(")");
          if (isBuiltinFunction(name)) return mk(name, std::move(args));
          return Term::ctor(name, std::move(args));
        }
        if (name == "true") return Term::boolean(true);
        if (name == "false") return Term::boolean(false);
        if (name == "_") return Term::var("_" + std::to_string(++anon_));
        if (auto it = prog_->constants.find(name); it != prog_->constants.end()) return it->second;
        return Term::var(name);
      }
      case Tok::Punct:
        if (t.text == "(") {
          next();
          Term e = parseExpr();
          expectPunct(")");
          return e;
        }
        if (t.text == "{") return mk("Set", parseArgs("}"));
        if (t.text == "[") return mk("List", parseArgs("]"));
        break;
      case Tok::End:
        break;
    }
    fail("expected a term but found " + describe(t));
  }

  // -- static checks -------------------------------------------------------

  void checkArity(const Atom& a, SourceLoc at) {
    auto [it, inserted] = prog_->arities.emplace(a.predicate, a.arity());
    if (!inserted && it->second != a.arity()) {
      diags_.push_back({Diagnostic::Kind::Arity, at,
                        "predicate '" + a.predicate + "' used with arity " + std::to_string(a.arity()) +
                            " but previously with arity " + std::to_string(it->second)});
    }
  }

  void requireBound(const Term& t, const std::set<std::string>& bound, SourceLoc at,
                    const std::string& where) {
    for (const auto& v : varsOf(t)) {
      if (!bound.count(v)) {
        diags_.push_back({Diagnostic::Kind::Binding, at,
                          "variable '" + v + "' is used in " + where + " before it is bound"});
      }
    }
  }

  // Variables inside built-in calls of a pattern must already be bound.
  void requireCallsBound(const Term& t, const std::set<std::string>& bound, SourceLoc at) {
    if (t.isGround() || t.isVar()) return;
    if (t.kind() == Term::Kind::Call) {
      requireBound(t, bound, at, "a built-in call");
      return;
    }
    for (const auto& a : t.args()) requireCallsBound(a, bound, at);
  }

  void requireFresh(const std::string& v, const std::set<std::string>& bound, SourceLoc at) {
    if (bound.count(v)) {
      diags_.push_back({Diagnostic::Kind::Binding, at,
                        "binder variable '" + v + "' has already been used"});
    }
  }

  void checkBody(const Body& b, std::set<std::string>& bound) {
    for (const auto& l : b.literals) {
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Ordinary>) {
              checkArity(n.atom, l.loc);
              for (const auto& a : n.atom.args) requireCallsBound(a, bound, l.loc);
              auto vs = varsOf(n.atom);
              bound.insert(vs.begin(), vs.end());
            } else if constexpr (std::is_same_v<T, Comprehension>) {
              checkArity(n.pattern, l.loc);
              if (!n.bound.isGround() && !bound.count(n.bound.var)) {
                diags_.push_back({Diagnostic::Kind::Binding, l.loc,
                                  "comprehension bound '" + n.bound.var + "' is not bound"});
              }
              requireFresh(n.boundVar(), bound, l.loc);
              for (const auto& a : n.pattern.args) requireCallsBound(a, bound, l.loc);
              auto vs = varsOf(n.pattern);
              std::set<std::string> inner = bound;
              inner.insert(vs.begin(), vs.end());
              checkBody(n.inner, inner);
              bound.insert(vs.begin(), vs.end());
            } else if constexpr (std::is_same_v<T, Builtin>) {
              requireBound(n.expr, bound, l.loc, "a built-in");
            } else if constexpr (std::is_same_v<T, Let>) {
              requireBound(n.value, bound, l.loc, "LET");
              requireFresh(n.var, bound, l.loc);
              bound.insert(n.var);
            } else if constexpr (std::is_same_v<T, Choose>) {
              requireBound(n.candidates, bound, l.loc, "CHOOSE");
              requireFresh(n.var, bound, l.loc);
              bound.insert(n.var);
            } else if constexpr (std::is_same_v<T, Match>) {
              requireBound(n.scrutinee, bound, l.loc, "a MATCH scrutinee");
              requireCallsBound(n.pattern, bound, l.loc);
              auto vs = varsOf(n.pattern);
              bound.insert(vs.begin(), vs.end());
            } else if constexpr (std::is_same_v<T, Collect>) {
              requireFresh(n.var, bound, l.loc);
              std::set<std::string> inner = bound;
              checkBody(n.inner, inner);
              requireBound(n.templ, inner, l.loc, "a COLLECT template");
              bound.insert(n.var);
            } else {
              std::set<std::string> inner = bound;
              checkBody(n.body, inner);
            }
          },
          l.node);
    }
  }

  void checkRule(const Rule& r) {
    for (const auto& a : r.head.atoms) checkArity(a, r.loc);
    std::set<std::string> bound;
    checkBody(r.body, bound);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Program* prog_;
  std::vector<Diagnostic> diags_;
  int anon_ = 0;
};

}  // namespace

Program parseProgram(std::string_view text) {
  Program prog;
  try {
    Parser p(Lexer(text).run(), &prog);
    p.parseProgram();
    if (!p.diagnostics().empty()) throw ParseError(std::move(p.diagnostics()));
  } catch (const SyntaxFail& f) {
    throw ParseError({Diagnostic{Diagnostic::Kind::Syntax, f.loc, f.message}});
  }
  return prog;
}

Term parseTerm(std::string_view text) {
  Program prog;
  try {
    Parser p(Lexer(text).run(), &prog);
    return p.parseStandaloneTerm();
  } catch (const SyntaxFail& f) {
    throw ParseError({Diagnostic{Diagnostic::Kind::Syntax, f.loc, f.message}});
  }
}

Atom parseAtom(std::string_view text, const Program* decls) {
  Program prog;
  if (decls) prog.declarations = decls->declarations;
  try {
    Parser p(Lexer(text).run(), &prog);
    return p.parseStandaloneAtom();
  } catch (const SyntaxFail& f) {
    throw ParseError({Diagnostic{Diagnostic::Kind::Syntax, f.loc, f.message}});
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
std::vector<std::pair<std::string, bool>> splitCsv(std::string_view line, std::size_t row) {
  std::vector<std::pair<std::string, bool>> out;
  std::size_t i = 0;
  for (;;) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::string field;
    bool quoted = false;
    if (i < line.size() && line[i] == '"') {
      quoted = true;
      ++i;
      for (;;) {
        if (i >= line.size()) throw RowError(row, "unterminated quoted field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      while (i < line.size() && line[i] != ',') {
        if (!std::isspace(static_cast<unsigned char>(line[i]))) {
          throw RowError(row, "unexpected text after quoted field");
        }
        ++i;
      }
    } else {
      std::size_t start = i;
      while (i < line.size() && line[i] != ',') ++i;
      field = trim(line.substr(start, i - start));
    }
    out.emplace_back(std::move(field), quoted);
    if (i >= line.size()) break;
    ++i;
  }
  return out;
}

bool looksInteger(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

std::vector<Atom> parseFactsCSV(std::string_view text, const PredicateDecl& schema, bool skipHeader) {
  std::vector<Atom> out;
  std::size_t row = 0;
  std::size_t start = 0;
  std::size_t tp = schema.timePosition();
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    ++row;
    if (row == 1 && skipHeader) continue;
    if (trim(line).empty()) continue;
    auto fields = splitCsv(line, row);
    if (fields.size() != schema.arity()) {
      throw RowError(row, "expected " + std::to_string(schema.arity()) + " columns but found " +
                              std::to_string(fields.size()));
    }
    Atom a;
    a.predicate = schema.name;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto& [f, quoted] = fields[i];
      Sort sort = schema.params[i];
      if (i == tp) {
        if (looksInteger(f)) {
          a.time = TimeTerm::constant(std::stoll(f));
        } else if (auto dt = parseDateTime(f)) {
          a.time = TimeTerm::constant(*dt);
        } else {
          throw RowError(row, "invalid time literal '" + f + "'");
        }
        continue;
      }
      switch (sort) {
        case Sort::Int:
          if (!looksInteger(f)) throw RowError(row, "column " + std::to_string(i + 1) + ": expected an integer");
          a.args.push_back(Term::integer(std::stoll(f)));
          break;
        case Sort::String:
          a.args.push_back(Term::string(f));
          break;
        case Sort::Bool:
          if (f != "true" && f != "false") {
            throw RowError(row, "column " + std::to_string(i + 1) + ": expected true or false");
          }
          a.args.push_back(Term::boolean(f == "true"));
          break;
        case Sort::Term:
          try {
            Term t = parseTerm(f);
            if (!t.isGround()) throw RowError(row, "column " + std::to_string(i + 1) + ": term is not ground");
            a.args.push_back(t);
          } catch (const ParseError& e) {
            throw RowError(row, "column " + std::to_string(i + 1) + ": " + e.what());
          }
          break;
        case Sort::Time:
        case Sort::Any:
          if (!quoted && looksInteger(f)) {
            a.args.push_back(Term::integer(std::stoll(f)));
          } else {
            a.args.push_back(Term::string(f));
          }
          break;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  return out + "\"";
}

void printTermTo(std::ostringstream& os, const Term& t);

void printList(std::ostringstream& os, const std::vector<Term>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) os << ", ";
    printTermTo(os, items[i]);
  }
}

bool needsParens(const Term& t) {
  return t.kind() == Term::Kind::Call && t.args().size() == 2 && isInfix(t.text());
}

void printOperand(std::ostringstream& os, const Term& t) {
  if (needsParens(t) || (t.kind() == Term::Kind::Int && t.asInt() < 0)) {
    os << "(";
    printTermTo(os, t);
    os << ")";
  } else {
    printTermTo(os, t);
  }
}

void printTermTo(std::ostringstream& os, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Bool:
      os << (t.asBool() ? "true" : "false");
      return;
    case Term::Kind::Int:
      os << t.asInt();
      return;
    case Term::Kind::Str:
      os << quote(t.text());
      return;
    case Term::Kind::Var:
      os << t.text();
      return;
    case Term::Kind::Set:
      os << "{";
      printList(os, t.args());
      os << "}";
      return;
    case Term::Kind::Seq:
      os << "[";
      printList(os, t.args());
      os << "]";
      return;
    case Term::Kind::Ctor:
      os << t.text() << "(";
      printList(os, t.args());
      os << ")";
      return;
    case Term::Kind::Call:
      if (t.args().size() == 2 && isInfix(t.text())) {
        printOperand(os, t.args()[0]);
        os << " " << t.text() << " ";
        printOperand(os, t.args()[1]);
      } else if (t.text() == "!" && t.args().size() == 1) {
        os << "!";
        printOperand(os, t.args()[0]);
      } else if (t.text() == "neg" && t.args().size() == 1) {
        os << "-";
        printOperand(os, t.args()[0]);
      } else {
        os << t.text() << "(";
        printList(os, t.args());
        os << ")";
      }
      return;
  }
}

std::string atomText(const std::string& pred, const std::string& timeText, const std::vector<Term>& args,
                     std::size_t tp) {
  std::ostringstream os;
  os << pred << "(";
  std::size_t n = args.size() + 1;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) os << ", ";
    if (i == std::min(tp, args.size())) {
      os << timeText;
    } else {
      printTermTo(os, args[k++]);
    }
  }
  os << ")";
  return os.str();
}

void printBodyTo(std::ostringstream& os, const Body& b, const Program* decls);

void printLiteralTo(std::ostringstream& os, const BodyLiteral& l, const Program* decls) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Ordinary>) {
          os << printAtom(n.atom, decls);
        } else if constexpr (std::is_same_v<T, Comprehension>) {
          std::size_t tp = decls ? decls->timePosition(n.pattern.predicate) : 0;
          std::string slot = n.boundVar() + " " + toString(n.op) + " " + printTimeTerm(n.bound);
          os << atomText(n.pattern.predicate, slot, n.pattern.args, tp);
          if (!n.inner.empty()) {
            os << " STH (";
            printBodyTo(os, n.inner, decls);
            os << ")";
          }
        } else if constexpr (std::is_same_v<T, Builtin>) {
          printTermTo(os, n.expr);
        } else if constexpr (std::is_same_v<T, Let>) {
          os << "LET(" << n.var << ", ";
          printTermTo(os, n.value);
          os << ")";
        } else if constexpr (std::is_same_v<T, Choose>) {
          os << "CHOOSE(" << n.var << ", ";
          printTermTo(os, n.candidates);
          os << ")";
        } else if constexpr (std::is_same_v<T, Match>) {
          os << "MATCH(";
          printTermTo(os, n.pattern);
          os << ", ";
          printTermTo(os, n.scrutinee);
          os << ")";
        } else if constexpr (std::is_same_v<T, Collect>) {
          os << "COLLECT(" << n.var << ", ";
          printTermTo(os, n.templ);
          os << " STH ";
          printBodyTo(os, n.inner, decls);
          os << ")";
        } else {
          os << "NOT(";
          printBodyTo(os, n.body, decls);
          os << ")";
        }
      },
      l.node);
}

void printBodyTo(std::ostringstream& os, const Body& b, const Program* decls) {
  for (std::size_t i = 0; i < b.literals.size(); ++i) {
    if (i) os << ", ";
    printLiteralTo(os, b.literals[i], decls);
  }
}

}  // namespace

std::string printTerm(const Term& t) {
  std::ostringstream os;
  printTermTo(os, t);
  return os.str();
}

std::string printTimeTerm(const TimeTerm& t) {
  if (t.isGround()) return std::to_string(t.offset);
  if (t.offset == 0) return t.var;
  return t.var + " + " + std::to_string(t.offset);
}

std::string printAtom(const Atom& a, const Program* decls) {
  std::size_t tp = decls ? decls->timePosition(a.predicate) : 0;
  return atomText(a.predicate, printTimeTerm(a.time), a.args, tp);
}

std::string printBody(const Body& b, const Program* decls) {
  std::ostringstream os;
  printBodyTo(os, b, decls);
  return os.str();
}

std::string printRule(const Rule& r, const Program* decls) {
  std::ostringstream os;
  if (r.head.isFail()) {
    os << "FAIL";
  } else {
    for (std::size_t i = 0; i < r.head.atoms.size(); ++i) {
      if (i) os << " OR ";
      os << printAtom(r.head.atoms[i], decls);
    }
  }
  if (!r.annotations.empty()) {
    os << " :";
    for (const auto& a : r.annotations) {
      os << " @" << a.key << "(";
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (i) os << ", ";
        os << quote(a.values[i]);
      }
      os << ")";
    }
  }
  if (!r.body.empty()) {
    os << " :- ";
    printBodyTo(os, r.body, decls);
  }
  os << ".";
  return os.str();
}

std::string printProgram(const Program& p) {
  std::ostringstream os;
  for (const auto& [name, d] : p.declarations) {
    os << "#pred " << name << "(";
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
      if (i) os << ", ";
      os << d.labels[i];
    }
    os << ").\n";
  }
  for (const auto& [name, v] : p.constants) os << "#const " << name << " = " << printTerm(v) << ".\n";
  for (const auto& r : p.rules) os << printRule(r, &p) << "\n";
  return os.str();
}

}  // namespace strata
