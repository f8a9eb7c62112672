#include "mst/parser.hpp"

#include <cctype>
#include <cstring>
#include <map>

namespace mst {

namespace {

enum class Tok {
  Ident,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LAngle,
  RAngle,
  LBracket,
  RBracket,
  Comma,
  Dot,
  Colon,
  Semi,
  Pipe,
  Turnstile,
  Arrow,
  DArrow,  // ==>
  EqEq,    // ==
  Eq,      // =
  Star,
  Plus,
  AndOp,
  OrOp,
  End,
};

struct Token {
  Tok kind;
  std::string text;  // identifier text
  int line, col;
};

struct Lexer {
  const std::string& src;
  size_t i = 0;
  int line = 1, col = 1;
  std::vector<Token> out;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void err(const std::string& msg) {
    throw ParseError(msg, line, col);
  }

  bool starts(const char* s) const {
    size_t n = strlen(s);
    return src.compare(i, n, s) == 0;
  }

  void advance(size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  }

  void push(Tok kind, size_t len, std::string text = "") {
    out.push_back(Token{kind, std::move(text), line, col});
    advance(len);
  }

  void comment() {
    int startl = line, startc = col;
    advance(2);
    int depth = 1;
    while (i < src.size() && depth > 0) {
      if (starts("(*")) {
        ++depth;
        advance(2);
      } else if (starts("*)")) {
        --depth;
        advance(2);
      } else {
        advance(1);
      }
    }
    if (depth > 0)
      throw ParseError("unterminated comment", startl, startc, "*)");
  }

  std::vector<Token> lex() {
    while (i < src.size()) {
      char c = src[i];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
        continue;
      }
      if (starts("(*")) {
        comment();
        continue;
      }
      if (starts("⟨")) {  // ⟨
        push(Tok::LAngle, 3);
        continue;
      }
      if (starts("⟩")) {  // ⟩
        push(Tok::RAngle, 3);
        continue;
      }
      if (starts("⊤")) {  // ⊤
        push(Tok::Ident, 3, "True");
        continue;
      }
      if (starts("⊥")) {  // ⊥
        push(Tok::Ident, 3, "False");
        continue;
      }
      if (starts("∧")) {  // ∧
        push(Tok::AndOp, 3);
        continue;
      }
      if (starts("∨")) {  // ∨
        push(Tok::OrOp, 3);
        continue;
      }
      if (starts("==>")) {
        push(Tok::DArrow, 3);
        continue;
      }
      if (starts("==[")) {
        push(Tok::EqEq, 2);  // '[' lexed separately
        push(Tok::LBracket, 1);
        continue;
      }
      if (starts("==")) {
        push(Tok::EqEq, 2);
        continue;
      }
      if (starts("|-")) {
        push(Tok::Turnstile, 2);
        continue;
      }
      if (starts("->")) {
        push(Tok::Arrow, 2);
        continue;
      }
      if (starts("/\\")) {
        push(Tok::AndOp, 2);
        continue;
      }
      if (starts("\\/")) {
        push(Tok::OrOp, 2);
        continue;
      }
      switch (c) {
        case '(': push(Tok::LParen, 1); continue;
        case ')': push(Tok::RParen, 1); continue;
        case '{': push(Tok::LBrace, 1); continue;
        case '}': push(Tok::RBrace, 1); continue;
        case '<': push(Tok::LAngle, 1); continue;
        case '>': push(Tok::RAngle, 1); continue;
        case '[': push(Tok::LBracket, 1); continue;
        case ']': push(Tok::RBracket, 1); continue;
        case ',': push(Tok::Comma, 1); continue;
        case '.': push(Tok::Dot, 1); continue;
        case ':': push(Tok::Colon, 1); continue;
        case ';': push(Tok::Semi, 1); continue;
        case '|': push(Tok::Pipe, 1); continue;
        case '=': push(Tok::Eq, 1); continue;
        case '*': push(Tok::Star, 1); continue;
        case '+': push(Tok::Plus, 1); continue;
        default: break;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[j])) ||
                src[j] == '_' || src[j] == '\''))
          ++j;
        push(Tok::Ident, j - i, src.substr(i, j - i));
        continue;
      }
      err(std::string("unexpected character '") + c + "'");
    }
    out.push_back(Token{Tok::End, "", line, col});
    return out;
  }
};

const char* tok_desc(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LAngle: return "'<'";
    case Tok::RAngle: return "'>'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Pipe: return "'|'";
    case Tok::Turnstile: return "'|-'";
    case Tok::Arrow: return "'->'";
    case Tok::DArrow: return "'==>'";
    case Tok::EqEq: return "'=='";
    case Tok::Eq: return "'='";
    case Tok::Star: return "'*'";
    case Tok::Plus: return "'+'";
    case Tok::AndOp: return "'/\\'";
    case Tok::OrOp: return "'\\/'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;
  const StateDomain* dom = nullptr;  // for constants and primitives
  int fresh_counter = 0;

  explicit Parser(const std::string& text) : toks(Lexer(text).lex()) {}

  const Token& peek(size_t ahead = 0) const {
    size_t k = pos + ahead;
    return k < toks.size() ? toks[k] : toks.back();
  }
  const Token& cur() const { return peek(0); }
  Pos here() const { return Pos{cur().line, cur().col}; }

  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = cur();
    throw ParseError("unexpected " + std::string(tok_desc(t.kind)) +
                         (t.kind == Tok::Ident ? " '" + t.text + "'" : ""),
                     t.line, t.col, expected);
  }

  bool at(Tok k) const { return cur().kind == k; }
  bool at_ident(const char* kw) const {
    return cur().kind == Tok::Ident && cur().text == kw;
  }
  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos;
    return true;
  }
  bool accept_ident(const char* kw) {
    if (!at_ident(kw)) return false;
    ++pos;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(what);
  }
  std::string expect_name() {
    if (!at(Tok::Ident)) fail("identifier");
    std::string n = cur().text;
    ++pos;
    return n;
  }

  Name fresh_binder() { return "_u" + std::to_string(fresh_counter++); }

  bool is_keyword(const std::string& s) const {
    static const std::set<std::string> kws = {
        "domain", "def",     "main",    "expect",  "return", "bind",
        "in",     "get",     "put",     "witness", "recall", "reify",
        "reflect", "coerce", "pmatch",  "case",    "of",     "with",
        "fun",    "forall",  "exists",  "witnessed", "rel",  "state",
        "unit",   "bool",    "MST",     "Pure",    "True",   "False",
        "true",   "false",   "inl",     "inr"};
    return kws.count(s) > 0;
  }

  // --- types ---------------------------------------------------------------

  TypePtr type() {
    if (at(Tok::LParen) && peek(1).kind == Tok::Ident &&
        peek(2).kind == Tok::Colon && !is_keyword(peek(1).text)) {
      ++pos;
      Name b = expect_name();
      expect(Tok::Colon, "':'");
      TypePtr d = type();
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      CompTypePtr c = comp_type();
      return type_arrow(b, d, c);
    }
    TypePtr t = sum_type();
    if (accept(Tok::Arrow)) {
      CompTypePtr c = comp_type();
      return type_arrow(fresh_binder(), t, c);
    }
    return t;
  }

  TypePtr sum_type() {
    TypePtr l = prod_type();
    if (accept(Tok::Plus)) return type_sum(l, sum_type());
    return l;
  }

  TypePtr prod_type() {
    TypePtr l = atom_type();
    if (accept(Tok::Star)) return type_prod(l, prod_type());
    return l;
  }

  TypePtr atom_type() {
    if (accept_ident("state")) return type_state();
    if (accept_ident("unit")) return type_unit();
    if (accept_ident("bool")) return type_bool();
    if (accept(Tok::LParen)) {
      TypePtr t = type();
      expect(Tok::RParen, "')'");
      return t;
    }
    fail("a type");
  }

  CompTypePtr comp_type() {
    if (accept_ident("MST")) {
      expect(Tok::LAngle, "'<'");
      ValuePtr idx = value_atom();
      expect(Tok::RAngle, "'>'");
      TypePtr t = atom_type();
      expect(Tok::LParen, "'('");
      Name s = expect_name();
      expect(Tok::Dot, "'.'");
      FormulaPtr pre = formula();
      expect(Tok::RParen, "')'");
      expect(Tok::LParen, "'('");
      Name ps = expect_name();
      Name px = expect_name();
      Name pf = expect_name();
      expect(Tok::Dot, "'.'");
      FormulaPtr post = formula();
      expect(Tok::RParen, "')'");
      return comp_mst(idx, t, s, pre, ps, px, pf, post);
    }
    if (accept_ident("Pure")) {
      TypePtr t = atom_type();
      expect(Tok::LParen, "'('");
      FormulaPtr pre = formula();
      expect(Tok::RParen, "')'");
      expect(Tok::LParen, "'('");
      Name y = expect_name();
      expect(Tok::Dot, "'.'");
      FormulaPtr post = formula();
      expect(Tok::RParen, "')'");
      return comp_pure(t, pre, y, post);
    }
    fail("'MST' or 'Pure'");
  }

  // --- values ----------------------------------------------------------------

  bool value_atom_starts() const {
    if (at(Tok::LParen)) return true;
    if (at_ident("true") || at_ident("false") || at_ident("reify"))
      return true;
    return at(Tok::Ident) && !is_keyword(cur().text);
  }

  ValuePtr value_atom() {
    if (at_ident("true")) {
      ++pos;
      return v_true();
    }
    if (at_ident("false")) {
      ++pos;
      return v_false();
    }
    if (accept_ident("reify")) {
      expect(Tok::LParen, "'('");
      CompPtr body = comp();
      expect(Tok::RParen, "')'");
      return v_reify(body);
    }
    if (accept(Tok::LParen)) {
      if (accept(Tok::RParen)) return v_unit();
      ValuePtr v = value();
      if (accept(Tok::Comma)) {
        ValuePtr w = value();
        expect(Tok::RParen, "')'");
        return v_pair(v, w);
      }
      expect(Tok::RParen, "')'");
      return v;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      std::string n = expect_name();
      if (dom && dom->has_constant(n)) return v_const(n);
      return v_var(n);
    }
    fail("a value");
  }

  ValuePtr value() {
    if (accept_ident("inl")) {
      expect(Tok::LAngle, "'<'");
      TypePtr t = type();
      expect(Tok::RAngle, "'>'");
      return v_inl(value_atom(), t);
    }
    if (accept_ident("inr")) {
      expect(Tok::LAngle, "'<'");
      TypePtr t = type();
      expect(Tok::RAngle, "'>'");
      return v_inr(value_atom(), t);
    }
    if (accept_ident("fun")) {
      expect(Tok::LParen, "'('");
      Name b = expect_name();
      expect(Tok::Colon, "':'");
      TypePtr t = type();
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      CompPtr body = comp();
      return v_lambda(b, t, body);
    }
    if (at(Tok::Ident) && !is_keyword(cur().text) && dom &&
        dom->find_prim(cur().text)) {
      std::string p = expect_name();
      return v_prim(p, value_atom());
    }
    return value_atom();
  }

  // --- computations ----------------------------------------------------------

  ValuePtr angle_index() {
    expect(Tok::LAngle, "'<'");
    ValuePtr idx = value_atom();
    expect(Tok::RAngle, "'>'");
    return idx;
  }

  Predicate pred_paren() {
    expect(Tok::LParen, "'('");
    Name b = expect_name();
    expect(Tok::Dot, "'.'");
    FormulaPtr body = formula();
    expect(Tok::RParen, "')'");
    return Predicate{b, body};
  }

  CompPtr comp() {
    Pos p = here();
    if (accept_ident("bind")) {
      Name x = expect_name();
      expect(Tok::Eq, "'='");
      CompPtr e1 = comp_seq_head();
      if (!accept_ident("in")) fail("'in'");
      CompPtr e2 = comp();
      return c_bind(x, e1, e2, p);
    }
    CompPtr e1 = comp_head();
    if (accept(Tok::Semi)) {
      CompPtr e2 = comp();
      return c_bind(fresh_binder(), e1, e2, p);
    }
    return e1;
  }

  // The head of a bind's right-hand side: stops at 'in' and ';'.
  CompPtr comp_seq_head() {
    Pos p = here();
    CompPtr e1 = comp_head();
    if (accept(Tok::Semi)) {
      CompPtr e2 = comp_seq_head();
      return c_bind(fresh_binder(), e1, e2, p);
    }
    return e1;
  }

  CompPtr comp_head() {
    Pos p = here();
    if (at_ident("bind")) return comp();  // nested bind, parenthesized use
    if (accept_ident("return")) {
      if (at(Tok::LAngle)) {
        ValuePtr idx = angle_index();
        return c_return(idx, value_atom(), p);
      }
      return c_pure_return(value_atom(), p);
    }
    if (accept_ident("get")) return c_get(angle_index(), p);
    if (accept_ident("put")) {
      ValuePtr idx = angle_index();
      return c_put(idx, value_atom(), p);
    }
    if (accept_ident("witness")) {
      ValuePtr idx = angle_index();
      return c_witness(idx, pred_paren(), p);
    }
    if (accept_ident("recall")) {
      ValuePtr idx = angle_index();
      return c_recall(idx, pred_paren(), p);
    }
    if (accept_ident("reflect")) return c_reflect(value_atom(), p);
    if (accept_ident("coerce")) {
      expect(Tok::LParen, "'('");
      CompPtr body = comp();
      expect(Tok::RParen, "')'");
      return c_coerce(body, p);
    }
    if (accept_ident("pmatch")) {
      ValuePtr v = value_atom();
      if (!accept_ident("with")) fail("'with'");
      expect(Tok::LParen, "'('");
      Name x1 = expect_name();
      expect(Tok::Comma, "','");
      Name x2 = expect_name();
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      CompPtr body = comp();
      return c_pmatch(v, x1, x2, body, p);
    }
    if (accept_ident("case")) {
      ValuePtr v = value_atom();
      if (!accept_ident("of")) fail("'of'");
      expect(Tok::LBrace, "'{'");
      if (!accept_ident("inl")) fail("'inl'");
      Name xl = expect_name();
      expect(Tok::Arrow, "'->'");
      CompPtr el = comp();
      expect(Tok::Pipe, "'|'");
      if (!accept_ident("inr")) fail("'inr'");
      Name xr = expect_name();
      expect(Tok::Arrow, "'->'");
      CompPtr er = comp();
      expect(Tok::RBrace, "'}'");
      return c_case(v, xl, el, xr, er, p);
    }
    if (at(Tok::LParen)) {
      // Either a parenthesized computation or an application whose head is
      // a parenthesized value.
      size_t save = pos;
      try {
        ++pos;
        CompPtr e = comp();
        expect(Tok::RParen, "')'");
        if (value_atom_starts()) throw ParseError("application head", 0, 0);
        return e;
      } catch (const ParseError&) {
        pos = save;
      }
      ValuePtr fn = value();
      ValuePtr arg = value_atom();
      return c_app(fn, arg, p);
    }
    // Application: value value.
    ValuePtr fn = value();
    if (!value_atom_starts()) fail("a computation (or an application argument)");
    ValuePtr arg = value_atom();
    return c_app(fn, arg, p);
  }

  // --- formulas ----------------------------------------------------------------

  FormulaPtr formula() {
    if (accept_ident("forall")) {
      Name b = expect_name();
      expect(Tok::Colon, "':'");
      TypePtr t = type();
      expect(Tok::Dot, "'.'");
      return f_forall(b, t, formula());
    }
    if (accept_ident("exists")) {
      Name b = expect_name();
      expect(Tok::Colon, "':'");
      TypePtr t = type();
      expect(Tok::Dot, "'.'");
      return f_exists(b, t, formula());
    }
    FormulaPtr l = or_formula();
    if (accept(Tok::DArrow)) return f_implies(l, formula());
    return l;
  }

  FormulaPtr or_formula() {
    FormulaPtr l = and_formula();
    if (accept(Tok::OrOp)) return f_or(l, or_formula());
    return l;
  }

  FormulaPtr and_formula() {
    FormulaPtr l = atom_formula();
    if (accept(Tok::AndOp)) return f_and(l, and_formula());
    return l;
  }

  FormulaPtr atom_formula() {
    if (accept_ident("True")) return f_top();
    if (accept_ident("False")) return f_bot();
    if (accept_ident("rel")) {
      ValuePtr a = value_atom();
      ValuePtr b = value_atom();
      return f_rel(a, b);
    }
    if (accept_ident("witnessed")) return f_witnessed(pred_paren());
    // Equality attempt: a value followed by '==' / '==['.
    size_t save = pos;
    try {
      ValuePtr a = value();
      if (accept(Tok::EqEq)) {
        TypePtr t = type_state();
        if (accept(Tok::LBracket)) {
          t = type();
          expect(Tok::RBracket, "']'");
        }
        ValuePtr b = value();
        return f_eq(t, a, b);
      }
      throw ParseError("equality", cur().line, cur().col, "'=='");
    } catch (const ParseError&) {
      pos = save;
    }
    if (accept(Tok::LParen)) {
      FormulaPtr f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    fail("a formula");
  }

  // --- sequents and programs --------------------------------------------------

  logic::Sequent sequent() {
    logic::Sequent s;
    // Optional context: IDENT ':' detected before any formula.
    if (at(Tok::Ident) && !is_keyword(cur().text) &&
        peek(1).kind == Tok::Colon) {
      while (true) {
        Name n = expect_name();
        expect(Tok::Colon, "':'");
        s.ctx.bindings.emplace_back(n, type());
        if (!accept(Tok::Comma)) break;
      }
      expect(Tok::Pipe, "'|'");
    }
    if (!at(Tok::Turnstile)) {
      while (true) {
        s.left.insert(formula());
        if (!accept(Tok::Comma)) break;
      }
    }
    expect(Tok::Turnstile, "'|-'");
    if (!at(Tok::End)) {
      while (true) {
        s.right.insert(formula());
        if (!accept(Tok::Comma)) break;
      }
    }
    return s;
  }
};

ValuePtr subst_decls(const ValuePtr& v,
                     const std::vector<std::pair<Name, ValuePtr>>& decls) {
  ValuePtr out = v;
  for (auto it = decls.rbegin(); it != decls.rend(); ++it)
    out = subst(out, it->first, it->second);
  return out;
}

CompPtr subst_decls(const CompPtr& e,
                    const std::vector<std::pair<Name, ValuePtr>>& decls) {
  CompPtr out = e;
  for (auto it = decls.rbegin(); it != decls.rend(); ++it)
    out = subst(out, it->first, it->second);
  return out;
}

FormulaPtr subst_decls(const FormulaPtr& f,
                       const std::vector<std::pair<Name, ValuePtr>>& decls) {
  FormulaPtr out = f;
  for (auto it = decls.rbegin(); it != decls.rend(); ++it)
    out = subst(out, it->first, it->second);
  return out;
}

}  // namespace

SourceProgram parse_program(const std::string& text,
                            const DomainRegistry& registry) {
  Parser p(text);
  if (!p.accept_ident("domain")) p.fail("'domain'");
  SourceProgram prog;
  prog.domain_name = p.expect_name();
  p.accept(Tok::Semi);
  const StateDomain* dom = registry.find(prog.domain_name);
  if (!dom)
    throw ParseError("unknown state domain '" + prog.domain_name + "'",
                     p.cur().line, p.cur().col);
  p.dom = dom;

  while (p.accept_ident("def")) {
    Name n = p.expect_name();
    if (p.is_keyword(n))
      throw ParseError("'" + n + "' is a keyword", p.cur().line, p.cur().col);
    for (const auto& [dn, dv] : prog.decls)
      if (dn == n)
        throw ParseError("duplicate definition '" + n + "'", p.cur().line,
                         p.cur().col);
    p.expect(Tok::Eq, "'='");
    ValuePtr v = p.value();
    // Names must be defined before use; resolve them away immediately.
    prog.decls.emplace_back(n, subst_decls(v, prog.decls));
    p.accept(Tok::Semi);
  }

  if (!p.accept_ident("main")) p.fail("'def' or 'main'");
  prog.main_pos = p.here();
  p.expect(Tok::Colon, "':'");
  CompTypePtr asc = p.comp_type();
  p.expect(Tok::Eq, "'='");
  CompPtr body = p.comp();
  prog.main = subst_decls(body, prog.decls);
  prog.ascription = asc;

  if (p.accept_ident("expect")) {
    Predicate pred = p.pred_paren();
    prog.expect = Predicate{pred.binder, subst_decls(pred.body, prog.decls)};
  }
  if (!p.at(Tok::End)) p.fail("end of program");
  return prog;
}

FormulaPtr parse_formula(const std::string& text, const StateDomain& dom) {
  Parser p(text);
  p.dom = &dom;
  FormulaPtr f = p.formula();
  if (!p.at(Tok::End)) p.fail("end of formula");
  return f;
}

ValuePtr parse_value(const std::string& text, const StateDomain& dom) {
  Parser p(text);
  p.dom = &dom;
  ValuePtr v = p.value();
  if (!p.at(Tok::End)) p.fail("end of value");
  return v;
}

CompPtr parse_comp(const std::string& text, const StateDomain& dom) {
  Parser p(text);
  p.dom = &dom;
  CompPtr e = p.comp();
  if (!p.at(Tok::End)) p.fail("end of computation");
  return e;
}

TypePtr parse_type(const std::string& text, const StateDomain& dom) {
  Parser p(text);
  p.dom = &dom;
  TypePtr t = p.type();
  if (!p.at(Tok::End)) p.fail("end of type");
  return t;
}

CompTypePtr parse_comp_type(const std::string& text, const StateDomain& dom) {
  Parser p(text);
  p.dom = &dom;
  CompTypePtr c = p.comp_type();
  if (!p.at(Tok::End)) p.fail("end of computation type");
  return c;
}

ParsedSequent parse_sequent(const std::string& text,
                            const DomainRegistry& registry) {
  Parser p(text);
  ParsedSequent out;
  out.domain_name = "counter";
  if (p.at_ident("domain")) {
    ++p.pos;
    out.domain_name = p.expect_name();
    p.accept(Tok::Semi);
  }
  const StateDomain* dom = registry.find(out.domain_name);
  if (!dom)
    throw ParseError("unknown state domain '" + out.domain_name + "'",
                     p.cur().line, p.cur().col);
  p.dom = dom;
  out.sequent = p.sequent();
  if (!p.at(Tok::End)) p.fail("end of sequent");
  return out;
}

}  // namespace mst
