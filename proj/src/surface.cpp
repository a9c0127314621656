#include "canon/surface.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace canon::surface {

ExprPtr var(std::string name, Pos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = std::move(name);
  e->pos = pos;
  return e;
}

ExprPtr nat(uint64_t n, Pos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Nat;
  e->nat = n;
  e->pos = pos;
  return e;
}

ExprPtr str(std::string s, Pos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Str;
  e->name = std::move(s);
  e->pos = pos;
  return e;
}

ExprPtr app(ExprPtr fn, std::vector<ExprPtr> args, Pos pos) {
  if (args.empty()) return fn;
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::App;
  if (fn->kind == Expr::Kind::App) {
    e->fn = fn->fn;
    e->args = fn->args;
    e->args.insert(e->args.end(), args.begin(), args.end());
  } else {
    e->fn = std::move(fn);
    e->args = std::move(args);
  }
  e->pos = pos;
  return e;
}

ExprPtr lam(std::string name, ExprPtr type, ExprPtr body, Pos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Lam;
  e->name = std::move(name);
  e->type = std::move(type);
  e->body = std::move(body);
  e->pos = pos;
  return e;
}

ExprPtr pi(std::string name, ExprPtr type, ExprPtr body, Pos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Pi;
  e->name = std::move(name);
  e->type = std::move(type);
  e->body = std::move(body);
  e->pos = pos;
  return e;
}

ExprPtr let(std::string name, ExprPtr type, ExprPtr value, ExprPtr body, Pos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Let;
  e->name = std::move(name);
  e->type = std::move(type);
  e->value = std::move(value);
  e->body = std::move(body);
  e->pos = pos;
  return e;
}

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::MissingGoal: return "MissingGoal";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::NonPositiveOccurrence: return "NonPositiveOccurrence";
    case ErrorKind::UnknownTypeInConstructor: return "UnknownTypeInConstructor";
    case ErrorKind::ArityUnderflowUnfixable: return "ArityUnderflowUnfixable";
    case ErrorKind::CyclicDefinition: return "CyclicDefinition";
    case ErrorKind::PolicyConflict: return "PolicyConflict";
    case ErrorKind::Unsupported: return "Unsupported";
  }
  return "?";
}

FrontendError::FrontendError(ErrorKind kind, Pos pos, const std::string& msg)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
                         to_string(kind) + ": " + msg),
      kind(kind),
      pos(pos) {}

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Token {
  enum class Kind { Ident, Number, String, Symbol, Pragma, End };
  Kind kind = Kind::End;
  std::string text;
  Pos pos;
};

const char* const kSymbols[] = {":=", "::", "=>", "->", "/\\", "\\/", "(", ")", ":", "|", ","};

struct Unicode {
  const char* bytes;
  const char* ascii;
};
const Unicode kUnicode[] = {{"→", "->"}, {"↦", "=>"}, {"∧", "/\\"},
                            {"∨", "\\/"}, {"λ", "fun"}};

bool ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}
bool ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '.' || c == '\'' || c >= 0x80;
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(s[i]) & 0xc0) != 0x80) {
        ++col;
      }
    }
  };
  auto unicode_at = [&](size_t at) -> const Unicode* {
    for (auto& u : kUnicode) {
      std::string_view b(u.bytes);
      if (s.substr(at, b.size()) == b) return &u;
    }
    return nullptr;
  };
  while (i < s.size()) {
    unsigned char c = s[i];
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (s.substr(i, 2) == "--") {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (auto* u = unicode_at(i)) {
      t.kind = std::string_view(u->ascii) == "fun" ? Token::Kind::Ident : Token::Kind::Symbol;
      t.text = u->ascii;
      advance(std::string_view(u->bytes).size());
      out.push_back(std::move(t));
      continue;
    }
    if (c == '#') {
      size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      t.kind = Token::Kind::Pragma;
      t.text = std::string(s.substr(i + 1, j - i - 1));
      if (t.text.empty()) throw FrontendError(ErrorKind::SyntaxError, t.pos, "empty pragma");
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(c)) {
      size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      t.kind = Token::Kind::Number;
      t.text = std::string(s.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      std::string text;
      while (j < s.size() && s[j] != '"') {
        if (s[j] == '\\' && j + 1 < s.size()) ++j;
        if (s[j] == '\n') break;
        text += s[j++];
      }
      if (j >= s.size() || s[j] != '"')
        throw FrontendError(ErrorKind::SyntaxError, t.pos, "unterminated string literal");
      t.kind = Token::Kind::String;
      t.text = std::move(text);
      advance(j + 1 - i);
      out.push_back(std::move(t));
      continue;
    }
    if (ident_start(c)) {
      size_t j = i;
      while (j < s.size() && ident_char(s[j]) && !unicode_at(j)) ++j;
      t.kind = Token::Kind::Ident;
      t.text = std::string(s.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    bool matched = false;
    for (const char* sym : kSymbols) {
      std::string_view v(sym);
      if (s.substr(i, v.size()) == v) {
        t.kind = Token::Kind::Symbol;
        t.text = sym;
        advance(v.size());
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched)
      throw FrontendError(ErrorKind::SyntaxError, t.pos,
                          std::string("unexpected character '") + static_cast<char>(c) + "'");
  }
  Token end;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

const std::set<std::string> kKeywords = {"inductive", "structure", "def", "axiom", "goal",
                                         "fun",       "let",       "in",  "where"};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  File file() {
    File f;
    while (peek().kind != Token::Kind::End) f.decls.push_back(decl());
    return f;
  }

  ExprPtr whole_expr() {
    ExprPtr e = expr();
    if (peek().kind != Token::Kind::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek(size_t k = 0) const { return t_[std::min(p_ + k, t_.size() - 1)]; }
  bool is_sym(const char* s, size_t k = 0) const {
    return peek(k).kind == Token::Kind::Symbol && peek(k).text == s;
  }
  bool is_kw(const char* s, size_t k = 0) const {
    return peek(k).kind == Token::Kind::Ident && peek(k).text == s;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw FrontendError(ErrorKind::SyntaxError, peek().pos, msg);
  }
  void expect_sym(const char* s) {
    if (!is_sym(s)) fail(std::string("expected '") + s + "'");
    ++p_;
  }
  void expect_kw(const char* s) {
    if (!is_kw(s)) fail(std::string("expected '") + s + "'");
    ++p_;
  }
  std::string name() {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident || kKeywords.count(t.text)) fail("expected a name");
    ++p_;
    return t.text;
  }

  // `( x y : T )` at offset k?
  bool binder_group_at(size_t k) const {
    if (!is_sym("(", k)) return false;
    size_t j = k + 1;
    if (peek(j).kind != Token::Kind::Ident || kKeywords.count(peek(j).text)) return false;
    while (peek(j).kind == Token::Kind::Ident && !kKeywords.count(peek(j).text)) ++j;
    return is_sym(":", j);
  }

  void binder_group(std::vector<Binder>& out) {
    expect_sym("(");
    std::vector<std::string> names;
    while (peek().kind == Token::Kind::Ident && !is_sym(":")) names.push_back(name());
    expect_sym(":");
    ExprPtr ty = expr();
    expect_sym(")");
    for (auto& n : names) out.push_back({n, ty});
  }

  std::vector<Binder> decl_binders() {
    std::vector<Binder> out;
    while (binder_group_at(0)) binder_group(out);
    return out;
  }

  Decl decl() {
    Decl d;
    d.pos = peek().pos;
    if (peek().kind == Token::Kind::Pragma) {
      d.kind = Decl::Kind::Pragma;
      d.name = peek().text;
      int line = peek().pos.line;
      ++p_;
      if (peek().kind == Token::Kind::Number && peek().pos.line == line) {
        d.value = std::stod(peek().text);
        ++p_;
      }
      return d;
    }
    if (is_kw("inductive") || is_kw("structure")) {
      bool ind = is_kw("inductive");
      ++p_;
      d.kind = ind ? Decl::Kind::Inductive : Decl::Kind::Structure;
      d.name = name();
      d.params = decl_binders();
      if (is_sym(":")) {
        ++p_;
        d.type = expr();
      }
      expect_kw("where");
      if (!ind) {
        d.ctor_name = "mk";
        if (peek().kind == Token::Kind::Ident && is_sym("::", 1)) {
          d.ctor_name = name();
          ++p_;
        }
      }
      while (is_sym("|") || (!ind && field_start())) {
        if (is_sym("|")) ++p_;
        Ctor c;
        c.pos = peek().pos;
        c.name = name();
        expect_sym(":");
        c.type = expr();
        d.ctors.push_back(std::move(c));
      }
      return d;
    }
    if (is_kw("def") || is_kw("axiom")) {
      d.kind = is_kw("def") ? Decl::Kind::Def : Decl::Kind::Axiom;
      ++p_;
      d.name = name();
      d.params = decl_binders();
      expect_sym(":");
      d.type = expr();
      if (d.kind == Decl::Kind::Def && is_sym(":=")) {
        ++p_;
        d.body = expr();
      }
      return d;
    }
    if (is_kw("goal")) {
      ++p_;
      d.kind = Decl::Kind::Goal;
      d.params = decl_binders();
      expect_sym(":");
      d.type = expr();
      return d;
    }
    fail("expected a declaration");
  }

  // A structure field header `name :` without a leading bar.
  bool field_start() const {
    return peek().kind == Token::Kind::Ident && !kKeywords.count(peek().text) && is_sym(":", 1);
  }

  ExprPtr expr() {
    Pos pos = peek().pos;
    if (is_kw("fun")) {
      ++p_;
      std::vector<Binder> bs;
      while (!is_sym("=>")) {
        if (is_sym("(")) {
          binder_group(bs);
        } else {
          bs.push_back({name(), nullptr});
        }
      }
      if (bs.empty()) fail("fun without binders");
      expect_sym("=>");
      ExprPtr body = expr();
      for (size_t i = bs.size(); i-- > 0;) body = lam(bs[i].name, bs[i].type, body, pos);
      return body;
    }
    if (is_kw("let")) {
      ++p_;
      std::string n = name();
      ExprPtr ty;
      if (is_sym(":")) {
        ++p_;
        ty = expr();
      }
      expect_sym(":=");
      ExprPtr v = expr();
      expect_kw("in");
      ExprPtr body = expr();
      return let(n, ty, v, body, pos);
    }
    if (binder_group_at(0)) {
      std::vector<Binder> bs;
      while (binder_group_at(0)) binder_group(bs);
      expect_sym("->");
      ExprPtr body = expr();
      for (size_t i = bs.size(); i-- > 0;) body = pi(bs[i].name, bs[i].type, body, pos);
      return body;
    }
    ExprPtr lhs = disj();
    if (is_sym("->")) {
      ++p_;
      return pi("_", lhs, expr(), pos);
    }
    return lhs;
  }

  ExprPtr disj() {
    Pos pos = peek().pos;
    ExprPtr a = conj();
    if (!is_sym("\\/")) return a;
    ++p_;
    return app(var("Or", pos), {a, disj()}, pos);
  }

  ExprPtr conj() {
    Pos pos = peek().pos;
    ExprPtr a = application();
    if (!is_sym("/\\")) return a;
    ++p_;
    return app(var("And", pos), {a, conj()}, pos);
  }

  bool atom_start() const {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::Number:
      case Token::Kind::String:
        return true;
      case Token::Kind::Ident:
        return !kKeywords.count(t.text) && !is_sym(":", 1) && !is_sym("::", 1);
      case Token::Kind::Symbol:
        return t.text == "(";
      default:
        return false;
    }
  }

  ExprPtr application() {
    Pos pos = peek().pos;
    if (!atom_start()) {
      // A bare name before ':' is still an atom inside parentheses or at expression start.
      if (peek().kind != Token::Kind::Ident || kKeywords.count(peek().text))
        fail(peek().kind == Token::Kind::End ? "unexpected end of input"
                                             : "unexpected '" + peek().text + "'");
    }
    ExprPtr head = atom();
    std::vector<ExprPtr> args;
    while (atom_start()) args.push_back(atom());
    return app(head, std::move(args), pos);
  }

  ExprPtr atom() {
    const Token& t = peek();
    Pos pos = t.pos;
    switch (t.kind) {
      case Token::Kind::Number: {
        ++p_;
        if (t.text.find('.') != std::string::npos) fail("non-integer literal");
        try {
          return nat(std::stoull(t.text), pos);
        } catch (const std::exception&) {
          throw FrontendError(ErrorKind::SyntaxError, pos, "literal out of range");
        }
      }
      case Token::Kind::String:
        ++p_;
        return str(t.text, pos);
      case Token::Kind::Ident:
        return var(name(), pos);
      default:
        break;
    }
    expect_sym("(");
    ExprPtr e = expr();
    expect_sym(")");
    return e;
  }

  std::vector<Token> t_;
  size_t p_ = 0;
};

void check_names(const File& f) {
  std::set<std::string> seen;
  int goals = 0;
  auto add = [&](const std::string& n, Pos pos) {
    if (!seen.insert(n).second)
      throw FrontendError(ErrorKind::DuplicateName, pos, "'" + n + "' is declared twice");
  };
  for (auto& d : f.decls) {
    switch (d.kind) {
      case Decl::Kind::Inductive:
        add(d.name, d.pos);
        add(d.name + ".rec", d.pos);
        for (auto& c : d.ctors) add(d.name + "." + c.name, c.pos);
        break;
      case Decl::Kind::Structure:
        add(d.name, d.pos);
        add(d.name + "." + d.ctor_name, d.pos);
        for (auto& c : d.ctors) add(d.name + "." + c.name, c.pos);
        break;
      case Decl::Kind::Def:
      case Decl::Kind::Axiom:
        add(d.name, d.pos);
        break;
      case Decl::Kind::Goal:
        if (++goals > 1) throw FrontendError(ErrorKind::DuplicateName, d.pos, "second goal");
        break;
      case Decl::Kind::Pragma:
        break;
    }
  }
  if (goals == 0) throw FrontendError(ErrorKind::MissingGoal, {}, "no goal declared");
}

}  // namespace

File parse(std::string_view text) {
  Parser p(lex(text));
  File f = p.file();
  check_names(f);
  return f;
}

ExprPtr parse_expr(std::string_view text) { return Parser(lex(text)).whole_expr(); }

// ---------------------------------------------------------------------------
// Free variables and substitution

namespace {

void free_vars(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (e->kind) {
    case Expr::Kind::Var:
      if (!bound.count(e->name)) out.insert(e->name);
      return;
    case Expr::Kind::Nat:
    case Expr::Kind::Str:
      return;
    case Expr::Kind::App:
      free_vars(e->fn, bound, out);
      for (auto& a : e->args) free_vars(a, bound, out);
      return;
    case Expr::Kind::Lam:
    case Expr::Kind::Pi:
    case Expr::Kind::Let: {
      if (e->type) free_vars(e->type, bound, out);
      if (e->value) free_vars(e->value, bound, out);
      bool fresh = bound.insert(e->name).second;
      free_vars(e->body, bound, out);
      if (fresh) bound.erase(e->name);
      return;
    }
  }
}

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> bound, out;
  free_vars(e, bound, out);
  return out;
}

ExprPtr rebuild(const ExprPtr& e, std::string name, ExprPtr type, ExprPtr value, ExprPtr body) {
  auto r = std::make_shared<Expr>(*e);
  r->name = std::move(name);
  r->type = std::move(type);
  r->value = std::move(value);
  r->body = std::move(body);
  return r;
}

ExprPtr subst(const ExprPtr& e, const std::string& x, const ExprPtr& v,
              const std::set<std::string>& fv_v) {
  switch (e->kind) {
    case Expr::Kind::Var:
      return e->name == x ? v : e;
    case Expr::Kind::Nat:
    case Expr::Kind::Str:
      return e;
    case Expr::Kind::App: {
      std::vector<ExprPtr> args;
      for (auto& a : e->args) args.push_back(subst(a, x, v, fv_v));
      return app(subst(e->fn, x, v, fv_v), std::move(args), e->pos);
    }
    case Expr::Kind::Lam:
    case Expr::Kind::Pi:
    case Expr::Kind::Let: {
      ExprPtr type = e->type ? subst(e->type, x, v, fv_v) : nullptr;
      ExprPtr value = e->value ? subst(e->value, x, v, fv_v) : nullptr;
      if (e->name == x) return rebuild(e, e->name, type, value, e->body);
      if (!occurs_free(e->body, x)) return rebuild(e, e->name, type, value, e->body);
      std::string y = e->name;
      ExprPtr body = e->body;
      if (fv_v.count(y)) {
        std::set<std::string> avoid = free_vars(body);
        avoid.insert(fv_v.begin(), fv_v.end());
        int k = 1;
        std::string fresh;
        do fresh = y + "_" + std::to_string(k++);
        while (avoid.count(fresh));
        body = subst(body, y, var(fresh), {fresh});
        y = fresh;
      }
      return rebuild(e, y, type, value, subst(body, x, v, fv_v));
    }
  }
  return e;
}

}  // namespace

bool occurs_free(const ExprPtr& e, const std::string& name) {
  switch (e->kind) {
    case Expr::Kind::Var:
      return e->name == name;
    case Expr::Kind::Nat:
    case Expr::Kind::Str:
      return false;
    case Expr::Kind::App:
      if (occurs_free(e->fn, name)) return true;
      for (auto& a : e->args)
        if (occurs_free(a, name)) return true;
      return false;
    default:
      if (e->type && occurs_free(e->type, name)) return true;
      if (e->value && occurs_free(e->value, name)) return true;
      return e->name != name && occurs_free(e->body, name);
  }
}

ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& value) {
  return subst(e, name, value, free_vars(value));
}

std::pair<ExprPtr, std::vector<ExprPtr>> spine(const ExprPtr& e) {
  if (e->kind != Expr::Kind::App) return {e, {}};
  auto [h, args] = spine(e->fn);
  args.insert(args.end(), e->args.begin(), e->args.end());
  return {h, args};
}

// ---------------------------------------------------------------------------
// Printer

namespace {

enum class Prec { Top, Arrow, Fn, Arg };

void print_expr(std::ostream& os, const ExprPtr& e, Prec ctx);

void print_binder_type(std::ostream& os, const std::string& n, const ExprPtr& ty) {
  os << "(" << n << " : ";
  print_expr(os, ty, Prec::Top);
  os << ")";
}

void print_expr(std::ostream& os, const ExprPtr& e, Prec ctx) {
  bool paren = false;
  switch (e->kind) {
    case Expr::Kind::Var:
      os << e->name;
      return;
    case Expr::Kind::Nat:
      os << e->nat;
      return;
    case Expr::Kind::Str:
      os << '"';
      for (char c : e->name) {
        if (c == '"' || c == '\\') os << '\\';
        os << c;
      }
      os << '"';
      return;
    case Expr::Kind::App:
      paren = ctx == Prec::Arg;
      if (paren) os << "(";
      print_expr(os, e->fn, Prec::Fn);
      for (auto& a : e->args) {
        os << " ";
        print_expr(os, a, Prec::Arg);
      }
      break;
    case Expr::Kind::Lam: {
      paren = ctx != Prec::Top;
      if (paren) os << "(";
      os << "fun";
      ExprPtr cur = e;
      while (cur->kind == Expr::Kind::Lam) {
        os << " ";
        if (cur->type)
          print_binder_type(os, cur->name, cur->type);
        else
          os << cur->name;
        cur = cur->body;
      }
      os << " => ";
      print_expr(os, cur, Prec::Top);
      break;
    }
    case Expr::Kind::Pi:
      paren = ctx != Prec::Top;
      if (paren) os << "(";
      if (e->name == "_" || !occurs_free(e->body, e->name)) {
        print_expr(os, e->type, Prec::Arrow);
      } else {
        print_binder_type(os, e->name, e->type);
      }
      os << " -> ";
      print_expr(os, e->body, Prec::Top);
      break;
    case Expr::Kind::Let:
      paren = ctx != Prec::Top;
      if (paren) os << "(";
      os << "let " << e->name;
      if (e->type) {
        os << " : ";
        print_expr(os, e->type, Prec::Top);
      }
      os << " := ";
      print_expr(os, e->value, Prec::Top);
      os << " in ";
      print_expr(os, e->body, Prec::Top);
      break;
  }
  if (paren) os << ")";
}

void print_binders(std::ostream& os, const std::vector<Binder>& bs) {
  for (auto& b : bs) {
    os << " ";
    print_binder_type(os, b.name, b.type);
  }
}

}  // namespace

std::string print(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e, Prec::Top);
  return os.str();
}

std::string print(const File& f) {
  std::ostringstream os;
  for (auto& d : f.decls) {
    switch (d.kind) {
      case Decl::Kind::Inductive:
      case Decl::Kind::Structure:
        os << (d.kind == Decl::Kind::Inductive ? "inductive " : "structure ") << d.name;
        print_binders(os, d.params);
        if (d.type) os << " : " << print(d.type);
        os << " where\n";
        if (d.kind == Decl::Kind::Structure) os << "  " << d.ctor_name << " ::\n";
        for (auto& c : d.ctors) os << "  | " << c.name << " : " << print(c.type) << "\n";
        break;
      case Decl::Kind::Def:
      case Decl::Kind::Axiom:
        os << (d.kind == Decl::Kind::Def ? "def " : "axiom ") << d.name;
        print_binders(os, d.params);
        os << " : " << print(d.type);
        if (d.body) os << " :=\n  " << print(d.body);
        os << "\n";
        break;
      case Decl::Kind::Goal:
        os << "goal";
        print_binders(os, d.params);
        os << " : " << print(d.type) << "\n";
        break;
      case Decl::Kind::Pragma:
        os << "#" << d.name;
        if (d.value) {
          double v = *d.value;
          char buf[64];
          if (v == std::floor(v) && std::fabs(v) < 1e15)
            std::snprintf(buf, sizeof buf, "%.0f", v);
          else
            std::snprintf(buf, sizeof buf, "%g", v);
          os << " " << buf;
        }
        os << "\n";
        break;
    }
  }
  return os.str();
}

}  // namespace canon::surface
