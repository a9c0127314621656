#include "canon/frontend.hpp"

#include <functional>

namespace canon {

namespace s = surface;
using s::ErrorKind;
using s::Expr;
using s::ExprPtr;

namespace {

using Tele = std::vector<std::pair<std::string, ExprPtr>>;

ExprPtr pis(const Tele& tele, ExprPtr body) {
  for (size_t i = tele.size(); i-- > 0;) body = s::pi(tele[i].first, tele[i].second, body);
  return body;
}

ExprPtr lams(const Tele& tele, ExprPtr body) {
  for (size_t i = tele.size(); i-- > 0;) body = s::lam(tele[i].first, tele[i].second, body);
  return body;
}

std::vector<ExprPtr> vars(const Tele& tele) {
  std::vector<ExprPtr> out;
  for (auto& [n, t] : tele) out.push_back(s::var(n));
  return out;
}

std::vector<ExprPtr> concat(std::vector<ExprPtr> a, const std::vector<ExprPtr>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Tele tele_of(const std::vector<s::Binder>& bs) {
  Tele t;
  for (auto& b : bs) t.emplace_back(b.name, b.type);
  return t;
}

bool is_var(const ExprPtr& e, const std::string& name) {
  return e->kind == Expr::Kind::Var && e->name == name;
}

void collect_names(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  out.insert(e->name);
  collect_names(e->type, out);
  collect_names(e->value, out);
  collect_names(e->body, out);
  collect_names(e->fn, out);
  for (auto& a : e->args) collect_names(a, out);
}

std::string fresh_in(const std::string& base, std::set<std::string>& used) {
  std::string n = base;
  for (int k = 1; used.count(n); ++k) n = base + "_" + std::to_string(k);
  used.insert(n);
  return n;
}


}  // namespace

Elaborator::Elaborator() { ginfo_[env_.sort] = {s::var("Sort"), env_.sort_type()}; }

void Elaborator::fail(ErrorKind k, s::Pos pos, const std::string& msg) const {
  throw s::FrontendError(k, pos, msg);
}

void Elaborator::note_refs(const ExprPtr& e, std::set<std::string>& out) const {
  if (!e) return;
  if (e->kind == Expr::Kind::Var) out.insert(e->name);
  note_refs(e->type, out);
  note_refs(e->value, out);
  note_refs(e->body, out);
  note_refs(e->fn, out);
  for (auto& a : e->args) note_refs(a, out);
}

std::string Elaborator::fresh_name(const std::string& base,
                                   const std::vector<ExprPtr>& avoid) const {
  std::string b = base.empty() || base == "_" ? "x" : base;
  auto taken = [&](const std::string& n) {
    for (auto& l : scope_)
      if (!l.hidden && l.name == n) return true;
    if (env_.find(n) || aliases_.count(n)) return true;
    for (auto& e : avoid)
      if (s::occurs_free(e, n)) return true;
    return false;
  };
  std::string n = b;
  for (int k = 1; taken(n); ++k) n = b + "_" + std::to_string(k);
  return n;
}

// ---------------------------------------------------------------------------
// Surface normalization

ExprPtr Elaborator::unfold_aliases(ExprPtr e) const {
  for (;;) {
    auto [h, args] = s::spine(e);
    if (h->kind != Expr::Kind::Var) return e;
    auto it = aliases_.find(h->name);
    if (it == aliases_.end()) return e;
    for (auto& l : scope_)
      if (!l.hidden && l.name == h->name) return e;
    const Alias& a = it->second;
    if (args.size() < a.params.size()) return e;
    ExprPtr body = a.body;
    for (size_t i = 0; i < a.params.size(); ++i)
      body = s::substitute(body, a.params[i], s::var("%" + std::to_string(i)));
    for (size_t i = 0; i < a.params.size(); ++i)
      body = s::substitute(body, "%" + std::to_string(i), args[i]);
    std::vector<ExprPtr> rest(args.begin() + static_cast<long>(a.params.size()), args.end());
    e = s::app(body, rest, e->pos);
  }
}

ExprPtr Elaborator::whnf_type(ExprPtr e) const {
  for (;;) {
    e = unfold_aliases(e);
    if (e->kind == Expr::Kind::Let) {
      e = s::substitute(e->body, e->name, e->value);
      continue;
    }
    auto [h, args] = s::spine(e);
    if (h->kind == Expr::Kind::Lam && !args.empty()) {
      ExprPtr b = s::substitute(h->body, h->name, args[0]);
      e = s::app(b, std::vector<ExprPtr>(args.begin() + 1, args.end()), e->pos);
      continue;
    }
    return e;
  }
}

std::optional<Elaborator::Resolved> Elaborator::resolve(const ExprPtr& h) {
  if (h->kind == Expr::Kind::Var) {
    for (size_t k = scope_.size(); k-- > 0;) {
      const Local& l = scope_[k];
      if (l.hidden || l.name != h->name) continue;
      auto idx = static_cast<uint32_t>(scope_.size() - 1 - k);
      return Resolved{SymbolRef::local(idx), l.stype, l.ctype, l.arity};
    }
    auto g = env_.find(h->name);
    if (!g) return std::nullopt;
    const GlobalInfo& gi = ginfo_.at(*g);
    return Resolved{SymbolRef::global(*g), gi.stype, gi.ctype, arity_of(*gi.ctype)};
  }
  if (h->kind == Expr::Kind::Nat) {
    std::string name = std::to_string(h->nat);
    if (auto g = env_.find(name)) {
      const GlobalInfo& gi = ginfo_.at(*g);
      return Resolved{SymbolRef::global(*g), gi.stype, gi.ctype, 0};
    }
    auto nat = env_.find("Nat");
    auto zero = env_.find("Nat.zero");
    auto succ = env_.find("Nat.succ");
    if (!nat || !zero || !succ)
      fail(ErrorKind::UnknownSymbol, h->pos, "natural-number literal without Nat.zero/Nat.succ");
    Term ty;
    ty.head = SymbolRef::global(*nat);
    const Typ* nat_type = env_.arena->make(std::move(ty));
    LetBinding b;
    b.name = name;
    if (h->nat <= 5) {
      Term z;
      z.head = SymbolRef::global(*zero);
      const Term* cur = env_.arena->make(std::move(z));
      for (uint64_t i = 0; i < h->nat; ++i) {
        Term t;
        t.head = SymbolRef::global(*succ);
        t.args.push_back(cur);
        cur = env_.arena->make(std::move(t));
      }
      b.def = cur;
    } else {
      b.type = nat_type;
    }
    uint32_t id = env_.add(std::move(b));
    ginfo_[id] = {s::var("Nat"), nat_type};
    return Resolved{SymbolRef::global(id), ginfo_[id].stype, nat_type, 0};
  }
  if (h->kind == Expr::Kind::Str) {
    std::string name = "\"" + h->name + "\"";
    if (auto g = env_.find(name)) {
      const GlobalInfo& gi = ginfo_.at(*g);
      return Resolved{SymbolRef::global(*g), gi.stype, gi.ctype, 0};
    }
    auto str = env_.find("String");
    if (!str) fail(ErrorKind::UnknownSymbol, h->pos, "string literal without a String type");
    Term ty;
    ty.head = SymbolRef::global(*str);
    LetBinding b;
    b.name = name;
    b.type = env_.arena->make(std::move(ty));
    uint32_t id = env_.add(b);
    ginfo_[id] = {s::var("String"), b.type};
    return Resolved{SymbolRef::global(id), ginfo_[id].stype, b.type, 0};
  }
  return std::nullopt;
}

ExprPtr Elaborator::infer(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Nat:
    case Expr::Kind::Str: {
      auto r = resolve(e);
      return r ? r->stype : nullptr;
    }
    case Expr::Kind::Pi:
      return s::var("Sort");
    case Expr::Kind::Let:
      return infer(s::substitute(e->body, e->name, e->value));
    case Expr::Kind::Lam: {
      if (!e->type) return nullptr;
      scope_.push_back({e->name, e->type, nullptr, 0, false});
      ExprPtr b = infer(e->body);
      scope_.pop_back();
      return b ? s::pi(e->name, e->type, b) : nullptr;
    }
    case Expr::Kind::App: {
      ExprPtr h = unfold_aliases(e);
      if (h->kind != Expr::Kind::App) return infer(h);
      ExprPtr t = infer(h->fn);
      for (auto& a : h->args) {
        if (!t) return nullptr;
        t = whnf_type(t);
        if (t->kind != Expr::Kind::Pi) return nullptr;
        t = s::substitute(t->body, t->name, a);
      }
      return t;
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Translation

const Typ* Elaborator::type_in_scope(ExprPtr t) {
  Term T;
  size_t base = scope_.size();
  // Binder annotations live in the node's whole frame: when translating the
  // i-th annotation, binders >= i are present but hidden.
  t = whnf_type(t);
  while (t->kind == Expr::Kind::Pi) {
    T.params.push_back({t->name, nullptr});
    scope_.push_back({t->name, t->type, nullptr, 0, true});
    t = whnf_type(t->body);
  }
  for (size_t i = 0; i < T.params.size(); ++i) {
    Local& l = scope_[base + i];
    const Typ* dom = type_in_scope(l.stype);
    T.params[i].type = dom;
    Local& m = scope_[base + i];
    m.ctype = dom;
    m.arity = arity_of(*dom);
    m.hidden = false;
  }
  if (t->kind == Expr::Kind::Lam) fail(ErrorKind::Unsupported, t->pos, "function where a type was expected");
  Term c;
  head_app(t, c);
  T.head = c.head;
  T.args = std::move(c.args);
  scope_.resize(base);
  return env_.arena->make(std::move(T));
}

const Term* Elaborator::term_in_scope(ExprPtr e, const Typ* ctype, ExprPtr stype) {
  Term T;
  size_t base = scope_.size();
  e = unfold_aliases(e);
  ExprPtr st = stype;
  auto next_dom = [&](const std::string& name) -> ExprPtr {
    if (!st) return nullptr;
    st = whnf_type(st);
    if (st->kind != Expr::Kind::Pi) {
      st = nullptr;
      return nullptr;
    }
    ExprPtr d = st->type;
    st = s::substitute(st->body, st->name, s::var(name));
    return d;
  };

  std::vector<ExprPtr> eta;
  size_t k = ctype ? ctype->params.size() : 0;
  for (size_t i = 0; ctype ? i < k : e->kind == Expr::Kind::Lam; ++i) {
    const Typ* ct = ctype ? ctype->params[i].type : nullptr;
    if (e->kind == Expr::Kind::Lam && eta.empty()) {
      std::string n = e->name;
      ExprPtr dom = next_dom(n);
      if (e->type) dom = e->type;
      if (!ct && e->type) ct = type_in_scope(e->type);
      T.params.push_back({n, nullptr});
      scope_.push_back({n, dom, ct, ct ? arity_of(*ct) : 0, false});
      e = unfold_aliases(e->body);
    } else {
      std::string n = fresh_name(ctype->params[i].name, {e});
      ExprPtr dom = next_dom(n);
      T.params.push_back({n, nullptr});
      scope_.push_back({n, dom, ct, ct ? arity_of(*ct) : 0, false});
      eta.push_back(s::var(n));
    }
  }
  if (!eta.empty()) e = s::app(e, eta, e->pos);

  if (ctype && e->kind == Expr::Kind::Lam) {
    ExprPtr w = st ? whnf_type(st) : nullptr;
    if (!w || w->kind != Expr::Kind::Pi)
      fail(ErrorKind::ArityUnderflowUnfixable, e->pos,
           "function given where its expected type is not an arrow");
    ensure_pi(e->pos);
    e = s::app(s::var("Pi.mk"), {w->type, s::lam(w->name, w->type, w->body), e}, e->pos);
  }

  struct Pending {
    std::string name;
    ExprPtr type;
    ExprPtr value;
  };
  std::vector<Pending> lets;
  for (;;) {
    e = unfold_aliases(e);
    if (e->kind == Expr::Kind::Let) {
      lets.push_back({e->name, e->type, e->value});
      e = e->body;
      continue;
    }
    if (e->kind != Expr::Kind::App) break;
    const ExprPtr& fn = e->fn;
    if (fn->kind != Expr::Kind::Lam && fn->kind != Expr::Kind::Let) break;
    std::vector<ExprPtr> args = e->args;
    std::vector<ExprPtr> rest = fn->kind == Expr::Kind::Lam
                                    ? std::vector<ExprPtr>(args.begin() + 1, args.end())
                                    : args;
    std::string n = fn->name;
    ExprPtr body = fn->body;
    bool captured = false;
    for (auto& a : rest) captured = captured || s::occurs_free(a, n);
    if (captured) {
      std::vector<ExprPtr> avoid = rest;
      avoid.push_back(body);
      std::string m = fresh_name(n, avoid);
      body = s::substitute(body, n, s::var(m));
      n = m;
    }
    if (fn->kind == Expr::Kind::Lam) {
      lets.push_back({n, fn->type, args[0]});
      e = s::app(body, rest, e->pos);
    } else {
      e = s::let(n, fn->type, fn->value, s::app(body, rest, e->pos), e->pos);
    }
  }
  if (!lets.empty()) {
    size_t lb = scope_.size();
    for (auto& l : lets) scope_.push_back({l.name, nullptr, nullptr, 0, true});
    for (size_t j = 0; j < lets.size(); ++j) {
      ExprPtr stl = lets[j].type ? lets[j].type : infer(lets[j].value);
      LetBinding b;
      b.name = lets[j].name;
      const Typ* ct = nullptr;
      if (lets[j].type) {
        ct = type_in_scope(lets[j].type);
        b.type = ct;
      } else if (stl) {
        try {
          ct = type_in_scope(stl);
        } catch (const s::FrontendError&) {
          ct = nullptr;
        }
      }
      b.def = term_in_scope(lets[j].value, ct, stl);
      Local& l = scope_[lb + j];
      l.stype = stl;
      l.ctype = ct;
      l.arity = ct ? arity_of(*ct) : static_cast<uint32_t>(b.def->params.size());
      l.hidden = false;
      T.lets.push_back(std::move(b));
    }
  }
  head_app(e, T);
  scope_.resize(base);
  return env_.arena->make(std::move(T));
}

void Elaborator::head_app(ExprPtr e, Term& out) {
  e = unfold_aliases(e);
  auto [h, args] = s::spine(e);
  if (h->kind == Expr::Kind::Pi) {
    if (!args.empty()) fail(ErrorKind::Unsupported, h->pos, "arrow applied to arguments");
    ensure_pi(h->pos);
    head_app(s::app(s::var("Pi"), {h->type, s::lam(h->name, h->type, h->body)}, h->pos), out);
    return;
  }
  if (h->kind == Expr::Kind::Lam || h->kind == Expr::Kind::Let)
    fail(ErrorKind::Unsupported, h->pos, "binder in head position");
  auto r = resolve(h);
  if (!r) {
    if (h->kind == Expr::Kind::Var && aliases_.count(h->name))
      fail(ErrorKind::Unsupported, h->pos, "partially applied alias '" + h->name + "'");
    fail(ErrorKind::UnknownSymbol, h->pos, "unknown symbol '" + s::print(h) + "'");
  }
  size_t a = r->arity;
  size_t n = args.size();

  // Type of h applied to the first m arguments.
  auto instantiate = [&](size_t m) -> ExprPtr {
    ExprPtr t = r->stype;
    for (size_t i = 0; i < m && t; ++i) {
      t = whnf_type(t);
      if (t->kind != Expr::Kind::Pi) return nullptr;
      t = s::substitute(t->body, t->name, args[i]);
    }
    return t ? whnf_type(t) : nullptr;
  };

  if (n > a) {
    ExprPtr R = instantiate(a);
    if (!R || R->kind != Expr::Kind::Pi)
      fail(ErrorKind::ArityUnderflowUnfixable, h->pos,
           "'" + s::print(h) + "' applied to too many arguments");
    ensure_pi(h->pos);
    ExprPtr inner = s::app(h, std::vector<ExprPtr>(args.begin(), args.begin() + a), h->pos);
    std::vector<ExprPtr> wrapped = {R->type, s::lam(R->name, R->type, R->body), inner, args[a]};
    wrapped.insert(wrapped.end(), args.begin() + a + 1, args.end());
    head_app(s::app(s::var("Pi.f"), wrapped, h->pos), out);
    return;
  }
  if (n < a) {
    ExprPtr R = instantiate(n);
    if (!R || R->kind != Expr::Kind::Pi)
      fail(ErrorKind::ArityUnderflowUnfixable, h->pos,
           "'" + s::print(h) + "' used as a value without an arrow type");
    ensure_pi(h->pos);
    std::string x = fresh_name(R->name, {e});
    ExprPtr fn = s::lam(x, R->type, s::app(e, {s::var(x)}, h->pos));
    head_app(s::app(s::var("Pi.mk"), {R->type, s::lam(R->name, R->type, R->body), fn}, h->pos),
             out);
    return;
  }
  ExprPtr st = r->stype;
  for (size_t i = 0; i < n; ++i) {
    const Typ* Z = r->ctype ? r->ctype->params[i].type : nullptr;
    ExprPtr dom;
    if (st) {
      st = whnf_type(st);
      if (st->kind == Expr::Kind::Pi)
        dom = st->type;
      else
        st = nullptr;
    }
    out.args.push_back(term_in_scope(args[i], Z, dom));
    if (st) st = s::substitute(st->body, st->name, args[i]);
  }
  out.head = r->ref;
}

const Typ* Elaborator::translate_type(const ExprPtr& t) {
  auto saved = std::move(scope_);
  scope_.clear();
  const Typ* r = type_in_scope(t);
  scope_ = std::move(saved);
  return r;
}

const Term* Elaborator::translate_term(const ExprPtr& e, const ExprPtr& type) {
  const Typ* ct = translate_type(type);
  auto saved = std::move(scope_);
  scope_.clear();
  const Term* r = term_in_scope(e, ct, type);
  scope_ = std::move(saved);
  return r;
}

// ---------------------------------------------------------------------------
// Declarations

uint32_t Elaborator::register_global(const std::string& name, const ExprPtr& stype, s::Pos pos) {
  if (env_.find(name)) fail(ErrorKind::DuplicateName, pos, "'" + name + "' is declared twice");
  const Typ* ct = translate_type(stype);
  LetBinding b;
  b.name = name;
  b.type = ct;
  uint32_t id = env_.add(std::move(b));
  ginfo_[id] = {stype, ct};
  return id;
}

void Elaborator::ensure_pi(s::Pos pos) {
  if (env_.find("Pi")) {
    if (!env_.find("Pi.mk") || !env_.find("Pi.f"))
      fail(ErrorKind::PolicyConflict, pos, "a user 'Pi' without Pi.mk and Pi.f");
    return;
  }
  s::Decl d;
  d.kind = s::Decl::Kind::Structure;
  d.name = "Pi";
  d.params = {{"A", s::var("Sort")}, {"B", s::parse_expr("(a : A) -> Sort")}};
  d.ctor_name = "mk";
  d.ctors = {{"f", s::parse_expr("(a : A) -> B a"), pos}};
  d.pos = pos;
  auto saved = std::move(scope_);
  scope_.clear();
  add_structure(d);
  scope_ = std::move(saved);
  pi_auto_ = true;
}

void Elaborator::add(const s::Decl& d) {
  switch (d.kind) {
    case s::Decl::Kind::Inductive: add_inductive(d); break;
    case s::Decl::Kind::Structure: add_structure(d); break;
    case s::Decl::Kind::Def: add_def(d); break;
    case s::Decl::Kind::Axiom: add_axiom(d); break;
    case s::Decl::Kind::Goal: add_goal(d); break;
    case s::Decl::Kind::Pragma: add_pragma(d); break;
  }
}

void Elaborator::add_structure(const s::Decl& d) {
  Tele params = tele_of(d.params);
  if (d.type && !is_var(whnf_type(d.type), "Sort"))
    fail(ErrorKind::Unsupported, d.pos, "structure '" + d.name + "' must live in Sort");
  for (auto& [n, t] : params) note_refs(t, outside_refs_);
  uint32_t sid = register_global(d.name, pis(params, s::var("Sort")), d.pos);
  ExprPtr self_type = s::app(s::var(d.name), vars(params));

  Tele fields;
  for (auto& c : d.ctors) {
    if (s::occurs_free(c.type, d.name))
      fail(ErrorKind::NonPositiveOccurrence, c.pos,
           "structure '" + d.name + "' occurs in its own field '" + c.name + "'");
    note_refs(c.type, outside_refs_);
    fields.emplace_back(c.name, c.type);
  }
  uint32_t mk = register_global(d.name + "." + d.ctor_name,
                                pis(params, pis(fields, self_type)), d.pos);
  env_.at(mk).reduction =
      ConstructorInfo{sid, 0, static_cast<uint32_t>(params.size())};

  std::set<std::string> used;
  collect_names(self_type, used);
  for (auto& [n, t] : params) collect_names(t, used);
  for (auto& [n, t] : fields) {
    used.insert(n);
    collect_names(t, used);
  }
  std::string self = fresh_in("self", used);
  for (size_t i = 0; i < fields.size(); ++i) {
    ExprPtr t = fields[i].second;
    for (size_t j = i; j-- > 0;) {
      std::vector<ExprPtr> pargs = vars(params);
      pargs.push_back(s::var(self));
      t = s::substitute(t, fields[j].first, s::app(s::var(d.name + "." + fields[j].first), pargs));
    }
    Tele tele = params;
    tele.emplace_back(self, self_type);
    uint32_t pid = register_global(d.name + "." + fields[i].first, pis(tele, t), d.ctors[i].pos);
    env_.at(pid).reduction =
        ProjectionInfo{mk, static_cast<uint32_t>(params.size()), static_cast<uint32_t>(i)};
  }
}

void Elaborator::add_inductive(const s::Decl& d) {
  const std::string& N = d.name;
  Tele params = tele_of(d.params);
  std::set<std::string> used;
  used.insert(N);
  for (auto& [n, t] : params) {
    used.insert(n);
    collect_names(t, used);
    note_refs(t, outside_refs_);
  }
  for (auto& c : d.ctors) {
    collect_names(c.type, used);
    note_refs(c.type, outside_refs_);
  }
  if (d.type) collect_names(d.type, used);

  Tele indices;
  ExprPtr arity = d.type ? whnf_type(d.type) : s::var("Sort");
  while (arity->kind == Expr::Kind::Pi) {
    std::string n = arity->name == "_" ? fresh_in("i", used) : arity->name;
    indices.emplace_back(n, arity->type);
    ExprPtr body = arity->name == "_" ? arity->body : s::substitute(arity->body, arity->name, s::var(n));
    arity = whnf_type(body);
  }
  if (!is_var(arity, "Sort"))
    fail(ErrorKind::Unsupported, d.pos, "inductive '" + N + "' must live in Sort");
  uint32_t nid = register_global(N, pis(params, pis(indices, s::var("Sort"))), d.pos);

  auto uniform = [&](const std::vector<ExprPtr>& args) {
    if (args.size() != params.size() + indices.size()) return false;
    for (size_t j = 0; j < params.size(); ++j)
      if (!is_var(args[j], params[j].first)) return false;
    return true;
  };

  struct RecField {
    size_t field;
    Tele ys;
    std::vector<ExprPtr> idx;
  };
  struct CtorShape {
    std::string name;
    Tele fields;
    std::vector<ExprPtr> idx;
    std::vector<RecField> recs;
    uint32_t id = 0;
  };
  std::vector<CtorShape> shapes;
  for (size_t k = 0; k < d.ctors.size(); ++k) {
    const s::Ctor& c = d.ctors[k];
    CtorShape sh;
    sh.name = N + "." + c.name;
    ExprPtr t = whnf_type(c.type);
    while (t->kind == Expr::Kind::Pi) {
      std::string n = t->name == "_" ? fresh_in("a", used) : t->name;
      ExprPtr body = t->name == "_" ? t->body : s::substitute(t->body, t->name, s::var(n));
      sh.fields.emplace_back(n, t->type);
      t = whnf_type(body);
    }
    auto [h, args] = s::spine(t);
    if (!is_var(h, N) || !uniform(args))
      fail(ErrorKind::UnknownTypeInConstructor, c.pos,
           "constructor '" + c.name + "' must return " + N + " applied to its parameters");
    sh.idx.assign(args.begin() + static_cast<long>(params.size()), args.end());
    for (auto& ix : sh.idx)
      if (s::occurs_free(ix, N))
        fail(ErrorKind::NonPositiveOccurrence, c.pos, N + " occurs in an index of '" + c.name + "'");
    for (size_t f = 0; f < sh.fields.size(); ++f) {
      ExprPtr u = whnf_type(sh.fields[f].second);
      RecField rf;
      rf.field = f;
      while (u->kind == Expr::Kind::Pi) {
        if (s::occurs_free(u->type, N))
          fail(ErrorKind::NonPositiveOccurrence, c.pos,
               N + " occurs to the left of an arrow in '" + c.name + "'");
        rf.ys.emplace_back(u->name, u->type);
        u = whnf_type(u->body);
      }
      auto [fh, fargs] = s::spine(u);
      if (is_var(fh, N)) {
        if (!uniform(fargs))
          fail(ErrorKind::NonPositiveOccurrence, c.pos,
               "recursive occurrence of " + N + " with non-uniform parameters");
        rf.idx.assign(fargs.begin() + static_cast<long>(params.size()), fargs.end());
        for (auto& ix : rf.idx)
          if (s::occurs_free(ix, N))
            fail(ErrorKind::NonPositiveOccurrence, c.pos, "nested occurrence of " + N);
        for (auto& [yn, yt] : rf.ys) used.insert(yn);
        sh.recs.push_back(std::move(rf));
      } else if (s::occurs_free(u, N)) {
        fail(ErrorKind::NonPositiveOccurrence, c.pos,
             N + " occurs in a non-positive position in '" + c.name + "'");
      }
    }
    for (auto& [fn, ft] : sh.fields) used.insert(fn);
    ExprPtr ctype = pis(params, pis(sh.fields, t));
    sh.id = register_global(sh.name, ctype, c.pos);
    env_.at(sh.id).reduction =
        ConstructorInfo{nid, static_cast<uint32_t>(k), static_cast<uint32_t>(params.size())};
    shapes.push_back(std::move(sh));
  }

  std::string motive = fresh_in("motive", used);
  std::string major = fresh_in("t", used);
  std::vector<ExprPtr> pv = vars(params);
  ExprPtr motive_type = pis(indices, pis({{major, s::app(s::var(N), concat(pv, vars(indices)))}},
                                         s::var("Sort")));
  Tele minors;
  std::vector<Tele> ihs(shapes.size());
  for (size_t k = 0; k < shapes.size(); ++k) {
    const CtorShape& sh = shapes[k];
    for (auto& rf : sh.recs) {
      ExprPtr rv = s::app(s::var(sh.fields[rf.field].first), vars(rf.ys));
      ExprPtr ih_t = pis(rf.ys, s::app(s::var(motive), concat(rf.idx, {rv})));
      ihs[k].emplace_back(fresh_in("ih", used), ih_t);
    }
    ExprPtr target = s::app(s::var(motive),
                            concat(sh.idx, {s::app(s::var(sh.name), concat(pv, vars(sh.fields)))}));
    std::string mn = d.ctors[k].name;
    minors.emplace_back(fresh_in(mn, used), pis(sh.fields, pis(ihs[k], target)));
  }
  Tele pre = params;
  pre.emplace_back(motive, motive_type);
  pre.insert(pre.end(), minors.begin(), minors.end());
  Tele tail = indices;
  tail.emplace_back(major, s::app(s::var(N), concat(pv, vars(indices))));
  ExprPtr rec_type =
      pis(pre, pis(tail, s::app(s::var(motive), concat(vars(indices), {s::var(major)}))));
  uint32_t rid = register_global(N + ".rec", rec_type, d.pos);
  recursors_.insert(rid);

  RecursorInfo info;
  info.inductive = nid;
  info.num_params = static_cast<uint32_t>(params.size());
  info.num_pre = static_cast<uint32_t>(pre.size());
  info.major_index = static_cast<uint32_t>(pre.size() + indices.size());
  std::vector<ExprPtr> prev = vars(pre);
  for (size_t k = 0; k < shapes.size(); ++k) {
    const CtorShape& sh = shapes[k];
    std::vector<ExprPtr> margs = vars(sh.fields);
    for (auto& rf : sh.recs) {
      ExprPtr rv = s::app(s::var(sh.fields[rf.field].first), vars(rf.ys));
      margs.push_back(lams(rf.ys, s::app(s::var(N + ".rec"), concat(concat(prev, rf.idx), {rv}))));
    }
    Tele tele = pre;
    tele.insert(tele.end(), sh.fields.begin(), sh.fields.end());
    ExprPtr target = s::app(s::var(motive),
                            concat(sh.idx, {s::app(s::var(sh.name), concat(pv, vars(sh.fields)))}));
    ExprPtr rule_type = pis(tele, target);
    ExprPtr rule = lams(tele, s::app(s::var(minors[k].first), margs));
    info.rules[sh.id] = translate_term(rule, rule_type);
  }
  env_.at(rid).reduction = std::move(info);
}

void Elaborator::add_def(const s::Decl& d) {
  Tele params = tele_of(d.params);
  ExprPtr stype = pis(params, d.type);
  if (d.body) {
    ExprPtr unfolded = unfold_aliases(d.body);
    if (unfolded->kind == Expr::Kind::Pi) {
      std::set<std::string> refs;
      note_refs(d.body, refs);
      for (uint32_t r : recursors_)
        if (refs.count(env_.at(r).name))
          fail(ErrorKind::PolicyConflict, d.pos,
               "'" + d.name + "' aliases an arrow type but uses a recursor");
      Alias a;
      for (auto& [n, t] : params) a.params.push_back(n);
      a.body = d.body;
      aliases_[d.name] = std::move(a);
      return;
    }
  }
  note_refs(d.type, outside_refs_);
  for (auto& [n, t] : params) note_refs(t, outside_refs_);
  uint32_t id = register_global(d.name, stype, d.pos);
  if (!d.body) return;
  const Typ* ct = ginfo_.at(id).ctype;
  ExprPtr body = lams(params, d.body);
  auto saved = std::move(scope_);
  scope_.clear();
  env_.at(id).def = term_in_scope(body, ct, stype);
  scope_ = std::move(saved);
  DefRecord rec{id, {}, false};
  note_refs(d.body, rec.body_refs);
  for (uint32_t r : recursors_)
    if (rec.body_refs.count(env_.at(r).name)) rec.recursor_bearing = true;
  defs_.push_back(std::move(rec));
}

void Elaborator::add_axiom(const s::Decl& d) {
  Tele params = tele_of(d.params);
  note_refs(d.type, outside_refs_);
  for (auto& [n, t] : params) note_refs(t, outside_refs_);
  register_global(d.name, pis(params, d.type), d.pos);
}

void Elaborator::add_goal(const s::Decl& d) {
  if (goal_) fail(ErrorKind::DuplicateName, d.pos, "second goal");
  Tele params = tele_of(d.params);
  note_refs(d.type, outside_refs_);
  for (auto& [n, t] : params) note_refs(t, outside_refs_);
  goal_ = translate_type(pis(params, d.type));
}

void Elaborator::add_pragma(const s::Decl& d) {
  auto need = [&]() {
    if (!d.value) fail(ErrorKind::SyntaxError, d.pos, "#" + d.name + " needs a number");
    return *d.value;
  };
  if (d.name == "synth") {
    overrides_.synthesis = true;
  } else if (d.name == "count") {
    overrides_.count = static_cast<uint64_t>(need());
  } else if (d.name == "timeout") {
    overrides_.timeout = need();
  } else if (d.name == "noprefilter") {
    overrides_.prefilter = false;
  } else {
    fail(ErrorKind::Unsupported, d.pos, "unknown pragma #" + d.name);
  }
}

Problem Elaborator::finish() {
  if (!goal_) fail(ErrorKind::MissingGoal, {}, "no goal declared");
  for (auto& rec : defs_) {
    const std::string& name = env_.at(rec.id).name;
    bool inside = false;
    for (auto& other : defs_)
      if (other.id != rec.id && other.body_refs.count(name)) inside = true;
    bool typed = rec.recursor_bearing && !(inside && !outside_refs_.count(name));
    env_.at(rec.id).type = typed ? ginfo_.at(rec.id).ctype : nullptr;
  }

  // Unguarded cycles: definitions without reduction annotations only.
  std::vector<int> color(env_.globals.size(), 0);
  std::function<void(const Term*, std::vector<uint32_t>&)> refs =
      [&](const Term* t, std::vector<uint32_t>& out) {
        if (!t) return;
        if (t->head.is_global()) out.push_back(t->head.index);
        for (auto* a : t->args) refs(a, out);
        for (auto& l : t->lets) refs(l.def, out);
      };
  std::function<void(uint32_t)> visit = [&](uint32_t g) {
    color[g] = 1;
    const LetBinding& b = env_.at(g);
    std::vector<uint32_t> next;
    if (b.def && !b.reduction) refs(b.def, next);
    for (uint32_t h : next) {
      if (color[h] == 1)
        fail(ErrorKind::CyclicDefinition, {}, "definition '" + env_.at(h).name + "' unfolds to itself");
      if (color[h] == 0) visit(h);
    }
    color[g] = 2;
  };
  for (uint32_t g = 0; g < env_.globals.size(); ++g)
    if (color[g] == 0) visit(g);

  Problem p;
  p.env = env_;
  p.goal = goal_;
  p.overrides = overrides_;
  p.pi_wrapper = pi_auto_;
  return p;
}

Problem load_problem(std::string_view text) {
  s::File f = s::parse(text);
  Elaborator el;
  for (auto& d : f.decls) el.add(d);
  return el.finish();
}

}  // namespace canon
