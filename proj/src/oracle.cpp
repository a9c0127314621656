#include "canon/oracle.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>
#include <unordered_map>

#include "canon/search.hpp"

namespace canon::oracle {
namespace {

struct Expr;
using E = std::shared_ptr<const Expr>;

struct Expr {
  enum class K { Var, Const, App, Lam, Pi } k;
  uint64_t id = 0;      // Var: the variable. Lam, Pi: the bound variable.
  uint32_t global = 0;  // Const
  E fn;                 // App
  std::vector<E> args;  // App
  E dom;                // Pi
  E body;               // Lam, Pi
};

struct Rejected {
  std::string reason;
  std::vector<size_t> path;
};

class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Oracle {
 public:
  Oracle(const Environment& env, Limits lim) : env_(env), lim_(lim) {}

  // -- construction ---------------------------------------------------------

  void spend() {
    if (++built_ > lim_.node_budget) throw FuelExhausted("oracle node budget exhausted");
  }
  uint64_t fresh() { return next_id_++; }

  E var(uint64_t id) {
    spend();
    return std::make_shared<Expr>(Expr{Expr::K::Var, id, 0, nullptr, {}, nullptr, nullptr});
  }
  E constant(uint32_t g) {
    spend();
    return std::make_shared<Expr>(Expr{Expr::K::Const, 0, g, nullptr, {}, nullptr, nullptr});
  }
  E app(E fn, std::vector<E> args) {
    if (args.empty()) return fn;
    if (fn->k == Expr::K::App) {
      std::vector<E> all = fn->args;
      all.insert(all.end(), args.begin(), args.end());
      return app(fn->fn, std::move(all));
    }
    spend();
    return std::make_shared<Expr>(Expr{Expr::K::App, 0, 0, std::move(fn), std::move(args), nullptr, nullptr});
  }
  E lam(uint64_t id, E body) {
    spend();
    return std::make_shared<Expr>(Expr{Expr::K::Lam, id, 0, nullptr, {}, nullptr, std::move(body)});
  }
  E pi(uint64_t id, E dom, E body) {
    spend();
    return std::make_shared<Expr>(Expr{Expr::K::Pi, id, 0, nullptr, {}, std::move(dom), std::move(body)});
  }

  // -- substitution ---------------------------------------------------------

  using Sub = std::vector<std::pair<uint64_t, E>>;  // innermost last

  E subst(const E& e, Sub& s) {
    switch (e->k) {
      case Expr::K::Var:
        for (auto it = s.rbegin(); it != s.rend(); ++it)
          if (it->first == e->id) return it->second;
        return e;
      case Expr::K::Const: return e;
      case Expr::K::App: {
        E fn = subst(e->fn, s);
        std::vector<E> args;
        for (auto& a : e->args) args.push_back(subst(a, s));
        return app(std::move(fn), std::move(args));
      }
      case Expr::K::Lam:
      case Expr::K::Pi: {
        // Binders are always renamed, so nothing is ever captured.
        E dom = e->dom ? subst(e->dom, s) : nullptr;
        uint64_t b = fresh();
        s.emplace_back(e->id, var(b));
        E body = subst(e->body, s);
        s.pop_back();
        return e->k == Expr::K::Lam ? lam(b, std::move(body)) : pi(b, std::move(dom), std::move(body));
      }
    }
    return e;
  }

  E instantiate(const E& body, uint64_t id, const E& value) {
    Sub s{{id, value}};
    return subst(body, s);
  }

  // -- reduction ------------------------------------------------------------

  static std::pair<const Expr*, const std::vector<E>*> spine(const E& e) {
    static const std::vector<E> none;
    if (e->k == Expr::K::App) return {e->fn.get(), &e->args};
    return {e.get(), &none};
  }

  E whnf(E e) {
    for (;;) {
      spend();
      if (e->k == Expr::K::Const) {
        const LetBinding& g = env_.at(e->global);
        if (g.def) {
          e = global_def(e->global);
          continue;
        }
        return e;
      }
      if (e->k != Expr::K::App) return e;
      E h = whnf(e->fn);
      if (h->k == Expr::K::App || h->k == Expr::K::Lam) {
        if (h->k == Expr::K::App) {
          e = app(h, e->args);
          continue;
        }
        E body = instantiate(h->body, h->id, e->args[0]);
        e = app(body, std::vector<E>(e->args.begin() + 1, e->args.end()));
        continue;
      }
      if (h->k == Expr::K::Const) {
        const LetBinding& g = env_.at(h->global);
        const auto& args = e->args;
        if (g.def) {
          e = app(global_def(h->global), args);
          continue;
        }
        if (g.is_recursor()) {
          const auto& info = std::get<RecursorInfo>(*g.reduction);
          if (args.size() > info.major_index) {
            E major = whnf(args[info.major_index]);
            auto [mh, margs] = spine(major);
            if (mh->k == Expr::K::Const) {
              auto rule = info.rules.find(mh->global);
              const LetBinding& c = env_.at(mh->global);
              if (rule != info.rules.end() && c.is_constructor()) {
                uint32_t np = std::get<ConstructorInfo>(*c.reduction).num_params;
                std::vector<E> xs(args.begin(), args.begin() + info.num_pre);
                for (size_t i = np; i < margs->size(); ++i) xs.push_back((*margs)[i]);
                xs.insert(xs.end(), args.begin() + info.major_index + 1, args.end());
                e = app(closed(rule->second, false), std::move(xs));
                continue;
              }
            }
          }
        } else if (g.is_projection()) {
          const auto& info = std::get<ProjectionInfo>(*g.reduction);
          if (args.size() > info.num_params) {
            E major = whnf(args[info.num_params]);
            auto [mh, margs] = spine(major);
            if (mh->k == Expr::K::Const && mh->global == info.constructor) {
              uint32_t np = std::get<ConstructorInfo>(*env_.at(mh->global).reduction).num_params;
              size_t at = np + info.field;
              if (at < margs->size()) {
                e = app((*margs)[at], std::vector<E>(args.begin() + info.num_params + 1, args.end()));
                continue;
              }
            }
          }
        }
      }
      return app(h, e->args);
    }
  }

  E nf(const E& e) {
    E w = whnf(e);
    switch (w->k) {
      case Expr::K::App: {
        std::vector<E> args;
        for (auto& a : w->args) args.push_back(nf(a));
        return app(w->fn, std::move(args));
      }
      case Expr::K::Lam: return lam(w->id, nf(w->body));
      case Expr::K::Pi: return pi(w->id, nf(w->dom), nf(w->body));
      default: return w;
    }
  }

  bool alpha(const E& a, const E& b, std::vector<std::pair<uint64_t, uint64_t>>& bound) {
    if (a->k != b->k) return false;
    switch (a->k) {
      case Expr::K::Var: {
        for (auto it = bound.rbegin(); it != bound.rend(); ++it) {
          bool ha = it->first == a->id, hb = it->second == b->id;
          if (ha || hb) return ha && hb;
        }
        return a->id == b->id;
      }
      case Expr::K::Const: return a->global == b->global;
      case Expr::K::App:
        if (a->args.size() != b->args.size() || !alpha(a->fn, b->fn, bound)) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
          if (!alpha(a->args[i], b->args[i], bound)) return false;
        return true;
      case Expr::K::Lam:
      case Expr::K::Pi: {
        if (a->dom && !alpha(a->dom, b->dom, bound)) return false;
        bound.emplace_back(a->id, b->id);
        bool ok = alpha(a->body, b->body, bound);
        bound.pop_back();
        return ok;
      }
    }
    return false;
  }

  bool convertible(const E& a, const E& b) {
    std::vector<std::pair<uint64_t, uint64_t>> bound;
    return alpha(nf(a), nf(b), bound);
  }

  // -- translation from core ------------------------------------------------

  struct Local {
    E value;
    E type;  // null: not usable as a head
  };

  // Translation of a closed core node.
  E closed(const Term* t, bool is_type) {
    auto saved = std::move(ctx_);
    ctx_.clear();
    E r = translate(t, is_type);
    ctx_ = std::move(saved);
    return r;
  }

  E global_def(uint32_t g) {
    auto it = defs_.find(g);
    if (it != defs_.end()) return it->second;
    return defs_[g] = closed(env_.at(g).def, false);
  }
  E global_type(uint32_t g) {
    auto it = types_.find(g);
    if (it != types_.end()) return it->second;
    return types_[g] = closed(env_.at(g).type, true);
  }

  const Local& local(uint32_t index) const {
    if (index >= ctx_.size()) throw Unsupported("local index out of scope");
    return ctx_[ctx_.size() - 1 - index];
  }

  // Pushes the node's lets (values in order; a let may only use earlier ones).
  void push_lets(const Term* t, bool with_types) {
    size_t first = ctx_.size();
    for (size_t i = 0; i < t->lets.size(); ++i) ctx_.push_back({nullptr, nullptr});
    for (size_t i = 0; i < t->lets.size(); ++i) {
      const LetBinding& l = t->lets[i];
      ctx_[first + i].value = l.def ? translate(l.def, false) : var(fresh());
    }
    if (with_types)
      for (size_t i = 0; i < t->lets.size(); ++i)
        if (t->lets[i].type) ctx_[first + i].type = translate(t->lets[i].type, true);
  }

  E head_value(const SymbolRef& h) {
    if (h.is_global()) return constant(h.index);
    const Local& l = local(h.index);
    if (!l.value) throw Unsupported("let refers to a later let");
    return l.value;
  }

  E translate(const Term* t, bool is_type) {
    size_t mark = ctx_.size();
    std::vector<uint64_t> ids;
    for (size_t i = 0; i < t->params.size(); ++i) {
      ids.push_back(fresh());
      ctx_.push_back({var(ids.back()), nullptr});
    }
    push_lets(t, false);
    std::vector<E> doms;
    if (is_type) {
      for (size_t i = 0; i < t->params.size(); ++i) {
        if (!t->params[i].type) throw Unsupported("type binder without annotation");
        E d = translate(t->params[i].type, true);
        for (size_t j = i; j < ids.size(); ++j)
          if (occurs(d, ids[j])) throw Unsupported("binder annotation uses a later binder");
        doms.push_back(d);
      }
    }
    std::vector<E> args;
    for (auto* a : t->args) args.push_back(translate(a, false));
    E r = app(head_value(t->head), std::move(args));
    for (size_t i = ids.size(); i-- > 0;) r = is_type ? pi(ids[i], doms[i], r) : lam(ids[i], r);
    ctx_.resize(mark);
    return r;
  }

  static bool occurs(const E& e, uint64_t id) {
    switch (e->k) {
      case Expr::K::Var: return e->id == id;
      case Expr::K::Const: return false;
      case Expr::K::App:
        if (occurs(e->fn, id)) return true;
        for (auto& a : e->args)
          if (occurs(a, id)) return true;
        return false;
      case Expr::K::Lam:
      case Expr::K::Pi:
        if (e->dom && occurs(e->dom, id)) return true;
        return e->id != id && occurs(e->body, id);
    }
    return false;
  }

  // -- checking -------------------------------------------------------------

  E head_type(const SymbolRef& h) {
    if (h.is_global()) {
      if (h.index >= env_.globals.size()) return nullptr;
      return env_.at(h.index).type ? global_type(h.index) : nullptr;
    }
    if (h.index >= ctx_.size()) return nullptr;
    return local(h.index).type;
  }

  void check(const Term* t, E expected, size_t depth) {
    if (depth > lim_.max_depth) throw FuelExhausted("oracle depth limit reached");
    size_t mark = ctx_.size();
    E want = expected;
    for (size_t i = 0; i < t->params.size(); ++i) {
      E w = whnf(want);
      if (w->k != Expr::K::Pi) throw Rejected{"term binds more parameters than its type has", {}};
      uint64_t v = fresh();
      ctx_.push_back({var(v), w->dom});
      want = instantiate(w->body, w->id, ctx_.back().value);
    }
    push_lets(t, true);
    if (whnf(want)->k == Expr::K::Pi) throw Rejected{"term is not eta-long for its type", {}};

    E have = head_type(t->head);
    if (!have) throw Rejected{"head has no type", {}};
    for (size_t i = 0; i < t->args.size(); ++i) {
      E w = whnf(have);
      if (w->k != Expr::K::Pi) throw Rejected{"head applied to too many arguments", {}};
      try {
        check(t->args[i], w->dom, depth + 1);
      } catch (Rejected& r) {
        r.path.insert(r.path.begin(), i);
        throw;
      }
      have = instantiate(w->body, w->id, translate(t->args[i], false));
    }
    if (whnf(have)->k == Expr::K::Pi) throw Rejected{"head applied to too few arguments", {}};
    if (!convertible(have, want)) throw Rejected{"codomain does not match the expected type", {}};
    ctx_.resize(mark);
  }

  Report run_check(const Term* t, const Typ* goal) {
    ctx_.clear();
    try {
      check(t, closed(goal, true), 0);
      return {};
    } catch (const Rejected& r) {
      ctx_.clear();
      return {false, r.reason, r.path};
    } catch (const Unsupported& u) {
      ctx_.clear();
      return {false, std::string("unsupported: ") + u.what(), {}};
    }
  }

  // -- enumeration ----------------------------------------------------------

  struct Gen {
    const Term* term;
    E value;
    size_t heads;
  };

  std::vector<Gen> generate(const E& expected, size_t budget, TermArena& arena) {
    std::vector<Gen> out;
    if (budget == 0) return out;
    size_t mark = ctx_.size();
    Term shape;
    std::vector<uint64_t> ids;
    E want = expected;
    for (E w = whnf(want); w->k == Expr::K::Pi; w = whnf(want)) {
      uint64_t v = fresh();
      ids.push_back(v);
      shape.params.push_back({"x" + std::to_string(ctx_.size()), nullptr});
      ctx_.push_back({var(v), w->dom});
      want = instantiate(w->body, w->id, ctx_.back().value);
    }

    std::vector<SymbolRef> heads;
    for (size_t i = ctx_.size(); i-- > 0;)
      if (ctx_[i].type) heads.push_back(SymbolRef::local(static_cast<uint32_t>(ctx_.size() - 1 - i)));
    for (uint32_t g = 0; g < env_.globals.size(); ++g)
      if (env_.at(g).type) heads.push_back(SymbolRef::global(g));

    for (const SymbolRef& h : heads) {
      std::vector<const Term*> args;
      std::vector<E> vals;
      std::function<void(E, size_t)> go = [&](E have, size_t used) {
        E w = whnf(have);
        if (w->k == Expr::K::Pi) {
          if (used >= budget) return;
          for (Gen& g : generate(w->dom, budget - used, arena)) {
            args.push_back(g.term);
            vals.push_back(g.value);
            go(instantiate(w->body, w->id, g.value), used + g.heads);
            args.pop_back();
            vals.pop_back();
          }
          return;
        }
        if (!convertible(have, want)) return;
        Term node = shape;
        node.head = h;
        node.args = args;
        E v = app(head_value(h), vals);
        for (size_t i = ids.size(); i-- > 0;) v = lam(ids[i], v);
        out.push_back({arena.make(std::move(node)), v, used});
      };
      go(head_type(h), 1);
    }
    ctx_.resize(mark);
    return out;
  }

 private:
  const Environment& env_;
  Limits lim_;
  size_t built_ = 0;
  uint64_t next_id_ = 1;
  std::vector<Local> ctx_;
  std::unordered_map<uint32_t, E> defs_, types_;
};

}  // namespace

Report check(const Environment& env, const Term* t, const Typ* goal, Limits limits) {
  return Oracle(env, limits).run_check(t, goal);
}

std::vector<OwnedTerm> enumerate_bnel(const Environment& env, const Typ* goal, size_t max_heads,
                                      Limits limits) {
  auto arena = std::make_shared<TermArena>();
  std::vector<OwnedTerm> out;
  try {
    Oracle o(env, limits);
    std::set<std::string> seen;
    for (auto& g : o.generate(o.closed(goal, true), max_heads, *arena)) {
      if (!seen.insert(solution_key(g.term)).second) continue;
      if (!check(env, g.term, goal, limits).accepted) continue;
      out.push_back({arena, g.term});
    }
  } catch (const FuelExhausted& e) {
    throw BudgetExceeded(e.what());
  }
  return out;
}

}  // namespace canon::oracle
