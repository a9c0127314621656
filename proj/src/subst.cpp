#include "canon/subst.hpp"

#include <string>

namespace canon {

bool Entry::identical(const Entry& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case EntryKind::Level:
    case EntryKind::Global:
      return id == o.id;
    case EntryKind::Closure:
      return meta == o.meta && node == o.node && env == o.env;
    case EntryKind::Let:
      return node == o.node;
    case EntryKind::Hole:
      return false;
  }
  return false;
}

Subst Frame::push(Subst parent, std::vector<Entry> entries) {
  auto f = std::make_shared<Frame>();
  f->total = subst_size(parent) + static_cast<uint32_t>(entries.size());
  f->parent = std::move(parent);
  f->entries = std::move(entries);
  return f;
}

Entry lookup(const Subst& s, uint32_t i) {
  const Frame* f = s.get();
  const Subst* owner = &s;
  while (f) {
    auto n = static_cast<uint32_t>(f->entries.size());
    if (i < n) {
      const Entry& e = f->entries[n - 1 - i];
      if (e.kind == EntryKind::Let) {
        if (!e.node) throw ReductionError("opaque local let cannot be reduced");
        return Entry::closure(e.node, *owner);
      }
      return e;
    }
    i -= n;
    owner = &f->parent;
    f = f->parent.get();
  }
  throw ReductionError("unresolved de Bruijn index");
}

const Typ* head_type(const Environment& env, const Entry& head) {
  if (head.kind == EntryKind::Level) return head.node;
  if (head.kind == EntryKind::Global) return env.at(head.id).type;
  return nullptr;
}

uint32_t entry_arity(std::span<const MetaCell> metas, const Entry& e) {
  switch (e.kind) {
    case EntryKind::Level:
      return e.node ? arity_of(*e.node) : 0;
    case EntryKind::Closure:
      if (e.meta != kNoMeta) return arity_of(*metas[e.meta].type_node);
      return static_cast<uint32_t>(e.node->params.size());
    default:
      return 0;
  }
}

namespace {

Entry resolve(SymbolRef h, const Subst& frame) {
  if (h.is_global()) return Entry::global(h.index);
  return lookup(frame, h.index);
}

// Pushes the telescope frame for a node with `nparams` params taken from the
// front of `spine` plus `lets`. Returns the leftover arguments.
Subst enter(const Subst& env, std::vector<Entry>& spine, uint32_t nparams,
            const std::vector<LetBinding>* lets) {
  if (spine.size() < nparams) throw ReductionError("under-applied abstraction");
  size_t nlets = lets ? lets->size() : 0;
  if (nparams == 0 && nlets == 0) return env;
  std::vector<Entry> entries;
  entries.reserve(nparams + nlets);
  for (uint32_t i = 0; i < nparams; ++i) entries.push_back(std::move(spine[i]));
  if (lets)
    for (auto& l : *lets) entries.push_back(Entry::let(l.def));
  spine.erase(spine.begin(), spine.begin() + nparams);
  return Frame::push(env, std::move(entries));
}

Whnf whnf_fuel(const ReduceContext& cx, Entry fn, std::vector<Entry> spine, uint64_t& fuel) {
  for (;;) {
    if (fuel == 0) throw FuelExhausted();
    --fuel;
    switch (fn.kind) {
      case EntryKind::Level: {
        Whnf w;
        w.head = std::move(fn);
        w.spine = std::move(spine);
        return w;
      }
      case EntryKind::Hole: {
        Whnf w;
        w.kind = Whnf::Kind::StuckMeta;
        w.blocker = kHoleMeta;
        w.head = std::move(fn);
        w.spine = std::move(spine);
        return w;
      }
      case EntryKind::Let:
        throw ReductionError("let entry escaped its frame");
      case EntryKind::Closure: {
        if (fn.meta != kNoMeta) {
          const MetaCell& c = cx.metas[fn.meta];
          if (!c.assigned) {
            Whnf w;
            w.kind = Whnf::Kind::StuckMeta;
            w.blocker = fn.meta;
            w.head = std::move(fn);
            w.spine = std::move(spine);
            return w;
          }
          Subst frame = enter(fn.env, spine, arity_of(*c.type_node), nullptr);
          std::vector<Entry> next;
          next.reserve(c.num_children + spine.size());
          for (uint32_t i = 0; i < c.num_children; ++i)
            next.push_back(Entry::meta_closure(c.first_child + i, frame));
          for (auto& e : spine) next.push_back(std::move(e));
          fn = resolve(c.head, frame);
          spine = std::move(next);
          continue;
        }
        const Term* t = fn.node;
        Subst frame =
            enter(fn.env, spine, static_cast<uint32_t>(t->params.size()), &t->lets);
        std::vector<Entry> next;
        next.reserve(t->args.size() + spine.size());
        for (auto* a : t->args) next.push_back(Entry::closure(a, frame));
        for (auto& e : spine) next.push_back(std::move(e));
        fn = resolve(t->head, frame);
        spine = std::move(next);
        continue;
      }
      case EntryKind::Global: {
        const LetBinding& g = cx.env->at(fn.id);
        if (g.reduction) {
          if (auto* r = std::get_if<RecursorInfo>(&*g.reduction)) {
            if (spine.size() <= r->major_index) break;
            Whnf m = whnf_fuel(cx, spine[r->major_index], {}, fuel);
            if (m.kind == Whnf::Kind::Head && m.head.kind == EntryKind::Global) {
              const LetBinding& cg = cx.env->at(m.head.id);
              auto* ci = cg.reduction ? std::get_if<ConstructorInfo>(&*cg.reduction) : nullptr;
              if (ci && ci->inductive == r->inductive) {
                auto rule = r->rules.find(m.head.id);
                if (rule == r->rules.end()) throw ReductionError("recursor lacks rule for " + cg.name);
                std::vector<Entry> next;
                next.reserve(spine.size() + m.spine.size());
                for (uint32_t i = 0; i < r->num_pre; ++i) next.push_back(spine[i]);
                for (size_t i = ci->num_params; i < m.spine.size(); ++i)
                  next.push_back(std::move(m.spine[i]));
                for (size_t i = r->major_index + 1; i < spine.size(); ++i)
                  next.push_back(std::move(spine[i]));
                fn = Entry::closure(rule->second, nullptr);
                spine = std::move(next);
                continue;
              }
            }
            if (m.stuck()) {
              Whnf w;
              w.kind = Whnf::Kind::StuckRecursor;
              w.blocker = m.blocker;
              w.head = std::move(fn);
              w.spine = std::move(spine);
              return w;
            }
            break;
          }
          if (auto* p = std::get_if<ProjectionInfo>(&*g.reduction)) {
            if (spine.size() <= p->num_params) break;
            Whnf m = whnf_fuel(cx, spine[p->num_params], {}, fuel);
            if (m.kind == Whnf::Kind::Head && m.head.kind == EntryKind::Global &&
                m.head.id == p->constructor) {
              const auto& ci = std::get<ConstructorInfo>(*cx.env->at(p->constructor).reduction);
              size_t at = ci.num_params + p->field;
              if (at >= m.spine.size()) throw ReductionError("projection past constructor arity");
              std::vector<Entry> next(std::make_move_iterator(spine.begin() + p->num_params + 1),
                                      std::make_move_iterator(spine.end()));
              fn = std::move(m.spine[at]);
              spine = std::move(next);
              continue;
            }
            if (m.stuck()) {
              Whnf w;
              w.kind = Whnf::Kind::StuckRecursor;
              w.blocker = m.blocker;
              w.head = std::move(fn);
              w.spine = std::move(spine);
              return w;
            }
            break;
          }
          break;  // constructor: rigid
        }
        if (g.def) {
          fn = Entry::closure(g.def, nullptr);
          continue;
        }
        break;
      }
    }
    Whnf w;
    w.head = std::move(fn);
    w.spine = std::move(spine);
    return w;
  }
}

}  // namespace

Whnf whnf(const ReduceContext& cx, const App& app) {
  uint64_t fuel = cx.fuel;
  return whnf_fuel(cx, app.fn, app.args, fuel);
}

HeadCmp heads_equal(const Whnf& a, const Whnf& b, bool synthesis) {
  using K = Whnf::Kind;
  if (a.kind == K::StuckMeta || b.kind == K::StuckMeta) throw StuckInput();
  auto same_symbol = [&] {
    return a.head.kind == b.head.kind && a.head.id == b.head.id;
  };
  if (a.kind == K::StuckRecursor || b.kind == K::StuckRecursor) {
    if (synthesis) return HeadCmp::Unknown;
    return same_symbol() ? HeadCmp::Equal : HeadCmp::Unequal;
  }
  return same_symbol() ? HeadCmp::Equal : HeadCmp::Unequal;
}

std::pair<App, App> enter_binders(std::span<const MetaCell> metas, App a, App b, uint32_t n,
                                  LevelSupply& levels, std::span<const Binder> binder_types) {
  auto arity = [&](const App& x) {
    uint32_t k = entry_arity(metas, x.fn);
    return k >= x.args.size() ? k - static_cast<uint32_t>(x.args.size()) : 0u;
  };
  if (arity(a) != n || arity(b) != n) throw BinderCountMismatch();
  for (uint32_t j = 0; j < n; ++j) {
    const Typ* t = j < binder_types.size() ? binder_types[j].type : nullptr;
    Entry lv = levels.fresh(t);
    a.args.push_back(lv);
    b.args.push_back(lv);
  }
  return {std::move(a), std::move(b)};
}

bool convertible(const ReduceContext& cx, const App& a, const App& b, LevelSupply& levels) {
  if (a.fn.identical(b.fn) && a.args.size() == b.args.size()) {
    bool same = true;
    for (size_t i = 0; i < a.args.size() && same; ++i) same = a.args[i].identical(b.args[i]);
    if (same) return true;
  }
  Whnf wa = whnf(cx, a);
  Whnf wb = whnf(cx, b);
  if (wa.kind == Whnf::Kind::StuckMeta || wb.kind == Whnf::Kind::StuckMeta) return false;
  if (heads_equal(wa, wb) != HeadCmp::Equal) return false;
  if (wa.spine.size() != wb.spine.size()) return false;
  const Typ* ht = head_type(*cx.env, wa.head);
  for (size_t i = 0; i < wa.spine.size(); ++i) {
    if (wa.spine[i].identical(wb.spine[i])) continue;
    const Typ* pt = (ht && i < ht->params.size()) ? ht->params[i].type : nullptr;
    uint32_t n = pt ? arity_of(*pt) : entry_arity(cx.metas, wa.spine[i]);
    std::span<const Binder> binders;
    if (pt) binders = pt->params;
    auto [x, y] = enter_binders(cx.metas, App{wa.spine[i], {}}, App{wb.spine[i], {}}, n, levels,
                                binders);
    if (!convertible(cx, x, y, levels)) return false;
  }
  return true;
}

}  // namespace canon
