#include "canon/refine.hpp"

#include <algorithm>
#include <functional>

namespace canon {

namespace {

Context extend(const Context& parent, std::vector<CtxEntry> entries) {
  if (entries.empty()) return parent;
  auto f = std::make_shared<ContextFrame>();
  std::vector<Entry> values;
  values.reserve(entries.size());
  for (auto& e : entries) values.push_back(e.value);
  f->ident = Frame::push(parent ? parent->ident : nullptr, std::move(values));
  f->total = (parent ? parent->total : 0) + static_cast<uint32_t>(entries.size());
  f->parent = parent;
  f->entries = std::move(entries);
  return f;
}

std::optional<uint32_t> major_position(const LetBinding& g) {
  if (!g.reduction) return std::nullopt;
  if (auto* r = std::get_if<RecursorInfo>(&*g.reduction)) return r->major_index;
  if (auto* p = std::get_if<ProjectionInfo>(&*g.reduction)) return p->num_params;
  return std::nullopt;
}

}  // namespace

State::State(const Environment& env, const Typ* goal, Mode mode) : env_(env), mode_(mode) {
  make_meta(kNoMeta, 0, nullptr, Entry::closure(goal, nullptr), false);
  open_.push_back(kRoot);
}

MetaId State::make_meta(MetaId parent, uint32_t index, const Context& ctx, Entry type,
                        bool major) {
  const Typ* T = type.node;
  if (!T) throw Unsupported("metavariable type is missing");
  if (!T->lets.empty()) throw Unsupported("let bindings in a metavariable's type");
  auto id = static_cast<MetaId>(metas_.size());
  Metavariable m;
  m.parent = parent;
  m.child_index = index;
  m.major = major;
  if (parent != kNoMeta) {
    m.path = metas_[parent].path;
    m.path.push_back(static_cast<uint16_t>(index));
  }
  for (auto& p : T->params) m.own.push_back(levels_.fresh(p.type));
  if (!T->params.empty()) {
    Subst inner = Frame::push(type.env, m.own);
    std::vector<CtxEntry> entries;
    for (size_t i = 0; i < T->params.size(); ++i) {
      CtxEntry e;
      e.name = T->params[i].name;
      e.value = m.own[i];
      if (T->params[i].type) e.type = Entry::closure(T->params[i].type, inner);
      entries.push_back(std::move(e));
    }
    m.ext = extend(ctx, std::move(entries));
  } else {
    m.ext = ctx;
  }
  m.type = std::move(type);
  metas_.push_back(std::move(m));
  MetaCell c;
  c.type_node = T;
  cells_.push_back(c);
  eqs_.reserve_metas(metas_.size());
  return id;
}

std::vector<Candidate> State::candidates(MetaId mid, bool prefilter) const {
  const Metavariable& M = metas_.at(mid);
  std::vector<Candidate> out;
  ReduceContext cx = reduce_context();

  std::optional<Whnf> expected;
  if (prefilter) {
    Whnf w = whnf(cx, App{M.type, M.own});
    if (w.kind == Whnf::Kind::Head) expected = std::move(w);
  }
  auto keep = [&](const Entry& type) {
    if (!expected) return true;
    std::vector<Entry> holes(type.node->params.size(), Entry::hole());
    Whnf w = whnf(cx, App{type, std::move(holes)});
    if (w.kind != Whnf::Kind::Head) return true;
    return w.head.kind == expected->head.kind && w.head.id == expected->head.id;
  };

  uint32_t index = 0;
  for (const ContextFrame* f = M.ext.get(); f; f = f->parent.get()) {
    for (size_t k = f->entries.size(); k-- > 0; ++index) {
      const CtxEntry& e = f->entries[k];
      if (!e.type) continue;
      if (keep(*e.type)) out.push_back({SymbolRef::local(index), *e.type});
    }
  }
  for (uint32_t g = 0; g < env_.globals.size(); ++g) {
    const LetBinding& b = env_.globals[g];
    if (!b.type) continue;
    if (M.major && b.is_constructor()) continue;
    Entry t = Entry::closure(b.type, nullptr);
    if (keep(t)) out.push_back({SymbolRef::global(g), t});
  }
  return out;
}

Mark State::mark() const { return {trail_.size(), metas_.size(), eqs_.size(), levels_.next}; }

void State::remove_open(MetaId m) {
  auto it = std::find(open_.begin(), open_.end(), m);
  if (it == open_.end()) throw TrailCorruption("refining a meta that is not open");
  auto pos = static_cast<uint32_t>(it - open_.begin());
  *it = open_.back();
  open_.pop_back();
  trail_.push({TrailEntry::Kind::OpenRemove, pos, m});
}

RefineResult State::refine(MetaId mid, const Candidate& c) {
  ++refinements;
  Mark mk = mark();
  const Typ* F = c.type.node;
  auto n = static_cast<uint32_t>(F->params.size());
  auto first = static_cast<MetaId>(metas_.size());

  Context ctx = metas_[mid].ext;
  Subst ident = ctx ? ctx->ident : nullptr;
  std::vector<Entry> frame;
  frame.reserve(F->frame_size());
  for (uint32_t j = 0; j < n; ++j) frame.push_back(Entry::meta_closure(first + j, ident));
  for (auto& l : F->lets) frame.push_back(Entry::let(l.def));
  Subst fenv = F->frame_size() ? Frame::push(c.type.env, frame) : c.type.env;

  std::optional<uint32_t> major;
  if (c.ref.is_global()) major = major_position(env_.at(c.ref.index));
  for (uint32_t j = 0; j < n; ++j) {
    if (!F->params[j].type) throw Unsupported("head parameter without a type");
    make_meta(mid, j, ctx, Entry::closure(F->params[j].type, fenv), major && *major == j);
  }

  MetaCell& cell = cells_[mid];
  cell.assigned = true;
  cell.head = c.ref;
  cell.first_child = first;
  cell.num_children = n;
  trail_.push({TrailEntry::Kind::Assign, mid, 0});
  remove_open(mid);
  for (uint32_t j = 0; j < n; ++j) {
    open_.push_back(first + j);
    trail_.push({TrailEntry::Kind::OpenPush, first + j, 0});
  }

  App lhs{c.type, {}};
  lhs.args.assign(frame.begin(), frame.begin() + n);
  const Metavariable& M = metas_[mid];
  App rhs{M.type, M.own};

  ReduceContext cx = reduce_context();
  ProcessResult r = eqs_.process(cx, levels_, mode_, lhs, rhs);
  bool ok = r != ProcessResult::Violated && eqs_.on_assign(reduce_context(), levels_, mode_, mid);
  if (!ok) {
    ++violations;
    undo_to(mk);
    return {};
  }
  stack_.push_back({mid, mk});
  return {true, first, n};
}

void State::backtrack(MetaId m) {
  if (stack_.empty() || stack_.back().meta != m) throw NotTopOfTrail();
  Mark mk = stack_.back().mark;
  stack_.pop_back();
  undo_to(mk);
}

void State::undo_to(const Mark& mk) {
  while (trail_.size() > mk.trail) {
    TrailEntry e = trail_.back();
    trail_.pop();
    switch (e.kind) {
      case TrailEntry::Kind::Suspend:
      case TrailEntry::Kind::CloseEq:
        eqs_.undo(e);
        break;
      case TrailEntry::Kind::Assign:
        cells_.at(e.a).assigned = false;
        break;
      case TrailEntry::Kind::OpenPush:
        if (open_.empty() || open_.back() != e.a) throw TrailCorruption("open list push mismatch");
        open_.pop_back();
        break;
      case TrailEntry::Kind::OpenRemove:
        if (e.a == open_.size()) {
          open_.push_back(e.b);
        } else {
          open_.push_back(open_[e.a]);
          open_[e.a] = e.b;
        }
        break;
    }
  }
  metas_.resize(mk.metas);
  cells_.resize(mk.metas);
  eqs_.truncate(mk.eqs);
  levels_.next = mk.levels;
}

OwnedTerm State::extract_term(MetaId root) const {
  OwnedTerm out;
  out.arena = std::make_shared<TermArena>();
  std::function<const Term*(MetaId)> go = [&](MetaId m) -> const Term* {
    const MetaCell& c = cells_.at(m);
    if (!c.assigned) throw IncompleteTerm();
    Term t;
    for (auto& p : c.type_node->params) t.params.push_back({p.name, nullptr});
    t.head = c.head;
    for (uint32_t i = 0; i < c.num_children; ++i) t.args.push_back(go(c.first_child + i));
    return out.arena->make(std::move(t));
  };
  out.root = go(root);
  return out;
}

uint64_t State::structural_hash() const {
  uint64_t h = eqs_.structural_hash();
  auto mix = [&](uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
  mix(metas_.size());
  for (auto& c : cells_) {
    mix(c.assigned);
    if (c.assigned) {
      mix(static_cast<uint64_t>(c.head.kind) << 32 | c.head.index);
      mix(c.first_child);
      mix(c.num_children);
    }
  }
  for (MetaId m : open_) mix(m);
  mix(levels_.next);
  mix(trail_.size());
  mix(stack_.size());
  return h;
}

}  // namespace canon
