#include "canon/constraints.hpp"

namespace canon {

const char* to_string(ProcessResult r) {
  switch (r) {
    case ProcessResult::Satisfied: return "Satisfied";
    case ProcessResult::Suspended: return "Suspended";
    case ProcessResult::Decomposed: return "Decomposed";
    case ProcessResult::Violated: return "Violated";
  }
  return "?";
}

void EquationStore::reserve_metas(size_t n) {
  if (waiting_.size() < n) {
    waiting_.resize(n);
    rigid_count_.resize(n, 0);
  }
}

ProcessResult EquationStore::process(const ReduceContext& cx, LevelSupply& levels, Mode mode,
                                     const App& lhs, const App& rhs) {
  return process_pair(cx, levels, mode, lhs, rhs);
}

ProcessResult EquationStore::process_pair(const ReduceContext& cx, LevelSupply& levels, Mode mode,
                                          const App& l, const App& r) {
  if (l.fn.identical(r.fn) && l.args.size() == r.args.size()) {
    bool same = true;
    for (size_t i = 0; i < l.args.size() && same; ++i) same = l.args[i].identical(r.args[i]);
    if (same) return ProcessResult::Satisfied;
  }
  using K = Whnf::Kind;
  Whnf wl = whnf(cx, l);
  Whnf wr = whnf(cx, r);
  if (wl.kind == K::StuckMeta || wr.kind == K::StuckMeta) return suspend(std::move(wl), std::move(wr));
  HeadCmp cmp = heads_equal(wl, wr, mode == Mode::Synthesis);
  if (cmp == HeadCmp::Unknown) return suspend(std::move(wl), std::move(wr));
  if (cmp == HeadCmp::Unequal) {
    violation_ = {wl.head, wr.head};
    return ProcessResult::Violated;
  }
  return decompose(cx, levels, mode, wl, wr);
}

ProcessResult EquationStore::decompose(const ReduceContext& cx, LevelSupply& levels, Mode mode,
                                       Whnf& wl, Whnf& wr) {
  if (wl.spine.size() != wr.spine.size()) {
    violation_ = {wl.head, wr.head};
    return ProcessResult::Violated;
  }
  const Typ* ht = head_type(*cx.env, wl.head);
  bool suspended = false;
  for (size_t i = 0; i < wl.spine.size(); ++i) {
    if (wl.spine[i].identical(wr.spine[i])) continue;
    const Typ* pt = (ht && i < ht->params.size()) ? ht->params[i].type : nullptr;
    uint32_t n = pt ? arity_of(*pt) : entry_arity(cx.metas, wl.spine[i]);
    std::span<const Binder> binders;
    if (pt) binders = pt->params;
    auto [a, b] = enter_binders(cx.metas, App{std::move(wl.spine[i]), {}},
                                App{std::move(wr.spine[i]), {}}, n, levels, binders);
    ProcessResult r = process_pair(cx, levels, mode, a, b);
    if (r == ProcessResult::Violated) return r;
    if (r != ProcessResult::Satisfied) suspended = true;
  }
  return suspended ? ProcessResult::Decomposed : ProcessResult::Satisfied;
}

ProcessResult EquationStore::suspend(Whnf wl, Whnf wr) {
  Equation e;
  e.stuck_lhs = wl.stuck() ? wl.blocker : kNoMeta;
  e.stuck_rhs = wr.stuck() ? wr.blocker : kNoMeta;
  e.rigid = (e.stuck_lhs == kNoMeta) != (e.stuck_rhs == kNoMeta);
  e.lhs = App{std::move(wl.head), std::move(wl.spine)};
  e.rhs = App{std::move(wr.head), std::move(wr.spine)};
  auto id = static_cast<EqId>(eqs_.size());
  eqs_.push_back(std::move(e));
  const Equation& eq = eqs_.back();
  auto add = [&](MetaId m) {
    if (m == kNoMeta || m == kHoleMeta) return;
    reserve_metas(m + 1);
    waiting_[m].push_back(id);
    if (eq.rigid) ++rigid_count_[m];
    trail_.push({TrailEntry::Kind::Suspend, m, id});
  };
  add(eq.stuck_lhs);
  if (eq.stuck_rhs != eq.stuck_lhs) add(eq.stuck_rhs);
  return ProcessResult::Suspended;
}

void EquationStore::bump_rigid(const Equation& e, int delta) {
  if (!e.rigid) return;
  MetaId m = e.stuck_lhs != kNoMeta ? e.stuck_lhs : e.stuck_rhs;
  if (m == kHoleMeta) return;
  rigid_count_[m] = static_cast<uint32_t>(static_cast<int>(rigid_count_[m]) + delta);
}

void EquationStore::close(EqId id) {
  Equation& e = eqs_[id];
  e.open = false;
  bump_rigid(e, -1);
  trail_.push({TrailEntry::Kind::CloseEq, id, 0});
}

bool EquationStore::on_assign(const ReduceContext& cx, LevelSupply& levels, Mode mode, MetaId m) {
  if (m >= waiting_.size()) return true;
  // Indexing by position: process may append to other metas' lists, never to m's.
  for (size_t k = 0; k < waiting_[m].size(); ++k) {
    EqId id = waiting_[m][k];
    if (!eqs_[id].open) continue;
    close(id);
    App l = eqs_[id].lhs;
    App r = eqs_[id].rhs;
    if (process_pair(cx, levels, mode, l, r) == ProcessResult::Violated) return false;
  }
  return true;
}

std::optional<EqId> EquationStore::rigid_equation_of(MetaId m) const {
  if (!has_rigid(m)) return std::nullopt;
  for (EqId id : waiting_[m])
    if (eqs_[id].open && eqs_[id].rigid) return id;
  return std::nullopt;
}

void EquationStore::undo(const TrailEntry& t) {
  switch (t.kind) {
    case TrailEntry::Kind::Suspend: {
      auto& w = waiting_.at(t.a);
      if (w.empty() || w.back() != t.b) throw TrailCorruption("suspend undo out of order");
      const Equation& e = eqs_.at(t.b);
      if (e.open && e.rigid) --rigid_count_[t.a];
      w.pop_back();
      break;
    }
    case TrailEntry::Kind::CloseEq: {
      Equation& e = eqs_.at(t.a);
      if (e.open) throw TrailCorruption("reopening an open equation");
      e.open = true;
      bump_rigid(e, +1);
      break;
    }
    default:
      throw TrailCorruption("not an equation trail entry");
  }
}

void EquationStore::truncate(size_t n) {
  if (n < eqs_.size()) eqs_.resize(n);
}

size_t EquationStore::open_count() const {
  size_t n = 0;
  for (auto& e : eqs_) n += e.open;
  return n;
}

uint64_t EquationStore::structural_hash() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&](uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(eqs_.size());
  for (auto& e : eqs_) {
    mix(e.open);
    mix(e.rigid);
    mix(e.stuck_lhs);
    mix(e.stuck_rhs);
  }
  for (size_t m = 0; m < waiting_.size(); ++m) {
    if (waiting_[m].empty()) continue;
    mix(m);
    for (EqId id : waiting_[m]) mix(id);
    mix(rigid_count_[m]);
  }
  return h;
}

}  // namespace canon
