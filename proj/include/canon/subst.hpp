#pragma once

// Explicit substitutions and weak-head reduction.
//
// A Closure pairs a node (a core term, or a metavariable occurrence) with a
// substitution for its free indices. Substitutions are persistent frame
// chains: entering a node's telescope pushes one frame holding the applied
// arguments followed by the node's lets. Nothing is ever copied; beta
// reduction appends existing closures to an existing substitution.

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "canon/syntax.hpp"

namespace canon {

using MetaId = uint32_t;
inline constexpr MetaId kNoMeta = 0xffffffffu;
inline constexpr MetaId kHoleMeta = 0xfffffffeu;

struct Frame;
using Subst = std::shared_ptr<const Frame>;

enum class EntryKind : uint8_t {
  Level,    // rigid variable; `node` is its syntactic type (may be null)
  Closure,  // `meta` != kNoMeta: metavariable occurrence, else `node` under `env`
  Let,      // only inside frames: definition `node`, evaluated in the same frame
  Global,   // environment constant `id`
  Hole,     // placeholder that reduces to a stuck meta; used by candidate filtering
};

struct Entry {
  EntryKind kind = EntryKind::Hole;
  uint32_t id = 0;  // level id or global id
  MetaId meta = kNoMeta;
  const Term* node = nullptr;
  Subst env;

  static Entry level(uint32_t id, const Typ* type) {
    Entry e;
    e.kind = EntryKind::Level;
    e.id = id;
    e.node = type;
    return e;
  }
  static Entry closure(const Term* node, Subst env) {
    Entry e;
    e.kind = EntryKind::Closure;
    e.node = node;
    e.env = std::move(env);
    return e;
  }
  static Entry meta_closure(MetaId m, Subst env) {
    Entry e;
    e.kind = EntryKind::Closure;
    e.meta = m;
    e.env = std::move(env);
    return e;
  }
  static Entry let(const Term* def) {
    Entry e;
    e.kind = EntryKind::Let;
    e.node = def;
    return e;
  }
  static Entry global(uint32_t g) {
    Entry e;
    e.kind = EntryKind::Global;
    e.id = g;
    return e;
  }
  static Entry hole() { return Entry{}; }

  bool is_meta() const { return kind == EntryKind::Closure && meta != kNoMeta; }
  /// Pointer-level identity: identical entries denote identical values.
  bool identical(const Entry& o) const;
};

struct Frame {
  Subst parent;
  std::vector<Entry> entries;
  uint32_t total = 0;  // entries in this frame and all parents

  static Subst push(Subst parent, std::vector<Entry> entries);
};

/// Resolves de Bruijn index `i`. Let entries come back as closures over the
/// frame that declares them.
Entry lookup(const Subst& s, uint32_t i);
inline uint32_t subst_size(const Subst& s) { return s ? s->total : 0; }

/// A function entry applied to arguments; the two sides of every equation.
struct App {
  Entry fn;
  std::vector<Entry> args;
};

/// What whnf needs to know about a metavariable.
struct MetaCell {
  const Typ* type_node = nullptr;  // arity = type_node->params.size()
  bool assigned = false;
  SymbolRef head;
  MetaId first_child = 0;
  uint32_t num_children = 0;
};

struct Whnf {
  enum class Kind : uint8_t { Head, StuckMeta, StuckRecursor };
  Kind kind = Kind::Head;
  Entry head;  // Head/StuckRecursor: a Level or Global entry. StuckMeta: the meta closure.
  std::vector<Entry> spine;
  MetaId blocker = kNoMeta;  // StuckMeta/StuckRecursor: the meta reduction waits on

  bool stuck() const { return kind != Kind::Head; }
};

class FuelExhausted : public std::runtime_error {
 public:
  FuelExhausted() : std::runtime_error("whnf fuel exhausted (divergent unfolding)") {}
};

class ReductionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr uint64_t kDefaultFuel = 100000;

/// Everything reduction reads. Metas may be empty when no metavariables exist.
struct ReduceContext {
  const Environment* env = nullptr;
  std::span<const MetaCell> metas;
  uint64_t fuel = kDefaultFuel;
};

Whnf whnf(const ReduceContext& cx, const App& app);
inline Whnf whnf(const ReduceContext& cx, const Entry& e) { return whnf(cx, App{e, {}}); }

/// The syntactic type of a whnf head (null when unknown).
const Typ* head_type(const Environment& env, const Entry& head);

/// Static arity of the value an entry denotes.
uint32_t entry_arity(std::span<const MetaCell> metas, const Entry& e);

enum class HeadCmp : uint8_t { Equal, Unequal, Unknown };

class StuckInput : public std::logic_error {
 public:
  StuckInput() : std::logic_error("heads_equal on a stuck-on-meta side") {}
};

/// Compares rigid heads. `synthesis` makes a recursor stuck on a meta
/// comparable as Unknown instead of Unequal.
HeadCmp heads_equal(const Whnf& a, const Whnf& b, bool synthesis = false);

class BinderCountMismatch : public std::logic_error {
 public:
  BinderCountMismatch() : std::logic_error("enter_binders: binder counts differ") {}
};

/// Source of fresh rigid levels.
struct LevelSupply {
  uint32_t next = 0;
  Entry fresh(const Typ* type) { return Entry::level(next++, type); }
};

/// Applies both sides to the same `n` fresh levels typed by `binder_types`
/// (may be empty: levels are then untyped).
std::pair<App, App> enter_binders(std::span<const MetaCell> metas, App a, App b, uint32_t n,
                                  LevelSupply& levels,
                                  std::span<const Binder> binder_types = {});

/// Beta-equality of meta-free applications.
bool convertible(const ReduceContext& cx, const App& a, const App& b, LevelSupply& levels);

}  // namespace canon
