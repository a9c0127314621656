#pragma once

// The metavariable store. A partial term is a tree of metavariables; refining
// one picks a head from its local context and spawns one child per argument
// of that head. Every mutation is logged on the trail so a refinement can be
// undone exactly.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "canon/constraints.hpp"
#include "canon/subst.hpp"
#include "canon/syntax.hpp"
#include "canon/trail.hpp"

namespace canon {

struct CtxEntry {
  std::string name;
  Entry value;                // a rigid level
  std::optional<Entry> type;  // closure over a type node; absent: never a head
};

struct ContextFrame;
using Context = std::shared_ptr<const ContextFrame>;

/// Persistent local context, innermost entry last. `ident` maps every index of
/// the context to its own value.
struct ContextFrame {
  Context parent;
  std::vector<CtxEntry> entries;
  Subst ident;
  uint32_t total = 0;
};

struct Metavariable {
  MetaId parent = kNoMeta;
  uint32_t child_index = 0;
  Context ext;               // enclosing context plus this meta's own binders
  Entry type;                // typing constraint: closure over a type node
  std::vector<Entry> own;    // rigid levels for this meta's binders
  bool major = false;        // major premise of a recursor or projection
  std::vector<uint16_t> path;

  const Typ* type_node() const { return type.node; }
};

struct Candidate {
  SymbolRef ref;
  Entry type;  // closure over the head's type node
};

struct Mark {
  size_t trail = 0;
  size_t metas = 0;
  size_t eqs = 0;
  uint32_t levels = 0;
};

struct RefineResult {
  bool ok = false;
  MetaId first_child = 0;
  uint32_t num_children = 0;
};

class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotTopOfTrail : public std::logic_error {
 public:
  NotTopOfTrail() : std::logic_error("backtrack of a meta that is not the latest refinement") {}
};

class IncompleteTerm : public std::runtime_error {
 public:
  IncompleteTerm() : std::runtime_error("extract_term reached an unassigned metavariable") {}
};

class State {
 public:
  State(const Environment& env, const Typ* goal, Mode mode = Mode::Default);
  State(const State&) = delete;
  State& operator=(const State&) = delete;

  static constexpr MetaId kRoot = 0;

  const Environment& env() const { return env_; }
  Mode mode() const { return mode_; }
  ReduceContext reduce_context() const { return {&env_, cells_, kDefaultFuel}; }

  const std::vector<MetaId>& open() const { return open_; }
  bool complete() const { return open_.empty(); }
  const Metavariable& meta(MetaId m) const { return metas_.at(m); }
  const MetaCell& cell(MetaId m) const { return cells_.at(m); }
  size_t meta_count() const { return metas_.size(); }
  const EquationStore& equations() const { return eqs_; }

  /// Candidate heads for m, innermost context entry first, then environment order.
  std::vector<Candidate> candidates(MetaId m, bool prefilter = true) const;

  /// Picks `c` as the head of m. On violation everything is rolled back.
  RefineResult refine(MetaId m, const Candidate& c);

  /// Undoes the latest refinement, which must be of m.
  void backtrack(MetaId m);
  size_t depth() const { return stack_.size(); }
  MetaId top() const { return stack_.back().meta; }

  OwnedTerm extract_term(MetaId root = kRoot) const;

  uint64_t structural_hash() const;

  uint64_t refinements = 0;
  uint64_t violations = 0;

 private:
  struct Refinement {
    MetaId meta;
    Mark mark;
  };

  Mark mark() const;
  void undo_to(const Mark& mk);
  MetaId make_meta(MetaId parent, uint32_t index, const Context& ctx, Entry type, bool major);
  void remove_open(MetaId m);

  const Environment& env_;
  Mode mode_;
  Trail trail_;
  EquationStore eqs_{trail_};
  LevelSupply levels_;
  std::vector<Metavariable> metas_;
  std::vector<MetaCell> cells_;
  std::vector<MetaId> open_;
  std::vector<Refinement> stack_;
};

}  // namespace canon
