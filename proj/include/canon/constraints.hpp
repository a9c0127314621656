#pragma once

// Equational constraints. An equation is processed by reducing both sides to
// weak head normal form: differing rigid heads violate it, equal heads
// decompose it argument-wise, and a side stuck on a metavariable suspends it
// on that metavariable until the metavariable is refined.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "canon/subst.hpp"
#include "canon/trail.hpp"

namespace canon {

using EqId = uint32_t;

enum class Mode : uint8_t {
  Default,    // recursor/projection stuck on a meta major: rigid mismatch
  Synthesis,  // ... suspended instead
};

enum class ProcessResult : uint8_t { Satisfied, Suspended, Decomposed, Violated };

const char* to_string(ProcessResult r);

struct Equation {
  App lhs;
  App rhs;
  bool open = true;
  bool rigid = false;            // exactly one side stuck on a metavariable
  MetaId stuck_lhs = kNoMeta;    // blocker of each side, if stuck
  MetaId stuck_rhs = kNoMeta;
};

/// Head pair of the most recent violation, for diagnostics.
struct Violation {
  Entry lhs_head;
  Entry rhs_head;
};

class EquationStore {
 public:
  explicit EquationStore(Trail& trail) : trail_(trail) {}

  /// Grows the per-meta indexes so ids < n are addressable.
  void reserve_metas(size_t n);

  /// Processes a fresh equation lhs =β rhs.
  ProcessResult process(const ReduceContext& cx, LevelSupply& levels, Mode mode, const App& lhs,
                        const App& rhs);

  /// Re-processes every open equation suspended on m. False on violation.
  bool on_assign(const ReduceContext& cx, LevelSupply& levels, Mode mode, MetaId m);

  /// Oldest open rigid equation suspended on m.
  std::optional<EqId> rigid_equation_of(MetaId m) const;
  bool has_rigid(MetaId m) const { return m < rigid_count_.size() && rigid_count_[m] > 0; }

  /// Reverts one Suspend or CloseEq trail entry.
  void undo(const TrailEntry& e);
  /// Drops equations with id >= n (created after a mark).
  void truncate(size_t n);

  size_t size() const { return eqs_.size(); }
  const Equation& at(EqId id) const { return eqs_.at(id); }
  const std::vector<EqId>& waiting(MetaId m) const { return waiting_.at(m); }
  size_t open_count() const;
  const Violation& last_violation() const { return violation_; }

  uint64_t structural_hash() const;

 private:
  ProcessResult process_pair(const ReduceContext& cx, LevelSupply& levels, Mode mode,
                             const App& l, const App& r);
  ProcessResult suspend(Whnf wl, Whnf wr);
  ProcessResult decompose(const ReduceContext& cx, LevelSupply& levels, Mode mode, Whnf& wl,
                          Whnf& wr);
  void close(EqId id);
  void bump_rigid(const Equation& e, int delta);

  Trail& trail_;
  std::vector<Equation> eqs_;
  std::vector<std::vector<EqId>> waiting_;
  std::vector<uint32_t> rigid_count_;
  Violation violation_;
};

}  // namespace canon
