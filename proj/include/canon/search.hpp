#pragma once

// Entropy-guided iterative-deepening DFS.
//
// Each iteration runs a depth-first search that prunes every partial term
// whose entropy exceeds the threshold. Statistics gathered in one iteration
// are frozen for the next: they drive both the entropy of unrefined
// metavariables and the metavariable ordering. All entropies are handled in
// log space.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "canon/refine.hpp"

namespace canon {

struct BinKey {
  bool rigid = false;
  const Typ* origin = nullptr;  // the metavariable's type node, ignoring its substitution
  bool operator==(const BinKey&) const = default;
};

struct BinKeyHash {
  size_t operator()(const BinKey& k) const {
    return std::hash<const void*>()(k.origin) * 2 + k.rigid;
  }
};

struct BinStats {
  uint64_t attempted = 0;    // candidate refinements tried at metas of this bin
  uint64_t subtree = 0;      // refinements made in their subtrees, themselves included
  uint64_t completions = 0;  // times such a meta became fully assigned
  uint64_t dead_ends = 0;    // times every candidate violated
  uint64_t gained_rigid = 0; // times it was refined while holding a rigid equation
  uint64_t seen = 0;         // times it was picked

  BinStats& operator+=(const BinStats& o);
  bool operator==(const BinStats&) const = default;
};

class StatsTable {
 public:
  BinStats& at(const BinKey& k) { return bins_[k]; }
  const BinStats* find(const BinKey& k) const;
  void merge(const StatsTable& o);
  size_t size() const { return bins_.size(); }
  bool operator==(const StatsTable& o) const { return bins_ == o.bins_; }

 private:
  std::unordered_map<BinKey, BinStats, BinKeyHash> bins_;
};

struct EntropyParams {
  double cap = 1000;                 // per-metavariable bound
  double cold_avg = 8;               // refinements per completion before a bin is warm
  double cold_p = 0.5;               // probability of gaining a rigid equation, likewise
  uint64_t warm_seen = 16;
  double override_ratio = 4;         // earlier meta must have this much more entropy
  double dead_end_threshold = 0.5;
  double penalty_max = 32;
};

/// Derived per-bin quantities over a frozen StatsTable. Not thread-safe (caches).
class EntropyModel {
 public:
  EntropyModel(const StatsTable& snapshot, EntropyParams params)
      : stats_(snapshot), params_(params) {}

  /// Entropy of an unrefined metavariable.
  double unrefined(const BinKey& k) const;
  double log_unrefined(const BinKey& k) const;
  /// Low-completion penalty applied while a refined meta's subtree is incomplete.
  double penalty(const BinKey& k) const;
  /// Fraction of pickings of this (non-rigid) bin where every candidate violated.
  double dead_end_ratio(const Typ* origin) const;
  const EntropyParams& params() const { return params_; }

 private:
  struct Derived {
    double log_est = 0;
    double dead_end = 0;
  };
  const Derived& derived(const Typ* origin) const;

  const StatsTable& stats_;
  EntropyParams params_;
  mutable std::unordered_map<const Typ*, Derived> cache_;
};

inline constexpr double kNominalRate = 1e6;  // refinements per second
inline constexpr uint64_t kUnlimited = std::numeric_limits<uint64_t>::max();

struct SearchConfig {
  double timeout = 15;  // seconds
  uint64_t count = 1;
  Mode mode = Mode::Default;
  unsigned workers = 1;
  // Single-threaded, with the timeout read as a refinement budget at
  // kNominalRate instead of wall-clock time.
  bool deterministic = false;
  bool prefilter = true;
  // Parallel split size in predicted nodes; 0 chooses from the worker count,
  // infinity never splits.
  double grain = 0;
  EntropyParams entropy;
};

struct IterationRecord {
  double log_threshold = 0;
  uint64_t nodes = 0;
  bool exhausted = false;  // ran to completion and was not stopped early
  double seconds = 0;
};

struct RunStats {
  uint64_t refinements = 0;
  uint64_t nonviolating = 0;
  uint64_t recursive_calls = 0;
  uint64_t nodes = 0;
  uint64_t probe_nodes = 0;      // visited while measuring, outside any iteration
  uint64_t branch_sum = 0;       // valid refinements summed over internal nodes
  uint64_t internal_nodes = 0;
  double seconds = 0;
  std::vector<IterationRecord> iterations;

  double refinements_per_sec() const;
  double branching_factor() const;
  double final_iteration_fraction() const;
  /// Flat key-value block, one `key value` pair per line.
  std::string to_kv() const;
};

struct SolveResult {
  std::vector<OwnedTerm> solutions;
  RunStats stats;
  bool timed_out = false;
  bool exhausted = false;  // the whole search space was enumerated
  StatsTable final_stats;
};

/// The next metavariable to refine.
MetaId pick_metavariable(const State& st, const EntropyModel& model);

SolveResult solve(const Environment& env, const Typ* goal, const SearchConfig& cfg);

/// A solution's identity: heads in preorder.
std::string solution_key(const Term* t);

}  // namespace canon
