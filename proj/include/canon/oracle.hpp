#pragma once

// Slow reference checker and enumerator, for tests.
//
// Terms are translated into a named lambda calculus with globally unique
// binder ids, then checked with plain capture-avoiding substitution and full
// normalization. Nothing here goes through explicit substitutions, so the
// oracle gives an independent opinion on what the solver emits.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "canon/syntax.hpp"

namespace canon::oracle {

struct Limits {
  size_t max_depth = 64;         // nesting of checked subterms
  size_t node_budget = 1000000;  // expression nodes built per query
};

class FuelExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Report {
  bool accepted = true;
  std::string reason;
  std::vector<size_t> path;  // argument indices from the root to the rejected subterm
};

/// Checks a metavariable-free term against a type. Throws FuelExhausted when
/// the limits are hit.
Report check(const Environment& env, const Term* t, const Typ* goal, Limits limits = {});

/// Every BNEL inhabitant of `goal` with at most `max_heads` head symbols, in
/// a fixed order and without duplicates. Throws BudgetExceeded when the
/// enumeration outgrows the node budget.
std::vector<OwnedTerm> enumerate_bnel(const Environment& env, const Typ* goal, size_t max_heads,
                                      Limits limits = {});

}  // namespace canon::oracle
