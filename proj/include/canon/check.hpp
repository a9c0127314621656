#pragma once

// Type checking of meta-free core terms against core types, using the
// explicit-substitution engine for beta-equality of spines.

#include <string>
#include <vector>

#include "canon/syntax.hpp"

namespace canon {

enum class CheckError {
  None,
  UnresolvedSymbol,
  UntypedHead,
  ArityMismatch,
  SpineMismatch,         // head codomain does not match the expected codomain
  ArgumentTypeMismatch,  // an argument fails its own typing constraint
  Reduction,             // reduction failed (fuel, malformed environment)
};

const char* to_string(CheckError e);

struct CheckReport {
  CheckError error = CheckError::None;
  std::string message;
  std::vector<size_t> path;  // argument indices from the root to the offending subterm

  bool ok() const { return error == CheckError::None; }
};

CheckReport check_wellformed(const Environment& env, const Term* t, const Typ* against);

/// Checks every typed global whose definition is present (and that every
/// rule of every recursor is well formed). Returns the first failure.
CheckReport check_environment(const Environment& env);

}  // namespace canon
