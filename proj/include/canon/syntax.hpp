#pragma once

// Core syntax: the single-constructor term/type form
//
//   term:  fun x... . let y... := M... . f A...
//   type:  Pi (x : X)... . let (y : Y := M)... . g B...
//
// Both forms share one node type. A type is a term whose binders carry
// annotations. Indices are de Bruijn: a node with params p0..pk-1 and lets
// l0..lm-1 pushes one frame [p0..pk-1, l0..lm-1]; index 0 is the last entry of
// the innermost frame. A node with no params and no lets pushes nothing.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace canon {

struct Term;
using Typ = Term;

struct SymbolRef {
  enum class Kind : uint8_t { Local, Global };
  Kind kind = Kind::Local;
  uint32_t index = 0;

  static SymbolRef local(uint32_t i) { return {Kind::Local, i}; }
  static SymbolRef global(uint32_t g) { return {Kind::Global, g}; }
  bool is_global() const { return kind == Kind::Global; }
  bool operator==(const SymbolRef&) const = default;
};

struct Binder {
  std::string name;
  const Typ* type = nullptr;  // null: bound but never a refinement head
};

struct RecursorInfo {
  uint32_t inductive = 0;      // global id of the type former
  uint32_t num_params = 0;     // inductive parameters
  uint32_t num_pre = 0;        // params + motive + minor premises
  uint32_t major_index = 0;    // position of the major premise in the spine
  // constructor global id -> rule. The rule takes the first num_pre recursor
  // arguments followed by the constructor's fields.
  std::map<uint32_t, const Term*> rules;
};

struct ProjectionInfo {
  uint32_t constructor = 0;  // the structure's single constructor
  uint32_t num_params = 0;   // structure parameters preceding the major premise
  uint32_t field = 0;        // 0-based, after parameters
};

struct ConstructorInfo {
  uint32_t inductive = 0;
  uint32_t index = 0;
  uint32_t num_params = 0;
};

using ReductionInfo = std::variant<RecursorInfo, ProjectionInfo, ConstructorInfo>;

struct LetBinding {
  std::string name;
  const Typ* type = nullptr;   // null: not usable as a head
  const Term* def = nullptr;   // null: opaque constant
  std::optional<ReductionInfo> reduction;

  bool is_recursor() const {
    return reduction && std::holds_alternative<RecursorInfo>(*reduction);
  }
  bool is_projection() const {
    return reduction && std::holds_alternative<ProjectionInfo>(*reduction);
  }
  bool is_constructor() const {
    return reduction && std::holds_alternative<ConstructorInfo>(*reduction);
  }
};

struct Term {
  std::vector<Binder> params;
  std::vector<LetBinding> lets;
  SymbolRef head;
  std::vector<const Term*> args;

  uint32_t frame_size() const { return static_cast<uint32_t>(params.size() + lets.size()); }
};

/// Owns term nodes. Nodes are immutable once handed out and addresses are stable.
class TermArena {
 public:
  Term* make() {
    nodes_.push_back(std::make_unique<Term>());
    return nodes_.back().get();
  }
  const Term* make(Term t) {
    nodes_.push_back(std::make_unique<Term>(std::move(t)));
    return nodes_.back().get();
  }
  size_t size() const { return nodes_.size(); }

 private:
  std::vector<std::unique_ptr<Term>> nodes_;
};

/// Top-level lets. Global ids index `globals`.
struct Environment {
  std::shared_ptr<TermArena> arena = std::make_shared<TermArena>();
  std::vector<LetBinding> globals;
  std::map<std::string, uint32_t, std::less<>> by_name;
  uint32_t sort = 0;

  Environment();

  uint32_t add(LetBinding b);
  std::optional<uint32_t> find(std::string_view name) const;
  const LetBinding& at(uint32_t id) const { return globals.at(id); }
  LetBinding& at(uint32_t id) { return globals.at(id); }

  /// A `Sort`-headed node with no args and no binders.
  const Typ* sort_type() const { return sort_node_; }

 private:
  const Typ* sort_node_ = nullptr;
};

/// A term that owns its storage. Used for solver output.
struct OwnedTerm {
  std::shared_ptr<TermArena> arena;
  const Term* root = nullptr;
};

class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline uint32_t arity_of(const Typ& typ) { return static_cast<uint32_t>(typ.params.size()); }

/// Structural (alpha) equality.
bool same_term(const Term* a, const Term* b);

/// Number of nodes reachable from t, counting binder annotations.
size_t node_count(const Term* t);

/// Preorder list of heads; globals print by name, locals as "#i".
std::vector<std::string> head_skeleton(const Environment& env, const Term* t);

/// Proof length: symbol occurrences excluding binder types.
size_t proof_length(const Term* t);

/// Printing. Binder names are made unique along the scope chain so the output
/// re-parses to the same term. `scope` lists enclosing local names outermost first.
std::string print_term(const Environment& env, const Term* t,
                       std::vector<std::string> scope = {});
std::string print_type(const Environment& env, const Typ* t,
                       std::vector<std::string> scope = {});

}  // namespace canon
