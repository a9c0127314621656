#pragma once

// Surface problem language (.canon files).
//
//   inductive Nat : Sort where | zero : Nat | succ : (n : Nat) -> Nat
//   structure And (a b : Sort) where | left : a | right : b
//   def Not (p : Sort) : Sort := p -> False
//   axiom em : (p : Sort) -> Or p (Not p)
//   goal (A B : Sort) : A /\ Not A -> B
//   #count 5
//
// Terms: `fun x (y : T) => t`, `let x : T := t in u`, application by
// juxtaposition, `(x : A) -> B`, `A -> B`, `A /\ B` (And), `A \/ B` (Or),
// natural-number and string literals, `Sort`. `--` starts a line comment.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace canon::surface {

struct Pos {
  int line = 1;
  int column = 1;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Var, Nat, Str, App, Lam, Pi, Let };
  Kind kind = Kind::Var;
  std::string name;           // Var; bound name of Lam/Pi/Let
  uint64_t nat = 0;           // Nat
  ExprPtr type;               // Lam (optional)/Pi/Let (optional) annotation
  ExprPtr value;              // Let
  ExprPtr body;               // Lam/Pi/Let
  ExprPtr fn;                 // App
  std::vector<ExprPtr> args;  // App
  Pos pos;
};

ExprPtr var(std::string name, Pos pos = {});
ExprPtr nat(uint64_t n, Pos pos = {});
ExprPtr str(std::string s, Pos pos = {});
ExprPtr app(ExprPtr fn, std::vector<ExprPtr> args, Pos pos = {});
ExprPtr lam(std::string name, ExprPtr type, ExprPtr body, Pos pos = {});
ExprPtr pi(std::string name, ExprPtr type, ExprPtr body, Pos pos = {});
ExprPtr let(std::string name, ExprPtr type, ExprPtr value, ExprPtr body, Pos pos = {});

struct Binder {
  std::string name;
  ExprPtr type;  // may be null for fun binders
};

struct Ctor {
  std::string name;
  ExprPtr type;
  Pos pos;
};

struct Decl {
  enum class Kind { Inductive, Structure, Def, Axiom, Goal, Pragma };
  Kind kind = Kind::Def;
  std::string name;             // pragma: key without '#'
  std::vector<Binder> params;   // declaration binders
  ExprPtr type;                 // inductive/structure: optional arity; def/axiom/goal: type
  ExprPtr body;                 // def: optional
  std::vector<Ctor> ctors;      // constructors or structure fields
  std::string ctor_name;        // structure constructor (default "mk")
  std::optional<double> value;  // pragma argument
  Pos pos;
};

struct File {
  std::vector<Decl> decls;
};

enum class ErrorKind {
  SyntaxError,
  DuplicateName,
  MissingGoal,
  UnknownSymbol,
  NonPositiveOccurrence,
  UnknownTypeInConstructor,
  ArityUnderflowUnfixable,
  CyclicDefinition,
  PolicyConflict,
  Unsupported,
};

const char* to_string(ErrorKind k);

class FrontendError : public std::runtime_error {
 public:
  FrontendError(ErrorKind kind, Pos pos, const std::string& msg);
  ErrorKind kind;
  Pos pos;
};

/// Parses a whole file. Checks duplicate names and that exactly one goal exists.
File parse(std::string_view text);
/// Parses a single expression.
ExprPtr parse_expr(std::string_view text);

/// Canonical pretty-printing. parse(print(f)) prints identically.
std::string print(const File& f);
std::string print(const ExprPtr& e);

// Surface-level utilities used by elaboration.
bool occurs_free(const ExprPtr& e, const std::string& name);
/// Capture-avoiding substitution of `value` for free `name`.
ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& value);
/// Flattens nested applications: returns head and all arguments.
std::pair<ExprPtr, std::vector<ExprPtr>> spine(const ExprPtr& e);

}  // namespace canon::surface
