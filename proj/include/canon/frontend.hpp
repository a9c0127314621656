#pragma once

// Elaboration of surface declarations into a core Environment and goal.
//
// Translation keeps every symbol at its static arity: under-applied heads are
// eta-expanded, excess arguments go through the Pi wrapper's projection,
// function-valued arguments at arity-0 positions are packed with Pi.mk, arrows
// used as terms become `Pi A (fun x => B)`, and beta-redexes become lets.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "canon/surface.hpp"
#include "canon/syntax.hpp"

namespace canon {

struct SearchOverrides {
  std::optional<bool> synthesis;
  std::optional<uint64_t> count;
  std::optional<double> timeout;
  std::optional<bool> prefilter;
};

struct Problem {
  Environment env;
  const Typ* goal = nullptr;
  SearchOverrides overrides;
  bool pi_wrapper = false;  // whether the Pi structure was emitted
};

class Elaborator {
 public:
  Elaborator();

  /// Declarations must be added in file order.
  void add(const surface::Decl& d);
  /// Applies the inclusion policy and checks for unguarded cycles.
  Problem finish();

  /// Translations in the empty local context, for tests and tools.
  const Typ* translate_type(const surface::ExprPtr& t);
  const Term* translate_term(const surface::ExprPtr& e, const surface::ExprPtr& type);

  const Environment& env() const { return env_; }
  bool pi_emitted() const { return env_.find("Pi").has_value() && pi_auto_; }

 private:
  struct Local {
    std::string name;
    surface::ExprPtr stype;       // may be null
    const Typ* ctype = nullptr;   // may be null
    uint32_t arity = 0;
    bool hidden = false;
  };
  struct GlobalInfo {
    surface::ExprPtr stype;
    const Typ* ctype = nullptr;
  };
  struct Alias {
    std::vector<std::string> params;
    surface::ExprPtr body;
  };
  struct Resolved {
    SymbolRef ref;
    surface::ExprPtr stype;
    const Typ* ctype = nullptr;
    uint32_t arity = 0;
  };
  struct DefRecord {
    uint32_t id;
    std::set<std::string> body_refs;
    bool recursor_bearing = false;
  };

  [[noreturn]] void fail(surface::ErrorKind k, surface::Pos pos, const std::string& msg) const;

  void add_inductive(const surface::Decl& d);
  void add_structure(const surface::Decl& d);
  void add_def(const surface::Decl& d);
  void add_axiom(const surface::Decl& d);
  void add_goal(const surface::Decl& d);
  void add_pragma(const surface::Decl& d);

  uint32_t register_global(const std::string& name, const surface::ExprPtr& stype,
                           surface::Pos pos);
  void ensure_pi(surface::Pos pos);

  surface::ExprPtr unfold_aliases(surface::ExprPtr e) const;
  surface::ExprPtr whnf_type(surface::ExprPtr e) const;
  surface::ExprPtr infer(const surface::ExprPtr& e);
  std::optional<Resolved> resolve(const surface::ExprPtr& head);
  std::string fresh_name(const std::string& base,
                         const std::vector<surface::ExprPtr>& avoid = {}) const;

  const Typ* type_in_scope(surface::ExprPtr t);
  const Term* term_in_scope(surface::ExprPtr e, const Typ* ctype, surface::ExprPtr stype);
  void head_app(surface::ExprPtr e, Term& out);

  void note_refs(const surface::ExprPtr& e, std::set<std::string>& out) const;

  Environment env_;
  std::vector<Local> scope_;
  std::map<uint32_t, GlobalInfo> ginfo_;
  std::map<std::string, Alias> aliases_;
  std::vector<DefRecord> defs_;
  std::set<std::string> outside_refs_;  // names referenced outside def bodies
  std::set<uint32_t> recursors_;
  const Typ* goal_ = nullptr;
  SearchOverrides overrides_;
  bool pi_auto_ = false;
  mutable uint64_t fresh_counter_ = 0;
};

/// Parses and elaborates a whole problem file.
Problem load_problem(std::string_view text);

}  // namespace canon
