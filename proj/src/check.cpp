#include "canon/check.hpp"

#include <optional>

#include "canon/subst.hpp"

namespace canon {

const char* to_string(CheckError e) {
  switch (e) {
    case CheckError::None: return "ok";
    case CheckError::UnresolvedSymbol: return "UnresolvedSymbol";
    case CheckError::UntypedHead: return "UntypedHead";
    case CheckError::ArityMismatch: return "ArityMismatch";
    case CheckError::SpineMismatch: return "SpineMismatch";
    case CheckError::ArgumentTypeMismatch: return "ArgumentTypeMismatch";
    case CheckError::Reduction: return "Reduction";
  }
  return "?";
}

namespace {

class Checker {
 public:
  explicit Checker(const Environment& env) : env_(env) { cx_.env = &env; }

  CheckReport run(const Term* t, const Typ* goal) {
    try {
      return check(t, Entry::closure(goal, nullptr), nullptr, 0);
    } catch (const std::exception& e) {
      return {CheckError::Reduction, e.what(), {}};
    }
  }

 private:
  CheckReport fail(CheckError e, std::string msg) { return {e, std::move(msg), {}}; }

  // `expected` is a closure over a type node; `env` maps t's free indices.
  CheckReport check(const Term* t, const Entry& expected, const Subst& env, size_t depth) {
    const Typ* T = expected.node;
    if (t->params.size() != T->params.size())
      return fail(CheckError::ArityMismatch,
                  "term binds " + std::to_string(t->params.size()) + " parameters, type expects " +
                      std::to_string(T->params.size()));
    std::vector<Entry> xs;
    for (auto& p : T->params) xs.push_back(levels_.fresh(p.type));

    std::vector<Entry> type_frame = xs;
    for (auto& l : T->lets) type_frame.push_back(Entry::let(l.def));
    Subst type_env = T->frame_size() ? Frame::push(expected.env, type_frame) : expected.env;

    std::vector<Entry> term_frame = xs;
    for (auto& l : t->lets) term_frame.push_back(Entry::let(l.def));
    Subst term_env = t->frame_size() ? Frame::push(env, term_frame) : env;

    size_t mark = types_.size();
    for (auto& p : T->params)
      types_.push_back(p.type ? std::optional<Entry>(Entry::closure(p.type, type_env))
                              : std::nullopt);
    for (auto& l : t->lets)
      types_.push_back(l.type ? std::optional<Entry>(Entry::closure(l.type, term_env))
                              : std::nullopt);

    CheckReport r = check_body(t, expected, xs, term_env, depth);
    types_.resize(mark);
    return r;
  }

  CheckReport check_body(const Term* t, const Entry& expected, const std::vector<Entry>& xs,
                         const Subst& term_env, size_t depth) {
    std::optional<Entry> head_ty;
    if (t->head.is_global()) {
      if (t->head.index >= env_.globals.size())
        return fail(CheckError::UnresolvedSymbol, "unknown global");
      const auto& g = env_.at(t->head.index);
      if (!g.type) return fail(CheckError::UntypedHead, g.name + " has no type");
      head_ty = Entry::closure(g.type, nullptr);
    } else {
      if (t->head.index >= types_.size())
        return fail(CheckError::UnresolvedSymbol, "index out of scope");
      head_ty = types_[types_.size() - 1 - t->head.index];
      if (!head_ty) return fail(CheckError::UntypedHead, "local head has no type");
    }
    const Typ* F = head_ty->node;
    if (F->params.size() != t->args.size())
      return fail(CheckError::ArityMismatch,
                  "head expects " + std::to_string(F->params.size()) + " arguments, got " +
                      std::to_string(t->args.size()));
    std::vector<Entry> args;
    for (auto* a : t->args) args.push_back(Entry::closure(a, term_env));
    std::vector<Entry> fframe = args;
    for (auto& l : F->lets) fframe.push_back(Entry::let(l.def));
    Subst fenv = F->frame_size() ? Frame::push(head_ty->env, fframe) : head_ty->env;

    for (size_t i = 0; i < t->args.size(); ++i) {
      const Typ* Z = F->params[i].type;
      if (!Z) return fail(CheckError::UntypedHead, "head parameter lacks a type");
      CheckReport r = check(t->args[i], Entry::closure(Z, fenv), term_env, depth + 1);
      if (!r.ok()) {
        if (r.error == CheckError::SpineMismatch) r.error = CheckError::ArgumentTypeMismatch;
        r.path.insert(r.path.begin(), i);
        return r;
      }
    }
    App lhs{*head_ty, args};
    App rhs{expected, xs};
    if (!convertible(cx_, lhs, rhs, levels_))
      return fail(CheckError::SpineMismatch, "codomain mismatch");
    return {};
  }

  const Environment& env_;
  ReduceContext cx_;
  LevelSupply levels_;
  std::vector<std::optional<Entry>> types_;
};

}  // namespace

CheckReport check_wellformed(const Environment& env, const Term* t, const Typ* against) {
  return Checker(env).run(t, against);
}

CheckReport check_environment(const Environment& env) {
  for (const auto& g : env.globals) {
    if (!g.type || !g.def) continue;
    CheckReport r = check_wellformed(env, g.def, g.type);
    if (!r.ok()) {
      r.message = g.name + ": " + r.message;
      return r;
    }
  }
  return {};
}

}  // namespace canon
