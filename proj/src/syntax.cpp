#include "canon/syntax.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace canon {

Environment::Environment() {
  Term* s = arena->make();
  s->head = SymbolRef::global(0);
  sort_node_ = s;
  LetBinding b;
  b.name = "Sort";
  b.type = s;
  sort = add(std::move(b));
}

uint32_t Environment::add(LetBinding b) {
  if (by_name.count(b.name)) throw SyntaxError("duplicate global '" + b.name + "'");
  auto id = static_cast<uint32_t>(globals.size());
  by_name.emplace(b.name, id);
  globals.push_back(std::move(b));
  return id;
}

std::optional<uint32_t> Environment::find(std::string_view name) const {
  auto it = by_name.find(name);
  if (it == by_name.end()) return std::nullopt;
  return it->second;
}

bool same_term(const Term* a, const Term* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->params.size() != b->params.size() || a->lets.size() != b->lets.size() ||
      a->args.size() != b->args.size() || !(a->head == b->head))
    return false;
  for (size_t i = 0; i < a->params.size(); ++i)
    if (!same_term(a->params[i].type, b->params[i].type)) return false;
  for (size_t i = 0; i < a->lets.size(); ++i) {
    if (!same_term(a->lets[i].type, b->lets[i].type)) return false;
    if (!same_term(a->lets[i].def, b->lets[i].def)) return false;
  }
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!same_term(a->args[i], b->args[i])) return false;
  return true;
}

size_t node_count(const Term* t) {
  if (!t) return 0;
  size_t n = 1;
  for (auto& p : t->params) n += node_count(p.type);
  for (auto& l : t->lets) n += node_count(l.type) + node_count(l.def);
  for (auto* a : t->args) n += node_count(a);
  return n;
}

std::vector<std::string> head_skeleton(const Environment& env, const Term* t) {
  std::vector<std::string> out;
  std::function<void(const Term*)> go = [&](const Term* n) {
    for (auto& l : n->lets)
      if (l.def) go(l.def);
    if (n->head.is_global())
      out.push_back(env.at(n->head.index).name);
    else
      out.push_back("#" + std::to_string(n->head.index));
    for (auto* a : n->args) go(a);
  };
  go(t);
  return out;
}

size_t proof_length(const Term* t) {
  size_t n = 1;  // the head
  for (auto& l : t->lets)
    if (l.def) n += proof_length(l.def);
  for (auto* a : t->args) n += proof_length(a);
  return n;
}

namespace {

class Printer {
 public:
  Printer(const Environment& env, std::vector<std::string> scope)
      : env_(env), scope_(std::move(scope)) {}

  std::string term(const Term* t) {
    std::ostringstream os;
    size_t mark = scope_.size();
    std::vector<std::string> pnames;
    for (auto& p : t->params) pnames.push_back(bind(p.name));
    std::vector<std::string> lnames;
    for (auto& l : t->lets) lnames.push_back(bind(l.name));
    if (!pnames.empty()) {
      os << "fun";
      for (auto& n : pnames) os << ' ' << n;
      os << " => ";
    }
    lets(os, t, lnames);
    os << spine(t);
    scope_.resize(mark);
    return os.str();
  }

  std::string type(const Typ* t) {
    std::ostringstream os;
    size_t mark = scope_.size();
    std::vector<std::string> pnames;
    for (auto& p : t->params) pnames.push_back(bind(p.name));
    std::vector<std::string> lnames;
    for (auto& l : t->lets) lnames.push_back(bind(l.name));
    for (size_t i = 0; i < t->params.size(); ++i) {
      os << '(' << pnames[i] << " : ";
      if (t->params[i].type)
        os << type(t->params[i].type);
      else
        os << '_';
      os << ") -> ";
    }
    lets(os, t, lnames);
    os << spine(t);
    scope_.resize(mark);
    return os.str();
  }

 private:
  std::string bind(const std::string& raw) {
    std::string base = (raw.empty() || raw == "_") ? "x" : raw;
    std::string name = base;
    for (int k = 1; taken(name); ++k) name = base + "_" + std::to_string(k);
    scope_.push_back(name);
    return name;
  }

  bool taken(const std::string& n) const {
    if (env_.find(n)) return true;
    return std::find(scope_.begin(), scope_.end(), n) != scope_.end();
  }

  void lets(std::ostringstream& os, const Term* t, const std::vector<std::string>& names) {
    for (size_t i = 0; i < t->lets.size(); ++i) {
      auto& l = t->lets[i];
      os << "let " << names[i];
      if (l.type) os << " : " << type(l.type);
      os << " := ";
      if (l.def)
        os << term(l.def);
      else
        os << '_';
      os << " in ";
    }
  }

  std::string head(SymbolRef h) const {
    if (h.is_global()) return env_.at(h.index).name;
    if (h.index >= scope_.size()) return "?" + std::to_string(h.index);
    return scope_[scope_.size() - 1 - h.index];
  }

  std::string spine(const Term* t) {
    std::string s = head(t->head);
    for (auto* a : t->args) {
      std::string inner = term(a);
      bool atomic = a->params.empty() && a->lets.empty() && a->args.empty();
      s += ' ';
      s += atomic ? inner : "(" + inner + ")";
    }
    return s;
  }

  const Environment& env_;
  std::vector<std::string> scope_;
};

}  // namespace

std::string print_term(const Environment& env, const Term* t, std::vector<std::string> scope) {
  return Printer(env, std::move(scope)).term(t);
}

std::string print_type(const Environment& env, const Typ* t, std::vector<std::string> scope) {
  return Printer(env, std::move(scope)).type(t);
}

}  // namespace canon
