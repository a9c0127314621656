#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "canon/frontend.hpp"
#include "canon/search.hpp"

namespace canon::test {

inline std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus(const std::string& name) {
  return std::string(CANON_SOURCE_DIR) + "/corpus/" + name;
}

inline Problem load_file(const std::string& path) { return load_problem(read(path)); }

/// Declarations elaborated in order, with surface translation on top.
struct Scope {
  Elaborator el;

  explicit Scope(const std::string& text) {
    for (auto& d : surface::parse(text).decls) el.add(d);
  }
  const Environment& env() const { return el.env(); }
  const Typ* type(const std::string& s) { return el.translate_type(surface::parse_expr(s)); }
  const Term* term(const std::string& s, const std::string& ty) {
    return el.translate_term(surface::parse_expr(s), surface::parse_expr(ty));
  }
  uint32_t global(const std::string& name) const { return *env().find(name); }
};

inline std::vector<std::string> printed(const Environment& env, const SolveResult& r) {
  std::vector<std::string> out;
  for (auto& s : r.solutions) out.push_back(print_term(env, s.root));
  return out;
}

inline std::set<std::string> printed_set(const Environment& env, const SolveResult& r) {
  auto v = printed(env, r);
  return {v.begin(), v.end()};
}

inline std::string skeleton(const Environment& env, const Term* t) {
  std::string s;
  for (auto& h : head_skeleton(env, t)) s += (s.empty() ? "" : " ") + h;
  return s;
}

inline SolveResult run(const Problem& p, uint64_t count = 1, double timeout = 5,
                       bool prefilter = true) {
  SearchConfig cfg;
  cfg.count = count;
  cfg.timeout = timeout;
  cfg.prefilter = prefilter;
  if (p.overrides.synthesis && *p.overrides.synthesis) cfg.mode = Mode::Synthesis;
  return solve(p.env, p.goal, cfg);
}

}  // namespace canon::test
