// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "canon/constraints.hpp"
#include "canon/oracle.hpp"
#include "helpers.hpp"

using namespace canon;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << "\n";
  if (!ok) ++failures;
}

struct Instance {
  std::string name;
  Problem problem;
};

std::vector<Instance> load_dir(const std::string& dir) {
  std::vector<fs::path> paths;
  for (auto& e : fs::directory_iterator(test::corpus(dir)))
    if (e.path().extension() == ".canon") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  std::vector<Instance> out;
  for (auto& p : paths) out.push_back({dir + p.stem().string(), test::load_file(p.string())});
  return out;
}

SearchConfig config_for(const Problem& p, uint64_t count, double timeout) {
  SearchConfig cfg;
  cfg.count = p.overrides.count.value_or(count);
  cfg.timeout = p.overrides.timeout.value_or(timeout);
  if (p.overrides.synthesis && *p.overrides.synthesis) cfg.mode = Mode::Synthesis;
  if (p.overrides.prefilter) cfg.prefilter = false;
  return cfg;
}

Mode mode_of(const Problem& p) {
  return p.overrides.synthesis && *p.overrides.synthesis ? Mode::Synthesis : Mode::Default;
}

std::set<std::string> keys(const std::vector<OwnedTerm>& ts) {
  std::set<std::string> out;
  for (auto& t : ts) out.insert(solution_key(t.root));
  return out;
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

struct Swept {
  std::string name;
  const Problem* problem;
  SolveResult result;
};

// Every corpus problem solved under its pragmas, `count` solutions unless a pragma says otherwise.
std::vector<Swept> sweep(const std::vector<Instance>& all, uint64_t count, double timeout) {
  std::vector<Swept> out;
  for (auto& in : all) {
    SearchConfig cfg = config_for(in.problem, count, timeout);
    out.push_back({in.name, &in.problem, solve(in.problem.env, in.problem.goal, cfg)});
  }
  return out;
}

void check_outputs(const std::vector<Swept>& runs) {
  size_t terms = 0, rejected = 0;
  std::string first;
  for (auto& r : runs) {
    for (auto& s : r.result.solutions) {
      ++terms;
      oracle::Report rep = oracle::check(r.problem->env, s.root, r.problem->goal);
      if (!rep.accepted) {
        ++rejected;
        if (first.empty()) first = r.name + ": " + rep.reason;
      }
    }
  }
  report(1, rejected == 0 && terms > 0,
         std::to_string(terms) + " terms from " + std::to_string(runs.size()) + " problems, " +
             std::to_string(rejected) + " rejected" + (first.empty() ? "" : " (" + first + ")"));
}

struct Reference {
  const char* file;
  uint64_t count;
  double limit;
  const char* skeleton;
};

void check_references() {
  const Reference refs[] = {
      {"explosion.canon", 1, 10,
       "False.rec #2 Pi.f #2 False And.right #2 Pi #2 False #0 And.left #2 Pi #2 False #0"},
      {"eq_trans.canon", 1, 10, "Eq.rec #5 #3 Eq #7 #6 #1 #1 #2 #0"},
      {"ite.canon", 5, 10, "Decidable.rec #3 #5 #1 #1 #2"},
      {"decide_eq_true.canon", 1, 10,
       "Decidable.rec #2 Eq Bool decide #3 #0 Bool.true False.rec Eq Bool Bool.false Bool.true #0 "
       "#1 Eq.refl Bool Bool.true #1"},
      {"vec_append.canon", 1, 15, "Vec.rec #4 Vec #6 add #5 #1 #1 Vec.vcons #8 #3 add #7 #2 #0 #2 #0"},
  };
  bool ok = true;
  std::string detail;
  for (const Reference& ref : refs) {
    Problem p = test::load_file(test::corpus(ref.file));
    SearchConfig cfg = config_for(p, ref.count, ref.limit);
    cfg.count = ref.count;
    cfg.timeout = ref.limit;
    auto t0 = std::chrono::steady_clock::now();
    SolveResult r = solve(p.env, p.goal, cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool found = false;
    for (auto& s : r.solutions) found = found || test::skeleton(p.env, s.root) == ref.skeleton;
    bool here = found && secs <= ref.limit;
    ok = ok && here;
    detail += std::string(detail.empty() ? "" : ", ") + fs::path(ref.file).stem().string() + " " +
              fixed(secs, 3) + "s" + (found ? "" : " (skeleton differs)");
  }
  report(2, ok, detail);
}

void check_exhaustive(const std::vector<Instance>& micro) {
  size_t equal = 0, total_terms = 0;
  std::string first;
  for (auto& in : micro) {
    SearchConfig cfg = config_for(in.problem, kUnlimited, 10);
    cfg.count = kUnlimited;
    cfg.prefilter = false;
    SolveResult r = solve(in.problem.env, in.problem.goal, cfg);
    auto reference = keys(oracle::enumerate_bnel(in.problem.env, in.problem.goal, 8));
    auto got = keys(r.solutions);
    total_terms += reference.size();
    if (r.exhausted && got == reference)
      ++equal;
    else if (first.empty())
      first = in.name + " solver " + std::to_string(got.size()) + " vs enumerator " +
              std::to_string(reference.size());
  }
  report(3, micro.size() >= 10 && equal == micro.size(),
         std::to_string(equal) + "/" + std::to_string(micro.size()) + " micro-instances equal (" +
             std::to_string(total_terms) + " terms)" + (first.empty() ? "" : "; " + first));
}

void check_walks(const std::vector<Instance>& all) {
  std::mt19937_64 rng(20261014);
  size_t restored = 0, refinements = 0;
  std::string first;
  for (auto& in : all) {
    State st(in.problem.env, in.problem.goal, mode_of(in.problem));
    uint64_t h0 = st.structural_hash();
    bool ok = true;
    for (int walk = 0; walk < 1000; ++walk) {
      std::vector<MetaId> done;
      int steps = std::uniform_int_distribution<int>(1, 60)(rng);
      for (int i = 0; i < steps && !st.complete(); ++i) {
        const auto& open = st.open();
        MetaId m = open[rng() % open.size()];
        auto cs = st.candidates(m, rng() % 2 == 0);
        if (cs.empty()) break;
        if (st.refine(m, cs[rng() % cs.size()]).ok) done.push_back(m);
        ++refinements;
      }
      while (!done.empty()) {
        st.backtrack(done.back());
        done.pop_back();
      }
      ok = ok && st.structural_hash() == h0;
    }
    if (ok)
      ++restored;
    else if (first.empty())
      first = in.name;
  }
  report(4, restored == all.size(),
         std::to_string(restored) + "/" + std::to_string(all.size()) + " problems restored after 1000 walks each (" +
             std::to_string(refinements) + " refinements)" + (first.empty() ? "" : "; first failure " + first));
}

const char* kConstraintEnv = R"(
inductive Nat : Sort where
  | zero : Nat
  | succ : (n : Nat) -> Nat
axiom A : Sort
axiom f : A -> A
axiom a : A
axiom b : A
goal : A
)";

struct Store {
  test::Scope s{kConstraintEnv};
  std::vector<MetaCell> cells;
  Trail trail;
  EquationStore eqs{trail};
  LevelSupply levels;

  MetaId meta(const char* type) {
    cells.push_back({s.type(type), false, {}, 0, 0});
    eqs.reserve_metas(cells.size());
    return static_cast<MetaId>(cells.size() - 1);
  }
  ReduceContext cx() const { return {&s.env(), cells, kDefaultFuel}; }
  Entry g(const char* name) const { return Entry::global(s.global(name)); }
  Entry m(MetaId id) const { return Entry::meta_closure(id, nullptr); }
};

void check_equations() {
  std::vector<std::string> rows;
  bool ok = true;
  for (Mode mode : {Mode::Default, Mode::Synthesis}) {
    // (fun x => f ?X) a against b
    Store st;
    MetaId l = st.meta("A -> A");
    MetaId x = st.meta("A");
    st.cells[l] = {st.cells[l].type_node, true, SymbolRef::global(st.s.global("f")), x, 1};
    bool v = st.eqs.process(st.cx(), st.levels, mode, App{st.m(l), {st.g("a")}}, App{st.g("b"), {}}) ==
             ProcessResult::Violated;
    ok = ok && v;
  }
  rows.push_back(std::string("beta-redex vs rigid head ") + (ok ? "violated" : "not violated"));

  // Nat.rec (fun t => A) a (fun n h => b) ?t against a
  auto recursor = [](Store& st) {
    MetaId t = st.meta("Nat");
    const Term* fn = st.s.term("fun x => Nat.rec (fun t => A) a (fun n h => b) x", "Nat -> A");
    return std::pair{t, App{Entry::closure(fn, nullptr), {st.m(t)}}};
  };
  {
    Store st;
    auto [t, lhs] = recursor(st);
    bool v = st.eqs.process(st.cx(), st.levels, Mode::Default, lhs, App{st.g("a"), {}}) ==
             ProcessResult::Violated;
    rows.push_back(std::string("default ") + (v ? "violated" : "not violated"));
    ok = ok && v;
  }
  {
    Store st;
    auto [t, lhs] = recursor(st);
    bool s = st.eqs.process(st.cx(), st.levels, Mode::Synthesis, lhs, App{st.g("a"), {}}) ==
             ProcessResult::Suspended;
    s = s && st.eqs.has_rigid(t);
    rows.push_back(std::string("synthesis ") + (s ? "suspended" : "not suspended"));
    st.cells[t].assigned = true;
    st.cells[t].head = SymbolRef::global(st.s.global("Nat.zero"));
    bool sat = st.eqs.on_assign(st.cx(), st.levels, Mode::Synthesis, t) && st.eqs.open_count() == 0;
    rows.push_back(std::string("after zero ") + (sat ? "satisfied" : "not satisfied"));
    ok = ok && s && sat;
  }
  std::string detail;
  for (auto& r : rows) detail += (detail.empty() ? "" : "; ") + r;
  report(5, ok, detail);
}

void check_throughput(const std::vector<Swept>& runs) {
  // Hardest = the solved problem needing the most refinements at its own solution count.
  const Swept* hardest = nullptr;
  for (auto& r : runs)
    if (!r.result.solutions.empty() &&
        (!hardest || r.result.stats.refinements > hardest->result.stats.refinements))
      hardest = &r;
  if (!hardest) return report(6, false, "no solved problem");
  const RunStats& r = hardest->result.stats;
  double rate = r.refinements_per_sec();
  report(6, rate >= 100000,
         hardest->name + ": " + std::to_string(r.refinements) + " refinements in " +
             fixed(r.seconds, 3) + "s, " + std::to_string(static_cast<uint64_t>(rate)) + "/s");
}

void check_growth(const std::vector<Swept>& runs) {
  std::vector<double> ratios;
  std::string outside;
  for (auto& r : runs) {
    const auto& its = r.result.stats.iterations;
    for (size_t i = 2; i < its.size(); ++i) {
      if (!its[i].exhausted || !its[i - 1].exhausted || its[i - 1].nodes == 0) continue;
      double g = static_cast<double>(its[i].nodes) / static_cast<double>(its[i - 1].nodes);
      ratios.push_back(g);
      if (g < 1.5 || g > 3.0)
        outside += " " + r.name + "#" + std::to_string(i + 1) + " " + std::to_string(its[i - 1].nodes) + "->" +
                   std::to_string(its[i].nodes);
    }
  }
  if (ratios.empty()) return report(7, false, "no iteration pairs past the second");
  std::sort(ratios.begin(), ratios.end());
  size_t in_range = std::count_if(ratios.begin(), ratios.end(), [](double g) { return g >= 1.5 && g <= 3.0; });
  double median = ratios[ratios.size() / 2];
  report(7, in_range == ratios.size(),
         std::to_string(in_range) + "/" + std::to_string(ratios.size()) + " growth factors in [1.5, 3.0], median " +
             fixed(median) + ", range [" + fixed(ratios.front()) + ", " + fixed(ratios.back()) + "]" +
             (outside.empty() ? "" : ";" + outside));
}

void check_parallel(const std::vector<Instance>& all) {
  size_t compared = 0, equal = 0;
  std::string first;
  for (auto& in : all) {
    SearchConfig cfg = config_for(in.problem, 5, 5);
    cfg.workers = 1;
    SolveResult seq = solve(in.problem.env, in.problem.goal, cfg);
    cfg.workers = 4;
    SolveResult par = solve(in.problem.env, in.problem.goal, cfg);
    auto done = [](const SolveResult& r) {
      return !r.stats.iterations.empty() && r.stats.iterations.back().exhausted;
    };
    if (!done(seq) || !done(par)) continue;
    ++compared;
    if (keys(seq.solutions) == keys(par.solutions))
      ++equal;
    else if (first.empty())
      first = in.name;
  }
  report(8, compared > 0 && equal == compared,
         std::to_string(equal) + "/" + std::to_string(compared) +
             " problems with an exhausted final iteration agree" + (first.empty() ? "" : "; first difference " + first));
}

std::string cli_stdout(const std::string& args) {
  std::string cmd = std::string(CANON_CLI) + " " + args + " 2>/dev/null";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return "<popen failed>";
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int st = pclose(p);
  out += "<exit " + std::to_string(WIFEXITED(st) ? WEXITSTATUS(st) : -1) + ">";
  return out;
}

void check_determinism() {
  const char* cases[] = {"eq_trans.canon --count 3", "ite.canon --count 5", "decide_eq_true.canon --count 5",
                         "vec_append.canon", "false.canon --timeout 1"};
  size_t identical = 0;
  for (const char* c : cases) {
    std::string args = "solve " + test::corpus("") + c + " --deterministic";
    if (cli_stdout(args) == cli_stdout(args)) ++identical;
  }
  size_t total = sizeof cases / sizeof *cases;
  report(9, identical == total, std::to_string(identical) + "/" + std::to_string(total) + " problems byte-identical");
}

void check_length() {
  Problem p = test::load_file(test::corpus("eq_trans.canon"));
  SolveResult r = test::run(p);
  if (r.solutions.empty()) return report(10, false, "no solution");
  // Eq.rec A b (fun b_1 t => Eq A a b_1) h1 c h2, counted by hand
  const size_t hand = 10;
  size_t len = proof_length(r.solutions[0].root);
  report(10, len == hand, "proof length " + std::to_string(len) + ", hand count " + std::to_string(hand));
}

}  // namespace

int main() {
  std::vector<Instance> main_corpus = load_dir("");
  std::vector<Instance> micro = load_dir("micro/");
  std::vector<Instance> all;
  for (auto* v : {&main_corpus, &micro})
    for (auto& in : *v) all.push_back({in.name, load_problem(test::read(test::corpus(in.name + ".canon")))});

  std::vector<Swept> runs = sweep(all, 5, 5);
  std::vector<Swept> single = sweep(all, 1, 15);
  check_outputs(runs);
  check_references();
  check_exhaustive(micro);
  check_walks(all);
  check_equations();
  check_throughput(single);
  check_growth(runs);
  check_parallel(all);
  check_determinism();
  check_length();
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << "\n";
  return failures == 0 ? 0 : 1;
}
