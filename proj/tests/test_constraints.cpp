#include <doctest.h>

#include "canon/constraints.hpp"
#include "helpers.hpp"

using namespace canon;
using canon::test::Scope;

namespace {

const char* kEnv = R"(
inductive Nat : Sort where
  | zero : Nat
  | succ : (n : Nat) -> Nat
axiom A : Sort
axiom f : A -> A
axiom f2 : A -> A -> A
axiom a : A
axiom b : A
axiom c : A
axiom d : A
goal : A
)";

struct Fixture {
  Scope s{kEnv};
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
  ProcessResult process(const App& l, const App& r, Mode mode = Mode::Default) {
    return eqs.process(cx(), levels, mode, l, r);
  }
  void assign(MetaId id, const char* head) {
    cells[id].assigned = true;
    cells[id].head = SymbolRef::global(s.global(head));
  }
  bool on_assign(MetaId id, Mode mode = Mode::Default) { return eqs.on_assign(cx(), levels, mode, id); }
  void undo_to(size_t mark, size_t neqs) {
    while (trail.size() > mark) {
      eqs.undo(trail.back());
      trail.pop();
    }
    eqs.truncate(neqs);
  }
};

}  // namespace

TEST_CASE("a beta-redex against a different rigid head is violated") {
  Fixture fx;
  // ?L := fun x => f ?X, applied to a, against b
  MetaId l = fx.meta("A -> A");
  MetaId x = fx.meta("A");
  fx.cells[l] = {fx.cells[l].type_node, true, SymbolRef::global(fx.s.global("f")), x, 1};
  CHECK(fx.process(App{fx.m(l), {fx.g("a")}}, App{fx.g("b"), {}}) == ProcessResult::Violated);
  CHECK(fx.eqs.last_violation().lhs_head.id == fx.s.global("f"));
  CHECK(fx.eqs.last_violation().rhs_head.id == fx.s.global("b"));
}

TEST_CASE("equal heads decompose into rigid suspensions") {
  Fixture fx;
  MetaId ma = fx.meta("A"), mb = fx.meta("A");
  auto r = fx.process(App{fx.g("f2"), {fx.m(ma), fx.m(mb)}}, App{fx.g("f2"), {fx.g("c"), fx.g("d")}});
  CHECK(r == ProcessResult::Decomposed);
  CHECK(fx.eqs.open_count() == 2);
  CHECK(fx.eqs.has_rigid(ma));
  CHECK(fx.eqs.has_rigid(mb));
  auto ea = fx.eqs.rigid_equation_of(ma);
  REQUIRE(ea);
  CHECK(fx.eqs.at(*ea).rigid);
  CHECK(fx.eqs.at(*ea).stuck_lhs == ma);
  CHECK(fx.eqs.at(*ea).stuck_rhs == kNoMeta);
}

TEST_CASE("a recursor stuck on its major premise depends on the mode") {
  // Nat.rec (fun t => A) a (fun n h => b) ?t =β a
  auto setup = [](Fixture& fx) {
    MetaId t = fx.meta("Nat");
    const Term* fn = fx.s.term("fun x => Nat.rec (fun t => A) a (fun n h => b) x", "Nat -> A");
    return std::pair{t, App{Entry::closure(fn, nullptr), {fx.m(t)}}};
  };

  SUBCASE("default mode: violated") {
    Fixture fx;
    auto [t, lhs] = setup(fx);
    CHECK(fx.process(lhs, App{fx.g("a"), {}}, Mode::Default) == ProcessResult::Violated);
  }
  SUBCASE("synthesis mode: suspended on the major premise") {
    Fixture fx;
    auto [t, lhs] = setup(fx);
    CHECK(fx.process(lhs, App{fx.g("a"), {}}, Mode::Synthesis) == ProcessResult::Suspended);
    CHECK(fx.eqs.has_rigid(t));
    SUBCASE("refining the major premise to zero satisfies it") {
      fx.assign(t, "Nat.zero");
      CHECK(fx.on_assign(t, Mode::Synthesis));
      CHECK(fx.eqs.open_count() == 0);
    }
  }
}

TEST_CASE("assignments re-process suspended equations") {
  Fixture fx;
  MetaId ma = fx.meta("A");
  REQUIRE(fx.process(App{fx.m(ma), {}}, App{fx.g("c"), {}}) == ProcessResult::Suspended);

  SUBCASE("the matching head") {
    fx.assign(ma, "c");
    CHECK(fx.on_assign(ma));
    CHECK(fx.eqs.open_count() == 0);
  }
  SUBCASE("a different head") {
    fx.assign(ma, "d");
    CHECK_FALSE(fx.on_assign(ma));
  }
}

TEST_CASE("rigid_equation_of") {
  Fixture fx;
  MetaId ma = fx.meta("A"), mb = fx.meta("A");
  CHECK(fx.process(App{fx.m(ma), {}}, App{fx.m(mb), {}}) == ProcessResult::Suspended);
  CHECK_FALSE(fx.eqs.rigid_equation_of(ma));
  CHECK_FALSE(fx.eqs.has_rigid(mb));
  CHECK(fx.process(App{fx.m(ma), {}}, App{fx.g("c"), {}}) == ProcessResult::Suspended);
  auto e = fx.eqs.rigid_equation_of(ma);
  REQUIRE(e);
  CHECK(*e == 1);
}

TEST_CASE("undoing the trail restores the store") {
  Fixture fx;
  MetaId ma = fx.meta("A"), mb = fx.meta("A");
  uint64_t h0 = fx.eqs.structural_hash();
  size_t mark = fx.trail.size(), n = fx.eqs.size();
  fx.process(App{fx.g("f2"), {fx.m(ma), fx.m(mb)}}, App{fx.g("f2"), {fx.g("c"), fx.g("d")}});
  CHECK(fx.eqs.structural_hash() != h0);

  size_t mark2 = fx.trail.size(), n2 = fx.eqs.size();
  uint64_t h1 = fx.eqs.structural_hash();
  fx.assign(ma, "c");
  CHECK(fx.on_assign(ma));
  fx.undo_to(mark2, n2);
  fx.cells[ma].assigned = false;
  CHECK(fx.eqs.structural_hash() == h1);

  fx.undo_to(mark, n);
  CHECK(fx.eqs.structural_hash() == h0);
  CHECK(fx.eqs.open_count() == 0);
}
