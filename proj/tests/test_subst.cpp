#include <doctest.h>

#include "canon/oracle.hpp"
#include "canon/subst.hpp"
#include "helpers.hpp"

using namespace canon;
using canon::test::Scope;

namespace {

const char* kNat = R"(
inductive Nat : Sort where
  | zero : Nat
  | succ : (n : Nat) -> Nat
inductive Eq (A : Sort) (a : A) : (b : A) -> Sort where
  | refl : Eq A a a
axiom z : Nat
axiom g : Nat -> Nat -> Nat
axiom A : Sort
axiom f : A -> A
axiom h : A -> A
axiom a : A
goal : Nat
)";

Entry global(const Scope& s, const char* name) { return Entry::global(s.global(name)); }

}  // namespace

TEST_CASE("beta extends the function's substitution") {
  Scope s(kNat);
  const Typ* a_to_a = s.type("A -> A");
  const Typ* a_ty = s.type("A");
  // ?L := fun x => #1 ?X, so #1 is f from the closure's substitution.
  std::vector<MetaCell> cells(2);
  cells[0] = {a_to_a, true, SymbolRef::local(1), 1, 1};
  cells[1] = {a_ty, false, {}, 0, 0};

  LevelSupply levels;
  Entry lf = levels.fresh(a_to_a);
  Entry la = levels.fresh(a_ty);
  Subst sf = Frame::push(nullptr, {lf});
  Subst outer = Frame::push(nullptr, {la, Entry::meta_closure(0, sf)});

  // #0 #1 under [?L[f], a]
  Term app;
  app.head = SymbolRef::local(0);
  Term arg;
  arg.head = SymbolRef::local(1);
  TermArena arena;
  app.args = {arena.make(arg)};
  const Term* node = arena.make(app);

  ReduceContext cx{&s.env(), cells, kDefaultFuel};
  Whnf w = whnf(cx, Entry::closure(node, outer));
  REQUIRE(w.kind == Whnf::Kind::Head);
  CHECK(w.head.kind == EntryKind::Level);
  CHECK(w.head.id == lf.id);
  REQUIRE(w.spine.size() == 1);
  CHECK(w.spine[0].meta == 1);
  // The new frame holds the argument and shares the function's substitution.
  REQUIRE(w.spine[0].env);
  CHECK(w.spine[0].env->parent == sf);
  CHECK(subst_size(w.spine[0].env) == 2);
  CHECK(lookup(w.spine[0].env, 0).kind == EntryKind::Closure);
  CHECK(lookup(w.spine[0].env, 1).id == lf.id);
}

TEST_CASE("a bare metavariable is stuck on itself") {
  Scope s(kNat);
  std::vector<MetaCell> cells(1);
  cells[0].type_node = s.type("Nat");
  ReduceContext cx{&s.env(), cells, kDefaultFuel};
  Whnf w = whnf(cx, Entry::meta_closure(0, nullptr));
  CHECK(w.kind == Whnf::Kind::StuckMeta);
  CHECK(w.blocker == 0);
}

TEST_CASE("iota steps through the successor rule") {
  Scope s(kNat);
  const char* redex = "Nat.rec (fun t => Nat) z (fun n ih => g n ih) (Nat.succ Nat.zero)";
  const Term* t = s.term(redex, "Nat");
  ReduceContext cx{&s.env(), {}, kDefaultFuel};
  Whnf w = whnf(cx, Entry::closure(t, nullptr));
  REQUIRE(w.kind == Whnf::Kind::Head);
  CHECK(w.head.kind == EntryKind::Global);
  CHECK(w.head.id == s.global("g"));
  CHECK(w.spine.size() == 2);

  LevelSupply levels;
  const Term* reduct = s.term("g Nat.zero z", "Nat");
  CHECK(convertible(cx, App{Entry::closure(t, nullptr), {}}, App{Entry::closure(reduct, nullptr), {}},
                    levels));

  // The reference checker reaches the same normal form independently.
  const char* stmt = "Eq Nat (Nat.rec (fun t => Nat) z (fun n ih => g n ih) (Nat.succ Nat.zero)) (g Nat.zero z)";
  const Typ* goal = s.type(stmt);
  const Term* proof = s.term("Eq.refl Nat (g Nat.zero z)", stmt);
  CHECK(oracle::check(s.env(), proof, goal).accepted);
  const Typ* wrong = s.type("Eq Nat (Nat.rec (fun t => Nat) z (fun n ih => g n ih) (Nat.succ Nat.zero)) z");
  CHECK_FALSE(oracle::check(s.env(), s.term("Eq.refl Nat z", "Eq Nat z z"), wrong).accepted);
}

TEST_CASE("head comparison") {
  Scope s(kNat);
  ReduceContext cx{&s.env(), {}, kDefaultFuel};
  Whnf f1 = whnf(cx, global(s, "f"));
  Whnf f2 = whnf(cx, global(s, "f"));
  Whnf a = whnf(cx, global(s, "a"));
  CHECK(heads_equal(f1, f2) == HeadCmp::Equal);
  CHECK(heads_equal(f1, a) == HeadCmp::Unequal);

  SUBCASE("a recursor stuck on a meta") {
    std::vector<MetaCell> cells(1);
    cells[0].type_node = s.type("Nat");
    ReduceContext mcx{&s.env(), cells, kDefaultFuel};
    const Term* fn = s.term("fun x => Nat.rec (fun t => Nat) z (fun n ih => g n ih) x", "Nat -> Nat");
    Whnf stuck = whnf(mcx, App{Entry::closure(fn, nullptr), {Entry::meta_closure(0, nullptr)}});
    REQUIRE(stuck.kind == Whnf::Kind::StuckRecursor);
    CHECK(stuck.blocker == 0);
    Whnf zh = whnf(mcx, global(s, "z"));
    CHECK(heads_equal(stuck, zh, true) == HeadCmp::Unknown);
    CHECK(heads_equal(stuck, zh, false) == HeadCmp::Unequal);
  }

  SUBCASE("a side stuck on a meta is not comparable") {
    std::vector<MetaCell> cells(1);
    cells[0].type_node = s.type("A");
    ReduceContext mcx{&s.env(), cells, kDefaultFuel};
    Whnf m = whnf(mcx, Entry::meta_closure(0, nullptr));
    CHECK_THROWS_AS(heads_equal(m, a), StuckInput);
  }
}

TEST_CASE("entering binders") {
  Scope s(kNat);
  ReduceContext cx{&s.env(), {}, kDefaultFuel};
  LevelSupply levels;
  auto lam = [&](const char* text) { return App{Entry::closure(s.term(text, "A -> A"), nullptr), {}}; };

  SUBCASE("alpha-equivalent bodies meet at the same level") {
    auto [l, r] = enter_binders({}, lam("fun x => x"), lam("fun y => y"), 1, levels);
    Whnf wl = whnf(cx, l), wr = whnf(cx, r);
    CHECK(heads_equal(wl, wr) == HeadCmp::Equal);
    CHECK(wl.head.kind == EntryKind::Level);
  }
  SUBCASE("different heads under the binder") {
    auto [l, r] = enter_binders({}, lam("fun x => f x"), lam("fun x => h x"), 1, levels);
    CHECK(heads_equal(whnf(cx, l), whnf(cx, r)) == HeadCmp::Unequal);
  }
  SUBCASE("a meta body suspends") {
    std::vector<MetaCell> cells(1);
    cells[0].type_node = s.type("A -> A");
    ReduceContext mcx{&s.env(), cells, kDefaultFuel};
    auto [l, r] = enter_binders(cells, App{Entry::meta_closure(0, nullptr), {}}, lam("fun x => a"), 1,
                                levels);
    Whnf wl = whnf(mcx, l);
    CHECK(wl.kind == Whnf::Kind::StuckMeta);
    CHECK(wl.blocker == 0);
    CHECK(whnf(mcx, r).head.id == s.global("a"));
  }
  SUBCASE("binder counts must agree") {
    CHECK_THROWS_AS(enter_binders({}, lam("fun x => x"), App{global(s, "a"), {}}, 2, levels),
                    BinderCountMismatch);
  }
}

TEST_CASE("divergent unfolding runs out of fuel") {
  Scope s("axiom A : Sort\ngoal : A");
  Environment env = s.env();
  // loop := loop
  LetBinding b;
  b.name = "loop";
  b.type = env.sort_type();
  uint32_t id = env.add(b);
  Term body;
  body.head = SymbolRef::global(id);
  env.at(id).def = env.arena->make(body);
  ReduceContext cx{&env, {}, 1000};
  CHECK_THROWS_AS(whnf(cx, Entry::global(id)), FuelExhausted);
}
