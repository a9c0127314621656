#include <doctest.h>

#include "canon/check.hpp"
#include "helpers.hpp"

using namespace canon;
using canon::test::Scope;

namespace {

const char* kNat = R"(
inductive Nat : Sort where
  | zero : Nat
  | succ : (n : Nat) -> Nat
goal : Nat
)";

const char* kExplosion = R"(
inductive False : Sort where
structure And (a b : Sort) where
  | left : a
  | right : b
def Not (p : Sort) : Sort := p -> False
goal (A B : Sort) : (A /\ Not A) -> B
)";

}  // namespace

TEST_CASE("arity counts the outer telescope") {
  Scope s(kNat);
  const Environment& env = s.env();
  CHECK(arity_of(*env.at(s.global("Nat.succ")).type) == 1);
  CHECK(arity_of(*env.at(s.global("Nat")).type) == 0);
  CHECK(arity_of(*s.type("Nat")) == 0);
  // motive, zero case, successor case, major premise
  CHECK(arity_of(*env.at(s.global("Nat.rec")).type) == 4);
}

TEST_CASE("the environment has exactly one Sort : Sort") {
  Environment env;
  size_t sorts = 0;
  for (auto& g : env.globals) sorts += g.name == "Sort";
  CHECK(sorts == 1);
  const LetBinding& sort = env.at(env.sort);
  CHECK(sort.def == nullptr);
  REQUIRE(sort.type != nullptr);
  CHECK(sort.type->head == SymbolRef::global(env.sort));
}

TEST_CASE("check_wellformed on small terms") {
  Scope s("axiom A : Sort\naxiom B : Sort\ngoal : A");
  const Typ* idt = s.type("(a : A) -> A");
  CHECK(check_wellformed(s.env(), s.term("fun a => a", "(a : A) -> A"), idt).ok());

  SUBCASE("a wrong codomain is a spine mismatch") {
    const Term* t = s.term("fun a => a", "(a : A) -> A");
    CheckReport r = check_wellformed(s.env(), t, s.type("(a : A) -> B"));
    CHECK(r.error == CheckError::SpineMismatch);
  }
}

TEST_CASE("an under-applied head is an arity mismatch") {
  Scope s(kNat);
  Environment& env = const_cast<Environment&>(s.env());
  Term zero;
  zero.head = SymbolRef::global(s.global("Nat.zero"));
  const Term* t = env.arena->make(zero);
  CheckReport r = check_wellformed(env, t, s.type("Nat -> Nat"));
  CHECK(r.error == CheckError::ArityMismatch);
}

TEST_CASE("the explosion proof is well formed") {
  Scope s(kExplosion);
  const char* ty = "(A B : Sort) -> (A /\\ Not A) -> B";
  const Term* t = s.term(
      "fun A B a => False.rec (fun t => B) (And.right A (Not A) a (And.left A (Not A) a))", ty);
  CheckReport r = check_wellformed(s.env(), t, s.type(ty));
  CHECK_MESSAGE(r.ok(), r.message);
  CHECK(canon::test::skeleton(s.env(), t).rfind("False.rec", 0) == 0);
}

TEST_CASE("check_environment accepts the elaborated corpus") {
  for (const char* f : {"eq_trans.canon", "vec_append.canon", "decide_eq_true.canon",
                        "explosion.canon", "zero_add.canon"}) {
    Problem p = canon::test::load_file(canon::test::corpus(f));
    CheckReport r = check_environment(p.env);
    CHECK_MESSAGE(r.ok(), f, ": ", r.message);
  }
}

TEST_CASE("printing re-parses to the same term") {
  Scope s("axiom A : Sort\naxiom f : A -> A -> A\ngoal : A");
  const char* ty = "(x : A) -> (x : A) -> A";
  const Term* t = s.term("fun x y => f y x", ty);
  std::string text = print_term(s.env(), t);
  const Term* back = s.term(text, ty);
  CHECK(same_term(t, back));
  CHECK(print_term(s.env(), back) == text);
}

TEST_CASE("proof length counts symbol occurrences") {
  Scope s("axiom A : Sort\naxiom f : A -> A -> A\ngoal : A");
  const Term* t = s.term("fun x y => f y (f x x)", "A -> A -> A");
  CHECK(proof_length(t) == 5);
  CHECK(proof_length(s.term("fun x y => x", "A -> A -> A")) == 1);
}

TEST_CASE("node count is the size of the unfolded tree") {
  Environment env;
  Term leaf;
  leaf.head = SymbolRef::global(env.sort);
  const Term* l = env.arena->make(leaf);
  Term pair;
  pair.head = SymbolRef::global(env.sort);
  pair.args = {l, l};
  CHECK(node_count(env.arena->make(pair)) == 3);
}
