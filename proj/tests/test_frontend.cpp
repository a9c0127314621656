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
)";

const char* kMisc = R"(
inductive Nat : Sort where
  | zero : Nat
  | succ : (n : Nat) -> Nat
inductive False : Sort where
def Not (p : Sort) : Sort := p -> False
def id (A : Sort) (a : A) : A := a
axiom app : (Nat -> Nat) -> Nat
axiom A : Sort
axiom B : Sort
axiom f : A -> B
axiom a : A
axiom y : Nat
def zero' : Nat := Nat.zero
def one : Nat := Nat.succ zero'
goal : Not A
)";

surface::ErrorKind error_of(const std::string& text) {
  try {
    load_problem(text);
  } catch (const surface::FrontendError& e) {
    return e.kind;
  }
  FAIL("no error for: " << text);
  return surface::ErrorKind::Unsupported;
}

}  // namespace

TEST_CASE("parsing declarations") {
  auto nat = surface::parse(std::string(kNat) + "goal : Nat");
  REQUIRE(nat.decls.size() == 2);
  CHECK(nat.decls[0].kind == surface::Decl::Kind::Inductive);
  CHECK(nat.decls[0].ctors.size() == 2);

  auto id = surface::parse("def id : (A : Sort) -> A -> A := fun A a => a\ngoal : Sort");
  CHECK(id.decls[0].kind == surface::Decl::Kind::Def);
  CHECK(id.decls[0].body != nullptr);

  auto g = surface::parse(R"(
inductive False : Sort where
structure And (a b : Sort) where
  | left : a
  | right : b
def Not (p : Sort) : Sort := p -> False
axiom A : Sort
axiom B : Sort
goal : (A /\ Not A) -> B
)");
  CHECK(g.decls.back().kind == surface::Decl::Kind::Goal);
}

TEST_CASE("printing a file re-parses identically") {
  std::string text = test::read(test::corpus("vec_append.canon"));
  std::string once = surface::print(surface::parse(text));
  CHECK(surface::print(surface::parse(once)) == once);
}

TEST_CASE("an inductive elaborates to its type, constructors and recursor") {
  Problem p = load_problem(std::string(kNat) + "goal : Nat");
  for (const char* n : {"Nat", "Nat.zero", "Nat.succ", "Nat.rec"}) CHECK(p.env.find(n));
  const LetBinding& rec = p.env.at(*p.env.find("Nat.rec"));
  REQUIRE(rec.is_recursor());
  const auto& info = std::get<RecursorInfo>(*rec.reduction);
  CHECK(info.rules.size() == 2);
  CHECK(info.num_pre == 3);
  CHECK(info.major_index == 3);
  CHECK(check_environment(p.env).ok());
}

TEST_CASE("an indexed family's motive abstracts the index") {
  Problem p = test::load_file(test::corpus("vec_append.canon"));
  const LetBinding& rec = p.env.at(*p.env.find("Vec.rec"));
  REQUIRE(rec.is_recursor());
  const auto& info = std::get<RecursorInfo>(*rec.reduction);
  CHECK(info.num_params == 1);
  // A, motive, vnil case, vcons case, then the index and the major premise
  CHECK(info.num_pre == 4);
  CHECK(info.major_index == 5);
  const Typ* motive = rec.type->params[1].type;
  CHECK(arity_of(*motive) == 2);
}

TEST_CASE("a structure gets projections") {
  Problem p = test::load_file(test::corpus("explosion.canon"));
  for (const char* n : {"And.left", "And.right"}) {
    auto id = p.env.find(n);
    REQUIRE(id);
    CHECK(p.env.at(*id).is_projection());
  }
  CHECK(std::get<ProjectionInfo>(*p.env.at(*p.env.find("And.right")).reduction).field == 1);
}

TEST_CASE("term translation keeps static arities") {
  Scope s(kMisc);
  auto tr = [&](const char* e, const char* t) { return print_term(s.env(), s.term(e, t)); };
  CHECK(tr("id (A -> B) f a", "B") ==
        "Pi.f A (fun x => B) (id (Pi A (fun x => B)) (Pi.mk A (fun x => B) (fun x => f x))) a");
  CHECK(tr("(fun x => x) y", "Nat") == "let x := y in x");
  CHECK(tr("app Nat.succ", "Nat") == "app (fun x => Nat.succ x)");
}

TEST_CASE("environment policies") {
  Elaborator el;
  for (auto& d : surface::parse(kMisc).decls) el.add(d);
  const Term* three = el.translate_term(surface::parse_expr("3"), surface::parse_expr("Nat"));
  const Term* big = el.translate_term(surface::parse_expr("1000"), surface::parse_expr("Nat"));
  Problem p = el.finish();

  SUBCASE("Not unfolds") { CHECK(print_type(p.env, p.goal) == "(x : A) -> False"); }
  SUBCASE("small literals are definitions, large ones opaque") {
    const LetBinding& g3 = p.env.at(three->head.index);
    REQUIRE(g3.def);
    CHECK(print_term(p.env, g3.def) == "Nat.succ (Nat.succ (Nat.succ Nat.zero))");
    const LetBinding& g1000 = p.env.at(big->head.index);
    CHECK(g1000.def == nullptr);
    CHECK(g1000.type != nullptr);
  }
  SUBCASE("definitions used only by definitions are untyped") {
    const LetBinding& z = p.env.at(*p.env.find("zero'"));
    CHECK(z.def != nullptr);
    CHECK(z.type == nullptr);
    CHECK(p.env.at(*p.env.find("A")).type != nullptr);
  }
}

TEST_CASE("pragmas become search overrides") {
  Problem p = load_problem("#count 5\n#timeout 2\n#synth\ngoal : Sort");
  CHECK(p.overrides.count == 5u);
  CHECK(p.overrides.timeout == 2.0);
  CHECK(p.overrides.synthesis == true);
  CHECK_FALSE(p.overrides.prefilter);
}

TEST_CASE("frontend errors") {
  using K = surface::ErrorKind;
  CHECK(error_of("axiom A : Sort\naxiom A : Sort\ngoal : A") == K::DuplicateName);
  CHECK(error_of("axiom A : Sort") == K::MissingGoal);
  CHECK(error_of("goal : Missing") == K::UnknownSymbol);
  CHECK(error_of("goal (A : Sort : A") == K::SyntaxError);
  CHECK(error_of("inductive Bad : Sort where\n  | mk : (Bad -> Bad) -> Bad\ngoal : Bad") ==
        K::NonPositiveOccurrence);
  CHECK(error_of("def a : Sort := a\ngoal : a") == K::CyclicDefinition);
}

TEST_CASE("every corpus file elaborates to a well-formed environment") {
  for (const char* dir : {"", "micro/"}) {
    for (auto& e : std::filesystem::directory_iterator(test::corpus(dir))) {
      if (e.path().extension() != ".canon") continue;
      Problem p = test::load_file(e.path().string());
      CHECK_MESSAGE(check_environment(p.env).ok(), e.path().string());
      CHECK(p.goal != nullptr);
    }
  }
}
