#include <doctest.h>

#include "gen.hpp"
#include "mst/ast.hpp"
#include "mst/domain.hpp"
#include "mst/pretty.hpp"

using namespace mst;

TEST_CASE("substitution replaces free occurrences") {
  // rel s x with x := c0
  FormulaPtr f = f_rel(v_var("s"), v_var("x"));
  FormulaPtr g = subst(f, "x", v_const("c0"));
  CHECK(alpha_eq(g, f_rel(v_var("s"), v_const("c0"))));
}

TEST_CASE("substitution stops at a shadowing binder") {
  FormulaPtr body = f_rel(v_var("s"), v_var("x"));
  FormulaPtr all = f_forall("s", type_state(), body);
  FormulaPtr g = subst(all, "s", v_const("c0"));
  CHECK(alpha_eq(g, all));
}

TEST_CASE("T-Put style postcondition instantiation") {
  // post of put: s' == sigma, with sigma := c1 and then s' := c1
  FormulaPtr post = f_eq(type_state(), v_var("s'"), v_var("sigma"));
  FormulaPtr step1 = subst(post, "sigma", v_const("c1"));
  FormulaPtr step2 = subst(step1, "s'", v_const("c1"));
  CHECK(alpha_eq(step2, f_eq(type_state(), v_const("c1"), v_const("c1"))));
}

TEST_CASE("substitution avoids capture by renaming binders") {
  // (forall y:state. rel y x)[x := y] must not capture the free y.
  FormulaPtr f =
      f_forall("y", type_state(), f_rel(v_var("y"), v_var("x")));
  FormulaPtr g = subst(f, "x", v_var("y"));
  const auto* q = std::get_if<ForallF>(&g->node);
  REQUIRE(q != nullptr);
  CHECK(q->binder != "y");
  std::set<Name> fv = free_vars(g);
  CHECK(fv.count("y") == 1);
  // and the result is alpha-equivalent to the intended formula
  CHECK(alpha_eq(g, f_forall("z", type_state(),
                             f_rel(v_var("z"), v_var("y")))));
}

TEST_CASE("alpha equivalence of predicates") {
  Predicate p{"s", f_rel(v_const("c0"), v_var("s"))};
  Predicate q{"t", f_rel(v_const("c0"), v_var("t"))};
  Predicate r{"s", f_rel(v_var("s"), v_const("c0"))};
  CHECK(alpha_eq(p, q));
  CHECK(!alpha_eq(p, r));
}

TEST_CASE("alpha equivalence of lambdas") {
  ValuePtr a =
      v_lambda("x", type_unit(), c_return(v_false(), v_var("x")));
  ValuePtr b =
      v_lambda("y", type_unit(), c_return(v_false(), v_var("y")));
  CHECK(alpha_eq(a, b));
  ValuePtr c =
      v_lambda("y", type_unit(), c_return(v_false(), v_unit()));
  CHECK(!alpha_eq(a, c));
}

TEST_CASE("bool is structurally unit + unit") {
  CHECK(alpha_eq(type_bool(), type_sum(type_unit(), type_unit())));
  CHECK(is_true(v_inl(v_unit(), type_unit())));
  CHECK(is_false(v_inr(v_unit(), type_unit())));
  CHECK(!is_true(v_false()));
}

TEST_CASE("free variables exclude binders") {
  FormulaPtr w = f_witnessed(Predicate{"s", f_rel(v_var("s"), v_var("x"))});
  std::set<Name> fv = free_vars(w);
  CHECK(fv == std::set<Name>{"x"});
  CHECK(free_vars(v_const("c0")).empty());
}

TEST_CASE("free variables of a dependent arrow codomain") {
  // (x:unit) -> MST<false> unit (s. True)(s y s'. x == ())
  CompTypePtr c = comp_mst(
      v_false(), type_unit(), "s", f_top(), "s", "y", "s'",
      f_eq(type_unit(), v_var("x"), v_unit()));
  CHECK(free_vars(c) == std::set<Name>{"x"});
  TypePtr arrow = type_arrow("x", type_unit(), c);
  CHECK(free_vars(arrow).empty());
}

TEST_CASE("substitution lemma: substituted variable disappears") {
  gen::Gen g(7);
  StateDomain dom = make_counter_domain(8);
  for (int i = 0; i < 200; ++i) {
    FormulaPtr f = g.formula({"x", "y"}, dom, 3);
    ValuePtr repl = g.state_term({"y"}, dom, 1);
    FormulaPtr sub = subst(f, "x", repl);
    std::set<Name> fv = free_vars(sub);
    std::set<Name> repl_fv = free_vars(repl);
    if (!repl_fv.count("x")) CHECK(fv.count("x") == 0);
  }
}

TEST_CASE("alpha_eq is an equivalence relation on generated formulas") {
  gen::Gen g(11);
  StateDomain dom = make_counter_domain(8);
  std::vector<FormulaPtr> fs;
  for (int i = 0; i < 40; ++i) fs.push_back(g.formula({"x"}, dom, 3));
  for (const auto& a : fs) CHECK(alpha_eq(a, a));
  for (size_t i = 0; i < fs.size(); ++i)
    for (size_t j = 0; j < i; ++j) {
      bool ij = alpha_eq(fs[i], fs[j]);
      bool ji = alpha_eq(fs[j], fs[i]);
      CHECK(ij == ji);
    }
  // transitivity over alpha-variants
  for (const auto& a : fs) {
    if (const auto* q = std::get_if<ForallF>(&a->node)) {
      std::set<Name> avoid = free_vars(a);
      Name n1 = fresh_name("r1", avoid);
      Name n2 = fresh_name("r2", avoid);
      FormulaPtr v1 = f_forall(n1, q->type,
                               subst(q->body, q->binder, v_var(n1)));
      FormulaPtr v2 = f_forall(n2, q->type,
                               subst(q->body, q->binder, v_var(n2)));
      CHECK(alpha_eq(a, v1));
      CHECK(alpha_eq(v1, v2));
      CHECK(alpha_eq(a, v2));
    }
  }
}

TEST_CASE("positions do not affect alpha equivalence") {
  CompPtr a = c_get(v_false(), Pos{3, 7});
  CompPtr b = c_get(v_false(), Pos{9, 1});
  CHECK(alpha_eq(a, b));
}
