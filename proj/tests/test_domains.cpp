#include <doctest.h>

#include "mst/domain.hpp"
#include "mst/pretty.hpp"

using namespace mst;

TEST_CASE("counter registration passes the preorder laws") {
  DomainRegistry reg;
  CHECK(!reg.add(make_counter_domain(8)).has_value());
  CHECK(reg.find("counter") != nullptr);
}

TEST_CASE("a strict order fails reflexivity at registration") {
  StateDomain bad = make_counter_domain(4);
  bad.name = "strict";
  bad.prims.clear();
  bad.leq = [](std::size_t a, std::size_t b) { return a < b; };
  DomainRegistry reg;
  auto err = reg.add(bad);
  REQUIRE(err.has_value());
  CHECK(err->find("reflexivity") != std::string::npos);
  CHECK(err->find("c0") != std::string::npos);
}

TEST_CASE("heap domain with two cells has an exhaustive 9-state sample") {
  StateDomain heap = make_heap_domain(2);
  CHECK(heap.constants.size() == 9);
  CHECK(heap.exhaustive);
  CHECK(!registration_check(heap).has_value());
  // once Used, stays Used
  auto uu = heap.index_of("h_uu");
  auto au = heap.index_of("h_au");
  auto ub = heap.index_of("h_ub");
  REQUIRE(uu);
  REQUIRE(au);
  REQUIRE(ub);
  CHECK(heap.leq(*uu, *au));
  CHECK(!heap.leq(*au, *uu));
  CHECK(heap.leq(*uu, *ub));
}

TEST_CASE("preorder laws hold over every registered sample") {
  for (const StateDomain& dom :
       {make_counter_domain(8), make_heap_domain(2)}) {
    const std::size_t n = dom.constants.size();
    for (std::size_t a = 0; a < n; ++a) {
      CHECK(dom.leq(a, a));
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          if (dom.leq(a, b) && dom.leq(b, c)) CHECK(dom.leq(a, c));
    }
  }
}

TEST_CASE("delta applies primitives and clamps at the top") {
  StateDomain dom = make_counter_domain(8);
  CHECK(alpha_eq(delta(dom, "succ", v_const("c3")), v_const("c4")));
  CHECK(alpha_eq(delta(dom, "succ", v_const("c8")), v_const("c8")));
  CHECK_THROWS_AS(delta(dom, "nosuch", v_const("c0")),
                  std::invalid_argument);
}

TEST_CASE("normalization reduces primitive applications recursively") {
  StateDomain dom = make_counter_domain(8);
  ValuePtr v = v_prim("succ", v_prim("succ", v_const("c1")));
  CHECK(alpha_eq(normalize_value(dom, v), v_const("c3")));
  ValuePtr pair = v_pair(v_prim("succ", v_const("c0")), v_unit());
  CHECK(alpha_eq(normalize_value(dom, pair),
                 v_pair(v_const("c1"), v_unit())));
}

TEST_CASE("closed formula evaluation over the counter") {
  StateDomain dom = make_counter_domain(8);
  auto ev = [&](const FormulaPtr& f) {
    auto out = eval_closed_formula(dom, f);
    REQUIRE(std::holds_alternative<EvalResult>(out));
    return std::get<EvalResult>(out);
  };
  CHECK(ev(f_rel(v_const("c2"), v_const("c5"))).value);
  CHECK(!ev(f_rel(v_const("c5"), v_const("c2"))).value);
  // reflexivity of rel over the sample: true, but only sampled
  auto refl = ev(f_forall("x", type_state(), f_rel(v_var("x"), v_var("x"))));
  CHECK(refl.value);
  CHECK(!refl.exact);  // the counter sample models unbounded nat
  // existential witnesses are exact
  auto ex = ev(f_exists("x", type_state(),
                        f_eq(type_state(), v_var("x"), v_const("c3"))));
  CHECK(ex.value);
  CHECK(ex.exact);
}

TEST_CASE("heap evaluation is exact on the exhaustive sample") {
  StateDomain dom = make_heap_domain(2);
  auto out = eval_closed_formula(
      dom, f_forall("x", type_state(), f_rel(v_var("x"), v_var("x"))));
  REQUIRE(std::holds_alternative<EvalResult>(out));
  CHECK(std::get<EvalResult>(out).value);
  CHECK(std::get<EvalResult>(out).exact);
}

TEST_CASE("primitive axioms validate at registration") {
  StateDomain dom = make_counter_domain(8);
  // succ's axiom: forall s. rel s (succ s)
  auto out = eval_closed_formula(dom, dom.prims[0].axiom);
  REQUIRE(std::holds_alternative<EvalResult>(out));
  CHECK(std::get<EvalResult>(out).value);

  // breaking the primitive breaks registration
  StateDomain bad = make_counter_domain(4);
  bad.name = "bad";
  bad.prims[0].apply = [](std::size_t i) { return i > 0 ? i - 1 : 0; };
  auto err = registration_check(bad);
  REQUIRE(err.has_value());
  CHECK(err->find("axiom") != std::string::npos);
}

TEST_CASE("witnessed is unevaluable without a trace hook") {
  StateDomain dom = make_counter_domain(4);
  auto out = eval_closed_formula(
      dom, f_witnessed(Predicate{"s", f_rel(v_const("c0"), v_var("s"))}));
  CHECK(std::holds_alternative<EvalError>(out));
}
