#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gen.hpp"
#include "mst/cli.hpp"
#include "mst/parser.hpp"
#include "mst/pretty.hpp"

using namespace mst;

namespace {

std::string read_file(const std::string& name) {
  std::ifstream in(std::string(MST_CORPUS_DIR) + "/" + name,
                   std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const StateDomain& counter() {
  static StateDomain dom = make_counter_domain();
  return dom;
}

}  // namespace

TEST_CASE("single actions parse") {
  CompPtr e = parse_comp("get⟨false⟩", counter());
  const auto* g = std::get_if<Get>(&e->node);
  REQUIRE(g != nullptr);
  CHECK(is_false(g->index));
  // ASCII angle brackets are interchangeable
  CHECK(alpha_eq(e, parse_comp("get<false>", counter())));
}

TEST_CASE("the motivating counter fragment parses") {
  CompPtr e = parse_comp(
      "bind x = get<false> in "
      "witness<false> (s. rel x s); "
      "put<false> (succ x); "
      "recall<false> (s. rel x s); "
      "return<false> ()",
      counter());
  const auto* b = std::get_if<Bind>(&e->node);
  REQUIRE(b != nullptr);
  CHECK(b->binder == "x");
  CHECK(std::holds_alternative<Get>(b->first->node));
}

TEST_CASE("malformed input reports a position") {
  try {
    parse_comp("witness<b> (s. rel s s", counter());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.col > 1);
  }
}

TEST_CASE("formulas parse") {
  FormulaPtr w = parse_formula("witnessed (s. rel c0 s)", counter());
  CHECK(std::holds_alternative<WitnessedF>(w->node));
  FormulaPtr fa = parse_formula("forall x:state. rel x x", counter());
  CHECK(std::holds_alternative<ForallF>(fa->node));
  // precedence: implication binds loosest, conjunction tightest
  FormulaPtr p = parse_formula("rel c0 c1 /\\ True ==> False \\/ True",
                               counter());
  const auto* imp = std::get_if<ImpliesF>(&p->node);
  REQUIRE(imp != nullptr);
  CHECK(std::holds_alternative<AndF>(imp->left->node));
  CHECK(std::holds_alternative<OrF>(imp->right->node));
}

TEST_CASE("equality defaults to state and accepts annotations") {
  FormulaPtr e1 = parse_formula("c0 == c1", counter());
  const auto* a1 = std::get_if<Atom>(&e1->node);
  REQUIRE(a1 != nullptr);
  CHECK(alpha_eq(a1->head.eq_type, type_state()));
  FormulaPtr e2 = parse_formula("() ==[unit] ()", counter());
  const auto* a2 = std::get_if<Atom>(&e2->node);
  REQUIRE(a2 != nullptr);
  CHECK(alpha_eq(a2->head.eq_type, type_unit()));
}

TEST_CASE("sequent files parse") {
  DomainRegistry reg = cli::corpus_registry();
  ParsedSequent s = parse_sequent("rel c0 c1 |- rel c0 c1", reg);
  CHECK(s.domain_name == "counter");
  CHECK(s.sequent.ctx.bindings.empty());
  CHECK(s.sequent.left.size() == 1);
  CHECK(s.sequent.right.size() == 1);
  CHECK(alpha_eq(s.sequent.left.items()[0], s.sequent.right.items()[0]));

  ParsedSequent t =
      parse_sequent("x:state | x == c1, rel c0 x |- rel c0 c1", reg);
  CHECK(t.sequent.ctx.bindings.size() == 1);
  CHECK(t.sequent.left.size() == 2);

  ParsedSequent u = parse_sequent("|- False", reg);
  CHECK(u.sequent.left.empty());
}

TEST_CASE("pretty-printing is a parsing fixpoint on atoms") {
  CHECK(pretty(parse_formula("rel c0 c1", counter())) == "rel c0 c1");
  CompPtr w = c_witness(v_false(),
                        Predicate{"s", f_rel(v_const("c0"), v_var("s"))});
  CHECK(pretty(w) == "witness⟨false⟩ (s. rel c0 s)");
}

TEST_CASE("programs parse with declarations substituted") {
  DomainRegistry reg = cli::corpus_registry();
  SourceProgram p = parse_program(read_file("counter.mst"), reg);
  CHECK(p.domain_name == "counter");
  CHECK(p.decls.empty());
  CHECK(p.expect.has_value());
  CHECK(std::holds_alternative<MstTy>(p.ascription->node));
  CHECK(free_vars(p.main).empty());

  SourceProgram q = parse_program(read_file("noninterference.mst"), reg);
  CHECK(q.decls.size() == 1);
  CHECK(q.decls[0].first == "incr2");
  CHECK(free_vars(q.main).empty());  // incr2 resolved away
}

TEST_CASE("duplicate and misplaced declarations are rejected") {
  DomainRegistry reg = cli::corpus_registry();
  CHECK_THROWS_AS(
      parse_program("domain counter def a = () def a = () "
                    "main : Pure unit (True) (y. True) = return ()",
                    reg),
      ParseError);
  CHECK_THROWS_AS(parse_program("domain nosuch main : Pure unit (True) "
                                "(y. True) = return ()",
                                reg),
                  ParseError);
}

TEST_CASE("round-trip: corpus files") {
  DomainRegistry reg = cli::corpus_registry();
  for (const char* name :
       {"counter.mst", "noninterference.mst", "reflect_succ.mst",
        "coerce_demo.mst", "broken_reify.mst", "heap.mst",
        "preorder_escape.mst"}) {
    CAPTURE(name);
    SourceProgram p = parse_program(read_file(name), reg);
    const StateDomain* dom = reg.find(p.domain_name);
    REQUIRE(dom != nullptr);
    CompPtr again = parse_comp(pretty(p.main), *dom);
    CHECK(alpha_eq(again, p.main));
    CompTypePtr asc = parse_comp_type(pretty(p.ascription), *dom);
    CHECK(alpha_eq(asc, p.ascription));
  }
  for (const char* name :
       {"weaken.seq", "relrefl.seq", "transport.seq", "false.seq"}) {
    CAPTURE(name);
    ParsedSequent s = parse_sequent(read_file(name), reg);
    ParsedSequent t = parse_sequent(logic::pretty(s.sequent), reg);
    CHECK(logic::sequent_eq(s.sequent, t.sequent));
  }
}

TEST_CASE("round-trip: generated formulas, values, and computations") {
  gen::Gen g(23);
  const StateDomain& dom = counter();
  for (int i = 0; i < 120; ++i) {
    FormulaPtr f = g.formula({}, dom, 4);
    CAPTURE(pretty(f));
    FormulaPtr f2 = parse_formula(pretty(f), dom);
    CHECK(alpha_eq(f, f2));
  }
  for (int i = 0; i < 60; ++i) {
    TypePtr t = g.first_order_type(3);
    ValuePtr v = g.value_of(t, dom);
    CAPTURE(pretty(v));
    CHECK(alpha_eq(v, parse_value(pretty(v), dom)));
    CHECK(alpha_eq(t, parse_type(pretty(t), dom)));
  }
  for (int i = 0; i < 60; ++i) {
    CompPtr e = g.rmst_term({}, dom, 4);
    CAPTURE(pretty(e));
    CHECK(alpha_eq(e, parse_comp(pretty(e), dom)));
  }
}
