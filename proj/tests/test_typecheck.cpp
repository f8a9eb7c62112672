#include <doctest.h>

#include <fstream>
#include <sstream>

#include "mst/cli.hpp"
#include "mst/logic.hpp"
#include "mst/parser.hpp"
#include "mst/pretty.hpp"
#include "mst/typecheck.hpp"

using namespace mst;
using namespace mst::tc;

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

Checker make_checker(const StateDomain& dom, std::size_t depth = 10) {
  logic::ProverOptions popts;
  popts.max_depth = depth;
  return Checker(dom, popts);
}

CompPtr pc(const char* text) { return parse_comp(text, counter()); }
FormulaPtr pform(const char* text) { return parse_formula(text, counter()); }

}  // namespace

TEST_CASE("well-formedness of computation types") {
  Checker ch = make_checker(counter());
  CompTypePtr ok = parse_comp_type(
      "MST<false> unit (s. True) (s x s'. s == s')", counter());
  CHECK(!ch.wf_comp_type({}, ok).has_value());

  CHECK(!ch.wf_formula({}, pform("rel c0 c0")).has_value());
  // rel over a non-state argument
  CHECK(ch.wf_formula({}, f_rel(v_unit(), v_const("c0"))).has_value());
  // unbound index variable
  CompTypePtr open_idx = comp_mst(v_var("b"), type_unit(), "s", f_top(),
                                  "s", "x", "s'", f_top());
  CHECK(ch.wf_comp_type({}, open_idx).has_value());
  // equality annotated at the wrong type
  CHECK(ch.wf_formula({}, f_eq(type_unit(), v_const("c0"), v_const("c0")))
            .has_value());
}

TEST_CASE("value typing") {
  Checker ch = make_checker(counter());
  CHECK(alpha_eq(ch.infer_value({}, v_const("c0")), type_state()));
  CHECK(alpha_eq(
      ch.infer_value({}, v_pair(v_unit(), v_inl(v_unit(), type_unit()))),
      type_prod(type_unit(), type_bool())));
  CHECK_THROWS_AS(ch.infer_value({}, v_var("zzz")), TypeError);
  CHECK_THROWS_AS(ch.infer_value({}, v_const("d17")), TypeError);
  CHECK_THROWS_AS(ch.infer_value({}, v_prim("succ", v_unit())), TypeError);
}

TEST_CASE("reify types as a dependent state-passing function") {
  Checker ch = make_checker(counter());
  ValuePtr r = v_reify(c_return(v_true(), v_unit()));
  TypePtr t = ch.infer_value({}, r);
  const auto* arrow = std::get_if<DepArrowTy>(&t->node);
  REQUIRE(arrow != nullptr);
  CHECK(alpha_eq(arrow->domain, type_state()));
  const auto* pure = std::get_if<PureTy>(&arrow->codomain->node);
  REQUIRE(pure != nullptr);
  CHECK(alpha_eq(pure->result, type_prod(type_unit(), type_state())));
  // the postcondition records monotonic evolution
  CHECK(pretty(pure->post).find("rel") != std::string::npos);
  // reify of an abstract computation is rejected
  CHECK_THROWS_AS(
      ch.infer_value({}, v_reify(c_return(v_false(), v_unit()))),
      TypeError);
}

TEST_CASE("T-Get derives the paper's type") {
  Checker ch = make_checker(counter());
  auto [ct, obs] = ch.infer_comp({}, pc("get<false>"));
  CHECK(obs.empty());
  CompTypePtr want = parse_comp_type(
      "MST<false> state (s. True) (s x s'. s == x /\\ x == s')", counter());
  CHECK(alpha_eq(ct, want));
}

TEST_CASE("T-Put carries the preorder precondition") {
  Checker ch = make_checker(counter());
  auto [ct, obs] = ch.infer_comp({}, pc("put<false> c3"));
  const auto* m = std::get_if<MstTy>(&ct->node);
  REQUIRE(m != nullptr);
  CHECK(alpha_eq(subst(m->pre, m->pre_binder, v_var("q")),
                 pform("rel q c3")));
}

TEST_CASE("witness and recall carry guarded specifications") {
  Checker ch = make_checker(counter());
  auto [ct, obs] = ch.infer_comp({}, pc("witness<true> (t. rel c0 t)"));
  const auto* m = std::get_if<MstTy>(&ct->node);
  REQUIRE(m != nullptr);
  CHECK(is_true(m->index));
  CHECK(pretty(m->pre).find("==>") != std::string::npos);
  CHECK(pretty(m->post).find("witnessed") != std::string::npos);
}

TEST_CASE("coerce demands a true index") {
  Checker ch = make_checker(counter());
  CHECK_THROWS_AS(ch.infer_comp({}, pc("coerce (return<false> ())")),
                  TypeError);
  auto [ct, obs] = ch.infer_comp({}, pc("coerce (return<true> ())"));
  const auto* m = std::get_if<MstTy>(&ct->node);
  REQUIRE(m != nullptr);
  CHECK(is_false(m->index));
}

TEST_CASE("bind rejects mixed effect indices") {
  Checker ch = make_checker(counter());
  CHECK_THROWS_AS(
      ch.infer_comp({}, pc("bind x = get<true> in return<false> x")),
      TypeError);
}

TEST_CASE("application of a non-arrow fails") {
  Checker ch = make_checker(counter());
  CHECK_THROWS_AS(ch.infer_comp({}, pc("c0 c1")), TypeError);
}

TEST_CASE("the counter program is accepted with all obligations proved") {
  DomainRegistry reg = cli::corpus_registry();
  SourceProgram p = parse_program(read_file("counter.mst"), reg);
  Checker ch = make_checker(*reg.find("counter"));
  CheckReport rep = ch.check_comp({}, p.main, p.ascription);
  for (std::size_t i = 0; i < rep.obligations.size(); ++i) {
    CAPTURE(rep.obligations[i].provenance());
    CAPTURE(logic::pretty(rep.obligations[i].sequent));
    CHECK(rep.verdicts[i] == Verdict::Proved);
  }
  CHECK(rep.accepted);
  CHECK(is_mst_fragment(p.main));
}

TEST_CASE("weakening the postcondition keeps acceptance") {
  DomainRegistry reg = cli::corpus_registry();
  SourceProgram p = parse_program(read_file("counter.mst"), reg);
  Checker ch = make_checker(*reg.find("counter"));
  CompTypePtr weaker = parse_comp_type(
      "MST<false> unit (s. True) (s x s'. True)", counter());
  CheckReport rep = ch.check_comp({}, p.main, weaker);
  CHECK(rep.accepted);
}

TEST_CASE("the broken reify corpus program is rejected") {
  DomainRegistry reg = cli::corpus_registry();
  SourceProgram p = parse_program(read_file("broken_reify.mst"), reg);
  Checker ch = make_checker(*reg.find("counter"));
  CheckReport rep = ch.check_comp({}, p.main, p.ascription);
  CHECK(!rep.accepted);
  bool some_unknown = false;
  for (auto v : rep.verdicts)
    if (v == Verdict::Unknown) some_unknown = true;
  CHECK(some_unknown);
  CHECK(!is_mst_fragment(p.main));
}

TEST_CASE("inference is deterministic") {
  Checker ch = make_checker(counter());
  CompPtr e = pc(
      "bind n = get<false> in witness<false> (t. rel n t); "
      "put<false> (succ n); return<false> ()");
  auto [c1, o1] = ch.infer_comp({}, e);
  auto [c2, o2] = ch.infer_comp({}, e);
  CHECK(alpha_eq(c1, c2));
  CHECK(o1.size() == o2.size());
}

TEST_CASE("Sub-MST emits rel only on the postcondition obligation") {
  Checker ch = make_checker(counter());
  CompPtr e = pc("return<false> ()");
  CompTypePtr asc = parse_comp_type(
      "MST<false> unit (s. True) (s x s'. rel s s')", counter());
  CheckReport rep = ch.check_comp({}, e, asc);
  REQUIRE(rep.accepted);
  bool saw_pre = false, saw_post = false;
  for (const auto& o : rep.obligations) {
    bool has_rel_assumption = false;
    for (const auto& f : o.sequent.left.items())
      if (const auto* a = std::get_if<Atom>(&f->node))
        if (a->head.kind == AtomHead::Kind::Rel) has_rel_assumption = true;
    if (o.rule == "Sub-MST pre") {
      saw_pre = true;
      CHECK(!has_rel_assumption);
    }
    if (o.rule == "Sub-MST post") {
      saw_post = true;
      CHECK(has_rel_assumption);
    }
  }
  CHECK(saw_pre);
  CHECK(saw_post);
}

TEST_CASE("index discipline lint") {
  CHECK(is_mst_fragment(pc("bind x = get<false> in return<false> x")));
  CHECK(!is_mst_fragment(pc("get<true>")));
  CHECK(!is_mst_fragment(pc("coerce (return<true> ())")));
  CHECK(!is_mst_fragment_value(v_reify(c_return(v_true(), v_unit()))));
}
