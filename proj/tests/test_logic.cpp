#include <doctest.h>

#include <functional>

#include "gen.hpp"
#include "mst/cli.hpp"
#include "mst/logic.hpp"
#include "mst/nd.hpp"
#include "mst/parser.hpp"
#include "mst/pretty.hpp"

using namespace mst;
using namespace mst::logic;

namespace {

const StateDomain& counter() {
  static StateDomain dom = make_counter_domain(8);
  return dom;
}

Sequent seq(std::vector<FormulaPtr> left, std::vector<FormulaPtr> right,
            Context ctx = {}) {
  Sequent s;
  s.ctx = std::move(ctx);
  for (auto& f : left) s.left.insert(std::move(f));
  for (auto& f : right) s.right.insert(std::move(f));
  return s;
}

ProverOptions opts(std::size_t depth) {
  ProverOptions o;
  o.max_depth = depth;
  return o;
}

ProofPtr prove_or_fail(const Sequent& s, std::size_t depth = 8) {
  ProveOutcome o = sc_prove(s, opts(depth));
  REQUIRE_MESSAGE(proved(o), "not proved: " << pretty(s));
  ProofPtr p = std::get<Proved>(o).proof;
  CheckResult cr = check_proof(p);
  REQUIRE_MESSAGE(cr.ok, cr.diagnostic);
  return p;
}

FormulaPtr pf(const char* text) { return parse_formula(text, counter()); }

}  // namespace

TEST_CASE("stable_formula produces the T-Witness schema") {
  Predicate p{"s", f_rel(v_const("c0"), v_var("s"))};
  FormulaPtr st = stable_formula(p);
  FormulaPtr want = pf(
      "forall a:state. forall b:state. rel a b /\\ rel c0 a ==> rel c0 b");
  CHECK(alpha_eq(st, want));

  FormulaPtr vac = stable_formula(Predicate{"s", f_top()});
  FormulaPtr want2 =
      pf("forall a:state. forall b:state. rel a b /\\ True ==> True");
  CHECK(alpha_eq(vac, want2));
}

TEST_CASE("equality with a fixed state is not stable") {
  Predicate p{"s", f_eq(type_state(), v_var("s"), v_const("c0"))};
  ProveOutcome o = sc_prove(seq({}, {stable_formula(p)}), opts(8));
  CHECK(!proved(o));
}

TEST_CASE("witnessed_conj") {
  CHECK(alpha_eq(witnessed_conj({}), f_witnessed(Predicate{"s", f_top()})));
  Predicate p{"s", f_rel(v_const("c0"), v_var("s"))};
  CHECK(alpha_eq(witnessed_conj({p}), pf("witnessed (t. rel c0 t)")));
  Predicate q{"s", f_rel(v_var("s"), v_const("c5"))};
  CHECK(alpha_eq(witnessed_conj({p, q}),
                 pf("witnessed (t. rel c0 t /\\ rel t c5)")));
}

TEST_CASE("rel reflexivity closes immediately") {
  ProofPtr p =
      prove_or_fail(seq({}, {f_rel(v_const("c0"), v_const("c0"))}));
  bool found = false;
  std::function<void(const ProofPtr&)> scan = [&](const ProofPtr& n) {
    if (n->rule == Rule::RelReflSC) found = true;
    for (const auto& q : n->premises) scan(q);
  };
  scan(p);
  CHECK(found);
}

TEST_CASE("witnessed weakening proves the paper's example") {
  Sequent s = seq({pf("witnessed (s. rel c0 s /\\ rel c1 s)")},
                  {pf("witnessed (s. rel c0 s)")});
  prove_or_fail(s);
}

TEST_CASE("falsum is not provable at any depth up to 8") {
  for (std::size_t d = 0; d <= 8; ++d) {
    ProveOutcome o = sc_prove(seq({}, {f_bot()}), opts(d));
    REQUIRE(!proved(o));
    CHECK(std::get<Unknown>(o).depth_exhausted == d);
  }
}

TEST_CASE("transport across an equality chain") {
  Context ctx = Context{}.extended("x", type_state());
  Sequent s = seq({f_eq(type_state(), v_var("x"), v_const("c1")),
                   f_rel(v_const("c0"), v_var("x"))},
                  {f_rel(v_const("c0"), v_const("c1"))}, ctx);
  prove_or_fail(s, 4);
}

TEST_CASE("boolean case split discharges parametric guards") {
  // b:bool | (b == false ==> rel c0 c1) |- (b == true) \/ (b == false)
  Context ctx = Context{}.extended("b", type_bool());
  Sequent s = seq({}, {f_or(f_eq(type_bool(), v_var("b"), v_true()),
                            f_eq(type_bool(), v_var("b"), v_false()))},
                  ctx);
  prove_or_fail(s, 4);
}

TEST_CASE("check_proof rejects a broken weakening side condition") {
  Predicate p{"s", f_rel(v_const("c0"), v_var("s"))};
  FormulaPtr lw = f_witnessed(p);
  FormulaPtr rw = f_witnessed(p);
  FormulaPtr leak = f_rel(v_var("a"), v_var("a"));  // mentions the eigen
  Context ctx = Context{}.extended("a0", type_state());
  auto prem = std::make_shared<Proof>();
  prem->rule = Rule::Ax;
  prem->conclusion =
      seq({apply_pred(p, v_var("a")), leak}, {apply_pred(p, v_var("a"))},
          ctx.extended("a", type_state()));
  auto node = std::make_shared<Proof>();
  node->rule = Rule::WitnessedWeakenSC;
  node->conclusion = seq({lw, leak}, {rw}, ctx);
  node->principal = lw;
  node->principal2 = rw;
  node->eigen = "a";
  node->premises = {prem};
  CheckResult cr = check_proof(node);
  CHECK(!cr.ok);
  CHECK(cr.diagnostic.find("FV") != std::string::npos);
}

TEST_CASE("check_proof restricts transport to atomic formulas") {
  Context ctx =
      Context{}.extended("x", type_state()).extended("y", type_state());
  FormulaPtr eq = f_eq(type_state(), v_var("x"), v_var("y"));
  FormulaPtr src = f_implies(f_rel(v_var("x"), v_const("c0")), f_bot());
  FormulaPtr dst = f_implies(f_rel(v_var("y"), v_const("c0")), f_bot());
  auto prem = std::make_shared<Proof>();
  prem->rule = Rule::Ax;
  prem->conclusion = seq({eq, src, dst}, {dst}, ctx);
  auto node = std::make_shared<Proof>();
  node->rule = Rule::EqTransportSC;
  node->conclusion = seq({eq, src}, {dst}, ctx);
  node->principal = eq;
  node->principal2 = src;
  node->produced = dst;
  node->premises = {prem};
  CheckResult cr = check_proof(node);
  CHECK(!cr.ok);
  CHECK(cr.diagnostic.find("atomic") != std::string::npos);
}

TEST_CASE("the unrestricted transport is admissible on compound formulas") {
  Context ctx =
      Context{}.extended("x", type_state()).extended("y", type_state());
  FormulaPtr eq = f_eq(type_state(), v_var("x"), v_var("y"));
  auto inst = [&](const FormulaPtr& fx, const FormulaPtr& fy) {
    prove_or_fail(seq({eq, fx}, {fy}, ctx), 8);
  };
  inst(f_and(f_rel(v_var("x"), v_const("c0")),
             f_rel(v_const("c1"), v_var("x"))),
       f_and(f_rel(v_var("y"), v_const("c0")),
             f_rel(v_const("c1"), v_var("y"))));
  inst(f_or(f_rel(v_var("x"), v_const("c0")), f_bot()),
       f_or(f_rel(v_var("y"), v_const("c0")), f_bot()));
  inst(f_implies(f_rel(v_var("x"), v_const("c0")), f_top()),
       f_implies(f_rel(v_var("y"), v_const("c0")), f_top()));
}

TEST_CASE("weakening functoriality") {
  gen::Gen g(31);
  const StateDomain& dom = counter();
  int tried = 0;
  for (int i = 0; i < 80 && tried < 15; ++i) {
    FormulaPtr phi = g.formula({"s"}, dom, 2);
    FormulaPtr psi = g.formula({"s"}, dom, 2);
    Context ctx = Context{}.extended("s", type_state());
    ProveOutcome inner = sc_prove(seq({phi}, {psi}, ctx), opts(4));
    if (!proved(inner)) continue;
    ++tried;
    Sequent lifted = seq({f_witnessed(Predicate{"s", phi})},
                         {f_witnessed(Predicate{"s", psi})});
    prove_or_fail(lifted, 5);
  }
  CHECK(tried >= 5);
}

// --- cut admissibility -------------------------------------------------------

TEST_CASE("cut on an axiom instance") {
  FormulaPtr a = f_rel(v_const("c0"), v_const("c1"));
  CHECK(cut_elim_check(seq({a}, {a}), seq({a}, {a}), a, 3));
}

TEST_CASE("cut through a witnessed weakening") {
  FormulaPtr big = pf("witnessed (s. rel c0 s /\\ rel c1 s)");
  FormulaPtr mid = pf("witnessed (s. rel c0 s)");
  FormulaPtr small = pf("witnessed (s. rel c0 s \\/ rel c2 s)");
  CHECK(cut_elim_check(seq({big}, {mid}), seq({mid}, {small}), mid, 5));
}

TEST_CASE("cut precondition violations are reported") {
  FormulaPtr a = f_rel(v_const("c0"), v_const("c1"));
  FormulaPtr b = f_rel(v_const("c3"), v_const("c2"));
  CHECK_THROWS_AS(cut_elim_check(seq({}, {b}), seq({b}, {a}), b, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(cut_elim_check(seq({a}, {a}), seq({a}, {a}), b, 3),
                  std::invalid_argument);
}

// --- translation to natural deduction ----------------------------------------

TEST_CASE("sc_to_nd on the reflexivity proof") {
  ProofPtr p =
      prove_or_fail(seq({}, {f_rel(v_const("c0"), v_const("c0"))}));
  NdPtr d = sc_to_nd(p);
  CheckResult cr = check_nd(d);
  REQUIRE_MESSAGE(cr.ok, cr.diagnostic);
  CHECK(alpha_eq(d->conclusion, f_rel(v_const("c0"), v_const("c0"))));
  bool uses_rel_refl = false;
  std::function<void(const NdPtr&)> scan = [&](const NdPtr& n) {
    if (n->rule == NdRule::RelRefl) uses_rel_refl = true;
    for (const auto& q : n->premises) scan(q);
  };
  scan(d);
  CHECK(uses_rel_refl);
}

TEST_CASE("sc_to_nd on a weakening proof uses the ND weakening rule") {
  Sequent s = seq({pf("witnessed (s. rel c0 s /\\ rel c1 s)")},
                  {pf("witnessed (s. rel c0 s)")});
  ProofPtr p = prove_or_fail(s);
  NdPtr d = sc_to_nd(p);
  CheckResult cr = check_nd(d);
  REQUIRE_MESSAGE(cr.ok, cr.diagnostic);
  bool uses_ww = false;
  std::function<void(const NdPtr&)> scan = [&](const NdPtr& n) {
    if (n->rule == NdRule::WitnessedWeaken) uses_ww = true;
    for (const auto& q : n->premises) scan(q);
  };
  scan(d);
  CHECK(uses_ww);
}

TEST_CASE("sc_to_nd on 50 random provable sequents") {
  gen::Gen g(47);
  const StateDomain& dom = counter();
  int done = 0;
  for (int i = 0; i < 500 && done < 50; ++i) {
    Sequent s;
    std::size_t nl = g.pick(3), nr = 1 + g.pick(2);
    for (std::size_t k = 0; k < nl; ++k) s.left.insert(g.formula({}, dom, 2));
    for (std::size_t k = 0; k < nr; ++k)
      s.right.insert(g.formula({}, dom, 2));
    ProveOutcome o = sc_prove(s, opts(4));
    if (!proved(o)) continue;
    ++done;
    NdPtr d = sc_to_nd(std::get<Proved>(o).proof);
    CheckResult cr = check_nd(d);
    REQUIRE_MESSAGE(cr.ok, cr.diagnostic << " for " << pretty(s));
    CHECK(alpha_eq(d->conclusion, or_chain(s.right.items())));
  }
  CHECK(done == 50);
}

// --- witnessed inversion -------------------------------------------------------

TEST_CASE("inversion of the identity weakening") {
  Predicate p{"s", f_rel(v_const("c0"), v_var("s"))};
  Sequent s = seq({f_witnessed(p)}, {f_witnessed(p)});
  ProofPtr pr = prove_or_fail(s);
  ProofPtr inv = witnessed_inversion(pr);
  CheckResult cr = check_proof(inv);
  REQUIRE_MESSAGE(cr.ok, cr.diagnostic);
  const Sequent& c = inv->conclusion;
  CHECK(c.ctx.bindings.size() == 1);
  CHECK(c.right.size() == 1);
}

TEST_CASE("inversion of a conjunction weakening") {
  Sequent s = seq({pf("witnessed (s. rel c0 s /\\ rel c1 s)")},
                  {pf("witnessed (s. rel c1 s)")});
  ProofPtr pr = prove_or_fail(s);
  ProofPtr inv = witnessed_inversion(pr);
  CheckResult cr = check_proof(inv);
  REQUIRE_MESSAGE(cr.ok, cr.diagnostic);
  const Sequent& c = inv->conclusion;
  REQUIRE(c.right.size() == 1);
  CHECK(std::holds_alternative<Atom>(c.right.items()[0]->node));
}

TEST_CASE("inversion preconditions are enforced") {
  Predicate p{"s", f_rel(v_const("c0"), v_var("s"))};
  Sequent s =
      seq({f_witnessed(p), f_or(f_top(), f_bot())}, {f_witnessed(p)});
  ProofPtr pr = prove_or_fail(s);
  CHECK_THROWS_AS(witnessed_inversion(pr), std::invalid_argument);
}

TEST_CASE("inversion on 50 generated weakening instances") {
  gen::Gen g(53);
  const StateDomain& dom = counter();
  int done = 0;
  for (int i = 0; i < 200 && done < 50; ++i) {
    Name b = "s";
    std::size_t n = 1 + g.pick(3);
    std::vector<FormulaPtr> atoms;
    for (std::size_t k = 0; k < n; ++k) atoms.push_back(g.atom({b}, dom));
    FormulaPtr phi = f_and_all(atoms);
    FormulaPtr picked = atoms[g.pick(atoms.size())];
    FormulaPtr phi2 = g.coin() ? picked : f_or(picked, g.atom({b}, dom));
    Sequent s;
    std::size_t extra = g.pick(3);
    for (std::size_t k = 0; k < extra; ++k) s.left.insert(g.atom({}, dom));
    s.left.insert(f_witnessed(Predicate{b, phi}));
    s.right.insert(f_witnessed(Predicate{b, phi2}));
    ProveOutcome o = sc_prove(s, opts(5));
    REQUIRE_MESSAGE(proved(o),
                    "generator made an unprovable instance: " << pretty(s));
    ProofPtr inv = witnessed_inversion(std::get<Proved>(o).proof);
    CheckResult cr = check_proof(inv);
    REQUIRE_MESSAGE(cr.ok, cr.diagnostic << " for " << pretty(s));
    ++done;
  }
  CHECK(done == 50);
}
