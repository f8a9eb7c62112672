#include "mst/nd.hpp"

#include <functional>

#include "mst/pretty.hpp"

namespace mst::logic {

bool replace_match_formula(const FormulaPtr& from, const FormulaPtr& to,
                           const ValuePtr& v, const ValuePtr& w);

const char* nd_rule_name(NdRule r) {
  switch (r) {
    case NdRule::Hyp: return "Hyp";
    case NdRule::TopI: return "Top-I";
    case NdRule::BotE: return "Bot-E";
    case NdRule::AndI: return "And-I";
    case NdRule::AndE1: return "And-E1";
    case NdRule::AndE2: return "And-E2";
    case NdRule::OrI1: return "Or-I1";
    case NdRule::OrI2: return "Or-I2";
    case NdRule::OrE: return "Or-E";
    case NdRule::ImpI: return "Imp-I";
    case NdRule::ImpE: return "Imp-E";
    case NdRule::ForallI: return "Forall-I";
    case NdRule::ForallE: return "Forall-E";
    case NdRule::ExistsI: return "Exists-I";
    case NdRule::ExistsE: return "Exists-E";
    case NdRule::Dne: return "DNE";
    case NdRule::WitnessedWeaken: return "Witnessed-Weaken";
    case NdRule::EqRefl: return "Eq-Refl";
    case NdRule::EqTransport: return "Eq-Transport";
    case NdRule::RelRefl: return "Rel-Refl";
    case NdRule::RelTrans: return "Rel-Trans";
    case NdRule::SumDisjoint: return "Sum-Disjoint";
    case NdRule::PairInjective: return "Pair-Injective";
    case NdRule::BoolCases: return "Bool-Cases";
  }
  return "?";
}

std::size_t nd_size(const NdPtr& d) {
  std::size_t n = 1;
  for (const auto& p : d->premises) n += nd_size(p);
  return n;
}

FormulaPtr or_chain(const std::vector<FormulaPtr>& items) {
  if (items.empty()) return f_bot();
  FormulaPtr acc = items.back();
  for (auto it = items.rbegin() + 1; it != items.rend(); ++it)
    acc = f_or(*it, acc);
  return acc;
}

// ---------------------------------------------------------------------------
// Checker.

namespace {

struct EqAtomView {
  TypePtr type;
  ValuePtr lhs, rhs;
};

std::optional<EqAtomView> eq_view(const FormulaPtr& f) {
  const auto* a = std::get_if<Atom>(&f->node);
  if (!a || a->head.kind != AtomHead::Kind::Eq) return std::nullopt;
  return EqAtomView{a->head.eq_type, a->args[0], a->args[1]};
}

std::optional<std::pair<ValuePtr, ValuePtr>> rel_view(const FormulaPtr& f) {
  const auto* a = std::get_if<Atom>(&f->node);
  if (!a || a->head.kind != AtomHead::Kind::Rel) return std::nullopt;
  return std::make_pair(a->args[0], a->args[1]);
}

std::set<Name> hyp_free_vars(const FormulaSet& hyps) {
  std::set<Name> fv;
  for (const auto& f : hyps.items()) collect_free_vars(f, fv);
  return fv;
}

struct NdChecker {
  CheckResult result;

  void fail(const std::string& path, const std::string& why) {
    if (!result.ok) return;
    result.ok = false;
    result.diagnostic = path + ": " + why;
  }

  bool hyps_available(const NdPtr& node, const NdPtr& prem,
                      const std::vector<FormulaPtr>& discharged) {
    FormulaSet allowed = node->hyps;
    for (const auto& f : discharged) allowed.insert(f);
    return prem->hyps.subset_of(allowed);
  }

  bool ctx_same(const NdPtr& a, const NdPtr& b) {
    return a->ctx.bindings.size() == b->ctx.bindings.size();
  }

  void check(const NdPtr& d, const std::string& path) {
    if (!result.ok) return;
    if (!d || !d->conclusion) {
      fail(path, "null derivation");
      return;
    }
    auto sub = [&](size_t i) {
      return path + "/" + nd_rule_name(d->rule) + "[" + std::to_string(i) +
             "]";
    };
    auto need = [&](size_t n) {
      if (d->premises.size() != n) {
        fail(path, "wrong premise count");
        return false;
      }
      return true;
    };
    // Premise hypothesis discipline (discharges handled per rule below).
    auto plain_premises = [&](std::initializer_list<size_t> idxs) {
      for (size_t i : idxs)
        if (!hyps_available(d, d->premises[i], {}))
          fail(sub(i), "premise uses unavailable hypotheses");
    };

    switch (d->rule) {
      case NdRule::Hyp:
        if (!need(0)) return;
        if (!d->hyps.contains(d->conclusion))
          fail(path, "conclusion is not a hypothesis");
        return;
      case NdRule::TopI:
        if (!need(0)) return;
        if (!std::holds_alternative<TopF>(d->conclusion->node))
          fail(path, "conclusion is not truth");
        return;
      case NdRule::BotE: {
        if (!need(1)) return;
        plain_premises({0});
        if (!std::holds_alternative<BotF>(d->premises[0]->conclusion->node))
          fail(path, "premise does not conclude falsum");
        break;
      }
      case NdRule::AndI: {
        if (!need(2)) return;
        plain_premises({0, 1});
        const auto* c = std::get_if<AndF>(&d->conclusion->node);
        if (!c || !alpha_eq(c->left, d->premises[0]->conclusion) ||
            !alpha_eq(c->right, d->premises[1]->conclusion))
          fail(path, "conclusion is not the conjunction of the premises");
        break;
      }
      case NdRule::AndE1:
      case NdRule::AndE2: {
        if (!need(1)) return;
        plain_premises({0});
        const auto* c =
            std::get_if<AndF>(&d->premises[0]->conclusion->node);
        if (!c) {
          fail(path, "premise is not a conjunction");
          return;
        }
        const FormulaPtr& want =
            d->rule == NdRule::AndE1 ? c->left : c->right;
        if (!alpha_eq(want, d->conclusion))
          fail(path, "conclusion is not the selected conjunct");
        break;
      }
      case NdRule::OrI1:
      case NdRule::OrI2: {
        if (!need(1)) return;
        plain_premises({0});
        const auto* c = std::get_if<OrF>(&d->conclusion->node);
        if (!c) {
          fail(path, "conclusion is not a disjunction");
          return;
        }
        const FormulaPtr& want = d->rule == NdRule::OrI1 ? c->left : c->right;
        if (!alpha_eq(want, d->premises[0]->conclusion))
          fail(path, "premise does not match the injected side");
        break;
      }
      case NdRule::OrE: {
        if (!need(3)) return;
        const auto* c =
            std::get_if<OrF>(&d->premises[0]->conclusion->node);
        if (!c) {
          fail(path, "major premise is not a disjunction");
          return;
        }
        plain_premises({0});
        if (!hyps_available(d, d->premises[1], {c->left}))
          fail(sub(1), "premise uses unavailable hypotheses");
        if (!hyps_available(d, d->premises[2], {c->right}))
          fail(sub(2), "premise uses unavailable hypotheses");
        if (!alpha_eq(d->premises[1]->conclusion, d->conclusion) ||
            !alpha_eq(d->premises[2]->conclusion, d->conclusion))
          fail(path, "branch conclusions differ from the goal");
        break;
      }
      case NdRule::ImpI: {
        if (!need(1)) return;
        const auto* c = std::get_if<ImpliesF>(&d->conclusion->node);
        if (!c) {
          fail(path, "conclusion is not an implication");
          return;
        }
        if (!hyps_available(d, d->premises[0], {c->left}))
          fail(sub(0), "premise uses unavailable hypotheses");
        if (!alpha_eq(d->premises[0]->conclusion, c->right))
          fail(path, "premise does not conclude the consequent");
        break;
      }
      case NdRule::ImpE: {
        if (!need(2)) return;
        plain_premises({0, 1});
        const auto* c =
            std::get_if<ImpliesF>(&d->premises[0]->conclusion->node);
        if (!c) {
          fail(path, "major premise is not an implication");
          return;
        }
        if (!alpha_eq(c->left, d->premises[1]->conclusion))
          fail(path, "minor premise does not match the antecedent");
        if (!alpha_eq(c->right, d->conclusion))
          fail(path, "conclusion is not the consequent");
        break;
      }
      case NdRule::ForallI: {
        if (!need(1)) return;
        const auto* c = std::get_if<ForallF>(&d->conclusion->node);
        if (!c) {
          fail(path, "conclusion is not a universal");
          return;
        }
        if (d->eigen.empty() || d->ctx.contains(d->eigen)) {
          fail(path, "bad eigenvariable");
          return;
        }
        if (hyp_free_vars(d->hyps).count(d->eigen)) {
          fail(path, "eigenvariable occurs in a hypothesis");
          return;
        }
        std::set<Name> cfv = free_vars(d->conclusion);
        if (cfv.count(d->eigen)) {
          fail(path, "eigenvariable occurs in the conclusion");
          return;
        }
        plain_premises({0});
        const NdPtr& p = d->premises[0];
        if (p->ctx.bindings.size() != d->ctx.bindings.size() + 1 ||
            p->ctx.bindings.back().first != d->eigen ||
            !alpha_eq(p->ctx.bindings.back().second, c->type)) {
          fail(path, "premise context does not bind the eigenvariable");
          return;
        }
        if (!alpha_eq(p->conclusion,
                      subst(c->body, c->binder, v_var(d->eigen))))
          fail(path, "premise is not the opened body");
        break;
      }
      case NdRule::ForallE: {
        if (!need(1)) return;
        plain_premises({0});
        const auto* c =
            std::get_if<ForallF>(&d->premises[0]->conclusion->node);
        if (!c || !d->witness) {
          fail(path, "premise is not a universal or witness missing");
          return;
        }
        if (!alpha_eq(d->conclusion,
                      subst(c->body, c->binder, d->witness)))
          fail(path, "conclusion is not the instantiated body");
        break;
      }
      case NdRule::ExistsI: {
        if (!need(1)) return;
        plain_premises({0});
        const auto* c = std::get_if<ExistsF>(&d->conclusion->node);
        if (!c || !d->witness) {
          fail(path, "conclusion is not an existential or witness missing");
          return;
        }
        if (!alpha_eq(d->premises[0]->conclusion,
                      subst(c->body, c->binder, d->witness)))
          fail(path, "premise is not the instantiated body");
        break;
      }
      case NdRule::ExistsE: {
        if (!need(2)) return;
        plain_premises({0});
        const auto* c =
            std::get_if<ExistsF>(&d->premises[0]->conclusion->node);
        if (!c) {
          fail(path, "major premise is not an existential");
          return;
        }
        if (d->eigen.empty() || d->ctx.contains(d->eigen)) {
          fail(path, "bad eigenvariable");
          return;
        }
        if (hyp_free_vars(d->hyps).count(d->eigen) ||
            free_vars(d->conclusion).count(d->eigen)) {
          fail(path, "eigenvariable escapes");
          return;
        }
        FormulaPtr opened = subst(c->body, c->binder, v_var(d->eigen));
        const NdPtr& p = d->premises[1];
        if (p->ctx.bindings.size() != d->ctx.bindings.size() + 1 ||
            p->ctx.bindings.back().first != d->eigen ||
            !alpha_eq(p->ctx.bindings.back().second, c->type)) {
          fail(path, "minor premise context does not bind the eigenvariable");
          return;
        }
        if (!hyps_available(d, p, {opened}))
          fail(sub(1), "premise uses unavailable hypotheses");
        if (!alpha_eq(p->conclusion, d->conclusion))
          fail(path, "minor premise conclusion differs from the goal");
        break;
      }
      case NdRule::Dne: {
        if (!need(1)) return;
        plain_premises({0});
        FormulaPtr want = f_implies(f_implies(d->conclusion, f_bot()),
                                    f_bot());
        if (!alpha_eq(d->premises[0]->conclusion, want))
          fail(path, "premise is not the double negation of the goal");
        break;
      }
      case NdRule::WitnessedWeaken: {
        if (!need(1)) return;
        const auto* c = std::get_if<ImpliesF>(&d->conclusion->node);
        const WitnessedF* wl =
            c ? std::get_if<WitnessedF>(&c->left->node) : nullptr;
        const WitnessedF* wr =
            c ? std::get_if<WitnessedF>(&c->right->node) : nullptr;
        if (!wl || !wr) {
          fail(path,
               "conclusion is not an implication between witnessed formulas");
          return;
        }
        if (d->eigen.empty() || d->ctx.contains(d->eigen)) {
          fail(path, "bad eigenvariable");
          return;
        }
        if (hyp_free_vars(d->hyps).count(d->eigen) ||
            free_vars(d->conclusion).count(d->eigen)) {
          fail(path, "eigenvariable escapes");
          return;
        }
        plain_premises({0});
        const NdPtr& p = d->premises[0];
        if (p->ctx.bindings.size() != d->ctx.bindings.size() + 1 ||
            p->ctx.bindings.back().first != d->eigen ||
            !alpha_eq(p->ctx.bindings.back().second, type_state())) {
          fail(path, "premise context does not bind the eigenvariable");
          return;
        }
        ValuePtr ev = v_var(d->eigen);
        FormulaPtr want =
            f_implies(apply_pred(wl->pred, ev), apply_pred(wr->pred, ev));
        if (!alpha_eq(p->conclusion, want))
          fail(path, "premise is not the opened implication");
        break;
      }
      case NdRule::EqRefl: {
        if (!need(0)) return;
        auto eq = eq_view(d->conclusion);
        if (!eq || !alpha_eq(eq->lhs, eq->rhs)) {
          fail(path, "conclusion is not a reflexive equality");
          return;
        }
        auto t = simple_value_type(d->ctx, eq->lhs);
        if (!t || !alpha_eq(*t, eq->type))
          fail(path, "equality subject is ill-typed");
        return;
      }
      case NdRule::RelRefl: {
        if (!need(0)) return;
        auto r = rel_view(d->conclusion);
        if (!r || !alpha_eq(r->first, r->second)) {
          fail(path, "conclusion is not a reflexive rel atom");
          return;
        }
        auto t = simple_value_type(d->ctx, r->first);
        if (!t || !alpha_eq(*t, type_state()))
          fail(path, "rel subject is not state-typed");
        return;
      }
      case NdRule::RelTrans: {
        if (!need(2)) return;
        plain_premises({0, 1});
        auto r1 = rel_view(d->premises[0]->conclusion);
        auto r2 = rel_view(d->premises[1]->conclusion);
        auto r3 = rel_view(d->conclusion);
        if (!r1 || !r2 || !r3 || !alpha_eq(r1->second, r2->first) ||
            !alpha_eq(r3->first, r1->first) ||
            !alpha_eq(r3->second, r2->second))
          fail(path, "rel atoms do not chain");
        break;
      }
      case NdRule::EqTransport: {
        if (!need(2)) return;
        plain_premises({0, 1});
        auto eq = eq_view(d->premises[0]->conclusion);
        if (!eq) {
          fail(path, "first premise is not an equality");
          return;
        }
        if (!replace_match_formula(d->premises[1]->conclusion, d->conclusion,
                                   eq->lhs, eq->rhs))
          fail(path, "conclusion is not a transport of the second premise");
        break;
      }
      case NdRule::SumDisjoint: {
        if (!need(1)) return;
        plain_premises({0});
        auto eq = eq_view(d->premises[0]->conclusion);
        bool ok = false;
        if (eq) {
          bool li = std::holds_alternative<InlVal>(eq->lhs->node);
          bool rr = std::holds_alternative<InrVal>(eq->rhs->node);
          bool lr = std::holds_alternative<InrVal>(eq->lhs->node);
          bool ri = std::holds_alternative<InlVal>(eq->rhs->node);
          ok = (li && rr) || (lr && ri);
        }
        if (!ok || !std::holds_alternative<BotF>(d->conclusion->node))
          fail(path, "not a sum-disjointness inference");
        break;
      }
      case NdRule::PairInjective: {
        if (!need(1)) return;
        plain_premises({0});
        auto eq = eq_view(d->premises[0]->conclusion);
        if (!eq) {
          fail(path, "premise is not an equality");
          return;
        }
        const auto* lp = std::get_if<PairVal>(&eq->lhs->node);
        const auto* rp = std::get_if<PairVal>(&eq->rhs->node);
        const auto* pt = std::get_if<ProdTy>(&eq->type->node);
        if (!lp || !rp || !pt) {
          fail(path, "premise is not a pair equality");
          return;
        }
        FormulaPtr want =
            d->component == 0
                ? f_eq(pt->left, lp->first, rp->first)
                : f_eq(pt->right, lp->second, rp->second);
        if (!alpha_eq(want, d->conclusion))
          fail(path, "conclusion is not the selected component equality");
        break;
      }
      case NdRule::BoolCases: {
        if (!need(2)) return;
        if (!d->witness) {
          fail(path, "missing case subject");
          return;
        }
        auto t = simple_value_type(d->ctx, d->witness);
        if (!t || !alpha_eq(*t, type_bool())) {
          fail(path, "case subject is not boolean");
          return;
        }
        FormulaPtr et = f_eq(type_bool(), d->witness, v_true());
        FormulaPtr ef = f_eq(type_bool(), d->witness, v_false());
        if (!hyps_available(d, d->premises[0], {et}))
          fail(sub(0), "premise uses unavailable hypotheses");
        if (!hyps_available(d, d->premises[1], {ef}))
          fail(sub(1), "premise uses unavailable hypotheses");
        if (!alpha_eq(d->premises[0]->conclusion, d->conclusion) ||
            !alpha_eq(d->premises[1]->conclusion, d->conclusion))
          fail(path, "branch conclusions differ from the goal");
        break;
      }
    }
    for (size_t i = 0; i < d->premises.size(); ++i)
      check(d->premises[i], sub(i));
  }
};

}  // namespace

CheckResult check_nd(const NdPtr& d) {
  NdChecker ch;
  ch.check(d, "root");
  return ch.result;
}

// ---------------------------------------------------------------------------
// Translation from the sequent calculus.

namespace {

struct Env {
  Context ctx;
  FormulaSet hyps;

  Env with(const FormulaPtr& f) const { return Env{ctx, hyps.with(f)}; }
  Env bind(const Name& n, const TypePtr& t) const {
    return Env{ctx.extended(n, t), hyps};
  }
};

NdPtr node(NdRule rule, const Env& env, FormulaPtr concl,
           std::vector<NdPtr> prem = {}, ValuePtr witness = nullptr,
           Name eigen = "", int component = 0) {
  auto d = std::make_shared<NdDerivation>();
  d->rule = rule;
  d->ctx = env.ctx;
  d->hyps = env.hyps;
  d->conclusion = std::move(concl);
  d->premises = std::move(prem);
  d->witness = std::move(witness);
  d->eigen = std::move(eigen);
  d->component = component;
  return d;
}

NdPtr nd_hyp(const Env& e, const FormulaPtr& f) {
  return node(NdRule::Hyp, e, f);
}
NdPtr nd_top(const Env& e) { return node(NdRule::TopI, e, f_top()); }
NdPtr nd_bot_e(const Env& e, NdPtr bot, FormulaPtr target) {
  return node(NdRule::BotE, e, std::move(target), {std::move(bot)});
}
NdPtr nd_and_i(const Env& e, NdPtr a, NdPtr b) {
  FormulaPtr c = f_and(a->conclusion, b->conclusion);
  return node(NdRule::AndI, e, c, {std::move(a), std::move(b)});
}
NdPtr nd_and_e1(const Env& e, NdPtr ab) {
  FormulaPtr c = std::get<AndF>(ab->conclusion->node).left;
  return node(NdRule::AndE1, e, c, {std::move(ab)});
}
NdPtr nd_and_e2(const Env& e, NdPtr ab) {
  FormulaPtr c = std::get<AndF>(ab->conclusion->node).right;
  return node(NdRule::AndE2, e, c, {std::move(ab)});
}
NdPtr nd_or_i1(const Env& e, NdPtr a, FormulaPtr right) {
  FormulaPtr c = f_or(a->conclusion, std::move(right));
  return node(NdRule::OrI1, e, c, {std::move(a)});
}
NdPtr nd_or_i2(const Env& e, FormulaPtr left, NdPtr b) {
  FormulaPtr c = f_or(std::move(left), b->conclusion);
  return node(NdRule::OrI2, e, c, {std::move(b)});
}
NdPtr nd_or_e(const Env& e, NdPtr ab, NdPtr l, NdPtr r) {
  FormulaPtr c = l->conclusion;
  return node(NdRule::OrE, e, c, {std::move(ab), std::move(l), std::move(r)});
}
NdPtr nd_imp_i(const Env& e, const FormulaPtr& a, NdPtr body) {
  FormulaPtr c = f_implies(a, body->conclusion);
  return node(NdRule::ImpI, e, c, {std::move(body)});
}
NdPtr nd_imp_e(const Env& e, NdPtr imp, NdPtr arg) {
  FormulaPtr c = std::get<ImpliesF>(imp->conclusion->node).right;
  return node(NdRule::ImpE, e, c, {std::move(imp), std::move(arg)});
}
NdPtr nd_forall_i(const Env& e, const Name& eigen, NdPtr body,
                  FormulaPtr target) {
  return node(NdRule::ForallI, e, std::move(target), {std::move(body)},
              nullptr, eigen);
}
NdPtr nd_forall_e(const Env& e, NdPtr all, const ValuePtr& w) {
  const auto& q = std::get<ForallF>(all->conclusion->node);
  FormulaPtr c = subst(q.body, q.binder, w);
  return node(NdRule::ForallE, e, c, {std::move(all)}, w);
}
NdPtr nd_exists_i(const Env& e, NdPtr inst, const ValuePtr& w,
                  FormulaPtr target) {
  return node(NdRule::ExistsI, e, std::move(target), {std::move(inst)}, w);
}
NdPtr nd_exists_e(const Env& e, NdPtr ex, const Name& eigen, NdPtr body) {
  FormulaPtr c = body->conclusion;
  return node(NdRule::ExistsE, e, c, {std::move(ex), std::move(body)},
              nullptr, eigen);
}
NdPtr nd_dne(const Env& e, NdPtr nn, FormulaPtr target) {
  return node(NdRule::Dne, e, std::move(target), {std::move(nn)});
}
NdPtr nd_witnessed_weaken(const Env& e, const Name& eigen, NdPtr body,
                          FormulaPtr target) {
  return node(NdRule::WitnessedWeaken, e, std::move(target),
              {std::move(body)}, nullptr, eigen);
}
NdPtr nd_eq_refl(const Env& e, FormulaPtr atom) {
  return node(NdRule::EqRefl, e, std::move(atom));
}
NdPtr nd_rel_refl(const Env& e, FormulaPtr atom) {
  return node(NdRule::RelRefl, e, std::move(atom));
}
NdPtr nd_rel_trans(const Env& e, NdPtr ab, NdPtr bc) {
  auto r1 = rel_view(ab->conclusion);
  auto r2 = rel_view(bc->conclusion);
  FormulaPtr c = f_rel(r1->first, r2->second);
  return node(NdRule::RelTrans, e, c, {std::move(ab), std::move(bc)});
}
NdPtr nd_transport(const Env& e, NdPtr eq, NdPtr from, FormulaPtr target) {
  return node(NdRule::EqTransport, e, std::move(target),
              {std::move(eq), std::move(from)});
}
NdPtr nd_sum_disjoint(const Env& e, NdPtr eq) {
  return node(NdRule::SumDisjoint, e, f_bot(), {std::move(eq)});
}
NdPtr nd_pair_inj(const Env& e, NdPtr pairEq, int component) {
  auto eq = eq_view(pairEq->conclusion);
  const auto& lp = std::get<PairVal>(eq->lhs->node);
  const auto& rp = std::get<PairVal>(eq->rhs->node);
  const auto& pt = std::get<ProdTy>(eq->type->node);
  FormulaPtr c = component == 0 ? f_eq(pt.left, lp.first, rp.first)
                                : f_eq(pt.right, lp.second, rp.second);
  return node(NdRule::PairInjective, e, c, {std::move(pairEq)}, nullptr, "",
              component);
}
NdPtr nd_bool_cases(const Env& e, const ValuePtr& w, NdPtr t, NdPtr f) {
  FormulaPtr c = t->conclusion;
  return node(NdRule::BoolCases, e, c, {std::move(t), std::move(f)}, w);
}

FormulaPtr neg(const FormulaPtr& f) { return f_implies(f, f_bot()); }

// A \/ (A ==> False), classically.
NdPtr nd_lem(const Env& e, const FormulaPtr& a) {
  FormulaPtr g = f_or(a, neg(a));
  FormulaPtr ng = neg(g);
  Env e2 = e.with(ng);
  Env e3 = e2.with(a);
  NdPtr not_a = nd_imp_i(
      e2, a,
      nd_imp_e(e3, nd_hyp(e3, ng), nd_or_i1(e3, nd_hyp(e3, a), neg(a))));
  NdPtr dg = nd_or_i2(e2, a, not_a);
  NdPtr dbot = nd_imp_e(e2, nd_hyp(e2, ng), dg);
  return nd_dne(e, nd_imp_i(e, ng, dbot), g);
}

std::optional<size_t> find_alpha(const std::vector<FormulaPtr>& items,
                                 const FormulaPtr& f) {
  for (size_t i = 0; i < items.size(); ++i)
    if (alpha_eq(items[i], f)) return i;
  return std::nullopt;
}

// Wraps a derivation of items[i] into the disjunction chain of items.
NdPtr inject(const Env& e, NdPtr d, const std::vector<FormulaPtr>& items,
             size_t i) {
  if (items.size() == 1) return d;
  if (i == 0) {
    std::vector<FormulaPtr> tail(items.begin() + 1, items.end());
    return nd_or_i1(e, std::move(d), or_chain(tail));
  }
  std::vector<FormulaPtr> tail(items.begin() + 1, items.end());
  return nd_or_i2(e, items[0], inject(e, std::move(d), tail, i - 1));
}

using CaseFn = std::function<NdPtr(size_t, const Env&, NdPtr)>;

// Eliminates a derivation of or_chain(items): the handler receives each
// disjunct (as a derivation under an extended environment) and must return
// a derivation of `target`.
NdPtr split_cases(const Env& e, NdPtr dchain,
                  const std::vector<FormulaPtr>& items, const CaseFn& handler,
                  size_t base = 0) {
  if (items.empty()) throw std::logic_error("split_cases on empty chain");
  if (items.size() == 1) return handler(base, e, std::move(dchain));
  std::vector<FormulaPtr> tail(items.begin() + 1, items.end());
  FormulaPtr a = items[0];
  FormulaPtr b = or_chain(tail);
  Env ea = e.with(a);
  Env eb = e.with(b);
  NdPtr p1 = handler(base, ea, nd_hyp(ea, a));
  NdPtr p2 = split_cases(eb, nd_hyp(eb, b), tail, handler, base + 1);
  return nd_or_e(e, std::move(dchain), std::move(p1), std::move(p2));
}

struct Translator {
  NdPtr translate(const ProofPtr& p) {
    const Sequent& c = p->conclusion;
    Env env{c.ctx, c.left};
    const std::vector<FormulaPtr>& right = c.right.items();
    FormulaPtr goal = or_chain(right);

    // Derives the goal chain from a derivation of one right-side member.
    auto emit = [&](const Env& e, NdPtr d) {
      auto i = find_alpha(right, d->conclusion);
      if (!i) throw std::logic_error("emit: formula not on the right");
      return inject(e, std::move(d), right, *i);
    };
    // Standard pattern for rules that add a formula to the premise's left
    // side: discharge it and supply a direct derivation.
    auto left_add = [&](const FormulaPtr& added,
                        const std::function<NdPtr(const Env&)>& derive) {
      NdPtr d1 = translate(p->premises[0]);
      return nd_imp_e(env, nd_imp_i(env, added, d1), derive(env));
    };

    switch (p->rule) {
      case Rule::Ax: {
        for (const auto& f : c.left.items())
          if (auto i = find_alpha(right, f))
            return inject(env, nd_hyp(env, f), right, *i);
        throw std::logic_error("Ax without a matching pair");
      }
      case Rule::BotL:
        return nd_bot_e(env, nd_hyp(env, f_bot()), goal);
      case Rule::TopR:
        return emit(env, nd_top(env));
      case Rule::SumDisjointSC:
        return nd_bot_e(env, nd_sum_disjoint(env, nd_hyp(env, p->principal)),
                        goal);
      case Rule::AndL: {
        const auto& a = std::get<AndF>(p->principal->node);
        NdPtr d1 = translate(p->premises[0]);
        NdPtr abstracted =
            nd_imp_i(env, a.left, nd_imp_i(env.with(a.left), a.right, d1));
        NdPtr ab = nd_hyp(env, p->principal);
        return nd_imp_e(env,
                        nd_imp_e(env, abstracted, nd_and_e1(env, ab)),
                        nd_and_e2(env, nd_hyp(env, p->principal)));
      }
      case Rule::AndR: {
        const auto& a = std::get<AndF>(p->principal->node);
        NdPtr d1 = translate(p->premises[0]);
        NdPtr d2 = translate(p->premises[1]);
        const auto& items1 = p->premises[0]->conclusion.right.items();
        const auto& items2 = p->premises[1]->conclusion.right.items();
        return split_cases(
            env, d1, items1,
            [&](size_t i, const Env& ei, NdPtr di) -> NdPtr {
              if (auto at = find_alpha(right, items1[i]))
                return inject(ei, std::move(di), right, *at);
              if (!alpha_eq(items1[i], a.left))
                throw std::logic_error("AndR: unexpected premise item");
              // di : left conjunct; split the second premise under ei.
              return split_cases(
                  ei, d2, items2,
                  [&](size_t j, const Env& ej, NdPtr dj) -> NdPtr {
                    if (auto at = find_alpha(right, items2[j]))
                      return inject(ej, std::move(dj), right, *at);
                    if (!alpha_eq(items2[j], a.right))
                      throw std::logic_error("AndR: unexpected premise item");
                    NdPtr both = nd_and_i(ej, di, std::move(dj));
                    return inject(ej, std::move(both), right,
                                  *find_alpha(right, p->principal));
                  },
                  0);
            },
            0);
      }
      case Rule::OrL: {
        const auto& a = std::get<OrF>(p->principal->node);
        NdPtr d1 = translate(p->premises[0]);
        NdPtr d2 = translate(p->premises[1]);
        (void)a;
        return nd_or_e(env, nd_hyp(env, p->principal), d1, d2);
      }
      case Rule::OrR: {
        const auto& a = std::get<OrF>(p->principal->node);
        NdPtr d1 = translate(p->premises[0]);
        const auto& items1 = p->premises[0]->conclusion.right.items();
        size_t at_p = *find_alpha(right, p->principal);
        return split_cases(
            env, d1, items1,
            [&](size_t i, const Env& ei, NdPtr di) -> NdPtr {
              if (auto at = find_alpha(right, items1[i]))
                return inject(ei, std::move(di), right, *at);
              if (alpha_eq(items1[i], a.left))
                return inject(ei, nd_or_i1(ei, std::move(di), a.right), right,
                              at_p);
              if (alpha_eq(items1[i], a.right))
                return inject(ei, nd_or_i2(ei, a.left, std::move(di)), right,
                              at_p);
              throw std::logic_error("OrR: unexpected premise item");
            },
            0);
      }
      case Rule::ImpliesL: {
        const auto& a = std::get<ImpliesF>(p->principal->node);
        NdPtr d1 = translate(p->premises[0]);
        NdPtr d2 = translate(p->premises[1]);
        const auto& items1 = p->premises[0]->conclusion.right.items();
        return split_cases(
            env, d1, items1,
            [&](size_t i, const Env& ei, NdPtr di) -> NdPtr {
              if (auto at = find_alpha(right, items1[i]))
                return inject(ei, std::move(di), right, *at);
              if (!alpha_eq(items1[i], a.left))
                throw std::logic_error("ImpliesL: unexpected premise item");
              // di : antecedent. Use modus ponens, then feed the consequent
              // to the second premise.
              NdPtr db = nd_imp_e(ei, nd_hyp(ei, p->principal), std::move(di));
              return nd_imp_e(ei, nd_imp_i(ei, a.right, d2), std::move(db));
            },
            0);
      }
      case Rule::ImpliesR: {
        const auto& a = std::get<ImpliesF>(p->principal->node);
        NdPtr d1 = translate(p->premises[0]);
        const auto& items1 = p->premises[0]->conclusion.right.items();
        size_t at_p = *find_alpha(right, p->principal);
        NdPtr dlem = nd_lem(env, a.left);
        Env eA = env.with(a.left);
        NdPtr branchA = split_cases(
            eA, d1, items1,
            [&](size_t i, const Env& ei, NdPtr di) -> NdPtr {
              if (alpha_eq(items1[i], a.right))
                return inject(ei, nd_imp_i(ei, a.left, std::move(di)), right,
                              at_p);
              if (auto at = find_alpha(right, items1[i]))
                return inject(ei, std::move(di), right, *at);
              throw std::logic_error("ImpliesR: unexpected premise item");
            },
            0);
        Env eNA = env.with(neg(a.left));
        Env eNAa = eNA.with(a.left);
        NdPtr vac = nd_imp_i(
            eNA, a.left,
            nd_bot_e(eNAa,
                     nd_imp_e(eNAa, nd_hyp(eNAa, neg(a.left)),
                              nd_hyp(eNAa, a.left)),
                     a.right));
        NdPtr branchNA = inject(eNA, vac, right, at_p);
        return nd_or_e(env, dlem, branchA, branchNA);
      }
      case Rule::ForallL: {
        const auto& q = std::get<ForallF>(p->principal->node);
        FormulaPtr inst = subst(q.body, q.binder, p->witness);
        return left_add(inst, [&](const Env& e) {
          return nd_forall_e(e, nd_hyp(e, p->principal), p->witness);
        });
      }
      case Rule::ExistsR: {
        const auto& q = std::get<ExistsF>(p->principal->node);
        FormulaPtr inst = subst(q.body, q.binder, p->witness);
        NdPtr d1 = translate(p->premises[0]);
        const auto& items1 = p->premises[0]->conclusion.right.items();
        size_t at_p = *find_alpha(right, p->principal);
        return split_cases(
            env, d1, items1,
            [&](size_t i, const Env& ei, NdPtr di) -> NdPtr {
              if (auto at = find_alpha(right, items1[i]))
                return inject(ei, std::move(di), right, *at);
              if (!alpha_eq(items1[i], inst))
                throw std::logic_error("ExistsR: unexpected premise item");
              return inject(
                  ei, nd_exists_i(ei, std::move(di), p->witness, p->principal),
                  right, at_p);
            },
            0);
      }
      case Rule::ExistsL: {
        NdPtr d1 = translate(p->premises[0]);
        return nd_exists_e(env, nd_hyp(env, p->principal), p->eigen, d1);
      }
      case Rule::ForallR: {
        const auto& q = std::get<ForallF>(p->principal->node);
        NdPtr d1 = translate(p->premises[0]);
        const auto& items1 = p->premises[0]->conclusion.right.items();
        size_t at_p = *find_alpha(right, p->principal);
        FormulaPtr opened = subst(q.body, q.binder, v_var(p->eigen));
        std::vector<FormulaPtr> delta;
        for (const auto& f : right)
          if (!alpha_eq(f, p->principal)) delta.push_back(f);
        FormulaPtr chain_d = or_chain(delta);
        NdPtr dlem = nd_lem(env, chain_d);
        Env eD = env.with(chain_d);
        NdPtr branchD =
            delta.empty()
                ? nd_bot_e(eD, nd_hyp(eD, f_bot()), goal)
                : split_cases(eD, nd_hyp(eD, chain_d), delta,
                              [&](size_t i, const Env& ei, NdPtr di) {
                                return inject(ei, std::move(di), right,
                                              *find_alpha(right, delta[i]));
                              },
                              0);
        Env eND = env.with(neg(chain_d));
        Env inner = eND.bind(p->eigen, q.type);
        NdPtr dphi = split_cases(
            inner, d1, items1,
            [&](size_t i, const Env& ei, NdPtr di) -> NdPtr {
              if (alpha_eq(items1[i], opened)) return di;
              auto at = find_alpha(delta, items1[i]);
              if (!at) throw std::logic_error("ForallR: unexpected item");
              NdPtr dbot = nd_imp_e(ei, nd_hyp(ei, neg(chain_d)),
                                    inject(ei, std::move(di), delta, *at));
              return nd_bot_e(ei, std::move(dbot), opened);
            },
            0);
        NdPtr dall = nd_forall_i(eND, p->eigen, dphi, p->principal);
        NdPtr branchND = inject(eND, dall, right, at_p);
        return nd_or_e(env, dlem, branchD, branchND);
      }
      case Rule::ContractR:
        return translate(p->premises[0]);
      case Rule::WitnessedWeakenSC: {
        const auto& wl = std::get<WitnessedF>(p->principal->node);
        const auto& wr = std::get<WitnessedF>(p->principal2->node);
        NdPtr d1 = translate(p->premises[0]);
        const auto& items1 = p->premises[0]->conclusion.right.items();
        size_t at_p = *find_alpha(right, p->principal2);
        ValuePtr ev = v_var(p->eigen);
        FormulaPtr phi = apply_pred(wl.pred, ev);
        FormulaPtr psi = apply_pred(wr.pred, ev);
        std::vector<FormulaPtr> delta;
        for (const auto& f : right)
          if (!alpha_eq(f, p->principal2)) delta.push_back(f);
        FormulaPtr chain_d = or_chain(delta);
        NdPtr dlem = nd_lem(env, chain_d);
        Env eD = env.with(chain_d);
        NdPtr branchD =
            delta.empty()
                ? nd_bot_e(eD, nd_hyp(eD, f_bot()), goal)
                : split_cases(eD, nd_hyp(eD, chain_d), delta,
                              [&](size_t i, const Env& ei, NdPtr di) {
                                return inject(ei, std::move(di), right,
                                              *find_alpha(right, delta[i]));
                              },
                              0);
        Env eND = env.with(neg(chain_d));
        Env inner = eND.bind(p->eigen, type_state());
        Env innerPhi = inner.with(phi);
        NdPtr dpsi = split_cases(
            innerPhi, d1, items1,
            [&](size_t i, const Env& ei, NdPtr di) -> NdPtr {
              if (alpha_eq(items1[i], psi)) return di;
              auto at = find_alpha(delta, items1[i]);
              if (!at)
                throw std::logic_error("WitnessedWeaken: unexpected item");
              NdPtr dbot = nd_imp_e(ei, nd_hyp(ei, neg(chain_d)),
                                    inject(ei, std::move(di), delta, *at));
              return nd_bot_e(ei, std::move(dbot), psi);
            },
            0);
        NdPtr opened_imp = nd_imp_i(inner, phi, dpsi);
        FormulaPtr target = f_implies(p->principal, p->principal2);
        NdPtr ww = nd_witnessed_weaken(eND, p->eigen, opened_imp, target);
        NdPtr applied = nd_imp_e(eND, ww, nd_hyp(eND, p->principal));
        NdPtr branchND = inject(eND, applied, right, at_p);
        return nd_or_e(env, dlem, branchD, branchND);
      }
      case Rule::EqReflSC:
        return left_add(p->produced, [&](const Env& e) {
          return nd_eq_refl(e, p->produced);
        });
      case Rule::RelReflSC:
        return left_add(p->produced, [&](const Env& e) {
          return nd_rel_refl(e, p->produced);
        });
      case Rule::RelTransSC:
        return left_add(p->produced, [&](const Env& e) {
          return nd_rel_trans(e, nd_hyp(e, p->principal),
                              nd_hyp(e, p->principal2));
        });
      case Rule::EqTransportSC: {
        auto eq = eq_view(p->principal);
        return left_add(p->produced, [&](const Env& e) -> NdPtr {
          NdPtr deq = nd_hyp(e, p->principal);
          NdPtr dsrc = nd_hyp(e, p->principal2);
          if (replace_match_formula(p->principal2, p->produced, eq->lhs,
                                    eq->rhs))
            return nd_transport(e, deq, dsrc, p->produced);
          // Reverse direction: derive symmetry first.
          FormulaPtr refl = f_eq(eq->type, eq->lhs, eq->lhs);
          FormulaPtr sym = f_eq(eq->type, eq->rhs, eq->lhs);
          NdPtr dsym = nd_transport(e, deq, nd_eq_refl(e, refl), sym);
          return nd_transport(e, dsym, dsrc, p->produced);
        });
      }
      case Rule::PairInjectiveSC: {
        auto eq = eq_view(p->principal);
        const auto& lp = std::get<PairVal>(eq->lhs->node);
        const auto& rp = std::get<PairVal>(eq->rhs->node);
        const auto& pt = std::get<ProdTy>(eq->type->node);
        FormulaPtr e1 = f_eq(pt.left, lp.first, rp.first);
        FormulaPtr e2 = f_eq(pt.right, lp.second, rp.second);
        NdPtr d1 = translate(p->premises[0]);
        NdPtr curried =
            nd_imp_i(env, e1, nd_imp_i(env.with(e1), e2, d1));
        NdPtr got1 = nd_pair_inj(env, nd_hyp(env, p->principal), 0);
        NdPtr got2 = nd_pair_inj(env, nd_hyp(env, p->principal), 1);
        return nd_imp_e(env, nd_imp_e(env, curried, got1), got2);
      }
      case Rule::BoolSplitSC: {
        NdPtr d1 = translate(p->premises[0]);
        NdPtr d2 = translate(p->premises[1]);
        return nd_bool_cases(env, p->split_term, d1, d2);
      }
    }
    throw std::logic_error("unreachable rule in translation");
  }
};

}  // namespace

NdPtr sc_to_nd(const ProofPtr& p) {
  Translator t;
  return t.translate(p);
}

}  // namespace mst::logic
