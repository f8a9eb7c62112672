#include "mst/logic.hpp"

#include <algorithm>
#include <sstream>

#include "mst/pretty.hpp"

namespace mst::logic {

// ---------------------------------------------------------------------------
// FormulaSet.

namespace {

bool value_has_binders(const ValuePtr& v) {
  return std::visit(
      overloaded{
          [&](const PairVal& p) {
            return value_has_binders(p.first) || value_has_binders(p.second);
          },
          [&](const InlVal& i) { return value_has_binders(i.value); },
          [&](const InrVal& i) { return value_has_binders(i.value); },
          [&](const LambdaVal&) { return true; },
          [&](const ReifyVal&) { return true; },
          [&](const PrimApp& p) { return value_has_binders(p.arg); },
          [&](const auto&) { return false; },
      },
      v->node);
}

bool formula_has_binders(const FormulaPtr& f) {
  return std::visit(
      overloaded{
          [&](const Atom& a) {
            for (const auto& v : a.args)
              if (value_has_binders(v)) return true;
            return false;
          },
          [&](const TopF&) { return false; },
          [&](const BotF&) { return false; },
          [&](const AndF& c) {
            return formula_has_binders(c.left) ||
                   formula_has_binders(c.right);
          },
          [&](const OrF& c) {
            return formula_has_binders(c.left) ||
                   formula_has_binders(c.right);
          },
          [&](const ImpliesF& c) {
            return formula_has_binders(c.left) ||
                   formula_has_binders(c.right);
          },
          [&](const ForallF&) { return true; },
          [&](const ExistsF&) { return true; },
          [&](const WitnessedF&) { return true; },
      },
      f->node);
}

}  // namespace

bool FormulaSet::insert(FormulaPtr f) {
  if (contains(f)) return false;
  prints_.insert(mst::pretty(f));
  if (formula_has_binders(f)) ++with_binders_;
  items_.push_back(std::move(f));
  return true;
}

bool FormulaSet::contains(const FormulaPtr& f) const {
  if (prints_.count(mst::pretty(f))) return true;
  if (with_binders_ == 0) return false;
  for (const auto& g : items_)
    if (alpha_eq(f, g)) return true;
  return false;
}

FormulaSet FormulaSet::with(FormulaPtr f) const {
  FormulaSet out = *this;
  out.insert(std::move(f));
  return out;
}

FormulaSet FormulaSet::without(const FormulaPtr& f) const {
  FormulaSet out;
  for (const auto& g : items_)
    if (!alpha_eq(f, g)) out.insert(g);
  return out;
}

bool FormulaSet::subset_of(const FormulaSet& other) const {
  for (const auto& g : items_)
    if (!other.contains(g)) return false;
  return true;
}

bool FormulaSet::set_eq(const FormulaSet& other) const {
  return subset_of(other) && other.subset_of(*this);
}

// ---------------------------------------------------------------------------
// Sequents.

bool sequent_eq(const Sequent& a, const Sequent& b) {
  if (a.ctx.bindings.size() != b.ctx.bindings.size()) return false;
  for (size_t i = 0; i < a.ctx.bindings.size(); ++i) {
    if (a.ctx.bindings[i].first != b.ctx.bindings[i].first) return false;
    if (!alpha_eq(a.ctx.bindings[i].second, b.ctx.bindings[i].second))
      return false;
  }
  return a.left.set_eq(b.left) && a.right.set_eq(b.right);
}

std::string pretty(const Sequent& s) {
  std::ostringstream os;
  if (!s.ctx.bindings.empty()) {
    for (size_t i = 0; i < s.ctx.bindings.size(); ++i) {
      if (i) os << ", ";
      os << s.ctx.bindings[i].first << ":"
         << mst::pretty(s.ctx.bindings[i].second);
    }
    os << " | ";
  }
  for (size_t i = 0; i < s.left.items().size(); ++i) {
    if (i) os << ", ";
    os << mst::pretty(s.left.items()[i]);
  }
  os << (s.left.empty() ? "|- " : " |- ");
  for (size_t i = 0; i < s.right.items().size(); ++i) {
    if (i) os << ", ";
    os << mst::pretty(s.right.items()[i]);
  }
  return os.str();
}

std::set<Name> sequent_free_vars(const Sequent& s) {
  std::set<Name> fv;
  for (const auto& f : s.left.items()) collect_free_vars(f, fv);
  for (const auto& f : s.right.items()) collect_free_vars(f, fv);
  return fv;
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Ax: return "Ax";
    case Rule::AndL: return "And-L";
    case Rule::AndR: return "And-R";
    case Rule::OrL: return "Or-L";
    case Rule::OrR: return "Or-R";
    case Rule::ImpliesL: return "Implies-L";
    case Rule::ImpliesR: return "Implies-R";
    case Rule::ForallL: return "Forall-L";
    case Rule::ForallR: return "Forall-R";
    case Rule::ExistsL: return "Exists-L";
    case Rule::ExistsR: return "Exists-R";
    case Rule::BotL: return "Bot-L";
    case Rule::TopR: return "Top-R";
    case Rule::ContractR: return "Contract-R";
    case Rule::WitnessedWeakenSC: return "Witnessed-Weaken-SC";
    case Rule::EqReflSC: return "Eq-Refl-SC";
    case Rule::EqTransportSC: return "Eq-Transport-SC";
    case Rule::RelReflSC: return "Rel-Refl-SC";
    case Rule::RelTransSC: return "Rel-Trans-SC";
    case Rule::SumDisjointSC: return "Sum-Disjoint-SC";
    case Rule::PairInjectiveSC: return "Pair-Injective-SC";
    case Rule::BoolSplitSC: return "Bool-Split-SC";
  }
  return "?";
}

std::size_t proof_size(const ProofPtr& p) {
  std::size_t n = 1;
  for (const auto& q : p->premises) n += proof_size(q);
  return n;
}

// ---------------------------------------------------------------------------
// Structural value typing.

std::optional<TypePtr> simple_value_type(const Context& ctx,
                                         const ValuePtr& v) {
  return std::visit(
      overloaded{
          [&](const Var& x) -> std::optional<TypePtr> {
            if (const TypePtr* t = ctx.lookup(x.name)) return *t;
            return std::nullopt;
          },
          [&](const StateConst&) -> std::optional<TypePtr> {
            return type_state();
          },
          [&](const UnitVal&) -> std::optional<TypePtr> { return type_unit(); },
          [&](const PairVal& p) -> std::optional<TypePtr> {
            auto a = simple_value_type(ctx, p.first);
            auto b = simple_value_type(ctx, p.second);
            if (!a || !b) return std::nullopt;
            return type_prod(*a, *b);
          },
          [&](const InlVal& i) -> std::optional<TypePtr> {
            auto a = simple_value_type(ctx, i.value);
            if (!a) return std::nullopt;
            return type_sum(*a, i.right_type);
          },
          [&](const InrVal& i) -> std::optional<TypePtr> {
            auto a = simple_value_type(ctx, i.value);
            if (!a) return std::nullopt;
            return type_sum(i.left_type, *a);
          },
          [&](const LambdaVal&) -> std::optional<TypePtr> {
            return std::nullopt;
          },
          [&](const ReifyVal&) -> std::optional<TypePtr> {
            return std::nullopt;
          },
          [&](const PrimApp& p) -> std::optional<TypePtr> {
            auto a = simple_value_type(ctx, p.arg);
            if (!a || !alpha_eq(*a, type_state())) return std::nullopt;
            return type_state();
          },
      },
      v->node);
}

// ---------------------------------------------------------------------------
// Replacement matching: is `to` obtainable from `from` by replacing some
// occurrences of `v` with `w`? Under a binder that captures a free variable
// of v or w, only exact correspondence is allowed.

namespace {

bool match_value(const ValuePtr& from, const ValuePtr& to, const ValuePtr& v,
                 const ValuePtr& w) {
  if (alpha_eq(from, v) && alpha_eq(to, w)) return true;
  if (from->node.index() != to->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Var& x) { return x.name == std::get<Var>(to->node).name; },
          [&](const StateConst& c) {
            return c.name == std::get<StateConst>(to->node).name;
          },
          [&](const UnitVal&) { return true; },
          [&](const PairVal& p) {
            const auto& q = std::get<PairVal>(to->node);
            return match_value(p.first, q.first, v, w) &&
                   match_value(p.second, q.second, v, w);
          },
          [&](const InlVal& i) {
            const auto& j = std::get<InlVal>(to->node);
            return alpha_eq(i.right_type, j.right_type) &&
                   match_value(i.value, j.value, v, w);
          },
          [&](const InrVal& i) {
            const auto& j = std::get<InrVal>(to->node);
            return alpha_eq(i.left_type, j.left_type) &&
                   match_value(i.value, j.value, v, w);
          },
          [&](const LambdaVal&) { return alpha_eq(from, to); },
          [&](const ReifyVal&) { return alpha_eq(from, to); },
          [&](const PrimApp& p) {
            const auto& q = std::get<PrimApp>(to->node);
            return p.prim == q.prim && match_value(p.arg, q.arg, v, w);
          },
      },
      from->node);
}

bool match_atom(const Atom& from, const Atom& to, const ValuePtr& v,
                const ValuePtr& w) {
  if (from.head.kind != to.head.kind) return false;
  if (from.head.kind == AtomHead::Kind::Eq &&
      !alpha_eq(from.head.eq_type, to.head.eq_type))
    return false;
  if (from.args.size() != to.args.size()) return false;
  for (size_t i = 0; i < from.args.size(); ++i)
    if (!match_value(from.args[i], to.args[i], v, w)) return false;
  return true;
}

}  // namespace

// Exposed to the natural-deduction checker, which allows transport inside
// arbitrary formulas.
bool replace_match_formula(const FormulaPtr& from, const FormulaPtr& to,
                           const ValuePtr& v, const ValuePtr& w);

bool replace_match_formula(const FormulaPtr& from, const FormulaPtr& to,
                           const ValuePtr& v, const ValuePtr& w) {
  if (from->node.index() != to->node.index()) return false;
  std::set<Name> guard = free_vars(v);
  {
    std::set<Name> wv = free_vars(w);
    guard.insert(wv.begin(), wv.end());
  }
  return std::visit(
      overloaded{
          [&](const Atom& a) {
            return match_atom(a, std::get<Atom>(to->node), v, w);
          },
          [&](const TopF&) { return true; },
          [&](const BotF&) { return true; },
          [&](const AndF& c) {
            const auto& d = std::get<AndF>(to->node);
            return replace_match_formula(c.left, d.left, v, w) &&
                   replace_match_formula(c.right, d.right, v, w);
          },
          [&](const OrF& c) {
            const auto& d = std::get<OrF>(to->node);
            return replace_match_formula(c.left, d.left, v, w) &&
                   replace_match_formula(c.right, d.right, v, w);
          },
          [&](const ImpliesF& c) {
            const auto& d = std::get<ImpliesF>(to->node);
            return replace_match_formula(c.left, d.left, v, w) &&
                   replace_match_formula(c.right, d.right, v, w);
          },
          [&](const ForallF& q) {
            const auto& r = std::get<ForallF>(to->node);
            if (!alpha_eq(q.type, r.type)) return false;
            if (guard.count(q.binder) || q.binder != r.binder)
              return alpha_eq(from, to);
            return replace_match_formula(q.body, r.body, v, w);
          },
          [&](const ExistsF& q) {
            const auto& r = std::get<ExistsF>(to->node);
            if (!alpha_eq(q.type, r.type)) return false;
            if (guard.count(q.binder) || q.binder != r.binder)
              return alpha_eq(from, to);
            return replace_match_formula(q.body, r.body, v, w);
          },
          [&](const WitnessedF& x) {
            const auto& y = std::get<WitnessedF>(to->node);
            if (guard.count(x.pred.binder) ||
                x.pred.binder != y.pred.binder)
              return alpha_eq(from, to);
            return replace_match_formula(x.pred.body, y.pred.body, v, w);
          },
      },
      from->node);
}

bool atom_replace_match(const FormulaPtr& from, const FormulaPtr& to,
                        const ValuePtr& v, const ValuePtr& w);

bool atom_replace_match(const FormulaPtr& from, const FormulaPtr& to,
                        const ValuePtr& v, const ValuePtr& w) {
  const auto* a = std::get_if<Atom>(&from->node);
  const auto* b = std::get_if<Atom>(&to->node);
  if (!a || !b) return false;
  return match_atom(*a, *b, v, w);
}

// ---------------------------------------------------------------------------
// Proof checking.

namespace {

struct EqParts {
  TypePtr type;
  ValuePtr lhs, rhs;
};

std::optional<EqParts> as_eq(const FormulaPtr& f) {
  const auto* a = std::get_if<Atom>(&f->node);
  if (!a || a->head.kind != AtomHead::Kind::Eq) return std::nullopt;
  return EqParts{a->head.eq_type, a->args[0], a->args[1]};
}

std::optional<std::pair<ValuePtr, ValuePtr>> as_rel(const FormulaPtr& f) {
  const auto* a = std::get_if<Atom>(&f->node);
  if (!a || a->head.kind != AtomHead::Kind::Rel) return std::nullopt;
  return std::make_pair(a->args[0], a->args[1]);
}

bool is_disjoint_eq(const FormulaPtr& f) {
  auto eq = as_eq(f);
  if (!eq) return false;
  bool li = std::holds_alternative<InlVal>(eq->lhs->node);
  bool lr = std::holds_alternative<InrVal>(eq->lhs->node);
  bool ri = std::holds_alternative<InlVal>(eq->rhs->node);
  bool rr = std::holds_alternative<InrVal>(eq->rhs->node);
  return (li && rr) || (lr && ri);
}

struct Checker {
  CheckResult result;

  void fail(const std::string& path, const std::string& why) {
    if (!result.ok) return;
    result.ok = false;
    result.diagnostic = path + ": " + why;
  }

  void check(const ProofPtr& p, const std::string& path) {
    if (!result.ok) return;
    if (!p) {
      fail(path, "null proof node");
      return;
    }
    const Sequent& c = p->conclusion;
    auto expect_premises = [&](size_t n) {
      if (p->premises.size() != n) {
        fail(path, "expected " + std::to_string(n) + " premises, have " +
                       std::to_string(p->premises.size()));
        return false;
      }
      return true;
    };
    auto premise_is = [&](size_t i, const Sequent& want) {
      if (!result.ok) return;
      if (!sequent_eq(p->premises[i]->conclusion, want)) {
        fail(path, std::string("premise ") + std::to_string(i) +
                       " mismatch: have [" +
                       pretty(p->premises[i]->conclusion) + "], want [" +
                       pretty(want) + "]");
      }
    };
    auto recurse = [&] {
      for (size_t i = 0; i < p->premises.size(); ++i)
        check(p->premises[i],
              path + "/" + rule_name(p->rule) + "[" + std::to_string(i) + "]");
    };

    switch (p->rule) {
      case Rule::Ax: {
        if (!expect_premises(0)) return;
        for (const auto& f : c.left.items())
          if (c.right.contains(f)) return;
        fail(path, "no left formula matches a right formula");
        return;
      }
      case Rule::BotL: {
        if (!expect_premises(0)) return;
        if (!c.left.contains(f_bot())) fail(path, "no falsum on the left");
        return;
      }
      case Rule::TopR: {
        if (!expect_premises(0)) return;
        if (!c.right.contains(f_top())) fail(path, "no truth on the right");
        return;
      }
      case Rule::SumDisjointSC: {
        if (!expect_premises(0)) return;
        if (!p->principal || !c.left.contains(p->principal) ||
            !is_disjoint_eq(p->principal))
          fail(path, "principal is not a left inl/inr equality");
        return;
      }
      case Rule::AndL: {
        const auto* a =
            p->principal ? std::get_if<AndF>(&p->principal->node) : nullptr;
        if (!a || !c.left.contains(p->principal)) {
          fail(path, "principal is not a left conjunction");
          return;
        }
        if (!expect_premises(1)) return;
        Sequent want{c.ctx,
                     c.left.without(p->principal).with(a->left).with(a->right),
                     c.right};
        premise_is(0, want);
        recurse();
        return;
      }
      case Rule::AndR: {
        const auto* a =
            p->principal ? std::get_if<AndF>(&p->principal->node) : nullptr;
        if (!a || !c.right.contains(p->principal)) {
          fail(path, "principal is not a right conjunction");
          return;
        }
        if (!expect_premises(2)) return;
        premise_is(0, {c.ctx, c.left,
                       c.right.without(p->principal).with(a->left)});
        premise_is(1, {c.ctx, c.left,
                       c.right.without(p->principal).with(a->right)});
        recurse();
        return;
      }
      case Rule::OrL: {
        const auto* a =
            p->principal ? std::get_if<OrF>(&p->principal->node) : nullptr;
        if (!a || !c.left.contains(p->principal)) {
          fail(path, "principal is not a left disjunction");
          return;
        }
        if (!expect_premises(2)) return;
        premise_is(0, {c.ctx, c.left.without(p->principal).with(a->left),
                       c.right});
        premise_is(1, {c.ctx, c.left.without(p->principal).with(a->right),
                       c.right});
        recurse();
        return;
      }
      case Rule::OrR: {
        const auto* a =
            p->principal ? std::get_if<OrF>(&p->principal->node) : nullptr;
        if (!a || !c.right.contains(p->principal)) {
          fail(path, "principal is not a right disjunction");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx, c.left,
                       c.right.without(p->principal).with(a->left).with(
                           a->right)});
        recurse();
        return;
      }
      case Rule::ImpliesL: {
        const auto* a = p->principal
                            ? std::get_if<ImpliesF>(&p->principal->node)
                            : nullptr;
        if (!a || !c.left.contains(p->principal)) {
          fail(path, "principal is not a left implication");
          return;
        }
        if (!expect_premises(2)) return;
        premise_is(0, {c.ctx, c.left.without(p->principal),
                       c.right.with(a->left)});
        premise_is(1, {c.ctx, c.left.without(p->principal).with(a->right),
                       c.right});
        recurse();
        return;
      }
      case Rule::ImpliesR: {
        const auto* a = p->principal
                            ? std::get_if<ImpliesF>(&p->principal->node)
                            : nullptr;
        if (!a || !c.right.contains(p->principal)) {
          fail(path, "principal is not a right implication");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx, c.left.with(a->left),
                       c.right.without(p->principal).with(a->right)});
        recurse();
        return;
      }
      case Rule::ForallL: {
        const auto* a =
            p->principal ? std::get_if<ForallF>(&p->principal->node) : nullptr;
        if (!a || !c.left.contains(p->principal)) {
          fail(path, "principal is not a left universal");
          return;
        }
        if (!p->witness) {
          fail(path, "missing instantiation witness");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx,
                       c.left.with(subst(a->body, a->binder, p->witness)),
                       c.right});
        recurse();
        return;
      }
      case Rule::ExistsR: {
        const auto* a =
            p->principal ? std::get_if<ExistsF>(&p->principal->node) : nullptr;
        if (!a || !c.right.contains(p->principal)) {
          fail(path, "principal is not a right existential");
          return;
        }
        if (!p->witness) {
          fail(path, "missing instantiation witness");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx, c.left,
                       c.right.with(subst(a->body, a->binder, p->witness))});
        recurse();
        return;
      }
      case Rule::ForallR:
      case Rule::ExistsL: {
        bool right = p->rule == Rule::ForallR;
        const FormulaPtr& pr = p->principal;
        Name binder;
        TypePtr qt;
        FormulaPtr body;
        if (right) {
          const auto* a = pr ? std::get_if<ForallF>(&pr->node) : nullptr;
          if (!a || !c.right.contains(pr)) {
            fail(path, "principal is not a right universal");
            return;
          }
          binder = a->binder;
          qt = a->type;
          body = a->body;
        } else {
          const auto* a = pr ? std::get_if<ExistsF>(&pr->node) : nullptr;
          if (!a || !c.left.contains(pr)) {
            fail(path, "principal is not a left existential");
            return;
          }
          binder = a->binder;
          qt = a->type;
          body = a->body;
        }
        if (p->eigen.empty()) {
          fail(path, "missing eigenvariable");
          return;
        }
        if (c.ctx.contains(p->eigen)) {
          fail(path, "eigenvariable shadows the context");
          return;
        }
        std::set<Name> fv = sequent_free_vars(c);
        if (fv.count(p->eigen)) {
          fail(path, "eigenvariable " + p->eigen + " occurs free");
          return;
        }
        if (!expect_premises(1)) return;
        FormulaPtr inst = subst(body, binder, v_var(p->eigen));
        Sequent want{c.ctx.extended(p->eigen, qt), c.left, c.right};
        if (right)
          want.right = c.right.without(pr).with(inst);
        else
          want.left = c.left.without(pr).with(inst);
        premise_is(0, want);
        recurse();
        return;
      }
      case Rule::ContractR: {
        if (!p->principal || !c.right.contains(p->principal)) {
          fail(path, "principal is not on the right");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, c);
        recurse();
        return;
      }
      case Rule::WitnessedWeakenSC: {
        const auto* wl = p->principal
                             ? std::get_if<WitnessedF>(&p->principal->node)
                             : nullptr;
        const auto* wr = p->principal2
                             ? std::get_if<WitnessedF>(&p->principal2->node)
                             : nullptr;
        if (!wl || !c.left.contains(p->principal)) {
          fail(path, "left principal is not a witnessed formula");
          return;
        }
        if (!wr || !c.right.contains(p->principal2)) {
          fail(path, "right principal is not a witnessed formula");
          return;
        }
        if (p->eigen.empty() || c.ctx.contains(p->eigen)) {
          fail(path, "bad eigenvariable");
          return;
        }
        FormulaSet lrest = c.left.without(p->principal);
        FormulaSet rrest = c.right.without(p->principal2);
        std::set<Name> fv;
        for (const auto& f : lrest.items()) collect_free_vars(f, fv);
        for (const auto& f : rrest.items()) collect_free_vars(f, fv);
        if (fv.count(p->eigen)) {
          fail(path, p->eigen + " ∈ FV(Φ)");
          return;
        }
        if (!expect_premises(1)) return;
        ValuePtr ev = v_var(p->eigen);
        Sequent want{c.ctx.extended(p->eigen, type_state()),
                     lrest.with(apply_pred(wl->pred, ev)),
                     rrest.with(apply_pred(wr->pred, ev))};
        premise_is(0, want);
        recurse();
        return;
      }
      case Rule::EqReflSC: {
        auto eq = p->produced ? as_eq(p->produced) : std::nullopt;
        if (!eq || !alpha_eq(eq->lhs, eq->rhs)) {
          fail(path, "produced formula is not a reflexive equality");
          return;
        }
        auto t = simple_value_type(c.ctx, eq->lhs);
        if (!t || !alpha_eq(*t, eq->type)) {
          fail(path, "equality subject is ill-typed");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx, c.left.with(p->produced), c.right});
        recurse();
        return;
      }
      case Rule::RelReflSC: {
        auto r = p->produced ? as_rel(p->produced) : std::nullopt;
        if (!r || !alpha_eq(r->first, r->second)) {
          fail(path, "produced formula is not a reflexive rel atom");
          return;
        }
        auto t = simple_value_type(c.ctx, r->first);
        if (!t || !alpha_eq(*t, type_state())) {
          fail(path, "rel subject is not state-typed");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx, c.left.with(p->produced), c.right});
        recurse();
        return;
      }
      case Rule::RelTransSC: {
        auto r1 = p->principal ? as_rel(p->principal) : std::nullopt;
        auto r2 = p->principal2 ? as_rel(p->principal2) : std::nullopt;
        auto r3 = p->produced ? as_rel(p->produced) : std::nullopt;
        if (!r1 || !r2 || !r3 || !c.left.contains(p->principal) ||
            !c.left.contains(p->principal2)) {
          fail(path, "principals are not left rel atoms");
          return;
        }
        if (!alpha_eq(r1->second, r2->first) ||
            !alpha_eq(r3->first, r1->first) ||
            !alpha_eq(r3->second, r2->second)) {
          fail(path, "rel atoms do not chain");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx, c.left.with(p->produced), c.right});
        recurse();
        return;
      }
      case Rule::EqTransportSC: {
        auto eq = p->principal ? as_eq(p->principal) : std::nullopt;
        if (!eq || !c.left.contains(p->principal)) {
          fail(path, "principal is not a left equality");
          return;
        }
        if (!p->principal2 || !c.left.contains(p->principal2) ||
            !std::holds_alternative<Atom>(p->principal2->node)) {
          fail(path, "transport source is not a left atomic formula");
          return;
        }
        if (!p->produced ||
            !std::holds_alternative<Atom>(p->produced->node)) {
          fail(path, "transport result is not atomic");
          return;
        }
        if (!atom_replace_match(p->principal2, p->produced, eq->lhs,
                                eq->rhs) &&
            !atom_replace_match(p->principal2, p->produced, eq->rhs,
                                eq->lhs)) {
          fail(path, "transport result does not match the source");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx, c.left.with(p->produced), c.right});
        recurse();
        return;
      }
      case Rule::PairInjectiveSC: {
        auto eq = p->principal ? as_eq(p->principal) : std::nullopt;
        if (!eq || !c.left.contains(p->principal)) {
          fail(path, "principal is not a left equality");
          return;
        }
        const auto* lp = std::get_if<PairVal>(&eq->lhs->node);
        const auto* rp = std::get_if<PairVal>(&eq->rhs->node);
        const auto* pt = std::get_if<ProdTy>(&eq->type->node);
        if (!lp || !rp || !pt) {
          fail(path, "principal is not a pair equality at product type");
          return;
        }
        if (!expect_premises(1)) return;
        premise_is(0, {c.ctx,
                       c.left.with(f_eq(pt->left, lp->first, rp->first))
                           .with(f_eq(pt->right, lp->second, rp->second)),
                       c.right});
        recurse();
        return;
      }
      case Rule::BoolSplitSC: {
        if (!p->split_term) {
          fail(path, "missing split term");
          return;
        }
        auto t = simple_value_type(c.ctx, p->split_term);
        if (!t || !alpha_eq(*t, type_bool())) {
          fail(path, "split subject is not boolean");
          return;
        }
        if (!expect_premises(2)) return;
        premise_is(0, {c.ctx,
                       c.left.with(f_eq(type_bool(), p->split_term, v_true())),
                       c.right});
        premise_is(1, {c.ctx,
                       c.left.with(f_eq(type_bool(), p->split_term,
                                        v_false())),
                       c.right});
        recurse();
        return;
      }
    }
    fail(path, "unknown rule");
  }
};

}  // namespace

CheckResult check_proof(const ProofPtr& p) {
  Checker ch;
  ch.check(p, "root");
  return ch.result;
}

// ---------------------------------------------------------------------------
// Metatheory constructions.

FormulaPtr stable_formula(const Predicate& pred) {
  std::set<Name> avoid = free_vars(pred);
  avoid.insert(pred.binder);
  Name s1 = fresh_name("s'", avoid);
  avoid.insert(s1);
  Name s2 = fresh_name("s''", avoid);
  FormulaPtr phi1 = apply_pred(pred, v_var(s1));
  FormulaPtr phi2 = apply_pred(pred, v_var(s2));
  return f_forall(
      s1, type_state(),
      f_forall(s2, type_state(),
               f_implies(f_and(f_rel(v_var(s1), v_var(s2)), phi1), phi2)));
}

FormulaPtr witnessed_conj(const std::vector<Predicate>& preds) {
  std::set<Name> avoid;
  for (const auto& p : preds) collect_free_vars(p, avoid);
  Name s = fresh_name("s'", avoid);
  std::vector<FormulaPtr> parts;
  parts.reserve(preds.size());
  for (const auto& p : preds) parts.push_back(apply_pred(p, v_var(s)));
  return f_witnessed(Predicate{s, f_and_all(parts)});
}

// ---------------------------------------------------------------------------
// Cut admissibility probe.

bool cut_elim_check(const Sequent& left_premise, const Sequent& right_premise,
                    const FormulaPtr& cut_formula, std::size_t depth,
                    const ProverOptions& base) {
  if (!left_premise.right.contains(cut_formula))
    throw std::invalid_argument(
        "left premise does not carry the cut formula on the right");
  if (!right_premise.left.contains(cut_formula))
    throw std::invalid_argument(
        "right premise does not carry the cut formula on the left");
  ProverOptions opts = base;
  opts.max_depth = depth;
  if (!proved(sc_prove(left_premise, opts)))
    throw std::invalid_argument("left cut premise is not provable");
  if (!proved(sc_prove(right_premise, opts)))
    throw std::invalid_argument("right cut premise is not provable");

  Sequent conclusion;
  conclusion.ctx = left_premise.ctx;
  conclusion.left = left_premise.left;
  for (const auto& f : right_premise.left.items())
    if (!alpha_eq(f, cut_formula)) conclusion.left.insert(f);
  conclusion.right = left_premise.right.without(cut_formula);
  for (const auto& f : right_premise.right.items())
    conclusion.right.insert(f);

  ProverOptions wide = base;
  wide.max_depth = 2 * depth;
  return proved(sc_prove(conclusion, wide));
}

// ---------------------------------------------------------------------------
// Witnessed inversion.

namespace {

Context rename_ctx(const Context& ctx, const Name& from, const Name& to) {
  Context out;
  for (const auto& [n, t] : ctx.bindings)
    out.bindings.emplace_back(n == from ? to : n, t);
  return out;
}

// Renames a (fresh) variable throughout a proof tree.
ProofPtr proof_rename(const ProofPtr& p, const Name& from, const Name& to) {
  auto pr = std::make_shared<Proof>(*p);
  ValuePtr tv = v_var(to);
  pr->conclusion.ctx = rename_ctx(p->conclusion.ctx, from, to);
  FormulaSet l, r;
  for (const auto& f : p->conclusion.left.items())
    l.insert(subst(f, from, tv));
  for (const auto& f : p->conclusion.right.items())
    r.insert(subst(f, from, tv));
  pr->conclusion.left = l;
  pr->conclusion.right = r;
  if (pr->principal) pr->principal = subst(pr->principal, from, tv);
  if (pr->principal2) pr->principal2 = subst(pr->principal2, from, tv);
  if (pr->produced) pr->produced = subst(pr->produced, from, tv);
  if (pr->witness) pr->witness = subst(pr->witness, from, tv);
  if (pr->split_term) pr->split_term = subst(pr->split_term, from, tv);
  if (pr->eigen == from) pr->eigen = to;
  std::vector<ProofPtr> prem;
  prem.reserve(p->premises.size());
  for (const auto& q : p->premises)
    prem.push_back(proof_rename(q, from, to));
  pr->premises = std::move(prem);
  return pr;
}

struct Inverter {
  Name opened;  // the state variable both predicates are opened at

  // Transforms a proof of ctx | atoms, witnessed(s.phi) |- witnessed(t.psi)
  // into one of ctx, opened:state | atoms, phi[opened] |- psi[opened].
  ProofPtr invert(const ProofPtr& p) {
    const Sequent& c = p->conclusion;
    FormulaPtr lw, rw;
    for (const auto& f : c.left.items())
      if (std::holds_alternative<WitnessedF>(f->node)) lw = f;
    for (const auto& f : c.right.items())
      if (std::holds_alternative<WitnessedF>(f->node)) rw = f;
    if (!lw || !rw || c.right.size() != 1)
      throw std::invalid_argument(
          "inversion: sequent lost its witnessed shape at " + pretty(c));

    auto transformed = [&](const Sequent& s) {
      Sequent out;
      out.ctx = s.ctx.extended(opened, type_state());
      ValuePtr ov = v_var(opened);
      for (const auto& f : s.left.items()) {
        if (alpha_eq(f, lw))
          out.left.insert(
              apply_pred(std::get<WitnessedF>(lw->node).pred, ov));
        else
          out.left.insert(f);
      }
      out.right.insert(apply_pred(std::get<WitnessedF>(rw->node).pred, ov));
      return out;
    };

    switch (p->rule) {
      case Rule::WitnessedWeakenSC: {
        // The premise is exactly the target, at the node's own eigenvariable.
        ProofPtr sub = p->premises[0];
        if (p->eigen != opened) sub = proof_rename(sub, p->eigen, opened);
        return sub;
      }
      case Rule::Ax: {
        // Only the witnessed pair can match (the right side is a singleton
        // witnessed formula), so the opened bodies match too.
        auto node = std::make_shared<Proof>();
        node->rule = Rule::Ax;
        node->conclusion = transformed(c);
        return node;
      }
      case Rule::SumDisjointSC: {
        auto node = std::make_shared<Proof>(*p);
        node->conclusion = transformed(c);
        node->premises.clear();
        return node;
      }
      case Rule::EqReflSC:
      case Rule::RelReflSC:
      case Rule::RelTransSC:
      case Rule::EqTransportSC:
      case Rule::PairInjectiveSC:
      case Rule::BoolSplitSC: {
        auto node = std::make_shared<Proof>(*p);
        node->conclusion = transformed(c);
        std::vector<ProofPtr> prem;
        for (const auto& q : p->premises) prem.push_back(invert(q));
        node->premises = std::move(prem);
        return node;
      }
      case Rule::ContractR: {
        return invert(p->premises[0]);
      }
      default:
        throw std::invalid_argument(
            std::string("inversion: unexpected rule ") + rule_name(p->rule) +
            " (is the left side atomic?)");
    }
  }
};

}  // namespace

ProofPtr witnessed_inversion(const ProofPtr& p) {
  if (!p) throw std::invalid_argument("inversion: null proof");
  const Sequent& c = p->conclusion;
  FormulaPtr lw;
  for (const auto& f : c.left.items()) {
    if (std::holds_alternative<WitnessedF>(f->node)) {
      if (lw)
        throw std::invalid_argument(
            "inversion: multiple witnessed formulas on the left");
      lw = f;
    } else if (!std::holds_alternative<Atom>(f->node)) {
      throw std::invalid_argument(
          "inversion: left side contains a non-atomic formula: " +
          mst::pretty(f));
    }
  }
  if (!lw)
    throw std::invalid_argument("inversion: no witnessed formula on the left");
  if (c.right.size() != 1 ||
      !std::holds_alternative<WitnessedF>(c.right.items()[0]->node))
    throw std::invalid_argument(
        "inversion: right side is not a single witnessed formula");
  auto cr = check_proof(p);
  if (!cr.ok)
    throw std::invalid_argument("inversion: input proof is invalid: " +
                                cr.diagnostic);

  std::set<Name> avoid = sequent_free_vars(c);
  for (const auto& [n, t] : c.ctx.bindings) avoid.insert(n);
  Name opened =
      fresh_name(std::get<WitnessedF>(lw->node).pred.binder, avoid);
  Inverter inv{opened};
  return inv.invert(p);
}

}  // namespace mst::logic
