#include "mst/ast.hpp"

#include <cassert>
#include <stdexcept>

namespace mst {

// ---------------------------------------------------------------------------
// Constructors.

TypePtr type_state() {
  static const TypePtr t = std::make_shared<ValueType>(ValueType{StateTy{}});
  return t;
}
TypePtr type_unit() {
  static const TypePtr t = std::make_shared<ValueType>(ValueType{UnitTy{}});
  return t;
}
TypePtr type_prod(TypePtr a, TypePtr b) {
  return std::make_shared<ValueType>(
      ValueType{ProdTy{std::move(a), std::move(b)}});
}
TypePtr type_sum(TypePtr a, TypePtr b) {
  return std::make_shared<ValueType>(
      ValueType{SumTy{std::move(a), std::move(b)}});
}
TypePtr type_bool() {
  static const TypePtr t = type_sum(type_unit(), type_unit());
  return t;
}
TypePtr type_arrow(Name binder, TypePtr domain, CompTypePtr codomain) {
  return std::make_shared<ValueType>(ValueType{
      DepArrowTy{std::move(binder), std::move(domain), std::move(codomain)}});
}

CompTypePtr comp_mst(ValuePtr index, TypePtr result, Name s, FormulaPtr pre,
                     Name ps, Name px, Name pf, FormulaPtr post) {
  return std::make_shared<CompType>(CompType{
      MstTy{std::move(index), std::move(result), std::move(s), std::move(pre),
            std::move(ps), std::move(px), std::move(pf), std::move(post)}});
}
CompTypePtr comp_pure(TypePtr result, FormulaPtr pre, Name y,
                      FormulaPtr post) {
  return std::make_shared<CompType>(CompType{PureTy{
      std::move(result), std::move(pre), std::move(y), std::move(post)}});
}

ValuePtr v_var(Name n) {
  return std::make_shared<ValueTerm>(ValueTerm{Var{std::move(n)}});
}
ValuePtr v_const(Name n) {
  return std::make_shared<ValueTerm>(ValueTerm{StateConst{std::move(n)}});
}
ValuePtr v_unit() {
  static const ValuePtr v = std::make_shared<ValueTerm>(ValueTerm{UnitVal{}});
  return v;
}
ValuePtr v_pair(ValuePtr a, ValuePtr b) {
  return std::make_shared<ValueTerm>(
      ValueTerm{PairVal{std::move(a), std::move(b)}});
}
ValuePtr v_inl(ValuePtr v, TypePtr right_type) {
  return std::make_shared<ValueTerm>(
      ValueTerm{InlVal{std::move(v), std::move(right_type)}});
}
ValuePtr v_inr(ValuePtr v, TypePtr left_type) {
  return std::make_shared<ValueTerm>(
      ValueTerm{InrVal{std::move(v), std::move(left_type)}});
}
ValuePtr v_lambda(Name binder, TypePtr domain, CompPtr body) {
  return std::make_shared<ValueTerm>(ValueTerm{
      LambdaVal{std::move(binder), std::move(domain), std::move(body)}});
}
ValuePtr v_reify(CompPtr body) {
  return std::make_shared<ValueTerm>(ValueTerm{ReifyVal{std::move(body)}});
}
ValuePtr v_prim(Name prim, ValuePtr arg) {
  return std::make_shared<ValueTerm>(
      ValueTerm{PrimApp{std::move(prim), std::move(arg)}});
}
ValuePtr v_true() {
  static const ValuePtr v = v_inl(v_unit(), type_unit());
  return v;
}
ValuePtr v_false() {
  static const ValuePtr v = v_inr(v_unit(), type_unit());
  return v;
}
bool is_true(const ValuePtr& v) { return alpha_eq(v, v_true()); }
bool is_false(const ValuePtr& v) { return alpha_eq(v, v_false()); }

template <typename N>
static CompPtr mk_comp(N n, Pos pos) {
  return std::make_shared<CompTerm>(CompTerm{std::move(n), pos});
}

CompPtr c_return(ValuePtr index, ValuePtr v, Pos pos) {
  return mk_comp(Return{std::move(index), std::move(v)}, pos);
}
CompPtr c_pure_return(ValuePtr v, Pos pos) {
  return mk_comp(PureReturn{std::move(v)}, pos);
}
CompPtr c_bind(Name binder, CompPtr first, CompPtr rest, Pos pos) {
  return mk_comp(Bind{std::move(binder), std::move(first), std::move(rest)},
                 pos);
}
CompPtr c_app(ValuePtr fn, ValuePtr arg, Pos pos) {
  return mk_comp(Apply{std::move(fn), std::move(arg)}, pos);
}
CompPtr c_pmatch(ValuePtr v, Name x1, Name x2, CompPtr body, Pos pos) {
  return mk_comp(
      PMatch{std::move(v), std::move(x1), std::move(x2), std::move(body)},
      pos);
}
CompPtr c_case(ValuePtr v, Name xl, CompPtr el, Name xr, CompPtr er, Pos pos) {
  return mk_comp(Case{std::move(v), std::move(xl), std::move(el),
                      std::move(xr), std::move(er)},
                 pos);
}
CompPtr c_get(ValuePtr index, Pos pos) {
  return mk_comp(Get{std::move(index)}, pos);
}
CompPtr c_put(ValuePtr index, ValuePtr state, Pos pos) {
  return mk_comp(Put{std::move(index), std::move(state)}, pos);
}
CompPtr c_witness(ValuePtr index, Predicate pred, Pos pos) {
  return mk_comp(Witness{std::move(index), std::move(pred)}, pos);
}
CompPtr c_recall(ValuePtr index, Predicate pred, Pos pos) {
  return mk_comp(Recall{std::move(index), std::move(pred)}, pos);
}
CompPtr c_reflect(ValuePtr fn, Pos pos) {
  return mk_comp(Reflect{std::move(fn)}, pos);
}
CompPtr c_coerce(CompPtr body, Pos pos) {
  return mk_comp(Coerce{std::move(body)}, pos);
}

FormulaPtr f_atom(AtomHead head, std::vector<ValuePtr> args) {
  if (args.size() != 2) throw std::invalid_argument("atoms are binary");
  if (head.kind == AtomHead::Kind::Eq && !head.eq_type)
    throw std::invalid_argument("equality atom requires a type");
  return std::make_shared<Formula>(
      Formula{Atom{std::move(head), std::move(args)}});
}
FormulaPtr f_rel(ValuePtr a, ValuePtr b) {
  return f_atom(AtomHead{AtomHead::Kind::Rel, nullptr},
                {std::move(a), std::move(b)});
}
FormulaPtr f_eq(TypePtr at, ValuePtr a, ValuePtr b) {
  return f_atom(AtomHead{AtomHead::Kind::Eq, std::move(at)},
                {std::move(a), std::move(b)});
}
FormulaPtr f_top() {
  static const FormulaPtr f = std::make_shared<Formula>(Formula{TopF{}});
  return f;
}
FormulaPtr f_bot() {
  static const FormulaPtr f = std::make_shared<Formula>(Formula{BotF{}});
  return f;
}
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<Formula>(Formula{AndF{std::move(a), std::move(b)}});
}
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<Formula>(Formula{OrF{std::move(a), std::move(b)}});
}
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<Formula>(
      Formula{ImpliesF{std::move(a), std::move(b)}});
}
FormulaPtr f_forall(Name binder, TypePtr t, FormulaPtr body) {
  return std::make_shared<Formula>(
      Formula{ForallF{std::move(binder), std::move(t), std::move(body)}});
}
FormulaPtr f_exists(Name binder, TypePtr t, FormulaPtr body) {
  return std::make_shared<Formula>(
      Formula{ExistsF{std::move(binder), std::move(t), std::move(body)}});
}
FormulaPtr f_witnessed(Predicate pred) {
  return std::make_shared<Formula>(Formula{WitnessedF{std::move(pred)}});
}

FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return f_top();
  FormulaPtr acc = fs.back();
  for (auto it = fs.rbegin() + 1; it != fs.rend(); ++it)
    acc = f_and(*it, acc);
  return acc;
}

// ---------------------------------------------------------------------------
// Free variables.

namespace {

void fv_type(const TypePtr& t, std::set<Name>& bound, std::set<Name>& out);
void fv_comp_type(const CompTypePtr& c, std::set<Name>& bound,
                  std::set<Name>& out);
void fv_value(const ValuePtr& v, std::set<Name>& bound, std::set<Name>& out);
void fv_comp(const CompPtr& e, std::set<Name>& bound, std::set<Name>& out);
void fv_formula(const FormulaPtr& f, std::set<Name>& bound,
                std::set<Name>& out);

struct ScopedBind {
  std::set<Name>& bound;
  Name name;
  bool added;
  ScopedBind(std::set<Name>& b, const Name& n) : bound(b), name(n) {
    added = bound.insert(n).second;
  }
  ~ScopedBind() {
    if (added) bound.erase(name);
  }
};

void fv_pred(const Predicate& p, std::set<Name>& bound, std::set<Name>& out) {
  ScopedBind sb(bound, p.binder);
  fv_formula(p.body, bound, out);
}

void fv_type(const TypePtr& t, std::set<Name>& bound, std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const StateTy&) {},
                 [&](const UnitTy&) {},
                 [&](const ProdTy& p) {
                   fv_type(p.left, bound, out);
                   fv_type(p.right, bound, out);
                 },
                 [&](const SumTy& s) {
                   fv_type(s.left, bound, out);
                   fv_type(s.right, bound, out);
                 },
                 [&](const DepArrowTy& a) {
                   fv_type(a.domain, bound, out);
                   ScopedBind sb(bound, a.binder);
                   fv_comp_type(a.codomain, bound, out);
                 },
             },
             t->node);
}

void fv_comp_type(const CompTypePtr& c, std::set<Name>& bound,
                  std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const MstTy& m) {
                   fv_value(m.index, bound, out);
                   fv_type(m.result, bound, out);
                   {
                     ScopedBind sb(bound, m.pre_binder);
                     fv_formula(m.pre, bound, out);
                   }
                   ScopedBind s1(bound, m.post_initial);
                   ScopedBind s2(bound, m.post_result);
                   ScopedBind s3(bound, m.post_final);
                   fv_formula(m.post, bound, out);
                 },
                 [&](const PureTy& p) {
                   fv_type(p.result, bound, out);
                   fv_formula(p.pre, bound, out);
                   ScopedBind sb(bound, p.post_binder);
                   fv_formula(p.post, bound, out);
                 },
             },
             c->node);
}

void fv_value(const ValuePtr& v, std::set<Name>& bound, std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const Var& x) {
                   if (!bound.count(x.name)) out.insert(x.name);
                 },
                 [&](const StateConst&) {},
                 [&](const UnitVal&) {},
                 [&](const PairVal& p) {
                   fv_value(p.first, bound, out);
                   fv_value(p.second, bound, out);
                 },
                 [&](const InlVal& i) {
                   fv_value(i.value, bound, out);
                   fv_type(i.right_type, bound, out);
                 },
                 [&](const InrVal& i) {
                   fv_value(i.value, bound, out);
                   fv_type(i.left_type, bound, out);
                 },
                 [&](const LambdaVal& l) {
                   fv_type(l.domain, bound, out);
                   ScopedBind sb(bound, l.binder);
                   fv_comp(l.body, bound, out);
                 },
                 [&](const ReifyVal& r) { fv_comp(r.body, bound, out); },
                 [&](const PrimApp& p) { fv_value(p.arg, bound, out); },
             },
             v->node);
}

void fv_comp(const CompPtr& e, std::set<Name>& bound, std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const Return& r) {
                   fv_value(r.index, bound, out);
                   fv_value(r.value, bound, out);
                 },
                 [&](const PureReturn& r) { fv_value(r.value, bound, out); },
                 [&](const Bind& b) {
                   fv_comp(b.first, bound, out);
                   ScopedBind sb(bound, b.binder);
                   fv_comp(b.rest, bound, out);
                 },
                 [&](const Apply& a) {
                   fv_value(a.fn, bound, out);
                   fv_value(a.arg, bound, out);
                 },
                 [&](const PMatch& p) {
                   fv_value(p.scrutinee, bound, out);
                   ScopedBind s1(bound, p.fst_binder);
                   ScopedBind s2(bound, p.snd_binder);
                   fv_comp(p.body, bound, out);
                 },
                 [&](const Case& c) {
                   fv_value(c.scrutinee, bound, out);
                   {
                     ScopedBind sb(bound, c.left_binder);
                     fv_comp(c.left, bound, out);
                   }
                   ScopedBind sb(bound, c.right_binder);
                   fv_comp(c.right, bound, out);
                 },
                 [&](const Get& g) { fv_value(g.index, bound, out); },
                 [&](const Put& p) {
                   fv_value(p.index, bound, out);
                   fv_value(p.state, bound, out);
                 },
                 [&](const Witness& w) {
                   fv_value(w.index, bound, out);
                   fv_pred(w.pred, bound, out);
                 },
                 [&](const Recall& r) {
                   fv_value(r.index, bound, out);
                   fv_pred(r.pred, bound, out);
                 },
                 [&](const Reflect& r) { fv_value(r.fn, bound, out); },
                 [&](const Coerce& c) { fv_comp(c.body, bound, out); },
             },
             e->node);
}

void fv_formula(const FormulaPtr& f, std::set<Name>& bound,
                std::set<Name>& out) {
  std::visit(overloaded{
                 [&](const Atom& a) {
                   for (const auto& v : a.args) fv_value(v, bound, out);
                   if (a.head.eq_type) fv_type(a.head.eq_type, bound, out);
                 },
                 [&](const TopF&) {},
                 [&](const BotF&) {},
                 [&](const AndF& c) {
                   fv_formula(c.left, bound, out);
                   fv_formula(c.right, bound, out);
                 },
                 [&](const OrF& c) {
                   fv_formula(c.left, bound, out);
                   fv_formula(c.right, bound, out);
                 },
                 [&](const ImpliesF& c) {
                   fv_formula(c.left, bound, out);
                   fv_formula(c.right, bound, out);
                 },
                 [&](const ForallF& q) {
                   fv_type(q.type, bound, out);
                   ScopedBind sb(bound, q.binder);
                   fv_formula(q.body, bound, out);
                 },
                 [&](const ExistsF& q) {
                   fv_type(q.type, bound, out);
                   ScopedBind sb(bound, q.binder);
                   fv_formula(q.body, bound, out);
                 },
                 [&](const WitnessedF& w) { fv_pred(w.pred, bound, out); },
             },
             f->node);
}

}  // namespace

void collect_free_vars(const TypePtr& t, std::set<Name>& out) {
  std::set<Name> bound;
  fv_type(t, bound, out);
}
void collect_free_vars(const CompTypePtr& c, std::set<Name>& out) {
  std::set<Name> bound;
  fv_comp_type(c, bound, out);
}
void collect_free_vars(const ValuePtr& v, std::set<Name>& out) {
  std::set<Name> bound;
  fv_value(v, bound, out);
}
void collect_free_vars(const CompPtr& e, std::set<Name>& out) {
  std::set<Name> bound;
  fv_comp(e, bound, out);
}
void collect_free_vars(const FormulaPtr& f, std::set<Name>& out) {
  std::set<Name> bound;
  fv_formula(f, bound, out);
}
void collect_free_vars(const Predicate& p, std::set<Name>& out) {
  std::set<Name> bound;
  fv_pred(p, bound, out);
}

Name fresh_name(const Name& base, const std::set<Name>& avoid) {
  if (!avoid.count(base)) return base;
  for (int primes = 1; primes <= 3; ++primes) {
    Name cand = base + std::string(primes, '\'');
    if (!avoid.count(cand)) return cand;
  }
  for (int i = 0;; ++i) {
    Name cand = base + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

// ---------------------------------------------------------------------------
// Substitution.

namespace {

struct Subst {
  const Name& var;
  const ValuePtr& repl;
  std::set<Name> repl_fv;

  Subst(const Name& v, const ValuePtr& r) : var(v), repl(r) {
    collect_free_vars(r, repl_fv);
  }

  // Decides what to do at a binder: stop (shadowed), keep the name, or
  // rename it to avoid capturing a free variable of the replacement.
  // `rename` receives the fresh name and must rebuild the sub-body with the
  // binder alpha-renamed before the recursive substitution continues.
  bool shadowed(const Name& binder) const { return binder == var; }
  bool must_rename(const Name& binder) const {
    return repl_fv.count(binder) > 0;
  }
  Name pick_fresh(const Name& binder, const std::set<Name>& body_fv) const {
    std::set<Name> avoid = repl_fv;
    avoid.insert(body_fv.begin(), body_fv.end());
    avoid.insert(var);
    avoid.insert(binder);
    return fresh_name(binder, avoid);
  }

  TypePtr type(const TypePtr& t) const;
  CompTypePtr comp_type(const CompTypePtr& c) const;
  ValuePtr value(const ValuePtr& v) const;
  CompPtr comp(const CompPtr& e) const;
  FormulaPtr formula(const FormulaPtr& f) const;
  Predicate pred(const Predicate& p) const;
};

CompPtr rename_var(const CompPtr& body, const Name& from, const Name& to) {
  return subst(body, from, v_var(to));
}
FormulaPtr rename_var(const FormulaPtr& body, const Name& from,
                      const Name& to) {
  return subst(body, from, v_var(to));
}
CompTypePtr rename_var(const CompTypePtr& body, const Name& from,
                       const Name& to) {
  return subst(body, from, v_var(to));
}

// Handles one binder guarding one body of kind B.
template <typename B>
std::pair<Name, B> subst_under(const Subst& s, const Name& binder,
                               const B& body) {
  if (s.shadowed(binder)) return {binder, body};
  if (s.must_rename(binder)) {
    std::set<Name> body_fv;
    collect_free_vars(body, body_fv);
    if (!body_fv.count(s.var)) return {binder, body};  // var not free: no-op
    Name nb = s.pick_fresh(binder, body_fv);
    B renamed = rename_var(body, binder, nb);
    return {nb, [&] {
              if constexpr (std::is_same_v<B, ValuePtr>)
                return s.value(renamed);
              else if constexpr (std::is_same_v<B, CompPtr>)
                return s.comp(renamed);
              else if constexpr (std::is_same_v<B, FormulaPtr>)
                return s.formula(renamed);
              else
                return s.comp_type(renamed);
            }()};
  }
  if constexpr (std::is_same_v<B, ValuePtr>)
    return {binder, s.value(body)};
  else if constexpr (std::is_same_v<B, CompPtr>)
    return {binder, s.comp(body)};
  else if constexpr (std::is_same_v<B, FormulaPtr>)
    return {binder, s.formula(body)};
  else
    return {binder, s.comp_type(body)};
}

TypePtr Subst::type(const TypePtr& t) const {
  return std::visit(
      overloaded{
          [&](const StateTy&) { return t; },
          [&](const UnitTy&) { return t; },
          [&](const ProdTy& p) { return type_prod(type(p.left), type(p.right)); },
          [&](const SumTy& sm) {
            return type_sum(type(sm.left), type(sm.right));
          },
          [&](const DepArrowTy& a) {
            auto [nb, cod] = subst_under(*this, a.binder, a.codomain);
            return type_arrow(nb, type(a.domain), cod);
          },
      },
      t->node);
}

CompTypePtr Subst::comp_type(const CompTypePtr& c) const {
  return std::visit(
      overloaded{
          [&](const MstTy& m) {
            auto [preb, pre] = subst_under(*this, m.pre_binder, m.pre);
            // The three post binders scope jointly; rename each that
            // collides, one at a time.
            Name b1 = m.post_initial, b2 = m.post_result, b3 = m.post_final;
            FormulaPtr post = m.post;
            bool shad = (b1 == var || b2 == var || b3 == var);
            if (!shad) {
              std::set<Name> body_fv;
              collect_free_vars(post, body_fv);
              if (body_fv.count(var)) {
                auto fix = [&](Name& b) {
                  if (repl_fv.count(b)) {
                    std::set<Name> fvnow;
                    collect_free_vars(post, fvnow);
                    fvnow.insert(b1);
                    fvnow.insert(b2);
                    fvnow.insert(b3);
                    Name nb = pick_fresh(b, fvnow);
                    post = rename_var(post, b, nb);
                    b = nb;
                  }
                };
                fix(b1);
                fix(b2);
                fix(b3);
                post = formula(post);
              }
            }
            return comp_mst(value(m.index), type(m.result), preb, pre, b1, b2,
                            b3, post);
          },
          [&](const PureTy& p) {
            auto [pb, post] = subst_under(*this, p.post_binder, p.post);
            return comp_pure(type(p.result), formula(p.pre), pb, post);
          },
      },
      c->node);
}

ValuePtr Subst::value(const ValuePtr& v) const {
  return std::visit(
      overloaded{
          [&](const Var& x) { return x.name == var ? repl : v; },
          [&](const StateConst&) { return v; },
          [&](const UnitVal&) { return v; },
          [&](const PairVal& p) {
            return v_pair(value(p.first), value(p.second));
          },
          [&](const InlVal& i) {
            return v_inl(value(i.value), type(i.right_type));
          },
          [&](const InrVal& i) {
            return v_inr(value(i.value), type(i.left_type));
          },
          [&](const LambdaVal& l) {
            auto [nb, body] = subst_under(*this, l.binder, l.body);
            return v_lambda(nb, type(l.domain), body);
          },
          [&](const ReifyVal& r) { return v_reify(comp(r.body)); },
          [&](const PrimApp& p) { return v_prim(p.prim, value(p.arg)); },
      },
      v->node);
}

CompPtr Subst::comp(const CompPtr& e) const {
  Pos pos = e->pos;
  return std::visit(
      overloaded{
          [&](const Return& r) {
            return c_return(value(r.index), value(r.value), pos);
          },
          [&](const PureReturn& r) {
            return c_pure_return(value(r.value), pos);
          },
          [&](const Bind& b) {
            auto [nb, rest] = subst_under(*this, b.binder, b.rest);
            return c_bind(nb, comp(b.first), rest, pos);
          },
          [&](const Apply& a) { return c_app(value(a.fn), value(a.arg), pos); },
          [&](const PMatch& p) {
            Name b1 = p.fst_binder, b2 = p.snd_binder;
            CompPtr body = p.body;
            if (b1 != var && b2 != var) {
              std::set<Name> body_fv;
              collect_free_vars(body, body_fv);
              if (body_fv.count(var)) {
                auto fix = [&](Name& b) {
                  if (repl_fv.count(b)) {
                    std::set<Name> fvnow;
                    collect_free_vars(body, fvnow);
                    fvnow.insert(b1);
                    fvnow.insert(b2);
                    Name nb = pick_fresh(b, fvnow);
                    body = rename_var(body, b, nb);
                    b = nb;
                  }
                };
                fix(b1);
                fix(b2);
                body = comp(body);
              }
            }
            return c_pmatch(value(p.scrutinee), b1, b2, body, pos);
          },
          [&](const Case& c) {
            auto [lb, left] = subst_under(*this, c.left_binder, c.left);
            auto [rb, right] = subst_under(*this, c.right_binder, c.right);
            return c_case(value(c.scrutinee), lb, left, rb, right, pos);
          },
          [&](const Get& g) { return c_get(value(g.index), pos); },
          [&](const Put& p) {
            return c_put(value(p.index), value(p.state), pos);
          },
          [&](const Witness& w) {
            return c_witness(value(w.index), pred(w.pred), pos);
          },
          [&](const Recall& r) {
            return c_recall(value(r.index), pred(r.pred), pos);
          },
          [&](const Reflect& r) { return c_reflect(value(r.fn), pos); },
          [&](const Coerce& c) { return c_coerce(comp(c.body), pos); },
      },
      e->node);
}

FormulaPtr Subst::formula(const FormulaPtr& f) const {
  return std::visit(
      overloaded{
          [&](const Atom& a) {
            std::vector<ValuePtr> args;
            args.reserve(a.args.size());
            for (const auto& x : a.args) args.push_back(value(x));
            AtomHead head = a.head;
            if (head.eq_type) head.eq_type = type(head.eq_type);
            return f_atom(head, std::move(args));
          },
          [&](const TopF&) { return f; },
          [&](const BotF&) { return f; },
          [&](const AndF& c) { return f_and(formula(c.left), formula(c.right)); },
          [&](const OrF& c) { return f_or(formula(c.left), formula(c.right)); },
          [&](const ImpliesF& c) {
            return f_implies(formula(c.left), formula(c.right));
          },
          [&](const ForallF& q) {
            auto [nb, body] = subst_under(*this, q.binder, q.body);
            return f_forall(nb, type(q.type), body);
          },
          [&](const ExistsF& q) {
            auto [nb, body] = subst_under(*this, q.binder, q.body);
            return f_exists(nb, type(q.type), body);
          },
          [&](const WitnessedF& w) { return f_witnessed(pred(w.pred)); },
      },
      f->node);
}

Predicate Subst::pred(const Predicate& p) const {
  auto [nb, body] = subst_under(*this, p.binder, p.body);
  return Predicate{nb, body};
}

}  // namespace

TypePtr subst(const TypePtr& t, const Name& var, const ValuePtr& r) {
  return Subst(var, r).type(t);
}
CompTypePtr subst(const CompTypePtr& c, const Name& var, const ValuePtr& r) {
  return Subst(var, r).comp_type(c);
}
ValuePtr subst(const ValuePtr& v, const Name& var, const ValuePtr& r) {
  return Subst(var, r).value(v);
}
CompPtr subst(const CompPtr& e, const Name& var, const ValuePtr& r) {
  return Subst(var, r).comp(e);
}
FormulaPtr subst(const FormulaPtr& f, const Name& var, const ValuePtr& r) {
  return Subst(var, r).formula(f);
}
Predicate subst(const Predicate& p, const Name& var, const ValuePtr& r) {
  return Subst(var, r).pred(p);
}

FormulaPtr apply_pred(const Predicate& p, const ValuePtr& state) {
  return subst(p.body, p.binder, state);
}

// ---------------------------------------------------------------------------
// Alpha equivalence.

namespace {

// Parallel binder stacks: a bound variable is identified by the stack level
// at which it was bound.
struct AlphaEnv {
  std::vector<Name> left, right;

  int level_of(const std::vector<Name>& stack, const Name& n) const {
    for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i)
      if (stack[static_cast<size_t>(i)] == n) return i;
    return -1;
  }
  bool var_eq(const Name& a, const Name& b) const {
    int la = level_of(left, a), lb = level_of(right, b);
    if (la != lb) return false;
    if (la == -1) return a == b;  // both free
    return true;
  }
  struct Push {
    AlphaEnv& env;
    Push(AlphaEnv& e, const Name& a, const Name& b) : env(e) {
      env.left.push_back(a);
      env.right.push_back(b);
    }
    ~Push() {
      env.left.pop_back();
      env.right.pop_back();
    }
  };
};

bool aeq_type(const TypePtr& a, const TypePtr& b, AlphaEnv& env);
bool aeq_comp_type(const CompTypePtr& a, const CompTypePtr& b, AlphaEnv& env);
bool aeq_value(const ValuePtr& a, const ValuePtr& b, AlphaEnv& env);
bool aeq_comp(const CompPtr& a, const CompPtr& b, AlphaEnv& env);
bool aeq_formula(const FormulaPtr& a, const FormulaPtr& b, AlphaEnv& env);

bool aeq_pred(const Predicate& a, const Predicate& b, AlphaEnv& env) {
  AlphaEnv::Push p(env, a.binder, b.binder);
  return aeq_formula(a.body, b.body, env);
}

bool aeq_type(const TypePtr& a, const TypePtr& b, AlphaEnv& env) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const StateTy&) { return true; },
          [&](const UnitTy&) { return true; },
          [&](const ProdTy& x) {
            const auto& y = std::get<ProdTy>(b->node);
            return aeq_type(x.left, y.left, env) &&
                   aeq_type(x.right, y.right, env);
          },
          [&](const SumTy& x) {
            const auto& y = std::get<SumTy>(b->node);
            return aeq_type(x.left, y.left, env) &&
                   aeq_type(x.right, y.right, env);
          },
          [&](const DepArrowTy& x) {
            const auto& y = std::get<DepArrowTy>(b->node);
            if (!aeq_type(x.domain, y.domain, env)) return false;
            AlphaEnv::Push p(env, x.binder, y.binder);
            return aeq_comp_type(x.codomain, y.codomain, env);
          },
      },
      a->node);
}

bool aeq_comp_type(const CompTypePtr& a, const CompTypePtr& b, AlphaEnv& env) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const MstTy& x) {
            const auto& y = std::get<MstTy>(b->node);
            if (!aeq_value(x.index, y.index, env)) return false;
            if (!aeq_type(x.result, y.result, env)) return false;
            {
              AlphaEnv::Push p(env, x.pre_binder, y.pre_binder);
              if (!aeq_formula(x.pre, y.pre, env)) return false;
            }
            AlphaEnv::Push p1(env, x.post_initial, y.post_initial);
            AlphaEnv::Push p2(env, x.post_result, y.post_result);
            AlphaEnv::Push p3(env, x.post_final, y.post_final);
            return aeq_formula(x.post, y.post, env);
          },
          [&](const PureTy& x) {
            const auto& y = std::get<PureTy>(b->node);
            if (!aeq_type(x.result, y.result, env)) return false;
            if (!aeq_formula(x.pre, y.pre, env)) return false;
            AlphaEnv::Push p(env, x.post_binder, y.post_binder);
            return aeq_formula(x.post, y.post, env);
          },
      },
      a->node);
}

bool aeq_value(const ValuePtr& a, const ValuePtr& b, AlphaEnv& env) {
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Var& x) {
            return env.var_eq(x.name, std::get<Var>(b->node).name);
          },
          [&](const StateConst& x) {
            return x.name == std::get<StateConst>(b->node).name;
          },
          [&](const UnitVal&) { return true; },
          [&](const PairVal& x) {
            const auto& y = std::get<PairVal>(b->node);
            return aeq_value(x.first, y.first, env) &&
                   aeq_value(x.second, y.second, env);
          },
          [&](const InlVal& x) {
            const auto& y = std::get<InlVal>(b->node);
            return aeq_value(x.value, y.value, env) &&
                   aeq_type(x.right_type, y.right_type, env);
          },
          [&](const InrVal& x) {
            const auto& y = std::get<InrVal>(b->node);
            return aeq_value(x.value, y.value, env) &&
                   aeq_type(x.left_type, y.left_type, env);
          },
          [&](const LambdaVal& x) {
            const auto& y = std::get<LambdaVal>(b->node);
            if (!aeq_type(x.domain, y.domain, env)) return false;
            AlphaEnv::Push p(env, x.binder, y.binder);
            return aeq_comp(x.body, y.body, env);
          },
          [&](const ReifyVal& x) {
            return aeq_comp(x.body, std::get<ReifyVal>(b->node).body, env);
          },
          [&](const PrimApp& x) {
            const auto& y = std::get<PrimApp>(b->node);
            return x.prim == y.prim && aeq_value(x.arg, y.arg, env);
          },
      },
      a->node);
}

bool aeq_comp(const CompPtr& a, const CompPtr& b, AlphaEnv& env) {
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Return& x) {
            const auto& y = std::get<Return>(b->node);
            return aeq_value(x.index, y.index, env) &&
                   aeq_value(x.value, y.value, env);
          },
          [&](const PureReturn& x) {
            return aeq_value(x.value, std::get<PureReturn>(b->node).value,
                             env);
          },
          [&](const Bind& x) {
            const auto& y = std::get<Bind>(b->node);
            if (!aeq_comp(x.first, y.first, env)) return false;
            AlphaEnv::Push p(env, x.binder, y.binder);
            return aeq_comp(x.rest, y.rest, env);
          },
          [&](const Apply& x) {
            const auto& y = std::get<Apply>(b->node);
            return aeq_value(x.fn, y.fn, env) && aeq_value(x.arg, y.arg, env);
          },
          [&](const PMatch& x) {
            const auto& y = std::get<PMatch>(b->node);
            if (!aeq_value(x.scrutinee, y.scrutinee, env)) return false;
            AlphaEnv::Push p1(env, x.fst_binder, y.fst_binder);
            AlphaEnv::Push p2(env, x.snd_binder, y.snd_binder);
            return aeq_comp(x.body, y.body, env);
          },
          [&](const Case& x) {
            const auto& y = std::get<Case>(b->node);
            if (!aeq_value(x.scrutinee, y.scrutinee, env)) return false;
            {
              AlphaEnv::Push p(env, x.left_binder, y.left_binder);
              if (!aeq_comp(x.left, y.left, env)) return false;
            }
            AlphaEnv::Push p(env, x.right_binder, y.right_binder);
            return aeq_comp(x.right, y.right, env);
          },
          [&](const Get& x) {
            return aeq_value(x.index, std::get<Get>(b->node).index, env);
          },
          [&](const Put& x) {
            const auto& y = std::get<Put>(b->node);
            return aeq_value(x.index, y.index, env) &&
                   aeq_value(x.state, y.state, env);
          },
          [&](const Witness& x) {
            const auto& y = std::get<Witness>(b->node);
            return aeq_value(x.index, y.index, env) &&
                   aeq_pred(x.pred, y.pred, env);
          },
          [&](const Recall& x) {
            const auto& y = std::get<Recall>(b->node);
            return aeq_value(x.index, y.index, env) &&
                   aeq_pred(x.pred, y.pred, env);
          },
          [&](const Reflect& x) {
            return aeq_value(x.fn, std::get<Reflect>(b->node).fn, env);
          },
          [&](const Coerce& x) {
            return aeq_comp(x.body, std::get<Coerce>(b->node).body, env);
          },
      },
      a->node);
}

bool aeq_formula(const FormulaPtr& a, const FormulaPtr& b, AlphaEnv& env) {
  if (a.get() == b.get() && env.left.empty() && env.right.empty()) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Atom& x) {
            const auto& y = std::get<Atom>(b->node);
            if (x.head.kind != y.head.kind) return false;
            if (x.head.kind == AtomHead::Kind::Eq &&
                !aeq_type(x.head.eq_type, y.head.eq_type, env))
              return false;
            if (x.args.size() != y.args.size()) return false;
            for (size_t i = 0; i < x.args.size(); ++i)
              if (!aeq_value(x.args[i], y.args[i], env)) return false;
            return true;
          },
          [&](const TopF&) { return true; },
          [&](const BotF&) { return true; },
          [&](const AndF& x) {
            const auto& y = std::get<AndF>(b->node);
            return aeq_formula(x.left, y.left, env) &&
                   aeq_formula(x.right, y.right, env);
          },
          [&](const OrF& x) {
            const auto& y = std::get<OrF>(b->node);
            return aeq_formula(x.left, y.left, env) &&
                   aeq_formula(x.right, y.right, env);
          },
          [&](const ImpliesF& x) {
            const auto& y = std::get<ImpliesF>(b->node);
            return aeq_formula(x.left, y.left, env) &&
                   aeq_formula(x.right, y.right, env);
          },
          [&](const ForallF& x) {
            const auto& y = std::get<ForallF>(b->node);
            if (!aeq_type(x.type, y.type, env)) return false;
            AlphaEnv::Push p(env, x.binder, y.binder);
            return aeq_formula(x.body, y.body, env);
          },
          [&](const ExistsF& x) {
            const auto& y = std::get<ExistsF>(b->node);
            if (!aeq_type(x.type, y.type, env)) return false;
            AlphaEnv::Push p(env, x.binder, y.binder);
            return aeq_formula(x.body, y.body, env);
          },
          [&](const WitnessedF& x) {
            return aeq_pred(x.pred, std::get<WitnessedF>(b->node).pred, env);
          },
      },
      a->node);
}

}  // namespace

bool alpha_eq(const TypePtr& a, const TypePtr& b) {
  AlphaEnv env;
  return aeq_type(a, b, env);
}
bool alpha_eq(const CompTypePtr& a, const CompTypePtr& b) {
  AlphaEnv env;
  return aeq_comp_type(a, b, env);
}
bool alpha_eq(const ValuePtr& a, const ValuePtr& b) {
  AlphaEnv env;
  return aeq_value(a, b, env);
}
bool alpha_eq(const CompPtr& a, const CompPtr& b) {
  AlphaEnv env;
  return aeq_comp(a, b, env);
}
bool alpha_eq(const FormulaPtr& a, const FormulaPtr& b) {
  AlphaEnv env;
  return aeq_formula(a, b, env);
}
bool alpha_eq(const Predicate& a, const Predicate& b) {
  AlphaEnv env;
  return aeq_pred(a, b, env);
}

// ---------------------------------------------------------------------------
// Sizes.

std::size_t term_size(const ValuePtr& v) {
  return std::visit(
      overloaded{
          [&](const Var&) -> std::size_t { return 1; },
          [&](const StateConst&) -> std::size_t { return 1; },
          [&](const UnitVal&) -> std::size_t { return 1; },
          [&](const PairVal& p) {
            return 1 + term_size(p.first) + term_size(p.second);
          },
          [&](const InlVal& i) { return 1 + term_size(i.value); },
          [&](const InrVal& i) { return 1 + term_size(i.value); },
          [&](const LambdaVal&) -> std::size_t { return 8; },
          [&](const ReifyVal&) -> std::size_t { return 8; },
          [&](const PrimApp& p) { return 1 + term_size(p.arg); },
      },
      v->node);
}

std::size_t formula_size(const FormulaPtr& f) {
  return std::visit(
      overloaded{
          [&](const Atom& a) {
            std::size_t n = 1;
            for (const auto& v : a.args) n += term_size(v);
            return n;
          },
          [&](const TopF&) -> std::size_t { return 1; },
          [&](const BotF&) -> std::size_t { return 1; },
          [&](const AndF& c) {
            return 1 + formula_size(c.left) + formula_size(c.right);
          },
          [&](const OrF& c) {
            return 1 + formula_size(c.left) + formula_size(c.right);
          },
          [&](const ImpliesF& c) {
            return 1 + formula_size(c.left) + formula_size(c.right);
          },
          [&](const ForallF& q) { return 1 + formula_size(q.body); },
          [&](const ExistsF& q) { return 1 + formula_size(q.body); },
          [&](const WitnessedF& w) { return 1 + formula_size(w.pred.body); },
      },
      f->node);
}

}  // namespace mst
