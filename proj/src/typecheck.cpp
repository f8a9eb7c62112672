#include "mst/typecheck.hpp"

#include <sstream>

#include "mst/pretty.hpp"

namespace mst::tc {

std::string Obligation::provenance() const {
  std::ostringstream os;
  os << rule;
  if (pos.known()) os << " at " << pos.line << ":" << pos.col;
  return os.str();
}

std::size_t CheckReport::proved_count() const {
  std::size_t n = 0;
  for (auto v : verdicts)
    if (v == Verdict::Proved) ++n;
  return n;
}

std::string CheckReport::render_text() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < obligations.size(); ++i) {
    os << obligations[i].provenance() << ": "
       << logic::pretty(obligations[i].sequent);
    if (i < verdicts.size())
      os << "\n  => " << (verdicts[i] == Verdict::Proved ? "proved"
                                                         : "unknown");
    os << "\n";
  }
  if (!verdicts.empty()) {
    os << "obligations: " << proved_count() << " proved";
    std::size_t unknown = obligations.size() - proved_count();
    if (unknown) os << ", " << unknown << " unknown";
    os << "\nverdict: " << (accepted ? "accept" : "reject") << "\n";
  }
  return os.str();
}

std::string CheckReport::render_machine() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < obligations.size(); ++i) {
    const auto& o = obligations[i];
    os << o.pos.line << ":" << o.pos.col << '\t' << o.rule << '\t';
    if (i < verdicts.size())
      os << (verdicts[i] == Verdict::Proved ? "proved" : "unknown");
    else
      os << "-";
    os << '\n';
  }
  return os.str();
}

Checker::Checker(const StateDomain& dom, logic::ProverOptions prover)
    : dom_(dom), prover_(std::move(prover)) {
  if (prover_.constants.empty()) prover_.constants = dom.constants;
  if (prover_.axioms.empty()) prover_.axioms = dom.axioms();
}

// ---------------------------------------------------------------------------
// Well-formedness.

std::optional<std::string> Checker::wf_type(const Context& ctx,
                                            const TypePtr& t) {
  return std::visit(
      overloaded{
          [&](const StateTy&) -> std::optional<std::string> {
            return std::nullopt;
          },
          [&](const UnitTy&) -> std::optional<std::string> {
            return std::nullopt;
          },
          [&](const ProdTy& p) -> std::optional<std::string> {
            if (auto e = wf_type(ctx, p.left)) return e;
            return wf_type(ctx, p.right);
          },
          [&](const SumTy& s) -> std::optional<std::string> {
            if (auto e = wf_type(ctx, s.left)) return e;
            return wf_type(ctx, s.right);
          },
          [&](const DepArrowTy& a) -> std::optional<std::string> {
            if (auto e = wf_type(ctx, a.domain)) return e;
            return wf_comp_type(ctx.extended(a.binder, a.domain),
                                a.codomain);
          },
      },
      t->node);
}

std::optional<std::string> Checker::wf_comp_type(const Context& ctx,
                                                 const CompTypePtr& c) {
  return std::visit(
      overloaded{
          [&](const MstTy& m) -> std::optional<std::string> {
            try {
              std::vector<Obligation> ignored;
              TypePtr bt = infer_value(ctx, m.index, ignored);
              if (!alpha_eq(bt, type_bool()))
                return "effect index is not boolean-typed";
            } catch (const TypeError& e) {
              return std::string("effect index: ") + e.what();
            }
            if (auto err = wf_type(ctx, m.result)) return err;
            if (auto err = wf_formula(
                    ctx.extended(m.pre_binder, type_state()), m.pre))
              return "precondition: " + *err;
            Context pc = ctx.extended(m.post_initial, type_state())
                             .extended(m.post_result, m.result)
                             .extended(m.post_final, type_state());
            if (auto err = wf_formula(pc, m.post))
              return "postcondition: " + *err;
            return std::nullopt;
          },
          [&](const PureTy& p) -> std::optional<std::string> {
            if (auto err = wf_type(ctx, p.result)) return err;
            if (auto err = wf_formula(ctx, p.pre))
              return "precondition: " + *err;
            if (auto err = wf_formula(
                    ctx.extended(p.post_binder, p.result), p.post))
              return "postcondition: " + *err;
            return std::nullopt;
          },
      },
      c->node);
}

std::optional<std::string> Checker::wf_formula(const Context& ctx,
                                               const FormulaPtr& f) {
  return std::visit(
      overloaded{
          [&](const Atom& a) -> std::optional<std::string> {
            if (a.args.size() != 2)
              return std::string(a.head.kind == AtomHead::Kind::Rel
                                     ? "rel"
                                     : "==") +
                     " takes exactly two arguments";
            try {
              std::vector<Obligation> ignored;
              TypePtr t0 = infer_value(ctx, a.args[0], ignored);
              TypePtr t1 = infer_value(ctx, a.args[1], ignored);
              if (a.head.kind == AtomHead::Kind::Rel) {
                if (!alpha_eq(t0, type_state()) ||
                    !alpha_eq(t1, type_state()))
                  return "rel arguments must be state-typed";
              } else {
                if (!alpha_eq(t0, a.head.eq_type) ||
                    !alpha_eq(t1, a.head.eq_type))
                  return "equality arguments do not inhabit the annotated "
                         "type " +
                         pretty(a.head.eq_type);
              }
            } catch (const TypeError& e) {
              return std::string(e.what());
            }
            return std::nullopt;
          },
          [&](const TopF&) -> std::optional<std::string> {
            return std::nullopt;
          },
          [&](const BotF&) -> std::optional<std::string> {
            return std::nullopt;
          },
          [&](const AndF& c) -> std::optional<std::string> {
            if (auto e = wf_formula(ctx, c.left)) return e;
            return wf_formula(ctx, c.right);
          },
          [&](const OrF& c) -> std::optional<std::string> {
            if (auto e = wf_formula(ctx, c.left)) return e;
            return wf_formula(ctx, c.right);
          },
          [&](const ImpliesF& c) -> std::optional<std::string> {
            if (auto e = wf_formula(ctx, c.left)) return e;
            return wf_formula(ctx, c.right);
          },
          [&](const ForallF& q) -> std::optional<std::string> {
            if (auto e = wf_type(ctx, q.type)) return e;
            return wf_formula(ctx.extended(q.binder, q.type), q.body);
          },
          [&](const ExistsF& q) -> std::optional<std::string> {
            if (auto e = wf_type(ctx, q.type)) return e;
            return wf_formula(ctx.extended(q.binder, q.type), q.body);
          },
          [&](const WitnessedF& w) -> std::optional<std::string> {
            return wf_formula(
                ctx.extended(w.pred.binder, type_state()), w.pred.body);
          },
      },
      f->node);
}

// ---------------------------------------------------------------------------
// Value typing.

TypePtr Checker::infer_value(const Context& ctx, const ValuePtr& v) {
  std::vector<Obligation> sink;
  return infer_value(ctx, v, sink);
}

TypePtr Checker::infer_value(const Context& ctx, const ValuePtr& v,
                             std::vector<Obligation>& obligations) {
  return std::visit(
      overloaded{
          [&](const Var& x) -> TypePtr {
            if (const TypePtr* t = ctx.lookup(x.name)) return *t;
            throw TypeError("unbound variable '" + x.name + "'");
          },
          [&](const StateConst& c) -> TypePtr {
            if (!dom_.has_constant(c.name))
              throw TypeError("state constant '" + c.name +
                              "' is not declared by domain '" + dom_.name +
                              "'");
            return type_state();
          },
          [&](const UnitVal&) -> TypePtr { return type_unit(); },
          [&](const PairVal& p) -> TypePtr {
            return type_prod(infer_value(ctx, p.first, obligations),
                             infer_value(ctx, p.second, obligations));
          },
          [&](const InlVal& i) -> TypePtr {
            if (auto err = wf_type(ctx, i.right_type))
              throw TypeError("inl annotation: " + *err);
            return type_sum(infer_value(ctx, i.value, obligations),
                            i.right_type);
          },
          [&](const InrVal& i) -> TypePtr {
            if (auto err = wf_type(ctx, i.left_type))
              throw TypeError("inr annotation: " + *err);
            return type_sum(i.left_type,
                            infer_value(ctx, i.value, obligations));
          },
          [&](const LambdaVal& l) -> TypePtr {
            if (auto err = wf_type(ctx, l.domain))
              throw TypeError("lambda annotation: " + *err);
            Name b = l.binder;
            CompPtr body = l.body;
            if (ctx.contains(b)) {
              std::set<Name> avoid = free_vars(body);
              for (const auto& [n, t] : ctx.bindings) avoid.insert(n);
              Name nb = fresh_name(b, avoid);
              body = subst(body, b, v_var(nb));
              b = nb;
            }
            Path path{ctx.extended(b, l.domain), {}, ""};
            CompTypePtr ct = infer_rec(body, path, obligations);
            return type_arrow(b, l.domain, ct);
          },
          [&](const ReifyVal& r) -> TypePtr {
            Path path{ctx, {}, ""};
            CompTypePtr ct = infer_rec(r.body, path, obligations);
            const auto* m = std::get_if<MstTy>(&ct->node);
            if (!m)
              throw TypeError("reify expects a stateful computation");
            if (!is_true(m->index))
              throw TypeError(
                  "reify requires a representation-aware (true-indexed) "
                  "computation");
            std::set<Name> avoid;
            for (const auto& [n, t] : ctx.bindings) avoid.insert(n);
            collect_free_vars(ct, avoid);
            Name s = fresh_name("s", avoid);
            avoid.insert(s);
            Name x = fresh_name("x", avoid);
            avoid.insert(x);
            Name sf = fresh_name("s'", avoid);
            avoid.insert(sf);
            Name y = fresh_name("y", avoid);
            FormulaPtr pre = subst(m->pre, m->pre_binder, v_var(s));
            FormulaPtr post = m->post;
            post = subst(post, m->post_initial, v_var(s));
            post = subst(post, m->post_result, v_var(x));
            post = subst(post, m->post_final, v_var(sf));
            TypePtr pair_ty = type_prod(m->result, type_state());
            FormulaPtr post_y = f_exists(
                x, m->result,
                f_exists(sf, type_state(),
                         f_and(f_eq(pair_ty, v_var(y),
                                    v_pair(v_var(x), v_var(sf))),
                               f_and(f_rel(v_var(s), v_var(sf)), post))));
            return type_arrow(
                s, type_state(),
                comp_pure(pair_ty, pre, y, post_y));
          },
          [&](const PrimApp& p) -> TypePtr {
            if (!dom_.find_prim(p.prim))
              throw TypeError("unknown state primitive '" + p.prim + "'");
            TypePtr at = infer_value(ctx, p.arg, obligations);
            if (!alpha_eq(at, type_state()))
              throw TypeError("primitive '" + p.prim +
                              "' expects a state-typed argument");
            return type_state();
          },
      },
      v->node);
}

// ---------------------------------------------------------------------------
// Computation typing.

namespace {

struct MstView {
  ValuePtr index;
  TypePtr result;
  // Instantiates pre at a state variable name.
  const MstTy* raw;
};

FormulaPtr pre_at(const MstTy& m, const ValuePtr& s) {
  return subst(m.pre, m.pre_binder, s);
}
FormulaPtr post_at(const MstTy& m, const ValuePtr& s0, const ValuePtr& x,
                   const ValuePtr& s1) {
  FormulaPtr p = subst(m.post, m.post_initial, s0);
  p = subst(p, m.post_result, x);
  return subst(p, m.post_final, s1);
}

Name fresh_in_ctx(const Context& ctx, const Name& base,
                  std::set<Name> extra = {}) {
  for (const auto& [n, t] : ctx.bindings) extra.insert(n);
  return fresh_name(base, extra);
}

}  // namespace

CompTypePtr Checker::lift_pure(const CompTypePtr& p, const ValuePtr& index) {
  const auto& pt = std::get<PureTy>(p->node);
  std::set<Name> avoid = free_vars(p);
  Name s = fresh_name("s", avoid);
  avoid.insert(s);
  Name x = fresh_name(pt.post_binder, avoid);
  avoid.insert(x);
  Name sf = fresh_name("s'", avoid);
  FormulaPtr post = subst(pt.post, pt.post_binder, v_var(x));
  return comp_mst(index, pt.result, s, pt.pre, s, x, sf,
                  f_and(f_eq(type_state(), v_var(s), v_var(sf)), post));
}

CompTypePtr Checker::infer_rec(const CompPtr& e, Path& path,
                               std::vector<Obligation>& sink) {
  const Context& ctx = path.ctx;
  auto state_var = [&]() -> ValuePtr {
    return path.cur.empty() ? nullptr : v_var(path.cur);
  };
  auto check_index = [&](const ValuePtr& b) {
    TypePtr t = infer_value(ctx, b, sink);
    if (!alpha_eq(t, type_bool()))
      throw TypeError("effect index is not boolean-typed", e->pos);
  };
  auto guard = [&](const ValuePtr& b) {
    return f_eq(type_bool(), b, v_false());
  };

  return std::visit(
      overloaded{
          [&](const Return& r) -> CompTypePtr {
            check_index(r.index);
            TypePtr t = infer_value(ctx, r.value, sink);
            std::set<Name> avoid = free_vars(r.value);
            Name s = fresh_in_ctx(ctx, "s", avoid);
            avoid.insert(s);
            Name x = fresh_in_ctx(ctx, "x", avoid);
            avoid.insert(x);
            Name sf = fresh_in_ctx(ctx, "s'", avoid);
            return comp_mst(
                r.index, t, s, f_top(), s, x, sf,
                f_and(f_eq(type_state(), v_var(s), v_var(sf)),
                      f_eq(t, v_var(x), r.value)));
          },
          [&](const PureReturn& r) -> CompTypePtr {
            TypePtr t = infer_value(ctx, r.value, sink);
            std::set<Name> avoid = free_vars(r.value);
            Name y = fresh_in_ctx(ctx, "y", avoid);
            return comp_pure(t, f_top(), y, f_eq(t, v_var(y), r.value));
          },
          [&](const Get& g) -> CompTypePtr {
            check_index(g.index);
            Name s = fresh_in_ctx(ctx, "s");
            Name x = fresh_in_ctx(ctx, "x", {s});
            Name sf = fresh_in_ctx(ctx, "s'", {s, x});
            return comp_mst(
                g.index, type_state(), s, f_top(), s, x, sf,
                f_and(f_eq(type_state(), v_var(s), v_var(x)),
                      f_eq(type_state(), v_var(x), v_var(sf))));
          },
          [&](const Put& p) -> CompTypePtr {
            check_index(p.index);
            TypePtr t = infer_value(ctx, p.state, sink);
            if (!alpha_eq(t, type_state()))
              throw TypeError("put expects a state-typed argument", e->pos);
            std::set<Name> avoid = free_vars(p.state);
            Name s = fresh_in_ctx(ctx, "s", avoid);
            avoid.insert(s);
            Name x = fresh_in_ctx(ctx, "x", avoid);
            avoid.insert(x);
            Name sf = fresh_in_ctx(ctx, "s'", avoid);
            return comp_mst(p.index, type_unit(), s,
                            f_rel(v_var(s), p.state), s, x, sf,
                            f_eq(type_state(), v_var(sf), p.state));
          },
          [&](const Witness& w) -> CompTypePtr {
            check_index(w.index);
            Context pc = ctx.extended(w.pred.binder, type_state());
            if (auto err = wf_formula(pc, w.pred.body))
              throw TypeError("witness predicate: " + *err, e->pos);
            FormulaPtr stable = logic::stable_formula(w.pred);
            std::set<Name> avoid = free_vars(w.pred);
            Name s = fresh_in_ctx(ctx, "s", avoid);
            avoid.insert(s);
            Name x = fresh_in_ctx(ctx, "x", avoid);
            avoid.insert(x);
            Name sf = fresh_in_ctx(ctx, "s'", avoid);
            FormulaPtr g = guard(w.index);
            return comp_mst(
                w.index, type_unit(), s,
                f_implies(g, f_and(stable, apply_pred(w.pred, v_var(s)))), s,
                x, sf,
                f_and(f_eq(type_state(), v_var(s), v_var(sf)),
                      f_implies(g, f_witnessed(w.pred))));
          },
          [&](const Recall& r) -> CompTypePtr {
            check_index(r.index);
            Context pc = ctx.extended(r.pred.binder, type_state());
            if (auto err = wf_formula(pc, r.pred.body))
              throw TypeError("recall predicate: " + *err, e->pos);
            std::set<Name> avoid = free_vars(r.pred);
            Name s = fresh_in_ctx(ctx, "s", avoid);
            avoid.insert(s);
            Name x = fresh_in_ctx(ctx, "x", avoid);
            avoid.insert(x);
            Name sf = fresh_in_ctx(ctx, "s'", avoid);
            FormulaPtr g = guard(r.index);
            return comp_mst(
                r.index, type_unit(), s,
                f_implies(g, f_witnessed(r.pred)), s, x, sf,
                f_and(f_eq(type_state(), v_var(s), v_var(sf)),
                      f_implies(g, apply_pred(r.pred, v_var(sf)))));
          },
          [&](const Apply& a) -> CompTypePtr {
            TypePtr tf = infer_value(ctx, a.fn, sink);
            const auto* arrow = std::get_if<DepArrowTy>(&tf->node);
            if (!arrow)
              throw TypeError("application of a non-arrow value of type " +
                                  pretty(tf),
                              e->pos);
            TypePtr ta = infer_value(ctx, a.arg, sink);
            auto obs = sub_value(ctx, ta, arrow->domain, e->pos);
            if (!obs)
              throw TypeError("argument type " + pretty(ta) +
                                  " does not match the expected " +
                                  pretty(arrow->domain),
                              e->pos);
            for (auto& o : *obs) sink.push_back(std::move(o));
            return subst(arrow->codomain, arrow->binder, a.arg);
          },
          [&](const Reflect& r) -> CompTypePtr {
            TypePtr tf = infer_value(ctx, r.fn, sink);
            const auto* arrow = std::get_if<DepArrowTy>(&tf->node);
            if (!arrow || !alpha_eq(arrow->domain, type_state()))
              throw TypeError(
                  "reflect expects a state-passing function, got " +
                      pretty(tf),
                  e->pos);
            const auto* pure = std::get_if<PureTy>(&arrow->codomain->node);
            if (!pure)
              throw TypeError(
                  "reflect expects a function into a Pure computation",
                  e->pos);
            const auto* prod = std::get_if<ProdTy>(&pure->result->node);
            if (!prod || !alpha_eq(prod->right, type_state()))
              throw TypeError(
                  "reflected function must return a value-state pair",
                  e->pos);
            TypePtr t = prod->left;
            std::set<Name> avoid = free_vars(tf);
            Name s = fresh_in_ctx(ctx, "s", avoid);
            avoid.insert(s);
            Name x = fresh_in_ctx(ctx, "x", avoid);
            avoid.insert(x);
            Name sf = fresh_in_ctx(ctx, "s'", avoid);
            FormulaPtr pre = subst(pure->pre, arrow->binder, v_var(s));
            FormulaPtr post = subst(pure->post, pure->post_binder,
                                    v_pair(v_var(x), v_var(sf)));
            post = subst(post, arrow->binder, v_var(s));
            // The monotonicity guarantee of T-Reflect: the function's
            // postcondition must entail rel s s'.
            logic::Sequent ob;
            ob.ctx = ctx.extended(s, type_state())
                         .extended(x, t)
                         .extended(sf, type_state());
            ob.left.insert(pre);
            ob.left.insert(post);
            ob.right.insert(f_rel(v_var(s), v_var(sf)));
            sink.push_back(Obligation{ob, "T-Reflect rel", e->pos});
            return comp_mst(v_true(), t, s, pre, s, x, sf, post);
          },
          [&](const Coerce& c) -> CompTypePtr {
            CompTypePtr ct = infer_rec(c.body, path, sink);
            const auto* m = std::get_if<MstTy>(&ct->node);
            if (!m)
              throw TypeError("coerce applies to stateful computations",
                              e->pos);
            if (!is_true(m->index))
              throw TypeError(
                  "coerce requires a true effect index, found " +
                      pretty(m->index),
                  e->pos);
            return comp_mst(v_false(), m->result, m->pre_binder, m->pre,
                            m->post_initial, m->post_result, m->post_final,
                            m->post);
          },
          [&](const Bind& b) -> CompTypePtr {
            CompTypePtr c1 = infer_rec(b.first, path, sink);
            // Pure/Pure composes in Pure; otherwise lift the pure side to
            // the other's index.
            if (const auto* p1 = std::get_if<PureTy>(&c1->node)) {
              // Peek at the continuation kind by typing it under the
              // unchanged state.
              Name xb = b.binder;
              CompPtr rest = b.rest;
              if (ctx.contains(xb)) {
                std::set<Name> avoid = free_vars(rest);
                for (const auto& [n, t] : ctx.bindings) avoid.insert(n);
                Name nb = fresh_name(xb, avoid);
                rest = subst(rest, xb, v_var(nb));
                xb = nb;
              }
              Path p2{ctx.extended(xb, p1->result), path.facts, path.cur};
              p2.facts.push_back(
                  subst(p1->post, p1->post_binder, v_var(xb)));
              std::vector<Obligation> sub_sink;
              CompTypePtr c2 = infer_rec(rest, p2, sub_sink);
              if (std::holds_alternative<PureTy>(c2->node)) {
                const auto& pt2 = std::get<PureTy>(c2->node);
                logic::Sequent ob;
                ob.ctx = p2.ctx;
                for (const auto& fct : p2.facts) ob.left.insert(fct);
                ob.right.insert(pt2.pre);
                sink.push_back(Obligation{ob, "T-Bind", e->pos});
                for (auto& o : sub_sink) sink.push_back(std::move(o));
                std::set<Name> avoid = free_vars(c1);
                collect_free_vars(c2, avoid);
                Name y = fresh_in_ctx(ctx, "y", avoid);
                FormulaPtr post = f_exists(
                    xb, p1->result,
                    f_and(subst(p1->post, p1->post_binder, v_var(xb)),
                          subst(pt2.post, pt2.post_binder, v_var(y))));
                return comp_pure(pt2.result, p1->pre, y, post);
              }
              const auto& m2 = std::get<MstTy>(c2->node);
              // Lift and fall through to the stateful composition below,
              // retyping the continuation with a proper state variable.
              c1 = lift_pure(c1, m2.index);
            }
            const auto* m1 = std::get_if<MstTy>(&c1->node);
            if (!m1)
              throw TypeError("bind of incompatible computation kinds",
                              e->pos);
            TypePtr t1 = m1->result;
            Name xb = b.binder;
            CompPtr rest = b.rest;
            if (ctx.contains(xb)) {
              std::set<Name> avoid = free_vars(rest);
              for (const auto& [n, t] : ctx.bindings) avoid.insert(n);
              Name nb = fresh_name(xb, avoid);
              rest = subst(rest, xb, v_var(nb));
              xb = nb;
            }
            std::set<Name> avoid;
            collect_free_vars(c1, avoid);
            avoid.insert(xb);
            Name s1 = fresh_in_ctx(ctx, "s", avoid);
            Path p2{ctx.extended(xb, t1).extended(s1, type_state()),
                    path.facts, s1};
            if (!path.cur.empty()) {
              p2.facts.push_back(
                  post_at(*m1, state_var(), v_var(xb), v_var(s1)));
              p2.facts.push_back(f_rel(state_var(), v_var(s1)));
            } else {
              p2.facts.push_back(f_exists(
                  m1->post_initial, type_state(),
                  post_at(*m1, v_var(m1->post_initial), v_var(xb),
                          v_var(s1))));
            }
            CompTypePtr c2 = infer_rec(rest, p2, sink);
            if (std::holds_alternative<PureTy>(c2->node))
              c2 = lift_pure(c2, m1->index);
            const auto& m2 = std::get<MstTy>(c2->node);
            if (!alpha_eq(m1->index, m2.index))
              throw TypeError(
                  "bind mixes computations with different effect indices (" +
                      pretty(m1->index) + " vs " + pretty(m2.index) + ")",
                  e->pos);
            logic::Sequent ob;
            ob.ctx = p2.ctx;
            for (const auto& fct : p2.facts) ob.left.insert(fct);
            ob.right.insert(pre_at(m2, v_var(s1)));
            sink.push_back(Obligation{ob, "T-Bind", e->pos});
            // Composite type, with the intermediate value and state
            // existentially closed.
            std::set<Name> avoid2;
            collect_free_vars(c1, avoid2);
            collect_free_vars(c2, avoid2);
            for (const auto& [n, t] : ctx.bindings) avoid2.insert(n);
            Name s0 = fresh_name("s", avoid2);
            avoid2.insert(s0);
            Name x2 = fresh_name("x", avoid2);
            avoid2.insert(x2);
            Name s2 = fresh_name("s''", avoid2);
            avoid2.insert(s2);
            Name xm = fresh_name(xb, avoid2);
            avoid2.insert(xm);
            Name sm = fresh_name("s'", avoid2);
            FormulaPtr comp_post = f_exists(
                xm, t1,
                f_exists(sm, type_state(),
                         f_and(post_at(*m1, v_var(s0), v_var(xm), v_var(sm)),
                               post_at(m2, v_var(sm), v_var(x2),
                                       v_var(s2)))));
            return comp_mst(m1->index, m2.result, s0,
                            pre_at(*m1, v_var(s0)), s0, x2, s2, comp_post);
          },
          [&](const PMatch& p) -> CompTypePtr {
            TypePtr ts = infer_value(ctx, p.scrutinee, sink);
            const auto* prod = std::get_if<ProdTy>(&ts->node);
            if (!prod)
              throw TypeError("pmatch scrutinee is not a pair", e->pos);
            Name x1 = p.fst_binder, x2 = p.snd_binder;
            CompPtr body = p.body;
            {
              std::set<Name> avoid = free_vars(body);
              for (const auto& [n, t] : ctx.bindings) avoid.insert(n);
              if (ctx.contains(x1) || x1 == x2) {
                Name nb = fresh_name(x1, avoid);
                body = subst(body, x1, v_var(nb));
                x1 = nb;
                avoid.insert(nb);
              }
              if (ctx.contains(x2)) {
                Name nb = fresh_name(x2, avoid);
                body = subst(body, x2, v_var(nb));
                x2 = nb;
              }
            }
            Path p2{ctx.extended(x1, prod->left).extended(x2, prod->right),
                    path.facts, path.cur};
            p2.facts.push_back(f_eq(ts, p.scrutinee,
                                    v_pair(v_var(x1), v_var(x2))));
            CompTypePtr cb = infer_rec(body, p2, sink);
            FormulaPtr eq = f_eq(ts, p.scrutinee,
                                 v_pair(v_var(x1), v_var(x2)));
            if (const auto* m = std::get_if<MstTy>(&cb->node)) {
              std::set<Name> rf = free_vars(m->result);
              if (rf.count(x1) || rf.count(x2))
                throw TypeError(
                    "pmatch binders escape into the result type", e->pos);
              FormulaPtr pre = f_forall(
                  x1, prod->left,
                  f_forall(x2, prod->right, f_implies(eq, m->pre)));
              FormulaPtr post = f_exists(
                  x1, prod->left,
                  f_exists(x2, prod->right, f_and(eq, m->post)));
              return comp_mst(m->index, m->result, m->pre_binder, pre,
                              m->post_initial, m->post_result, m->post_final,
                              post);
            }
            const auto& pt = std::get<PureTy>(cb->node);
            std::set<Name> rf = free_vars(pt.result);
            if (rf.count(x1) || rf.count(x2))
              throw TypeError("pmatch binders escape into the result type",
                              e->pos);
            FormulaPtr pre = f_forall(
                x1, prod->left,
                f_forall(x2, prod->right, f_implies(eq, pt.pre)));
            FormulaPtr post = f_exists(
                x1, prod->left,
                f_exists(x2, prod->right, f_and(eq, pt.post)));
            return comp_pure(pt.result, pre, pt.post_binder, post);
          },
          [&](const Case& cs) -> CompTypePtr {
            TypePtr ts = infer_value(ctx, cs.scrutinee, sink);
            const auto* sum = std::get_if<SumTy>(&ts->node);
            if (!sum)
              throw TypeError("case scrutinee is not a sum", e->pos);
            Name xl = cs.left_binder, xr = cs.right_binder;
            CompPtr el = cs.left, er = cs.right;
            {
              std::set<Name> avoid = free_vars(el);
              for (const auto& [n, t] : ctx.bindings) avoid.insert(n);
              if (ctx.contains(xl)) {
                Name nb = fresh_name(xl, avoid);
                el = subst(el, xl, v_var(nb));
                xl = nb;
              }
            }
            {
              std::set<Name> avoid = free_vars(er);
              for (const auto& [n, t] : ctx.bindings) avoid.insert(n);
              if (ctx.contains(xr)) {
                Name nb = fresh_name(xr, avoid);
                er = subst(er, xr, v_var(nb));
                xr = nb;
              }
            }
            FormulaPtr eql =
                f_eq(ts, cs.scrutinee, v_inl(v_var(xl), sum->right));
            FormulaPtr eqr =
                f_eq(ts, cs.scrutinee, v_inr(v_var(xr), sum->left));
            Path pl{ctx.extended(xl, sum->left), path.facts, path.cur};
            pl.facts.push_back(eql);
            CompTypePtr cl = infer_rec(el, pl, sink);
            Path pr{ctx.extended(xr, sum->right), path.facts, path.cur};
            pr.facts.push_back(eqr);
            CompTypePtr cr = infer_rec(er, pr, sink);
            if (std::holds_alternative<PureTy>(cl->node) &&
                std::holds_alternative<MstTy>(cr->node))
              cl = lift_pure(cl, std::get<MstTy>(cr->node).index);
            if (std::holds_alternative<PureTy>(cr->node) &&
                std::holds_alternative<MstTy>(cl->node))
              cr = lift_pure(cr, std::get<MstTy>(cl->node).index);
            if (const auto* ml = std::get_if<MstTy>(&cl->node)) {
              const auto* mr = std::get_if<MstTy>(&cr->node);
              if (!mr || !alpha_eq(ml->index, mr->index))
                throw TypeError("case branches have different effect indices",
                                e->pos);
              if (!alpha_eq(ml->result, mr->result))
                throw TypeError("case branches have different result types",
                                e->pos);
              std::set<Name> avoid = free_vars(cl);
              collect_free_vars(cr, avoid);
              avoid.insert(xl);
              avoid.insert(xr);
              Name s = fresh_in_ctx(ctx, "s", avoid);
              avoid.insert(s);
              Name x = fresh_in_ctx(ctx, "x", avoid);
              avoid.insert(x);
              Name sf = fresh_in_ctx(ctx, "s'", avoid);
              ValuePtr sv = v_var(s), xv = v_var(x), sfv = v_var(sf);
              FormulaPtr pre = f_and(
                  f_forall(xl, sum->left,
                           f_implies(eql, pre_at(*ml, sv))),
                  f_forall(xr, sum->right,
                           f_implies(eqr, pre_at(*mr, sv))));
              FormulaPtr post = f_or(
                  f_exists(xl, sum->left,
                           f_and(eql, post_at(*ml, sv, xv, sfv))),
                  f_exists(xr, sum->right,
                           f_and(eqr, post_at(*mr, sv, xv, sfv))));
              return comp_mst(ml->index, ml->result, s, pre, s, x, sf, post);
            }
            const auto* pl2 = std::get_if<PureTy>(&cl->node);
            const auto* pr2 = std::get_if<PureTy>(&cr->node);
            if (!pl2 || !pr2)
              throw TypeError("case branches have incompatible kinds",
                              e->pos);
            if (!alpha_eq(pl2->result, pr2->result))
              throw TypeError("case branches have different result types",
                              e->pos);
            std::set<Name> avoid = free_vars(cl);
            collect_free_vars(cr, avoid);
            Name y = fresh_in_ctx(ctx, "y", avoid);
            ValuePtr yv = v_var(y);
            FormulaPtr pre =
                f_and(f_forall(xl, sum->left, f_implies(eql, pl2->pre)),
                      f_forall(xr, sum->right, f_implies(eqr, pr2->pre)));
            FormulaPtr post =
                f_or(f_exists(xl, sum->left,
                              f_and(eql, subst(pl2->post, pl2->post_binder,
                                               yv))),
                     f_exists(xr, sum->right,
                              f_and(eqr, subst(pr2->post, pr2->post_binder,
                                               yv))));
            return comp_pure(pl2->result, pre, y, post);
          },
      },
      e->node);
}

std::pair<CompTypePtr, std::vector<Obligation>> Checker::infer_comp(
    const Context& ctx, const CompPtr& e) {
  // First pass determines the rule-derived precondition; the second pass
  // seeds the fact path with it so intermediate obligations see it.
  std::vector<Obligation> scratch;
  Path probe{ctx, {}, ""};
  CompTypePtr ct = infer_rec(e, probe, scratch);

  std::vector<Obligation> obligations;
  if (const auto* m = std::get_if<MstTy>(&ct->node)) {
    std::set<Name> avoid = free_vars(ct);
    Name s0 = fresh_in_ctx(ctx, "s0", avoid);
    Path path{ctx.extended(s0, type_state()),
              {pre_at(*m, v_var(s0))},
              s0};
    CompTypePtr ct2 = infer_rec(e, path, obligations);
    return {ct2, std::move(obligations)};
  }
  Path path{ctx, {std::get<PureTy>(ct->node).pre}, ""};
  CompTypePtr ct2 = infer_rec(e, path, obligations);
  return {ct2, std::move(obligations)};
}

// ---------------------------------------------------------------------------
// Subtyping.

std::optional<std::vector<Obligation>> Checker::sub_value(
    const Context& ctx, const TypePtr& sub, const TypePtr& super, Pos pos) {
  if (alpha_eq(sub, super)) return std::vector<Obligation>{};
  const auto* a1 = std::get_if<DepArrowTy>(&sub->node);
  const auto* a2 = std::get_if<DepArrowTy>(&super->node);
  if (!a1 || !a2) return std::nullopt;
  auto dom_obs = sub_value(ctx, a2->domain, a1->domain, pos);
  if (!dom_obs) return std::nullopt;
  std::vector<Obligation> out = std::move(*dom_obs);
  std::set<Name> avoid;
  collect_free_vars(sub, avoid);
  collect_free_vars(super, avoid);
  Name xb = fresh_in_ctx(ctx, a2->binder, avoid);
  Context c2 = ctx.extended(xb, a2->domain);
  CompTypePtr cod1 = subst(a1->codomain, a1->binder, v_var(xb));
  CompTypePtr cod2 = subst(a2->codomain, a2->binder, v_var(xb));
  sub_comp(c2, cod1, cod2, pos, "Sub-Arrow", out);
  return out;
}

void Checker::sub_comp(const Context& ctx, const CompTypePtr& sub,
                       const CompTypePtr& super, Pos pos, const char* what,
                       std::vector<Obligation>& sink) {
  const auto* m1 = std::get_if<MstTy>(&sub->node);
  const auto* m2 = std::get_if<MstTy>(&super->node);
  if (m1 && m2) {
    if (!alpha_eq(m1->index, m2->index))
      throw TypeError("effect index mismatch in subtyping: " +
                          pretty(m1->index) + " vs " + pretty(m2->index),
                      pos);
    auto val_obs = sub_value(ctx, m1->result, m2->result, pos);
    if (!val_obs)
      throw TypeError("result type " + pretty(m1->result) +
                          " is not a subtype of " + pretty(m2->result),
                      pos);
    for (auto& o : *val_obs) sink.push_back(std::move(o));
    std::set<Name> avoid;
    collect_free_vars(sub, avoid);
    collect_free_vars(super, avoid);
    Name s0 = fresh_in_ctx(ctx, "s", avoid);
    avoid.insert(s0);
    Name x = fresh_in_ctx(ctx, "x", avoid);
    avoid.insert(x);
    Name s1 = fresh_in_ctx(ctx, "s'", avoid);
    ValuePtr s0v = v_var(s0), xv = v_var(x), s1v = v_var(s1);
    logic::Sequent pre_ob;
    pre_ob.ctx = ctx.extended(s0, type_state());
    pre_ob.left.insert(pre_at(*m2, s0v));
    pre_ob.right.insert(pre_at(*m1, s0v));
    sink.push_back(
        Obligation{pre_ob, std::string(what) + " pre", pos});
    logic::Sequent post_ob;
    post_ob.ctx = ctx.extended(s0, type_state())
                      .extended(x, m1->result)
                      .extended(s1, type_state());
    post_ob.left.insert(pre_at(*m2, s0v));
    post_ob.left.insert(f_rel(s0v, s1v));
    post_ob.left.insert(post_at(*m1, s0v, xv, s1v));
    post_ob.right.insert(post_at(*m2, s0v, xv, s1v));
    sink.push_back(
        Obligation{post_ob, std::string(what) + " post", pos});
    return;
  }
  const auto* p1 = std::get_if<PureTy>(&sub->node);
  const auto* p2 = std::get_if<PureTy>(&super->node);
  if (p1 && p2) {
    auto val_obs = sub_value(ctx, p1->result, p2->result, pos);
    if (!val_obs)
      throw TypeError("result type " + pretty(p1->result) +
                          " is not a subtype of " + pretty(p2->result),
                      pos);
    for (auto& o : *val_obs) sink.push_back(std::move(o));
    std::set<Name> avoid;
    collect_free_vars(sub, avoid);
    collect_free_vars(super, avoid);
    Name y = fresh_in_ctx(ctx, p2->post_binder, avoid);
    ValuePtr yv = v_var(y);
    logic::Sequent pre_ob;
    pre_ob.ctx = ctx;
    pre_ob.left.insert(p2->pre);
    pre_ob.right.insert(p1->pre);
    sink.push_back(Obligation{pre_ob, std::string(what) + " pre", pos});
    logic::Sequent post_ob;
    post_ob.ctx = ctx.extended(y, p1->result);
    post_ob.left.insert(p2->pre);
    post_ob.left.insert(subst(p1->post, p1->post_binder, yv));
    post_ob.right.insert(subst(p2->post, p2->post_binder, yv));
    sink.push_back(Obligation{post_ob, std::string(what) + " post", pos});
    return;
  }
  throw TypeError("cannot subsume between Pure and MST computation types",
                  pos);
}

CheckReport Checker::check_comp(const Context& ctx, const CompPtr& e,
                                const CompTypePtr& ascription,
                                bool discharge) {
  if (auto err = wf_comp_type(ctx, ascription))
    throw TypeError("ascription: " + *err, e->pos);

  CheckReport report;
  std::vector<Obligation> obligations;

  const auto* masc = std::get_if<MstTy>(&ascription->node);
  CompTypePtr inferred;
  if (masc) {
    std::set<Name> avoid = free_vars(ascription);
    Name s0 = fresh_in_ctx(ctx, "s0", avoid);
    Path path{ctx.extended(s0, type_state()),
              {subst(masc->pre, masc->pre_binder, v_var(s0))},
              s0};
    inferred = infer_rec(e, path, obligations);
    if (std::holds_alternative<PureTy>(inferred->node))
      inferred = lift_pure(inferred, masc->index);
  } else {
    Path path{ctx, {std::get<PureTy>(ascription->node).pre}, ""};
    inferred = infer_rec(e, path, obligations);
  }
  report.inferred = inferred;
  sub_comp(ctx, inferred, ascription, e->pos, "Sub-MST", obligations);
  report.obligations = std::move(obligations);

  if (discharge) {
    report.accepted = true;
    for (const auto& o : report.obligations) {
      bool ok = logic::proved(logic::sc_prove(o.sequent, prover_));
      report.verdicts.push_back(ok ? Verdict::Proved : Verdict::Unknown);
      if (!ok) report.accepted = false;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Fragment lint.

bool is_mst_fragment_value(const ValuePtr& v) {
  return std::visit(
      overloaded{
          [&](const PairVal& p) {
            return is_mst_fragment_value(p.first) &&
                   is_mst_fragment_value(p.second);
          },
          [&](const InlVal& i) { return is_mst_fragment_value(i.value); },
          [&](const InrVal& i) { return is_mst_fragment_value(i.value); },
          [&](const LambdaVal& l) { return is_mst_fragment(l.body); },
          [&](const ReifyVal&) { return false; },
          [&](const PrimApp& p) { return is_mst_fragment_value(p.arg); },
          [&](const auto&) { return true; },
      },
      v->node);
}

bool is_mst_fragment(const CompPtr& e) {
  return std::visit(
      overloaded{
          [&](const Return& r) {
            return is_false(r.index) && is_mst_fragment_value(r.value);
          },
          [&](const PureReturn&) { return false; },
          [&](const Bind& b) {
            return is_mst_fragment(b.first) && is_mst_fragment(b.rest);
          },
          [&](const Apply& a) {
            return is_mst_fragment_value(a.fn) &&
                   is_mst_fragment_value(a.arg);
          },
          [&](const PMatch& p) {
            return is_mst_fragment_value(p.scrutinee) &&
                   is_mst_fragment(p.body);
          },
          [&](const Case& c) {
            return is_mst_fragment_value(c.scrutinee) &&
                   is_mst_fragment(c.left) && is_mst_fragment(c.right);
          },
          [&](const Get& g) { return is_false(g.index); },
          [&](const Put& p) {
            return is_false(p.index) && is_mst_fragment_value(p.state);
          },
          [&](const Witness& w) { return is_false(w.index); },
          [&](const Recall& r) { return is_false(r.index); },
          [&](const Reflect&) { return false; },
          [&](const Coerce&) { return false; },
      },
      e->node);
}

}  // namespace mst::tc
