#include "mst/eval.hpp"

#include <sstream>

#include "mst/logic.hpp"
#include "mst/pretty.hpp"

namespace mst::interp {

bool WitnessLog::insert(const Predicate& p) {
  if (contains(p)) return false;
  preds.push_back(p);
  return true;
}

bool WitnessLog::contains(const Predicate& p) const {
  for (const auto& q : preds)
    if (alpha_eq(p, q)) return true;
  return false;
}

bool WitnessLog::subset_of(const WitnessLog& other) const {
  for (const auto& p : preds)
    if (!other.contains(p)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Small-step reduction.

namespace {

StepResult stepped(CompPtr term, ValuePtr state, WitnessLog log,
                   std::string rule,
                   std::optional<Predicate> pred = std::nullopt) {
  return Stepped{Configuration{std::move(term), std::move(state),
                               std::move(log)},
                 std::move(rule), std::move(pred)};
}

bool is_return_true(const CompPtr& e, ValuePtr* payload) {
  const auto* r = std::get_if<Return>(&e->node);
  if (!r || !is_true(r->index)) return false;
  if (payload) *payload = r->value;
  return true;
}

}  // namespace

StepResult step(const Configuration& c, const StateDomain& dom) {
  const CompPtr& e = c.term;
  return std::visit(
      overloaded{
          [&](const Return& r) -> StepResult {
            return Done{normalize_value(dom, r.value)};
          },
          [&](const PureReturn& r) -> StepResult {
            return Done{normalize_value(dom, r.value)};
          },
          [&](const Bind& b) -> StepResult {
            if (const auto* r = std::get_if<Return>(&b.first->node))
              return stepped(subst(b.rest, b.binder, r->value), c.state,
                             c.log, "Bind-Return");
            if (const auto* r = std::get_if<PureReturn>(&b.first->node))
              return stepped(subst(b.rest, b.binder, r->value), c.state,
                             c.log, "Bind-Return");
            StepResult inner = step({b.first, c.state, c.log}, dom);
            if (auto* s = std::get_if<Stepped>(&inner))
              return stepped(
                  c_bind(b.binder, s->next.term, b.rest, e->pos),
                  s->next.state, s->next.log, s->rule, s->action_pred);
            if (std::holds_alternative<Done>(inner))
              return Stuck{"bind head finished without a return form"};
            return inner;
          },
          [&](const Apply& a) -> StepResult {
            if (const auto* l = std::get_if<LambdaVal>(&a.fn->node))
              return stepped(subst(l->body, l->binder, a.arg), c.state, c.log,
                             "Beta");
            if (const auto* rv = std::get_if<ReifyVal>(&a.fn->node)) {
              ValuePtr arg_state = normalize_value(dom, a.arg);
              ValuePtr payload;
              if (is_return_true(rv->body, &payload))
                return stepped(c_pure_return(v_pair(payload, arg_state)),
                               c.state, c.log, "Reify-Return");
              StepResult inner = step({rv->body, arg_state, c.log}, dom);
              if (auto* s = std::get_if<Stepped>(&inner))
                return stepped(
                    c_app(v_reify(s->next.term), s->next.state, e->pos),
                    c.state, s->next.log, s->rule, s->action_pred);
              if (std::holds_alternative<Done>(inner))
                return Stuck{
                    "reified computation finished without a true-indexed "
                    "return"};
              return inner;
            }
            return Stuck{"application of a non-function value: " +
                         pretty(a.fn)};
          },
          [&](const PMatch& p) -> StepResult {
            ValuePtr scrut = normalize_value(dom, p.scrutinee);
            if (const auto* pr = std::get_if<PairVal>(&scrut->node)) {
              CompPtr body = subst(p.body, p.fst_binder, pr->first);
              body = subst(body, p.snd_binder, pr->second);
              return stepped(body, c.state, c.log, "PMatch");
            }
            return Stuck{"pmatch scrutinee is not a pair: " + pretty(scrut)};
          },
          [&](const Case& cs) -> StepResult {
            ValuePtr scrut = normalize_value(dom, cs.scrutinee);
            if (const auto* i = std::get_if<InlVal>(&scrut->node))
              return stepped(subst(cs.left, cs.left_binder, i->value),
                             c.state, c.log, "Case-Inl");
            if (const auto* i = std::get_if<InrVal>(&scrut->node))
              return stepped(subst(cs.right, cs.right_binder, i->value),
                             c.state, c.log, "Case-Inr");
            return Stuck{"case scrutinee is not an injection: " +
                         pretty(scrut)};
          },
          [&](const Get& g) -> StepResult {
            return stepped(c_return(g.index, c.state), c.state, c.log, "Get");
          },
          [&](const Put& p) -> StepResult {
            ValuePtr next = normalize_value(dom, p.state);
            if (!state_index(dom, next))
              return Stuck{"put of a value outside the state carrier: " +
                           pretty(next)};
            return stepped(c_return(p.index, v_unit()), next, c.log, "Put");
          },
          [&](const Witness& w) -> StepResult {
            if (is_false(w.index)) {
              WitnessLog log = c.log;
              log.insert(w.pred);
              return stepped(c_return(w.index, v_unit()), c.state,
                             std::move(log), "Witness-False", w.pred);
            }
            if (is_true(w.index))
              return stepped(c_return(w.index, v_unit()), c.state, c.log,
                             "Witness-True", w.pred);
            return Stuck{"witness with an open effect index"};
          },
          [&](const Recall& r) -> StepResult {
            if (!is_true(r.index) && !is_false(r.index))
              return Stuck{"recall with an open effect index"};
            return stepped(c_return(r.index, v_unit()), c.state, c.log,
                           "Recall", r.pred);
          },
          [&](const Reflect& rf) -> StepResult {
            if (const auto* rv = std::get_if<ReifyVal>(&rf.fn->node))
              return stepped(rv->body, c.state, c.log, "Reflect-Reify");
            const auto* l = std::get_if<LambdaVal>(&rf.fn->node);
            if (!l)
              return Stuck{"reflect of a non-function value: " +
                           pretty(rf.fn)};
            if (const auto* pr = std::get_if<PureReturn>(&l->body->node)) {
              if (const auto* pair = std::get_if<PairVal>(&pr->value->node)) {
                ValuePtr rv2 = subst(pair->first, l->binder, c.state);
                ValuePtr rs = normalize_value(
                    dom, subst(pair->second, l->binder, c.state));
                if (!state_index(dom, rs))
                  return Stuck{
                      "reflected function computed a value outside the "
                      "state carrier: " +
                      pretty(rs)};
                return stepped(c_return(v_true(), rv2), rs, c.log,
                               "Reflect-Return");
              }
              return Stuck{"reflected function returned a non-pair"};
            }
            StepResult inner =
                step({subst(l->body, l->binder, c.state), c.state, c.log},
                     dom);
            if (auto* s = std::get_if<Stepped>(&inner))
              return stepped(
                  c_reflect(v_lambda("_", type_state(), s->next.term),
                            e->pos),
                  s->next.state, s->next.log, s->rule, s->action_pred);
            if (std::holds_alternative<Done>(inner))
              return Stuck{"reflected body finished without a return pair"};
            return inner;
          },
          [&](const Coerce& co) -> StepResult {
            if (const auto* r = std::get_if<Return>(&co.body->node)) {
              if (is_true(r->index))
                return stepped(c_return(v_false(), r->value), c.state, c.log,
                               "Coerce-Return");
              return Stuck{"coerce of a non-true-indexed return"};
            }
            StepResult inner = step({co.body, c.state, c.log}, dom);
            if (auto* s = std::get_if<Stepped>(&inner))
              return stepped(c_coerce(s->next.term, e->pos), s->next.state,
                             s->next.log, s->rule, s->action_pred);
            if (std::holds_alternative<Done>(inner))
              return Stuck{"coerce of a pure return"};
            return inner;
          },
      },
      e->node);
}

Trace run(const CompPtr& program, const ValuePtr& initial,
          const StateDomain& dom, std::size_t fuel) {
  Trace t;
  ValuePtr state = normalize_value(dom, initial);
  t.configs.push_back(Configuration{program, state, {}});
  for (std::size_t i = 0; i < fuel; ++i) {
    StepResult r = step(t.configs.back(), dom);
    if (auto* s = std::get_if<Stepped>(&r)) {
      t.rules.push_back(s->rule);
      t.action_preds.push_back(s->action_pred);
      t.configs.push_back(s->next);
      continue;
    }
    if (auto* d = std::get_if<Done>(&r)) {
      t.end = Trace::End::Done;
      t.result = d->value;
      return t;
    }
    t.end = Trace::End::Stuck;
    t.diagnostic = std::get<Stuck>(r).diagnostic;
    return t;
  }
  t.end = Trace::End::FuelExhausted;
  t.diagnostic = "fuel exhausted";
  return t;
}

// ---------------------------------------------------------------------------
// Formula evaluation with the trace semantics of witnessed.

EvalOutcome eval_formula(const StateDomain& dom, const FormulaPtr& f,
                         const WitnessLog* log, const ValuePtr& current_state,
                         std::size_t prover_depth) {
  WitnessedHook hook;
  if (log) {
    hook = [log, current_state, prover_depth](
               const StateDomain& d, const Predicate& pred) -> EvalOutcome {
      // Entailment of the queried predicate from the logged conjunction.
      logic::Sequent goal;
      Name s = "s";
      {
        std::set<Name> avoid;
        for (const auto& p : log->preds) collect_free_vars(p, avoid);
        collect_free_vars(pred, avoid);
        s = fresh_name(s, avoid);
      }
      goal.ctx = Context{}.extended(s, type_state());
      for (const auto& p : log->preds)
        goal.left.insert(apply_pred(p, v_var(s)));
      goal.right.insert(apply_pred(pred, v_var(s)));
      logic::ProverOptions opts;
      opts.max_depth = prover_depth;
      opts.constants = d.constants;
      opts.axioms = d.axioms();
      try {
        if (logic::proved(logic::sc_prove(goal, opts)))
          return EvalResult{true, true};
      } catch (const logic::ResourceLimitError&) {
        // fall through to the state fallback
      }
      if (current_state) {
        // Sound for assert-true usage: logged predicates hold at the
        // current state, so direct evaluation under-approximates.
        return eval_formula(d, apply_pred(pred, current_state), log,
                            current_state, prover_depth);
      }
      return EvalError{"witnessed formula undecided without a state"};
    };
  }
  return eval_closed_formula(dom, f, hook);
}

// ---------------------------------------------------------------------------
// Well-formed state-log pairs.

std::optional<std::string> wf_state_log(const ValuePtr& state,
                                        const WitnessLog& log,
                                        const StateDomain& dom,
                                        std::size_t prover_depth) {
  auto idx = state_index(dom, state);
  if (!idx) return "state is not a carrier element: " + pretty(state);
  for (const auto& p : log.preds) {
    auto truth = eval_formula(dom, apply_pred(p, state), &log, state,
                              prover_depth);
    if (const auto* err = std::get_if<EvalError>(&truth))
      return "predicate " + pretty(p) + " unevaluable: " + err->message;
    if (!std::get<EvalResult>(truth).value)
      return "logged predicate " + pretty(p) +
             " is false at the current state " + pretty(state);
    // Stability by carrier enumeration.
    for (std::size_t a = 0; a < dom.constants.size(); ++a) {
      auto at_a =
          eval_formula(dom, apply_pred(p, dom.const_term(a)), &log,
                       dom.const_term(a), prover_depth);
      const auto* ra = std::get_if<EvalResult>(&at_a);
      if (!ra || !ra->value) continue;
      for (std::size_t b = 0; b < dom.constants.size(); ++b) {
        if (!dom.leq(a, b)) continue;
        auto at_b =
            eval_formula(dom, apply_pred(p, dom.const_term(b)), &log,
                         dom.const_term(b), prover_depth);
        const auto* rb = std::get_if<EvalResult>(&at_b);
        if (rb && !rb->value)
          return "logged predicate " + pretty(p) +
                 " is not stable under the preorder: holds at " +
                 dom.constants[a] + " but not at " + dom.constants[b];
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Harness.

std::string HarnessReport::render() const {
  std::ostringstream os;
  if (violations.empty())
    os << "harness: ok";
  else
    os << "harness: " << violations.size() << " violation(s)";
  for (const auto& v : violations)
    os << "\n  step " << v.step << ": " << v.clause;
  for (const auto& w : warnings) os << "\n  warning: " << w;
  if (postcondition_checked)
    os << "\n  postcondition: " << (postcondition_sampled ? "sampled-true"
                                                          : "true");
  return os.str();
}

HarnessReport harness_check(const Trace& trace, const StateDomain& dom,
                            std::size_t prover_depth) {
  HarnessReport rep;
  auto violate = [&](std::size_t i, std::string clause) {
    rep.violations.push_back({i, std::move(clause)});
  };

  for (std::size_t i = 0; i + 1 < trace.configs.size(); ++i) {
    const Configuration& a = trace.configs[i];
    const Configuration& b = trace.configs[i + 1];
    const std::string& rule = trace.rules[i];
    auto ia = state_index(dom, a.state);
    auto ib = state_index(dom, b.state);
    if (!ia || !ib) {
      violate(i + 1, "state left the carrier");
      continue;
    }
    if (!dom.leq(*ia, *ib))
      violate(i + 1, "preorder violated: " + pretty(a.state) + " -> " +
                         pretty(b.state));
    if (!a.log.subset_of(b.log))
      violate(i + 1, "log shrank (W ⊆ W' fails)");
    if (rule != "Witness-False" && a.log.size() != b.log.size())
      violate(i + 1, "log changed on a " + rule + " step");
    if (rule == "Recall" && trace.action_preds[i]) {
      const Predicate& p = *trace.action_preds[i];
      logic::Sequent goal;
      std::set<Name> avoid = free_vars(p);
      for (const auto& q : a.log.preds) collect_free_vars(q, avoid);
      Name s = fresh_name("s", avoid);
      goal.ctx = Context{}.extended(s, type_state());
      for (const auto& q : a.log.preds)
        goal.left.insert(apply_pred(q, v_var(s)));
      goal.right.insert(apply_pred(p, v_var(s)));
      logic::ProverOptions opts;
      opts.max_depth = prover_depth;
      opts.constants = dom.constants;
      opts.axioms = dom.axioms();
      bool entailed = false;
      try {
        entailed = logic::proved(logic::sc_prove(goal, opts));
      } catch (const logic::ResourceLimitError&) {
      }
      if (!entailed) {
        auto at_state =
            eval_formula(dom, apply_pred(p, a.state), &a.log, a.state,
                         prover_depth);
        const auto* r = std::get_if<EvalResult>(&at_state);
        if (!r || !r->value)
          rep.warnings.push_back(
              "recall of a predicate not supported by the log: " +
              pretty(p));
      }
    }
  }

  for (std::size_t i = 0; i < trace.configs.size(); ++i) {
    // Skip repeats: the pair (state, log) rarely changes every step.
    if (i > 0 && trace.configs[i].log.size() == trace.configs[i - 1].log.size() &&
        alpha_eq(trace.configs[i].state, trace.configs[i - 1].state))
      continue;
    if (auto err = wf_state_log(trace.configs[i].state, trace.configs[i].log,
                                dom, prover_depth))
      violate(i, "state-log well-formedness: " + *err);
  }

  if (trace.end == Trace::End::Done && trace.ascription) {
    const Configuration& first = trace.configs.front();
    const Configuration& last = trace.configs.back();
    if (const auto* m = std::get_if<MstTy>(&trace.ascription->node)) {
      auto pre = eval_formula(dom, subst(m->pre, m->pre_binder, first.state),
                              &first.log, first.state, prover_depth);
      const auto* pr = std::get_if<EvalResult>(&pre);
      if (pr && pr->value) {
        FormulaPtr post = m->post;
        post = subst(post, m->post_initial, first.state);
        post = subst(post, m->post_result, trace.result);
        post = subst(post, m->post_final, last.state);
        auto res =
            eval_formula(dom, post, &last.log, last.state, prover_depth);
        rep.postcondition_checked = true;
        if (const auto* err = std::get_if<EvalError>(&res)) {
          violate(trace.configs.size() - 1,
                  "postcondition unevaluable: " + err->message);
        } else {
          const auto& r = std::get<EvalResult>(res);
          if (!r.value)
            violate(trace.configs.size() - 1,
                    "ascribed postcondition is false at the final "
                    "configuration");
          rep.postcondition_sampled = !r.exact;
        }
      }
    } else if (const auto* p = std::get_if<PureTy>(&trace.ascription->node)) {
      auto pre = eval_formula(dom, p->pre, &first.log, first.state,
                              prover_depth);
      const auto* pr = std::get_if<EvalResult>(&pre);
      if (pr && pr->value) {
        FormulaPtr post = subst(p->post, p->post_binder, trace.result);
        auto res =
            eval_formula(dom, post, &last.log, last.state, prover_depth);
        rep.postcondition_checked = true;
        if (const auto* err = std::get_if<EvalError>(&res)) {
          violate(trace.configs.size() - 1,
                  "postcondition unevaluable: " + err->message);
        } else {
          const auto& r = std::get<EvalResult>(res);
          if (!r.value)
            violate(trace.configs.size() - 1,
                    "ascribed postcondition is false at the final "
                    "configuration");
          rep.postcondition_sampled = !r.exact;
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Trace export and replay.

std::string trace_to_text(const Trace& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.configs.size(); ++i) {
    os << i << '\t' << (i == 0 ? "init" : t.rules[i - 1]) << '\t'
       << pretty(t.configs[i].state) << '\t' << t.configs[i].log.size()
       << '\n';
  }
  return os.str();
}

std::optional<std::string> replay_check(const std::string& text,
                                        const StateDomain& dom) {
  std::istringstream is(text);
  std::string line;
  std::optional<std::size_t> prev_state;
  std::size_t prev_log = 0;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string idx, rule, state, logsize;
    if (!std::getline(ls, idx, '\t') || !std::getline(ls, rule, '\t') ||
        !std::getline(ls, state, '\t') || !std::getline(ls, logsize))
      return "line " + std::to_string(lineno) + ": malformed trace line";
    auto si = dom.index_of(state);
    if (!si)
      return "line " + std::to_string(lineno) + ": unknown state '" + state +
             "'";
    std::size_t lg = 0;
    try {
      lg = std::stoul(logsize);
    } catch (...) {
      return "line " + std::to_string(lineno) + ": bad log size";
    }
    if (prev_state) {
      if (!dom.leq(*prev_state, *si))
        return "line " + std::to_string(lineno) + ": preorder violated (" +
               dom.constants[*prev_state] + " -> " + dom.constants[*si] + ")";
      if (lg < prev_log)
        return "line " + std::to_string(lineno) + ": log size shrank";
      if (lg != prev_log && rule != "Witness-False")
        return "line " + std::to_string(lineno) +
               ": log grew on a non-witness step (" + rule + ")";
      if (lg > prev_log + 1)
        return "line " + std::to_string(lineno) +
               ": log grew by more than one";
    }
    prev_state = si;
    prev_log = lg;
  }
  if (!prev_state) return "empty trace";
  return std::nullopt;
}

}  // namespace mst::interp
