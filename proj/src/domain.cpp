#include "mst/domain.hpp"

#include <algorithm>
#include <sstream>

namespace mst {

std::optional<std::size_t> StateDomain::index_of(const Name& c) const {
  for (std::size_t i = 0; i < constants.size(); ++i)
    if (constants[i] == c) return i;
  return std::nullopt;
}

const StateDomain::Primitive* StateDomain::find_prim(const Name& p) const {
  for (const auto& prim : prims)
    if (prim.name == p) return &prim;
  return nullptr;
}

std::vector<FormulaPtr> StateDomain::axioms() const {
  std::vector<FormulaPtr> out;
  for (const auto& p : prims)
    if (p.axiom) out.push_back(p.axiom);
  return out;
}

StateDomain make_counter_domain(std::size_t n) {
  StateDomain dom;
  dom.name = "counter";
  for (std::size_t i = 0; i <= n; ++i)
    dom.constants.push_back("c" + std::to_string(i));
  dom.exhaustive = false;  // stands in for unbounded nat
  dom.leq = [](std::size_t a, std::size_t b) { return a <= b; };
  // forall s:state. rel s (succ s)
  FormulaPtr ax =
      f_forall("s", type_state(),
               f_rel(v_var("s"), v_prim("succ", v_var("s"))));
  dom.prims.push_back(
      {"succ", [n](std::size_t i) { return i < n ? i + 1 : n; }, ax});
  return dom;
}

namespace {

// Heap states are strings of cell marks, one char per cell: 'u' unused,
// 'a'/'b' used payloads. Name "h_" + marks.
std::vector<std::string> heap_states(std::size_t k) {
  std::vector<std::string> out{""};
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::string> next;
    for (const auto& s : out)
      for (char m : {'u', 'a', 'b'}) next.push_back(s + m);
    out = next;
  }
  return out;
}

bool heap_leq(const std::string& x, const std::string& y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 'u') continue;       // unused may become anything
    if (y[i] == 'u') return false;   // used never reverts
  }
  return true;
}

}  // namespace

StateDomain make_heap_domain(std::size_t k) {
  StateDomain dom;
  dom.name = "heap";
  auto states = heap_states(k);
  for (const auto& s : states) dom.constants.push_back("h_" + s);
  dom.exhaustive = k <= 3;
  dom.leq = [states](std::size_t a, std::size_t b) {
    return heap_leq(states[a], states[b]);
  };
  // alloc0 marks cell 0 used (payload 'a') when unused, else is the
  // identity. Its axiom also records that cell 0 is used afterwards:
  // the state h_a u..u is below exactly the states whose cell 0 is used.
  std::string used0(k, 'u');
  used0[0] = 'a';
  Name used0_name = "h_" + used0;
  FormulaPtr ax = f_and(
      f_forall("s", type_state(),
               f_rel(v_var("s"), v_prim("alloc0", v_var("s")))),
      f_forall("s", type_state(),
               f_rel(v_const(used0_name), v_prim("alloc0", v_var("s")))));
  dom.prims.push_back({"alloc0",
                       [states](std::size_t i) {
                         std::string s = states[i];
                         if (s[0] == 'u') s[0] = 'a';
                         for (std::size_t j = 0; j < states.size(); ++j)
                           if (states[j] == s) return j;
                         return i;
                       },
                       ax});
  return dom;
}

std::optional<std::string> DomainRegistry::add(StateDomain dom) {
  if (find(dom.name)) return "domain '" + dom.name + "' already registered";
  if (auto err = registration_check(dom)) return err;
  domains_.push_back(std::move(dom));
  return std::nullopt;
}

const StateDomain* DomainRegistry::find(const Name& name) const {
  for (const auto& d : domains_)
    if (d.name == name) return &d;
  return nullptr;
}

std::vector<Name> DomainRegistry::names() const {
  std::vector<Name> out;
  for (const auto& d : domains_) out.push_back(d.name);
  return out;
}

DomainRegistry builtin_registry() {
  DomainRegistry reg;
  auto e1 = reg.add(make_counter_domain());
  auto e2 = reg.add(make_heap_domain());
  (void)e1;
  (void)e2;
  return reg;
}

std::optional<std::string> registration_check(const StateDomain& dom) {
  if (dom.constants.empty()) return "constant set S must be non-empty";
  if (!dom.leq) return "missing preorder";
  const std::size_t n = dom.constants.size();
  for (std::size_t a = 0; a < n; ++a)
    if (!dom.leq(a, a))
      return "reflexivity fails at (" + dom.constants[a] + ", " +
             dom.constants[a] + ")";
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (!dom.leq(a, b)) continue;
      for (std::size_t c = 0; c < n; ++c)
        if (dom.leq(b, c) && !dom.leq(a, c))
          return "transitivity fails at (" + dom.constants[a] + ", " +
                 dom.constants[b] + ", " + dom.constants[c] + ")";
    }
  for (const auto& p : dom.prims) {
    if (!p.axiom) continue;
    auto out = eval_closed_formula(dom, p.axiom);
    if (const auto* err = std::get_if<EvalError>(&out))
      return "axiom of '" + p.name + "' unevaluable: " + err->message;
    const auto& res = std::get<EvalResult>(out);
    if (!res.value)
      return "axiom of '" + p.name + "' fails over the carrier sample";
  }
  return std::nullopt;
}

ValuePtr delta(const StateDomain& dom, const Name& prim,
               const ValuePtr& state) {
  const auto* p = dom.find_prim(prim);
  if (!p) throw std::invalid_argument("unknown primitive '" + prim + "'");
  auto idx = state_index(dom, state);
  if (!idx)
    throw std::invalid_argument("primitive argument is not a carrier state");
  return dom.const_term(p->apply(*idx));
}

ValuePtr normalize_value(const StateDomain& dom, const ValuePtr& v) {
  return std::visit(
      overloaded{
          [&](const PrimApp& p) -> ValuePtr {
            ValuePtr arg = normalize_value(dom, p.arg);
            if (const auto* c = std::get_if<StateConst>(&arg->node)) {
              auto idx = dom.index_of(c->name);
              const auto* prim = dom.find_prim(p.prim);
              if (idx && prim) return dom.const_term(prim->apply(*idx));
            }
            return v_prim(p.prim, arg);
          },
          [&](const PairVal& p) -> ValuePtr {
            return v_pair(normalize_value(dom, p.first),
                          normalize_value(dom, p.second));
          },
          [&](const InlVal& i) -> ValuePtr {
            return v_inl(normalize_value(dom, i.value), i.right_type);
          },
          [&](const InrVal& i) -> ValuePtr {
            return v_inr(normalize_value(dom, i.value), i.left_type);
          },
          [&](const auto&) -> ValuePtr { return v; },
      },
      v->node);
}

std::optional<std::size_t> state_index(const StateDomain& dom,
                                       const ValuePtr& v) {
  ValuePtr n = normalize_value(dom, v);
  if (const auto* c = std::get_if<StateConst>(&n->node))
    return dom.index_of(c->name);
  return std::nullopt;
}

bool value_sem_eq(const StateDomain& dom, const ValuePtr& a,
                  const ValuePtr& b) {
  return alpha_eq(normalize_value(dom, a), normalize_value(dom, b));
}

// ---------------------------------------------------------------------------
// Closed-formula evaluation.

namespace {

struct Evaluator {
  const StateDomain& dom;
  const WitnessedHook& hook;

  // Enumerates the closed inhabitants of a type; nullopt when not finitely
  // enumerable (arrows), with `exhaustive` false when the state sample is.
  struct Enumeration {
    std::vector<ValuePtr> values;
    bool exhaustive = true;
  };

  std::optional<Enumeration> enumerate(const TypePtr& t) const {
    return std::visit(
        overloaded{
            [&](const StateTy&) -> std::optional<Enumeration> {
              Enumeration e;
              for (std::size_t i = 0; i < dom.constants.size(); ++i)
                e.values.push_back(dom.const_term(i));
              e.exhaustive = dom.exhaustive;
              return e;
            },
            [&](const UnitTy&) -> std::optional<Enumeration> {
              return Enumeration{{v_unit()}, true};
            },
            [&](const ProdTy& p) -> std::optional<Enumeration> {
              auto l = enumerate(p.left), r = enumerate(p.right);
              if (!l || !r) return std::nullopt;
              Enumeration e;
              e.exhaustive = l->exhaustive && r->exhaustive;
              for (const auto& a : l->values)
                for (const auto& b : r->values)
                  e.values.push_back(v_pair(a, b));
              return e;
            },
            [&](const SumTy& s) -> std::optional<Enumeration> {
              auto l = enumerate(s.left), r = enumerate(s.right);
              if (!l || !r) return std::nullopt;
              Enumeration e;
              e.exhaustive = l->exhaustive && r->exhaustive;
              for (const auto& a : l->values)
                e.values.push_back(v_inl(a, s.right));
              for (const auto& b : r->values)
                e.values.push_back(v_inr(b, s.left));
              return e;
            },
            [&](const DepArrowTy&) -> std::optional<Enumeration> {
              return std::nullopt;
            },
        },
        t->node);
  }

  EvalOutcome atom(const Atom& a) const {
    if (a.head.kind == AtomHead::Kind::Rel) {
      auto i = state_index(dom, a.args[0]);
      auto j = state_index(dom, a.args[1]);
      if (!i || !j)
        return EvalError{"rel argument is not a carrier state"};
      return EvalResult{dom.leq(*i, *j), true};
    }
    return EvalResult{value_sem_eq(dom, a.args[0], a.args[1]), true};
  }

  EvalOutcome eval(const FormulaPtr& f) const {
    return std::visit(
        overloaded{
            [&](const Atom& a) { return atom(a); },
            [&](const TopF&) -> EvalOutcome { return EvalResult{true, true}; },
            [&](const BotF&) -> EvalOutcome {
              return EvalResult{false, true};
            },
            [&](const AndF& c) -> EvalOutcome {
              auto l = eval(c.left);
              if (std::holds_alternative<EvalError>(l)) return l;
              auto lv = std::get<EvalResult>(l);
              if (!lv.value) return lv;  // short-circuit, exactness kept
              auto r = eval(c.right);
              if (std::holds_alternative<EvalError>(r)) return r;
              auto rv = std::get<EvalResult>(r);
              return EvalResult{rv.value, lv.exact && rv.exact};
            },
            [&](const OrF& c) -> EvalOutcome {
              auto l = eval(c.left);
              if (std::holds_alternative<EvalError>(l)) return l;
              auto lv = std::get<EvalResult>(l);
              if (lv.value) return lv;
              auto r = eval(c.right);
              if (std::holds_alternative<EvalError>(r)) return r;
              auto rv = std::get<EvalResult>(r);
              return EvalResult{rv.value, lv.exact && rv.exact};
            },
            [&](const ImpliesF& c) -> EvalOutcome {
              auto l = eval(c.left);
              if (std::holds_alternative<EvalError>(l)) return l;
              auto lv = std::get<EvalResult>(l);
              if (!lv.value) return EvalResult{true, lv.exact};
              auto r = eval(c.right);
              if (std::holds_alternative<EvalError>(r)) return r;
              auto rv = std::get<EvalResult>(r);
              return EvalResult{rv.value, lv.exact && rv.exact};
            },
            [&](const ForallF& q) -> EvalOutcome {
              auto en = enumerate(q.type);
              if (!en)
                return EvalError{"quantifier over non-enumerable type"};
              bool exact_all = true;
              for (const auto& cand : en->values) {
                auto sub = eval(subst(q.body, q.binder, cand));
                if (std::holds_alternative<EvalError>(sub)) return sub;
                auto sv = std::get<EvalResult>(sub);
                if (!sv.value && sv.exact)
                  return EvalResult{false, true};  // real counterexample
                if (!sv.value) return EvalResult{false, false};
                exact_all = exact_all && sv.exact;
              }
              return EvalResult{true, exact_all && en->exhaustive};
            },
            [&](const ExistsF& q) -> EvalOutcome {
              auto en = enumerate(q.type);
              if (!en)
                return EvalError{"quantifier over non-enumerable type"};
              bool exact_all = true;
              for (const auto& cand : en->values) {
                auto sub = eval(subst(q.body, q.binder, cand));
                if (std::holds_alternative<EvalError>(sub)) return sub;
                auto sv = std::get<EvalResult>(sub);
                if (sv.value && sv.exact) return EvalResult{true, true};
                if (sv.value) return EvalResult{true, false};
                exact_all = exact_all && sv.exact;
              }
              return EvalResult{false, exact_all && en->exhaustive};
            },
            [&](const WitnessedF& w) -> EvalOutcome {
              if (!hook)
                return EvalError{
                    "witnessed formula outside an instrumented trace"};
              return hook(dom, w.pred);
            },
        },
        f->node);
  }
};

}  // namespace

EvalOutcome eval_closed_formula(const StateDomain& dom, const FormulaPtr& f,
                                const WitnessedHook& witnessed_hook) {
  return Evaluator{dom, witnessed_hook}.eval(f);
}

}  // namespace mst
