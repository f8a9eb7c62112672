#pragma once

#include <random>
#include <string>
#include <vector>

#include "mst/ast.hpp"
#include "mst/domain.hpp"

// Seeded generators for property tests. Names are drawn from a pool that
// avoids keywords, domain constants, and primitive names so generated
// syntax survives the printer/parser round trip.

namespace gen {

using namespace mst;

struct Gen {
  std::mt19937 rng;
  int counter = 0;

  explicit Gen(unsigned seed) : rng(seed) {}

  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  }
  bool coin() { return pick(2) == 0; }

  Name var_name() {
    static const char* pool[] = {"x", "y", "z", "u", "v", "w", "p", "q"};
    return pool[pick(8)];
  }
  Name fresh_var() { return "g" + std::to_string(counter++); }

  TypePtr first_order_type(int depth) {
    if (depth <= 0) {
      switch (pick(3)) {
        case 0: return type_state();
        case 1: return type_unit();
        default: return type_bool();
      }
    }
    switch (pick(5)) {
      case 0: return type_state();
      case 1: return type_unit();
      case 2: return type_bool();
      case 3:
        return type_prod(first_order_type(depth - 1),
                         first_order_type(depth - 1));
      default:
        return type_sum(first_order_type(depth - 1),
                        first_order_type(depth - 1));
    }
  }

  // A closed value of the given first-order type, drawing states from the
  // domain's constants.
  ValuePtr value_of(const TypePtr& t, const StateDomain& dom) {
    return std::visit(
        overloaded{
            [&](const StateTy&) -> ValuePtr {
              return v_const(dom.constants[pick(dom.constants.size())]);
            },
            [&](const UnitTy&) -> ValuePtr { return v_unit(); },
            [&](const ProdTy& p) -> ValuePtr {
              return v_pair(value_of(p.left, dom), value_of(p.right, dom));
            },
            [&](const SumTy& s) -> ValuePtr {
              if (coin()) return v_inl(value_of(s.left, dom), s.right);
              return v_inr(value_of(s.right, dom), s.left);
            },
            [&](const DepArrowTy&) -> ValuePtr { return v_unit(); },
        },
        t->node);
  }

  // Atoms over state terms built from constants, scope variables, and the
  // domain's primitives.
  ValuePtr state_term(const std::vector<Name>& scope, const StateDomain& dom,
                      int depth) {
    if (depth > 0 && !dom.prims.empty() && pick(3) == 0)
      return v_prim(dom.prims[pick(dom.prims.size())].name,
                    state_term(scope, dom, depth - 1));
    if (!scope.empty() && coin()) return v_var(scope[pick(scope.size())]);
    return v_const(dom.constants[pick(dom.constants.size())]);
  }

  FormulaPtr atom(const std::vector<Name>& scope, const StateDomain& dom) {
    ValuePtr a = state_term(scope, dom, 1);
    ValuePtr b = state_term(scope, dom, 1);
    if (coin()) return f_rel(a, b);
    return f_eq(type_state(), a, b);
  }

  FormulaPtr formula(const std::vector<Name>& scope, const StateDomain& dom,
                     int depth) {
    if (depth <= 0) {
      switch (pick(4)) {
        case 0: return f_top();
        case 1: return f_bot();
        default: return atom(scope, dom);
      }
    }
    switch (pick(8)) {
      case 0: return f_top();
      case 1: return atom(scope, dom);
      case 2:
        return f_and(formula(scope, dom, depth - 1),
                     formula(scope, dom, depth - 1));
      case 3:
        return f_or(formula(scope, dom, depth - 1),
                    formula(scope, dom, depth - 1));
      case 4:
        return f_implies(formula(scope, dom, depth - 1),
                         formula(scope, dom, depth - 1));
      case 5: {
        Name b = fresh_var();
        auto scope2 = scope;
        scope2.push_back(b);
        if (coin()) return f_forall(b, type_state(),
                                    formula(scope2, dom, depth - 1));
        return f_exists(b, type_state(), formula(scope2, dom, depth - 1));
      }
      case 6: {
        Name b = fresh_var();
        auto scope2 = scope;
        scope2.push_back(b);
        return f_witnessed(Predicate{b, formula(scope2, dom, depth - 1)});
      }
      default: return atom(scope, dom);
    }
  }

  Predicate predicate(const StateDomain& dom, int depth) {
    Name b = fresh_var();
    return Predicate{b, formula({b}, dom, depth)};
  }

  // Closed, witness-free, true-indexed computations over the domain:
  // get/put/return/bind/case. `state_scope` are state-typed variables.
  CompPtr rmst_term(const std::vector<Name>& state_scope,
                    const StateDomain& dom, int depth) {
    if (depth <= 0) {
      if (coin()) return c_return(v_true(), v_unit());
      return c_get(v_true());
    }
    switch (pick(6)) {
      case 0:
        return c_return(v_true(), v_unit());
      case 1:
        return c_get(v_true());
      case 2:
        return c_put(v_true(), state_term(state_scope, dom, 1));
      case 3: {
        // bind a state out of get so puts can use it
        Name x = fresh_var();
        auto scope2 = state_scope;
        scope2.push_back(x);
        return c_bind(x, c_get(v_true()), rmst_term(scope2, dom, depth - 1));
      }
      case 4: {
        Name x = fresh_var();
        return c_bind(x, rmst_term(state_scope, dom, depth - 1),
                      rmst_term(state_scope, dom, depth - 1));
      }
      default: {
        Name xl = fresh_var(), xr = fresh_var();
        ValuePtr scrut = coin() ? v_true() : v_false();
        return c_case(scrut, xl, rmst_term(state_scope, dom, depth - 1), xr,
                      rmst_term(state_scope, dom, depth - 1));
      }
    }
  }
};

}  // namespace gen
