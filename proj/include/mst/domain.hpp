#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mst/ast.hpp"

// State domains give concrete meaning to the abstract state type: a set of
// named state constants, a decidable preorder, and unary primitives with
// logical axioms. Domains are immutable after registration.

namespace mst {

struct StateDomain {
  struct Primitive {
    Name name;
    std::function<std::size_t(std::size_t)> apply;  // on carrier indices
    FormulaPtr axiom;  // closed; validated over the sample at registration
  };

  Name name;
  // Constant names, index-aligned with the carrier sample. All carrier
  // elements are named here (constants == carrierSample for the built-ins).
  std::vector<Name> constants;
  bool exhaustive = false;
  std::function<bool(std::size_t, std::size_t)> leq;
  std::vector<Primitive> prims;

  std::optional<std::size_t> index_of(const Name& c) const;
  bool has_constant(const Name& c) const { return index_of(c).has_value(); }
  const Primitive* find_prim(const Name& p) const;
  ValuePtr const_term(std::size_t i) const { return v_const(constants[i]); }

  // Closed axioms of every primitive, in declaration order.
  std::vector<FormulaPtr> axioms() const;
};

// Monotonic counter: naturals 0..n as c0..cn, preorder <=, primitive succ
// clamping at cn. The sample is marked non-exhaustive (it models nat).
StateDomain make_counter_domain(std::size_t n = 32);

// Small monotonic heap: k cells, each Unused ('u') or Used with payload 'a'
// or 'b'; once a cell is Used it stays Used. Exhaustive for k <= 3.
StateDomain make_heap_domain(std::size_t k = 2);

class DomainRegistry {
 public:
  // Runs the registration checks; returns a diagnostic on failure.
  std::optional<std::string> add(StateDomain dom);
  const StateDomain* find(const Name& name) const;
  std::vector<Name> names() const;

 private:
  std::vector<StateDomain> domains_;
};

// Registry preloaded with the counter and heap instances.
DomainRegistry builtin_registry();

// Preorder laws over the sample plus axiom validation; empty on success.
std::optional<std::string> registration_check(const StateDomain& dom);

// Applies a primitive to a carrier state.
ValuePtr delta(const StateDomain& dom, const Name& prim, const ValuePtr& state);

// Recursively reduces PrimApp nodes whose argument normalizes to a domain
// constant; other structure is rebuilt unchanged.
ValuePtr normalize_value(const StateDomain& dom, const ValuePtr& v);

// Carrier index of a closed state value, after normalization.
std::optional<std::size_t> state_index(const StateDomain& dom,
                                       const ValuePtr& v);

// Semantic equality of closed values: state values compare by carrier
// index, the rest structurally (after normalization).
bool value_sem_eq(const StateDomain& dom, const ValuePtr& a,
                  const ValuePtr& b);

// Tri-state result of Tarskian evaluation over the carrier sample. `exact`
// is false when the verdict relied on a non-exhaustive quantifier sweep.
struct EvalResult {
  bool value = false;
  bool exact = true;
};

struct EvalError {
  std::string message;
};

using EvalOutcome = std::variant<EvalResult, EvalError>;

// Handler for `witnessed` formulas; installed by the evaluator layer.
using WitnessedHook =
    std::function<EvalOutcome(const StateDomain&, const Predicate&)>;

// Evaluates a closed formula over the domain. Quantifiers enumerate the
// carrier sample for state, and the finite inhabitants of unit/sum/product
// types; arrow-typed quantifiers are unevaluable. Without a hook,
// `witnessed` is unevaluable.
EvalOutcome eval_closed_formula(const StateDomain& dom, const FormulaPtr& f,
                                const WitnessedHook& witnessed_hook = {});

}  // namespace mst
