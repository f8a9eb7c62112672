#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mst/ast.hpp"

// The entailment engine: a cut-free multi-conclusion sequent calculus for
// classical first-order logic extended with rel/==/witnessed, bounded
// backward proof search, a schema-level proof checker, and the
// witnessed-inversion extraction.

namespace mst::logic {

// Finite set of formulas, deduplicated up to alpha equivalence; insertion
// order is retained for deterministic output. Binder-free formulas print
// canonically, so a string index answers most membership queries without
// the linear alpha scan.
class FormulaSet {
 public:
  FormulaSet() = default;
  explicit FormulaSet(std::vector<FormulaPtr> fs) {
    for (auto& f : fs) insert(std::move(f));
  }

  bool insert(FormulaPtr f);
  bool contains(const FormulaPtr& f) const;
  const std::vector<FormulaPtr>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  FormulaSet with(FormulaPtr f) const;
  FormulaSet without(const FormulaPtr& f) const;
  bool subset_of(const FormulaSet& other) const;
  bool set_eq(const FormulaSet& other) const;

 private:
  std::vector<FormulaPtr> items_;
  std::set<std::string> prints_;
  std::size_t with_binders_ = 0;  // count of items that contain binders
};

// Judgment Gamma | Phi |- Phi'.
struct Sequent {
  Context ctx;
  FormulaSet left, right;
};

bool sequent_eq(const Sequent& a, const Sequent& b);
std::string pretty(const Sequent& s);

std::set<Name> sequent_free_vars(const Sequent& s);

enum class Rule {
  Ax,
  AndL,
  AndR,
  OrL,
  OrR,
  ImpliesL,
  ImpliesR,
  ForallL,
  ForallR,
  ExistsL,
  ExistsR,
  BotL,
  TopR,
  ContractR,
  WitnessedWeakenSC,
  EqReflSC,
  EqTransportSC,
  RelReflSC,
  RelTransSC,
  SumDisjointSC,
  PairInjectiveSC,
  BoolSplitSC,
};

const char* rule_name(Rule r);

struct Proof;
using ProofPtr = std::shared_ptr<const Proof>;

// One rule application. The auxiliary fields identify principal formulas
// and instantiation data so each node checks against its schema without
// search.
struct Proof {
  Rule rule;
  Sequent conclusion;
  std::vector<ProofPtr> premises;

  FormulaPtr principal;   // main formula acted on
  FormulaPtr principal2;  // second principal (WitnessedWeaken right,
                          // EqTransport source atom, RelTrans second atom)
  FormulaPtr produced;    // formula added to the premise's left side
  ValuePtr witness;       // quantifier instantiation witness
  Name eigen;             // eigenvariable (ForallR/ExistsL/WitnessedWeaken)
  ValuePtr split_term;    // BoolSplit subject
};

std::size_t proof_size(const ProofPtr& p);

struct CheckResult {
  bool ok = true;
  std::string diagnostic;  // path to the offending node when !ok
};

// Validates every node against its rule schema, side conditions included.
CheckResult check_proof(const ProofPtr& p);

// Structural typing of first-order values: variables from the context,
// constants at state, pairs/injections/primitives by shape. Lambdas and
// reified computations are out of reach here (full typing lives in the
// typechecker).
std::optional<TypePtr> simple_value_type(const Context& ctx,
                                         const ValuePtr& v);

// ---------------------------------------------------------------------------
// Bounded backward search.

struct Proved {
  ProofPtr proof;
};
struct Unknown {
  std::size_t depth_exhausted = 0;
};
using ProveOutcome = std::variant<Proved, Unknown>;

inline bool proved(const ProveOutcome& o) {
  return std::holds_alternative<Proved>(o);
}

struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProverOptions {
  std::size_t max_depth = 8;       // essential rule applications per branch
  std::size_t node_budget = 400000;
  std::size_t inst_limit = 3;      // instantiations per formula per branch
  std::vector<Name> constants;     // domain constants for instantiation
  std::vector<FormulaPtr> axioms;  // closed facts added to the left side
};

// Exhaustive depth-bounded search; Proved results always pass check_proof.
// Throws ResourceLimitError when the node budget is exceeded.
ProveOutcome sc_prove(const Sequent& goal, const ProverOptions& opts = {});

// ---------------------------------------------------------------------------
// Constructions from the metatheory.

// stable(s.phi) = forall s' s''. rel s' s'' /\ phi[s'/s] ==> phi[s''/s],
// with fresh binders.
FormulaPtr stable_formula(const Predicate& pred);

// witnessed s'.(/\ phi_i[s'/s]) over a log of predicates; Top when empty.
FormulaPtr witnessed_conj(const std::vector<Predicate>& preds);

// Extensional cut-admissibility probe: both premises of a cut on
// `cut_formula` must be provable within `depth`; the conclusion is then
// re-proved cut-free within twice that depth.
// Throws std::invalid_argument when a premise is not provable.
bool cut_elim_check(const Sequent& left_premise, const Sequent& right_premise,
                    const FormulaPtr& cut_formula, std::size_t depth,
                    const ProverOptions& base = {});

// From a proof of Gamma | Phi, witnessed(s.phi) |- witnessed(s.phi') with
// atomic Phi and s not free in Phi, extracts a proof of
// Gamma, s:state | Phi, phi |- phi'.
// Throws std::invalid_argument on precondition violations.
ProofPtr witnessed_inversion(const ProofPtr& p);

}  // namespace mst::logic
