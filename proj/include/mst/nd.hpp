#pragma once

#include "mst/logic.hpp"

// Natural deduction for the logic of pre- and postconditions: hypothesis
// judgments Gamma | Phi |- phi with classical closure via double-negation
// elimination, plus the domain-specific rules (witnessed weakening,
// equality reflexivity/transport, rel reflexivity/transitivity, sum
// disjointness, pair injectivity, boolean cases).

namespace mst::logic {

enum class NdRule {
  Hyp,
  TopI,
  BotE,
  AndI,
  AndE1,
  AndE2,
  OrI1,
  OrI2,
  OrE,
  ImpI,
  ImpE,
  ForallI,
  ForallE,
  ExistsI,
  ExistsE,
  Dne,
  WitnessedWeaken,
  EqRefl,
  EqTransport,
  RelRefl,
  RelTrans,
  SumDisjoint,
  PairInjective,
  BoolCases,
};

const char* nd_rule_name(NdRule r);

struct NdDerivation;
using NdPtr = std::shared_ptr<const NdDerivation>;

struct NdDerivation {
  NdRule rule;
  Context ctx;
  FormulaSet hyps;
  FormulaPtr conclusion;
  std::vector<NdPtr> premises;

  ValuePtr witness;    // ForallE/ExistsI instantiation, BoolCases subject
  Name eigen;          // ForallI/ExistsE/WitnessedWeaken
  int component = 0;   // PairInjective: 0 = first, 1 = second
};

std::size_t nd_size(const NdPtr& d);

// Validates every node against its schema. A premise may use any subset of
// the hypotheses available at that point (weakening is structural).
CheckResult check_nd(const NdPtr& d);

// Standard translation: a sequent proof of Gamma | Phi |- Phi' becomes a
// natural-deduction derivation of Gamma | Phi |- \/ Phi' (falsum for an
// empty right side).
NdPtr sc_to_nd(const ProofPtr& p);

// The right-side disjunction the translation targets.
FormulaPtr or_chain(const std::vector<FormulaPtr>& items);

}  // namespace mst::logic
