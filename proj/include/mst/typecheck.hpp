#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mst/ast.hpp"
#include "mst/domain.hpp"
#include "mst/logic.hpp"

// Well-formedness and the typing/subtyping judgments, producing logical
// obligations discharged by the sequent prover. Inference is syntax
// directed; bind chains are checked with an accumulated path of facts
// about the evolving state, the algorithmic counterpart of applying
// computation subsumption at each step.

namespace mst::tc {

struct TypeError : std::runtime_error {
  Pos pos;
  TypeError(std::string msg, Pos p = {})
      : std::runtime_error(std::move(msg)), pos(p) {}
};

struct Obligation {
  logic::Sequent sequent;
  std::string rule;
  Pos pos;
  std::string provenance() const;
};

enum class Verdict { Proved, Unknown };

struct CheckReport {
  CompTypePtr inferred;
  std::vector<Obligation> obligations;
  std::vector<Verdict> verdicts;  // aligned with obligations; empty if the
                                  // discharge pass was skipped
  bool accepted = false;

  std::size_t proved_count() const;
  std::string render_text() const;
  std::string render_machine() const;  // position TAB rule TAB verdict
};

class Checker {
 public:
  Checker(const StateDomain& dom, logic::ProverOptions prover);

  std::optional<std::string> wf_type(const Context& ctx, const TypePtr& t);
  std::optional<std::string> wf_comp_type(const Context& ctx,
                                          const CompTypePtr& c);
  std::optional<std::string> wf_formula(const Context& ctx,
                                        const FormulaPtr& f);

  // Throws TypeError. Obligations arising inside (lambda bodies, binds) are
  // appended to `obligations`.
  TypePtr infer_value(const Context& ctx, const ValuePtr& v,
                      std::vector<Obligation>& obligations);
  TypePtr infer_value(const Context& ctx, const ValuePtr& v);

  // Rule-derived computation type plus the obligations of the whole tree.
  std::pair<CompTypePtr, std::vector<Obligation>> infer_comp(
      const Context& ctx, const CompPtr& e);

  // Runs inference seeded with the ascription's precondition, emits the
  // computation-subtyping obligations, and discharges everything with the
  // prover (skipped when discharge=false; verdicts stay empty).
  CheckReport check_comp(const Context& ctx, const CompPtr& e,
                         const CompTypePtr& ascription, bool discharge = true);

  const StateDomain& domain() const { return dom_; }
  const logic::ProverOptions& prover_options() const { return prover_; }

 private:
  struct Path {
    Context ctx;                     // typing context plus state variables
    std::vector<FormulaPtr> facts;   // knowledge over ctx
    Name cur;                        // variable naming the current state
  };

  CompTypePtr infer_rec(const CompPtr& e, Path& path,
                        std::vector<Obligation>& sink);
  CompTypePtr lift_pure(const CompTypePtr& p, const ValuePtr& index);
  std::optional<std::vector<Obligation>> sub_value(const Context& ctx,
                                                   const TypePtr& sub,
                                                   const TypePtr& super,
                                                   Pos pos);
  void sub_comp(const Context& ctx, const CompTypePtr& sub,
                const CompTypePtr& super, Pos pos, const char* what,
                std::vector<Obligation>& sink);

  const StateDomain& dom_;
  logic::ProverOptions prover_;
};

// True for the abstract fragment: every effect index is literally false
// and reify/reflect/coerce are absent.
bool is_mst_fragment(const CompPtr& e);
bool is_mst_fragment_value(const ValuePtr& v);

}  // namespace mst::tc
