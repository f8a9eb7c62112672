#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mst/ast.hpp"
#include "mst/domain.hpp"

// Instrumented small-step semantics over configurations (e, sigma, W) and
// the runtime harness that shadows the progress, preservation, and partial
// correctness theorems on every trace.

namespace mst::interp {

// Finite set of witnessed predicates, deduplicated up to alpha equivalence;
// insertion order retained for reporting.
struct WitnessLog {
  std::vector<Predicate> preds;

  bool insert(const Predicate& p);
  bool contains(const Predicate& p) const;
  bool subset_of(const WitnessLog& other) const;
  std::size_t size() const { return preds.size(); }
};

struct Configuration {
  CompPtr term;
  ValuePtr state;  // always a domain constant while stepping
  WitnessLog log;
};

struct Stepped {
  Configuration next;
  std::string rule;  // innermost redex rule name
  std::optional<Predicate> action_pred;  // set by Witness/Recall steps
};
struct Done {
  ValuePtr value;
};
struct Stuck {
  std::string diagnostic;
};
using StepResult = std::variant<Stepped, Done, Stuck>;

StepResult step(const Configuration& c, const StateDomain& dom);

struct Trace {
  std::vector<Configuration> configs;  // configs[0] is the initial one
  std::vector<std::string> rules;      // rules[i] steps configs[i] to [i+1]
  std::vector<std::optional<Predicate>> action_preds;

  enum class End { Done, Stuck, FuelExhausted };
  End end = End::FuelExhausted;
  ValuePtr result;         // when Done
  std::string diagnostic;  // when Stuck

  CompTypePtr ascription;  // optional; consulted by the harness
};

Trace run(const CompPtr& program, const ValuePtr& initial,
          const StateDomain& dom, std::size_t fuel);

// Tarskian evaluation extended with the trace semantics of `witnessed`:
// the logged predicates entail the queried one (cut-free search at small
// depth), falling back to evaluating the predicate at the current state.
EvalOutcome eval_formula(const StateDomain& dom, const FormulaPtr& f,
                         const WitnessLog* log = nullptr,
                         const ValuePtr& current_state = nullptr,
                         std::size_t prover_depth = 4);

// Well-formed state-log pairs: every logged predicate holds at the state
// and is stable under the preorder (checked by carrier enumeration, and
// attempted symbolically).
std::optional<std::string> wf_state_log(const ValuePtr& state,
                                        const WitnessLog& log,
                                        const StateDomain& dom,
                                        std::size_t prover_depth);

struct HarnessReport {
  struct Violation {
    std::size_t step;  // index into configs (the later configuration)
    std::string clause;
  };
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
  bool postcondition_checked = false;
  bool postcondition_sampled = false;  // verified on the sample only
  bool ok() const { return violations.empty(); }
  std::string render() const;
};

HarnessReport harness_check(const Trace& trace, const StateDomain& dom,
                            std::size_t prover_depth);

// One line per configuration: index TAB rule TAB state TAB logsize, where
// the first line carries the pseudo-rule "init".
std::string trace_to_text(const Trace& t);

// Replays an exported trace: preorder between consecutive states, log size
// monotone, and growth only on Witness-False. Returns a diagnostic on the
// first violation.
std::optional<std::string> replay_check(const std::string& text,
                                        const StateDomain& dom);

}  // namespace mst::interp
