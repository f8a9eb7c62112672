#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mst/ast.hpp"
#include "mst/domain.hpp"
#include "mst/logic.hpp"

// Concrete syntax. Programs (.mst) select a state domain, define named
// values, and end in a main computation with an ascribed computation type;
// sequent files (.seq) carry one sequent. ASCII keyword alternatives are
// accepted for every unicode form the printer emits.

namespace mst {

struct ParseError : std::runtime_error {
  int line, col;
  std::string expected;
  ParseError(const std::string& msg, int l, int c, std::string exp = "")
      : std::runtime_error(msg + " at " + std::to_string(l) + ":" +
                           std::to_string(c) +
                           (exp.empty() ? "" : " (expected " + exp + ")")),
        line(l),
        col(c),
        expected(std::move(exp)) {}
};

struct SourceProgram {
  Name domain_name;
  std::vector<std::pair<Name, ValuePtr>> decls;  // as written, in order
  CompPtr main;            // with earlier definitions substituted in
  CompTypePtr ascription;  // the declared type of main
  std::optional<Predicate> expect;  // optional expected-result predicate
  Pos main_pos;
};

SourceProgram parse_program(const std::string& text,
                            const DomainRegistry& registry);

// Standalone formulas and sequents parse against a fixed domain (for the
// constant and primitive tables).
FormulaPtr parse_formula(const std::string& text, const StateDomain& dom);
ValuePtr parse_value(const std::string& text, const StateDomain& dom);
CompPtr parse_comp(const std::string& text, const StateDomain& dom);
TypePtr parse_type(const std::string& text, const StateDomain& dom);
CompTypePtr parse_comp_type(const std::string& text, const StateDomain& dom);

struct ParsedSequent {
  logic::Sequent sequent;
  Name domain_name;  // from the optional header, else "counter"
};

ParsedSequent parse_sequent(const std::string& text,
                            const DomainRegistry& registry);

}  // namespace mst
