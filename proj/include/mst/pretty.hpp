#pragma once

#include <string>

#include "mst/ast.hpp"

// Canonical text rendering. The parser accepts everything this emits;
// parse(pretty(x)) is alpha-equivalent to x.

namespace mst {

std::string pretty(const TypePtr& t);
std::string pretty(const CompTypePtr& c);
std::string pretty(const ValuePtr& v);
std::string pretty(const CompPtr& e);
std::string pretty(const FormulaPtr& f);
std::string pretty(const Predicate& p);  // "(s. body)"

}  // namespace mst
