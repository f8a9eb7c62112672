#include "mst/pretty.hpp"

#include <sstream>

namespace mst {

namespace {

constexpr const char* kLAngle = "⟨";  // ⟨
constexpr const char* kRAngle = "⟩";  // ⟩

// Formula precedence levels, loosest first.
enum FLevel { kQuant = 0, kImplies = 1, kOr = 2, kAnd = 3, kFAtom = 4 };
// Type precedence levels.
enum TLevel { kArrow = 0, kSum = 1, kProd = 2, kTAtom = 3 };

std::string type_str(const TypePtr& t, int level);
std::string comp_type_str(const CompTypePtr& c);
std::string value_str(const ValuePtr& v, bool atom);
std::string comp_str(const CompPtr& e, bool atom);
std::string formula_str(const FormulaPtr& f, int level);

std::string pred_str(const Predicate& p) {
  return "(" + p.binder + ". " + formula_str(p.body, kQuant) + ")";
}

std::string index_str(const ValuePtr& idx) {
  if (is_true(idx)) return "true";
  if (is_false(idx)) return "false";
  return value_str(idx, true);
}

bool is_bool_type(const TypePtr& t) { return alpha_eq(t, type_bool()); }

std::string type_str(const TypePtr& t, int level) {
  return std::visit(
      overloaded{
          [&](const StateTy&) -> std::string { return "state"; },
          [&](const UnitTy&) -> std::string { return "unit"; },
          [&](const ProdTy& p) {
            std::string s = type_str(p.left, kTAtom) + " * " +
                            type_str(p.right, kProd);
            return level > kProd ? "(" + s + ")" : s;
          },
          [&](const SumTy& sm) -> std::string {
            if (is_bool_type(t)) return "bool";
            std::string s =
                type_str(sm.left, kProd) + " + " + type_str(sm.right, kSum);
            return level > kSum ? "(" + s + ")" : s;
          },
          [&](const DepArrowTy& a) {
            std::set<Name> fv = free_vars(a.codomain);
            std::string head =
                fv.count(a.binder)
                    ? "(" + a.binder + ":" + type_str(a.domain, kArrow) + ")"
                    : type_str(a.domain, kSum);
            std::string s = head + " -> " + comp_type_str(a.codomain);
            return level > kArrow ? "(" + s + ")" : s;
          },
      },
      t->node);
}

std::string comp_type_str(const CompTypePtr& c) {
  return std::visit(
      overloaded{
          [&](const MstTy& m) {
            std::ostringstream os;
            os << "MST" << kLAngle << index_str(m.index) << kRAngle << " "
               << type_str(m.result, kTAtom) << " (" << m.pre_binder << ". "
               << formula_str(m.pre, kQuant) << ") (" << m.post_initial << " "
               << m.post_result << " " << m.post_final << ". "
               << formula_str(m.post, kQuant) << ")";
            return os.str();
          },
          [&](const PureTy& p) {
            std::ostringstream os;
            os << "Pure " << type_str(p.result, kTAtom) << " ("
               << formula_str(p.pre, kQuant) << ") (" << p.post_binder << ". "
               << formula_str(p.post, kQuant) << ")";
            return os.str();
          },
      },
      c->node);
}

std::string value_str(const ValuePtr& v, bool atom) {
  if (is_true(v)) return "true";
  if (is_false(v)) return "false";
  return std::visit(
      overloaded{
          [&](const Var& x) { return x.name; },
          [&](const StateConst& c) { return c.name; },
          [&](const UnitVal&) -> std::string { return "()"; },
          [&](const PairVal& p) {
            return "(" + value_str(p.first, false) + ", " +
                   value_str(p.second, false) + ")";
          },
          [&](const InlVal& i) {
            std::string s = "inl" + std::string(kLAngle) +
                            type_str(i.right_type, kArrow) + kRAngle + " " +
                            value_str(i.value, true);
            return atom ? "(" + s + ")" : s;
          },
          [&](const InrVal& i) {
            std::string s = "inr" + std::string(kLAngle) +
                            type_str(i.left_type, kArrow) + kRAngle + " " +
                            value_str(i.value, true);
            return atom ? "(" + s + ")" : s;
          },
          [&](const LambdaVal& l) {
            std::string s = "fun (" + l.binder + ":" +
                            type_str(l.domain, kArrow) + ") -> " +
                            comp_str(l.body, false);
            return atom ? "(" + s + ")" : s;
          },
          [&](const ReifyVal& r) {
            return "reify (" + comp_str(r.body, false) + ")";
          },
          [&](const PrimApp& p) {
            std::string s = p.prim + " " + value_str(p.arg, true);
            return atom ? "(" + s + ")" : s;
          },
      },
      v->node);
}

std::string comp_str(const CompPtr& e, bool atom) {
  std::string s = std::visit(
      overloaded{
          [&](const Return& r) {
            return "return" + std::string(kLAngle) + index_str(r.index) +
                   kRAngle + " " + value_str(r.value, true);
          },
          [&](const PureReturn& r) {
            return "return " + value_str(r.value, true);
          },
          [&](const Bind& b) {
            bool first_is_bind =
                std::holds_alternative<Bind>(b.first->node);
            std::string lhs = comp_str(b.first, false);
            if (first_is_bind) lhs = "(" + lhs + ")";
            std::set<Name> fv = free_vars(b.rest);
            if (!fv.count(b.binder))
              return lhs + "; " + comp_str(b.rest, false);
            return "bind " + b.binder + " = " + lhs + " in " +
                   comp_str(b.rest, false);
          },
          [&](const Apply& a) {
            return value_str(a.fn, true) + " " + value_str(a.arg, true);
          },
          [&](const PMatch& p) {
            return "pmatch " + value_str(p.scrutinee, true) + " with (" +
                   p.fst_binder + ", " + p.snd_binder + ") -> " +
                   comp_str(p.body, false);
          },
          [&](const Case& c) {
            return "case " + value_str(c.scrutinee, true) + " of { inl " +
                   c.left_binder + " -> " + comp_str(c.left, false) +
                   " | inr " + c.right_binder + " -> " +
                   comp_str(c.right, false) + " }";
          },
          [&](const Get& g) {
            return "get" + std::string(kLAngle) + index_str(g.index) + kRAngle;
          },
          [&](const Put& p) {
            return "put" + std::string(kLAngle) + index_str(p.index) +
                   kRAngle + " " + value_str(p.state, true);
          },
          [&](const Witness& w) {
            return "witness" + std::string(kLAngle) + index_str(w.index) +
                   kRAngle + " " + pred_str(w.pred);
          },
          [&](const Recall& r) {
            return "recall" + std::string(kLAngle) + index_str(r.index) +
                   kRAngle + " " + pred_str(r.pred);
          },
          [&](const Reflect& r) {
            return "reflect " + value_str(r.fn, true);
          },
          [&](const Coerce& c) {
            return "coerce (" + comp_str(c.body, false) + ")";
          },
      },
      e->node);
  return atom ? "(" + s + ")" : s;
}

std::string atom_str(const Atom& a) {
  if (a.head.kind == AtomHead::Kind::Rel)
    return "rel " + value_str(a.args[0], true) + " " +
           value_str(a.args[1], true);
  std::string op =
      alpha_eq(a.head.eq_type, type_state())
          ? " == "
          : " ==[" + type_str(a.head.eq_type, kArrow) + "] ";
  return value_str(a.args[0], true) + op + value_str(a.args[1], true);
}

std::string formula_str(const FormulaPtr& f, int level) {
  return std::visit(
      overloaded{
          [&](const Atom& a) -> std::string {
            std::string s = atom_str(a);
            return level > kFAtom ? "(" + s + ")" : s;
          },
          [&](const TopF&) -> std::string { return "True"; },
          [&](const BotF&) -> std::string { return "False"; },
          [&](const AndF& c) {
            std::string s = formula_str(c.left, kFAtom) + " /\\ " +
                            formula_str(c.right, kAnd);
            return level > kAnd ? "(" + s + ")" : s;
          },
          [&](const OrF& c) {
            std::string s = formula_str(c.left, kAnd) + " \\/ " +
                            formula_str(c.right, kOr);
            return level > kOr ? "(" + s + ")" : s;
          },
          [&](const ImpliesF& c) {
            std::string s = formula_str(c.left, kOr) + " ==> " +
                            formula_str(c.right, kImplies);
            return level > kImplies ? "(" + s + ")" : s;
          },
          [&](const ForallF& q) {
            std::string s = "forall " + q.binder + ":" +
                            type_str(q.type, kArrow) + ". " +
                            formula_str(q.body, kQuant);
            return level > kQuant ? "(" + s + ")" : s;
          },
          [&](const ExistsF& q) {
            std::string s = "exists " + q.binder + ":" +
                            type_str(q.type, kArrow) + ". " +
                            formula_str(q.body, kQuant);
            return level > kQuant ? "(" + s + ")" : s;
          },
          [&](const WitnessedF& w) -> std::string {
            return "witnessed " + pred_str(w.pred);
          },
      },
      f->node);
}

}  // namespace

std::string pretty(const TypePtr& t) { return type_str(t, kArrow); }
std::string pretty(const CompTypePtr& c) { return comp_type_str(c); }
std::string pretty(const ValuePtr& v) { return value_str(v, false); }
std::string pretty(const CompPtr& e) { return comp_str(e, false); }
std::string pretty(const FormulaPtr& f) { return formula_str(f, kQuant); }
std::string pretty(const Predicate& p) { return pred_str(p); }

}  // namespace mst
