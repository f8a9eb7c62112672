#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

// Abstract syntax for the monotonic-state calculi: value types, indexed
// computation types, fine-grain call-by-value terms, and first-order
// formulas over `rel`, `==` and `witnessed`. All nodes are immutable and
// shared; binders are named, with capture avoided by on-demand freshening.

namespace mst {

using Name = std::string;

struct ValueType;
struct CompType;
struct ValueTerm;
struct CompTerm;
struct Formula;

using TypePtr = std::shared_ptr<const ValueType>;
using CompTypePtr = std::shared_ptr<const CompType>;
using ValuePtr = std::shared_ptr<const ValueTerm>;
using CompPtr = std::shared_ptr<const CompTerm>;
using FormulaPtr = std::shared_ptr<const Formula>;

// A state predicate `s. phi`, binding one state-typed variable in phi.
struct Predicate {
  Name binder;
  FormulaPtr body;
};

// ---------------------------------------------------------------------------
// Value types. `bool` is an alias for unit + unit, never a constructor.

struct StateTy {};
struct UnitTy {};
struct ProdTy {
  TypePtr left, right;
};
struct SumTy {
  TypePtr left, right;
};
// Value-dependent function type (x:domain) -> codomain; x may occur free
// only in the codomain.
struct DepArrowTy {
  Name binder;
  TypePtr domain;
  CompTypePtr codomain;
};

struct ValueType {
  std::variant<StateTy, UnitTy, ProdTy, SumTy, DepArrowTy> node;
};

// ---------------------------------------------------------------------------
// Computation types.

// MST_b t (s. pre) (s x s'. post) — the boolean index b marks the
// computation representation-aware (true) or abstract (false).
struct MstTy {
  ValuePtr index;  // boolean-typed value term: literal or variable
  TypePtr result;
  Name pre_binder;  // initial state
  FormulaPtr pre;
  Name post_initial, post_result, post_final;
  FormulaPtr post;
};

// Pure t (pre) (y. post) — effect-free computations; pre over the ambient
// context only, post additionally over the result binder.
struct PureTy {
  TypePtr result;
  FormulaPtr pre;
  Name post_binder;
  FormulaPtr post;
};

struct CompType {
  std::variant<MstTy, PureTy> node;
};

// ---------------------------------------------------------------------------
// Value terms.

struct Var {
  Name name;
};
// A state constant drawn from the active state domain's constant set.
struct StateConst {
  Name name;
};
struct UnitVal {};
struct PairVal {
  ValuePtr first, second;
};
// Sum injections carry the type of the other side so value typing stays
// syntax-directed.
struct InlVal {
  ValuePtr value;
  TypePtr right_type;
};
struct InrVal {
  ValuePtr value;
  TypePtr left_type;
};
struct LambdaVal {
  Name binder;
  TypePtr domain;
  CompPtr body;
};
// reify e — an MST_true computation exposed as a pure state-passing function.
struct ReifyVal {
  CompPtr body;
};
// Domain-declared unary state primitive applied to a state-typed argument.
struct PrimApp {
  Name prim;
  ValuePtr arg;
};

struct ValueTerm {
  std::variant<Var, StateConst, UnitVal, PairVal, InlVal, InrVal, LambdaVal,
               ReifyVal, PrimApp>
      node;
};

// ---------------------------------------------------------------------------
// Computation terms.

struct Pos {
  int line = 0;
  int col = 0;
  bool known() const { return line > 0; }
};

struct Return {  // return<b> v
  ValuePtr index;
  ValuePtr value;
};
struct PureReturn {  // return v, in Pure
  ValuePtr value;
};
struct Bind {
  Name binder;
  CompPtr first;
  CompPtr rest;
};
struct Apply {
  ValuePtr fn;
  ValuePtr arg;
};
struct PMatch {  // pmatch v with (x1, x2) -> e
  ValuePtr scrutinee;
  Name fst_binder, snd_binder;
  CompPtr body;
};
struct Case {  // case v of { inl x -> e1 | inr y -> e2 }
  ValuePtr scrutinee;
  Name left_binder;
  CompPtr left;
  Name right_binder;
  CompPtr right;
};
struct Get {
  ValuePtr index;
};
struct Put {
  ValuePtr index;
  ValuePtr state;
};
struct Witness {
  ValuePtr index;
  Predicate pred;
};
struct Recall {
  ValuePtr index;
  Predicate pred;
};
struct Reflect {
  ValuePtr fn;
};
struct Coerce {
  CompPtr body;
};

struct CompTerm {
  std::variant<Return, PureReturn, Bind, Apply, PMatch, Case, Get, Put,
               Witness, Recall, Reflect, Coerce>
      node;
  Pos pos{};  // source position when parsed; ignored by alpha_eq
};

// ---------------------------------------------------------------------------
// Formulas.

struct AtomHead {
  enum class Kind { Rel, Eq };
  Kind kind = Kind::Rel;
  TypePtr eq_type;  // only for Eq: the type both arguments inhabit
};

// p v1 v2 — both `rel` and `==` are binary.
struct Atom {
  AtomHead head;
  std::vector<ValuePtr> args;
};
struct TopF {};
struct BotF {};
struct AndF {
  FormulaPtr left, right;
};
struct OrF {
  FormulaPtr left, right;
};
struct ImpliesF {
  FormulaPtr left, right;
};
struct ForallF {
  Name binder;
  TypePtr type;
  FormulaPtr body;
};
struct ExistsF {
  Name binder;
  TypePtr type;
  FormulaPtr body;
};
struct WitnessedF {
  Predicate pred;
};

struct Formula {
  std::variant<Atom, TopF, BotF, AndF, OrF, ImpliesF, ForallF, ExistsF,
               WitnessedF>
      node;
};

// ---------------------------------------------------------------------------
// Ordered typing context.

struct Context {
  std::vector<std::pair<Name, TypePtr>> bindings;

  const TypePtr* lookup(const Name& n) const {
    for (auto it = bindings.rbegin(); it != bindings.rend(); ++it)
      if (it->first == n) return &it->second;
    return nullptr;
  }
  Context extended(const Name& n, TypePtr t) const {
    Context c = *this;
    c.bindings.emplace_back(n, std::move(t));
    return c;
  }
  bool contains(const Name& n) const { return lookup(n) != nullptr; }
};

// ---------------------------------------------------------------------------
// Constructors.

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

TypePtr type_state();
TypePtr type_unit();
TypePtr type_bool();  // structurally unit + unit
TypePtr type_prod(TypePtr a, TypePtr b);
TypePtr type_sum(TypePtr a, TypePtr b);
TypePtr type_arrow(Name binder, TypePtr domain, CompTypePtr codomain);

CompTypePtr comp_mst(ValuePtr index, TypePtr result, Name s, FormulaPtr pre,
                     Name ps, Name px, Name pf, FormulaPtr post);
CompTypePtr comp_pure(TypePtr result, FormulaPtr pre, Name y, FormulaPtr post);

ValuePtr v_var(Name n);
ValuePtr v_const(Name n);
ValuePtr v_unit();
ValuePtr v_pair(ValuePtr a, ValuePtr b);
ValuePtr v_inl(ValuePtr v, TypePtr right_type);
ValuePtr v_inr(ValuePtr v, TypePtr left_type);
ValuePtr v_lambda(Name binder, TypePtr domain, CompPtr body);
ValuePtr v_reify(CompPtr body);
ValuePtr v_prim(Name prim, ValuePtr arg);
ValuePtr v_true();   // inl () : unit + unit
ValuePtr v_false();  // inr () : unit + unit
bool is_true(const ValuePtr& v);
bool is_false(const ValuePtr& v);

CompPtr c_return(ValuePtr index, ValuePtr v, Pos pos = {});
CompPtr c_pure_return(ValuePtr v, Pos pos = {});
CompPtr c_bind(Name binder, CompPtr first, CompPtr rest, Pos pos = {});
CompPtr c_app(ValuePtr fn, ValuePtr arg, Pos pos = {});
CompPtr c_pmatch(ValuePtr v, Name x1, Name x2, CompPtr body, Pos pos = {});
CompPtr c_case(ValuePtr v, Name xl, CompPtr el, Name xr, CompPtr er,
               Pos pos = {});
CompPtr c_get(ValuePtr index, Pos pos = {});
CompPtr c_put(ValuePtr index, ValuePtr state, Pos pos = {});
CompPtr c_witness(ValuePtr index, Predicate pred, Pos pos = {});
CompPtr c_recall(ValuePtr index, Predicate pred, Pos pos = {});
CompPtr c_reflect(ValuePtr fn, Pos pos = {});
CompPtr c_coerce(CompPtr body, Pos pos = {});

FormulaPtr f_rel(ValuePtr a, ValuePtr b);
FormulaPtr f_eq(TypePtr at, ValuePtr a, ValuePtr b);
FormulaPtr f_top();
FormulaPtr f_bot();
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_forall(Name binder, TypePtr t, FormulaPtr body);
FormulaPtr f_exists(Name binder, TypePtr t, FormulaPtr body);
FormulaPtr f_witnessed(Predicate pred);
FormulaPtr f_atom(AtomHead head, std::vector<ValuePtr> args);

// Right-nested conjunction of a formula list; Top for the empty list.
FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs);

// ---------------------------------------------------------------------------
// Free variables.

void collect_free_vars(const TypePtr&, std::set<Name>& out);
void collect_free_vars(const CompTypePtr&, std::set<Name>& out);
void collect_free_vars(const ValuePtr&, std::set<Name>& out);
void collect_free_vars(const CompPtr&, std::set<Name>& out);
void collect_free_vars(const FormulaPtr&, std::set<Name>& out);
void collect_free_vars(const Predicate&, std::set<Name>& out);

template <typename T>
std::set<Name> free_vars(const T& node) {
  std::set<Name> out;
  collect_free_vars(node, out);
  return out;
}

// A name not occurring in `avoid`, derived from `base`.
Name fresh_name(const Name& base, const std::set<Name>& avoid);

// ---------------------------------------------------------------------------
// Capture-avoiding substitution of a value term for a variable.

TypePtr subst(const TypePtr&, const Name& var, const ValuePtr& replacement);
CompTypePtr subst(const CompTypePtr&, const Name& var, const ValuePtr&);
ValuePtr subst(const ValuePtr&, const Name& var, const ValuePtr&);
CompPtr subst(const CompPtr&, const Name& var, const ValuePtr&);
FormulaPtr subst(const FormulaPtr&, const Name& var, const ValuePtr&);
Predicate subst(const Predicate&, const Name& var, const ValuePtr&);

// ---------------------------------------------------------------------------
// Alpha equivalence (equality up to consistent renaming of bound variables).

bool alpha_eq(const TypePtr& a, const TypePtr& b);
bool alpha_eq(const CompTypePtr& a, const CompTypePtr& b);
bool alpha_eq(const ValuePtr& a, const ValuePtr& b);
bool alpha_eq(const CompPtr& a, const CompPtr& b);
bool alpha_eq(const FormulaPtr& a, const FormulaPtr& b);
bool alpha_eq(const Predicate& a, const Predicate& b);

// Instantiate a predicate at a state-typed value term.
FormulaPtr apply_pred(const Predicate& p, const ValuePtr& state);

// Structural size (number of nodes); used for deterministic orderings.
std::size_t term_size(const ValuePtr& v);
std::size_t formula_size(const FormulaPtr& f);

}  // namespace mst
