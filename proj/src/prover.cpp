#include <deque>
#include <functional>
#include <map>

#include "mst/logic.hpp"
#include "mst/pretty.hpp"

// Backward proof search in four phases per node:
//   1. closures (Ax, Bot-L, Top-R, Sum-Disjoint);
//   2. eager invertible structural rules, cost-free;
//   3. cost-free, non-branching derivations: pair injectivity, targeted
//      equality/rel reasoning through a proof-producing congruence closure
//      (which emits Eq-Refl/Rel-Refl/Rel-Trans/Eq-Transport chains for the
//      atoms the goal needs), and bounded quantifier instantiation
//      (Forall-L/Exists-R, at most inst_limit instances per formula per
//      branch). All of these only add formulas to one side, so they are
//      invertible by weakening admissibility and need no backtracking.
//   4. the essential choices, which consume depth: Witnessed-Weaken and
//      boolean case splits.
// Search is exhaustive within the bounds, so Unknown means the bounded rule
// space is used up, not disproof.

namespace mst::logic {

namespace {

using InstMap = std::map<std::string, std::size_t>;

struct NodeSpec {
  Rule rule;
  FormulaPtr principal;
  FormulaPtr principal2;
  FormulaPtr produced;
  ValuePtr witness;
  ValuePtr split_term;
  Name eigen;
};

ProofPtr mk_proof(const NodeSpec& spec, Sequent conclusion,
                  std::vector<ProofPtr> premises) {
  auto p = std::make_shared<Proof>();
  p->rule = spec.rule;
  p->conclusion = std::move(conclusion);
  p->premises = std::move(premises);
  p->principal = spec.principal;
  p->principal2 = spec.principal2;
  p->produced = spec.produced;
  p->witness = spec.witness;
  p->split_term = spec.split_term;
  p->eigen = spec.eigen;
  return p;
}

// --- term utilities ----------------------------------------------------------

void value_subterms(const ValuePtr& v, const std::set<Name>& bound,
                    std::vector<ValuePtr>& out) {
  std::set<Name> fv = free_vars(v);
  bool scoped = true;
  for (const auto& n : fv)
    if (bound.count(n)) scoped = false;
  if (scoped) out.push_back(v);
  std::visit(overloaded{
                 [&](const PairVal& p) {
                   value_subterms(p.first, bound, out);
                   value_subterms(p.second, bound, out);
                 },
                 [&](const InlVal& i) { value_subterms(i.value, bound, out); },
                 [&](const InrVal& i) { value_subterms(i.value, bound, out); },
                 [&](const PrimApp& p) { value_subterms(p.arg, bound, out); },
                 [&](const auto&) {},
             },
             v->node);
}

void formula_subterms(const FormulaPtr& f, std::set<Name>& bound,
                      std::vector<ValuePtr>& out) {
  std::visit(
      overloaded{
          [&](const Atom& a) {
            for (const auto& v : a.args) value_subterms(v, bound, out);
          },
          [&](const TopF&) {},
          [&](const BotF&) {},
          [&](const AndF& c) {
            formula_subterms(c.left, bound, out);
            formula_subterms(c.right, bound, out);
          },
          [&](const OrF& c) {
            formula_subterms(c.left, bound, out);
            formula_subterms(c.right, bound, out);
          },
          [&](const ImpliesF& c) {
            formula_subterms(c.left, bound, out);
            formula_subterms(c.right, bound, out);
          },
          [&](const ForallF& q) {
            bool added = bound.insert(q.binder).second;
            formula_subterms(q.body, bound, out);
            if (added) bound.erase(q.binder);
          },
          [&](const ExistsF& q) {
            bool added = bound.insert(q.binder).second;
            formula_subterms(q.body, bound, out);
            if (added) bound.erase(q.binder);
          },
          [&](const WitnessedF& w) {
            bool added = bound.insert(w.pred.binder).second;
            formula_subterms(w.pred.body, bound, out);
            if (added) bound.erase(w.pred.binder);
          },
      },
      f->node);
}

void dedupe_push(std::vector<ValuePtr>& out, const ValuePtr& v,
                 std::size_t cap) {
  if (out.size() >= cap) return;
  for (const auto& u : out)
    if (alpha_eq(u, v)) return;
  out.push_back(v);
}

// Goal subterms first: candidates from the right side rank before those
// that only occur on the left; within a side, variables and constants rank
// before compound terms.
std::vector<ValuePtr> instantiation_candidates(const Sequent& s,
                                               std::size_t cap) {
  std::vector<ValuePtr> right_raw, left_raw;
  std::set<Name> bound;
  for (const auto& f : s.right.items())
    formula_subterms(f, bound, right_raw);
  for (const auto& f : s.left.items()) formula_subterms(f, bound, left_raw);
  auto atomic = [](const ValuePtr& v) {
    return std::holds_alternative<Var>(v->node) ||
           std::holds_alternative<StateConst>(v->node) ||
           std::holds_alternative<UnitVal>(v->node);
  };
  std::vector<ValuePtr> out;
  for (const auto& v : right_raw)
    if (atomic(v)) dedupe_push(out, v, cap);
  for (const auto& v : left_raw)
    if (atomic(v)) dedupe_push(out, v, cap);
  for (const auto& v : right_raw)
    if (!atomic(v)) dedupe_push(out, v, cap);
  for (const auto& v : left_raw)
    if (!atomic(v)) dedupe_push(out, v, cap);
  return out;
}

ValuePtr replace_all(const ValuePtr& t, const ValuePtr& v, const ValuePtr& w) {
  if (alpha_eq(t, v)) return w;
  return std::visit(
      overloaded{
          [&](const PairVal& p) {
            return v_pair(replace_all(p.first, v, w),
                          replace_all(p.second, v, w));
          },
          [&](const InlVal& i) {
            return v_inl(replace_all(i.value, v, w), i.right_type);
          },
          [&](const InrVal& i) {
            return v_inr(replace_all(i.value, v, w), i.left_type);
          },
          [&](const PrimApp& p) {
            return v_prim(p.prim, replace_all(p.arg, v, w));
          },
          [&](const auto&) { return t; },
      },
      t->node);
}

// --- congruence closure with explanations -------------------------------------

// A rewrite step justified by a left equation: occurrences of `from` become
// `to`, where {from, to} are the equation's sides in some order.
struct Step {
  ValuePtr from, to;
  FormulaPtr eq;
};

class Closure {
 public:
  int add(const ValuePtr& t) {
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (alpha_eq(terms_[i], t)) return static_cast<int>(i);
    terms_.push_back(t);
    uf_.push_back(static_cast<int>(terms_.size()) - 1);
    pf_parent_.push_back(-1);
    pf_reason_.push_back({});
    return static_cast<int>(terms_.size()) - 1;
  }

  // Registers t and all of its relevant subterms.
  int add_deep(const ValuePtr& t) {
    std::visit(overloaded{
                   [&](const PairVal& p) {
                     add_deep(p.first);
                     add_deep(p.second);
                   },
                   [&](const InlVal& i) { add_deep(i.value); },
                   [&](const InrVal& i) { add_deep(i.value); },
                   [&](const PrimApp& p) { add_deep(p.arg); },
                   [&](const auto&) {},
               },
               t->node);
    return add(t);
  }

  int find(int x) {
    while (uf_[static_cast<size_t>(x)] != x) {
      uf_[static_cast<size_t>(x)] =
          uf_[static_cast<size_t>(uf_[static_cast<size_t>(x)])];
      x = uf_[static_cast<size_t>(x)];
    }
    return x;
  }

  bool same(int a, int b) { return find(a) == find(b); }

  struct Reason {
    FormulaPtr eq;  // base equation, or null for congruence
    std::vector<std::pair<int, int>> child_pairs;
  };

  void merge(int a, int b, Reason r) {
    if (same(a, b)) return;
    reroot(a);
    pf_parent_[static_cast<size_t>(a)] = b;
    pf_reason_[static_cast<size_t>(a)] = std::move(r);
    uf_[static_cast<size_t>(find(a))] = find(b);
  }

  // Saturates with base equations and congruence over the universe.
  void saturate(const std::vector<FormulaPtr>& equations) {
    for (const auto& f : equations) {
      const auto& a = std::get<Atom>(f->node);
      int u = add_deep(a.args[0]);
      int v = add_deep(a.args[1]);
      merge(u, v, Reason{f, {}});
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < terms_.size(); ++i)
        for (std::size_t j = i + 1; j < terms_.size(); ++j) {
          int a = static_cast<int>(i), b = static_cast<int>(j);
          if (same(a, b)) continue;
          auto pairs = congruent(terms_[i], terms_[j]);
          if (!pairs) continue;
          bool all = true;
          for (auto [x, y] : *pairs)
            if (!same(x, y)) all = false;
          if (!all) continue;
          merge(a, b, Reason{nullptr, *pairs});
          changed = true;
        }
    }
  }

  // The rewrite steps turning terms_[u] into terms_[v]; empty when they are
  // already alpha-equal. Returns false if the terms are not equivalent.
  bool explain(int u, int v, std::vector<Step>& out) {
    if (!same(u, v)) return false;
    if (alpha_eq(terms_[static_cast<size_t>(u)],
                 terms_[static_cast<size_t>(v)]))
      return true;
    // collect paths to the proof-forest root
    std::vector<int> pu = path_to_root(u), pv = path_to_root(v);
    // find the lowest common node
    std::set<int> on_u(pu.begin(), pu.end());
    int lca = -1;
    for (int x : pv)
      if (on_u.count(x)) {
        lca = x;
        break;
      }
    if (lca == -1) return false;
    for (int x : pu) {
      if (x == lca) break;
      emit_edge(x, /*forward=*/true, out);
    }
    std::vector<Step> back;
    for (int x : pv) {
      if (x == lca) break;
      emit_edge(x, /*forward=*/false, back);
    }
    out.insert(out.end(), back.rbegin(), back.rend());
    return true;
  }

  const ValuePtr& term(int i) const { return terms_[static_cast<size_t>(i)]; }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<ValuePtr> terms_;
  std::vector<int> uf_;
  std::vector<int> pf_parent_;
  std::vector<Reason> pf_reason_;

  std::optional<std::vector<std::pair<int, int>>> congruent(
      const ValuePtr& a, const ValuePtr& b) {
    if (a->node.index() != b->node.index()) return std::nullopt;
    if (const auto* pa = std::get_if<PrimApp>(&a->node)) {
      const auto& pb = std::get<PrimApp>(b->node);
      if (pa->prim != pb.prim) return std::nullopt;
      return std::vector<std::pair<int, int>>{{add(pa->arg), add(pb.arg)}};
    }
    if (const auto* pa = std::get_if<PairVal>(&a->node)) {
      const auto& pb = std::get<PairVal>(b->node);
      return std::vector<std::pair<int, int>>{
          {add(pa->first), add(pb.first)}, {add(pa->second), add(pb.second)}};
    }
    if (const auto* ia = std::get_if<InlVal>(&a->node)) {
      const auto& ib = std::get<InlVal>(b->node);
      if (!alpha_eq(ia->right_type, ib.right_type)) return std::nullopt;
      return std::vector<std::pair<int, int>>{
          {add(ia->value), add(ib.value)}};
    }
    if (const auto* ia = std::get_if<InrVal>(&a->node)) {
      const auto& ib = std::get<InrVal>(b->node);
      if (!alpha_eq(ia->left_type, ib.left_type)) return std::nullopt;
      return std::vector<std::pair<int, int>>{
          {add(ia->value), add(ib.value)}};
    }
    return std::nullopt;
  }

  void reroot(int x) {
    int prev = -1;
    Reason prev_reason;
    while (x != -1) {
      int next = pf_parent_[static_cast<size_t>(x)];
      Reason r = pf_reason_[static_cast<size_t>(x)];
      pf_parent_[static_cast<size_t>(x)] = prev;
      pf_reason_[static_cast<size_t>(x)] = prev_reason;
      prev = x;
      prev_reason = r;
      x = next;
    }
  }

  std::vector<int> path_to_root(int x) {
    std::vector<int> out;
    while (x != -1) {
      out.push_back(x);
      x = pf_parent_[static_cast<size_t>(x)];
    }
    return out;
  }

  // Emits the steps for the proof-forest edge x -> parent(x).
  void emit_edge(int x, bool forward, std::vector<Step>& out) {
    int parent = pf_parent_[static_cast<size_t>(x)];
    const Reason& r = pf_reason_[static_cast<size_t>(x)];
    ValuePtr a = terms_[static_cast<size_t>(x)];
    ValuePtr b = terms_[static_cast<size_t>(parent)];
    if (!forward) std::swap(a, b);
    if (r.eq) {
      out.push_back(Step{a, b, r.eq});
      return;
    }
    // congruence edge: explain the children
    for (auto [cu, cv] : r.child_pairs) {
      std::vector<Step> inner;
      if (!explain(forward ? cu : cv, forward ? cv : cu, inner)) continue;
      out.insert(out.end(), inner.begin(), inner.end());
    }
  }
};

// --- the searcher -------------------------------------------------------------

struct Searcher {
  const ProverOptions& opts;
  std::size_t nodes = 0;
  std::size_t free_moves_cap = 400;
  std::set<std::size_t> failed;  // hashed memo of exhausted subgoals; a
                                 // collision can only lose completeness,
                                 // never soundness

  void charge() {
    if (++nodes > opts.node_budget)
      throw ResourceLimitError("prover node budget exceeded (" +
                               std::to_string(opts.node_budget) + ")");
  }

  static std::size_t memo_key(const Sequent& g, std::size_t depth,
                              const InstMap& insts, std::size_t frees) {
    std::string k = pretty(g);
    k += "#d";
    k += std::to_string(depth);
    k += "#s";
    k += std::to_string(frees);
    for (const auto& [f, n] : insts) {
      k += "#";
      k += f;
      k += "=";
      k += std::to_string(n);
    }
    return std::hash<std::string>{}(k);
  }

  Name fresh_eigen(const Sequent& s, const Name& base) {
    std::set<Name> avoid = sequent_free_vars(s);
    for (const auto& [n, t] : s.ctx.bindings) avoid.insert(n);
    return fresh_name(base.empty() ? "a" : base, avoid);
  }

  ProofPtr try_closures(const Sequent& g) {
    for (const auto& f : g.left.items())
      if (g.right.contains(f))
        return mk_proof({Rule::Ax, f, {}, {}, {}, {}, ""}, g, {});
    if (g.left.contains(f_bot()))
      return mk_proof({Rule::BotL, {}, {}, {}, {}, {}, ""}, g, {});
    if (g.right.contains(f_top()))
      return mk_proof({Rule::TopR, {}, {}, {}, {}, {}, ""}, g, {});
    for (const auto& f : g.left.items()) {
      const auto* a = std::get_if<Atom>(&f->node);
      if (!a || a->head.kind != AtomHead::Kind::Eq) continue;
      bool li = std::holds_alternative<InlVal>(a->args[0]->node);
      bool lr = std::holds_alternative<InrVal>(a->args[0]->node);
      bool ri = std::holds_alternative<InlVal>(a->args[1]->node);
      bool rr = std::holds_alternative<InrVal>(a->args[1]->node);
      if ((li && rr) || (lr && ri))
        return mk_proof({Rule::SumDisjointSC, f, {}, {}, {}, {}, ""}, g, {});
    }
    return nullptr;
  }

  // --- ground equality engine -------------------------------------------------

  // A planned chain of left-fact additions ending in a closing rule.
  struct Plan {
    std::vector<NodeSpec> adds;  // each adds spec.produced to the left
    NodeSpec closing;            // Ax or Sum-Disjoint, applied at the end
  };

  // Applies rewrite steps to one argument of an atom, emitting transport
  // node specs. Returns the final atom (already inserted into `plan`).
  FormulaPtr rewrite_arg(const FormulaPtr& atom0, int slot,
                         const std::vector<Step>& steps, Plan& plan) {
    FormulaPtr cur = atom0;
    for (const auto& st : steps) {
      const auto& a = std::get<Atom>(cur->node);
      std::vector<ValuePtr> args = {a.args[0], a.args[1]};
      args[static_cast<size_t>(slot)] =
          replace_all(args[static_cast<size_t>(slot)], st.from, st.to);
      FormulaPtr next = f_atom(a.head, std::move(args));
      if (alpha_eq(next, cur)) continue;
      plan.adds.push_back(
          NodeSpec{Rule::EqTransportSC, st.eq, cur, next, {}, {}, ""});
      cur = next;
    }
    return cur;
  }

  std::optional<Plan> equality_plan(const Sequent& g) {
    std::vector<FormulaPtr> eqs, rels;
    for (const auto& f : g.left.items()) {
      const auto* a = std::get_if<Atom>(&f->node);
      if (!a) continue;
      if (a->head.kind == AtomHead::Kind::Eq &&
          !alpha_eq(a->args[0], a->args[1]))
        eqs.push_back(f);
      if (a->head.kind == AtomHead::Kind::Rel) rels.push_back(f);
    }
    Closure cl;
    for (const auto& f : rels) {
      const auto& a = std::get<Atom>(f->node);
      cl.add_deep(a.args[0]);
      cl.add_deep(a.args[1]);
    }
    std::vector<std::pair<FormulaPtr, std::pair<int, int>>> goals;
    for (const auto& f : g.right.items()) {
      const auto* a = std::get_if<Atom>(&f->node);
      if (!a) continue;
      int u = cl.add_deep(a->args[0]);
      int v = cl.add_deep(a->args[1]);
      goals.emplace_back(f, std::make_pair(u, v));
    }
    cl.saturate(eqs);

    auto typed = [&](const ValuePtr& v) {
      return simple_value_type(g.ctx, v);
    };

    // 1. Right-side atoms derivable from the closure.
    for (const auto& [goal, uv] : goals) {
      const auto& a = std::get<Atom>(goal->node);
      auto [u, v] = uv;
      Plan plan;
      if (a.head.kind == AtomHead::Kind::Eq) {
        if (!cl.same(u, v)) continue;
        auto t = typed(a.args[0]);
        if (!t || !alpha_eq(*t, a.head.eq_type)) continue;
        std::vector<Step> steps;
        if (!cl.explain(u, v, steps)) continue;
        FormulaPtr refl = f_eq(a.head.eq_type, a.args[0], a.args[0]);
        if (!g.left.contains(refl))
          plan.adds.push_back(
              NodeSpec{Rule::EqReflSC, {}, {}, refl, {}, {}, ""});
        FormulaPtr got = rewrite_arg(refl, 1, steps, plan);
        if (!alpha_eq(got, goal)) continue;
        plan.closing = NodeSpec{Rule::Ax, goal, {}, {}, {}, {}, ""};
        return plan;
      }
      // rel goal: path search over classes
      if (cl.same(u, v)) {
        auto t = typed(a.args[0]);
        if (!t || !alpha_eq(*t, type_state())) continue;
        std::vector<Step> steps;
        if (!cl.explain(u, v, steps)) continue;
        FormulaPtr refl = f_rel(a.args[0], a.args[0]);
        if (!g.left.contains(refl))
          plan.adds.push_back(
              NodeSpec{Rule::RelReflSC, {}, {}, refl, {}, {}, ""});
        FormulaPtr got = rewrite_arg(refl, 1, steps, plan);
        if (!alpha_eq(got, goal)) continue;
        plan.closing = NodeSpec{Rule::Ax, goal, {}, {}, {}, {}, ""};
        return plan;
      }
      // BFS from u's class to v's class over rel edges
      std::map<int, std::pair<int, FormulaPtr>> pred;  // class -> (from, via)
      std::deque<int> queue;
      int cu = cl.find(u), cv = cl.find(v);
      queue.push_back(cu);
      pred[cu] = {cu, nullptr};
      while (!queue.empty() && !pred.count(cv)) {
        int c = queue.front();
        queue.pop_front();
        for (const auto& f : rels) {
          const auto& ra = std::get<Atom>(f->node);
          int ea = cl.find(cl.add(ra.args[0]));
          int eb = cl.find(cl.add(ra.args[1]));
          if (ea != c || pred.count(eb)) continue;
          pred[eb] = {c, f};
          queue.push_back(eb);
        }
      }
      if (!pred.count(cv)) continue;
      // reconstruct edges in order
      std::vector<FormulaPtr> edges;
      for (int c = cv; c != cu; c = pred[c].first)
        edges.push_back(pred[c].second);
      std::reverse(edges.begin(), edges.end());
      // chain: rewrite each edge's first argument to the running endpoint
      ValuePtr endpoint = a.args[0];
      FormulaPtr acc;
      bool ok = true;
      for (const auto& edge : edges) {
        const auto& ra = std::get<Atom>(edge->node);
        std::vector<Step> steps;
        if (!cl.explain(cl.add(ra.args[0]), cl.add_deep(endpoint), steps)) {
          ok = false;
          break;
        }
        FormulaPtr adjusted = rewrite_arg(edge, 0, steps, plan);
        if (!acc) {
          acc = adjusted;
        } else {
          FormulaPtr produced =
              f_rel(std::get<Atom>(acc->node).args[0],
                    std::get<Atom>(adjusted->node).args[1]);
          plan.adds.push_back(NodeSpec{Rule::RelTransSC, acc, adjusted,
                                       produced, {}, {}, ""});
          acc = produced;
        }
        endpoint = std::get<Atom>(acc->node).args[1];
      }
      if (!ok || !acc) continue;
      // rewrite the accumulated second argument to the goal's
      std::vector<Step> back;
      if (!cl.explain(cl.add_deep(endpoint), cl.add_deep(a.args[1]), back))
        continue;
      FormulaPtr got = rewrite_arg(acc, 1, back, plan);
      if (!alpha_eq(got, goal)) continue;
      plan.closing = NodeSpec{Rule::Ax, goal, {}, {}, {}, {}, ""};
      return plan;
    }

    // 2. Inconsistent classes: an inl and an inr term identified.
    for (std::size_t i = 0; i < cl.size(); ++i) {
      if (!std::holds_alternative<InlVal>(cl.term(static_cast<int>(i))->node))
        continue;
      for (std::size_t j = 0; j < cl.size(); ++j) {
        if (!std::holds_alternative<InrVal>(
                cl.term(static_cast<int>(j))->node))
          continue;
        int u = static_cast<int>(i), v = static_cast<int>(j);
        if (!cl.same(u, v)) continue;
        auto t = typed(cl.term(u));
        auto t2 = typed(cl.term(v));
        if (!t || !t2 || !alpha_eq(*t, *t2)) continue;
        std::vector<Step> steps;
        if (!cl.explain(u, v, steps)) continue;
        Plan plan;
        FormulaPtr refl = f_eq(*t, cl.term(u), cl.term(u));
        if (!g.left.contains(refl))
          plan.adds.push_back(
              NodeSpec{Rule::EqReflSC, {}, {}, refl, {}, {}, ""});
        FormulaPtr got = rewrite_arg(refl, 1, steps, plan);
        const auto& ga = std::get<Atom>(got->node);
        bool li = std::holds_alternative<InlVal>(ga.args[0]->node);
        bool rr = std::holds_alternative<InrVal>(ga.args[1]->node);
        if (!(li && rr)) continue;
        plan.closing =
            NodeSpec{Rule::SumDisjointSC, got, {}, {}, {}, {}, ""};
        return plan;
      }
    }
    return std::nullopt;
  }

  // Builds the proof for a plan: a chain of left additions ending in the
  // closing node. Returns null if a planned addition is already present and
  // the chain degenerates (then the plain closures handle it).
  ProofPtr apply_plan(const Sequent& g, const Plan& plan) {
    std::vector<std::pair<NodeSpec, Sequent>> stages;
    Sequent cur = g;
    for (const auto& spec : plan.adds) {
      if (cur.left.contains(spec.produced)) continue;
      Sequent next{cur.ctx, cur.left.with(spec.produced), cur.right};
      stages.emplace_back(spec, cur);
      cur = next;
    }
    ProofPtr leaf = mk_proof(plan.closing, cur, {});
    for (auto it = stages.rbegin(); it != stages.rend(); ++it)
      leaf = mk_proof(it->first, it->second, {leaf});
    return leaf;
  }

  // --- remaining free moves ---------------------------------------------------

  struct FreeMove {
    NodeSpec spec;
    Sequent premise;
    std::string inst_key;
  };

  std::optional<FreeMove> free_move(const Sequent& g, const InstMap& insts) {
    // Pair injectivity.
    for (const auto& f : g.left.items()) {
      const auto* a = std::get_if<Atom>(&f->node);
      if (!a || a->head.kind != AtomHead::Kind::Eq) continue;
      const auto* lp = std::get_if<PairVal>(&a->args[0]->node);
      const auto* rp = std::get_if<PairVal>(&a->args[1]->node);
      const auto* pt = std::get_if<ProdTy>(&a->head.eq_type->node);
      if (!lp || !rp || !pt) continue;
      FormulaPtr e1 = f_eq(pt->left, lp->first, rp->first);
      FormulaPtr e2 = f_eq(pt->right, lp->second, rp->second);
      if (g.left.contains(e1) && g.left.contains(e2)) continue;
      return FreeMove{{Rule::PairInjectiveSC, f, {}, {}, {}, {}, ""},
                      {g.ctx, g.left.with(e1).with(e2), g.right},
                      ""};
    }
    // Bounded quantifier instantiation.
    for (const auto& f : g.left.items()) {
      const auto* fa = std::get_if<ForallF>(&f->node);
      if (!fa) continue;
      std::string key = "L " + mst::pretty(f);
      auto used = insts.find(key);
      if (used != insts.end() && used->second >= opts.inst_limit) continue;
      for (const auto& w : typed_candidates(g, fa->type)) {
        FormulaPtr inst = subst(fa->body, fa->binder, w);
        if (g.left.contains(inst)) continue;
        return FreeMove{{Rule::ForallL, f, {}, {}, w, {}, ""},
                        {g.ctx, g.left.with(inst), g.right},
                        key};
      }
    }
    for (const auto& f : g.right.items()) {
      const auto* ex = std::get_if<ExistsF>(&f->node);
      if (!ex) continue;
      std::string key = "R " + mst::pretty(f);
      auto used = insts.find(key);
      if (used != insts.end() && used->second >= opts.inst_limit) continue;
      for (const auto& w : typed_candidates(g, ex->type)) {
        FormulaPtr inst = subst(ex->body, ex->binder, w);
        if (g.right.contains(inst)) continue;
        return FreeMove{{Rule::ExistsR, f, {}, {}, w, {}, ""},
                        {g.ctx, g.left, g.right.with(inst)},
                        key};
      }
    }
    return std::nullopt;
  }

  std::vector<ValuePtr> typed_candidates(const Sequent& g, const TypePtr& t) {
    std::vector<ValuePtr> out;
    if (alpha_eq(t, type_unit())) out.push_back(v_unit());
    if (alpha_eq(t, type_bool())) {
      out.push_back(v_true());
      out.push_back(v_false());
    }
    for (const auto& cand : instantiation_candidates(g, 48)) {
      auto ct = simple_value_type(g.ctx, cand);
      if (!ct || !alpha_eq(*ct, t)) continue;
      dedupe_push(out, cand, 16);
    }
    // The constant set is non-empty; keep instantiation possible even when
    // the sequent mentions no state term.
    if (out.empty() && alpha_eq(t, type_state()) && !opts.constants.empty())
      out.push_back(v_const(opts.constants.front()));
    return out;
  }

  ProofPtr search(const Sequent& g, std::size_t depth, const InstMap& insts,
                  std::size_t frees) {
    charge();
    if (ProofPtr leaf = try_closures(g)) return leaf;
    std::size_t key = memo_key(g, depth, insts, frees);
    if (failed.count(key)) return nullptr;
    ProofPtr result = search_inner(g, depth, insts, frees);
    if (!result) failed.insert(key);
    return result;
  }

  ProofPtr search_inner(const Sequent& g, std::size_t depth,
                        const InstMap& insts, std::size_t frees) {
    auto one = [&](const NodeSpec& spec, const Sequent& prem) -> ProofPtr {
      ProofPtr sub = search(prem, depth, insts, frees);
      if (!sub) return nullptr;
      return mk_proof(spec, g, {sub});
    };
    auto two = [&](const NodeSpec& spec, const Sequent& p1,
                   const Sequent& p2) -> ProofPtr {
      ProofPtr s1 = search(p1, depth, insts, frees);
      if (!s1) return nullptr;
      ProofPtr s2 = search(p2, depth, insts, frees);
      if (!s2) return nullptr;
      return mk_proof(spec, g, {s1, s2});
    };

    // Phase 2: eager invertible structural rules.
    for (const auto& f : g.left.items()) {
      if (const auto* a = std::get_if<AndF>(&f->node))
        return one({Rule::AndL, f, {}, {}, {}, {}, ""},
                   {g.ctx, g.left.without(f).with(a->left).with(a->right),
                    g.right});
      if (const auto* ex = std::get_if<ExistsF>(&f->node)) {
        Name e = fresh_eigen(g, ex->binder);
        return one({Rule::ExistsL, f, {}, {}, {}, {}, e},
                   {g.ctx.extended(e, ex->type),
                    g.left.without(f).with(
                        subst(ex->body, ex->binder, v_var(e))),
                    g.right});
      }
    }
    for (const auto& f : g.right.items()) {
      if (const auto* o = std::get_if<OrF>(&f->node))
        return one({Rule::OrR, f, {}, {}, {}, {}, ""},
                   {g.ctx, g.left,
                    g.right.without(f).with(o->left).with(o->right)});
      if (const auto* im = std::get_if<ImpliesF>(&f->node))
        return one({Rule::ImpliesR, f, {}, {}, {}, {}, ""},
                   {g.ctx, g.left.with(im->left),
                    g.right.without(f).with(im->right)});
      if (const auto* fa = std::get_if<ForallF>(&f->node)) {
        Name e = fresh_eigen(g, fa->binder);
        return one({Rule::ForallR, f, {}, {}, {}, {}, e},
                   {g.ctx.extended(e, fa->type), g.left,
                    g.right.without(f).with(
                        subst(fa->body, fa->binder, v_var(e)))});
      }
    }
    for (const auto& f : g.right.items())
      if (const auto* an = std::get_if<AndF>(&f->node))
        return two({Rule::AndR, f, {}, {}, {}, {}, ""},
                   {g.ctx, g.left, g.right.without(f).with(an->left)},
                   {g.ctx, g.left, g.right.without(f).with(an->right)});
    for (const auto& f : g.left.items()) {
      if (const auto* o = std::get_if<OrF>(&f->node))
        return two({Rule::OrL, f, {}, {}, {}, {}, ""},
                   {g.ctx, g.left.without(f).with(o->left), g.right},
                   {g.ctx, g.left.without(f).with(o->right), g.right});
      if (const auto* im = std::get_if<ImpliesF>(&f->node))
        return two({Rule::ImpliesL, f, {}, {}, {}, {}, ""},
                   {g.ctx, g.left.without(f), g.right.with(im->left)},
                   {g.ctx, g.left.without(f).with(im->right), g.right});
    }

    // Phase 3a: targeted ground equality reasoning.
    if (auto plan = equality_plan(g))
      if (ProofPtr p = apply_plan(g, *plan)) return p;

    // Phase 3b: other free moves.
    if (frees < free_moves_cap) {
      if (auto mv = free_move(g, insts)) {
        InstMap next = insts;
        if (!mv->inst_key.empty()) next[mv->inst_key]++;
        ProofPtr sub = search(mv->premise, depth, next, frees + 1);
        if (!sub) return nullptr;
        return mk_proof(mv->spec, g, {sub});
      }
    }

    if (depth == 0) return nullptr;
    return essential(g, depth, insts, frees);
  }

  // Phase 4: the essential choices. Each consumes one unit of depth.
  ProofPtr essential(const Sequent& g, std::size_t depth,
                     const InstMap& insts, std::size_t frees) {
    struct Move {
      NodeSpec spec;
      std::vector<Sequent> premises;
    };
    std::vector<Move> moves;

    for (const auto& fl : g.left.items()) {
      const auto* wl = std::get_if<WitnessedF>(&fl->node);
      if (!wl) continue;
      for (const auto& fr : g.right.items()) {
        const auto* wr = std::get_if<WitnessedF>(&fr->node);
        if (!wr) continue;
        Name e = fresh_eigen(g, wl->pred.binder);
        ValuePtr ev = v_var(e);
        Move m;
        m.spec = NodeSpec{Rule::WitnessedWeakenSC, fl, fr, {}, {}, {}, e};
        m.premises = {
            Sequent{g.ctx.extended(e, type_state()),
                    g.left.without(fl).with(apply_pred(wl->pred, ev)),
                    g.right.without(fr).with(apply_pred(wr->pred, ev))}};
        moves.push_back(std::move(m));
      }
    }

    for (const auto& cand : instantiation_candidates(g, 48)) {
      auto t = simple_value_type(g.ctx, cand);
      if (!t || !alpha_eq(*t, type_bool())) continue;
      if (is_true(cand) || is_false(cand)) continue;
      FormulaPtr et = f_eq(type_bool(), cand, v_true());
      FormulaPtr ef = f_eq(type_bool(), cand, v_false());
      if (g.left.contains(et) || g.left.contains(ef)) continue;
      Move m;
      m.spec = NodeSpec{Rule::BoolSplitSC, {}, {}, {}, {}, cand, ""};
      m.premises = {Sequent{g.ctx, g.left.with(et), g.right},
                    Sequent{g.ctx, g.left.with(ef), g.right}};
      moves.push_back(std::move(m));
    }

    for (auto& m : moves) {
      std::vector<ProofPtr> subs;
      bool ok = true;
      for (const auto& prem : m.premises) {
        ProofPtr sub = search(prem, depth - 1, insts, frees);
        if (!sub) {
          ok = false;
          break;
        }
        subs.push_back(sub);
      }
      if (!ok) continue;
      return mk_proof(m.spec, g, std::move(subs));
    }
    return nullptr;
  }
};

}  // namespace

ProveOutcome sc_prove(const Sequent& goal, const ProverOptions& opts) {
  Sequent g = goal;
  for (const auto& ax : opts.axioms) g.left.insert(ax);
  Searcher s{opts};
  ProofPtr p = s.search(g, opts.max_depth, {}, 0);
  if (p) return Proved{p};
  return Unknown{opts.max_depth};
}

}  // namespace mst::logic
