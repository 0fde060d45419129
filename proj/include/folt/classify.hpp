#ifndef FOLT_CLASSIFY_HPP
#define FOLT_CLASSIFY_HPP

// Fragment membership analyses for sentences in standard form
// (forall/exists alternating prefix, NNF matrix):
//
//  * separated sentences (SF): no atom mixes universal and existential
//    variables,
//  * BSR: exists*-forall* prefix without non-constant functions,
//  * Ackermann: relational exists*-forall-exists* without equality,
//  * relational monadic: unary predicates only, no functions,
//  * the generalized BSR fragment (GBSR) via the literal-set analysis
//    L_1..L_n over the co-occurrence graph of universal variables,
//  * the generalized Ackermann fragment (GAF) via per-universal literal
//    sets L_x built from upward closures on existential variables.
//
// Each "generalized" fragment has two equivalent characterizations: an
// axiomatic one in terms of atom partitions and an algorithmic one in
// terms of computed literal sets.  Both are implemented, together with a
// brute-force partition search usable on small sentences.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "folt/ast.hpp"

namespace folt {

struct FunctionsNotAllowed : FoltError {
    using FoltError::FoltError;
};
struct NotAPartition : FoltError {
    using FoltError::FoltError;
};
struct InvalidPartition : FoltError {
    using FoltError::FoltError;
};

namespace detail {

// Collects the literal occurrences of a quantifier-free NNF formula in
// left-to-right traversal order.  Two syntactically equal literals at
// different positions are distinct occurrences.
inline void collect_literal_occurrences(const FormulaPtr& f, std::vector<Literal>& out) {
    switch (f->kind) {
        case FormulaKind::Atom:
        case FormulaKind::Equality:
            out.push_back(Literal{true, f});
            return;
        case FormulaKind::Not:
            if (!is_atomic(*f->kids[0]))
                throw FoltError("collect_literal_occurrences: formula not in NNF");
            out.push_back(Literal{false, f->kids[0]});
            return;
        case FormulaKind::And:
        case FormulaKind::Or:
            for (const auto& k : f->kids) collect_literal_occurrences(k, out);
            return;
        default:
            throw FoltError("collect_literal_occurrences: matrix must be quantifier-free");
    }
}

inline std::set<std::string> vars_of_literals(const std::vector<std::set<std::string>>& lit_vars,
                                              const std::set<int>& occs) {
    std::set<std::string> vs;
    for (int i : occs) vs.insert(lit_vars[i].begin(), lit_vars[i].end());
    return vs;
}

inline bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
    for (const auto& v : a)
        if (b.count(v)) return true;
    return false;
}

template <typename T>
std::set<T> set_minus(const std::set<T>& a, const std::set<T>& b) {
    std::set<T> r;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(r, r.begin()));
    return r;
}

// Distinct atoms of a literal-occurrence list, sorted by the total formula
// order so indices are reproducible.
inline std::vector<FormulaPtr> distinct_atoms(const std::vector<Literal>& lits) {
    std::vector<FormulaPtr> atoms;
    for (const auto& l : lits) atoms.push_back(l.atom);
    std::sort(atoms.begin(), atoms.end(),
              [](const FormulaPtr& a, const FormulaPtr& b) { return formula_cmp(*a, *b) < 0; });
    atoms.erase(std::unique(atoms.begin(), atoms.end(),
                            [](const FormulaPtr& a, const FormulaPtr& b) {
                                return formula_equal(a, b);
                            }),
                atoms.end());
    return atoms;
}

inline int atom_index(const std::vector<FormulaPtr>& atoms, const FormulaPtr& a) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (formula_equal(atoms[i], a)) return static_cast<int>(i);
    return -1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// GBSR analysis
// ---------------------------------------------------------------------------

struct GbsrAnalysis {
    StandardFormSentence sentence;
    std::vector<Literal> literals;                 // occurrence order
    std::vector<std::set<std::string>> lit_vars;   // per occurrence
    std::vector<std::set<std::string>> components; // of the x-co-occurrence graph
    // L[k] for k = 1..n (index 0 present but unused).
    std::vector<std::set<int>> L;
    // Residual sets: L_res[k] = L[k] minus all higher L's; L_res[0] = rest.
    std::vector<std::set<int>> L_res;
    // X_res[k] = vars(L_res[k]) restricted to universal variables.
    std::vector<std::set<std::string>> X_res;
    std::vector<FormulaPtr> atoms;              // distinct atoms
    std::vector<std::set<int>> atom_partition;  // At_0..At_n (indices into atoms)
    bool is_gbsr = false;
    int witness_k = -1;  // smallest (k, l) with vars(L_k) meeting x-block l
    int witness_l = -1;
    int witness_literal = -1;  // an occurrence in L_k containing an x-block-l var
};

// Computes the GBSR literal-set analysis of a standard-form sentence.
// Equality and constants are allowed; non-constant function symbols are
// rejected.  The verdict is positive iff vars(L_k) avoids every universal
// block x_l with l <= k.
inline GbsrAnalysis analyze_gbsr(const StandardFormSentence& s) {
    Signature sig = signature_of(s);
    if (!sig.functions.empty())
        throw FunctionsNotAllowed("analyze_gbsr: non-constant function symbols not allowed");

    GbsrAnalysis a;
    a.sentence = s;
    detail::collect_literal_occurrences(s.matrix, a.literals);
    const int m = static_cast<int>(a.literals.size());
    a.lit_vars.resize(m);
    for (int i = 0; i < m; ++i) a.lit_vars[i] = free_vars(a.literals[i].atom);

    const int n = s.n();
    std::set<std::string> xset, yset;
    for (const auto& b : s.x_blocks) xset.insert(b.begin(), b.end());
    for (const auto& b : s.y_blocks) yset.insert(b.begin(), b.end());

    // Connected components of the co-occurrence graph over universal
    // variables (edge iff two of them share a literal occurrence).
    {
        std::map<std::string, std::string> parent;
        for (const auto& x : xset) parent[x] = x;
        std::function<std::string(const std::string&)> find = [&](const std::string& v) {
            std::string r = v;
            while (parent[r] != r) r = parent[r];
            return r;
        };
        for (int i = 0; i < m; ++i) {
            std::string first;
            for (const auto& v : a.lit_vars[i]) {
                if (!xset.count(v)) continue;
                if (first.empty()) {
                    first = v;
                } else {
                    parent[find(v)] = find(first);
                }
            }
        }
        std::map<std::string, std::set<std::string>> comps;
        for (const auto& x : xset) comps[find(x)].insert(x);
        for (auto& [root, comp] : comps) a.components.push_back(comp);
    }

    // L_k: smallest literal set containing every literal with a y_k
    // variable, closed under adding L(C) for every component C sharing a
    // variable with L_k.  Worklist over components.
    a.L.assign(n + 1, {});
    for (int k = 1; k <= n; ++k) {
        std::set<int>& Lk = a.L[k];
        std::set<std::string> ykvars(s.ybar(k).begin(), s.ybar(k).end());
        for (int i = 0; i < m; ++i)
            if (detail::intersects(a.lit_vars[i], ykvars)) Lk.insert(i);
        bool changed = true;
        while (changed) {
            changed = false;
            std::set<std::string> lkvars = detail::vars_of_literals(a.lit_vars, Lk);
            for (const auto& comp : a.components) {
                if (!detail::intersects(comp, lkvars)) continue;
                for (int i = 0; i < m; ++i) {
                    if (Lk.count(i)) continue;
                    if (detail::intersects(a.lit_vars[i], comp)) {
                        Lk.insert(i);
                        changed = true;
                    }
                }
            }
        }
    }

    // Verdict: vars(L_k) must avoid x-block l for every 1 <= l <= k <= n.
    a.is_gbsr = true;
    for (int k = 1; k <= n && a.is_gbsr; ++k) {
        std::set<std::string> lkvars = detail::vars_of_literals(a.lit_vars, a.L[k]);
        for (int l = 1; l <= k && a.is_gbsr; ++l) {
            std::set<std::string> xl(s.xbar(l).begin(), s.xbar(l).end());
            if (detail::intersects(lkvars, xl)) {
                a.is_gbsr = false;
                a.witness_k = k;
                a.witness_l = l;
                // Prefer a literal mixing a y_k variable with an x_l
                // variable (directly unhousable); otherwise any L_k member
                // containing an x_l variable.
                std::set<std::string> yk(s.ybar(k).begin(), s.ybar(k).end());
                for (int i : a.L[k]) {
                    if (!detail::intersects(a.lit_vars[i], xl)) continue;
                    if (a.witness_literal < 0) a.witness_literal = i;
                    if (detail::intersects(a.lit_vars[i], yk)) {
                        a.witness_literal = i;
                        break;
                    }
                }
            }
        }
    }

    // Residual sets and their universal-variable footprints.
    a.L_res.assign(n + 1, {});
    std::set<int> higher;
    for (int k = n; k >= 1; --k) {
        a.L_res[k] = detail::set_minus(a.L[k], higher);
        higher.insert(a.L[k].begin(), a.L[k].end());
    }
    for (int i = 0; i < m; ++i)
        if (!higher.count(i)) a.L_res[0].insert(i);
    a.X_res.assign(n + 1, {});
    for (int k = 0; k <= n; ++k) {
        std::set<std::string> vs = detail::vars_of_literals(a.lit_vars, a.L_res[k]);
        for (const auto& v : vs)
            if (xset.count(v)) a.X_res[k].insert(v);
    }

    // Derived atom partition: an atom goes to class k iff one of its
    // occurrences (positive or negative) lies in L_res[k].  Membership is
    // determined by the atom's variables, so the class is well defined.
    a.atoms = detail::distinct_atoms(a.literals);
    a.atom_partition.assign(n + 1, {});
    for (int k = 0; k <= n; ++k)
        for (int i : a.L_res[k])
            a.atom_partition[k].insert(detail::atom_index(a.atoms, a.literals[i].atom));
    return a;
}

// Checks the axiomatic GBSR conditions for an explicit atom partition
// At_0..At_n:
//   (i)  vars(At_i) within y_1..y_i and x_{i+1}..x_n,
//   (ii) distinct classes share no universal variable.
inline bool gbsr_axiomatic_witness(const StandardFormSentence& s,
                                   const std::vector<std::vector<FormulaPtr>>& partition) {
    const int n = s.n();
    if (static_cast<int>(partition.size()) != n + 1)
        throw NotAPartition("gbsr_axiomatic_witness: expected exactly n+1 atom sets");
    std::vector<Literal> lits;
    detail::collect_literal_occurrences(s.matrix, lits);
    std::vector<FormulaPtr> atoms = detail::distinct_atoms(lits);
    std::vector<int> cls(atoms.size(), -1);
    for (int k = 0; k <= n; ++k) {
        for (const auto& at : partition[k]) {
            int i = detail::atom_index(atoms, at);
            if (i < 0) throw NotAPartition("gbsr_axiomatic_witness: unknown atom in partition");
            if (cls[i] != -1) throw NotAPartition("gbsr_axiomatic_witness: atom assigned twice");
            cls[i] = k;
        }
    }
    for (int c : cls)
        if (c == -1) throw NotAPartition("gbsr_axiomatic_witness: atom missing from partition");

    std::set<std::string> xset;
    for (const auto& b : s.x_blocks) xset.insert(b.begin(), b.end());
    // allowed variable set per class
    std::vector<std::set<std::string>> allowed(n + 1);
    for (int i = 0; i <= n; ++i) {
        for (int k = 1; k <= i; ++k)
            allowed[i].insert(s.ybar(k).begin(), s.ybar(k).end());
        for (int k = i + 1; k <= n; ++k)
            allowed[i].insert(s.xbar(k).begin(), s.xbar(k).end());
    }
    std::vector<std::set<std::string>> class_xvars(n + 1);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        std::set<std::string> vs = free_vars(atoms[i]);
        for (const auto& v : vs) {
            if (!allowed[cls[i]].count(v)) return false;  // condition (i)
            if (xset.count(v)) class_xvars[cls[i]].insert(v);
        }
    }
    for (int i = 0; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            if (detail::intersects(class_xvars[i], class_xvars[j])) return false;  // (ii)
    return true;
}

// Brute-force search for a partition satisfying the axiomatic GBSR
// conditions.  Backtracks over distinct atoms; capped at 8 atoms.
inline std::optional<std::vector<std::vector<FormulaPtr>>> gbsr_axiomatic_search(
    const StandardFormSentence& s) {
    std::vector<Literal> lits;
    detail::collect_literal_occurrences(s.matrix, lits);
    std::vector<FormulaPtr> atoms = detail::distinct_atoms(lits);
    if (atoms.size() > 8)
        throw FoltError("gbsr_axiomatic_search: more than 8 distinct atoms");
    const int n = s.n();
    std::set<std::string> xset;
    for (const auto& b : s.x_blocks) xset.insert(b.begin(), b.end());
    std::vector<std::set<std::string>> allowed(n + 1);
    for (int i = 0; i <= n; ++i) {
        for (int k = 1; k <= i; ++k)
            allowed[i].insert(s.ybar(k).begin(), s.ybar(k).end());
        for (int k = i + 1; k <= n; ++k)
            allowed[i].insert(s.xbar(k).begin(), s.xbar(k).end());
    }
    // feasible classes per atom under condition (i)
    std::vector<std::vector<int>> feasible(atoms.size());
    std::vector<std::set<std::string>> atom_xvars(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        std::set<std::string> vs = free_vars(atoms[i]);
        for (const auto& v : vs)
            if (xset.count(v)) atom_xvars[i].insert(v);
        for (int c = 0; c <= n; ++c) {
            bool ok = true;
            for (const auto& v : vs)
                if (!allowed[c].count(v)) { ok = false; break; }
            if (ok) feasible[i].push_back(c);
        }
    }
    std::vector<int> cls(atoms.size(), -1);
    std::map<std::string, int> xclass;  // condition (ii): one class per x var
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
        if (i == atoms.size()) return true;
        for (int c : feasible[i]) {
            bool ok = true;
            for (const auto& v : atom_xvars[i]) {
                auto it = xclass.find(v);
                if (it != xclass.end() && it->second != c) { ok = false; break; }
            }
            if (!ok) continue;
            std::vector<std::string> claimed;
            for (const auto& v : atom_xvars[i])
                if (!xclass.count(v)) { xclass[v] = c; claimed.push_back(v); }
            cls[i] = c;
            if (go(i + 1)) return true;
            cls[i] = -1;
            for (const auto& v : claimed) xclass.erase(v);
        }
        return false;
    };
    if (!go(0)) return std::nullopt;
    std::vector<std::vector<FormulaPtr>> partition(n + 1);
    for (std::size_t i = 0; i < atoms.size(); ++i) partition[cls[i]].push_back(atoms[i]);
    return partition;
}

// The degree of a sentence with respect to an atom partition satisfying the
// axiomatic GBSR conditions: the smallest non-negative kappa such that every
// class At_i with 0 <= i < n meets at most kappa universal blocks with index
// strictly greater than i+1.
inline int degree(const StandardFormSentence& s,
                  const std::vector<std::vector<FormulaPtr>>& partition) {
    if (!gbsr_axiomatic_witness(s, partition))
        throw InvalidPartition("degree: partition violates the axiomatic conditions");
    const int n = s.n();
    int kappa = 0;
    for (int i = 0; i < n; ++i) {
        std::set<std::string> vs;
        for (const auto& at : partition[i]) {
            auto fv = free_vars(at);
            vs.insert(fv.begin(), fv.end());
        }
        int count = 0;
        for (int j = i + 2; j <= n; ++j) {
            std::set<std::string> xj(s.xbar(j).begin(), s.xbar(j).end());
            if (detail::intersects(vs, xj)) ++count;
        }
        kappa = std::max(kappa, count);
    }
    return kappa;
}

// ---------------------------------------------------------------------------
// GAF analysis
// ---------------------------------------------------------------------------

struct GafAnalysis {
    StandardFormSentence sentence;
    std::vector<Literal> literals;
    std::vector<std::set<std::string>> lit_vars;
    std::map<std::string, int> idx;  // block index of every prefix variable
    std::map<std::string, std::set<std::string>> up;  // upward closures on y-vars
    std::vector<std::string> xs;  // universal variables in prefix order
    std::map<std::string, std::set<int>> Lx;
    std::set<int> L0;
    std::map<std::string, std::set<std::string>> Yx;
    // Refinement: Lxk[x][k] for k = 0 and idx(x)..n; Yxk analogous.
    std::map<std::string, std::map<int, std::set<int>>> Lxk;
    std::map<std::string, std::map<int, std::set<std::string>>> Yxk;
    bool is_gaf = false;
    FormulaPtr witness_atom;  // set when an atom has two universal variables
    std::string witness;      // human-readable reason when not GAF
    bool has_equality = false;
    bool has_functions = false;
};

// Computes the GAF literal-set analysis.  Equality and function symbols are
// permitted (recorded as flags) since the un-nesting construction tolerates
// them; the verdict follows the algorithmic definition:
//   (i)  every atom contains at most one universal variable,
//   (ii) for distinct x, x' with idx(x) <= idx(x') no existential variable of
//        index >= idx(x) occurs in both vars(L_x) and vars(L_x').
inline GafAnalysis analyze_gaf(const StandardFormSentence& s) {
    GafAnalysis a;
    a.sentence = s;
    Signature sig = signature_of(s);
    a.has_equality = sig.has_equality;
    a.has_functions = !sig.functions.empty();
    detail::collect_literal_occurrences(s.matrix, a.literals);
    const int m = static_cast<int>(a.literals.size());
    a.lit_vars.resize(m);
    for (int i = 0; i < m; ++i) a.lit_vars[i] = free_vars(a.literals[i].atom);

    const int n = s.n();
    std::set<std::string> xset, yset;
    for (int k = 1; k <= n; ++k) {
        for (const auto& v : s.xbar(k)) {
            a.idx[v] = k;
            xset.insert(v);
            a.xs.push_back(v);
        }
        for (const auto& v : s.ybar(k)) {
            a.idx[v] = k;
            yset.insert(v);
        }
    }

    // Directed graph on existential variables: y -> y' iff idx(y) <= idx(y')
    // and they share an atom.  Upward closures by reachability.
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& y : yset) adj[y];
    for (int i = 0; i < m; ++i) {
        for (const auto& y : a.lit_vars[i]) {
            if (!yset.count(y)) continue;
            for (const auto& y2 : a.lit_vars[i]) {
                if (y2 == y || !yset.count(y2)) continue;
                if (a.idx[y] <= a.idx[y2]) adj[y].insert(y2);
            }
        }
    }
    for (const auto& y : yset) {
        std::set<std::string>& cl = a.up[y];
        std::vector<std::string> work{y};
        cl.insert(y);
        while (!work.empty()) {
            std::string v = work.back();
            work.pop_back();
            for (const auto& w : adj[v])
                if (cl.insert(w).second) work.push_back(w);
        }
    }

    // L(closure): literal occurrences containing a variable of the closure.
    auto lits_of_varset = [&](const std::set<std::string>& vs) {
        std::set<int> r;
        for (int i = 0; i < m; ++i)
            if (detail::intersects(a.lit_vars[i], vs)) r.insert(i);
        return r;
    };

    // L_x by worklist: seed with the literals containing x, then close under
    // L(up[y]) for every triggered y in vars(L_x).
    std::set<int> in_some_lx;
    for (const auto& x : a.xs) {
        std::set<int>& lx = a.Lx[x];
        for (int i = 0; i < m; ++i)
            if (a.lit_vars[i].count(x)) lx.insert(i);
        bool changed = true;
        std::set<std::string> triggered;
        while (changed) {
            changed = false;
            std::set<std::string> vs = detail::vars_of_literals(a.lit_vars, lx);
            for (const auto& y : vs) {
                if (!yset.count(y) || a.idx[y] < a.idx[x] || triggered.count(y)) continue;
                triggered.insert(y);
                std::set<int> add = lits_of_varset(a.up[y]);
                for (int i : add)
                    if (lx.insert(i).second) changed = true;
            }
        }
        in_some_lx.insert(lx.begin(), lx.end());
        // Y_x: existential variables of L_x with index >= idx(x).
        std::set<std::string> vs = detail::vars_of_literals(a.lit_vars, lx);
        for (const auto& y : vs)
            if (yset.count(y) && a.idx[y] >= a.idx[x]) a.Yx[x].insert(y);
    }
    for (int i = 0; i < m; ++i)
        if (!in_some_lx.count(i)) a.L0.insert(i);

    // Refinement of L_x into classes 0 and idx(x)..n.
    for (const auto& x : a.xs) {
        const std::set<int>& lx = a.Lx[x];
        std::set<std::string> lxvars = detail::vars_of_literals(a.lit_vars, lx);
        std::set<int> higher;
        for (int k = n; k >= a.idx[x]; --k) {
            std::set<int> cur;
            for (const auto& y : s.ybar(k)) {
                if (!lxvars.count(y)) continue;
                std::set<int> ls = lits_of_varset(a.up[y]);
                cur.insert(ls.begin(), ls.end());
            }
            a.Lxk[x][k] = detail::set_minus(cur, higher);
            higher.insert(cur.begin(), cur.end());
        }
        a.Lxk[x][0] = detail::set_minus(lx, higher);
        for (auto& [k, part] : a.Lxk[x]) {
            std::set<std::string> vs = detail::vars_of_literals(a.lit_vars, part);
            std::set<std::string> yk;
            for (const auto& v : vs)
                if (a.Yx[x].count(v)) yk.insert(v);
            a.Yxk[x][k] = yk;
        }
    }

    // Verdict.
    a.is_gaf = true;
    for (int i = 0; i < m && a.is_gaf; ++i) {
        int xcount = 0;
        for (const auto& v : a.lit_vars[i])
            if (xset.count(v)) ++xcount;
        if (xcount > 1) {
            a.is_gaf = false;
            a.witness_atom = a.literals[i].atom;
            a.witness = "atom contains more than one universal variable";
        }
    }
    if (a.is_gaf) {
        for (std::size_t p = 0; p < a.xs.size() && a.is_gaf; ++p) {
            for (std::size_t q = 0; q < a.xs.size() && a.is_gaf; ++q) {
                if (p == q) continue;
                const std::string& x = a.xs[p];
                const std::string& x2 = a.xs[q];
                if (a.idx[x] > a.idx[x2]) continue;
                std::set<std::string> v1 = detail::vars_of_literals(a.lit_vars, a.Lx[x]);
                std::set<std::string> v2 = detail::vars_of_literals(a.lit_vars, a.Lx[x2]);
                for (const auto& y : v1) {
                    if (!yset.count(y) || a.idx[y] < a.idx[x]) continue;
                    if (v2.count(y)) {
                        a.is_gaf = false;
                        a.witness = "existential variable " + y + " shared by L_" + x +
                                    " and L_" + x2;
                        break;
                    }
                }
            }
        }
    }
    return a;
}

// An explicit atom partition for the axiomatic GAF definition.
struct GafPartition {
    std::vector<FormulaPtr> at0;
    std::map<std::string, std::vector<FormulaPtr>> atx;  // one set per universal var
};

// Checks the axiomatic GAF conditions:
//   (a) At_0 contains no universal variable,
//   (b) vars(At_x) meets the universal variables in exactly {x},
//   (c) every existential y occurring in some At_x satisfies exactly one of
//       (c.1) every At_x containing y has idx(y) < idx(x), or
//       (c.2) exactly one At_x contains y, y is absent from At_0, and
//             idx(y) >= idx(x) for that x.
inline bool gaf_axiomatic_witness(const StandardFormSentence& s, const GafPartition& p) {
    std::vector<Literal> lits;
    detail::collect_literal_occurrences(s.matrix, lits);
    std::vector<FormulaPtr> atoms = detail::distinct_atoms(lits);
    const int n = s.n();
    std::map<std::string, int> idx;
    std::set<std::string> xset, yset;
    std::vector<std::string> xs;
    for (int k = 1; k <= n; ++k) {
        for (const auto& v : s.xbar(k)) {
            idx[v] = k;
            xset.insert(v);
            xs.push_back(v);
        }
        for (const auto& v : s.ybar(k)) {
            idx[v] = k;
            yset.insert(v);
        }
    }
    for (const auto& x : xs)
        if (!p.atx.count(x))
            throw NotAPartition("gaf_axiomatic_witness: missing class for variable " + x);
    for (const auto& [x, part] : p.atx)
        if (!xset.count(x))
            throw NotAPartition("gaf_axiomatic_witness: class for unknown variable " + x);
    std::vector<int> seen(atoms.size(), 0);
    auto mark = [&](const std::vector<FormulaPtr>& part) {
        for (const auto& at : part) {
            int i = detail::atom_index(atoms, at);
            if (i < 0) throw NotAPartition("gaf_axiomatic_witness: unknown atom in partition");
            ++seen[i];
        }
    };
    mark(p.at0);
    for (const auto& [x, part] : p.atx) mark(part);
    for (int c : seen)
        if (c != 1) throw NotAPartition("gaf_axiomatic_witness: atoms must be covered exactly once");

    auto vars_of_part = [&](const std::vector<FormulaPtr>& part) {
        std::set<std::string> vs;
        for (const auto& at : part) {
            auto fv = free_vars(at);
            vs.insert(fv.begin(), fv.end());
        }
        return vs;
    };
    std::set<std::string> v0 = vars_of_part(p.at0);
    for (const auto& v : v0)
        if (xset.count(v)) return false;  // (a)
    std::map<std::string, std::set<std::string>> vx;
    for (const auto& x : xs) {
        vx[x] = vars_of_part(p.atx.at(x));
        std::set<std::string> xvars;
        for (const auto& v : vx[x])
            if (xset.count(v)) xvars.insert(v);
        if (xvars != std::set<std::string>{x}) return false;  // (b)
    }
    // (c): per existential variable occurring in some At_x.
    for (const auto& y : yset) {
        std::vector<std::string> holders;
        for (const auto& x : xs)
            if (vx[x].count(y)) holders.push_back(x);
        if (holders.empty()) continue;
        bool c1 = true;
        for (const auto& x : holders)
            if (idx[y] >= idx[x]) c1 = false;
        bool c2 = holders.size() == 1 && !v0.count(y) && idx[y] >= idx[holders[0]];
        if (c1 == c2) return false;  // exactly one option must apply
    }
    return true;
}

// Brute-force search for an atom partition satisfying the axiomatic GAF
// conditions.  Capped at 8 distinct atoms.  Atoms containing a universal
// variable are forced into that variable's class; the rest backtrack over
// At_0 and all At_x.
inline std::optional<GafPartition> gaf_axiomatic_search(const StandardFormSentence& s) {
    std::vector<Literal> lits;
    detail::collect_literal_occurrences(s.matrix, lits);
    std::vector<FormulaPtr> atoms = detail::distinct_atoms(lits);
    if (atoms.size() > 8) throw FoltError("gaf_axiomatic_search: more than 8 distinct atoms");
    const int n = s.n();
    std::set<std::string> xset;
    std::vector<std::string> xs;
    for (int k = 1; k <= n; ++k)
        for (const auto& v : s.xbar(k)) {
            xset.insert(v);
            xs.push_back(v);
        }
    // class encoding: 0 = At_0, 1 + i = At_{xs[i]}
    const int num_classes = 1 + static_cast<int>(xs.size());
    std::vector<std::vector<int>> feasible(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        std::set<std::string> vs = free_vars(atoms[i]);
        std::vector<std::string> axv;
        for (const auto& v : vs)
            if (xset.count(v)) axv.push_back(v);
        if (axv.size() > 1) return std::nullopt;  // condition (b) unsatisfiable
        if (axv.size() == 1) {
            for (int c = 1; c < num_classes; ++c)
                if (xs[c - 1] == axv[0]) feasible[i].push_back(c);
        } else {
            for (int c = 0; c < num_classes; ++c) feasible[i].push_back(c);
        }
    }
    std::vector<int> cls(atoms.size(), 0);
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
        if (i == atoms.size()) {
            GafPartition p;
            for (const auto& x : xs) p.atx[x];
            for (std::size_t j = 0; j < atoms.size(); ++j) {
                if (cls[j] == 0)
                    p.at0.push_back(atoms[j]);
                else
                    p.atx[xs[cls[j] - 1]].push_back(atoms[j]);
            }
            return gaf_axiomatic_witness(s, p);
        }
        for (int c : feasible[i]) {
            cls[i] = c;
            if (go(i + 1)) return true;
        }
        return false;
    };
    if (!go(0)) return std::nullopt;
    GafPartition p;
    for (const auto& x : xs) p.atx[x];
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        if (cls[j] == 0)
            p.at0.push_back(atoms[j]);
        else
            p.atx[xs[cls[j] - 1]].push_back(atoms[j]);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Aggregate classification
// ---------------------------------------------------------------------------

struct Classification {
    std::set<std::string> fragments;  // subset of the six names below
    bool has_equality = false;
    bool has_functions = false;  // non-constant function symbols
    int max_function_arity = 0;
};

// Tests membership in SF, BSR, Ackermann, relational-monadic, GBSR, and GAF
// and records signature feature flags.
inline Classification classify(const StandardFormSentence& s) {
    Classification c;
    Signature sig = signature_of(s);
    c.has_equality = sig.has_equality;
    c.has_functions = !sig.functions.empty();
    for (const auto& [name, ar] : sig.functions)
        c.max_function_arity = std::max(c.max_function_arity, static_cast<int>(ar));

    const int n = s.n();
    std::set<std::string> xset, yset;
    for (const auto& b : s.x_blocks) xset.insert(b.begin(), b.end());
    for (const auto& b : s.y_blocks) yset.insert(b.begin(), b.end());

    // SF: no atom mixes universal variables with existential variables,
    // where a leading existential block (before any universal quantifier)
    // counts as neither.
    {
        std::set<std::string> leading;
        bool universal_seen = false;
        for (int k = 1; k <= n && !universal_seen; ++k) {
            if (!s.xbar(k).empty()) {
                universal_seen = true;
                break;
            }
            leading.insert(s.ybar(k).begin(), s.ybar(k).end());
        }
        std::vector<Literal> lits;
        detail::collect_literal_occurrences(s.matrix, lits);
        bool separated = true;
        for (const auto& l : lits) {
            std::set<std::string> vs = free_vars(l.atom);
            bool has_u = false, has_v = false;
            for (const auto& v : vs) {
                if (xset.count(v)) has_u = true;
                if (yset.count(v) && !leading.count(v)) has_v = true;
            }
            if (has_u && has_v) {
                separated = false;
                break;
            }
        }
        if (separated && !c.has_functions) c.fragments.insert("SF");
    }

    // Prefix pattern as a flat quantifier string.
    std::string pattern;
    for (int k = 1; k <= n; ++k) {
        pattern += std::string(s.xbar(k).size(), 'A');
        pattern += std::string(s.ybar(k).size(), 'E');
    }
    bool exists_forall = pattern.find('E', pattern.find('A')) == std::string::npos ||
                         pattern.find('A') == std::string::npos;
    if (exists_forall && !c.has_functions) c.fragments.insert("BSR");

    // Ackermann: relational, exactly one universal variable, no equality.
    if (!c.has_functions && !c.has_equality && xset.size() == 1)
        c.fragments.insert("Ackermann");

    // Relational monadic: all predicates unary, no function symbols.
    {
        bool monadic = !c.has_functions;
        for (const auto& [name, ar] : sig.predicates)
            if (ar != 1) monadic = false;
        if (monadic) c.fragments.insert("relational-monadic");
    }

    if (!c.has_functions && analyze_gbsr(s).is_gbsr) c.fragments.insert("GBSR");
    if (analyze_gaf(s).is_gaf) c.fragments.insert("GAF");
    return c;
}

}  // namespace folt

#endif  // FOLT_CLASSIFY_HPP
