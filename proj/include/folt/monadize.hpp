#ifndef FOLT_MONADIZE_HPP
#define FOLT_MONADIZE_HPP

// Translation of a shape-checked Skolem sentence into the full monadic
// fragment: single-variable-atom unification, the closure of the atom set
// under unifier images, the bridge axioms coupling the fresh unary predicates,
// and model transfer in both directions.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "folt/ast.hpp"
#include "folt/gaf_transform.hpp"
#include "folt/normal.hpp"
#include "folt/parse.hpp"
#include "folt/structure.hpp"

namespace folt {

struct PreconditionViolated : FoltError {
    using FoltError::FoltError;
};

struct ShapeViolation : FoltError {
    using FoltError::FoltError;
};

struct EqualityNotSupported : FoltError {
    using FoltError::FoltError;
};

struct InputNotAModel : FoltError {
    using FoltError::FoltError;
};

struct DepthBoundaryIncomplete : FoltError {
    using FoltError::FoltError;
};

// ---------------------------------------------------------------------------
// Single-variable atoms: helpers

namespace detail {

// The unique variable of an atom, if any.  Throws when the atom has two or
// more distinct variables.
inline std::optional<std::string> atom_single_var(const Formula& a) {
    std::set<std::string> vs;
    for (const auto& t : a.args) term_vars_into(t, vs);
    if (vs.empty()) return std::nullopt;
    if (vs.size() > 1)
        throw PreconditionViolated("atom has more than one distinct variable: " + serialize(a));
    return *vs.begin();
}

// Renames the atom's single variable (if any) to `name`.
inline FormulaPtr atom_with_var(const FormulaPtr& a, const std::string& name) {
    auto v = atom_single_var(*a);
    if (!v || *v == name) return a;
    Substitution sub;
    sub.map.emplace(*v, Term::var(name));
    std::vector<Term> args;
    args.reserve(a->args.size());
    for (const auto& t : a->args) args.push_back(sub.apply(t));
    return Formula::atom(a->pred, std::move(args));
}

// Canonical form under equality-up-to-variable-renaming: the single variable
// is renamed to X1, making the relation a syntactic comparison.
inline FormulaPtr canonical_atom(const FormulaPtr& a) { return atom_with_var(a, "X1"); }

inline std::string atom_key(const FormulaPtr& a) { return serialize(canonical_atom(a)); }

inline void require_atom(const Formula& a) {
    if (a.kind == FormulaKind::Equality)
        throw EqualityNotSupported("equality atom: " + serialize(a));
    if (a.kind != FormulaKind::Atom)
        throw PreconditionViolated("not an atom: " + serialize(a));
}

// One-sided matching: a substitution over pat's variables with pat|sub == t,
// or nullopt.  Target variables behave like constants.
inline bool match_terms(const Term& pat, const Term& t, Substitution& sub) {
    if (pat.kind == TermKind::Var) {
        if (auto bound = sub.lookup(pat.name)) return *bound == t;
        sub.map.emplace(pat.name, t);
        return true;
    }
    if (pat.kind != t.kind || pat.name != t.name || pat.args.size() != t.args.size()) return false;
    for (std::size_t i = 0; i < pat.args.size(); ++i)
        if (!match_terms(pat.args[i], t.args[i], sub)) return false;
    return true;
}

// Instance relation on atoms: a substitution sending A onto B, if one exists.
inline std::optional<Substitution> match_atom(const FormulaPtr& A, const FormulaPtr& B) {
    if (A->pred != B->pred || A->args.size() != B->args.size()) return std::nullopt;
    Substitution sub;
    for (std::size_t i = 0; i < A->args.size(); ++i)
        if (!match_terms(A->args[i], B->args[i], sub)) return std::nullopt;
    return sub;
}

// Occurs-check unification over a worklist of term pairs.
inline bool unify_terms(std::vector<std::pair<Term, Term>> work, Substitution& sub) {
    while (!work.empty()) {
        Term s = sub.apply(work.back().first);
        Term t = sub.apply(work.back().second);
        work.pop_back();
        if (s == t) continue;
        if (t.kind == TermKind::Var) std::swap(s, t);
        if (s.kind == TermKind::Var) {
            if (term_vars(t).count(s.name)) return false;  // occurs check
            sub.map.emplace(s.name, t);
            sub.normalize();
            continue;
        }
        if (s.kind != t.kind || s.name != t.name || s.args.size() != t.args.size()) return false;
        for (std::size_t i = 0; i < s.args.size(); ++i) work.emplace_back(s.args[i], t.args[i]);
    }
    return true;
}

}  // namespace detail

// Most general unifier of two variable-disjoint atoms that each carry at most
// one distinct variable (possibly with several occurrences), or nullopt.
inline std::optional<Substitution> unify_atoms(const FormulaPtr& A, const FormulaPtr& B) {
    detail::require_atom(*A);
    detail::require_atom(*B);
    auto va = detail::atom_single_var(*A);
    auto vb = detail::atom_single_var(*B);
    if (va && vb && *va == *vb)
        throw PreconditionViolated("atoms share the variable " + *va);
    if (A->pred != B->pred || A->args.size() != B->args.size()) return std::nullopt;
    std::vector<std::pair<Term, Term>> work;
    for (std::size_t i = 0; i < A->args.size(); ++i) work.emplace_back(A->args[i], B->args[i]);
    Substitution sub;
    if (!detail::unify_terms(std::move(work), sub)) return std::nullopt;
    return sub;
}

// ---------------------------------------------------------------------------
// Atom closure

struct AtomClosure {
    // Pairwise variable-disjoint representatives; the i-th (1-based) carries
    // the variable X{i} when non-ground.  No two are equal up to renaming.
    std::vector<FormulaPtr> atoms;
    // Fresh unary predicate names, parallel to `atoms`.
    std::vector<std::string> preds;
    // Canonical serialization of an atom -> its representative's index.
    std::map<std::string, std::size_t> rep;
    // Designated constant used for ground-atom proxies.
    std::string d;

    std::size_t size() const { return atoms.size(); }
    std::size_t index_of(const FormulaPtr& atom) const {
        auto it = rep.find(detail::atom_key(atom));
        if (it == rep.end())
            throw FoltError("atom has no closure representative: " + serialize(atom));
        return it->second;
    }
};

// Closes the atom set under mgu images, up to renaming of the single
// variable.  Seeds are the canonicalized inputs; each unifiable pair (after
// renaming apart) contributes its common instance.  Termination: an mgu image
// of two representatives is either one of them up to renaming or ground, so
// at most one new element arises per unordered pair.
inline AtomClosure build_atom_closure(const std::vector<FormulaPtr>& atoms, const std::string& d) {
    AtomClosure out;
    out.d = d;

    std::vector<FormulaPtr> worklist;  // canonical forms, insertion-ordered
    std::set<std::string> seen;
    auto add = [&](const FormulaPtr& a) {
        detail::require_atom(*a);
        FormulaPtr c = detail::canonical_atom(a);
        if (seen.insert(serialize(c)).second) worklist.push_back(c);
    };
    for (const auto& a : atoms) add(a);

    for (std::size_t i = 0; i < worklist.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            FormulaPtr a = worklist[i];
            FormulaPtr b = detail::atom_with_var(worklist[j], "X2");
            auto theta = unify_atoms(a, b);
            if (!theta) continue;
            std::vector<Term> args;
            args.reserve(a->args.size());
            for (const auto& t : a->args) args.push_back(theta->apply(t));
            add(Formula::atom(a->pred, std::move(args)));
        }
    }

    // Collision-free unary predicate names: mp1, mp2, ... skipping any name
    // the input atoms already use.
    std::set<std::string> used;
    for (const auto& a : worklist) used.insert(a->pred);
    int counter = 0;
    auto fresh_pred = [&]() {
        for (;;) {
            std::string cand = "mp" + std::to_string(++counter);
            if (used.insert(cand).second) return cand;
        }
    };

    for (std::size_t i = 0; i < worklist.size(); ++i) {
        out.rep.emplace(serialize(worklist[i]), i);
        out.atoms.push_back(detail::atom_with_var(worklist[i], "X" + std::to_string(i + 1)));
        out.preds.push_back(fresh_pred());
    }
    return out;
}

// ---------------------------------------------------------------------------
// The translation

struct MonadizationResult {
    SkolemSentence input;              // the sentence that was translated
    std::vector<FormulaPtr> atoms;     // distinct atoms of the input matrix
    AtomClosure closure;
    FormulaPtr phi_mon;                // input with atoms replaced by unary proxies
    std::vector<FormulaPtr> psi;       // bridge biconditionals between proxies
    std::vector<FormulaPtr> psi_prime; // ground-proxy biconditionals
    FormulaPtr phi_out;                // phi_mon /\ forall xstar. /\(psi u psi')
    std::string xstar;                 // the shared bridge variable
    Substitution tau_star;             // every closure variable -> xstar
};

namespace detail {

inline void collect_atoms(const FormulaPtr& f, std::vector<FormulaPtr>& out,
                          std::set<std::string>& seen) {
    switch (f->kind) {
        case FormulaKind::Atom:
            if (seen.insert(serialize(f)).second) out.push_back(f);
            return;
        case FormulaKind::Equality:
            throw EqualityNotSupported("equality atom: " + serialize(f));
        default:
            for (const auto& k : f->kids) collect_atoms(k, out, seen);
    }
}

// Rewrites every atom of the matrix to its unary proxy: B with variable x
// becomes P_i(x) for the representative A_i of B; ground B becomes P_j(d).
inline FormulaPtr proxy_rewrite(const FormulaPtr& f, const AtomClosure& cl) {
    switch (f->kind) {
        case FormulaKind::Atom: {
            std::size_t i = cl.index_of(f);
            auto v = atom_single_var(*f);
            Term arg = v ? Term::var(*v) : Term::cst(cl.d);
            return Formula::atom(cl.preds[i], {arg});
        }
        case FormulaKind::Equality:
            throw EqualityNotSupported("equality atom: " + serialize(f));
        case FormulaKind::Not:
            return Formula::negate(proxy_rewrite(f->kids[0], cl));
        case FormulaKind::And:
        case FormulaKind::Or: {
            std::vector<FormulaPtr> ks;
            ks.reserve(f->kids.size());
            for (const auto& k : f->kids) ks.push_back(proxy_rewrite(k, cl));
            return Formula::nary(f->kind, std::move(ks));
        }
        default:
            throw PreconditionViolated("matrix is not quantifier-free: " + serialize(f));
    }
}

// a <-> b in negation normal form.
inline FormulaPtr iff_nnf(const FormulaPtr& a, const FormulaPtr& b) {
    return Formula::conj({Formula::disj({Formula::negate(a), b}),
                          Formula::disj({Formula::negate(b), a})});
}

}  // namespace detail

// Translates a shape-checked, equality-free Skolem sentence into the full
// monadic fragment.  The result is equisatisfiable with the input; only the
// input's constants and functions (plus possibly the designated constant)
// appear, and every predicate of the output is unary.
inline MonadizationResult monadize(const SkolemSentence& s) {
    SkolemShapeReport shape = check_skolem_shape(s);
    if (!shape.unary_functions_only)
        throw ShapeViolation("function of arity > 1: " + shape.witness_function);
    if (!shape.atoms_single_variable)
        throw ShapeViolation("atom with two distinct variables: " + shape.witness_atom);
    if (!shape.terms_flat)
        throw ShapeViolation("nested term: " + shape.witness_term);

    Signature sig = signature_of(*s.matrix);
    if (sig.has_equality) throw EqualityNotSupported("input sentence uses equality");

    MonadizationResult out;
    out.input = s;
    std::set<std::string> seen;
    detail::collect_atoms(s.matrix, out.atoms, seen);
    if (out.atoms.empty()) throw PreconditionViolated("matrix contains no atoms");

    std::string d = sig.constants.empty() ? "d0" : *sig.constants.begin();
    out.closure = build_atom_closure(out.atoms, d);
    const AtomClosure& cl = out.closure;

    out.phi_mon = Formula::forall(s.prefix, detail::proxy_rewrite(s.matrix, cl));

    // Bridge variable, fresh for the whole construction.
    std::set<std::string> vars(s.prefix.begin(), s.prefix.end());
    for (const auto& a : cl.atoms) {
        auto v = detail::atom_single_var(*a);
        if (v) vars.insert(*v);
    }
    out.xstar = "Xstar";
    for (int k = 1; vars.count(out.xstar); ++k) out.xstar = "Xstar" + std::to_string(k);
    for (const auto& v : vars) out.tau_star.map.emplace(v, Term::var(out.xstar));

    // Bridges: for each strictly-more-general pair A_i -> A_j (instance via
    // theta), couple P_i at the instantiation point with P_j everywhere.
    // Distinct closure members are never renamings of each other, so a
    // successful match is automatically strict.
    for (std::size_t i = 0; i < cl.size(); ++i) {
        auto vi = detail::atom_single_var(*cl.atoms[i]);
        if (!vi) continue;
        for (std::size_t j = 0; j < cl.size(); ++j) {
            if (i == j) continue;
            auto theta = detail::match_atom(cl.atoms[i], cl.atoms[j]);
            if (!theta) continue;
            Term image = out.tau_star.apply(theta->apply(Term::var(*vi)));
            out.psi.push_back(detail::iff_nnf(
                Formula::atom(cl.preds[i], {std::move(image)}),
                Formula::atom(cl.preds[j], {Term::var(out.xstar)})));
        }
    }
    for (std::size_t j = 0; j < cl.size(); ++j) {
        if (detail::atom_single_var(*cl.atoms[j])) continue;
        out.psi_prime.push_back(detail::iff_nnf(
            Formula::atom(cl.preds[j], {Term::var(out.xstar)}),
            Formula::atom(cl.preds[j], {Term::cst(cl.d)})));
    }

    std::vector<FormulaPtr> bridge = out.psi;
    bridge.insert(bridge.end(), out.psi_prime.begin(), out.psi_prime.end());
    if (bridge.empty())
        out.phi_out = out.phi_mon;
    else
        out.phi_out = Formula::conj(
            {out.phi_mon, Formula::forall({out.xstar}, Formula::conj(std::move(bridge)))});
    return out;
}

// ---------------------------------------------------------------------------
// Model transfer, input side -> monadic side

// Builds a model of the monadic output from a model of the input sentence:
// same universe, constants, and functions; each proxy holds at t exactly when
// the represented atom holds under [x -> t] (non-ground), or everywhere /
// nowhere by the atom's truth value (ground).  Verifies the result and names
// a failing conjunct if the construction ever broke down.
inline FiniteStructure transfer_model_forward(const FiniteStructure& A,
                                              const MonadizationResult& m) {
    if (!evaluate(A, *m.input.to_formula()))
        throw InputNotAModel("structure does not satisfy the input sentence");

    FiniteStructure B;
    B.size = A.size;
    B.constants = A.constants;
    B.functions = A.functions;
    B.function_arity = A.function_arity;
    if (!B.constants.count(m.closure.d)) B.constants[m.closure.d] = 0;

    for (std::size_t i = 0; i < m.closure.size(); ++i) {
        const FormulaPtr& atom = m.closure.atoms[i];
        auto& rel = B.predicates[m.closure.preds[i]];
        if (auto v = detail::atom_single_var(*atom)) {
            for (int t = 0; t < A.size; ++t) {
                Assignment beta{{*v, t}};
                if (evaluate(A, beta, *atom)) rel.insert({t});
            }
        } else if (evaluate(A, *atom)) {
            for (int t = 0; t < A.size; ++t) rel.insert({t});
        }
    }

    if (!evaluate(B, *m.phi_out)) {
        std::string bad = serialize(m.phi_mon);
        if (evaluate(B, *m.phi_mon)) {
            for (const auto& grp : {m.psi, m.psi_prime})
                for (const auto& f : grp)
                    if (!evaluate(B, *Formula::forall({m.xstar}, f))) bad = serialize(f);
        }
        throw FoltError("forward transfer produced a non-model; failing subformula: " + bad);
    }
    return B;
}

// ---------------------------------------------------------------------------
// Model transfer, monadic side -> input side

// Ground terms over a signature up to a depth cap, indexed for use as a
// structure universe.  Constants come first, then depth 1, depth 2, ...
struct TermUniverse {
    std::vector<Term> terms;
    std::map<std::string, int> index;  // serialized term -> element
    int depth = 0;

    int at(const Term& t) const {
        auto it = index.find(serialize_term(t));
        return it == index.end() ? -1 : it->second;
    }
};

inline TermUniverse ground_term_universe(const Signature& sig, const std::string& d, int depth) {
    TermUniverse u;
    u.depth = depth;
    auto add = [&](const Term& t) {
        if (u.index.emplace(serialize_term(t), static_cast<int>(u.terms.size())).second)
            u.terms.push_back(t);
    };
    add(Term::cst(d));
    for (const auto& c : sig.constants) add(Term::cst(c));
    std::size_t level_start = 0;
    for (int dep = 1; dep <= depth; ++dep) {
        std::size_t level_end = u.terms.size();
        for (const auto& [name, arity] : sig.functions) {
            if (arity != 1) throw PreconditionViolated("non-unary function " + name);
            for (std::size_t i = level_start; i < level_end; ++i)
                add(Term::app(name, {u.terms[i]}));
        }
        level_start = level_end;
    }
    return u;
}

// The canonical structure skeleton over a depth-capped ground-term universe:
// constants and functions interpreted syntactically; a function image beyond
// the cap falls back to its argument (the saturated entries are exactly the
// depth-boundary ones).  Predicates are left empty for the caller to fill.
inline FiniteStructure term_skeleton(const Signature& sig, const std::string& d,
                                     const TermUniverse& u) {
    FiniteStructure B;
    B.size = static_cast<int>(u.terms.size());
    B.constants[d] = 0;
    for (const auto& c : sig.constants) B.constants[c] = u.at(Term::cst(c));
    for (const auto& [name, arity] : sig.functions) {
        B.function_arity[name] = arity;
        std::vector<int> table(static_cast<std::size_t>(B.size));
        for (int t = 0; t < B.size; ++t) {
            int img = u.at(Term::app(name, {u.terms[static_cast<std::size_t>(t)]}));
            table[static_cast<std::size_t>(t)] = img >= 0 ? img : t;
        }
        B.functions[name] = std::move(table);
    }
    return B;
}

struct BackwardTransfer {
    FiniteStructure model;
    std::vector<Term> universe;         // element -> the ground term it denotes
    std::vector<std::string> caveats;   // depth-boundary incompleteness notes

    bool complete() const { return caveats.empty(); }
};

// Builds a model of the input sentence from a depth-capped ground-term model
// of the monadic output.  Each original predicate collects (1) instances of
// its non-ground atoms at points where the representative proxy holds and
// (2) its ground closure atoms whose proxy holds at d.  The result is
// verified over the truncated universe; assignments touching the depth
// boundary are checked advisorily and reported rather than failed.
inline BackwardTransfer transfer_model_backward(const FiniteStructure& B,
                                                const MonadizationResult& m, int depth = 3) {
    if (depth < 0) throw PreconditionViolated("negative depth cap");
    Signature sig = signature_of(*m.input.matrix);
    TermUniverse u = ground_term_universe(sig, m.closure.d, depth);
    const AtomClosure& cl = m.closure;

    if (B.size != static_cast<int>(u.terms.size()))
        throw PreconditionViolated(
            "structure universe is not the depth-" + std::to_string(depth) +
            " ground-term universe: expected " + std::to_string(u.terms.size()) +
            " elements, got " + std::to_string(B.size));
    for (const auto& [c, e] : B.constants) {
        int want = u.at(Term::cst(c));
        if (want >= 0 && e != want)
            throw PreconditionViolated("constant " + c + " not interpreted syntactically");
    }
    for (const auto& [name, table] : B.functions)
        for (int t = 0; t < B.size; ++t) {
            int img = u.at(Term::app(name, {u.terms[static_cast<std::size_t>(t)]}));
            if (img >= 0 && table[static_cast<std::size_t>(t)] != img)
                throw PreconditionViolated("function " + name + " not interpreted syntactically");
        }
    if (!evaluate(B, *m.phi_out))
        throw InputNotAModel("structure does not satisfy the monadic sentence");

    BackwardTransfer out;
    out.universe = u.terms;
    out.model = term_skeleton(sig, cl.d, u);
    FiniteStructure& A = out.model;

    auto proxy_holds = [&](std::size_t j, int elem) {
        auto it = B.predicates.find(cl.preds[j]);
        return it != B.predicates.end() && it->second.count({elem}) > 0;
    };

    for (const auto& [name, arity] : sig.predicates)
        A.predicates[name];  // every predicate interpreted, possibly empty
    for (const auto& atom : m.atoms) {
        std::size_t j = cl.index_of(atom);
        auto v = detail::atom_single_var(*atom);
        if (v) {
            for (int t = 0; t < B.size; ++t) {
                if (!proxy_holds(j, t)) continue;
                Substitution inst;
                inst.map.emplace(*v, u.terms[static_cast<std::size_t>(t)]);
                std::vector<int> tuple;
                bool representable = true;
                for (const auto& arg : atom->args) {
                    int e = u.at(inst.apply(arg));
                    if (e < 0) {
                        representable = false;
                        break;
                    }
                    tuple.push_back(e);
                }
                if (!representable)
                    throw DepthBoundaryIncomplete(
                        "instance " + serialize_term(inst.apply(atom->args[0])) +
                        "... of " + serialize(atom) + " at " +
                        serialize_term(u.terms[static_cast<std::size_t>(t)]) +
                        " exceeds the depth cap " + std::to_string(depth));
                A.predicates[atom->pred].insert(std::move(tuple));
            }
        }
    }
    for (std::size_t j = 0; j < cl.size(); ++j) {
        const FormulaPtr& atom = cl.atoms[j];
        if (detail::atom_single_var(*atom)) continue;
        if (!proxy_holds(j, u.at(Term::cst(cl.d)))) continue;
        std::vector<int> tuple;
        for (const auto& arg : atom->args) {
            int e = u.at(arg);
            if (e < 0)
                throw DepthBoundaryIncomplete("ground atom " + serialize(atom) +
                                              " exceeds the depth cap " + std::to_string(depth));
            tuple.push_back(e);
        }
        A.predicates[atom->pred].insert(std::move(tuple));
    }

    // Verification over the truncated universe.  An assignment is interior
    // when no matrix term can leave the universe under it (with flat terms:
    // every assigned element sits strictly below the cap, or the signature is
    // function-free); a failure there is a genuine construction error.
    // Boundary assignments are evaluated with the saturated tables and only
    // reported when they fail.
    const std::vector<std::string>& prefix = m.input.prefix;
    std::vector<int> vals(prefix.size(), 0);
    bool functions_present = !sig.functions.empty();
    for (;;) {
        Assignment beta;
        bool interior = true;
        for (std::size_t i = 0; i < prefix.size(); ++i) {
            beta[prefix[i]] = vals[i];
            if (functions_present &&
                term_depth(u.terms[static_cast<std::size_t>(vals[i])]) >= depth)
                interior = false;
        }
        if (!evaluate(A, beta, *m.input.matrix)) {
            std::string where;
            for (std::size_t i = 0; i < prefix.size(); ++i)
                where += (i ? ", " : "") + prefix[i] + " = " +
                         serialize_term(u.terms[static_cast<std::size_t>(vals[i])]);
            if (interior)
                throw FoltError("backward transfer verification failed at " + where);
            out.caveats.push_back("unverifiable at the depth boundary: " + where);
        }
        std::size_t i = vals.size();
        while (i > 0) {
            if (++vals[i - 1] < B.size) break;
            vals[i - 1] = 0;
            --i;
        }
        if (i == 0) break;
    }
    return out;
}

}  // namespace folt

#endif  // FOLT_MONADIZE_HPP
