#ifndef FOLT_GAF_TRANSFORM_HPP
#define FOLT_GAF_TRANSFORM_HPP

// Equivalence-preserving un-nesting of sentences accepted by the GAF
// analysis — the output places every subformula under at most one universal
// quantifier — followed by Skolemization and the term-shape checks that
// license the monadization step.
//
// The un-nesting works stage by stage from the innermost quantifier block
// pair outwards (j = n..1), like the exists*-forall* transformation, but the
// grouping follows the coarse literal partition of the analysis: the x-free
// class L_0 versus one class L_x per universal variable x.  At each stage
// the matrix is brought into DNF and the block's existential quantifiers are
// pushed, per conjunct, onto the members of each class that mention them
// (the analysis guarantees no such variable spans two classes).  The matrix
// is then brought into CNF and, per disjunct, each x of the current block is
// prefixed to the aggregate of all class-x members.  The wrapped aggregate
// has no free universal variables left, so it migrates to class 0 for the
// remaining stages; this is what keeps universal scopes from nesting.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "folt/classify.hpp"
#include "folt/normal.hpp"
#include "folt/parse.hpp"
#include "folt/to_bsr.hpp"

namespace folt {

struct NotGAF : FoltError {
    using FoltError::FoltError;
};

struct UnnestTrace {
    struct Stage {
        int j = 0;
        std::string after_dnf;
        std::string after_exists;
        std::string after_cnf;
        std::string after_forall;
        // Unfrozen snapshot of the matrix after the stage (open formula over
        // the not-yet-processed prefix blocks), for oracle spot checks.
        FormulaPtr stage_matrix;
    };
    std::vector<Stage> stages;
    std::string result;
};

// Transforms a GAF sentence into an equivalent closed NNF formula in which
// no universal quantifier occurs in the scope of another one.  Throws NotGAF
// when the analysis verdict is negative and propagates SizeGuardExceeded
// from the normal-form steps.
inline FormulaPtr gaf_unnest(const StandardFormSentence& s, const GafAnalysis& a,
                             UnnestTrace* trace = nullptr,
                             std::size_t size_guard = kDefaultSizeGuard) {
    if (!a.is_gaf) throw NotGAF("gaf_unnest: sentence is not GAF");
    const int n = s.n();

    // Coarse class per literal: "" for the x-free class, otherwise the
    // universal variable x of its class (keyed by sign + atom text, as class
    // membership is determined by the literal's variables).
    std::map<std::string, std::string> literal_tag;
    for (int i : a.L0) literal_tag[detail::literal_key(a.literals[i].to_formula())] = "";
    for (const auto& [x, lits] : a.Lx)
        for (int i : lits) literal_tag[detail::literal_key(a.literals[i].to_formula())] = x;

    std::map<int, std::string> unit_tag;  // frozen-unit id -> class
    int next_unit = 1;
    auto member_tag = [&](const FormulaPtr& f) -> std::string {
        if (f->kind == FormulaKind::Frozen) return unit_tag.at(f->unit_id);
        auto it = literal_tag.find(detail::literal_key(f));
        if (it == literal_tag.end()) throw FoltError("gaf_unnest: unknown literal");
        return it->second;
    };

    FormulaPtr matrix = s.matrix;
    for (int j = n; j >= 1; --j) {
        UnnestTrace::Stage st;
        st.j = j;
        std::set<std::string> yj(s.ybar(j).begin(), s.ybar(j).end());

        // DNF, then push exists(y_j) per conjunct and per class onto the
        // members of that class that mention a y_j variable.  A y_j variable
        // never occurs in two classes: within the class of some x it belongs
        // to the Y_x reservoir of that x alone, and the aggregates wrapped
        // in a universal quantifier at earlier stages have already migrated
        // to class 0 together with their shared existential variables.
        matrix = boolean_normal_form(matrix, NormalFormMode::DNF, size_guard);
        if (trace) st.after_dnf = serialize(matrix);
        {
            std::vector<FormulaPtr> conjuncts;
            for (const auto& c : detail::members_of(matrix, FormulaKind::Or)) {
                std::map<std::string, std::vector<FormulaPtr>> carry;
                std::vector<FormulaPtr> keep;
                for (const auto& mem : detail::members_of(c, FormulaKind::And)) {
                    if (detail::intersect(free_vars(mem), yj).empty())
                        keep.push_back(mem);
                    else
                        carry[member_tag(mem)].push_back(mem);
                }
                for (auto& [cls, mems] : carry) {
                    FormulaPtr body = Formula::conj(std::move(mems));
                    std::set<std::string> qv = detail::intersect(free_vars(body), yj);
                    FormulaPtr unit = Formula::frozen(
                        next_unit,
                        Formula::exists(std::vector<std::string>(qv.begin(), qv.end()), body));
                    unit_tag[next_unit++] = cls;
                    keep.push_back(unit);
                }
                conjuncts.push_back(Formula::conj(std::move(keep)));
            }
            matrix = Formula::disj(std::move(conjuncts));
        }
        if (trace) st.after_exists = serialize(matrix);

        // CNF, then prefix forall x, per disjunct and per x of this block,
        // onto the aggregate of all class-x members.  The aggregate is kept
        // whole (no miniscoping): its x-free members may share existential
        // variables of outer blocks with class-0 members, and migrating the
        // whole unit to class 0 lets those variables be bound together at
        // their own stage.
        matrix = boolean_normal_form(matrix, NormalFormMode::CNF, size_guard);
        if (trace) st.after_cnf = serialize(matrix);
        {
            std::vector<FormulaPtr> disjuncts;
            std::set<std::string> xj(s.xbar(j).begin(), s.xbar(j).end());
            for (const auto& d : detail::members_of(matrix, FormulaKind::And)) {
                std::map<std::string, std::vector<FormulaPtr>> groups;
                std::vector<FormulaPtr> out;
                for (const auto& mem : detail::members_of(d, FormulaKind::Or)) {
                    std::string t = member_tag(mem);
                    if (xj.count(t))
                        groups[t].push_back(mem);
                    else
                        out.push_back(mem);  // class 0 or an outer block's class
                }
                for (auto& [x, mems] : groups) {
                    FormulaPtr body = Formula::disj(std::move(mems));
                    if (free_vars(body).count(x)) body = Formula::forall({x}, body);
                    FormulaPtr unit = Formula::frozen(next_unit, std::move(body));
                    unit_tag[next_unit++] = "";
                    out.push_back(unit);
                }
                disjuncts.push_back(Formula::disj(std::move(out)));
            }
            matrix = Formula::conj(std::move(disjuncts));
        }
        if (trace) {
            st.after_forall = serialize(matrix);
            st.stage_matrix = unfreeze(matrix);
            trace->stages.push_back(std::move(st));
        }

        // Defensive closedness check: this stage must have captured every
        // occurrence of the block's variables.
        std::set<std::string> fv = free_vars(matrix);
        for (const auto& v : yj)
            if (fv.count(v)) throw FoltError("gaf_unnest: unbound existential " + v);
        for (const auto& v : s.xbar(j))
            if (fv.count(v)) throw FoltError("gaf_unnest: unbound universal " + v);
    }

    FormulaPtr result = unfreeze(matrix);
    if (!free_vars(*result).empty())
        throw FoltError("gaf_unnest: internal error, result not closed");
    if (trace) trace->result = serialize(result);
    return result;
}

// ---------------------------------------------------------------------------
// Skolemization

struct SkolemSentence {
    std::vector<std::string> prefix;  // universal variables, outer to inner
    FormulaPtr matrix;                // quantifier-free NNF
    // Introduced symbol -> the existential variable it replaced.  Symbols
    // with an empty universal scope become constants, the rest functions.
    std::map<std::string, std::string> symbols;

    FormulaPtr to_formula() const { return Formula::forall(prefix, matrix); }
};

namespace detail {

// Pulls all universal quantifiers of an existential-free formula with
// pairwise distinct binder names out to the caller, outermost first.
inline FormulaPtr strip_foralls(const FormulaPtr& f, std::vector<std::string>& vars) {
    if (f->kind == FormulaKind::Forall) {
        vars.insert(vars.end(), f->vars.begin(), f->vars.end());
        return strip_foralls(f->kids[0], vars);
    }
    if (f->kind == FormulaKind::And || f->kind == FormulaKind::Or) {
        std::vector<FormulaPtr> ks;
        ks.reserve(f->kids.size());
        for (const auto& k : f->kids) ks.push_back(strip_foralls(k, vars));
        return Formula::nary(f->kind, std::move(ks));
    }
    if (f->kind == FormulaKind::Exists)
        throw FoltError("strip_foralls: residual existential quantifier");
    return f;
}

}  // namespace detail

// Replaces every existentially quantified variable by a term over a fresh
// Skolem symbol applied to the universally quantified variables whose scope
// contains it (outer to inner).  The input must be a closed NNF formula; the
// result is an equisatisfiable universal-prefix sentence.
inline SkolemSentence skolemize(const FormulaPtr& f) {
    if (!free_vars(*f).empty()) throw FoltError("skolemize: input not closed");

    // Distinct binder names let the universal prefix be assembled without
    // further renaming.
    FreshNamer var_namer;
    var_namer.reserve_all_in(*f);
    FormulaPtr renamed = rename_apart(f, var_namer);

    // Skolem symbols sk1, sk2, ... skipping names the input already uses.
    Signature sig = signature_of(*f);
    std::set<std::string> used;
    for (const auto& [nm, ar] : sig.functions) used.insert(nm);
    for (const auto& nm : sig.constants) used.insert(nm);
    int counter = 0;
    std::function<std::string()> fresh_fn = [&]() {
        for (;;) {
            std::string cand = "sk" + std::to_string(++counter);
            if (used.insert(cand).second) return cand;
        }
    };

    SkolemSentence out;
    std::vector<std::string> scope;
    Substitution sub;
    struct Walker {
        std::vector<std::string>& scope;
        Substitution& sub;
        std::map<std::string, std::string>& table;
        std::function<std::string()>& fresh;

        FormulaPtr run(const FormulaPtr& g) {
            switch (g->kind) {
                case FormulaKind::Atom: {
                    std::vector<Term> as;
                    as.reserve(g->args.size());
                    for (const auto& t : g->args) as.push_back(sub.apply(t));
                    return Formula::atom(g->pred, std::move(as));
                }
                case FormulaKind::Equality:
                    return Formula::equality(sub.apply(g->args[0]), sub.apply(g->args[1]));
                case FormulaKind::Not:
                    return Formula::negate(run(g->kids[0]));
                case FormulaKind::Forall: {
                    scope.insert(scope.end(), g->vars.begin(), g->vars.end());
                    FormulaPtr body = run(g->kids[0]);
                    scope.resize(scope.size() - g->vars.size());
                    return Formula::forall(g->vars, std::move(body));
                }
                case FormulaKind::Exists: {
                    for (const auto& v : g->vars) {
                        std::string name = fresh();
                        table[name] = v;
                        if (scope.empty()) {
                            sub.map.emplace(v, Term::cst(name));
                        } else {
                            std::vector<Term> args;
                            args.reserve(scope.size());
                            for (const auto& u : scope) args.push_back(Term::var(u));
                            sub.map.emplace(v, Term::app(name, std::move(args)));
                        }
                    }
                    FormulaPtr body = run(g->kids[0]);
                    for (const auto& v : g->vars) sub.map.erase(v);
                    return body;
                }
                case FormulaKind::And:
                case FormulaKind::Or: {
                    std::vector<FormulaPtr> ks;
                    ks.reserve(g->kids.size());
                    for (const auto& k : g->kids) ks.push_back(run(k));
                    return Formula::nary(g->kind, std::move(ks));
                }
                case FormulaKind::Frozen:
                    throw FoltError("skolemize: frozen unit in input");
            }
            return g;  // unreachable
        }
    };
    Walker w{scope, sub, out.symbols, fresh_fn};
    FormulaPtr body = w.run(renamed);
    out.matrix = detail::strip_foralls(body, out.prefix);
    return out;
}

// ---------------------------------------------------------------------------
// Term-shape report for Skolemized sentences

struct SkolemShapeReport {
    bool unary_functions_only = true;   // (i): no function symbol of arity > 1
    bool atoms_single_variable = true;  // (ii): every atom ground or one variable
    bool terms_flat = true;             // (i)': every term is c, v, or f(v)
    std::string witness_function;       // offending symbol for (i)
    std::string witness_atom;           // offending atom for (ii), serialized
    std::string witness_term;           // offending term for (i)', serialized

    bool all_ok() const { return unary_functions_only && atoms_single_variable && terms_flat; }
};

namespace detail {

inline void shape_check_term(const Term& t, SkolemShapeReport& r) {
    if (t.kind != TermKind::App) return;
    if (t.args.size() > 1 && r.unary_functions_only) {
        r.unary_functions_only = false;
        r.witness_function = t.name;
    }
    bool flat = t.args.size() == 1 && t.args[0].kind == TermKind::Var;
    if (t.args.size() > 1) flat = false;
    if (!flat && r.terms_flat) {
        r.terms_flat = false;
        r.witness_term = serialize_term(t);
    }
    for (const auto& a : t.args) shape_check_term(a, r);
}

inline void shape_check_formula(const FormulaPtr& f, SkolemShapeReport& r) {
    if (f->kind == FormulaKind::Atom || f->kind == FormulaKind::Equality) {
        std::set<std::string> vs;
        for (const auto& t : f->args) {
            term_vars_into(t, vs);
            shape_check_term(t, r);
        }
        if (vs.size() > 1 && r.atoms_single_variable) {
            r.atoms_single_variable = false;
            r.witness_atom = serialize(f);
        }
        return;
    }
    for (const auto& k : f->kids) shape_check_formula(k, r);
}

}  // namespace detail

// Reports whether the Skolemized sentence fits the clause shapes required by
// the monadization step: (i) unary functions only, (ii) at most one distinct
// variable per atom, and the stronger (i)' that every term is a constant, a
// variable, or a unary function applied to a variable.
inline SkolemShapeReport check_skolem_shape(const SkolemSentence& s) {
    SkolemShapeReport r;
    detail::shape_check_formula(s.matrix, r);
    return r;
}

}  // namespace folt

#endif  // FOLT_GAF_TRANSFORM_HPP
