#ifndef FOLT_TO_BSR_HPP
#define FOLT_TO_BSR_HPP

// Equivalence-preserving transformation of a sentence accepted by the GBSR
// analysis into exists*-forall* (BSR) shape.
//
// The construction works stage by stage from the innermost quantifier block
// pair outwards (j = n..1).  At each stage the matrix is brought into DNF,
// the members of every conjunct are grouped by their residual literal class
// (the L-tilde partition of the analysis), the block's existential
// quantifiers are pushed onto the aggregate of all members of class >= j,
// and that subformula is frozen into an indivisible unit.  The matrix is
// then brought into CNF and the block's universal quantifiers are split
// along the X-tilde variable sets and pushed onto the per-class pieces of
// every disjunct, which are frozen as well.  Finally all quantifiers are
// pulled back out, existentials first.
//
// Freezing guarantees the boolean normal forms never look inside a unit, so
// every literal of the output is a copy of a literal of the input.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "folt/classify.hpp"
#include "folt/normal.hpp"
#include "folt/parse.hpp"

namespace folt {

struct NotGBSR : FoltError {
    using FoltError::FoltError;
};

struct TransformTrace {
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

namespace detail {

inline std::string literal_key(const FormulaPtr& f) {
    if (is_atomic(*f)) return "+" + serialize(f);
    if (f->kind == FormulaKind::Not) return "-" + serialize(f->kids[0]);
    throw FoltError("literal_key: not a literal");
}

// Hoists every quantifier of the given kind to the front, appending fresh
// names for the hoisted variables to `vars`.  Blocks merge positionally
// across the connective the quantifier distributes over (Or for exists, And
// for forall: exists x.a | exists x.b == exists x.(a | b)) and concatenate
// across the dual connective.  Subtrees rooted at the dual quantifier are
// treated as leaves, so the exists pass must run before the forall pass.
inline FormulaPtr merge_hoist(const FormulaPtr& f, FormulaKind q, FreshNamer& namer,
                              std::vector<std::string>& vars) {
    if (f->kind == q) {
        Substitution sub;
        for (const auto& v : f->vars) {
            std::string nv = namer.fresh();
            sub.map.emplace(v, Term::var(nv));
            vars.push_back(nv);
        }
        FormulaPtr body = merge_hoist(f->kids[0], q, namer, vars);
        return apply_substitution(body, sub);
    }
    FormulaKind share = q == FormulaKind::Exists ? FormulaKind::Or : FormulaKind::And;
    FormulaKind chain = q == FormulaKind::Exists ? FormulaKind::And : FormulaKind::Or;
    if (f->kind == chain) {
        std::vector<FormulaPtr> ks;
        ks.reserve(f->kids.size());
        for (const auto& k : f->kids) ks.push_back(merge_hoist(k, q, namer, vars));
        return Formula::nary(chain, std::move(ks));
    }
    if (f->kind == share) {
        std::vector<std::vector<std::string>> kid_vars(f->kids.size());
        std::vector<FormulaPtr> ks;
        ks.reserve(f->kids.size());
        std::size_t width = 0;
        for (std::size_t i = 0; i < f->kids.size(); ++i) {
            ks.push_back(merge_hoist(f->kids[i], q, namer, kid_vars[i]));
            width = std::max(width, kid_vars[i].size());
        }
        std::vector<std::string> shared;
        for (std::size_t p = 0; p < width; ++p) {
            shared.push_back(namer.fresh());
            vars.push_back(shared.back());
        }
        for (std::size_t i = 0; i < ks.size(); ++i) {
            Substitution sub;
            for (std::size_t p = 0; p < kid_vars[i].size(); ++p)
                sub.map.emplace(kid_vars[i][p], Term::var(shared[p]));
            if (!sub.empty()) ks[i] = apply_substitution(ks[i], sub);
        }
        return Formula::nary(share, std::move(ks));
    }
    return f;
}

inline bool contains_quantifier(const FormulaPtr& f) {
    if (f->kind == FormulaKind::Forall || f->kind == FormulaKind::Exists) return true;
    for (const auto& k : f->kids)
        if (contains_quantifier(k)) return true;
    return false;
}

inline std::vector<FormulaPtr> members_of(const FormulaPtr& f, FormulaKind glue) {
    if (f->kind == glue) return f->kids;
    return {f};
}

inline std::set<std::string> intersect(const std::set<std::string>& a,
                                       const std::set<std::string>& b) {
    std::set<std::string> r;
    for (const auto& v : a)
        if (b.count(v)) r.insert(v);
    return r;
}

}  // namespace detail

// Transforms a GBSR sentence into an equivalent sentence with prefix
// exists*-forall*.  Throws NotGBSR when the analysis verdict is negative and
// propagates SizeGuardExceeded from the normal-form steps.
inline StandardFormSentence gbsr_to_bsr(const StandardFormSentence& s, const GbsrAnalysis& a,
                                        TransformTrace* trace = nullptr,
                                        std::size_t size_guard = kDefaultSizeGuard) {
    if (!a.is_gbsr) throw NotGBSR("gbsr_to_bsr: sentence is not GBSR");
    const int n = s.n();

    // Residual class per literal (keyed by sign + atom text; membership in
    // the L-sets is determined by the literal's variables, so syntactically
    // equal copies share their class).
    std::map<std::string, int> literal_tag;
    for (int k = 0; k <= n; ++k)
        for (int i : a.L_res[k])
            literal_tag[detail::literal_key(a.literals[i].to_formula())] = k;

    std::map<int, int> unit_tag;  // frozen-unit id -> class
    int next_unit = 1;
    auto member_tag = [&](const FormulaPtr& f) -> int {
        if (f->kind == FormulaKind::Frozen) return unit_tag.at(f->unit_id);
        auto it = literal_tag.find(detail::literal_key(f));
        if (it == literal_tag.end()) throw FoltError("gbsr_to_bsr: unknown literal");
        return it->second;
    };

    FormulaPtr matrix = s.matrix;
    for (int j = n; j >= 1; --j) {
        TransformTrace::Stage st;
        st.j = j;
        std::set<std::string> yj(s.ybar(j).begin(), s.ybar(j).end());
        std::set<std::string> xj(s.xbar(j).begin(), s.xbar(j).end());

        // DNF, then push exists(y_j) onto the aggregate of those class >= j
        // members of every conjunct that mention a y_j variable.  Members
        // free of y_j stay outside the quantifier (miniscoping over the
        // conjunction), keeping their own class for later grouping.
        matrix = boolean_normal_form(matrix, NormalFormMode::DNF, size_guard);
        if (trace) st.after_dnf = serialize(matrix);
        {
            std::vector<FormulaPtr> conjuncts;
            for (const auto& c : detail::members_of(matrix, FormulaKind::Or)) {
                std::vector<FormulaPtr> keep, carry;
                for (const auto& mem : detail::members_of(c, FormulaKind::And)) {
                    bool inside = member_tag(mem) >= j &&
                                  !detail::intersect(free_vars(mem), yj).empty();
                    (inside ? carry : keep).push_back(mem);
                }
                if (!carry.empty()) {
                    FormulaPtr body = Formula::conj(std::move(carry));
                    std::set<std::string> qv = detail::intersect(free_vars(body), yj);
                    FormulaPtr unit = Formula::frozen(
                        next_unit,
                        Formula::exists(std::vector<std::string>(qv.begin(), qv.end()), body));
                    unit_tag[next_unit++] = j;
                    keep.push_back(unit);
                }
                conjuncts.push_back(Formula::conj(std::move(keep)));
            }
            matrix = Formula::disj(std::move(conjuncts));
        }
        if (trace) st.after_exists = serialize(matrix);

        // CNF, then split forall(x_j) along the X-tilde classes of every
        // disjunct's members.
        matrix = boolean_normal_form(matrix, NormalFormMode::CNF, size_guard);
        if (trace) st.after_cnf = serialize(matrix);
        {
            std::vector<FormulaPtr> disjuncts;
            for (const auto& d : detail::members_of(matrix, FormulaKind::And)) {
                std::map<int, std::vector<FormulaPtr>> groups;
                std::vector<FormulaPtr> rest;
                for (const auto& mem : detail::members_of(d, FormulaKind::Or)) {
                    int t = member_tag(mem);
                    if (t < j)
                        groups[t].push_back(mem);
                    else
                        rest.push_back(mem);
                }
                std::vector<FormulaPtr> out = std::move(rest);
                for (auto& [l, mems] : groups) {
                    // Miniscoping over the disjunction: only the members that
                    // mention a variable of x_j (necessarily from this
                    // class's X set) go under the quantifier.
                    std::set<std::string> xjl = detail::intersect(xj, a.X_res[l]);
                    std::vector<FormulaPtr> wrap;
                    for (const auto& mem : mems) {
                        if (detail::intersect(free_vars(mem), xjl).empty())
                            out.push_back(mem);
                        else
                            wrap.push_back(mem);
                    }
                    if (wrap.empty()) continue;
                    FormulaPtr body = Formula::disj(std::move(wrap));
                    std::set<std::string> qv = detail::intersect(free_vars(body), xjl);
                    FormulaPtr unit = Formula::frozen(
                        next_unit,
                        Formula::forall(std::vector<std::string>(qv.begin(), qv.end()), body));
                    unit_tag[next_unit++] = l;
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
            if (fv.count(v)) throw FoltError("gbsr_to_bsr: unbound existential " + v);
        for (const auto& v : xj)
            if (fv.count(v)) throw FoltError("gbsr_to_bsr: unbound universal " + v);
    }

    // Pull the quantifiers back out, existentials first.  The construction
    // guarantees no existential quantifier is nested inside a universal one.
    FormulaPtr unfrozen = unfreeze(matrix);
    FreshNamer namer;
    namer.reserve_all_in(*unfrozen);
    std::vector<std::string> us, vs;
    FormulaPtr body = detail::merge_hoist(unfrozen, FormulaKind::Exists, namer, us);
    body = detail::merge_hoist(body, FormulaKind::Forall, namer, vs);
    if (detail::contains_quantifier(body))
        throw FoltError("gbsr_to_bsr: internal error, residual nested quantifier");
    FormulaPtr out = Formula::exists(us, Formula::forall(vs, body));
    StandardFormSentence result = normalize_standard_form(out);
    if (trace) trace->result = serialize(result.to_formula());
    return result;
}

}  // namespace folt

#endif  // FOLT_TO_BSR_HPP
