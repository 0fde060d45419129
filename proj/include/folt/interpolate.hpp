#ifndef FOLT_INTERPOLATE_HPP
#define FOLT_INTERPOLATE_HPP

// Craig-Lyndon interpolation for relational BSR/GBSR sentences without
// equality: a polarity-aware ordered-resolution-with-selection procedure.
// The left input is Skolemized with fresh constants, the negated right
// input with fresh functions; both clause sets are saturated separately,
// their union is refuted, and the left-side clauses used in the refutation
// are de-Skolemized into the interpolant.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "folt/ast.hpp"
#include "folt/classify.hpp"
#include "folt/monadize.hpp"  // EqualityNotSupported, matching/unification helpers
#include "folt/normal.hpp"
#include "folt/gaf_transform.hpp"  // skolemize (verification-leg clausification)
#include "folt/parse.hpp"
#include "folt/to_bsr.hpp"

namespace folt {

struct NotEntailed : FoltError {
    using FoltError::FoltError;
};

// A saturation budget was exhausted before a conclusion was reached; this is
// an inconclusive outcome, not a refutation of the input.
struct LimitHit : FoltError {
    using FoltError::FoltError;
};

// ---------------------------------------------------------------------------
// Predicate polarity

struct PolarityPartition {
    std::set<std::string> pi1;  // in the left matrix but not the right
    std::set<std::string> pi2;  // positive left, not positive right, not pi1
    std::set<std::string> pi3;  // negative left, not negative right, not pi1
    std::set<std::string> pi4;  // shared remainder
};

namespace detail {

// A predicate occurs positively (negatively) when some occurrence sits under
// an even (odd) number of negations.  Connectives other than and/or/not are
// descended transparently; equality is rejected.
inline void collect_polarities(const FormulaPtr& f, bool negated, std::set<std::string>& pos,
                               std::set<std::string>& neg) {
    switch (f->kind) {
        case FormulaKind::Atom:
            (negated ? neg : pos).insert(f->pred);
            return;
        case FormulaKind::Equality:
            throw EqualityNotSupported("equality atom: " + serialize(f));
        case FormulaKind::Not:
            collect_polarities(f->kids[0], !negated, pos, neg);
            return;
        default:
            for (const auto& k : f->kids) collect_polarities(k, negated, pos, neg);
    }
}

}  // namespace detail

inline PolarityPartition polarity_partition(const FormulaPtr& phi_matrix,
                                            const FormulaPtr& psi_matrix) {
    std::set<std::string> pos_l, neg_l, pos_r, neg_r;
    detail::collect_polarities(phi_matrix, false, pos_l, neg_l);
    detail::collect_polarities(psi_matrix, false, pos_r, neg_r);
    std::set<std::string> occ_l = pos_l, occ_r = pos_r;
    occ_l.insert(neg_l.begin(), neg_l.end());
    occ_r.insert(neg_r.begin(), neg_r.end());

    PolarityPartition p;
    for (const auto& s : occ_l)
        if (!occ_r.count(s)) p.pi1.insert(s);
    for (const auto& s : pos_l)
        if (!pos_r.count(s) && !p.pi1.count(s)) p.pi2.insert(s);
    for (const auto& s : neg_l)
        if (!neg_r.count(s) && !p.pi1.count(s) && !p.pi2.count(s)) p.pi3.insert(s);
    for (const auto& s : occ_l)
        if (occ_r.count(s) && !p.pi2.count(s) && !p.pi3.count(s)) p.pi4.insert(s);
    return p;
}

// ---------------------------------------------------------------------------
// Clauses

struct ClauseLit {
    bool positive = true;
    std::string pred;
    std::vector<Term> args;

    FormulaPtr to_formula() const {
        FormulaPtr a = Formula::atom(pred, args);
        return positive ? a : Formula::negate(a);
    }
};

struct Clause {
    std::vector<ClauseLit> lits;
    int id = -1;
    int parent1 = -1, parent2 = -1;  // -1: input clause
    int side = 0;                    // 0: left input, 1: right input, 2: derived
};

// Selection: exactly the negative literals whose predicate belongs to the
// configured set; the term ordering is a lexicographic path ordering whose
// precedence puts the configured top predicates above all other predicates,
// which sit above function symbols, which sit above constants; ties within a
// group break lexicographically by name.
struct OrderingConfig {
    std::set<std::string> top_predicates;       // pi1
    std::set<std::string> selected_predicates;  // pi2 union pi3
};

namespace detail {

// Atoms are compared as terms with a reserved-marker root so that predicate
// symbols get their own precedence group.
constexpr char kPredMarker = '\x01';

inline Term atom_term(const ClauseLit& l) {
    return Term::app(std::string(1, kPredMarker) + l.pred, l.args);
}

// Precedence rank (group, name); a bigger group beats every smaller one.
inline std::pair<int, std::string> symbol_rank(const Term& t,
                                               const std::set<std::string>& top) {
    if (t.kind == TermKind::App) {
        if (!t.name.empty() && t.name[0] == kPredMarker) {
            std::string p = t.name.substr(1);
            return {top.count(p) ? 3 : 2, p};
        }
        return {1, t.name};
    }
    return {0, t.name};  // constant
}

inline bool lpo_gt(const Term& s, const Term& t, const std::set<std::string>& top) {
    if (t.kind == TermKind::Var) {
        if (s.kind == TermKind::Var) return false;
        return term_vars(s).count(t.name) > 0;
    }
    if (s.kind == TermKind::Var) return false;
    for (const auto& si : s.args)
        if (si == t || lpo_gt(si, t, top)) return true;
    auto rs = symbol_rank(s, top), rt = symbol_rank(t, top);
    if (rs != rt) {
        if (rs.first > rt.first || (rs.first == rt.first && rs.second > rt.second)) {
            for (const auto& tj : t.args)
                if (!lpo_gt(s, tj, top)) return false;
            return true;
        }
        return false;
    }
    // Same symbol: lexicographic on arguments, dominating the remainder.
    std::size_t i = 0;
    while (i < s.args.size() && s.args[i] == t.args[i]) ++i;
    if (i == s.args.size()) return false;  // equal terms
    if (!lpo_gt(s.args[i], t.args[i], top)) return false;
    for (std::size_t j = i + 1; j < t.args.size(); ++j)
        if (!lpo_gt(s, t.args[j], top)) return false;
    return true;
}

// Literal ordering: by atom; on equal atoms the negative literal is greater.
inline bool lit_gt(const ClauseLit& a, const ClauseLit& b, const std::set<std::string>& top) {
    Term ta = atom_term(a), tb = atom_term(b);
    if (lpo_gt(ta, tb, top)) return true;
    if (ta == tb) return !a.positive && b.positive;
    return false;
}

inline std::string lit_key(const ClauseLit& l) {
    std::string out = l.positive ? "" : "~";
    out += l.pred + "(";
    for (std::size_t i = 0; i < l.args.size(); ++i) {
        if (i) out += ",";
        out += serialize_term(l.args[i]);
    }
    return out + ")";
}

inline ClauseLit apply_lit(const ClauseLit& l, const Substitution& sub) {
    ClauseLit out{l.positive, l.pred, {}};
    out.args.reserve(l.args.size());
    for (const auto& t : l.args) out.args.push_back(sub.apply(t));
    return out;
}

inline std::vector<ClauseLit> apply_lits(const std::vector<ClauseLit>& ls,
                                         const Substitution& sub) {
    std::vector<ClauseLit> out;
    out.reserve(ls.size());
    for (const auto& l : ls) out.push_back(apply_lit(l, sub));
    return out;
}

inline std::set<std::string> clause_vars(const std::vector<ClauseLit>& lits) {
    std::set<std::string> vs;
    for (const auto& l : lits)
        for (const auto& t : l.args) term_vars_into(t, vs);
    return vs;
}

// Canonical form: duplicate literals removed, variables renamed in order of
// first occurrence, literals sorted.  Used for duplicate detection.
inline std::vector<ClauseLit> canonical_lits(std::vector<ClauseLit> lits) {
    std::sort(lits.begin(), lits.end(),
              [](const ClauseLit& a, const ClauseLit& b) { return lit_key(a) < lit_key(b); });
    Substitution ren;
    int k = 0;
    for (const auto& l : lits)
        for (const auto& t : l.args)
            for (const auto& v : term_vars(t))
                if (!ren.map.count(v)) ren.map.emplace(v, Term::var("V" + std::to_string(++k)));
    lits = apply_lits(lits, ren);
    std::sort(lits.begin(), lits.end(),
              [](const ClauseLit& a, const ClauseLit& b) { return lit_key(a) < lit_key(b); });
    lits.erase(std::unique(lits.begin(), lits.end(),
                           [](const ClauseLit& a, const ClauseLit& b) {
                               return lit_key(a) == lit_key(b);
                           }),
               lits.end());
    return lits;
}

inline std::string clause_key(const std::vector<ClauseLit>& canonical) {
    std::string out;
    for (const auto& l : canonical) out += lit_key(l) + "|";
    return out;
}

inline bool is_tautology(const std::vector<ClauseLit>& lits) {
    std::set<std::string> pos;
    for (const auto& l : lits)
        if (l.positive) pos.insert(lit_key(l));
    for (const auto& l : lits)
        if (!l.positive && pos.count(lit_key(l).substr(1))) return true;
    return false;
}

// One-sided literal matching: binds only the pattern side's variables.
inline bool match_lit(const ClauseLit& pat, const ClauseLit& tgt, Substitution& sub) {
    if (pat.positive != tgt.positive || pat.pred != tgt.pred ||
        pat.args.size() != tgt.args.size())
        return false;
    for (std::size_t i = 0; i < pat.args.size(); ++i)
        if (!match_terms(pat.args[i], tgt.args[i], sub)) return false;
    return true;
}

inline bool subsumes_from(const std::vector<ClauseLit>& c, std::size_t i,
                          const std::vector<ClauseLit>& d, const Substitution& sub) {
    if (i == c.size()) return true;
    for (const auto& dl : d) {
        Substitution s2 = sub;
        if (match_lit(c[i], dl, s2) && subsumes_from(c, i + 1, d, s2)) return true;
    }
    return false;
}

inline std::vector<ClauseLit> rename_lits(const std::vector<ClauseLit>& lits,
                                          const std::string& prefix) {
    Substitution ren;
    int k = 0;
    for (const auto& v : clause_vars(lits)) ren.map.emplace(v, Term::var(prefix + std::to_string(++k)));
    return apply_lits(lits, ren);
}

// C subsumes D: some substitution maps every literal of C onto a literal of
// D.  C is renamed apart first so shared variable names act independently.
inline bool subsumes(const std::vector<ClauseLit>& c, const std::vector<ClauseLit>& d) {
    if (c.size() > d.size()) return false;
    return subsumes_from(rename_lits(c, "S"), 0, d, Substitution{});
}

// Condensation: while some literal-onto-literal match yields a strictly
// smaller instance that subsumes the clause, replace the clause by it.
inline std::vector<ClauseLit> condense(std::vector<ClauseLit> lits) {
    bool changed = true;
    while (changed && lits.size() > 1) {
        changed = false;
        for (std::size_t i = 0; i < lits.size() && !changed; ++i) {
            for (std::size_t j = 0; j < lits.size() && !changed; ++j) {
                if (i == j) continue;
                Substitution sub;
                if (!match_lit(lits[i], lits[j], sub)) continue;
                std::vector<ClauseLit> inst = canonical_lits(apply_lits(lits, sub));
                if (inst.size() < lits.size() && subsumes(inst, lits)) {
                    lits = std::move(inst);
                    changed = true;
                }
            }
        }
    }
    return lits;
}

inline std::optional<Substitution> unify_lits(const ClauseLit& a, const ClauseLit& b) {
    if (a.pred != b.pred || a.args.size() != b.args.size()) return std::nullopt;
    std::vector<std::pair<Term, Term>> work;
    for (std::size_t i = 0; i < a.args.size(); ++i) work.emplace_back(a.args[i], b.args[i]);
    Substitution sub;
    if (!unify_terms(std::move(work), sub)) return std::nullopt;
    return sub;
}

inline std::vector<std::size_t> selected_literals(const std::vector<ClauseLit>& lits,
                                                  const OrderingConfig& cfg) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < lits.size(); ++i)
        if (!lits[i].positive && cfg.selected_predicates.count(lits[i].pred)) out.push_back(i);
    return out;
}

// No other literal of the instantiated clause is greater (strictly: or equal).
inline bool maximal_at(const std::vector<ClauseLit>& lits, std::size_t idx,
                       const Substitution& sub, const OrderingConfig& cfg, bool strictly) {
    ClauseLit me = apply_lit(lits[idx], sub);
    std::string me_key = lit_key(me);
    for (std::size_t i = 0; i < lits.size(); ++i) {
        if (i == idx) continue;
        ClauseLit other = apply_lit(lits[i], sub);
        if (lit_gt(other, me, cfg.top_predicates)) return false;
        if (strictly && lit_key(other) == me_key) return false;
    }
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Saturation

struct SaturationLimits {
    std::size_t max_clauses = 50000;     // kept clauses
    std::size_t max_iterations = 200000;  // given-clause loop steps
};

struct SaturationResult {
    std::vector<Clause> clauses;       // inference DAG: parents index into this
    std::vector<int> saturated;        // ids forming the saturated set
    std::optional<int> empty_clause;   // id of the derived empty clause
    std::size_t generated = 0;
};

// Deterministic given-clause loop for ordered resolution with selection,
// with tautology deletion, condensation, and forward subsumption.  Stops at
// the first empty clause when `stop_on_empty`; throws LimitHit when a budget
// is exhausted before saturation.
inline SaturationResult saturate(const std::vector<Clause>& input, const OrderingConfig& cfg,
                                 const SaturationLimits& limits = {},
                                 bool stop_on_empty = true) {
    SaturationResult res;
    std::set<std::string> seen;
    // passive queue ordered by (|lits|, canonical key, id)
    std::set<std::tuple<std::size_t, std::string, int>> passive;
    std::vector<int> active;
    long rename_counter = 0;

    auto admit = [&](std::vector<ClauseLit> lits, int p1, int p2, int side) {
        lits = detail::canonical_lits(std::move(lits));
        if (detail::is_tautology(lits)) return;
        lits = detail::condense(std::move(lits));
        std::string key = detail::clause_key(lits);
        if (!seen.insert(key).second) return;
        for (int id : active)
            if (detail::subsumes(res.clauses[id].lits, lits)) return;
        for (const auto& [sz, k, id] : passive)
            if (detail::subsumes(res.clauses[id].lits, lits)) return;
        Clause c;
        c.lits = std::move(lits);
        c.id = static_cast<int>(res.clauses.size());
        c.parent1 = p1;
        c.parent2 = p2;
        c.side = side;
        if (c.lits.empty() && !res.empty_clause) res.empty_clause = c.id;
        passive.insert({c.lits.size(), key, c.id});
        res.clauses.push_back(std::move(c));
        ++res.generated;
        if (res.clauses.size() > limits.max_clauses)
            throw LimitHit("saturation exceeded the clause cap of " +
                           std::to_string(limits.max_clauses));
    };

    for (const auto& c : input) admit(c.lits, -1, -1, c.side);

    // Ordered resolution between a positive premise (nothing selected,
    // resolved atom strictly maximal) and a negative premise (resolved
    // literal selected, or nothing selected and it is maximal).
    auto resolve_pair = [&](const Clause& cpos, const Clause& cneg_in) {
        std::vector<ClauseLit> cneg =
            detail::rename_lits(cneg_in.lits, "R" + std::to_string(++rename_counter) + "_");
        if (!detail::selected_literals(cpos.lits, cfg).empty()) return;
        std::vector<std::size_t> neg_sel = detail::selected_literals(cneg, cfg);
        for (std::size_t i = 0; i < cpos.lits.size(); ++i) {
            if (!cpos.lits[i].positive) continue;
            for (std::size_t j = 0; j < cneg.size(); ++j) {
                if (cneg[j].positive) continue;
                if (!neg_sel.empty() &&
                    std::find(neg_sel.begin(), neg_sel.end(), j) == neg_sel.end())
                    continue;
                auto tau = detail::unify_lits(cpos.lits[i], cneg[j]);
                if (!tau) continue;
                if (!detail::maximal_at(cpos.lits, i, *tau, cfg, /*strictly=*/true)) continue;
                if (neg_sel.empty() &&
                    !detail::maximal_at(cneg, j, *tau, cfg, /*strictly=*/false))
                    continue;
                std::vector<ClauseLit> lits;
                for (std::size_t k = 0; k < cpos.lits.size(); ++k)
                    if (k != i) lits.push_back(detail::apply_lit(cpos.lits[k], *tau));
                for (std::size_t k = 0; k < cneg.size(); ++k)
                    if (k != j) lits.push_back(detail::apply_lit(cneg[k], *tau));
                admit(std::move(lits), cpos.id, cneg_in.id, 2);
            }
        }
    };

    auto factor = [&](const Clause& c) {
        if (!detail::selected_literals(c.lits, cfg).empty()) return;
        for (std::size_t i = 0; i < c.lits.size(); ++i) {
            if (!c.lits[i].positive) continue;
            for (std::size_t j = 0; j < c.lits.size(); ++j) {
                if (j == i || !c.lits[j].positive) continue;
                auto tau = detail::unify_lits(c.lits[i], c.lits[j]);
                if (!tau) continue;
                if (!detail::maximal_at(c.lits, i, *tau, cfg, /*strictly=*/false)) continue;
                std::vector<ClauseLit> lits;
                for (std::size_t k = 0; k < c.lits.size(); ++k)
                    if (k != j) lits.push_back(detail::apply_lit(c.lits[k], *tau));
                admit(std::move(lits), c.id, -1, 2);
            }
        }
    };

    std::size_t steps = 0;
    while (!passive.empty()) {
        if (stop_on_empty && res.empty_clause) break;
        if (++steps > limits.max_iterations)
            throw LimitHit("saturation exceeded the iteration cap of " +
                           std::to_string(limits.max_iterations));
        auto it = passive.begin();
        int given_id = std::get<2>(*it);
        passive.erase(it);
        const Clause given = res.clauses[given_id];  // copy: res.clauses may grow

        bool redundant = false;
        for (int id : active)
            if (detail::subsumes(res.clauses[id].lits, given.lits)) {
                redundant = true;
                break;
            }
        if (redundant) continue;
        active.push_back(given_id);

        factor(given);
        std::vector<int> partners = active;  // includes the given clause itself
        for (int id : partners) {
            const Clause other = res.clauses[id];
            resolve_pair(given, other);
            if (id != given_id) resolve_pair(other, given);
        }
    }
    res.saturated = active;
    return res;
}

// ---------------------------------------------------------------------------
// Interpolation pipeline

enum class InterpolantKind { Falsum, Verum, Formula };

struct Interpolant {
    InterpolantKind kind = InterpolantKind::Formula;
    StandardFormSentence sentence;  // meaningful only when kind == Formula
    PolarityPartition partition;
    std::size_t left_clauses = 0, right_clauses = 0, core_clauses = 0;
    bool left_verified = false, right_verified = false;
};

namespace detail {

inline void require_bsr(const StandardFormSentence& s, const char* which) {
    Signature sig = signature_of(s);
    if (sig.has_equality)
        throw EqualityNotSupported(std::string(which) + ": equality is not supported");
    if (!sig.functions.empty() || !sig.constants.empty())
        throw NotBSR(std::string(which) + ": sentence must be relational");
    bool universal_seen = false;
    for (std::size_t k = 1; k <= s.n(); ++k) {
        if (!s.xbar(k).empty()) universal_seen = true;
        if (!s.ybar(k).empty() && universal_seen)
            throw NotBSR(std::string(which) + ": existential block after a universal block");
    }
}

// Simultaneously flips the sign of every literal over the given predicates
// (input in NNF).
inline FormulaPtr flip_preds(const FormulaPtr& f, const std::set<std::string>& preds) {
    switch (f->kind) {
        case FormulaKind::Atom:
            return preds.count(f->pred) ? Formula::negate(f) : f;
        case FormulaKind::Not: {
            const FormulaPtr& a = f->kids[0];
            if (a->kind == FormulaKind::Equality)
                throw EqualityNotSupported("equality atom: " + serialize(a));
            return preds.count(a->pred) ? a : f;
        }
        case FormulaKind::Equality:
            throw EqualityNotSupported("equality atom: " + serialize(f));
        case FormulaKind::And:
        case FormulaKind::Or: {
            std::vector<FormulaPtr> ks;
            ks.reserve(f->kids.size());
            for (const auto& k : f->kids) ks.push_back(flip_preds(k, preds));
            return f->kind == FormulaKind::And ? Formula::conj(std::move(ks))
                                               : Formula::disj(std::move(ks));
        }
        default:
            throw FoltError("flip_preds: expected a quantifier-free NNF matrix");
    }
}

inline ClauseLit literal_of(const FormulaPtr& f) {
    if (f->kind == FormulaKind::Not) {
        ClauseLit l = literal_of(f->kids[0]);
        l.positive = !l.positive;
        return l;
    }
    if (f->kind != FormulaKind::Atom)
        throw FoltError("clausify: expected a literal, got " + serialize(f));
    return ClauseLit{true, f->pred, f->args};
}

inline std::vector<Clause> clauses_of_cnf(const FormulaPtr& cnf, int side) {
    std::vector<FormulaPtr> conjuncts;
    if (cnf->kind == FormulaKind::And)
        conjuncts = cnf->kids;
    else
        conjuncts = {cnf};
    std::vector<Clause> out;
    for (const auto& c : conjuncts) {
        Clause cl;
        cl.side = side;
        if (c->kind == FormulaKind::Or)
            for (const auto& l : c->kids) cl.lits.push_back(literal_of(l));
        else
            cl.lits.push_back(literal_of(c));
        out.push_back(std::move(cl));
    }
    return out;
}

inline std::vector<std::string> fresh_symbols(const std::string& stem, std::size_t count,
                                              const std::set<std::string>& used) {
    std::vector<std::string> out;
    int n = 0;
    while (out.size() < count) {
        std::string cand = stem + std::to_string(++n);
        if (!used.count(cand)) out.push_back(cand);
    }
    return out;
}

inline std::set<std::string> all_symbol_names(const Signature& sig) {
    std::set<std::string> used;
    for (const auto& [p, a] : sig.predicates) used.insert(p);
    for (const auto& [f, a] : sig.functions) used.insert(f);
    used.insert(sig.constants.begin(), sig.constants.end());
    return used;
}

// Refutes a closed sentence with a plain configuration (empty precedence
// top group, no selection): Skolemize, clausify, saturate.
inline bool refutes(const FormulaPtr& closed, const SaturationLimits& limits) {
    SkolemSentence sk = skolemize(to_nnf(closed));
    FormulaPtr cnf = boolean_normal_form(to_nnf(sk.matrix), NormalFormMode::CNF);
    std::vector<Clause> cls = clauses_of_cnf(cnf, 0);
    OrderingConfig plain;
    SaturationResult r = saturate(cls, plain, limits, /*stop_on_empty=*/true);
    return r.empty_clause.has_value();
}

inline std::vector<std::string> concat_blocks(const std::vector<std::vector<std::string>>& bs) {
    std::vector<std::string> out;
    for (const auto& b : bs) out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Replaces constants per the map (Substitution::apply only touches variables).
inline Term constants_to_vars(const Term& t, const Substitution& sub) {
    if (t.kind == TermKind::Const) {
        auto r = sub.lookup(t.name);
        return r ? *r : t;
    }
    if (t.kind == TermKind::App) {
        std::vector<Term> args;
        args.reserve(t.args.size());
        for (const auto& a : t.args) args.push_back(constants_to_vars(a, sub));
        return Term::app(t.name, std::move(args));
    }
    return t;
}

}  // namespace detail

// Craig-Lyndon interpolation between relational BSR sentences without
// equality.  The entailment of the right sentence by the left one is not
// trusted: it is established by the refutation itself, and both interpolant
// legs are re-verified by separate saturation refutations.
inline Interpolant interpolate_bsr(const StandardFormSentence& phi,
                                   const StandardFormSentence& psi,
                                   const SaturationLimits& limits = {}) {
    detail::require_bsr(phi, "left input");
    detail::require_bsr(psi, "right input");

    FormulaPtr phi_m = to_nnf(phi.matrix);
    FormulaPtr psi_m = to_nnf(psi.matrix);
    Interpolant out;
    out.partition = polarity_partition(phi_m, psi_m);

    FormulaPtr phi_hat = detail::flip_preds(phi_m, out.partition.pi2);
    FormulaPtr psi_hat = detail::flip_preds(psi_m, out.partition.pi2);

    const std::vector<std::string> ys = detail::concat_blocks(phi.y_blocks);
    const std::vector<std::string> us = detail::concat_blocks(psi.x_blocks);
    const std::vector<std::string> vs = detail::concat_blocks(psi.y_blocks);

    Signature sig = signature_of(phi);
    sig.merge(signature_of(psi));
    std::set<std::string> used = detail::all_symbol_names(sig);
    std::vector<std::string> cs = detail::fresh_symbols("c", ys.size(), used);
    used.insert(cs.begin(), cs.end());
    std::vector<std::string> fs = detail::fresh_symbols("f", us.size(), used);

    // Left clause set: existentials become fresh constants.
    Substitution to_c;
    for (std::size_t i = 0; i < ys.size(); ++i) to_c.map.emplace(ys[i], Term::cst(cs[i]));
    FormulaPtr left_matrix = apply_substitution(phi_hat, to_c);
    std::vector<Clause> N =
        detail::clauses_of_cnf(boolean_normal_form(left_matrix, NormalFormMode::CNF), 0);

    // Right clause set: the negated sentence, universals become fresh
    // functions over the (now universal) outer variables.
    Substitution to_f;
    std::vector<Term> vargs;
    for (const auto& v : vs) vargs.push_back(Term::var(v));
    for (std::size_t i = 0; i < us.size(); ++i)
        to_f.map.emplace(us[i], vs.empty() ? Term::cst(fs[i]) : Term::app(fs[i], vargs));
    FormulaPtr right_matrix =
        apply_substitution(to_nnf(Formula::negate(psi_hat)), to_f);
    std::vector<Clause> M =
        detail::clauses_of_cnf(boolean_normal_form(right_matrix, NormalFormMode::CNF), 1);

    OrderingConfig cfg;
    cfg.top_predicates = out.partition.pi1;
    cfg.selected_predicates = out.partition.pi2;
    cfg.selected_predicates.insert(out.partition.pi3.begin(), out.partition.pi3.end());

    // Degenerate cases: an unsatisfiable left input or a valid right input.
    SaturationResult left_sat = saturate(N, cfg, limits, /*stop_on_empty=*/false);
    out.left_clauses = left_sat.saturated.size();
    if (left_sat.empty_clause) {
        out.kind = InterpolantKind::Falsum;
        return out;
    }
    SaturationResult right_sat = saturate(M, cfg, limits, /*stop_on_empty=*/false);
    out.right_clauses = right_sat.saturated.size();
    if (right_sat.empty_clause) {
        out.kind = InterpolantKind::Verum;
        return out;
    }

    // The entailment precondition is verified, not trusted.
    if (!detail::refutes(
            Formula::conj({phi.to_formula(), Formula::negate(psi.to_formula())}), limits))
        throw NotEntailed("left sentence does not entail the right sentence");

    // Joint refutation. Only the left clauses that can appear in an
    // interpolant core are admitted: resolution with right clauses never
    // involves an exclusive predicate, and a selected negative literal blocks
    // every cross inference, so such clauses are useless on the left side and
    // dropping them pins the extracted core to the admissible fragment.
    std::vector<Clause> joint;
    for (int id : left_sat.saturated) {
        Clause c = left_sat.clauses[id];
        bool admissible = true;
        for (const ClauseLit& l : c.lits)
            if (out.partition.pi1.count(l.pred) ||
                (!l.positive && cfg.selected_predicates.count(l.pred))) {
                admissible = false;
                break;
            }
        if (!admissible) continue;
        c.side = 0;
        joint.push_back(std::move(c));
    }
    for (int id : right_sat.saturated) {
        Clause c = right_sat.clauses[id];
        c.side = 1;
        joint.push_back(std::move(c));
    }
    SaturationResult refut = saturate(joint, cfg, limits, /*stop_on_empty=*/true);
    if (!refut.empty_clause)
        throw FoltError(
            "interpolation: restricted joint refutation failed despite verified entailment");

    // Left-side input clauses used in the refutation DAG.
    std::set<int> involved;
    std::vector<int> stack{*refut.empty_clause};
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        if (!involved.insert(id).second) continue;
        const Clause& c = refut.clauses[id];
        if (c.parent1 >= 0) stack.push_back(c.parent1);
        if (c.parent2 >= 0) stack.push_back(c.parent2);
    }
    std::vector<const Clause*> core;
    for (int id : involved) {
        const Clause& c = refut.clauses[id];
        if (c.parent1 < 0 && c.side == 0) core.push_back(&c);
    }
    if (core.empty()) throw FoltError("interpolation: refutation used no left-side clause");
    out.core_clauses = core.size();

    // The case analysis of the refutation as a runtime assertion.
    std::set<std::string> blocked = cfg.selected_predicates;
    for (const Clause* c : core)
        for (const ClauseLit& l : c->lits) {
            if (out.partition.pi1.count(l.pred))
                throw FoltError("interpolation: core clause carries an exclusive predicate: " +
                                l.pred);
            if (!l.positive && blocked.count(l.pred))
                throw FoltError("interpolation: core clause carries a blocked negative literal: " +
                                l.pred);
        }

    // De-Skolemize the constants back to the existential variables, flip the
    // polarity-adjusted predicates back, and quantify.
    Substitution from_c;
    for (std::size_t i = 0; i < ys.size(); ++i) from_c.map.emplace(cs[i], Term::var(ys[i]));
    int zc = 0;
    std::set<std::string> zvars;
    std::vector<FormulaPtr> conjuncts;
    for (const Clause* c : core) {
        Substitution ren;
        for (const auto& v : detail::clause_vars(c->lits)) {
            std::string z = "Z" + std::to_string(++zc);
            ren.map.emplace(v, Term::var(z));
            zvars.insert(z);
        }
        std::vector<FormulaPtr> lits;
        for (const ClauseLit& l : c->lits) {
            std::vector<Term> args;
            for (const auto& t : l.args) {
                Term rt = ren.apply(t);
                args.push_back(detail::constants_to_vars(rt, from_c));
            }
            bool positive = l.positive;
            if (out.partition.pi2.count(l.pred)) positive = !positive;
            FormulaPtr a = Formula::atom(l.pred, std::move(args));
            lits.push_back(positive ? a : Formula::negate(a));
        }
        conjuncts.push_back(Formula::disj(std::move(lits)));
    }
    FormulaPtr chi_matrix = Formula::conj(std::move(conjuncts));
    FormulaPtr chi = Formula::exists(
        ys, Formula::forall(std::vector<std::string>(zvars.begin(), zvars.end()), chi_matrix));
    out.kind = InterpolantKind::Formula;
    out.sentence = normalize_standard_form(chi);

    // Re-verify both legs and the polarity condition.
    FormulaPtr chi_f = out.sentence.to_formula();
    out.left_verified = detail::refutes(
        Formula::conj({phi.to_formula(), Formula::negate(chi_f)}), limits);
    out.right_verified = detail::refutes(
        Formula::conj({chi_f, Formula::negate(psi.to_formula())}), limits);
    if (!out.left_verified || !out.right_verified)
        throw FoltError("interpolation: an interpolant leg failed re-verification");

    std::set<std::string> pos_c, neg_c, pos_l, neg_l, pos_r, neg_r;
    detail::collect_polarities(to_nnf(chi_f), false, pos_c, neg_c);
    detail::collect_polarities(phi_m, false, pos_l, neg_l);
    detail::collect_polarities(psi_m, false, pos_r, neg_r);
    for (const auto& p : pos_c)
        if (!pos_l.count(p) || !pos_r.count(p))
            throw FoltError("interpolation: polarity condition violated for " + p);
    for (const auto& p : neg_c)
        if (!neg_l.count(p) || !neg_r.count(p))
            throw FoltError("interpolation: polarity condition violated for " + p);
    return out;
}

// GBSR entry point: both sentences are translated to equivalent BSR
// sentences first, then interpolated.
inline Interpolant interpolate_gbsr(const StandardFormSentence& phi,
                                    const StandardFormSentence& psi,
                                    const SaturationLimits& limits = {}) {
    GbsrAnalysis ga = analyze_gbsr(phi);
    if (!ga.is_gbsr) throw NotGBSR("left input is not GBSR");
    GbsrAnalysis gb = analyze_gbsr(psi);
    if (!gb.is_gbsr) throw NotGBSR("right input is not GBSR");
    return interpolate_bsr(gbsr_to_bsr(phi, ga), gbsr_to_bsr(psi, gb), limits);
}

}  // namespace folt

#endif  // FOLT_INTERPOLATE_HPP
