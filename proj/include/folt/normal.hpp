#ifndef FOLT_NORMAL_HPP
#define FOLT_NORMAL_HPP

// Standard-form normalization, capture-avoiding substitution, miniscoping,
// Boolean normal forms over frozen units, and prenexing.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "folt/ast.hpp"

namespace folt {

// ---------------------------------------------------------------------------
// Fresh names: V1, V2, ... with a per-sentence counter, skipping names that
// are already in use, so outputs are deterministic and re-parse as variables.

class FreshNamer {
public:
    FreshNamer() = default;
    explicit FreshNamer(std::set<std::string> used) : used_(std::move(used)) {}

    void reserve(const std::string& name) { used_.insert(name); }
    void reserve_all_in(const Formula& f) {
        switch (f.kind) {
            case FormulaKind::Atom:
            case FormulaKind::Equality:
                for (const auto& t : f.args) {
                    auto vs = term_vars(t);
                    used_.insert(vs.begin(), vs.end());
                }
                break;
            case FormulaKind::Forall:
            case FormulaKind::Exists:
                used_.insert(f.vars.begin(), f.vars.end());
                [[fallthrough]];
            default:
                for (const auto& k : f.kids) reserve_all_in(*k);
        }
    }
    std::string fresh() {
        for (;;) {
            std::string cand = "V" + std::to_string(++counter_);
            if (used_.insert(cand).second) return cand;
        }
    }

private:
    std::set<std::string> used_;
    int counter_ = 0;
};

// ---------------------------------------------------------------------------
// Negation normal form

inline FormulaPtr to_nnf(const FormulaPtr& f, bool negated = false) {
    switch (f->kind) {
        case FormulaKind::Atom:
        case FormulaKind::Equality:
            return negated ? Formula::negate(f) : f;
        case FormulaKind::Not:
            return to_nnf(f->kids[0], !negated);
        case FormulaKind::And:
        case FormulaKind::Or: {
            std::vector<FormulaPtr> ks;
            ks.reserve(f->kids.size());
            for (const auto& k : f->kids) ks.push_back(to_nnf(k, negated));
            FormulaKind k = f->kind;
            if (negated) k = (k == FormulaKind::And) ? FormulaKind::Or : FormulaKind::And;
            return Formula::nary(k, std::move(ks));
        }
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            FormulaKind k = f->kind;
            if (negated) k = (k == FormulaKind::Forall) ? FormulaKind::Exists : FormulaKind::Forall;
            return Formula::quant(k, f->vars, to_nnf(f->kids[0], negated));
        }
        case FormulaKind::Frozen:
            if (negated) throw FoltError("cannot negate a frozen unit");
            return Formula::frozen(f->unit_id, to_nnf(f->kids[0], false));
    }
    return f;  // unreachable
}

// ---------------------------------------------------------------------------
// Substitution and renaming

namespace detail {

inline FormulaPtr substitute(const FormulaPtr& f, const Substitution& s, FreshNamer& namer) {
    switch (f->kind) {
        case FormulaKind::Atom: {
            std::vector<Term> as;
            as.reserve(f->args.size());
            for (const auto& t : f->args) as.push_back(s.apply(t));
            return Formula::atom(f->pred, std::move(as));
        }
        case FormulaKind::Equality:
            return Formula::equality(s.apply(f->args[0]), s.apply(f->args[1]));
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            // Restrict the substitution to variables still free here and
            // rename bound variables that would capture range variables.
            std::set<std::string> body_free = free_vars(*f->kids[0]);
            Substitution inner;
            std::set<std::string> range_vars;
            for (const auto& [v, t] : s.map) {
                bool shadowed = std::find(f->vars.begin(), f->vars.end(), v) != f->vars.end();
                if (!shadowed && body_free.count(v)) {
                    inner.map.emplace(v, t);
                    term_vars_into(t, range_vars);
                }
            }
            std::vector<std::string> new_vars;
            new_vars.reserve(f->vars.size());
            for (const auto& v : f->vars) {
                if (range_vars.count(v)) {
                    std::string nv = namer.fresh();
                    inner.map[v] = Term::var(nv);
                    new_vars.push_back(nv);
                } else {
                    new_vars.push_back(v);
                }
            }
            if (inner.empty()) return f;
            return Formula::quant(f->kind, std::move(new_vars),
                                  substitute(f->kids[0], inner, namer));
        }
        default: {
            std::vector<FormulaPtr> ks;
            ks.reserve(f->kids.size());
            for (const auto& k : f->kids) ks.push_back(substitute(k, s, namer));
            if (f->kind == FormulaKind::Not) return Formula::negate(ks[0]);
            if (f->kind == FormulaKind::Frozen) return Formula::frozen(f->unit_id, ks[0]);
            return Formula::nary(f->kind, std::move(ks));
        }
    }
}

}  // namespace detail

inline FormulaPtr apply_substitution(const FormulaPtr& f, const Substitution& s) {
    FreshNamer namer;
    namer.reserve_all_in(*f);
    for (const auto& [v, t] : s.map) {
        namer.reserve(v);
        for (const auto& u : term_vars(t)) namer.reserve(u);
    }
    return detail::substitute(f, s, namer);
}

// Rename bound variables apart: a binder keeps its name when no earlier
// binder (in left-to-right order) used it, otherwise it receives the next
// fresh name from the namer.
namespace detail {

inline FormulaPtr rename_apart(const FormulaPtr& f, std::map<std::string, std::string>& env,
                               std::set<std::string>& seen, FreshNamer& namer) {
    switch (f->kind) {
        case FormulaKind::Atom:
        case FormulaKind::Equality: {
            Substitution s;
            for (const auto& [from, to] : env)
                if (from != to) s.map.emplace(from, Term::var(to));
            std::vector<Term> as;
            as.reserve(f->args.size());
            for (const auto& t : f->args) as.push_back(s.apply(t));
            if (f->kind == FormulaKind::Atom) return Formula::atom(f->pred, std::move(as));
            return Formula::equality(as[0], as[1]);
        }
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            std::vector<std::string> new_vars;
            std::vector<std::pair<std::string, std::optional<std::string>>> saved;
            for (const auto& v : f->vars) {
                std::string nv = seen.insert(v).second ? v : namer.fresh();
                new_vars.push_back(nv);
                auto it = env.find(v);
                saved.emplace_back(v, it == env.end() ? std::nullopt
                                                      : std::optional<std::string>(it->second));
                env[v] = nv;
            }
            FormulaPtr body = rename_apart(f->kids[0], env, seen, namer);
            for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
                if (it->second) env[it->first] = *it->second;
                else env.erase(it->first);
            }
            return Formula::quant(f->kind, std::move(new_vars), std::move(body));
        }
        default: {
            std::vector<FormulaPtr> ks;
            ks.reserve(f->kids.size());
            for (const auto& k : f->kids) ks.push_back(rename_apart(k, env, seen, namer));
            if (f->kind == FormulaKind::Not) return Formula::negate(ks[0]);
            if (f->kind == FormulaKind::Frozen) return Formula::frozen(f->unit_id, ks[0]);
            return Formula::nary(f->kind, std::move(ks));
        }
    }
}

}  // namespace detail

inline FormulaPtr rename_apart(const FormulaPtr& f, FreshNamer& namer) {
    std::map<std::string, std::string> env;
    std::set<std::string> seen = free_vars(*f);
    return detail::rename_apart(f, env, seen, namer);
}

// ---------------------------------------------------------------------------
// Prenexing and standard form

namespace detail {

struct PrefixEntry {
    bool is_forall;
    std::string var;
};

// Order-preserving quantifier extraction (input renamed apart, NNF).
inline FormulaPtr collect_prefix(const FormulaPtr& f, std::vector<PrefixEntry>& prefix) {
    switch (f->kind) {
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            for (const auto& v : f->vars)
                prefix.push_back({f->kind == FormulaKind::Forall, v});
            return collect_prefix(f->kids[0], prefix);
        }
        case FormulaKind::And:
        case FormulaKind::Or: {
            std::vector<FormulaPtr> ms;
            ms.reserve(f->kids.size());
            for (const auto& k : f->kids) ms.push_back(collect_prefix(k, prefix));
            return Formula::nary(f->kind, std::move(ms));
        }
        default:
            return f;
    }
}

// Existentials-first extraction: when merging the prefixes of sibling
// subformulas (which bind disjoint variables), leading existential segments
// are pulled out before universal ones, round by round.  Each subformula's
// internal quantifier order is preserved.
inline FormulaPtr collect_prefix_exists_first(const FormulaPtr& f,
                                              std::vector<PrefixEntry>& prefix) {
    switch (f->kind) {
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            std::vector<PrefixEntry> own;
            for (const auto& v : f->vars)
                own.push_back({f->kind == FormulaKind::Forall, v});
            FormulaPtr m = collect_prefix_exists_first(f->kids[0], own);
            prefix.insert(prefix.end(), own.begin(), own.end());
            return m;
        }
        case FormulaKind::And:
        case FormulaKind::Or: {
            std::vector<std::vector<PrefixEntry>> chains(f->kids.size());
            std::vector<FormulaPtr> ms;
            ms.reserve(f->kids.size());
            for (std::size_t i = 0; i < f->kids.size(); ++i)
                ms.push_back(collect_prefix_exists_first(f->kids[i], chains[i]));
            std::vector<std::size_t> pos(chains.size(), 0);
            bool remaining = true;
            while (remaining) {
                remaining = false;
                for (bool want_forall : {false, true}) {
                    for (std::size_t i = 0; i < chains.size(); ++i) {
                        while (pos[i] < chains[i].size() &&
                               chains[i][pos[i]].is_forall == want_forall)
                            prefix.push_back(chains[i][pos[i]++]);
                        if (pos[i] < chains[i].size()) remaining = true;
                    }
                }
            }
            return Formula::nary(f->kind, std::move(ms));
        }
        default:
            return f;
    }
}

inline StandardFormSentence assemble_blocks(const std::vector<PrefixEntry>& prefix,
                                            FormulaPtr matrix) {
    StandardFormSentence s;
    s.matrix = std::move(matrix);
    std::set<std::string> occurring = free_vars(*s.matrix);
    bool in_forall = true;
    std::vector<std::string> cur_x, cur_y;
    auto flush = [&] {
        if (cur_x.empty() && cur_y.empty() && !s.x_blocks.empty()) return;
        s.x_blocks.push_back(cur_x);
        s.y_blocks.push_back(cur_y);
        cur_x.clear();
        cur_y.clear();
    };
    bool any = false;
    for (const auto& e : prefix) {
        if (!occurring.count(e.var)) continue;  // drop vacuous binders
        any = true;
        if (e.is_forall) {
            if (!in_forall) {
                s.x_blocks.push_back(cur_x);
                s.y_blocks.push_back(cur_y);
                cur_x.clear();
                cur_y.clear();
                in_forall = true;
            }
            cur_x.push_back(e.var);
        } else {
            in_forall = false;
            cur_y.push_back(e.var);
        }
    }
    if (any) flush();
    return s;
}

}  // namespace detail

// normalize_standard_form: NNF + deterministic renaming apart + order-
// preserving prenexing into alternating blocks.
inline StandardFormSentence normalize_standard_form(const FormulaPtr& sentence) {
    auto fv = free_vars(*sentence);
    if (!fv.empty()) throw FreeVariableError(*fv.begin());
    FreshNamer namer;
    namer.reserve_all_in(*sentence);
    FormulaPtr f = rename_apart(to_nnf(sentence), namer);
    std::vector<detail::PrefixEntry> prefix;
    FormulaPtr matrix = detail::collect_prefix(f, prefix);
    return detail::assemble_blocks(prefix, std::move(matrix));
}

// prenex: existentials-first pull-out, used as the final step of the
// fragment transformations so BSR-shaped nesting yields an exists*-forall*
// prefix.
inline StandardFormSentence prenex(const FormulaPtr& f) {
    auto fv = free_vars(*f);
    if (!fv.empty()) throw FreeVariableError(*fv.begin());
    FreshNamer namer;
    namer.reserve_all_in(*f);
    FormulaPtr renamed = rename_apart(f, namer);
    std::vector<detail::PrefixEntry> prefix;
    FormulaPtr matrix = detail::collect_prefix_exists_first(renamed, prefix);
    return detail::assemble_blocks(prefix, std::move(matrix));
}

// ---------------------------------------------------------------------------
// Miniscoping: distribute/split quantifiers per the four equivalences
//   (i)  exists y.(phi | psi)  =  (exists y. phi) | (exists y. psi)
//   (ii) forall x.(phi & psi)  =  (forall x. phi) & (forall x. psi)
//   (iii) exists y.(phi & chi) =  (exists y. phi) & chi     (y not free in chi)
//   (iv) forall x.(phi | chi)  =  (forall x. phi) | chi     (x not free in chi)
// applied to a fixpoint; vacuous quantifiers are dropped.

namespace detail {

inline FormulaPtr miniscope_rec(const FormulaPtr& f, FreshNamer& namer);

inline FormulaPtr miniscope_quant(FormulaKind kind, const std::string& v, FormulaPtr body,
                                  FreshNamer& namer) {
    body = miniscope_rec(body, namer);
    if (!free_vars(*body).count(v)) return body;  // vacuous
    bool is_forall = kind == FormulaKind::Forall;
    FormulaKind dist = is_forall ? FormulaKind::And : FormulaKind::Or;   // rules (i)/(ii)
    FormulaKind split = is_forall ? FormulaKind::Or : FormulaKind::And;  // rules (iii)/(iv)
    if (body->kind == dist) {
        std::vector<FormulaPtr> parts;
        bool first = true;
        for (const auto& k : body->kids) {
            if (!free_vars(*k).count(v)) {
                parts.push_back(k);
                continue;
            }
            std::string nv = first ? v : namer.fresh();
            first = false;
            FormulaPtr kk = k;
            if (nv != v) {
                Substitution s;
                s.map.emplace(v, Term::var(nv));
                kk = detail::substitute(k, s, namer);
            }
            parts.push_back(miniscope_quant(kind, nv, kk, namer));
        }
        return Formula::nary(dist, std::move(parts));
    }
    if (body->kind == split) {
        std::vector<FormulaPtr> with_v, without_v;
        for (const auto& k : body->kids)
            (free_vars(*k).count(v) ? with_v : without_v).push_back(k);
        if (!without_v.empty()) {
            FormulaPtr inner = Formula::nary(split, std::move(with_v));
            without_v.push_back(miniscope_quant(kind, v, inner, namer));
            return Formula::nary(split, std::move(without_v));
        }
    }
    return Formula::quant(kind, {v}, body);
}

inline FormulaPtr miniscope_rec(const FormulaPtr& f, FreshNamer& namer) {
    switch (f->kind) {
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            // process a block as nested single quantifiers, innermost first
            FormulaPtr cur = f->kids[0];
            for (std::size_t i = f->vars.size(); i-- > 0;)
                cur = miniscope_quant(f->kind, f->vars[i], cur, namer);
            return cur;
        }
        case FormulaKind::And:
        case FormulaKind::Or: {
            std::vector<FormulaPtr> ks;
            ks.reserve(f->kids.size());
            for (const auto& k : f->kids) ks.push_back(miniscope_rec(k, namer));
            return Formula::nary(f->kind, std::move(ks));
        }
        default:
            return f;
    }
}

}  // namespace detail

inline FormulaPtr miniscope(const FormulaPtr& f) {
    FreshNamer namer;
    namer.reserve_all_in(*f);
    FormulaPtr cur = f;
    for (;;) {  // leftmost-outermost to a fixpoint
        FormulaPtr next = detail::miniscope_rec(cur, namer);
        if (formula_equal(next, cur)) return next;
        cur = next;
    }
}

// ---------------------------------------------------------------------------
// Boolean normal forms over literals and frozen units

enum class NormalFormMode { DNF, CNF };

namespace detail {

// Clauses are sorted unit lists; duplicate units and duplicate clauses are
// removed.
using NfClause = std::vector<FormulaPtr>;

inline void push_unit(NfClause& clause, const FormulaPtr& u) {
    for (const auto& e : clause)
        if (formula_equal(e, u)) return;
    clause.push_back(u);
}

inline std::vector<NfClause> nf_clauses(const FormulaPtr& f, NormalFormMode mode,
                                        std::size_t guard) {
    if (is_nf_unit(*f)) return {{f}};
    FormulaKind outer = mode == NormalFormMode::DNF ? FormulaKind::Or : FormulaKind::And;
    if (f->kind == outer) {
        std::vector<NfClause> out;
        for (const auto& k : f->kids) {
            auto sub = nf_clauses(k, mode, guard);
            out.insert(out.end(), sub.begin(), sub.end());
            if (out.size() > guard) throw SizeGuardExceeded(guard);
        }
        return out;
    }
    if (f->kind == (mode == NormalFormMode::DNF ? FormulaKind::And : FormulaKind::Or)) {
        std::vector<NfClause> acc{{}};
        for (const auto& k : f->kids) {
            auto sub = nf_clauses(k, mode, guard);
            if (acc.size() * sub.size() > guard) throw SizeGuardExceeded(guard);
            std::vector<NfClause> next;
            next.reserve(acc.size() * sub.size());
            for (const auto& a : acc)
                for (const auto& b : sub) {
                    NfClause c = a;
                    for (const auto& u : b) push_unit(c, u);
                    next.push_back(std::move(c));
                }
            acc = std::move(next);
        }
        return acc;
    }
    throw FoltError("boolean_normal_form: input not quantifier-free-modulo-frozen NNF");
}

inline void dedupe_clauses(std::vector<NfClause>& clauses) {
    auto clause_less = [](const NfClause& a, const NfClause& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        for (std::size_t i = 0; i < a.size(); ++i)
            if (int c = formula_cmp(*a[i], *b[i])) return c < 0;
        return false;
    };
    for (auto& c : clauses)
        std::sort(c.begin(), c.end(),
                  [](const FormulaPtr& a, const FormulaPtr& b) { return formula_cmp(*a, *b) < 0; });
    std::sort(clauses.begin(), clauses.end(), clause_less);
    clauses.erase(std::unique(clauses.begin(), clauses.end(),
                              [](const NfClause& a, const NfClause& b) {
                                  if (a.size() != b.size()) return false;
                                  for (std::size_t i = 0; i < a.size(); ++i)
                                      if (formula_cmp(*a[i], *b[i])) return false;
                                  return true;
                              }),
                  clauses.end());
}

// Removes clauses containing a complementary literal pair: contradictory
// conjuncts in DNF, tautological disjuncts in CNF.  When every clause is
// degenerate, one representative is kept so the result stays a formula
// (there is no dedicated truth-constant node).
inline void drop_degenerate_clauses(std::vector<NfClause>& clauses) {
    auto degenerate = [](const NfClause& c) {
        for (const auto& u : c) {
            if (u->kind != FormulaKind::Not) continue;
            for (const auto& v : c)
                if (formula_equal(v, u->kids[0])) return true;
        }
        return false;
    };
    std::vector<NfClause> kept;
    for (auto& c : clauses)
        if (!degenerate(c)) kept.push_back(std::move(c));
    if (kept.empty() && !clauses.empty()) kept.push_back(std::move(clauses.front()));
    clauses = std::move(kept);
}

// Absorption: a clause whose unit set contains another clause's unit set is
// redundant (A | (A & B) == A in DNF, dually in CNF).  Expects sorted,
// deduplicated clauses ordered by ascending size.
inline void absorb_clauses(std::vector<NfClause>& clauses) {
    auto unit_less = [](const FormulaPtr& a, const FormulaPtr& b) {
        return formula_cmp(*a, *b) < 0;
    };
    std::vector<NfClause> kept;
    for (auto& c : clauses) {
        bool subsumed = false;
        for (const auto& k : kept)
            if (std::includes(c.begin(), c.end(), k.begin(), k.end(), unit_less)) {
                subsumed = true;
                break;
            }
        if (!subsumed) kept.push_back(std::move(c));
    }
    clauses = std::move(kept);
}

}  // namespace detail

constexpr std::size_t kDefaultSizeGuard = 1000000;

inline FormulaPtr boolean_normal_form(const FormulaPtr& matrix, NormalFormMode mode,
                                      std::size_t guard = kDefaultSizeGuard) {
    auto clauses = detail::nf_clauses(matrix, mode, guard);
    detail::drop_degenerate_clauses(clauses);
    detail::dedupe_clauses(clauses);
    detail::absorb_clauses(clauses);
    FormulaKind inner = mode == NormalFormMode::DNF ? FormulaKind::And : FormulaKind::Or;
    FormulaKind outer = mode == NormalFormMode::DNF ? FormulaKind::Or : FormulaKind::And;
    std::vector<FormulaPtr> parts;
    parts.reserve(clauses.size());
    for (auto& c : clauses) parts.push_back(Formula::nary(inner, std::move(c)));
    return Formula::nary(outer, std::move(parts));
}

// ---------------------------------------------------------------------------
// Frozen-unit removal (after transformations, before prenexing)

inline FormulaPtr unfreeze(const FormulaPtr& f) {
    switch (f->kind) {
        case FormulaKind::Frozen:
            return unfreeze(f->kids[0]);
        case FormulaKind::Atom:
        case FormulaKind::Equality:
            return f;
        case FormulaKind::Not:
            return Formula::negate(unfreeze(f->kids[0]));
        case FormulaKind::Forall:
        case FormulaKind::Exists:
            return Formula::quant(f->kind, f->vars, unfreeze(f->kids[0]));
        default: {
            std::vector<FormulaPtr> ks;
            ks.reserve(f->kids.size());
            for (const auto& k : f->kids) ks.push_back(unfreeze(k));
            return Formula::nary(f->kind, std::move(ks));
        }
    }
}

}  // namespace folt

#endif  // FOLT_NORMAL_HPP
