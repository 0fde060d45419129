#ifndef FOLT_SHRINK_HPP
#define FOLT_SHRINK_HPP

// Small-model machinery for GBSR sentences: satisfying strategies (the
// semantic counterpart of Skolem functions), outcome sets and the Boolean
// abstraction, fingerprint functions, uniformization of strategies, and
// bounded-size substructure extraction.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "folt/ast.hpp"
#include "folt/classify.hpp"
#include "folt/parse.hpp"
#include "folt/structure.hpp"
#include "folt/to_bsr.hpp"

namespace folt {

struct NotRelational : FoltError {
    using FoltError::FoltError;
};

struct NotAModel : FoltError {
    using FoltError::FoltError;
};

// Raised when the uniformization lookup finds no representative for a
// fingerprint signature; by the construction's central claim this cannot
// happen, so it is an internal assertion failure.
struct RepresentativeMissing : FoltError {
    using FoltError::FoltError;
};

// The shrinking pipeline is doubly exponential and worse; these defaults
// keep it at desk scale unless the caller raises them explicitly.
struct ShrinkLimits {
    std::size_t max_blocks = 3;    // quantifier block pairs n
    std::size_t max_universe = 6;  // |universe of A|
    std::size_t max_atoms = 8;     // distinct atoms
};

namespace detail {

// Odometer step over {0..size-1}^|t|; false once all tuples were visited.
inline bool next_tuple(std::vector<int>& t, int size) {
    std::size_t i = t.size();
    while (i > 0) {
        if (++t[i - 1] < size) return true;
        t[i - 1] = 0;
        --i;
    }
    return false;
}

inline void assign_block(Assignment& beta, const std::vector<std::string>& vars,
                         const std::vector<int>& flat, std::size_t offset) {
    for (std::size_t i = 0; i < vars.size(); ++i) beta[vars[i]] = flat[offset + i];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Strategies

// Per-block choice tables: tables[k-1] maps the concatenated universal
// tuples (b1..bk) to the chosen tuple for the k-th existential block.
struct Strategy {
    std::vector<std::size_t> xw, yw;  // universal/existential block widths
    std::vector<std::map<std::vector<int>, std::vector<int>>> tables;

    std::size_t n() const { return tables.size(); }
    // key = concatenation of b1..bk
    const std::vector<int>& choose(std::size_t k, const std::vector<int>& key) const {
        return tables.at(k - 1).at(key);
    }
};

namespace detail {

inline void require_relational(const StandardFormSentence& s) {
    Signature sig = signature_of(s);
    if (!sig.functions.empty())
        throw NotRelational("sentence contains function symbols");
    if (!sig.constants.empty())
        throw NotRelational("sentence contains constant symbols");
}

}  // namespace detail

// Game search over the quantifier tree: returns a strategy whose choices
// make the matrix true under every universal play, or nullopt if none
// exists (equivalently, A is no model of s).
inline std::optional<Strategy> find_strategy(const FiniteStructure& A,
                                             const StandardFormSentence& s) {
    detail::require_relational(s);
    const std::size_t n = s.n();
    Strategy st;
    st.tables.resize(n);
    for (std::size_t k = 1; k <= n; ++k) {
        st.xw.push_back(s.xbar(k).size());
        st.yw.push_back(s.ybar(k).size());
    }

    Assignment beta;
    std::vector<int> key;
    std::function<bool(std::size_t)> solve = [&](std::size_t k) -> bool {
        if (k > n) return evaluate(A, beta, *s.matrix);
        std::vector<int> b(st.xw[k - 1], 0);
        do {
            detail::assign_block(beta, s.xbar(k), b, 0);
            std::size_t mark = key.size();
            key.insert(key.end(), b.begin(), b.end());
            bool ok = false;
            std::vector<int> c(st.yw[k - 1], 0);
            do {
                detail::assign_block(beta, s.ybar(k), c, 0);
                if (solve(k + 1)) {
                    st.tables[k - 1][key] = c;
                    ok = true;
                    break;
                }
            } while (detail::next_tuple(c, A.size));
            key.resize(mark);
            if (!ok) return false;
        } while (detail::next_tuple(b, A.size));
        return true;
    };
    if (!solve(1)) return std::nullopt;
    return st;
}

// ---------------------------------------------------------------------------
// Outcomes and the Boolean abstraction

struct OutcomeSet {
    std::vector<FormulaPtr> atoms;     // distinct atoms in canonical order
    std::set<std::set<int>> outcomes;  // atom-index subsets, one per play
    bool all_satisfy_bool = true;      // every outcome models the abstraction

    // The slice of an outcome along one class of an atom-index partition.
    static std::set<int> slice(const std::set<int>& S, const std::set<int>& at_l) {
        std::set<int> out;
        for (int i : S)
            if (at_l.count(i)) out.insert(i);
        return out;
    }
};

// Evaluates the matrix as a propositional formula under the valuation
// "atom true iff its index is in S".
inline bool bool_abstraction_holds(const FormulaPtr& f, const std::set<int>& S,
                                   const std::vector<FormulaPtr>& atoms) {
    switch (f->kind) {
        case FormulaKind::Atom:
        case FormulaKind::Equality:
            return S.count(detail::atom_index(atoms, f)) > 0;
        case FormulaKind::Not:
            return !bool_abstraction_holds(f->kids[0], S, atoms);
        case FormulaKind::And:
            for (const auto& k : f->kids)
                if (!bool_abstraction_holds(k, S, atoms)) return false;
            return true;
        case FormulaKind::Or:
            for (const auto& k : f->kids)
                if (bool_abstraction_holds(k, S, atoms)) return true;
            return false;
        default:
            throw FoltError("bool_abstraction_holds: matrix must be quantifier-free");
    }
}

// Enumerates every universal play, applies the strategy, and records which
// atoms hold.  The strategy is satisfying exactly when every outcome models
// the Boolean abstraction of the matrix.
inline OutcomeSet outcomes(const FiniteStructure& A, const StandardFormSentence& s,
                           const Strategy& st) {
    OutcomeSet out;
    {
        std::vector<Literal> lits;
        detail::collect_literal_occurrences(s.matrix, lits);
        out.atoms = detail::distinct_atoms(lits);
    }
    const std::size_t n = s.n();
    std::size_t total = 0;
    for (std::size_t k = 0; k < n; ++k) total += st.xw[k];

    std::vector<int> flat(total, 0);
    do {
        Assignment beta;
        std::size_t off = 0;
        for (std::size_t k = 1; k <= n; ++k) {
            detail::assign_block(beta, s.xbar(k), flat, off);
            off += st.xw[k - 1];
            std::vector<int> key(flat.begin(), flat.begin() + static_cast<long>(off));
            detail::assign_block(beta, s.ybar(k), st.choose(k, key), 0);
        }
        std::set<int> S;
        for (std::size_t i = 0; i < out.atoms.size(); ++i)
            if (evaluate(A, beta, *out.atoms[i])) S.insert(static_cast<int>(i));
        if (!bool_abstraction_holds(s.matrix, S, out.atoms)) out.all_satisfy_bool = false;
        out.outcomes.insert(std::move(S));
    } while (detail::next_tuple(flat, A.size));
    return out;
}

// ---------------------------------------------------------------------------
// Fingerprints

// Memoized fingerprint functions over a fixed structure, sentence, atom
// partition, and strategy.  A fingerprint is a nested set (of sets ... ) of
// atoms from one partition class; every value is stored in a canonical
// sorted string encoding, so equality of fingerprints is string equality.
struct FingerprintTable {
    std::size_t n = 0;
    std::vector<std::size_t> xw, yw;
    // mu[l][k] for 0 <= l < k <= n: concatenated argument tuple
    // (y-tuples 1..l, then x-tuples l+1..k) -> canonical fingerprint.
    std::vector<std::vector<std::map<std::vector<int>, std::string>>> mu;
    // im[l][k]: image of mu_{l,k} under the strategy.
    std::vector<std::vector<std::set<std::string>>> im;

    const std::string& value(std::size_t l, std::size_t k, const std::vector<int>& args) const {
        return mu.at(l).at(k).at(args);
    }
};

namespace detail {

inline std::string encode_set(std::set<std::string> members) {
    std::string out = "{";
    bool first = true;
    for (const auto& m : members) {
        if (!first) out += ",";
        out += m;
        first = false;
    }
    return out + "}";
}

}  // namespace detail

// Builds the full fingerprint table: the innermost level by direct atom
// evaluation, outer levels by the existential-image recursion, and the
// strategy images by composing the strategy into the argument positions.
inline FingerprintTable fingerprints(const FiniteStructure& A, const StandardFormSentence& s,
                                     const std::vector<std::vector<FormulaPtr>>& partition,
                                     const Strategy& st) {
    if (!gbsr_axiomatic_witness(s, partition))
        throw InvalidPartition("fingerprints: partition violates the axiomatic conditions");
    const std::size_t n = s.n();
    FingerprintTable ft;
    ft.n = n;
    ft.xw = st.xw;
    ft.yw = st.yw;
    ft.mu.assign(n, std::vector<std::map<std::vector<int>, std::string>>(n + 1));
    ft.im.assign(n, std::vector<std::set<std::string>>(n + 1));

    for (std::size_t l = 0; l < n; ++l) {
        // Innermost level: which class-l atoms hold under the argument tuple.
        std::size_t width = 0;
        for (std::size_t i = 1; i <= l; ++i) width += ft.yw[i - 1];
        for (std::size_t i = l + 1; i <= n; ++i) width += ft.xw[i - 1];
        std::vector<int> args(width, 0);
        do {
            Assignment beta;
            std::size_t off = 0;
            for (std::size_t i = 1; i <= l; ++i) {
                detail::assign_block(beta, s.ybar(i), args, off);
                off += ft.yw[i - 1];
            }
            for (std::size_t i = l + 1; i <= n; ++i) {
                detail::assign_block(beta, s.xbar(i), args, off);
                off += ft.xw[i - 1];
            }
            std::set<std::string> holds;
            for (const auto& atom : partition[l])
                if (evaluate(A, beta, *atom)) holds.insert(serialize(atom));
            ft.mu[l][n][args] = detail::encode_set(std::move(holds));
        } while (detail::next_tuple(args, A.size));

        // Outer levels: collect the images over the next universal block.
        for (std::size_t k = n; k-- > l + 1;) {
            std::size_t wk = 0;
            for (std::size_t i = 1; i <= l; ++i) wk += ft.yw[i - 1];
            for (std::size_t i = l + 1; i <= k; ++i) wk += ft.xw[i - 1];
            std::vector<int> head(wk, 0);
            do {
                std::set<std::string> members;
                std::vector<int> ext = head;
                ext.resize(wk + ft.xw[k], 0);
                std::vector<int> tail(ft.xw[k], 0);
                do {
                    for (std::size_t i = 0; i < tail.size(); ++i) ext[wk + i] = tail[i];
                    members.insert(ft.mu[l][k + 1].at(ext));
                } while (detail::next_tuple(tail, A.size));
                ft.mu[l][k][head] = detail::encode_set(std::move(members));
            } while (detail::next_tuple(head, A.size));
        }

        // Strategy images.
        for (std::size_t k = l + 1; k <= n; ++k) {
            std::size_t total = 0;
            for (std::size_t i = 1; i <= k; ++i) total += ft.xw[i - 1];
            std::vector<int> flat(total, 0);
            do {
                std::vector<int> args2;
                std::size_t off = 0;
                for (std::size_t i = 1; i <= l; ++i) {
                    off += ft.xw[i - 1];
                    std::vector<int> key(flat.begin(), flat.begin() + static_cast<long>(off));
                    const std::vector<int>& y = st.choose(i, key);
                    args2.insert(args2.end(), y.begin(), y.end());
                }
                std::size_t skip = 0;
                for (std::size_t i = 1; i <= l; ++i) skip += ft.xw[i - 1];
                args2.insert(args2.end(), flat.begin() + static_cast<long>(skip), flat.end());
                ft.im[l][k].insert(ft.mu[l][k].at(args2));
            } while (detail::next_tuple(flat, A.size));
        }
    }
    return ft;
}

// ---------------------------------------------------------------------------
// Uniform strategies

namespace detail {

// Full fingerprint signature of a universal play prefix (b1..bk) under a
// strategy: all mu_{i,k'} values for 1 <= k' <= k, 0 <= i < k', with the
// strategy's own choices composed into the existential argument positions.
// Two prefixes with equal signatures must receive equal choices for the
// strategy to be uniform.
inline std::vector<std::string> play_signature(const StandardFormSentence& s,
                                               const FingerprintTable& ft, const Strategy& st,
                                               const std::vector<int>& flat, std::size_t k) {
    std::vector<std::string> sig;
    for (std::size_t kp = 1; kp <= k; ++kp) {
        for (std::size_t i = 0; i < kp; ++i) {
            std::vector<int> args;
            std::size_t off = 0;
            for (std::size_t j = 1; j <= i; ++j) {
                off += ft.xw[j - 1];
                std::vector<int> key(flat.begin(), flat.begin() + static_cast<long>(off));
                const std::vector<int>& y = st.choose(j, key);
                args.insert(args.end(), y.begin(), y.end());
            }
            std::size_t skip = 0, len = 0;
            for (std::size_t j = 1; j <= i; ++j) skip += ft.xw[j - 1];
            for (std::size_t j = 1; j <= kp; ++j) len += ft.xw[j - 1];
            args.insert(args.end(), flat.begin() + static_cast<long>(skip),
                        flat.begin() + static_cast<long>(len));
            sig.push_back(ft.value(i, kp, args));
        }
    }
    (void)s;
    return sig;
}

}  // namespace detail

// Checks the mu-uniformity condition exhaustively: plays with identical
// fingerprint signatures (at every level up to k) must receive identical
// k-th choices.
inline bool is_uniform(const FiniteStructure& A, const StandardFormSentence& s,
                       const FingerprintTable& ft, const Strategy& st) {
    const std::size_t n = s.n();
    for (std::size_t k = 1; k <= n; ++k) {
        std::size_t total = 0;
        for (std::size_t i = 1; i <= k; ++i) total += ft.xw[i - 1];
        std::map<std::vector<std::string>, std::vector<int>> seen;
        std::vector<int> flat(total, 0);
        do {
            std::vector<std::string> sig = detail::play_signature(s, ft, st, flat, k);
            const std::vector<int>& choice = st.choose(k, flat);
            auto [it, fresh] = seen.emplace(std::move(sig), choice);
            if (!fresh && it->second != choice) return false;
        } while (detail::next_tuple(flat, A.size));
    }
    return true;
}

// Builds the mu-uniform strategy from a satisfying one: pick one
// representative play per fingerprint-signature class (lexicographically
// least in enumeration order), then answer every play with the original
// strategy's choice at the representative of its class.  Asserts uniformity
// of the result and that its outcome set shrank (or stayed equal).
inline Strategy uniformize(const FiniteStructure& A, const StandardFormSentence& s,
                           const Strategy& sigma) {
    const std::size_t n = s.n();
    GbsrAnalysis ga = analyze_gbsr(s);
    if (!ga.is_gbsr) throw NotGBSR("uniformize: sentence is not GBSR");
    std::vector<std::vector<FormulaPtr>> partition(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        for (int idx : ga.atom_partition[k]) partition[k].push_back(ga.atoms[idx]);
    FingerprintTable ft = fingerprints(A, s, partition, sigma);

    // Representative keys: per class i < k the sequence of fingerprints
    // S_{i,i+1} .. S_{i,k}, membership-chained by construction.
    using RepKey = std::vector<std::vector<std::string>>;
    std::vector<std::map<RepKey, std::vector<int>>> reps(n + 1);

    // The S_{i,k} values of a candidate play (c1..c_{k-1}, bk), with the
    // given strategy composed into the existential positions.
    auto level_values = [&](const Strategy& st, const std::vector<int>& flat, std::size_t k) {
        std::vector<std::string> vals;
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<int> args;
            std::size_t off = 0;
            for (std::size_t j = 1; j <= i; ++j) {
                off += ft.xw[j - 1];
                std::vector<int> key(flat.begin(), flat.begin() + static_cast<long>(off));
                const std::vector<int>& y = st.choose(j, key);
                args.insert(args.end(), y.begin(), y.end());
            }
            std::size_t skip = 0;
            for (std::size_t j = 1; j <= i; ++j) skip += ft.xw[j - 1];
            args.insert(args.end(), flat.begin() + static_cast<long>(skip), flat.end());
            vals.push_back(ft.value(i, k, args));
        }
        return vals;
    };

    for (std::size_t k = 1; k <= n; ++k) {
        if (k == 1) {
            std::vector<int> b(ft.xw[0], 0);
            do {
                RepKey key{{ft.value(0, 1, b)}};
                reps[1].emplace(std::move(key), b);  // first hit = least play
            } while (detail::next_tuple(b, A.size));
            continue;
        }
        for (const auto& [prior, c] : reps[k - 1]) {
            std::vector<int> b(ft.xw[k - 1], 0);
            do {
                std::vector<int> flat = c;
                flat.insert(flat.end(), b.begin(), b.end());
                std::vector<std::string> vals = level_values(sigma, flat, k);
                RepKey key(k);
                for (std::size_t i = 0; i + 1 < k; ++i) {
                    key[i] = prior[i];
                    key[i].push_back(vals[i]);
                }
                key[k - 1] = {vals[k - 1]};
                reps[k].emplace(std::move(key), flat);
            } while (detail::next_tuple(b, A.size));
        }
    }

    // Assemble the uniform strategy level by level; the key of a play is
    // computed with the already-built lower levels.
    Strategy hat;
    hat.xw = sigma.xw;
    hat.yw = sigma.yw;
    hat.tables.resize(n);
    for (std::size_t k = 1; k <= n; ++k) {
        std::size_t total = 0;
        for (std::size_t i = 1; i <= k; ++i) total += ft.xw[i - 1];
        std::vector<int> flat(total, 0);
        do {
            // S_{i,j} for all i < j <= k, grouped per class i.
            RepKey key(k);
            for (std::size_t j = 1; j <= k; ++j) {
                std::size_t lenj = 0;
                for (std::size_t i = 1; i <= j; ++i) lenj += ft.xw[i - 1];
                std::vector<int> prefix(flat.begin(), flat.begin() + static_cast<long>(lenj));
                std::vector<std::string> vals = level_values(hat, prefix, j);
                for (std::size_t i = 0; i < j; ++i) key[i].push_back(vals[i]);
            }
            auto it = reps[k].find(key);
            if (it == reps[k].end())
                throw RepresentativeMissing("uniformize: no representative at level " +
                                            std::to_string(k));
            hat.tables[k - 1][flat] = sigma.choose(k, it->second);
        } while (detail::next_tuple(flat, A.size));
    }

    if (!is_uniform(A, s, ft, hat))
        throw FoltError("uniformize: constructed strategy failed the uniformity check");
    OutcomeSet before = outcomes(A, s, sigma);
    OutcomeSet after = outcomes(A, s, hat);
    for (const auto& S : after.outcomes)
        if (!before.outcomes.count(S))
            throw FoltError("uniformize: outcome set is not a subset of the original");
    return hat;
}

// ---------------------------------------------------------------------------
// Saturating bound arithmetic (the bounds tetrate; anything saturated is
// trivially respected).

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > UINT64_MAX / b) return UINT64_MAX;
    return a * b;
}

inline std::uint64_t sat_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    while (exp--) r = sat_mul(r, base);
    return r;
}

// 2 tetrated k times starting from m: tet(0) = m, tet(k+1) = 2^tet(k).
inline std::uint64_t sat_tetration(std::uint64_t k, std::uint64_t m) {
    std::uint64_t r = m;
    while (k--) {
        if (r >= 64) return UINT64_MAX;
        r = std::uint64_t{1} << r;
    }
    return r;
}

// ---------------------------------------------------------------------------
// The shrinking pipeline

struct ShrinkResult {
    FiniteStructure model;       // induced substructure on the target set
    std::set<int> target;        // elements of A the uniform strategy uses
    int kappa = 0;               // degree of the sentence
    std::uint64_t strategy_bound = 0;  // n * |y| * (2^^(kappa+1) |At|)^(n^2)
    std::uint64_t theorem_bound = 0;   // len^2 * (2^^(kappa+1) len)^(n^2)
};

// find_strategy -> uniformize -> target-set extraction -> induced
// substructure; re-verifies the output and both cardinality bounds.
inline ShrinkResult shrink(const FiniteStructure& A, const StandardFormSentence& s,
                           const ShrinkLimits& limits = {}) {
    detail::require_relational(s);
    GbsrAnalysis ga = analyze_gbsr(s);
    if (!ga.is_gbsr) throw NotGBSR("shrink: sentence is not GBSR");
    const std::size_t n = s.n();
    if (n > limits.max_blocks || static_cast<std::size_t>(A.size) > limits.max_universe ||
        ga.atoms.size() > limits.max_atoms)
        throw FoltError("shrink: input exceeds the desk-scale limits (blocks " +
                        std::to_string(n) + ", universe " + std::to_string(A.size) +
                        ", atoms " + std::to_string(ga.atoms.size()) +
                        "); raise the limits to override");

    auto sigma = find_strategy(A, s);
    if (!sigma) throw NotAModel("shrink: structure does not satisfy the sentence");
    Strategy hat = uniformize(A, s, *sigma);

    ShrinkResult out;
    for (std::size_t k = 1; k <= n; ++k)
        for (const auto& [key, choice] : hat.tables[k - 1])
            for (int e : choice) out.target.insert(e);
    // With no existential choices the target set is empty and any single
    // element carries the (universally-quantified) sentence; the bounds below
    // are checked against the strategy's own target elements only.
    const std::size_t strategy_elements = out.target.size();
    if (out.target.empty()) out.target.insert(0);
    out.model = induced_substructure(A, out.target);
    if (!evaluate(out.model, *s.to_formula()))
        throw FoltError("shrink: extracted substructure is not a model");

    std::vector<std::vector<FormulaPtr>> partition(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        for (int idx : ga.atom_partition[k]) partition[k].push_back(ga.atoms[idx]);
    out.kappa = degree(s, partition);
    std::uint64_t ybar = 0;
    for (const auto& blk : s.y_blocks) ybar += blk.size();
    std::uint64_t len = formula_len(*s.to_formula());
    out.strategy_bound = sat_mul(
        sat_mul(n, ybar),
        sat_pow(sat_tetration(static_cast<std::uint64_t>(out.kappa) + 1, ga.atoms.size()),
                n * n));
    out.theorem_bound = sat_mul(
        sat_mul(len, len),
        sat_pow(sat_tetration(static_cast<std::uint64_t>(out.kappa) + 1, len), n * n));
    if (strategy_elements > out.strategy_bound)
        throw FoltError("shrink: target set exceeds the strategy bound");
    if (strategy_elements > out.theorem_bound)
        throw FoltError("shrink: target set exceeds the small-model theorem bound");
    return out;
}

}  // namespace folt

#endif  // FOLT_SHRINK_HPP
