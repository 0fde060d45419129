#ifndef FOLT_TESTS_GEN_HPP
#define FOLT_TESTS_GEN_HPP

// Deterministic random generators for property suites: standard-form
// sentences over small signatures, fragment-biased variants, and random
// finite structures.

#include <random>
#include <string>
#include <vector>

#include "folt/ast.hpp"
#include "folt/normal.hpp"
#include "folt/structure.hpp"

namespace folt::testgen {

struct GenConfig {
    int max_block_pairs = 3;     // n
    int max_vars_per_block = 2;  // per universal/existential block
    int max_atoms = 6;
    int num_preds = 3;           // names p, q, r, ...
    int max_pred_arity = 3;
    int num_consts = 0;          // constants a, b, ...
    // When true, every atom contains at most one universal variable
    // (biases generation toward the one-universal-variable fragment).
    bool at_most_one_universal_per_atom = false;
    // When true, atoms never mix universal and existential variables
    // (biases generation toward separated sentences).
    bool separated_atoms = false;
};

inline std::string pred_name(int i) { return std::string(1, static_cast<char>('p' + i)); }
inline std::string const_name(int i) { return std::string(1, static_cast<char>('a' + i)); }

class SentenceGen {
public:
    explicit SentenceGen(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }
    int uniform(int lo, int hi) {  // inclusive
        return std::uniform_int_distribution<int>(lo, hi)(rng_);
    }
    bool coin(double p = 0.5) { return std::uniform_real_distribution<>(0.0, 1.0)(rng_) < p; }

    // A random closed sentence in standard form.  Prefix variables that end
    // up unused are dropped by normalization, so some blocks may be empty.
    StandardFormSentence sentence(const GenConfig& cfg) {
        int n = uniform(1, cfg.max_block_pairs);
        std::vector<std::string> xs, ys;
        std::vector<std::vector<std::string>> xb(n), yb(n);
        int counter = 0;
        for (int i = 0; i < n; ++i) {
            int nx = uniform(i == 0 ? 0 : 1, cfg.max_vars_per_block);
            int ny = uniform(i == n - 1 ? 0 : 1, cfg.max_vars_per_block);
            for (int k = 0; k < nx; ++k) {
                xb[i].push_back("X" + std::to_string(++counter));
                xs.push_back(xb[i].back());
            }
            for (int k = 0; k < ny; ++k) {
                yb[i].push_back("Y" + std::to_string(++counter));
                ys.push_back(yb[i].back());
            }
        }
        // per-sentence predicate arities
        std::vector<int> arity(cfg.num_preds);
        for (int i = 0; i < cfg.num_preds; ++i) arity[i] = uniform(1, cfg.max_pred_arity);

        int num_atoms = uniform(1, cfg.max_atoms);
        std::vector<FormulaPtr> leaves;
        for (int i = 0; i < num_atoms; ++i) {
            int p = uniform(0, cfg.num_preds - 1);
            std::vector<Term> args;
            int used_universals = 0;
            bool atom_universal_only = cfg.separated_atoms ? coin() : false;
            for (int k = 0; k < arity[p]; ++k) {
                bool pick_const = cfg.num_consts > 0 && coin(0.2);
                if (pick_const) {
                    args.push_back(Term::cst(const_name(uniform(0, cfg.num_consts - 1))));
                    continue;
                }
                bool want_universal;
                if (cfg.separated_atoms) {
                    want_universal = atom_universal_only;
                } else {
                    want_universal = coin();
                }
                if (cfg.at_most_one_universal_per_atom && used_universals >= 1)
                    want_universal = false;
                if (want_universal && !xs.empty()) {
                    args.push_back(Term::var(xs[uniform(0, (int)xs.size() - 1)]));
                    ++used_universals;
                } else if (!ys.empty()) {
                    args.push_back(Term::var(ys[uniform(0, (int)ys.size() - 1)]));
                } else if (!xs.empty() &&
                           !(cfg.at_most_one_universal_per_atom && used_universals >= 1)) {
                    args.push_back(Term::var(xs[uniform(0, (int)xs.size() - 1)]));
                    ++used_universals;
                } else if (cfg.num_consts > 0) {
                    args.push_back(Term::cst(const_name(uniform(0, cfg.num_consts - 1))));
                } else {
                    // fall back to an existential-free ground-ish atom: reuse a
                    // fixed constant name
                    args.push_back(Term::cst("a"));
                }
            }
            FormulaPtr atom = Formula::atom(pred_name(p), std::move(args));
            leaves.push_back(coin() ? atom : Formula::negate(atom));
        }
        FormulaPtr matrix = combine(std::move(leaves));
        FormulaPtr closed = matrix;
        for (int i = n; i-- > 0;) {
            closed = Formula::exists(yb[i], closed);
            closed = Formula::forall(xb[i], closed);
        }
        return normalize_standard_form(closed);
    }

    // Random boolean combination (NNF, negation only at leaves).
    FormulaPtr combine(std::vector<FormulaPtr> leaves) {
        std::shuffle(leaves.begin(), leaves.end(), rng_);
        while (leaves.size() > 1) {
            int take = std::min<int>(uniform(2, 3), static_cast<int>(leaves.size()));
            std::vector<FormulaPtr> group(leaves.end() - take, leaves.end());
            leaves.resize(leaves.size() - take);
            leaves.push_back(coin() ? Formula::conj(std::move(group))
                                    : Formula::disj(std::move(group)));
            std::shuffle(leaves.begin(), leaves.end(), rng_);
        }
        return leaves[0];
    }

    // Random structure over a signature.
    FiniteStructure structure(const Signature& sig, int size) {
        FiniteStructure A;
        A.size = size;
        for (const auto& [name, arity] : sig.predicates) {
            auto& rel = A.predicates[name];
            std::size_t total = pow_sz(static_cast<std::size_t>(size), arity);
            for (std::size_t i = 0; i < total; ++i) {
                if (!coin()) continue;
                std::vector<int> tuple(arity);
                std::size_t rem = i;
                for (std::size_t k = arity; k-- > 0;) {
                    tuple[k] = static_cast<int>(rem % size);
                    rem /= size;
                }
                rel.insert(std::move(tuple));
            }
        }
        for (const auto& name : sig.constants) A.constants[name] = uniform(0, size - 1);
        for (const auto& [name, arity] : sig.functions) {
            std::size_t total = pow_sz(static_cast<std::size_t>(size), arity);
            std::vector<int> table(total);
            for (auto& v : table) v = uniform(0, size - 1);
            A.functions[name] = std::move(table);
            A.function_arity[name] = arity;
        }
        return A;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace folt::testgen

#endif  // FOLT_TESTS_GEN_HPP
