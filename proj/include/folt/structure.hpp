#ifndef FOLT_STRUCTURE_HPP
#define FOLT_STRUCTURE_HPP

// Explicit finite structures, Tarskian evaluation, exhaustive structure
// enumeration, the complete BSR decision procedure, bounded model search,
// equivalence checking, and induced substructures.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "folt/ast.hpp"
#include "folt/normal.hpp"

namespace folt {

struct MissingInterpretation : FoltError {
    explicit MissingInterpretation(const std::string& sym)
        : FoltError("missing interpretation for symbol " + sym) {}
};

struct BudgetExceeded : FoltError {
    explicit BudgetExceeded(std::uint64_t budget)
        : FoltError("structure enumeration budget exceeded: " + std::to_string(budget)) {}
};

struct NotClosedUnderFunctions : FoltError {
    explicit NotClosedUnderFunctions(const std::string& witness)
        : FoltError("subset not closed: " + witness) {}
};

// ---------------------------------------------------------------------------

struct FiniteStructure {
    int size = 1;  // universe {0, ..., size-1}
    std::map<std::string, std::set<std::vector<int>>> predicates;
    std::map<std::string, int> constants;
    // flat function tables in row-major mixed-radix order over the arguments
    std::map<std::string, std::vector<int>> functions;
    std::map<std::string, std::size_t> function_arity;

    bool operator==(const FiniteStructure& o) const {
        return size == o.size && predicates == o.predicates && constants == o.constants &&
               functions == o.functions;
    }
};

inline std::size_t pow_sz(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    while (exp--) r *= base;
    return r;
}

inline std::size_t tuple_index(const std::vector<int>& tuple, int size) {
    std::size_t idx = 0;
    for (int v : tuple) idx = idx * static_cast<std::size_t>(size) + static_cast<std::size_t>(v);
    return idx;
}

// ---------------------------------------------------------------------------
// Evaluation

using Assignment = std::map<std::string, int>;

inline int eval_term(const FiniteStructure& A, const Assignment& beta, const Term& t) {
    switch (t.kind) {
        case TermKind::Var: {
            auto it = beta.find(t.name);
            if (it == beta.end()) throw MissingInterpretation("variable " + t.name);
            return it->second;
        }
        case TermKind::Const: {
            auto it = A.constants.find(t.name);
            if (it == A.constants.end()) throw MissingInterpretation(t.name);
            return it->second;
        }
        case TermKind::App: {
            auto it = A.functions.find(t.name);
            if (it == A.functions.end()) throw MissingInterpretation(t.name);
            std::vector<int> args;
            args.reserve(t.args.size());
            for (const auto& a : t.args) args.push_back(eval_term(A, beta, a));
            return it->second.at(tuple_index(args, A.size));
        }
    }
    return 0;  // unreachable
}

inline bool evaluate(const FiniteStructure& A, Assignment& beta, const Formula& f) {
    switch (f.kind) {
        case FormulaKind::Atom: {
            auto it = A.predicates.find(f.pred);
            if (it == A.predicates.end()) throw MissingInterpretation(f.pred);
            std::vector<int> tuple;
            tuple.reserve(f.args.size());
            for (const auto& t : f.args) tuple.push_back(eval_term(A, beta, t));
            return it->second.count(tuple) > 0;
        }
        case FormulaKind::Equality:
            return eval_term(A, beta, f.args[0]) == eval_term(A, beta, f.args[1]);
        case FormulaKind::Not:
            return !evaluate(A, beta, *f.kids[0]);
        case FormulaKind::And:
            for (const auto& k : f.kids)
                if (!evaluate(A, beta, *k)) return false;
            return true;
        case FormulaKind::Or:
            for (const auto& k : f.kids)
                if (evaluate(A, beta, *k)) return true;
            return false;
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            bool want = f.kind == FormulaKind::Exists;
            // iterate assignments of the block
            std::vector<std::pair<std::string, std::optional<int>>> saved;
            for (const auto& v : f.vars) {
                auto it = beta.find(v);
                saved.emplace_back(v, it == beta.end() ? std::nullopt
                                                       : std::optional<int>(it->second));
            }
            std::vector<int> vals(f.vars.size(), 0);
            bool result = !want;
            for (;;) {
                for (std::size_t i = 0; i < f.vars.size(); ++i) beta[f.vars[i]] = vals[i];
                if (evaluate(A, beta, *f.kids[0]) == want) {
                    result = want;
                    break;
                }
                std::size_t i = vals.size();
                while (i > 0) {
                    if (++vals[i - 1] < A.size) break;
                    vals[i - 1] = 0;
                    --i;
                }
                if (i == 0) break;  // odometer wrapped: all assignments tried
            }
            for (const auto& [v, old] : saved) {
                if (old) beta[v] = *old;
                else beta.erase(v);
            }
            return result;
        }
        case FormulaKind::Frozen:
            return evaluate(A, beta, *f.kids[0]);
    }
    return false;  // unreachable
}

inline bool evaluate(const FiniteStructure& A, const Formula& f) {
    Assignment beta;
    return evaluate(A, beta, f);
}
inline bool evaluate(const FiniteStructure& A, const FormulaPtr& f) { return evaluate(A, *f); }
inline bool evaluate(const FiniteStructure& A, const StandardFormSentence& s) {
    return evaluate(A, *s.to_formula());
}

// ---------------------------------------------------------------------------
// Enumeration of all structures over a signature and universe size

class StructureEnumerator {
public:
    StructureEnumerator(const Signature& sig, int size, std::uint64_t budget = UINT64_MAX)
        : size_(size), budget_(budget) {
        if (size < 1) throw FoltError("universe size must be >= 1");
        current_.size = size;
        for (const auto& [name, arity] : sig.predicates) {
            pred_slots_.emplace_back(name, pow_sz(static_cast<std::size_t>(size), arity), arity);
            current_.predicates[name] = {};
        }
        for (const auto& name : sig.constants) {
            const_names_.push_back(name);
            current_.constants[name] = 0;
        }
        for (const auto& [name, arity] : sig.functions) {
            func_slots_.emplace_back(name, pow_sz(static_cast<std::size_t>(size), arity));
            current_.functions[name] =
                std::vector<int>(pow_sz(static_cast<std::size_t>(size), arity), 0);
            current_.function_arity[name] = arity;
        }
        for (const auto& [name, len, arity] : pred_slots_)
            pred_bits_.emplace_back(name, std::vector<bool>(len, false));
        done_ = false;
    }

    // Returns the next structure, or nullopt when exhausted.  Deterministic
    // order: odometer over predicate bits, then constants, then function
    // tables.
    std::optional<FiniteStructure> next() {
        if (done_) return std::nullopt;
        if (++emitted_ > budget_) throw BudgetExceeded(budget_);
        materialize();
        FiniteStructure out = current_;
        advance();
        return out;
    }

private:
    void materialize() {
        for (std::size_t p = 0; p < pred_bits_.size(); ++p) {
            const auto& [name, bits] = pred_bits_[p];
            auto& rel = current_.predicates[name];
            rel.clear();
            std::size_t arity = std::get<2>(pred_slots_[p]);
            for (std::size_t i = 0; i < bits.size(); ++i) {
                if (!bits[i]) continue;
                std::vector<int> tuple(arity);
                std::size_t rem = i;
                for (std::size_t k = arity; k-- > 0;) {
                    tuple[k] = static_cast<int>(rem % size_);
                    rem /= size_;
                }
                rel.insert(std::move(tuple));
            }
        }
    }

    void advance() {
        // predicate bits first
        for (auto& [name, bits] : pred_bits_) {
            for (std::size_t i = 0; i < bits.size(); ++i) {
                if (!bits[i]) {
                    bits[i] = true;
                    return;
                }
                bits[i] = false;
            }
        }
        for (const auto& name : const_names_) {
            int& v = current_.constants[name];
            if (++v < size_) return;
            v = 0;
        }
        for (const auto& [name, len] : func_slots_) {
            auto& table = current_.functions[name];
            for (std::size_t i = 0; i < len; ++i) {
                if (++table[i] < size_) return;
                table[i] = 0;
            }
        }
        done_ = true;
    }

    int size_;
    std::uint64_t budget_;
    std::uint64_t emitted_ = 0;
    bool done_ = true;
    FiniteStructure current_;
    std::vector<std::tuple<std::string, std::size_t, std::size_t>> pred_slots_;
    std::vector<std::pair<std::string, std::vector<bool>>> pred_bits_;
    std::vector<std::string> const_names_;
    std::vector<std::pair<std::string, std::size_t>> func_slots_;
};

// ---------------------------------------------------------------------------
// Verdicts and decision procedures

struct Verdict {
    enum Kind { Sat, Unsat, UnsatAtBound, Unknown } kind;
    std::optional<FiniteStructure> model;  // for Sat
    int bound = 0;                         // for UnsatAtBound / Unknown

    static Verdict sat(FiniteStructure m) { return {Sat, std::move(m), 0}; }
    static Verdict unsat() { return {Unsat, std::nullopt, 0}; }
    static Verdict unsat_at(int b) { return {UnsatAtBound, std::nullopt, b}; }
};

struct NotBSR : FoltError {
    explicit NotBSR(const std::string& why) : FoltError("not a BSR sentence: " + why) {}
};

inline bool is_exists_forall_prefix(const StandardFormSentence& s) {
    bool seen_forall = false;
    for (std::size_t i = 1; i <= s.n(); ++i) {
        if (!s.xbar(i).empty()) {
            if (i == 1) seen_forall = true;  // leading universals: not exists*-forall*
            else seen_forall = true;
        }
        if (!s.ybar(i).empty() && seen_forall) return false;
    }
    return true;
}

inline Verdict decide_bounded(const FormulaPtr& sentence, int max_size,
                              std::uint64_t budget = UINT64_MAX) {
    Signature sig = signature_of(*sentence);
    for (int m = 1; m <= max_size; ++m) {
        StructureEnumerator en(sig, m, budget);
        while (auto A = en.next())
            if (evaluate(*A, *sentence)) return Verdict::sat(std::move(*A));
    }
    return Verdict::unsat_at(max_size);
}

inline int bsr_model_bound(const StandardFormSentence& s) {
    Signature sig = signature_of(s);
    std::size_t exists_vars = 0;
    for (const auto& b : s.y_blocks) exists_vars += b.size();
    return static_cast<int>(std::max<std::size_t>(1, sig.constants.size()) + exists_vars);
}

inline Verdict decide_bsr(const StandardFormSentence& s, std::uint64_t budget = UINT64_MAX) {
    Signature sig = signature_of(s);
    if (!sig.functions.empty()) throw NotBSR("non-constant function symbols present");
    if (!is_exists_forall_prefix(s)) throw NotBSR("prefix is not exists*-forall*");
    Verdict v = decide_bounded(s.to_formula(), bsr_model_bound(s), budget);
    if (v.kind == Verdict::UnsatAtBound) return Verdict::unsat();  // bound is complete
    return v;
}

// ---------------------------------------------------------------------------
// Equivalence checking (bounded, sound for refutation)

struct EquivalenceResult {
    bool pass;
    std::optional<FiniteStructure> counterexample;
};

inline EquivalenceResult check_equivalence(const FormulaPtr& s1, const FormulaPtr& s2,
                                           int max_size, std::uint64_t budget = UINT64_MAX) {
    Signature sig = signature_of(*s1);
    sig.merge(signature_of(*s2));
    for (int m = 1; m <= max_size; ++m) {
        StructureEnumerator en(sig, m, budget);
        while (auto A = en.next())
            if (evaluate(*A, *s1) != evaluate(*A, *s2))
                return {false, std::move(*A)};
    }
    return {true, std::nullopt};
}

inline EquivalenceResult check_equivalence(const StandardFormSentence& s1,
                                           const StandardFormSentence& s2, int max_size,
                                           std::uint64_t budget = UINT64_MAX) {
    return check_equivalence(s1.to_formula(), s2.to_formula(), max_size, budget);
}

// ---------------------------------------------------------------------------
// Induced substructures

inline FiniteStructure induced_substructure(const FiniteStructure& A,
                                            const std::set<int>& subset) {
    if (subset.empty()) throw FoltError("substructure subset must be nonempty");
    for (const auto& [name, e] : A.constants)
        if (!subset.count(e)) throw NotClosedUnderFunctions("constant " + name);
    // closure under functions
    for (const auto& [name, table] : A.functions) {
        std::size_t arity = A.function_arity.at(name);
        std::vector<int> tuple(arity, 0);
        std::vector<int> elems(subset.begin(), subset.end());
        std::vector<std::size_t> idx(arity, 0);
        for (;;) {
            for (std::size_t i = 0; i < arity; ++i) tuple[i] = elems[idx[i]];
            int img = table.at(tuple_index(tuple, A.size));
            if (!subset.count(img))
                throw NotClosedUnderFunctions("function " + name + " escapes the subset");
            std::size_t i = arity;
            while (i > 0) {
                if (++idx[i - 1] < elems.size()) break;
                idx[i - 1] = 0;
                --i;
            }
            if (i == 0) break;
        }
    }
    // re-index elements in ascending order
    std::map<int, int> remap;
    for (int e : subset) remap[e] = static_cast<int>(remap.size());
    FiniteStructure B;
    B.size = static_cast<int>(subset.size());
    for (const auto& [name, rel] : A.predicates) {
        auto& out = B.predicates[name];
        for (const auto& t : rel) {
            bool inside = true;
            for (int v : t)
                if (!subset.count(v)) { inside = false; break; }
            if (!inside) continue;
            std::vector<int> nt;
            nt.reserve(t.size());
            for (int v : t) nt.push_back(remap[v]);
            out.insert(std::move(nt));
        }
    }
    for (const auto& [name, e] : A.constants) B.constants[name] = remap[e];
    for (const auto& [name, table] : A.functions) {
        std::size_t arity = A.function_arity.at(name);
        B.function_arity[name] = arity;
        std::vector<int> elems(subset.begin(), subset.end());
        std::vector<int> out_table(pow_sz(static_cast<std::size_t>(B.size), arity));
        std::vector<std::size_t> idx(arity, 0);
        std::vector<int> tuple(arity, 0), ntuple(arity, 0);
        for (;;) {
            for (std::size_t i = 0; i < arity; ++i) {
                tuple[i] = elems[idx[i]];
                ntuple[i] = remap[tuple[i]];
            }
            out_table[tuple_index(ntuple, B.size)] = remap[table.at(tuple_index(tuple, A.size))];
            std::size_t i = arity;
            while (i > 0) {
                if (++idx[i - 1] < elems.size()) break;
                idx[i - 1] = 0;
                --i;
            }
            if (i == 0 || arity == 0) break;
        }
        B.functions[name] = std::move(out_table);
    }
    return B;
}

// ---------------------------------------------------------------------------
// Structure literal JSON format:
// { "universe_size": m,
//   "predicates": { name: [[e1,...],[...]] },
//   "constants":  { name: e },
//   "functions":  { name: [flat row-major table] } }

inline nlohmann::json structure_to_json(const FiniteStructure& A) {
    nlohmann::json j;
    j["universe_size"] = A.size;
    j["predicates"] = nlohmann::json::object();
    for (const auto& [name, rel] : A.predicates) {
        nlohmann::json tuples = nlohmann::json::array();
        for (const auto& t : rel) tuples.push_back(t);
        j["predicates"][name] = std::move(tuples);
    }
    j["constants"] = nlohmann::json::object();
    for (const auto& [name, e] : A.constants) j["constants"][name] = e;
    j["functions"] = nlohmann::json::object();
    for (const auto& [name, table] : A.functions) j["functions"][name] = table;
    return j;
}

inline FiniteStructure structure_from_json(const nlohmann::json& j,
                                           const Signature* sig = nullptr) {
    FiniteStructure A;
    A.size = j.at("universe_size").get<int>();
    if (j.contains("predicates"))
        for (auto it = j["predicates"].begin(); it != j["predicates"].end(); ++it) {
            auto& rel = A.predicates[it.key()];
            for (const auto& t : it.value()) rel.insert(t.get<std::vector<int>>());
        }
    if (j.contains("constants"))
        for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it)
            A.constants[it.key()] = it.value().get<int>();
    if (j.contains("functions"))
        for (auto it = j["functions"].begin(); it != j["functions"].end(); ++it) {
            A.functions[it.key()] = it.value().get<std::vector<int>>();
            std::size_t arity = 1;
            if (sig && sig->functions.count(it.key())) {
                arity = sig->functions.at(it.key());
            } else {
                // infer: smallest a with size^a == table length
                std::size_t len = A.functions[it.key()].size();
                while (pow_sz(static_cast<std::size_t>(A.size), arity) < len) ++arity;
            }
            A.function_arity[it.key()] = arity;
        }
    return A;
}

}  // namespace folt

#endif  // FOLT_STRUCTURE_HPP
