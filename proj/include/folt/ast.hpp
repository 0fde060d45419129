#ifndef FOLT_AST_HPP
#define FOLT_AST_HPP

// Abstract syntax for first-order sentences: terms, formulas, literals,
// substitutions, and the blocked-prefix sentence form used throughout the
// toolkit.  All values are immutable after construction and safe to share.

#include <algorithm>
#include <cassert>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace folt {

// ---------------------------------------------------------------------------
// Errors

struct FoltError : std::runtime_error {
    explicit FoltError(const std::string& what) : std::runtime_error(what) {}
};

struct FreeVariableError : FoltError {
    std::string variable;
    explicit FreeVariableError(const std::string& v)
        : FoltError("formula is not closed: free variable " + v), variable(v) {}
};

struct SizeGuardExceeded : FoltError {
    std::size_t limit;
    explicit SizeGuardExceeded(std::size_t l)
        : FoltError("normal-form size guard exceeded: " + std::to_string(l) + " clauses"),
          limit(l) {}
};

// ---------------------------------------------------------------------------
// Terms

enum class TermKind { Var, Const, App };

struct Term {
    TermKind kind;
    std::string name;
    std::vector<Term> args;  // nonempty only for App

    static Term var(std::string n) { return Term{TermKind::Var, std::move(n), {}}; }
    static Term cst(std::string n) { return Term{TermKind::Const, std::move(n), {}}; }
    static Term app(std::string n, std::vector<Term> a) {
        return Term{TermKind::App, std::move(n), std::move(a)};
    }

    bool operator==(const Term& o) const {
        return kind == o.kind && name == o.name && args == o.args;
    }
    bool operator!=(const Term& o) const { return !(*this == o); }
    bool operator<(const Term& o) const {
        if (kind != o.kind) return kind < o.kind;
        if (name != o.name) return name < o.name;
        return args < o.args;
    }
};

inline bool term_is_ground(const Term& t) {
    if (t.kind == TermKind::Var) return false;
    for (const auto& a : t.args)
        if (!term_is_ground(a)) return false;
    return true;
}

inline void term_vars_into(const Term& t, std::set<std::string>& out) {
    if (t.kind == TermKind::Var) out.insert(t.name);
    for (const auto& a : t.args) term_vars_into(a, out);
}

inline std::set<std::string> term_vars(const Term& t) {
    std::set<std::string> s;
    term_vars_into(t, s);
    return s;
}

inline int term_depth(const Term& t) {
    if (t.kind != TermKind::App) return 0;
    int d = 0;
    for (const auto& a : t.args) d = std::max(d, term_depth(a));
    return d + 1;
}

// Symbol count, used for the length measure len(.).
inline std::size_t term_len(const Term& t) {
    std::size_t n = 1;
    for (const auto& a : t.args) n += term_len(a);
    return n;
}

// ---------------------------------------------------------------------------
// Formulas

enum class FormulaKind { Atom, Equality, Not, And, Or, Forall, Exists, Frozen };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FormulaKind kind;
    std::string pred;                 // Atom: predicate name
    std::vector<Term> args;           // Atom arguments / Equality's two sides
    std::vector<FormulaPtr> kids;     // Not: 1; And/Or: >= 2; quantifier/Frozen body: 1
    std::vector<std::string> vars;    // quantifier variable list
    int unit_id = 0;                  // Frozen: indivisible-unit identifier

    static FormulaPtr atom(std::string p, std::vector<Term> a) {
        auto f = std::make_shared<Formula>();
        f->kind = FormulaKind::Atom;
        f->pred = std::move(p);
        f->args = std::move(a);
        return f;
    }
    static FormulaPtr equality(Term l, Term r) {
        auto f = std::make_shared<Formula>();
        f->kind = FormulaKind::Equality;
        f->args = {std::move(l), std::move(r)};
        return f;
    }
    static FormulaPtr negate(FormulaPtr g) {
        auto f = std::make_shared<Formula>();
        f->kind = FormulaKind::Not;
        f->kids = {std::move(g)};
        return f;
    }
    // conjunction/disjunction constructors flatten nested nodes of the same
    // kind and collapse singleton lists.
    static FormulaPtr conj(std::vector<FormulaPtr> ks) { return nary(FormulaKind::And, std::move(ks)); }
    static FormulaPtr disj(std::vector<FormulaPtr> ks) { return nary(FormulaKind::Or, std::move(ks)); }
    static FormulaPtr nary(FormulaKind k, std::vector<FormulaPtr> ks) {
        assert(k == FormulaKind::And || k == FormulaKind::Or);
        std::vector<FormulaPtr> flat;
        for (auto& c : ks) {
            assert(c);
            if (c->kind == k)
                flat.insert(flat.end(), c->kids.begin(), c->kids.end());
            else
                flat.push_back(std::move(c));
        }
        if (flat.size() == 1) return flat[0];
        auto f = std::make_shared<Formula>();
        f->kind = k;
        f->kids = std::move(flat);
        return f;
    }
    static FormulaPtr quant(FormulaKind k, std::vector<std::string> vs, FormulaPtr body) {
        assert(k == FormulaKind::Forall || k == FormulaKind::Exists);
        if (vs.empty()) return body;
        if (body->kind == k) {
            // merge adjacent same-kind quantifiers
            std::vector<std::string> all = std::move(vs);
            all.insert(all.end(), body->vars.begin(), body->vars.end());
            auto f = std::make_shared<Formula>();
            f->kind = k;
            f->vars = std::move(all);
            f->kids = {body->kids[0]};
            return f;
        }
        auto f = std::make_shared<Formula>();
        f->kind = k;
        f->vars = std::move(vs);
        f->kids = {std::move(body)};
        return f;
    }
    static FormulaPtr forall(std::vector<std::string> vs, FormulaPtr body) {
        return quant(FormulaKind::Forall, std::move(vs), std::move(body));
    }
    static FormulaPtr exists(std::vector<std::string> vs, FormulaPtr body) {
        return quant(FormulaKind::Exists, std::move(vs), std::move(body));
    }
    static FormulaPtr frozen(int id, FormulaPtr body) {
        auto f = std::make_shared<Formula>();
        f->kind = FormulaKind::Frozen;
        f->unit_id = id;
        f->kids = {std::move(body)};
        return f;
    }
};

inline bool formula_equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind || a.pred != b.pred || a.args != b.args ||
        a.vars != b.vars || a.kids.size() != b.kids.size())
        return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!formula_equal(*a.kids[i], *b.kids[i])) return false;
    return true;
}
inline bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return formula_equal(*a, *b);
}

// Total order on formulas for canonical sorting / deduplication.
inline int formula_cmp(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    if (a.pred != b.pred) return a.pred < b.pred ? -1 : 1;
    if (a.args != b.args) return a.args < b.args ? -1 : 1;
    if (a.vars != b.vars) return a.vars < b.vars ? -1 : 1;
    if (a.kids.size() != b.kids.size()) return a.kids.size() < b.kids.size() ? -1 : 1;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (int c = formula_cmp(*a.kids[i], *b.kids[i])) return c;
    return 0;
}

inline void free_vars_into(const Formula& f, std::set<std::string>& bound,
                           std::set<std::string>& out) {
    switch (f.kind) {
        case FormulaKind::Atom:
        case FormulaKind::Equality:
            for (const auto& t : f.args) {
                std::set<std::string> vs = term_vars(t);
                for (const auto& v : vs)
                    if (!bound.count(v)) out.insert(v);
            }
            break;
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            std::vector<std::string> added;
            for (const auto& v : f.vars)
                if (bound.insert(v).second) added.push_back(v);
            free_vars_into(*f.kids[0], bound, out);
            for (const auto& v : added) bound.erase(v);
            break;
        }
        default:
            for (const auto& k : f.kids) free_vars_into(*k, bound, out);
    }
}

inline std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> bound, out;
    free_vars_into(f, bound, out);
    return out;
}
inline std::set<std::string> free_vars(const FormulaPtr& f) { return free_vars(*f); }

// Length measure: number of symbol occurrences (connectives, quantifier
// variables, predicate and term symbols).
inline std::size_t formula_len(const Formula& f) {
    std::size_t n = 0;
    switch (f.kind) {
        case FormulaKind::Atom:
        case FormulaKind::Equality:
            n = 1;
            for (const auto& t : f.args) n += term_len(t);
            break;
        case FormulaKind::Not:
            n = 1 + formula_len(*f.kids[0]);
            break;
        case FormulaKind::And:
        case FormulaKind::Or:
            n = f.kids.size() - 1;
            for (const auto& k : f.kids) n += formula_len(*k);
            break;
        case FormulaKind::Forall:
        case FormulaKind::Exists:
            n = f.vars.size() + formula_len(*f.kids[0]);
            break;
        case FormulaKind::Frozen:
            n = formula_len(*f.kids[0]);
            break;
    }
    return n;
}

inline bool is_atomic(const Formula& f) {
    return f.kind == FormulaKind::Atom || f.kind == FormulaKind::Equality;
}

// A literal-like normal-form unit: an atom, a negated atom, or a Frozen unit.
inline bool is_nf_unit(const Formula& f) {
    if (is_atomic(f) || f.kind == FormulaKind::Frozen) return true;
    return f.kind == FormulaKind::Not && is_atomic(*f.kids[0]);
}

// ---------------------------------------------------------------------------
// Literals

struct Literal {
    bool positive;
    FormulaPtr atom;  // Atom or Equality

    bool operator==(const Literal& o) const {
        return positive == o.positive && formula_equal(atom, o.atom);
    }
    bool operator<(const Literal& o) const {
        if (positive != o.positive) return positive < o.positive;
        return formula_cmp(*atom, *o.atom) < 0;
    }
    FormulaPtr to_formula() const {
        return positive ? atom : Formula::negate(atom);
    }
};

inline std::optional<Literal> as_literal(const FormulaPtr& f) {
    if (is_atomic(*f)) return Literal{true, f};
    if (f->kind == FormulaKind::Not && is_atomic(*f->kids[0]))
        return Literal{false, f->kids[0]};
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Substitutions (capture-avoiding application lives in normal.hpp)

struct Substitution {
    std::map<std::string, Term> map;

    bool empty() const { return map.empty(); }
    std::optional<Term> lookup(const std::string& v) const {
        auto it = map.find(v);
        if (it == map.end()) return std::nullopt;
        return it->second;
    }
    // Normalize to idempotence: apply the substitution to its own range
    // until a fixpoint (callers guarantee acyclicity, as in unification).
    Term apply(const Term& t) const {
        switch (t.kind) {
            case TermKind::Var: {
                auto r = lookup(t.name);
                return r ? *r : t;
            }
            case TermKind::Const:
                return t;
            case TermKind::App: {
                std::vector<Term> as;
                as.reserve(t.args.size());
                for (const auto& a : t.args) as.push_back(apply(a));
                return Term::app(t.name, std::move(as));
            }
        }
        return t;  // unreachable
    }
    void normalize() {
        for (bool changed = true; changed;) {
            changed = false;
            for (auto& [v, t] : map) {
                Term t2 = apply(t);
                if (t2 != t) {
                    t = std::move(t2);
                    changed = true;
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Standard-form sentences: forall x1 exists y1 ... forall xn exists yn . matrix
//
// Block pairs are indexed 1..n in the accessors below to match the usual
// convention; boundary blocks may be empty.

struct StandardFormSentence {
    // x_blocks[i] / y_blocks[i] hold the (i+1)-th universal/existential block.
    std::vector<std::vector<std::string>> x_blocks;
    std::vector<std::vector<std::string>> y_blocks;
    FormulaPtr matrix;

    std::size_t n() const { return x_blocks.size(); }
    const std::vector<std::string>& xbar(std::size_t i) const { return x_blocks.at(i - 1); }
    const std::vector<std::string>& ybar(std::size_t i) const { return y_blocks.at(i - 1); }

    std::set<std::string> all_x() const {
        std::set<std::string> s;
        for (const auto& b : x_blocks) s.insert(b.begin(), b.end());
        return s;
    }
    std::set<std::string> all_y() const {
        std::set<std::string> s;
        for (const auto& b : y_blocks) s.insert(b.begin(), b.end());
        return s;
    }
    // Block index of a prefix variable (1-based); 0 when not a prefix variable.
    std::size_t block_index(const std::string& v) const {
        for (std::size_t i = 0; i < x_blocks.size(); ++i) {
            for (const auto& u : x_blocks[i])
                if (u == v) return i + 1;
            for (const auto& u : y_blocks[i])
                if (u == v) return i + 1;
        }
        return 0;
    }

    FormulaPtr to_formula() const {
        FormulaPtr f = matrix;
        for (std::size_t i = x_blocks.size(); i-- > 0;) {
            f = Formula::exists(y_blocks[i], f);
            f = Formula::forall(x_blocks[i], f);
        }
        return f;
    }
};

// ---------------------------------------------------------------------------
// Signatures

struct Signature {
    std::map<std::string, std::size_t> predicates;  // name -> arity
    std::map<std::string, std::size_t> functions;   // name -> arity (>= 1)
    std::set<std::string> constants;
    bool has_equality = false;

    void merge(const Signature& o) {
        for (const auto& [n, a] : o.predicates) add_predicate(n, a);
        for (const auto& [n, a] : o.functions) add_function(n, a);
        constants.insert(o.constants.begin(), o.constants.end());
        has_equality = has_equality || o.has_equality;
    }
    void add_predicate(const std::string& n, std::size_t arity) {
        auto [it, fresh] = predicates.emplace(n, arity);
        if (!fresh && it->second != arity)
            throw FoltError("arity mismatch for predicate " + n + ": seen " +
                            std::to_string(arity) + ", expected " + std::to_string(it->second));
    }
    void add_function(const std::string& n, std::size_t arity) {
        auto [it, fresh] = functions.emplace(n, arity);
        if (!fresh && it->second != arity)
            throw FoltError("arity mismatch for function " + n + ": seen " +
                            std::to_string(arity) + ", expected " + std::to_string(it->second));
    }
};

inline void collect_signature_term(const Term& t, Signature& sig) {
    switch (t.kind) {
        case TermKind::Var:
            break;
        case TermKind::Const:
            if (sig.functions.count(t.name))
                throw FoltError("symbol " + t.name + " used both as constant and function");
            sig.constants.insert(t.name);
            break;
        case TermKind::App:
            if (sig.constants.count(t.name))
                throw FoltError("symbol " + t.name + " used both as constant and function");
            sig.add_function(t.name, t.args.size());
            for (const auto& a : t.args) collect_signature_term(a, sig);
            break;
    }
}

inline void collect_signature(const Formula& f, Signature& sig) {
    switch (f.kind) {
        case FormulaKind::Atom:
            sig.add_predicate(f.pred, f.args.size());
            for (const auto& t : f.args) collect_signature_term(t, sig);
            break;
        case FormulaKind::Equality:
            sig.has_equality = true;
            for (const auto& t : f.args) collect_signature_term(t, sig);
            break;
        default:
            for (const auto& k : f.kids) collect_signature(*k, sig);
    }
}

inline Signature signature_of(const Formula& f) {
    Signature sig;
    collect_signature(f, sig);
    return sig;
}
inline Signature signature_of(const StandardFormSentence& s) { return signature_of(*s.matrix); }

}  // namespace folt

#endif  // FOLT_AST_HPP
