#include <catch2/catch_amalgamated.hpp>

#include "folt/gaf_transform.hpp"
#include "folt/parse.hpp"
#include "folt/structure.hpp"
#include "support/checks.hpp"
#include "support/gen.hpp"

using namespace folt;

namespace {

const char* kPhi1 =
    "exists U. forall X. exists V. forall Z. exists Y1. exists Y2. "
    "((~p(U,X) | (q(X,V) & r(U,Z,Y1))) & (p(U,X) | (~q(X,V) & ~r(U,Z,Y2))))";

}  // namespace

TEST_CASE("gaf_unnest on the golden GAF sentence") {
    auto s = normalize_standard_form(parse(kPhi1));
    auto a = analyze_gaf(s);
    REQUIRE(a.is_gaf);
    UnnestTrace trace;
    auto out = gaf_unnest(s, a, &trace);
    CHECK(free_vars(*out).empty());
    CHECK(testgen::max_forall_nesting(out) <= 1);
    CHECK(testgen::literals_conserved(out, s.to_formula()));
    CHECK(trace.stages.size() == 3);
    // The ternary predicate makes exhaustive size-3 enumeration infeasible
    // (2^45 structures), so the oracle samples there and stays exhaustive at
    // sizes 1-2.
    testgen::SentenceGen gen(5150);
    CHECK(testgen::equiv_oracle(s.to_formula(), out, 3, gen));
}

TEST_CASE("gaf_unnest per-stage snapshots stay equivalent") {
    auto s = normalize_standard_form(parse(kPhi1));
    auto a = analyze_gaf(s);
    UnnestTrace trace;
    gaf_unnest(s, a, &trace);
    testgen::SentenceGen gen(5151);
    for (const auto& st : trace.stages) {
        FormulaPtr closed = st.stage_matrix;
        for (int k = st.j - 1; k >= 1; --k) {
            closed = Formula::exists(s.ybar(k), closed);
            closed = Formula::forall(s.xbar(k), closed);
        }
        CHECK(testgen::equiv_oracle(s.to_formula(), closed, 2, gen));
    }
}

TEST_CASE("gaf_unnest leaves a single-universal sentence intact") {
    auto s = normalize_standard_form(parse("forall X. p(X)"));
    auto a = analyze_gaf(s);
    REQUIRE(a.is_gaf);
    auto out = gaf_unnest(s, a);
    CHECK(formula_equal(out, s.to_formula()));
}

TEST_CASE("gaf_unnest on an Ackermann sentence") {
    auto s = normalize_standard_form(parse("exists Y. forall X. exists Z. (p(Y,X) & q(X,Z))"));
    auto a = analyze_gaf(s);
    REQUIRE(a.is_gaf);
    auto out = gaf_unnest(s, a);
    CHECK(testgen::max_forall_nesting(out) <= 1);
    CHECK(check_equivalence(s.to_formula(), out, 3).pass);
}

TEST_CASE("gaf_unnest rejects non-GAF input") {
    auto s = normalize_standard_form(parse("forall X. forall Z. p(X,Z)"));
    auto a = analyze_gaf(s);
    REQUIRE_FALSE(a.is_gaf);
    CHECK_THROWS_AS(gaf_unnest(s, a), NotGAF);
}

TEST_CASE("skolemize golden examples") {
    SECTION("single universal dependency") {
        auto f = parse("forall X. exists Y. p(X,Y)");
        auto sk = skolemize(f);
        REQUIRE(sk.prefix == std::vector<std::string>{"X"});
        CHECK(serialize(sk.matrix) == "p(X,sk1(X))");
        REQUIRE(sk.symbols.size() == 1);
        CHECK(sk.symbols.at("sk1") == "Y");
    }
    SECTION("leading existential becomes a constant") {
        auto f = parse("exists Y. forall X. p(X,Y)");
        auto sk = skolemize(f);
        CHECK(serialize(sk.matrix) == "p(X,sk1)");
        CHECK(signature_of(*sk.matrix).constants.count("sk1") == 1);
    }
    SECTION("existing sk-names are skipped") {
        auto f = parse("forall X. exists Y. p(sk1(X), Y)");
        auto sk = skolemize(f);
        REQUIRE(sk.symbols.size() == 1);
        CHECK(sk.symbols.begin()->first == "sk2");
    }
    SECTION("open input is rejected") {
        CHECK_THROWS_AS(skolemize(parse("exists Y. p(X,Y)")), FoltError);
    }
}

TEST_CASE("skolemize the golden GAF sentence directly yields binary terms") {
    auto s = normalize_standard_form(parse(kPhi1));
    auto sk = skolemize(s.to_formula());
    auto rep = check_skolem_shape(sk);
    CHECK_FALSE(rep.unary_functions_only);  // g(X,Z)-style Skolem terms
    CHECK_FALSE(rep.atoms_single_variable);
    bool has_binary = false;
    for (const auto& [name, var] : sk.symbols) {
        auto sig = signature_of(*sk.matrix);
        auto it = sig.functions.find(name);
        if (it != sig.functions.end() && it->second == 2) has_binary = true;
    }
    CHECK(has_binary);
}

TEST_CASE("un-nesting then skolemizing the golden GAF sentence gives flat terms") {
    auto s = normalize_standard_form(parse(kPhi1));
    auto a = analyze_gaf(s);
    auto out = gaf_unnest(s, a);
    auto sk = skolemize(out);
    auto rep = check_skolem_shape(sk);
    CHECK(rep.unary_functions_only);
    CHECK(rep.atoms_single_variable);
    CHECK(rep.terms_flat);
    Signature sig = signature_of(*sk.matrix);
    for (const auto& [name, arity] : sig.functions) CHECK(arity == 1);
}

TEST_CASE("check_skolem_shape witnesses") {
    SECTION("wide function") {
        SkolemSentence s{{"X"}, parse("p(g(X,X))"), {}};
        auto rep = check_skolem_shape(s);
        CHECK_FALSE(rep.unary_functions_only);
        CHECK(rep.witness_function == "g");
        CHECK_FALSE(rep.terms_flat);
    }
    SECTION("two variables in one atom") {
        SkolemSentence s{{"X", "Z"}, parse("p(X,Z)"), {}};
        auto rep = check_skolem_shape(s);
        CHECK(rep.unary_functions_only);
        CHECK_FALSE(rep.atoms_single_variable);
        CHECK(rep.witness_atom == "p(X,Z)");
    }
    SECTION("nested unary term violates flatness only") {
        SkolemSentence s{{"X"}, parse("p(f(f(X)))"), {}};
        auto rep = check_skolem_shape(s);
        CHECK(rep.unary_functions_only);
        CHECK(rep.atoms_single_variable);
        CHECK_FALSE(rep.terms_flat);
        CHECK(rep.witness_term == "f(f(X))");
    }
}

TEST_CASE("gaf_unnest property suite on random GAF sentences") {
    testgen::SentenceGen gen(977);
    testgen::GenConfig cfg;
    cfg.max_block_pairs = 2;
    cfg.max_vars_per_block = 2;
    cfg.max_atoms = 5;
    cfg.num_preds = 2;
    cfg.max_pred_arity = 2;
    cfg.at_most_one_universal_per_atom = true;
    int tested = 0, flat_pipelines = 0;
    for (int i = 0; i < 200 && tested < 50; ++i) {
        auto s = gen.sentence(cfg);
        auto a = analyze_gaf(s);
        if (!a.is_gaf) continue;
        ++tested;
        FormulaPtr out;
        try {
            out = gaf_unnest(s, a);
        } catch (const SizeGuardExceeded&) {
            continue;
        }
        CHECK(free_vars(*out).empty());
        CHECK(testgen::max_forall_nesting(out) <= 1);
        CHECK(testgen::literals_conserved(out, s.to_formula()));
        CHECK(testgen::equiv_oracle(s.to_formula(), out, 3, gen));

        // Skolem-shape lemma on the equality-free pipeline.
        auto sk = skolemize(out);
        auto rep = check_skolem_shape(sk);
        CHECK(rep.unary_functions_only);
        CHECK(rep.atoms_single_variable);
        CHECK(rep.terms_flat);
        if (rep.all_ok()) ++flat_pipelines;
    }
    CHECK(tested >= 40);
    CHECK(flat_pipelines == tested);
}

TEST_CASE("skolemize preserves satisfiability per domain size") {
    testgen::SentenceGen gen(978);
    testgen::GenConfig cfg;
    cfg.max_block_pairs = 2;
    cfg.max_vars_per_block = 1;
    cfg.max_atoms = 4;
    cfg.num_preds = 2;
    cfg.max_pred_arity = 2;
    auto satisfiable_at = [](const FormulaPtr& f, int m) {
        Signature sig = signature_of(*f);
        StructureEnumerator en(sig, m);
        while (auto A = en.next())
            if (evaluate(*A, *f)) return true;
        return false;
    };
    int checked = 0;
    for (int i = 0; i < 40 && checked < 25; ++i) {
        auto s = gen.sentence(cfg);
        auto f = s.to_formula();
        auto sk = skolemize(f);
        // Keep the output structure space enumerable.
        Signature out_sig = signature_of(*sk.matrix);
        if (testgen::structure_count(out_sig, 3) > 2000000) continue;
        ++checked;
        for (int m = 1; m <= 3; ++m)
            CHECK(satisfiable_at(f, m) == satisfiable_at(sk.to_formula(), m));
    }
    CHECK(checked >= 15);
}
