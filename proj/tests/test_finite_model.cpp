#include <catch2/catch_amalgamated.hpp>

#include "folt/parse.hpp"
#include "folt/structure.hpp"
#include "support/gen.hpp"

using namespace folt;

TEST_CASE("evaluate basic universal sentences") {
    FiniteStructure A;
    A.size = 1;
    A.predicates["p"] = {{0}};
    CHECK(evaluate(A, parse("forall X. p(X)")));

    FiniteStructure B;
    B.size = 2;
    B.predicates["p"] = {{0}};
    CHECK_FALSE(evaluate(B, parse("forall X. p(X)")));
    CHECK(evaluate(B, parse("exists X. p(X)")));
}

TEST_CASE("evaluate the all-true size-1 structure satisfies positive matrices") {
    const char* phi2 =
        "exists U. forall X. exists Y. forall Z. "
        "((p(U,Z) & q(U,X)) | (p(Y,Z) & q(U,Y)))";
    FiniteStructure A;
    A.size = 1;
    A.predicates["p"] = {{0, 0}};
    A.predicates["q"] = {{0, 0}};
    CHECK(evaluate(A, parse(phi2)));
}

TEST_CASE("evaluate missing interpretation raises") {
    FiniteStructure A;
    A.size = 1;
    CHECK_THROWS_AS(evaluate(A, parse("forall X. p(X)")), MissingInterpretation);
}

TEST_CASE("enumerate_structures counts") {
    Signature s1;
    s1.add_predicate("p", 1);
    int count = 0;
    StructureEnumerator e1(s1, 1);
    while (e1.next()) ++count;
    CHECK(count == 2);

    Signature s2 = s1;
    s2.constants.insert("a");
    count = 0;
    StructureEnumerator e2(s2, 2);
    while (e2.next()) ++count;
    CHECK(count == 8);  // 2^2 relations * 2 constants

    Signature s3;
    s3.add_predicate("r", 2);
    count = 0;
    StructureEnumerator e3(s3, 2);
    while (e3.next()) ++count;
    CHECK(count == 16);

    Signature s4;
    s4.add_function("f", 1);
    count = 0;
    StructureEnumerator e4(s4, 2);
    while (e4.next()) ++count;
    CHECK(count == 4);  // 2^2 unary function tables
}

TEST_CASE("enumerate_structures budget") {
    Signature s;
    s.add_predicate("r", 2);
    StructureEnumerator e(s, 2, 5);
    CHECK_THROWS_AS([&] { while (e.next()) {} }(), BudgetExceeded);
}

TEST_CASE("decide_bsr on simple sentences") {
    auto sat = normalize_standard_form(parse("exists Y. forall X. p(Y)"));
    auto v1 = decide_bsr(sat);
    REQUIRE(v1.kind == Verdict::Sat);
    CHECK(v1.model->size == 1);
    CHECK(evaluate(*v1.model, sat));

    auto unsat = normalize_standard_form(parse("exists Y. forall X. (p(Y) & ~p(X))"));
    CHECK(decide_bsr(unsat).kind == Verdict::Unsat);

    auto with_fn = normalize_standard_form(parse("forall X. p(f(X))"));
    CHECK_THROWS_AS(decide_bsr(with_fn), NotBSR);
    auto wrong_prefix = normalize_standard_form(parse("forall X. exists Y. p(X,Y)"));
    CHECK_THROWS_AS(decide_bsr(wrong_prefix), NotBSR);
}

TEST_CASE("decide_bounded") {
    auto contradiction = parse("forall X. (p(X) & ~p(X))");
    auto v = decide_bounded(contradiction, 2);
    CHECK(v.kind == Verdict::UnsatAtBound);
    CHECK(v.bound == 2);

    auto prop = parse("p & ~p");
    CHECK(decide_bounded(prop, 3).kind == Verdict::UnsatAtBound);

    auto fn_sat = parse("forall X. p(X,f(X))");
    auto v2 = decide_bounded(fn_sat, 2);
    REQUIRE(v2.kind == Verdict::Sat);
    CHECK(evaluate(*v2.model, fn_sat));
}

TEST_CASE("check_equivalence finds counterexamples") {
    auto r = check_equivalence(parse("forall X. p(X)"), parse("exists X. p(X)"), 2);
    REQUIRE_FALSE(r.pass);
    CHECK(r.counterexample->size == 2);

    auto ok = check_equivalence(parse("forall X. (p(X) | q(X))"),
                                parse("forall X. (q(X) | p(X))"), 3);
    CHECK(ok.pass);
}

TEST_CASE("induced_substructure restriction and closure errors") {
    FiniteStructure A;
    A.size = 3;
    A.predicates["p"] = {{0, 1}, {1, 2}, {2, 0}};
    auto B = induced_substructure(A, {0, 1});
    CHECK(B.size == 2);
    CHECK(B.predicates["p"] == std::set<std::vector<int>>{{0, 1}});

    FiniteStructure C = A;
    C.constants["c"] = 2;
    CHECK_THROWS_AS(induced_substructure(C, {0, 1}), NotClosedUnderFunctions);

    FiniteStructure D = A;
    D.functions["f"] = {1, 2, 0};
    D.function_arity["f"] = 1;
    CHECK_THROWS_AS(induced_substructure(D, {0, 1}), NotClosedUnderFunctions);
    auto E = induced_substructure(D, {0, 1, 2});
    CHECK(E.size == 3);
}

TEST_CASE("substructure lemma: closed subsets of models of universal sentences") {
    testgen::SentenceGen gen(17);
    testgen::GenConfig cfg;
    cfg.max_block_pairs = 1;  // universal prefix only
    cfg.num_preds = 2;
    cfg.max_pred_arity = 2;
    cfg.max_atoms = 4;
    int tested = 0;
    for (int i = 0; i < 2000 && tested < 60; ++i) {
        auto s = gen.sentence(cfg);
        // force a purely universal sentence
        bool universal = true;
        for (const auto& b : s.y_blocks) universal &= b.empty();
        if (!universal) continue;
        Signature sig = signature_of(s);
        if (!sig.constants.empty()) continue;  // keep the signature relational
        FiniteStructure A = gen.structure(sig, 4);
        if (!evaluate(A, s)) continue;
        ++tested;
        // every nonempty subset is closed (relational signature)
        for (int mask = 1; mask < 16; ++mask) {
            std::set<int> subset;
            for (int e = 0; e < 4; ++e)
                if (mask & (1 << e)) subset.insert(e);
            auto B = induced_substructure(A, subset);
            CHECK(evaluate(B, s));
        }
    }
    CHECK(tested >= 20);
}

TEST_CASE("structure JSON round-trip") {
    FiniteStructure A;
    A.size = 3;
    A.predicates["p"] = {{0, 1}, {2, 2}};
    A.constants["c"] = 1;
    A.functions["f"] = {1, 2, 0};
    A.function_arity["f"] = 1;
    auto j = structure_to_json(A);
    auto B = structure_from_json(j);
    CHECK(A == B);
    CHECK(j["universe_size"] == 3);
}
