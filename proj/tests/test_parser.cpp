#include <catch2/catch_amalgamated.hpp>

#include "folt/parse.hpp"
#include "support/gen.hpp"

using namespace folt;

namespace {
const char* kPhi1 =
    "exists U. forall X. exists V. forall Z. exists Y1. exists Y2. "
    "((~p(U,X) | (q(X,V) & r(U,Z,Y1))) & (p(U,X) | (~q(X,V) & ~r(U,Z,Y2))))";
}

TEST_CASE("parse basic quantified atom") {
    auto f = parse("forall X. p(X)");
    REQUIRE(f->kind == FormulaKind::Forall);
    CHECK(f->vars == std::vector<std::string>{"X"});
    REQUIRE(f->kids[0]->kind == FormulaKind::Atom);
    CHECK(f->kids[0]->pred == "p");
}

TEST_CASE("parse the six-quantifier worked example") {
    auto f = parse(kPhi1);
    // outermost: exists U
    REQUIRE(f->kind == FormulaKind::Exists);
    CHECK(f->vars == std::vector<std::string>{"U"});
    Signature sig = signature_of(*f);
    CHECK(sig.predicates.at("p") == 2);
    CHECK(sig.predicates.at("q") == 2);
    CHECK(sig.predicates.at("r") == 3);
    CHECK(sig.functions.empty());
    CHECK_FALSE(sig.has_equality);
}

TEST_CASE("parse rejects inconsistent arities") {
    CHECK_THROWS_AS(parse("p(X) & p(X,Y)"), FoltError);
}

TEST_CASE("parse reports syntax errors with position") {
    try {
        parse("forall . p(X)");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 1);
        CHECK(e.col >= 8);
    }
}

TEST_CASE("parse handles sugar, comments, equality") {
    auto f = parse("% a comment\nforall X. (p(X) -> q(X))");
    REQUIRE(f->kind == FormulaKind::Forall);
    CHECK(f->kids[0]->kind == FormulaKind::Or);  // ~p | q

    auto g = parse("forall X. (p(X) <-> q(X))");
    CHECK(g->kids[0]->kind == FormulaKind::And);

    auto h = parse("forall X. c = X");
    REQUIRE(h->kids[0]->kind == FormulaKind::Equality);
    CHECK(h->kids[0]->args[0] == Term::cst("c"));

    auto i = parse("forall X. f(X) = g(X,X)");
    REQUIRE(i->kids[0]->kind == FormulaKind::Equality);
    CHECK(i->kids[0]->args[0].kind == TermKind::App);
}

TEST_CASE("serialize emits stable parenthesization") {
    auto f = Formula::disj({Formula::atom("a", {}), Formula::atom("b", {}),
                            Formula::atom("c", {})});
    CHECK(serialize(f) == "(a | b | c)");
    CHECK(serialize(parse("forall X. p(X)")) == "forall X. p(X)");
}

TEST_CASE("parse then serialize round-trips on random sentences") {
    testgen::SentenceGen gen(3);
    testgen::GenConfig cfg;
    cfg.num_consts = 2;
    for (int i = 0; i < 100; ++i) {
        auto s = gen.sentence(cfg);
        auto f = s.to_formula();
        auto f2 = parse(serialize(f));
        CHECK(formula_equal(f, f2));
    }
}

TEST_CASE("serialize of a parsed canonical text round-trips structurally") {
    const char* phi2 =
        "exists U. forall X. exists Y. forall Z. "
        "((p(U,Z) & q(U,X)) | (p(Y,Z) & q(U,Y)))";
    auto a = parse(phi2);
    auto b = parse(serialize(a));
    CHECK(formula_equal(a, b));
}
