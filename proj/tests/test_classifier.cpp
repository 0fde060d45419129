#include <catch2/catch_amalgamated.hpp>

#include "folt/classify.hpp"
#include "folt/parse.hpp"
#include "support/gen.hpp"

using namespace folt;

namespace {

const char* kPhi1 =
    "exists U. forall X. exists V. forall Z. exists Y1. exists Y2. "
    "((~p(U,X) | (q(X,V) & r(U,Z,Y1))) & (p(U,X) | (~q(X,V) & ~r(U,Z,Y2))))";

const char* kPhi2 =
    "exists U. forall X. exists Y. forall Z. "
    "((p(U,Z) & q(U,X)) | (p(Y,Z) & q(U,Y)))";

std::vector<std::vector<FormulaPtr>> derived_partition(const GbsrAnalysis& a) {
    std::vector<std::vector<FormulaPtr>> partition(a.atom_partition.size());
    for (std::size_t k = 0; k < a.atom_partition.size(); ++k)
        for (int i : a.atom_partition[k]) partition[k].push_back(a.atoms[i]);
    return partition;
}

GafPartition derived_gaf_partition(const GafAnalysis& a) {
    GafPartition p;
    auto atoms_of = [&](const std::set<int>& occs) {
        std::vector<FormulaPtr> out;
        for (int i : occs) {
            bool dup = false;
            for (const auto& at : out)
                if (formula_equal(at, a.literals[i].atom)) dup = true;
            if (!dup) out.push_back(a.literals[i].atom);
        }
        return out;
    };
    p.at0 = atoms_of(a.L0);
    for (const auto& [x, lx] : a.Lx) p.atx[x] = atoms_of(lx);
    return p;
}

void check_gbsr_lemma_items(const GbsrAnalysis& a) {
    const auto& s = a.sentence;
    const int n = s.n();
    // residual sets partition the literal occurrences
    std::set<int> all;
    std::size_t total = 0;
    for (const auto& part : a.L_res) {
        total += part.size();
        all.insert(part.begin(), part.end());
    }
    CHECK(total == a.literals.size());
    CHECK(all.size() == a.literals.size());
    // X_res pairwise disjoint
    for (int i = 0; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            for (const auto& v : a.X_res[i]) CHECK_FALSE(a.X_res[j].count(v));
    // vars(L_res[k]) existential part within the first k blocks
    for (int k = 0; k <= n; ++k) {
        std::set<std::string> early;
        for (int l = 1; l <= k; ++l) early.insert(s.ybar(l).begin(), s.ybar(l).end());
        std::set<std::string> yall;
        for (const auto& b : s.y_blocks) yall.insert(b.begin(), b.end());
        for (int i : a.L_res[k])
            for (const auto& v : a.lit_vars[i])
                if (yall.count(v)) CHECK(early.count(v));
    }
    if (a.is_gbsr) {
        // X_res[k] only contains universal variables from later blocks
        for (int k = 0; k <= n; ++k) {
            std::set<std::string> late;
            for (int l = k + 1; l <= n; ++l) late.insert(s.xbar(l).begin(), s.xbar(l).end());
            for (const auto& v : a.X_res[k]) CHECK(late.count(v));
        }
    }
}

void check_gaf_lemma_items(const GafAnalysis& a) {
    const auto& s = a.sentence;
    const int n = s.n();
    std::set<std::string> xset;
    for (const auto& b : s.x_blocks) xset.insert(b.begin(), b.end());
    auto vars_of = [&](const std::set<int>& occs) {
        return detail::vars_of_literals(a.lit_vars, occs);
    };
    // the L_x together with L_0 partition the occurrences
    std::set<int> all = a.L0;
    std::size_t total = a.L0.size();
    for (const auto& [x, lx] : a.Lx) {
        total += lx.size();
        all.insert(lx.begin(), lx.end());
        // pairwise disjoint
        for (const auto& [x2, lx2] : a.Lx) {
            if (x2 == x) continue;
            for (int i : lx) CHECK_FALSE(lx2.count(i));
        }
        if (!lx.empty()) {
            // vars(L_x) meets the universal variables in exactly {x}
            std::set<std::string> lxx;
            for (const auto& v : vars_of(lx))
                if (xset.count(v)) lxx.insert(v);
            CHECK(lxx == std::set<std::string>{x});
        }
    }
    CHECK(total == a.literals.size());
    CHECK(all.size() == a.literals.size());
    // Y_x disjoint from vars(L_0) and from vars(L_x') for idx(x) <= idx(x')
    std::set<std::string> v0 = vars_of(a.L0);
    for (const auto& [x, yx] : a.Yx) {
        for (const auto& y : yx) CHECK_FALSE(v0.count(y));
        for (const auto& [x2, lx2] : a.Lx) {
            if (x2 == x || a.idx.at(x) > a.idx.at(x2)) continue;
            std::set<std::string> v2 = vars_of(lx2);
            for (const auto& y : yx) CHECK_FALSE(v2.count(y));
        }
    }
    // refinement properties
    std::set<std::string> yall;
    for (const auto& b : s.y_blocks) yall.insert(b.begin(), b.end());
    for (const auto& [x, parts] : a.Lxk) {
        const auto& lx = a.Lx.at(x);
        std::set<int> seen;
        std::size_t count = 0;
        for (const auto& [k, part] : parts) {
            for (int i : part) CHECK(lx.count(i));  // L_{x,k} within L_x
            count += part.size();
            seen.insert(part.begin(), part.end());
            std::set<std::string> vs = vars_of(part);
            int bound = k > 0 ? k : a.idx.at(x) - 1;
            std::set<std::string> early;
            for (int l = 1; l <= bound; ++l)
                early.insert(s.ybar(l).begin(), s.ybar(l).end());
            for (const auto& v : vs)
                if (yall.count(v)) CHECK(early.count(v));
        }
        // pairwise disjoint and exhaustive
        CHECK(count == lx.size());
        CHECK(seen == lx);
    }
    (void)n;
}

}  // namespace

TEST_CASE("analyze_gbsr on the golden sentences") {
    auto s1 = normalize_standard_form(parse(kPhi1));
    auto a1 = analyze_gbsr(s1);
    CHECK_FALSE(a1.is_gbsr);
    REQUIRE(a1.witness_literal >= 0);
    CHECK(formula_equal(a1.literals[a1.witness_literal].atom, parse("q(X,V)")));

    auto s2 = normalize_standard_form(parse(kPhi2));
    auto a2 = analyze_gbsr(s2);
    CHECK(a2.is_gbsr);
}

TEST_CASE("analyze_gbsr trivial example") {
    auto s = normalize_standard_form(parse("forall X. p(X)"));
    auto a = analyze_gbsr(s);
    CHECK(a.is_gbsr);
    REQUIRE(a.components.size() == 1);
    CHECK(a.components[0] == std::set<std::string>{"X"});
    CHECK(a.L_res[0].size() == 1);  // the single literal sits in the residual class 0
}

TEST_CASE("analyze_gbsr rejects non-constant functions") {
    auto s = normalize_standard_form(parse("forall X. p(f(X))"));
    CHECK_THROWS_AS(analyze_gbsr(s), FunctionsNotAllowed);
}

TEST_CASE("gbsr_axiomatic_witness on derived and degenerate partitions") {
    auto s2 = normalize_standard_form(parse(kPhi2));
    auto a2 = analyze_gbsr(s2);
    REQUIRE(a2.is_gbsr);
    CHECK(gbsr_axiomatic_witness(s2, derived_partition(a2)));

    // all atoms in At_0 violates condition (i): existential variables in At_0
    std::vector<std::vector<FormulaPtr>> coarse(s2.n() + 1);
    coarse[0] = a2.atoms;
    CHECK_FALSE(gbsr_axiomatic_witness(s2, coarse));

    // malformed partitions
    std::vector<std::vector<FormulaPtr>> missing(s2.n() + 1);
    CHECK_THROWS_AS(gbsr_axiomatic_witness(s2, missing), NotAPartition);
}

TEST_CASE("gbsr_axiomatic_search finds no partition for the first golden sentence") {
    auto s1 = normalize_standard_form(parse(kPhi1));
    CHECK_FALSE(gbsr_axiomatic_search(s1).has_value());
    auto s2 = normalize_standard_form(parse(kPhi2));
    CHECK(gbsr_axiomatic_search(s2).has_value());
}

TEST_CASE("degree on monadic partitions") {
    auto s = normalize_standard_form(
        parse("forall X1. exists Y1. forall X2. exists Y2. forall X3. exists Y3. "
              "((p(X1) | q(Y1)) & (p(X2) | q(Y2)) & (p(X3) | q(Y3)))"));
    REQUIRE(s.n() == 3);
    auto at = [&](const char* t) { return parse(t); };
    // fine partition: universal atoms assigned to the class just before
    // their block, existential atoms to the earliest admissible class
    std::vector<std::vector<FormulaPtr>> fine(4);
    fine[0] = {at("p(X1)")};
    fine[1] = {at("p(X2)"), at("q(Y1)")};
    fine[2] = {at("p(X3)"), at("q(Y2)")};
    fine[3] = {at("q(Y3)")};
    CHECK(degree(s, fine) == 0);

    // coarse two-part partition: all universal atoms in At_0
    std::vector<std::vector<FormulaPtr>> coarse(4);
    coarse[0] = {at("p(X1)"), at("p(X2)"), at("p(X3)")};
    coarse[3] = {at("q(Y1)"), at("q(Y2)"), at("q(Y3)")};
    CHECK(degree(s, coarse) == 2);
    CHECK(degree(s, coarse) > degree(s, fine));

    auto s1 = normalize_standard_form(parse("forall X. exists Y. (p(X) | q(Y))"));
    std::vector<std::vector<FormulaPtr>> p1(2);
    p1[0] = {parse("p(X)")};
    p1[1] = {parse("q(Y)")};
    CHECK(degree(s1, p1) == 0);

    // invalid partitions are rejected
    std::vector<std::vector<FormulaPtr>> bad(2);
    bad[0] = {parse("q(Y)")};
    bad[1] = {parse("p(X)")};
    CHECK_THROWS_AS(degree(s1, bad), InvalidPartition);
}

TEST_CASE("analyze_gaf on the golden sentences") {
    auto a1 = analyze_gaf(normalize_standard_form(parse(kPhi1)));
    CHECK(a1.is_gaf);
    auto a2 = analyze_gaf(normalize_standard_form(parse(kPhi2)));
    CHECK(a2.is_gaf);

    auto bad = analyze_gaf(normalize_standard_form(parse("forall X. forall Z. p(X,Z)")));
    CHECK_FALSE(bad.is_gaf);
    REQUIRE(bad.witness_atom);
    CHECK(formula_equal(bad.witness_atom, parse("p(X,Z)")));
}

TEST_CASE("gaf_axiomatic_witness examples") {
    auto s1 = normalize_standard_form(parse(kPhi1));
    auto a1 = analyze_gaf(s1);
    REQUIRE(a1.is_gaf);
    CHECK(gaf_axiomatic_witness(s1, derived_gaf_partition(a1)));

    // an Ackermann sentence: all atoms in the class of the one universal var
    auto ack = normalize_standard_form(parse("exists Y. forall X. exists Z. p(Y,X,Z)"));
    GafPartition p;
    p.atx["X"] = {parse("p(Y,X,Z)")};
    CHECK(gaf_axiomatic_witness(ack, p));

    // a (c.2)-variable occurring in two classes is rejected
    auto two = normalize_standard_form(parse("forall X1. forall X2. exists Y. "
                                             "(p(X1,Y) | p(X2,Y))"));
    GafPartition q;
    q.atx["X1"] = {parse("p(X1,Y)")};
    q.atx["X2"] = {parse("p(X2,Y)")};
    CHECK_FALSE(gaf_axiomatic_witness(two, q));
    CHECK_FALSE(analyze_gaf(two).is_gaf);
    CHECK_FALSE(gaf_axiomatic_search(two).has_value());
}

TEST_CASE("classify the golden sentences and simple cases") {
    auto c2 = classify(normalize_standard_form(parse(kPhi2)));
    CHECK(c2.fragments == std::set<std::string>{"GBSR", "GAF"});

    auto c1 = classify(normalize_standard_form(parse(kPhi1)));
    CHECK(c1.fragments == std::set<std::string>{"GAF"});

    auto c3 = classify(normalize_standard_form(parse("exists Y. forall X. (p(Y) & q(X))")));
    CHECK(c3.fragments.count("SF"));
    CHECK(c3.fragments.count("BSR"));
    CHECK(c3.fragments.count("GBSR"));
    CHECK(c3.fragments.count("GAF"));
    CHECK(c3.fragments.count("relational-monadic"));

    auto c4 = classify(normalize_standard_form(parse("forall X. c = X")));
    CHECK(c4.fragments.count("BSR"));
    CHECK(c4.has_equality);
    CHECK_FALSE(c4.has_functions);

    auto c5 = classify(normalize_standard_form(parse("forall X. p(f(X))")));
    CHECK(c5.has_functions);
    CHECK(c5.max_function_arity == 1);
    CHECK_FALSE(c5.fragments.count("BSR"));
    CHECK_FALSE(c5.fragments.count("GBSR"));
}

TEST_CASE("definition agreement between algorithmic and axiomatic GBSR") {
    testgen::SentenceGen gen(101);
    testgen::GenConfig cfg;
    cfg.max_block_pairs = 3;
    cfg.max_atoms = 6;
    for (int i = 0; i < 100; ++i) {
        auto s = gen.sentence(cfg);
        auto a = analyze_gbsr(s);
        auto found = gbsr_axiomatic_search(s);
        CHECK(a.is_gbsr == found.has_value());
        if (a.is_gbsr) CHECK(gbsr_axiomatic_witness(s, derived_partition(a)));
        check_gbsr_lemma_items(a);
    }
}

TEST_CASE("definition agreement between algorithmic and axiomatic GAF") {
    testgen::SentenceGen gen(103);
    testgen::GenConfig cfg;
    cfg.max_block_pairs = 3;
    cfg.max_atoms = 6;
    cfg.at_most_one_universal_per_atom = true;  // mix in likely-GAF inputs
    for (int i = 0; i < 60; ++i) {
        auto s = gen.sentence(cfg);
        auto a = analyze_gaf(s);
        auto found = gaf_axiomatic_search(s);
        CHECK(a.is_gaf == found.has_value());
        if (a.is_gaf) {
            CHECK(gaf_axiomatic_witness(s, derived_gaf_partition(a)));
            check_gaf_lemma_items(a);
        }
    }
    testgen::GenConfig free_cfg;
    free_cfg.max_block_pairs = 2;
    free_cfg.max_atoms = 5;
    for (int i = 0; i < 60; ++i) {
        auto s = gen.sentence(free_cfg);
        auto a = analyze_gaf(s);
        auto found = gaf_axiomatic_search(s);
        CHECK(a.is_gaf == found.has_value());
        if (a.is_gaf) {
            CHECK(gaf_axiomatic_witness(s, derived_gaf_partition(a)));
            check_gaf_lemma_items(a);
        }
    }
}

TEST_CASE("fragment inclusions hold on random sentences") {
    testgen::SentenceGen gen(107);
    std::vector<testgen::GenConfig> cfgs(4);
    cfgs[1].separated_atoms = true;
    cfgs[2].at_most_one_universal_per_atom = true;
    cfgs[3].max_pred_arity = 1;
    int sf_seen = 0, mon_seen = 0, ack_seen = 0, bsr_seen = 0;
    for (int i = 0; i < 200; ++i) {
        auto s = gen.sentence(cfgs[i % 4]);
        auto c = classify(s);
        if (c.fragments.count("SF")) {
            ++sf_seen;
            CHECK(c.fragments.count("GBSR"));
        }
        if (c.fragments.count("BSR")) {
            ++bsr_seen;
            CHECK(c.fragments.count("GBSR"));
        }
        if (c.fragments.count("relational-monadic") && !c.has_equality) {
            ++mon_seen;
            CHECK(c.fragments.count("GAF"));
        }
        if (c.fragments.count("Ackermann")) {
            ++ack_seen;
            CHECK(c.fragments.count("GAF"));
        }
    }
    CHECK(sf_seen >= 10);
    CHECK(mon_seen >= 10);
    CHECK(ack_seen >= 2);
    CHECK(bsr_seen >= 3);
}
