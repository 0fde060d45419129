#include <catch2/catch_amalgamated.hpp>

#include "folt/parse.hpp"
#include "folt/structure.hpp"
#include "folt/to_bsr.hpp"
#include "support/checks.hpp"
#include "support/gen.hpp"

using namespace folt;

namespace {

const char* kPhi2 =
    "exists U. forall X. exists Y. forall Z. "
    "((p(U,Z) & q(U,X)) | (p(Y,Z) & q(U,Y)))";

bool is_bsr_shape(const StandardFormSentence& s) {
    bool universal_seen = false;
    for (int k = 1; k <= s.n(); ++k) {
        if (!s.ybar(k).empty() && universal_seen) return false;
        if (!s.xbar(k).empty()) universal_seen = true;
    }
    return true;
}

int count_vars(const std::vector<std::vector<std::string>>& blocks) {
    int c = 0;
    for (const auto& b : blocks) c += static_cast<int>(b.size());
    return c;
}

}  // namespace

TEST_CASE("gbsr_to_bsr on the golden GBSR sentence") {
    auto s = normalize_standard_form(parse(kPhi2));
    auto a = analyze_gbsr(s);
    REQUIRE(a.is_gbsr);
    TransformTrace trace;
    auto out = gbsr_to_bsr(s, a, &trace);
    CHECK(is_bsr_shape(out));
    CHECK(count_vars(out.y_blocks) == 2);
    CHECK(count_vars(out.x_blocks) == 3);
    CHECK(check_equivalence(s.to_formula(), out.to_formula(), 3).pass);
    CHECK(testgen::literals_conserved(out.to_formula(), s.to_formula()));
    CHECK(trace.stages.size() == 3);
}

TEST_CASE("gbsr_to_bsr per-stage snapshots stay equivalent") {
    auto s = normalize_standard_form(parse(kPhi2));
    auto a = analyze_gbsr(s);
    TransformTrace trace;
    gbsr_to_bsr(s, a, &trace);
    for (const auto& st : trace.stages) {
        // close the stage matrix with the not-yet-processed prefix blocks
        FormulaPtr closed = st.stage_matrix;
        for (int k = st.j - 1; k >= 1; --k) {
            closed = Formula::exists(s.ybar(k), closed);
            closed = Formula::forall(s.xbar(k), closed);
        }
        CHECK(check_equivalence(s.to_formula(), closed, 2).pass);
    }
}

TEST_CASE("gbsr_to_bsr leaves BSR sentences intact up to renaming") {
    auto s = normalize_standard_form(parse("exists Y. forall X. (p(Y) & q(X))"));
    auto a = analyze_gbsr(s);
    REQUIRE(a.is_gbsr);
    auto out = gbsr_to_bsr(s, a);
    CHECK(is_bsr_shape(out));
    CHECK(count_vars(out.y_blocks) == 1);
    CHECK(count_vars(out.x_blocks) == 1);
    CHECK(check_equivalence(s.to_formula(), out.to_formula(), 3).pass);
}

TEST_CASE("gbsr_to_bsr rejects non-GBSR input") {
    auto s = normalize_standard_form(parse("forall X. exists Y. p(X,Y)"));
    auto a = analyze_gbsr(s);
    REQUIRE_FALSE(a.is_gbsr);
    CHECK_THROWS_AS(gbsr_to_bsr(s, a), NotGBSR);
}

TEST_CASE("gbsr_to_bsr ground and single-block edge cases") {
    auto g = normalize_standard_form(parse("p(a) | ~q(a)"));
    auto out = gbsr_to_bsr(g, analyze_gbsr(g));
    CHECK(out.n() == 0);
    CHECK(check_equivalence(g.to_formula(), out.to_formula(), 2).pass);

    auto u = normalize_standard_form(parse("forall X1. forall X2. (p(X1) | q(X2))"));
    auto out2 = gbsr_to_bsr(u, analyze_gbsr(u));
    CHECK(is_bsr_shape(out2));
    CHECK(check_equivalence(u.to_formula(), out2.to_formula(), 3).pass);
}

TEST_CASE("gbsr_to_bsr property suite on random GBSR sentences") {
    testgen::SentenceGen gen(211);
    testgen::GenConfig cfg;
    cfg.max_block_pairs = 2;
    cfg.max_vars_per_block = 2;
    cfg.max_atoms = 5;
    cfg.num_preds = 2;
    cfg.max_pred_arity = 2;
    cfg.separated_atoms = true;  // bias toward SF, hence GBSR
    int tested = 0;
    for (int i = 0; i < 120 && tested < 40; ++i) {
        auto s = gen.sentence(cfg);
        auto a = analyze_gbsr(s);
        if (!a.is_gbsr) continue;
        ++tested;
        StandardFormSentence out;
        try {
            out = gbsr_to_bsr(s, a);
        } catch (const SizeGuardExceeded&) {
            continue;
        }
        CHECK(is_bsr_shape(out));
        CHECK(testgen::literals_conserved(out.to_formula(), s.to_formula()));
        CHECK(check_equivalence(s.to_formula(), out.to_formula(), 3).pass);
    }
    CHECK(tested >= 30);
}
