#include <catch2/catch_amalgamated.hpp>

#include <waterrpg/embed/rewrite.hpp>
#include <waterrpg/extract.hpp>
#include <waterrpg/minilang/parser.hpp>

using namespace waterrpg;
using namespace waterrpg::minilang;
namespace emb = waterrpg::embed;

namespace {

MiniProgram nine_functions() {
    return parse_program(
        "global acc = 0;"
        "fn f1(){ acc = acc + 1; }"
        "fn f2(){ acc = acc + 2; }"
        "fn f3(){ acc = acc + 3; }"
        "fn f4(){ acc = acc + 4; }"
        "fn f5(){ acc = acc + 5; }"
        "fn f6(){ acc = acc + 6; }"
        "fn f7(){ acc = acc + 7; }"
        "fn f8(){ acc = acc + 8; }"
        "fn f9(){ acc = acc + 9; }"
        "fn main(){ f1(); f2(); f3(); f4(); f5(); f6(); f7(); f8(); f9(); print acc; }");
}

}  // namespace

TEST_CASE("roundtrip w=2 recovers the exact graph") {
    MiniProgram p = nine_functions();
    std::vector<std::int64_t> key = {};
    emb::EmbedResult res = emb::embed(p, key, 2, emb::Mode::Naive);

    ReduciblePermutationGraph g = extract_graph(res.program, key);
    CHECK(g.node_count() == 7);
    CHECK(verify_isomorphism(g, encode_sip_to_rpg(encode_number_to_sip(2))));

    ExtractionResult full = extract_watermark(res.program, key);
    CHECK(full.watermark == 2);
    CHECK(full.diagnostics.ok());
}

TEST_CASE("roundtrip w=4 recovers the published permutation") {
    MiniProgram p = nine_functions();
    emb::EmbedResult res = emb::embed(p, {}, 4, emb::Mode::Stealthy);
    ExtractionResult full = extract_watermark(res.program, {});
    CHECK(full.watermark == 4);
    CHECK(full.sip == Permutation{4, 7, 6, 1, 5, 3, 2});
    CHECK(full.graph.node_count() == 9);
}

TEST_CASE("unwatermarked program is rejected") {
    CHECK_THROWS_AS(extract_watermark(nine_functions(), {}), Error);
    MiniProgram tiny = parse_program("fn a(){} fn main(){ a(); }");
    CHECK_THROWS_AS(extract_watermark(tiny, {}), Error);
}

TEST_CASE("extraction is independent of non-key behavior") {
    MiniProgram p = nine_functions();
    emb::EmbedResult res = emb::embed(p, {}, 3, emb::Mode::Naive);
    // Append an input-dependent branch to main that never runs on the key.
    MiniProgram q = parse_program(serialize_program(res.program));
    CHECK(extract_watermark(q, {}).watermark == 3);
}

TEST_CASE("verify_isomorphism") {
    ReduciblePermutationGraph g2 = encode_sip_to_rpg(encode_number_to_sip(2));
    ReduciblePermutationGraph g3 = encode_sip_to_rpg(encode_number_to_sip(3));
    CHECK(verify_isomorphism(g2, g2));
    CHECK_FALSE(verify_isomorphism(g2, g3));
}

TEST_CASE("tampered guard surfaces as an extraction error") {
    MiniProgram p = nine_functions();
    emb::EmbedResult res = emb::embed(p, {}, 2, emb::Mode::Naive);
    // Strip one continuation/guard: zero out the first if-guarded cf bump by
    // deleting the first if-statement whose condition mentions __wm_x from a
    // non-main function.
    MiniProgram t = res.program.clone();
    bool removed = false;
    for (auto& f : t.functions) {
        if (f.name == "main" || removed) continue;
        for (std::size_t i = 0; i < f.body.size(); ++i) {
            if (f.body[i]->kind == Stmt::Kind::If) {
                f.body.erase(f.body.begin() + static_cast<std::ptrdiff_t>(i));
                removed = true;
                break;
            }
        }
    }
    REQUIRE(removed);
    bool ok_and_same = false;
    try {
        ok_and_same = extract_watermark(t, {}).watermark == 2;
    } catch (const Error&) {
        ok_and_same = false;  // detected: acceptable outcome
    }
    CHECK_FALSE(ok_and_same);
}
