#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <waterrpg/sip.hpp>

using namespace waterrpg;

TEST_CASE("encode anchors") {
    CHECK(encode_number_to_sip(2) == Permutation{3, 5, 1, 4, 2});
    CHECK(encode_number_to_sip(4) == Permutation{4, 7, 6, 1, 5, 3, 2});
    CHECK(encode_number_to_sip(3) == Permutation{3, 4, 1, 2, 5});
    CHECK(encode_number_to_sip(1) == Permutation{2, 1, 3});
}

TEST_CASE("decode anchors") {
    CHECK(decode_sip_to_number({3, 5, 1, 4, 2}) == 2);
    CHECK(decode_sip_to_number({4, 7, 6, 1, 5, 3, 2}) == 4);
    CHECK(decode_sip_to_number({2, 1, 3}) == 1);
}

TEST_CASE("involution predicate") {
    CHECK(is_self_inverting({4, 7, 6, 1, 5, 3, 2}));
    CHECK(is_self_inverting({1, 2, 3}));
    CHECK_FALSE(is_self_inverting({2, 3, 1}));
    CHECK_THROWS_AS(is_self_inverting({1, 1, 3}), Error);  // not a permutation
}

TEST_CASE("encode rejects nonpositive") { CHECK_THROWS_AS(encode_number_to_sip(0), Error); }

TEST_CASE("decode rejects non-images") {
    // Involution but partner of position 1 does not exceed n: not an encoder image.
    CHECK_THROWS_AS(decode_sip_to_number({1, 2, 3}), Error);
    // Not an involution.
    CHECK_THROWS_AS(decode_sip_to_number({2, 3, 1}), Error);
    // Even length.
    CHECK_THROWS_AS(decode_sip_to_number({2, 1}), Error);
}

TEST_CASE("roundtrip, structure and injectivity over 1..65535") {
    std::map<Permutation, std::uint64_t> seen;
    for (std::uint64_t w = 1; w <= 65535; ++w) {
        Permutation p = encode_number_to_sip(w);
        REQUIRE(p.size() == static_cast<std::size_t>(2 * bit_length(w) + 1));
        REQUIRE(is_self_inverting(p));
        int fixed = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] == static_cast<int>(i) + 1) ++fixed;
        }
        REQUIRE(fixed == 1);
        REQUIRE(decode_sip_to_number(p) == w);
        auto [it, fresh] = seen.emplace(std::move(p), w);
        REQUIRE(fresh);
    }
}

TEST_CASE("permutation text form") {
    CHECK(format_permutation({3, 5, 1, 4, 2}) == "(3,5,1,4,2)");
    CHECK(parse_permutation("(3,5,1,4,2)") == Permutation{3, 5, 1, 4, 2});
    CHECK(parse_permutation(" ( 2 , 1 , 3 ) ") == Permutation{2, 1, 3});
    for (std::uint64_t w : {1ull, 2ull, 4ull, 123ull, 65535ull}) {
        Permutation p = encode_number_to_sip(w);
        CHECK(parse_permutation(format_permutation(p)) == p);
    }
    CHECK_THROWS_AS(parse_permutation("3,5,1"), Error);
    CHECK_THROWS_AS(parse_permutation("(1,1,3)"), Error);
    CHECK_THROWS_AS(parse_permutation("(1,2"), Error);
}
