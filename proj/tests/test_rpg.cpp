#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <waterrpg/rpg.hpp>

using namespace waterrpg;

namespace {

ReduciblePermutationGraph graph_for(std::uint64_t w) { return encode_sip_to_rpg(encode_number_to_sip(w)); }

/// Independent oracle: enumerate every Hamiltonian path of a digraph by
/// exhaustive DFS (fine for the <= 11-node graphs it is used on).
void enumerate_hp(const Digraph& g, int v, std::vector<int>& cur, std::vector<bool>& used,
                  std::vector<std::vector<int>>& found) {
    cur.push_back(v);
    used[static_cast<std::size_t>(v)] = true;
    if (static_cast<int>(cur.size()) == g.n) {
        found.push_back(cur);
    } else {
        for (int w : g.adj[static_cast<std::size_t>(v)]) {
            if (!used[static_cast<std::size_t>(w)]) enumerate_hp(g, w, cur, used, found);
        }
    }
    used[static_cast<std::size_t>(v)] = false;
    cur.pop_back();
}

std::vector<std::vector<int>> all_hamiltonian_paths(const Digraph& g) {
    std::vector<std::vector<int>> found;
    std::vector<int> cur;
    std::vector<bool> used(static_cast<std::size_t>(g.n), false);
    for (int v = 0; v < g.n; ++v) enumerate_hp(g, v, cur, used, found);
    return found;
}

}  // namespace

TEST_CASE("encoder backward maps match the worked graphs") {
    ReduciblePermutationGraph g2 = graph_for(2);
    CHECK(g2.node_count() == 7);
    CHECK(g2.backward == std::vector<int>{0, 5, 4, 6, 5, 6});

    ReduciblePermutationGraph g1 = graph_for(1);
    CHECK(g1.node_count() == 5);
    CHECK(g1.backward == std::vector<int>{0, 2, 4, 4});

    ReduciblePermutationGraph g4 = graph_for(4);
    CHECK(g4.node_count() == 9);
    CHECK(g4.s_label() == 8);
    CHECK(g4.backward == std::vector<int>{0, 6, 3, 5, 8, 6, 7, 8});
}

TEST_CASE("decoder inverts the worked graphs") {
    ReduciblePermutationGraph g;
    g.n_star = 5;
    g.backward = {0, 5, 4, 6, 5, 6};
    CHECK(decode_rpg_to_sip(g) == Permutation{3, 5, 1, 4, 2});

    g.n_star = 3;
    g.backward = {0, 2, 4, 4};
    CHECK(decode_rpg_to_sip(g) == Permutation{2, 1, 3});

    g.n_star = 7;
    g.backward = {0, 6, 3, 5, 8, 6, 7, 8};
    CHECK(decode_rpg_to_sip(g) == Permutation{4, 7, 6, 1, 5, 3, 2});
}

TEST_CASE("hamiltonian path is the descending chain") {
    CHECK(hamiltonian_path(graph_for(2)) == std::vector<int>{6, 5, 4, 3, 2, 1, 0});
    CHECK(hamiltonian_path(graph_for(1)) == std::vector<int>{4, 3, 2, 1, 0});
}

TEST_CASE("unique HP recovery and broken chains") {
    Digraph d = to_digraph(graph_for(2));
    CHECK(unique_hamiltonian_path(d) == std::vector<int>{6, 5, 4, 3, 2, 1, 0});

    // Remove forward edge 3 -> 2: the chain breaks.
    Digraph broken(7);
    for (const auto& e : graph_for(2).edges()) {
        if (!(e.from == 3 && e.to == 2)) broken.add_edge(e.from, e.to);
    }
    CHECK_THROWS_WITH(unique_hamiltonian_path(broken), Catch::Matchers::ContainsSubstring("no Hamiltonian path"));
}

TEST_CASE("brute-force HP oracle agrees for every n* <= 9") {
    for (std::uint64_t w = 1; w <= 15; ++w) {  // bit length <= 4 -> n* <= 9
        ReduciblePermutationGraph g = graph_for(w);
        Digraph d = to_digraph(g);
        auto paths = all_hamiltonian_paths(d);
        REQUIRE(paths.size() == 1);
        CHECK(paths[0] == hamiltonian_path(g));
        CHECK(paths[0] == unique_hamiltonian_path(d));
    }
}

TEST_CASE("reducibility") {
    CHECK(is_reducible(to_digraph(graph_for(2)), graph_for(2).s_label()));

    // Two-node cycle entered from s at both ends: irreducible.
    Digraph bad(3);
    bad.add_edge(0, 1);
    bad.add_edge(0, 2);
    bad.add_edge(1, 2);
    bad.add_edge(2, 1);
    CHECK_FALSE(is_reducible(bad, 0));

    Digraph chain(3);
    chain.add_edge(0, 1);
    chain.add_edge(1, 2);
    CHECK(is_reducible(chain, 0));

    Digraph unreachable(3);
    unreachable.add_edge(0, 1);
    CHECK_THROWS_AS(is_reducible(unreachable, 0), Error);
}

TEST_CASE("validation") {
    CHECK(validate_rpg(graph_for(2)).ok());

    // Retarget node 2's backward edge 4 -> 3: direction still fine, but the
    // decode/re-encode fixpoint breaks.
    ReduciblePermutationGraph g = graph_for(2);
    g.backward[2] = 3;
    ValidityReport r = validate_rpg(g);
    CHECK_FALSE(r.ok());
    CHECK(r.summary().find("fail") == 0);

    ReduciblePermutationGraph wrong_dir = graph_for(2);
    wrong_dir.backward[3] = 2;  // target below source
    CHECK_FALSE(validate_rpg(wrong_dir).ok());
}

TEST_CASE("structural suite over 200 random watermarks") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        std::uint64_t w = rng() % 65536 + 1;
        ReduciblePermutationGraph g = graph_for(w);
        REQUIRE(validate_rpg(g).ok());
        REQUIRE(is_reducible(to_digraph(g), g.s_label()));
        // Outdegrees: s has 1, t has 0, interior nodes 2.
        Digraph d = to_digraph(g);
        for (int v = 0; v < d.n; ++v) {
            std::size_t deg = d.adj[static_cast<std::size_t>(v)].size();
            if (v == g.s_label()) CHECK(deg == 1);
            else if (v == ReduciblePermutationGraph::t_label()) CHECK(deg == 0);
            else CHECK(deg == 2);
        }
        REQUIRE(decode_rpg_to_sip(g) == encode_number_to_sip(w));
    }
}

TEST_CASE("single backward-edge retargets are flagged or decode to another valid image") {
    std::mt19937_64 rng(11);
    int collisions = 0;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t w = rng() % 65536 + 1;
        ReduciblePermutationGraph g = graph_for(w);
        int src = static_cast<int>(rng() % static_cast<std::uint64_t>(g.n_star)) + 1;
        int cur = g.backward[static_cast<std::size_t>(src)];
        int nt = static_cast<int>(rng() % static_cast<std::uint64_t>(g.node_count()));
        if (nt == cur) nt = (nt + 1) % g.node_count();
        g.backward[static_cast<std::size_t>(src)] = nt;
        ValidityReport r = validate_rpg(g);
        if (r.ok()) {
            // Collision: the tampered graph is another encoder image.
            ++collisions;
            std::uint64_t w2 = decode_sip_to_number(decode_rpg_to_sip(g));
            CHECK(w2 != w);
        }
    }
    INFO("retarget collisions: " << collisions << "/1000");
    CHECK(collisions < 100);  // expected rare
}

TEST_CASE("graph text format") {
    ReduciblePermutationGraph g = graph_for(2);
    std::string text = serialize_graph(g);
    CHECK(text.find("nodes 7\n") == 0);
    CHECK(parse_graph(text) == g);
    CHECK(serialize_graph(parse_graph(text)) == text);

    CHECK_THROWS_AS(parse_graph("nodes 7\nedge 2 9 backward\n"), Error);
    CHECK_THROWS_AS(parse_graph("nodes 7\nbogus\n"), Error);
    CHECK_THROWS_AS(parse_graph(text + "edge 1 5 backward\n"), Error);  // duplicate
    CHECK_THROWS_AS(parse_graph("nodes 3\nedge 2 1 forward\nedge 1 0 forward\n"), Error);  // missing backward
}
