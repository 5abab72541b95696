#pragma once

// Watermark extraction: run the program on the key input, rebuild the call
// graph, strip main, recover the unique Hamiltonian path, relabel the nodes
// descending along it, and decode.  Every structural mismatch is an error —
// extraction fails loudly rather than guessing.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "waterrpg/minilang/interp.hpp"
#include "waterrpg/rpg.hpp"
#include "waterrpg/sip.hpp"

namespace waterrpg {

struct ExtractionResult {
    ReduciblePermutationGraph graph;
    Permutation sip;
    std::uint64_t watermark = 0;
    ValidityReport diagnostics;
};

/// Rebuild F[π*] from the dynamic call graph of (p, key).
inline ReduciblePermutationGraph extract_graph(const minilang::MiniProgram& p, const std::vector<std::int64_t>& key) {
    minilang::ExecutionTrace trace = minilang::run_program(p, key);
    minilang::DynamicCallGraph g = minilang::build_dynamic_call_graph(trace);

    // Step 4: drop main and its incident edges.
    std::vector<std::string> nodes;
    for (const auto& n : g.nodes) {
        if (n != "main") nodes.push_back(n);
    }
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& e : g.edges) {
        if (e.first != "main" && e.second != "main") edges.insert(e);
    }

    const int m = static_cast<int>(nodes.size());
    if (m < 3) throw Error("extract_graph: only " + std::to_string(m) + " non-main functions in the key trace");
    const int n = m - 2;
    if (n % 2 == 0) throw Error("extract_graph: node count " + std::to_string(m) + " cannot host a watermark graph");
    if (static_cast<int>(edges.size()) != 2 * n + 1)
        throw Error("extract_graph: expected " + std::to_string(2 * n + 1) + " edges, found " + std::to_string(edges.size()));

    // Steps 5-6: unique Hamiltonian path, then descending relabel along it.
    std::map<std::string, int> index;
    for (int i = 0; i < m; ++i) index[nodes[static_cast<std::size_t>(i)]] = i;
    Digraph d(m);
    for (const auto& e : edges) d.add_edge(index[e.first], index[e.second]);
    std::vector<int> hp = unique_hamiltonian_path(d);  // source .. sink

    std::vector<int> label(static_cast<std::size_t>(m), -1);
    for (int pos = 0; pos < m; ++pos) label[static_cast<std::size_t>(hp[static_cast<std::size_t>(pos)])] = m - 1 - pos;

    ReduciblePermutationGraph out;
    out.n_star = n;
    out.backward.assign(static_cast<std::size_t>(n) + 1, -1);
    for (const auto& e : edges) {
        int a = label[static_cast<std::size_t>(index[e.first])];
        int b = label[static_cast<std::size_t>(index[e.second])];
        if (a == b + 1) continue;  // forward chain edge, implied by the labels
        if (b <= a || a < 1 || a > n) throw Error("extract_graph: edge " + e.first + " -> " + e.second + " violates the backward shape");
        if (out.backward[static_cast<std::size_t>(a)] != -1) throw Error("extract_graph: node with two backward edges");
        out.backward[static_cast<std::size_t>(a)] = b;
    }
    for (int i = 1; i <= n; ++i) {
        if (out.backward[static_cast<std::size_t>(i)] == -1)
            throw Error("extract_graph: missing backward edge from node " + std::to_string(i));
    }
    out.backward[0] = 0;  // unused slot, normalized so graphs compare equal
    return out;
}

/// True iff the two graphs are equal edge-for-edge; HP-canonical labels make
/// isomorphism an equality test.
inline bool verify_isomorphism(const ReduciblePermutationGraph& extracted, const ReduciblePermutationGraph& expected) {
    return extracted == expected;
}

inline ExtractionResult extract_watermark(const minilang::MiniProgram& p, const std::vector<std::int64_t>& key) {
    ExtractionResult r;
    r.graph = extract_graph(p, key);
    r.diagnostics = validate_rpg(r.graph);
    if (!r.diagnostics.ok()) throw Error("extract_watermark: invalid graph: " + r.diagnostics.summary());
    r.sip = decode_rpg_to_sip(r.graph);
    r.watermark = decode_sip_to_number(r.sip);
    return r;
}

}  // namespace waterrpg
