#pragma once

// Self-inverting permutation <-> reducible permutation graph codec.
//
// The graph F for a permutation of length n* has nodes labelled 0..n*+1
// (t = u_0, s = u_{n*+1}), the forward chain u_{i+1} -> u_i for every i,
// and one backward edge per interior node.  The backward target of node i
// is the nearest element to the left of i's position in the permutation
// that is greater than i, or s when no such element exists.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "waterrpg/error.hpp"
#include "waterrpg/sip.hpp"

namespace waterrpg {

enum class EdgeKind { Forward, Backward };

struct GraphEdge {
    int from = 0;
    int to = 0;
    EdgeKind kind = EdgeKind::Forward;

    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Reducible permutation graph in its canonical labelled form.
struct ReduciblePermutationGraph {
    int n_star = 0;
    /// backward[i] for i in 1..n_star; entries 0 and beyond are unused.
    std::vector<int> backward;

    int node_count() const { return n_star + 2; }
    int s_label() const { return n_star + 1; }
    static constexpr int t_label() { return 0; }

    int backward_target(int i) const { return backward.at(static_cast<std::size_t>(i)); }

    std::vector<GraphEdge> edges() const {
        std::vector<GraphEdge> out;
        for (int i = n_star + 1; i >= 1; --i) out.push_back({i, i - 1, EdgeKind::Forward});
        for (int i = 1; i <= n_star; ++i) out.push_back({i, backward[static_cast<std::size_t>(i)], EdgeKind::Backward});
        return out;
    }

    friend bool operator==(const ReduciblePermutationGraph&, const ReduciblePermutationGraph&) = default;
};

inline ReduciblePermutationGraph encode_sip_to_rpg(const Permutation& p) {
    if (p.size() % 2 == 0 || p.empty() || !is_self_inverting(p))
        throw Error("encode_sip_to_rpg: input must be a self-inverting permutation of odd length");
    const int n = static_cast<int>(p.size());
    ReduciblePermutationGraph g;
    g.n_star = n;
    g.backward.assign(static_cast<std::size_t>(n) + 1, 0);
    // Nearest greater element to the left, via a decreasing stack over positions.
    std::vector<int> stack;
    for (int pos = 0; pos < n; ++pos) {
        int v = p[static_cast<std::size_t>(pos)];
        while (!stack.empty() && stack.back() < v) stack.pop_back();
        g.backward[static_cast<std::size_t>(v)] = stack.empty() ? g.s_label() : stack.back();
        stack.push_back(v);
    }
    return g;
}

/// Inverse of encode_sip_to_rpg: read backward targets as a parent function
/// rooted at s and emit the preorder traversal with children visited in
/// ascending label order.
inline Permutation decode_rpg_to_sip(const ReduciblePermutationGraph& g) {
    const int n = g.n_star;
    std::vector<std::vector<int>> children(static_cast<std::size_t>(n) + 2);
    for (int i = 1; i <= n; ++i) {
        int parent = g.backward[static_cast<std::size_t>(i)];
        if (parent <= i || parent > g.s_label())
            throw Error("decode_rpg_to_sip: backward target must exceed its source");
        children[static_cast<std::size_t>(parent)].push_back(i);
    }
    for (auto& c : children) std::sort(c.begin(), c.end());

    Permutation out;
    std::vector<int> stack = {g.s_label()};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (v != g.s_label()) out.push_back(v);
        const auto& c = children[static_cast<std::size_t>(v)];
        for (auto it = c.rbegin(); it != c.rend(); ++it) stack.push_back(*it);
    }
    if (static_cast<int>(out.size()) != n) throw Error("decode_rpg_to_sip: unreachable interior node");
    return out;
}

/// The unique Hamiltonian path (s, u_{n*}, ..., u_1, t); throws if a forward
/// chain edge is missing.
inline std::vector<int> hamiltonian_path(const ReduciblePermutationGraph& g) {
    std::vector<int> path;
    for (int v = g.s_label(); v >= 0; --v) path.push_back(v);
    return path;
}

// ---------------------------------------------------------------------------
// Generic flow-graph reducibility and Hamiltonian-path recovery.

/// Adjacency-list digraph over nodes 0..n-1.
struct Digraph {
    int n = 0;
    std::vector<std::vector<int>> adj;

    explicit Digraph(int nodes = 0) : n(nodes), adj(static_cast<std::size_t>(nodes)) {}
    void add_edge(int from, int to) { adj[static_cast<std::size_t>(from)].push_back(to); }
};

inline Digraph to_digraph(const ReduciblePermutationGraph& g) {
    Digraph d(g.node_count());
    for (const auto& e : g.edges()) d.add_edge(e.from, e.to);
    return d;
}

/// True iff the flow graph with entry `entry` is reducible: every edge whose
/// target dominates its source is a back edge, and removing those leaves an
/// acyclic graph.  Throws if some node is unreachable from the entry.
inline bool is_reducible(const Digraph& g, int entry) {
    const int n = g.n;
    // Iterative dominator sets, fine at these sizes.
    std::vector<std::vector<bool>> dom(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), true));
    std::vector<bool> reach(static_cast<std::size_t>(n), false);
    {
        std::deque<int> q = {entry};
        reach[static_cast<std::size_t>(entry)] = true;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : g.adj[static_cast<std::size_t>(v)])
                if (!reach[static_cast<std::size_t>(w)]) {
                    reach[static_cast<std::size_t>(w)] = true;
                    q.push_back(w);
                }
        }
    }
    for (bool r : reach)
        if (!r) throw Error("is_reducible: node unreachable from entry");

    std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        for (int w : g.adj[static_cast<std::size_t>(v)]) preds[static_cast<std::size_t>(w)].push_back(v);

    dom[static_cast<std::size_t>(entry)].assign(static_cast<std::size_t>(n), false);
    dom[static_cast<std::size_t>(entry)][static_cast<std::size_t>(entry)] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < n; ++v) {
            if (v == entry) continue;
            std::vector<bool> next(static_cast<std::size_t>(n), true);
            if (preds[static_cast<std::size_t>(v)].empty()) next.assign(static_cast<std::size_t>(n), false);
            for (int p : preds[static_cast<std::size_t>(v)])
                for (int k = 0; k < n; ++k)
                    next[static_cast<std::size_t>(k)] = next[static_cast<std::size_t>(k)] && dom[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
            next[static_cast<std::size_t>(v)] = true;
            if (next != dom[static_cast<std::size_t>(v)]) {
                dom[static_cast<std::size_t>(v)] = next;
                changed = true;
            }
        }
    }

    // Drop edges whose target dominates their source; the rest must be acyclic.
    std::vector<std::vector<int>> fwd(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        for (int w : g.adj[static_cast<std::size_t>(v)])
            if (!dom[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)]) fwd[static_cast<std::size_t>(v)].push_back(w);

    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v)
        for (int w : fwd[static_cast<std::size_t>(v)]) ++indeg[static_cast<std::size_t>(w)];
    std::deque<int> q;
    for (int v = 0; v < n; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) q.push_back(v);
    int seen = 0;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        ++seen;
        for (int w : fwd[static_cast<std::size_t>(v)])
            if (--indeg[static_cast<std::size_t>(w)] == 0) q.push_back(w);
    }
    return seen == n;
}

/// Recover the unique Hamiltonian path of a (possibly relabelled) reducible
/// permutation graph: start from the unique sink and repeatedly step to the
/// unique not-yet-placed predecessor.  Throws when the sink is not unique or
/// a step is ambiguous or missing, which is how tampering surfaces.
/// Returns the path from source to sink.
inline std::vector<int> unique_hamiltonian_path(const Digraph& g) {
    const int n = g.n;
    std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
    std::vector<int> outdeg(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        outdeg[static_cast<std::size_t>(v)] = static_cast<int>(g.adj[static_cast<std::size_t>(v)].size());
        for (int w : g.adj[static_cast<std::size_t>(v)]) preds[static_cast<std::size_t>(w)].push_back(v);
    }
    int sink = -1;
    for (int v = 0; v < n; ++v) {
        if (outdeg[static_cast<std::size_t>(v)] == 0) {
            if (sink != -1) throw Error("no Hamiltonian path: multiple sinks");
            sink = v;
        }
    }
    if (sink == -1) throw Error("no Hamiltonian path: no sink");

    std::vector<bool> placed(static_cast<std::size_t>(n), false);
    std::vector<int> rev = {sink};
    placed[static_cast<std::size_t>(sink)] = true;
    int cur = sink;
    for (int step = 1; step < n; ++step) {
        int next = -1;
        for (int p : preds[static_cast<std::size_t>(cur)]) {
            if (placed[static_cast<std::size_t>(p)]) continue;
            if (next != -1) throw Error("no Hamiltonian path: ambiguous predecessor");
            next = p;
        }
        if (next == -1) throw Error("no Hamiltonian path: chain broken");
        placed[static_cast<std::size_t>(next)] = true;
        rev.push_back(next);
        cur = next;
    }
    return {rev.rbegin(), rev.rend()};
}

// ---------------------------------------------------------------------------
// Validation.

struct ValidityReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    std::string summary() const {
        if (ok()) return "pass";
        std::string out = "fail:";
        for (const auto& v : violations) out += " [" + v + "]";
        return out;
    }
};

/// Aggregate structural checks plus the decode/re-encode fixpoint.
inline ValidityReport validate_rpg(const ReduciblePermutationGraph& g) {
    ValidityReport r;
    if (g.n_star < 1 || g.n_star % 2 == 0) r.violations.push_back("interior node count must be odd and positive");
    if (static_cast<int>(g.backward.size()) != g.n_star + 1) {
        r.violations.push_back("backward map size mismatch");
        return r;
    }
    for (int i = 1; i <= g.n_star; ++i) {
        int j = g.backward[static_cast<std::size_t>(i)];
        if (j <= i || j > g.s_label()) r.violations.push_back("backward edge direction violated at node " + std::to_string(i));
    }
    if (!r.ok()) return r;

    try {
        if (!is_reducible(to_digraph(g), g.s_label())) r.violations.push_back("graph is not reducible");
    } catch (const Error& e) {
        r.violations.push_back(e.what());
    }
    try {
        Permutation p = decode_rpg_to_sip(g);
        if (!is_self_inverting(p)) {
            r.violations.push_back("decoded permutation is not self-inverting");
        } else if (encode_sip_to_rpg(p) != g) {
            r.violations.push_back("decode/re-encode fixpoint failed");
        } else {
            (void)decode_sip_to_number(p);
        }
    } catch (const Error& e) {
        r.violations.push_back(e.what());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Text format.
//
//   nodes <k>
//   edge <from> <to> forward|backward
//
// Canonical order: forward edges descending by source, then backward edges
// ascending by source.  t = 0, s = k-1.

inline std::string serialize_graph(const ReduciblePermutationGraph& g) {
    std::ostringstream out;
    out << "nodes " << g.node_count() << "\n";
    for (const auto& e : g.edges())
        out << "edge " << e.from << " " << e.to << " " << (e.kind == EdgeKind::Forward ? "forward" : "backward") << "\n";
    return out.str();
}

inline ReduciblePermutationGraph parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    int nodes = 0;
    if (!(in >> word) || word != "nodes" || !(in >> nodes) || nodes < 3)
        throw Error("parse_graph: expected 'nodes <k>' header with k >= 3");

    ReduciblePermutationGraph g;
    g.n_star = nodes - 2;
    g.backward.assign(static_cast<std::size_t>(g.n_star) + 1, -1);
    std::vector<bool> forward_seen(static_cast<std::size_t>(nodes), false);
    std::map<std::pair<int, int>, bool> seen;

    while (in >> word) {
        if (word != "edge") throw Error("parse_graph: malformed line, expected 'edge'");
        int from, to;
        std::string kind;
        if (!(in >> from >> to >> kind)) throw Error("parse_graph: malformed edge line");
        if (from < 0 || from >= nodes || to < 0 || to >= nodes) throw Error("parse_graph: label out of range");
        if (seen.count({from, to})) throw Error("parse_graph: duplicate edge");
        seen[{from, to}] = true;
        if (kind == "forward") {
            if (from != to + 1) throw Error("parse_graph: forward edge must step down by one");
            forward_seen[static_cast<std::size_t>(from)] = true;
        } else if (kind == "backward") {
            if (from < 1 || from > g.n_star) throw Error("parse_graph: backward edge source out of range");
            if (g.backward[static_cast<std::size_t>(from)] != -1) throw Error("parse_graph: duplicate backward source");
            g.backward[static_cast<std::size_t>(from)] = to;
        } else {
            throw Error("parse_graph: edge kind must be forward or backward");
        }
    }
    for (int i = 1; i <= g.n_star + 1; ++i)
        if (!forward_seen[static_cast<std::size_t>(i)]) throw Error("parse_graph: missing forward edge from node " + std::to_string(i));
    for (int i = 1; i <= g.n_star; ++i)
        if (g.backward[static_cast<std::size_t>(i)] == -1) throw Error("parse_graph: missing backward edge from node " + std::to_string(i));
    g.backward[0] = 0;  // unused slot, normalized so graphs compare equal
    return g;
}

}  // namespace waterrpg
