#pragma once

// Embedding planner: from a program, its key input, and a watermark number,
// derive the node<->function assignment, the call-tables T and T*, the
// per-row characterizations C*, and the cf-variable schedule.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "waterrpg/minilang/interp.hpp"
#include "waterrpg/rpg.hpp"

namespace waterrpg::embed {

using minilang::ExecutionTrace;

enum class Tag { RF, RB, WF, WB };
enum class Mark { None, First, Mid, Last };

inline bool is_water(Tag t) { return t == Tag::WF || t == Tag::WB; }

inline std::string tag_name(Tag t) {
    switch (t) {
        case Tag::RF: return "rf";
        case Tag::RB: return "rb";
        case Tag::WF: return "wf";
        case Tag::WB: return "wb";
    }
    return "?";
}

inline Tag tag_from_name(const std::string& s) {
    if (s == "rf") return Tag::RF;
    if (s == "rb") return Tag::RB;
    if (s == "wf") return Tag::WF;
    if (s == "wb") return Tag::WB;
    throw Error("unknown tag '" + s + "'");
}

struct TRow {
    std::string caller;
    std::string callee;
    int site_id = 0;
};

struct PlanRow {
    std::string caller;
    std::string callee;
    int caller_node = -1;  // -1 = main
    int callee_node = -1;
    Tag tag = Tag::RF;
    Mark mark = Mark::None;
    int site_id = 0;             // original call site realizing this row (real and detour-first rows)
    std::int64_t caller_inc = 0;
    std::int64_t pre_value = 0;      // x before the caller-side increment
    std::int64_t caller_value = 0;   // after caller-side increment
    std::int64_t callee_value = 0;   // after callee-side increment (+c)
};

struct CfConfig {
    std::int64_t h = 3;
    std::int64_t g = 2;
    std::int64_t c = 1;
    /// Water-forward rows on odd-parity edges add h + wf_extra instead of h,
    /// giving non-constant increments without disturbing monotonicity.
    std::int64_t wf_extra = 0;
};

struct EmbeddingPlan {
    std::uint64_t w = 0;
    int n_star = 0;
    Permutation sip;
    ReduciblePermutationGraph graph;
    std::vector<std::string> assignment;  // index = node label 0..n*+1
    std::vector<TRow> T;
    std::vector<PlanRow> rows;  // T* with C* and the schedule merged in
    CfConfig cf;
    std::vector<std::int64_t> key;
    int detour_count = 0;

    int node_of(const std::string& fn) const {
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            if (assignment[i] == fn) return static_cast<int>(i);
        }
        return -1;
    }
};

// ---------------------------------------------------------------------------
// Detours.

/// Minimum-length directed path in F between two node labels.  Among
/// equal-length paths the forward edge is preferred at every step, which
/// makes plans reproducible.  from == t is an error: t has no outgoing edge.
inline std::vector<int> shortest_detour(const ReduciblePermutationGraph& g, int from, int to) {
    if (from == ReduciblePermutationGraph::t_label()) throw Error("shortest_detour: node t has no outgoing edge");
    if (from < 0 || from > g.s_label() || to < 0 || to > g.s_label()) throw Error("shortest_detour: node label out of range");

    auto successors = [&](int v) {
        std::vector<int> out;
        if (v >= 1) out.push_back(v - 1);  // forward first: preferred tie-break
        if (v >= 1 && v <= g.n_star) out.push_back(g.backward_target(v));
        return out;
    };
    std::vector<int> parent(static_cast<std::size_t>(g.node_count()), -2);
    std::vector<int> queue = {from};
    parent[static_cast<std::size_t>(from)] = -1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int v = queue[head];
        if (v == to && v != from) break;
        if (v == ReduciblePermutationGraph::t_label()) continue;
        for (int w : successors(v)) {
            if (parent[static_cast<std::size_t>(w)] == -2) {
                parent[static_cast<std::size_t>(w)] = v;
                queue.push_back(w);
            }
        }
    }
    if (to == from || parent[static_cast<std::size_t>(to)] == -2)
        throw Error("shortest_detour: no path from " + std::to_string(from) + " to " + std::to_string(to));
    std::vector<int> path;
    for (int v = to; v != -1; v = parent[static_cast<std::size_t>(v)]) path.push_back(v);
    return {path.rbegin(), path.rend()};
}

/// Edge present in F?  Forward edges step down by one; each interior node
/// has one backward edge to a strictly greater label.
inline bool has_edge(const ReduciblePermutationGraph& g, int from, int to) {
    if (from == to + 1 && from >= 1 && from <= g.s_label()) return true;
    return from >= 1 && from <= g.n_star && g.backward_target(from) == to;
}

inline Tag edge_tag(const ReduciblePermutationGraph& g, int from, int to, bool water) {
    if (from == to + 1) return water ? Tag::WF : Tag::RF;
    if (from >= 1 && from <= g.n_star && g.backward_target(from) == to) return water ? Tag::WB : Tag::RB;
    throw Error("edge_tag: not an edge of F");
}

// ---------------------------------------------------------------------------
// Schedule.

struct CfSchedule {
    CfConfig cf;
    std::vector<std::pair<std::int64_t, std::int64_t>> values;  // per row: (caller-side, callee-side)
};

/// Simulate the cf-variable over the planned call instances: starting from
/// x = 0, each row adds h (forward tag) or g (backward tag) caller-side and
/// then c callee-side.
inline CfSchedule schedule_cf_values(const std::vector<Tag>& tags, const CfConfig& cf = {}) {
    CfSchedule s;
    s.cf = cf;
    std::int64_t x = 0;
    for (Tag t : tags) {
        x += (t == Tag::RF || t == Tag::WF) ? cf.h : cf.g;
        std::int64_t caller = x;
        x += cf.c;
        s.values.emplace_back(caller, x);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Planning.

namespace detail {

/// Build T from the key trace: every invocation event, in trace order, with
/// its originating call site.
inline std::vector<TRow> build_call_table(const ExecutionTrace& trace) {
    std::vector<TRow> t;
    for (std::size_t i = 0; i < trace.calls.size(); ++i) {
        TRow r;
        r.caller = trace.calls[i].first;
        r.callee = trace.calls[i].second;
        r.site_id = i < trace.site_ids.size() ? trace.site_ids[i] : 0;
        t.push_back(r);
    }
    return t;
}

}  // namespace detail

/// Plan the embedding for an already-traced program.  `trace` must be the
/// run of the (normalized, surplus-inlined) program on the key input; the
/// trace must touch exactly n*+2 distinct functions besides main.
inline EmbeddingPlan plan_from_trace(const ExecutionTrace& trace, const std::vector<std::int64_t>& key, std::uint64_t w,
                                     const CfConfig& cf = {}) {
    EmbeddingPlan plan;
    plan.w = w;
    plan.sip = encode_number_to_sip(w);
    plan.n_star = static_cast<int>(plan.sip.size());
    plan.graph = encode_sip_to_rpg(plan.sip);
    plan.cf = cf;
    plan.key = key;

    std::vector<std::string> order = minilang::distinct_functions_in_order(trace);
    const int need = plan.n_star + 2;
    if (static_cast<int>(order.size()) - 1 < need)
        throw Error("insufficient functions: key trace touches " + std::to_string(order.size() - 1) +
                    " besides main, watermark needs " + std::to_string(need));
    if (static_cast<int>(order.size()) - 1 > need)
        throw Error("plan_from_trace: trace touches more functions than the watermark graph has nodes; inline the surplus first");

    // S[1] <-> s = u_{n*+1}, ..., S[n*+2] <-> t = u_0.
    plan.assignment.assign(static_cast<std::size_t>(need), "");
    for (int i = 1; i <= need; ++i) plan.assignment[static_cast<std::size_t>(plan.n_star + 1 - (i - 1))] = order[static_cast<std::size_t>(i)];

    plan.T = detail::build_call_table(trace);

    // Step 5.1: keep rows whose pair is an F-edge; replace the rest by the
    // shortest detour.  Rows called from main are kept as-is (main is outside
    // the graph and is removed during extraction).
    for (const auto& t : plan.T) {
        int a = plan.node_of(t.caller);
        int b = plan.node_of(t.callee);
        if (t.caller == "main") {
            PlanRow r;
            r.caller = t.caller;
            r.callee = t.callee;
            r.caller_node = -1;
            r.callee_node = b;
            r.tag = Tag::RF;
            r.site_id = t.site_id;
            plan.rows.push_back(r);
            continue;
        }
        if (a < 0 || b < 0) throw Error("plan_from_trace: traced function missing from assignment");
        if (has_edge(plan.graph, a, b)) {
            PlanRow r;
            r.caller = t.caller;
            r.callee = t.callee;
            r.caller_node = a;
            r.callee_node = b;
            r.tag = edge_tag(plan.graph, a, b, false);
            r.site_id = t.site_id;
            plan.rows.push_back(r);
            continue;
        }
        std::vector<int> path = shortest_detour(plan.graph, a, b);
        ++plan.detour_count;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            PlanRow r;
            r.caller_node = path[k];
            r.callee_node = path[k + 1];
            r.caller = plan.assignment[static_cast<std::size_t>(path[k])];
            r.callee = plan.assignment[static_cast<std::size_t>(path[k + 1])];
            r.tag = edge_tag(plan.graph, path[k], path[k + 1], true);
            r.mark = k == 0 ? Mark::First : (k + 2 == path.size() ? Mark::Last : Mark::Mid);
            r.site_id = k == 0 ? t.site_id : 0;
            plan.rows.push_back(r);
        }
    }

    // Step 5.2: insert every F-edge still missing from T* as a water row
    // right after the first row whose callee is the edge's source.
    for (;;) {
        std::set<std::pair<int, int>> present;
        for (const auto& r : plan.rows) {
            if (r.caller_node >= 0) present.insert({r.caller_node, r.callee_node});
        }
        std::optional<GraphEdge> missing;
        for (const auto& e : plan.graph.edges()) {
            if (!present.count({e.from, e.to})) {
                missing = e;
                break;
            }
        }
        if (!missing) break;
        std::size_t anchor = plan.rows.size();
        for (std::size_t i = 0; i < plan.rows.size(); ++i) {
            if (plan.rows[i].callee_node == missing->from) {
                anchor = i;
                break;
            }
        }
        if (anchor == plan.rows.size())
            throw Error("plan_from_trace: no anchor row for edge from node " + std::to_string(missing->from));
        PlanRow r;
        r.caller_node = missing->from;
        r.callee_node = missing->to;
        r.caller = plan.assignment[static_cast<std::size_t>(missing->from)];
        r.callee = plan.assignment[static_cast<std::size_t>(missing->to)];
        r.tag = missing->kind == EdgeKind::Forward ? Tag::WF : Tag::WB;
        plan.rows.insert(plan.rows.begin() + static_cast<std::ptrdiff_t>(anchor) + 1, r);
    }

    // Schedule; per-row increments so wf_extra can vary water-forward rows.
    std::int64_t x = 0;
    for (auto& r : plan.rows) {
        std::int64_t inc = (r.tag == Tag::RF || r.tag == Tag::WF) ? cf.h : cf.g;
        if (r.tag == Tag::WF && (r.caller_node + r.callee_node) % 2 != 0) inc += cf.wf_extra;
        r.pre_value = x;
        r.caller_inc = inc;
        x += inc;
        r.caller_value = x;
        x += cf.c;
        r.callee_value = x;
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Sidecar format: sections "assignment", "T", "Tstar", "Cstar", "schedule".

inline std::string serialize_plan(const EmbeddingPlan& plan) {
    std::ostringstream out;
    out << "watermark " << plan.w << "\n";
    out << "sip " << format_permutation(plan.sip) << "\n";
    out << "key";
    for (auto v : plan.key) out << " " << v;
    out << "\n";
    out << "assignment\n";
    for (int i = plan.graph.s_label(); i >= 0; --i) out << "u" << i << " " << plan.assignment[static_cast<std::size_t>(i)] << "\n";
    out << "T\n";
    for (const auto& r : plan.T) out << r.caller << " -> " << r.callee << " site " << r.site_id << "\n";
    out << "Tstar\n";
    for (const auto& r : plan.rows) out << r.caller << " -> " << r.callee << "\n";
    out << "Cstar\n";
    for (const auto& r : plan.rows) {
        out << tag_name(r.tag);
        if (r.mark == Mark::First) out << " first";
        if (r.mark == Mark::Last) out << " last";
        out << "\n";
    }
    out << "schedule\n";
    out << "h " << plan.cf.h << " g " << plan.cf.g << " c " << plan.cf.c << "\n";
    for (const auto& r : plan.rows) out << r.caller_value << " " << r.callee_value << "\n";
    return out.str();
}

}  // namespace waterrpg::embed
