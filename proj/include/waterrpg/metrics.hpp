#pragma once

// Performance criteria for an embedding: data-rate, deterministic time/space
// overheads (interpreter steps and call depth stand in for wall clock and
// heap), and static instruction-group profiles of P vs P*.

#include <cstdint>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "waterrpg/extract.hpp"
#include "waterrpg/minilang/interp.hpp"

namespace waterrpg::metrics {

using minilang::MiniProgram;
using minilang::Stmt;
using minilang::StmtPtr;

struct GroupCounts {
    std::int64_t control = 0;
    std::int64_t invocation = 0;
    std::int64_t assignment = 0;
    std::int64_t rest = 0;

    std::int64_t total() const { return control + invocation + assignment + rest; }
    friend bool operator==(const GroupCounts&, const GroupCounts&) = default;
};

namespace detail {

inline bool contains_call(const minilang::Expr& e) {
    if (e.kind == minilang::Expr::Kind::Call) return true;
    for (const auto& c : e.children) {
        if (contains_call(*c)) return true;
    }
    return false;
}

inline void count_block(const std::vector<StmtPtr>& body, GroupCounts& out) {
    for (const auto& s : body) {
        if (s->expr && contains_call(*s->expr)) {
            ++out.invocation;
        } else if (s->kind == Stmt::Kind::If || s->kind == Stmt::Kind::While) {
            ++out.control;
        } else if (s->kind == Stmt::Kind::Let || s->kind == Stmt::Kind::Assign) {
            ++out.assignment;
        } else {
            ++out.rest;
        }
        count_block(s->body, out);
        count_block(s->else_body, out);
    }
}

}  // namespace detail

/// Classify every statement: call-bearing statements count as invocation,
/// then if/while as control, let/assign as assignment, print/return as rest.
inline GroupCounts instruction_group_counts(const MiniProgram& p) {
    GroupCounts out;
    for (const auto& f : p.functions) detail::count_block(f.body, out);
    return out;
}

struct MetricsReport {
    double data_rate_nodes = 0;
    double data_rate_bits = 0;
    double step_overhead = 0;
    double size_overhead = 0;
    double depth_overhead = 0;
    GroupCounts groups_original;
    GroupCounts groups_watermarked;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Measure an embedding.  Runs both programs on the key input (overheads)
/// and on every suite input (sanity); extraction of P* supplies n* and w.
inline MetricsReport compute_metrics(const MiniProgram& p, const MiniProgram& p_star, const std::vector<std::int64_t>& key,
                                     const std::vector<std::vector<std::int64_t>>& inputs) {
    MetricsReport r;
    auto run_or_name = [](const MiniProgram& prog, const std::vector<std::int64_t>& in, const char* which) {
        try {
            return minilang::run_program(prog, in);
        } catch (const Error& e) {
            std::string desc;
            for (auto v : in) desc += (desc.empty() ? "" : " ") + std::to_string(v);
            throw Error(std::string("compute_metrics: ") + which + " failed on input (" + desc + "): " + e.what());
        }
    };
    minilang::ExecutionTrace base = run_or_name(p, key, "original");
    minilang::ExecutionTrace marked = run_or_name(p_star, key, "watermarked");
    for (const auto& in : inputs) {
        (void)run_or_name(p, in, "original");
        (void)run_or_name(p_star, in, "watermarked");
    }

    try {
        ExtractionResult ex = extract_watermark(p_star, key);
        r.data_rate_nodes = static_cast<double>(ex.graph.node_count()) / static_cast<double>(p.functions.size());
        r.data_rate_bits = static_cast<double>(bit_length(ex.watermark)) / static_cast<double>(minilang::serialize_program(p).size());
    } catch (const Error&) {
        // No watermark (e.g. P measured against itself): data rates stay 0.
    }
    r.step_overhead = static_cast<double>(marked.step_count) / static_cast<double>(base.step_count) - 1.0;
    r.size_overhead = static_cast<double>(minilang::serialize_program(p_star).size()) /
                          static_cast<double>(minilang::serialize_program(p).size()) -
                      1.0;
    r.depth_overhead = static_cast<double>(marked.max_depth) / static_cast<double>(base.max_depth) - 1.0;
    r.groups_original = instruction_group_counts(p);
    r.groups_watermarked = instruction_group_counts(p_star);
    return r;
}

// ---------------------------------------------------------------------------
// key=value report format.

inline std::string emit_report(const MetricsReport& r) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "data_rate_nodes=" << r.data_rate_nodes << "\n";
    out << "data_rate_bits=" << r.data_rate_bits << "\n";
    out << "step_overhead=" << r.step_overhead << "\n";
    out << "size_overhead=" << r.size_overhead << "\n";
    out << "depth_overhead=" << r.depth_overhead << "\n";
    out << "groups_original=" << r.groups_original.control << "," << r.groups_original.invocation << ","
        << r.groups_original.assignment << "," << r.groups_original.rest << "\n";
    out << "groups_watermarked=" << r.groups_watermarked.control << "," << r.groups_watermarked.invocation << ","
        << r.groups_watermarked.assignment << "," << r.groups_watermarked.rest << "\n";
    return out.str();
}

inline MetricsReport parse_report(const std::string& text) {
    MetricsReport r;
    std::istringstream in(text);
    std::string line;
    auto parse_groups = [](const std::string& v) {
        GroupCounts g;
        std::istringstream gs(v);
        char comma;
        if (!(gs >> g.control >> comma >> g.invocation >> comma >> g.assignment >> comma >> g.rest))
            throw Error("parse_report: bad group counts '" + v + "'");
        return g;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw Error("parse_report: missing '=' in '" + line + "'");
        std::string k = line.substr(0, eq), v = line.substr(eq + 1);
        if (k == "data_rate_nodes") r.data_rate_nodes = std::stod(v);
        else if (k == "data_rate_bits") r.data_rate_bits = std::stod(v);
        else if (k == "step_overhead") r.step_overhead = std::stod(v);
        else if (k == "size_overhead") r.size_overhead = std::stod(v);
        else if (k == "depth_overhead") r.depth_overhead = std::stod(v);
        else if (k == "groups_original") r.groups_original = parse_groups(v);
        else if (k == "groups_watermarked") r.groups_watermarked = parse_groups(v);
        else throw Error("parse_report: unknown key '" + k + "'");
    }
    return r;
}

}  // namespace waterrpg::metrics
