#pragma once

// Program rewriting: realize a planned embedding as source.  The rewritten
// program P* carries a global cf-variable that tracks the schedule on the
// key input, driving water calls through opaque predicates, while every
// original statement stays reachable with original semantics on any input.
//
// Realization per planned row:
//   - real rows fire at their original call site; the caller-side increment
//     sits right before the call behind an always-true predicate (naive) or
//     bare (stealthy);
//   - detour first rows replace their site with
//       if (x == pre) { stamp args; x += inc; first_hop(); } else { original }
//   - all other water rows become guarded continuation blocks at the entry
//     of their caller, firing on x == pre;
//   - detour last rows re-issue the original call with stamped arguments, so
//     the original callee body runs exactly once per replaced instance;
//   - every assigned callee gets an entry increment (x += c) and skips its
//     body when x sits on a water-entry value.
// Call sites targeting assigned functions but absent from the plan (untraced
// callers, branches not taken under the key) get `x = 0;` beforehand, which
// is a synchronization value under which every callee body executes.
//
// A one-shot arrival flag hardens all of this against cf-value coincidences
// on non-key inputs: detour heads, mid-chain hops and inserted water calls
// set `d = 1` right before calling; every assigned callee latches the flag
// into a local at entry and clears it.  The body-skip test and the detour
// continuation guards require the latch, so an ordinary call — which never
// sets the flag — can never lose its body or trigger a chain no matter what
// value x happens to hold.  Inserted-edge continuations stay x-only (their
// hosts are entered through ordinary calls on the key run), but firing one
// spuriously only perturbs x: the call it makes is flagged, so its callee
// body is skipped and the output is untouched.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "waterrpg/embed/inline.hpp"
#include "waterrpg/embed/normalize.hpp"
#include "waterrpg/embed/plan.hpp"

namespace waterrpg::embed {

enum class Mode { Naive, Stealthy };

inline const char* mode_name(Mode m) { return m == Mode::Naive ? "naive" : "stealthy"; }

inline Mode mode_from_name(const std::string& s) {
    if (s == "naive") return Mode::Naive;
    if (s == "stealthy") return Mode::Stealthy;
    throw Error("unknown mode '" + s + "' (want naive or stealthy)");
}

namespace detail {

inline const std::string kCf = "__wm_x";
inline const std::string kFlag = "__wm_d";    // set by water calls, consumed at callee entry
inline const std::string kLatch = "__wm_dd";  // per-entry local holding the consumed flag

inline ExprPtr cf_var() { return minilang::make_var(kCf); }

/// dd == 1
inline ExprPtr latch_set() { return minilang::make_binary("==", minilang::make_var(kLatch), minilang::make_int(1)); }

/// d = v
inline StmtPtr flag_assign(std::int64_t v) { return minilang::make_assign(kFlag, minilang::make_int(v)); }

/// x == v
inline ExprPtr equals_value(std::int64_t v) { return minilang::make_binary("==", cf_var(), minilang::make_int(v)); }

/// Disjunction over values (non-empty).  With `range` set, each term is the
/// two-sided range [v, v+1] instead of an equality; the schedule never lands
/// on v+1 (caller-side increments are at least 2), so both forms isolate v.
inline ExprPtr equals_any(const std::vector<std::int64_t>& values, bool range = false) {
    ExprPtr e;
    for (std::int64_t v : values) {
        ExprPtr term;
        if (range) {
            term = minilang::make_binary("&&", minilang::make_binary(">=", cf_var(), minilang::make_int(v)),
                                         minilang::make_binary("<=", cf_var(), minilang::make_int(v + 1)));
        } else {
            term = equals_value(v);
        }
        e = e ? minilang::make_binary("||", std::move(e), std::move(term)) : std::move(term);
    }
    return e;
}

/// x = x + inc
inline StmtPtr cf_increment(std::int64_t inc) {
    return minilang::make_assign(kCf, minilang::make_binary("+", cf_var(), minilang::make_int(inc)));
}

struct SiteRewrite {
    std::vector<std::size_t> rows;  // plan row indices realized at this site
};

struct RewriteContext {
    const EmbeddingPlan& plan;
    Mode mode;
    std::map<int, SiteRewrite> sites;                     // site_id -> realized rows
    std::map<std::string, std::vector<std::size_t>> continuations;  // host fn -> continuation rows in T* order
    std::set<std::string> assigned;
    std::size_t max_stamp = 0;  // number of __wm_a globals needed
};

inline bool site_realized(const PlanRow& r) {
    return r.site_id != 0 && (!is_water(r.tag) || r.mark == Mark::First);
}

inline bool continuation_realized(const PlanRow& r) { return is_water(r.tag) && r.mark != Mark::First; }

}  // namespace detail

/// Rewrite a prepared program (normalized, surplus-inlined — the same
/// program the plan was computed from) into the watermarked program P*.
inline MiniProgram rewrite_program(const MiniProgram& prepared, const EmbeddingPlan& plan, Mode mode) {
    using namespace detail;
    using minilang::Stmt;

    RewriteContext ctx{plan, mode, {}, {}, {}, 0};
    for (const auto& name : plan.assignment) ctx.assigned.insert(name);

    for (std::size_t i = 0; i < plan.rows.size(); ++i) {
        const PlanRow& r = plan.rows[i];
        if (site_realized(r)) {
            ctx.sites[r.site_id].rows.push_back(i);
        } else if (continuation_realized(r)) {
            ctx.continuations[r.caller].push_back(i);
        } else {
            throw Error("rewrite_program: row neither site- nor continuation-realized");
        }
    }

    MiniProgram out = prepared.clone();

    // Stamp-global arity: detour last rows re-issue the original call with
    // stamped arguments, one global per callee parameter.
    for (const auto& r : plan.rows) {
        if (is_water(r.tag) && r.mark == Mark::Last) {
            const auto* callee = out.find_function(r.callee);
            if (!callee) throw Error("rewrite_program: plan callee '" + r.callee + "' missing");
            ctx.max_stamp = std::max(ctx.max_stamp, callee->params.size());
        }
    }

    // Rewrite call sites.
    for (auto& f : out.functions) {
        auto rewrite_block = [&](auto&& self, std::vector<minilang::StmtPtr>& body) -> void {
            std::vector<minilang::StmtPtr> nb;
            for (auto& s : body) {
                self(self, s->body);
                self(self, s->else_body);
                const minilang::Expr* call = nullptr;
                if (s->kind == Stmt::Kind::CallStmt) {
                    call = s->expr.get();
                } else if ((s->kind == Stmt::Kind::Let || s->kind == Stmt::Kind::Assign) && s->expr->kind == minilang::Expr::Kind::Call) {
                    call = s->expr.get();
                }
                if (!call || !ctx.assigned.count(call->name)) {
                    nb.push_back(std::move(s));
                    continue;
                }
                auto it = ctx.sites.find(call->site_id);
                if (it == ctx.sites.end()) {
                    // Unplanned site targeting an assigned function: never
                    // executes under the key; synchronize so the callee body
                    // runs (Step 7 for untraced callers and untaken branches).
                    nb.push_back(minilang::make_assign(kCf, minilang::make_int(0)));
                    nb.push_back(std::move(s));
                    continue;
                }
                const PlanRow& first = plan.rows[it->second.rows.front()];
                if (!is_water(first.tag)) {
                    // Kept real site: caller-side increment before the call.
                    if (mode == Mode::Naive) {
                        // Always-true opaque predicate: x never goes negative.
                        std::vector<minilang::StmtPtr> then_body;
                        then_body.push_back(cf_increment(first.caller_inc));
                        nb.push_back(minilang::make_if(minilang::make_binary(">=", cf_var(), minilang::make_int(0)), std::move(then_body)));
                    } else {
                        nb.push_back(cf_increment(first.caller_inc));
                    }
                    nb.push_back(std::move(s));
                    continue;
                }
                // Detoured site: must be a bare call statement.
                if (s->kind != Stmt::Kind::CallStmt)
                    throw Error("unembeddable site: replaced call to '" + call->name + "' has its return value used");
                std::vector<std::int64_t> pres;
                for (std::size_t ri : it->second.rows) pres.push_back(plan.rows[ri].pre_value);
                std::vector<minilang::StmtPtr> then_body;
                const auto* target = out.find_function(call->name);
                for (std::size_t a = 0; a < target->params.size(); ++a) {
                    ExprPtr v = a < call->children.size() ? call->children[a]->clone() : minilang::make_int(0);
                    then_body.push_back(minilang::make_assign("__wm_a" + std::to_string(a), std::move(v)));
                }
                then_body.push_back(cf_increment(first.caller_inc));
                then_body.push_back(flag_assign(1));
                then_body.push_back(minilang::make_call_stmt(minilang::make_call(first.callee, {})));
                std::vector<minilang::StmtPtr> else_body;
                else_body.push_back(std::move(s));
                nb.push_back(minilang::make_if(equals_any(pres), std::move(then_body), std::move(else_body)));
            }
            body = std::move(nb);
        };
        rewrite_block(rewrite_block, f.body);
    }

    // Entry instrumentation and continuation blocks per assigned function.
    for (auto& f : out.functions) {
        bool is_assigned = ctx.assigned.count(f.name) != 0;
        auto cont_it = ctx.continuations.find(f.name);
        if (!is_assigned && cont_it == ctx.continuations.end()) continue;

        std::vector<minilang::StmtPtr> prologue;
        if (is_assigned) {
            std::vector<std::int64_t> entry_values;
            std::vector<std::int64_t> skip_values;
            for (const auto& r : plan.rows) {
                if (r.callee != f.name) continue;
                entry_values.push_back(r.caller_value);
                if (is_water(r.tag) && r.mark != Mark::Last) skip_values.push_back(r.callee_value);
            }
            // Latch and clear the arrival flag before anything else runs.
            prologue.push_back(minilang::make_let(kLatch, minilang::make_var(kFlag)));
            prologue.push_back(flag_assign(0));
            if (mode == Mode::Naive) {
                if (!entry_values.empty()) {
                    std::vector<minilang::StmtPtr> then_body;
                    then_body.push_back(cf_increment(plan.cf.c));
                    prologue.push_back(minilang::make_if(equals_any(entry_values), std::move(then_body)));
                }
            } else {
                prologue.push_back(cf_increment(plan.cf.c));
            }
            if (!skip_values.empty()) {
                prologue.push_back(minilang::make_let(
                    "__wm_w", minilang::make_binary("&&", latch_set(),
                                                    equals_any(skip_values, mode == Mode::Stealthy))));
            }
            // Continuation blocks, merged per (callee, increment, mark shape).
            if (cont_it != ctx.continuations.end()) {
                struct Key {
                    std::string callee;
                    std::int64_t inc;
                    bool last;
                    bool chain;  // detour hop (guard requires the latch) vs inserted edge
                    auto operator<=>(const Key&) const = default;
                };
                std::vector<Key> order;
                std::map<Key, std::vector<std::int64_t>> groups;
                for (std::size_t ri : cont_it->second) {
                    const PlanRow& r = plan.rows[ri];
                    Key k{r.callee, r.caller_inc, r.mark == Mark::Last, r.mark != Mark::None};
                    if (!groups.count(k)) order.push_back(k);
                    groups[k].push_back(r.pre_value);
                }
                for (const Key& k : order) {
                    std::vector<minilang::StmtPtr> then_body;
                    then_body.push_back(cf_increment(k.inc));
                    std::vector<ExprPtr> args;
                    if (k.last) {
                        const auto* target = out.find_function(k.callee);
                        for (std::size_t a = 0; a < target->params.size(); ++a)
                            args.push_back(minilang::make_var("__wm_a" + std::to_string(a)));
                    } else {
                        then_body.push_back(flag_assign(1));
                    }
                    then_body.push_back(minilang::make_call_stmt(minilang::make_call(k.callee, std::move(args))));
                    ExprPtr guard = equals_any(groups[k]);
                    if (k.chain) guard = minilang::make_binary("&&", latch_set(), std::move(guard));
                    prologue.push_back(minilang::make_if(std::move(guard), std::move(then_body)));
                }
            }
            if (!skip_values.empty()) {
                auto gate = minilang::make_if(minilang::make_binary("==", minilang::make_var("__wm_w"), minilang::make_int(0)),
                                              std::move(f.body));
                f.body.clear();
                f.body.push_back(std::move(gate));
            }
            for (auto it2 = prologue.rbegin(); it2 != prologue.rend(); ++it2) f.body.insert(f.body.begin(), std::move(*it2));
        } else if (cont_it != ctx.continuations.end()) {
            throw Error("rewrite_program: continuation hosted in unassigned function '" + f.name + "'");
        }
    }

    // Globals: the cf-variable, the arrival flag and the stamping slots.
    out.globals.push_back({kCf, 0});
    out.globals.push_back({kFlag, 0});
    for (std::size_t a = 0; a < ctx.max_stamp; ++a) out.globals.push_back({"__wm_a" + std::to_string(a), 0});

    minilang::number_call_sites(out);
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline.

/// Normalize and, when the key trace touches more functions than the
/// watermark graph can host, inline the surplus (the functions appearing
/// latest in the first-appearance order) so the trace fits exactly.
inline MiniProgram prepare_program(const MiniProgram& p, const std::vector<std::int64_t>& key, std::uint64_t w) {
    MiniProgram prepared = normalize_program(p);
    const int need = 2 * bit_length(w) + 1 + 2;  // n* + 2
    ExecutionTrace trace = minilang::run_program(prepared, key);
    std::vector<std::string> order = minilang::distinct_functions_in_order(trace);
    if (static_cast<int>(order.size()) - 1 < need)
        throw Error("insufficient functions: key trace touches " + std::to_string(order.size() - 1) +
                    " besides main, watermark needs " + std::to_string(need));
    if (static_cast<int>(order.size()) - 1 > need) {
        std::set<std::string> surplus(order.begin() + 1 + need, order.end());
        inline_functions(prepared, surplus);
    }
    return prepared;
}

inline EmbeddingPlan plan_embedding(const MiniProgram& p, const std::vector<std::int64_t>& key, std::uint64_t w,
                                    const CfConfig& cf = {}) {
    MiniProgram prepared = prepare_program(p, key, w);
    return plan_from_trace(minilang::run_program(prepared, key), key, w, cf);
}

struct EmbedResult {
    MiniProgram program;  // P*
    EmbeddingPlan plan;
};

inline EmbedResult embed(const MiniProgram& p, const std::vector<std::int64_t>& key, std::uint64_t w, Mode mode,
                         CfConfig cf = {}) {
    if (mode == Mode::Stealthy && cf.wf_extra == 0) cf.wf_extra = 1;
    MiniProgram prepared = prepare_program(p, key, w);
    EmbeddingPlan plan = plan_from_trace(minilang::run_program(prepared, key), key, w, cf);
    EmbedResult res{rewrite_program(prepared, plan, mode), std::move(plan)};
    return res;
}

}  // namespace waterrpg::embed
