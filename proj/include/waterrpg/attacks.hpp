#pragma once

// Attack harness: seeded source transformations that probe whether the
// watermark survives, is detectably damaged, or is silently destroyed.
// Layout/data attacks (rename, reorder, dead code) must preserve both
// semantics and the watermark; guard-tampering attacks must never yield a
// silently wrong watermark while functionality still passes; inlining and
// outlining document the model's known boundary.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "waterrpg/embed/rewrite.hpp"
#include "waterrpg/extract.hpp"

namespace waterrpg::attacks {

using embed::MiniProgram;
using minilang::Expr;
using minilang::ExprPtr;
using minilang::Function;
using minilang::Stmt;
using minilang::StmtPtr;

enum class Kind {
    Identity,
    RenameIdentifiers,
    ReorderFunctions,
    InsertDeadCode,
    RemoveGuard,
    PerturbCfConstant,
    EdgeRetarget,
    InlineFunction,
    OutlineBlock,
};

inline std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Identity: return "identity";
        case Kind::RenameIdentifiers: return "rename-identifiers";
        case Kind::ReorderFunctions: return "reorder-functions";
        case Kind::InsertDeadCode: return "insert-dead-code";
        case Kind::RemoveGuard: return "remove-guard";
        case Kind::PerturbCfConstant: return "perturb-cf-constant";
        case Kind::EdgeRetarget: return "edge-retarget";
        case Kind::InlineFunction: return "inline";
        case Kind::OutlineBlock: return "outline";
    }
    return "?";
}

inline Kind kind_from_name(const std::string& s) {
    for (Kind k : {Kind::Identity, Kind::RenameIdentifiers, Kind::ReorderFunctions, Kind::InsertDeadCode, Kind::RemoveGuard,
                   Kind::PerturbCfConstant, Kind::EdgeRetarget, Kind::InlineFunction, Kind::OutlineBlock}) {
        if (kind_name(k) == s) return k;
    }
    throw Error("unknown attack kind '" + s + "'");
}

struct AttackSpec {
    Kind kind = Kind::Identity;
    std::uint64_t seed = 0;
    int site = -1;  // for remove-guard / perturb-cf-constant sweeps; -1 = seeded pick
};

namespace detail {

inline void walk_stmts(std::vector<StmtPtr>& body, const std::function<void(StmtPtr&)>& fn) {
    for (auto& s : body) {
        fn(s);
        walk_stmts(s->body, fn);
        walk_stmts(s->else_body, fn);
    }
}

inline void collect_vars(const Expr& e, std::set<std::string>& out) {
    if (e.kind == Expr::Kind::Var) out.insert(e.name);
    for (const auto& c : e.children) collect_vars(*c, out);
}

inline bool contains_call(const Expr& e) {
    if (e.kind == Expr::Kind::Call) return true;
    for (const auto& c : e.children) {
        if (contains_call(*c)) return true;
    }
    return false;
}

inline bool stmt_contains_call(const Stmt& s) {
    if (s.expr && contains_call(*s.expr)) return true;
    for (const auto& b : s.body) {
        if (stmt_contains_call(*b)) return true;
    }
    for (const auto& b : s.else_body) {
        if (stmt_contains_call(*b)) return true;
    }
    return false;
}

// --- rename ---------------------------------------------------------------

inline void rename_in_expr(Expr& e, const std::map<std::string, std::string>& vars,
                           const std::map<std::string, std::string>& fns) {
    if (e.kind == Expr::Kind::Var) {
        if (auto it = vars.find(e.name); it != vars.end()) e.name = it->second;
    } else if (e.kind == Expr::Kind::Call) {
        if (auto it = fns.find(e.name); it != fns.end()) e.name = it->second;
    }
    for (auto& c : e.children) rename_in_expr(*c, vars, fns);
}

inline MiniProgram rename_identifiers(const MiniProgram& p, std::uint64_t seed) {
    MiniProgram out = p.clone();
    std::mt19937_64 rng(seed);
    auto fresh = [&](const char* prefix, int i) { return std::string(prefix) + std::to_string(i) + "_" + std::to_string(rng() % 1000); };

    std::map<std::string, std::string> fns;
    int fi = 0;
    for (const auto& f : out.functions) {
        if (f.name != "main") fns[f.name] = fresh("q", fi++);
    }
    std::map<std::string, std::string> globals;
    int gi = 0;
    for (const auto& g : out.globals) globals[g.name] = fresh("v", gi++);

    for (auto& g : out.globals) g.name = globals[g.name];
    for (auto& f : out.functions) {
        if (auto it = fns.find(f.name); it != fns.end()) f.name = it->second;
        // Locals share one frame-wide scope: params plus every let name.
        std::map<std::string, std::string> vars = globals;
        int li = 0;
        for (auto& prm : f.params) {
            std::string nn = fresh("p", li++);
            vars[prm] = nn;
            prm = nn;
        }
        std::function<void(std::vector<StmtPtr>&)> declare = [&](std::vector<StmtPtr>& body) {
            for (auto& s : body) {
                if (s->kind == Stmt::Kind::Let && !vars.count(s->name)) vars[s->name] = fresh("l", li++);
                declare(s->body);
                declare(s->else_body);
            }
        };
        declare(f.body);
        walk_stmts(f.body, [&](StmtPtr& s) {
            if ((s->kind == Stmt::Kind::Let || s->kind == Stmt::Kind::Assign)) {
                if (auto it = vars.find(s->name); it != vars.end()) s->name = it->second;
            }
            if (s->expr) rename_in_expr(*s->expr, vars, fns);
        });
    }
    minilang::number_call_sites(out);
    return out;
}

// --- reorder --------------------------------------------------------------

inline bool stmt_writes(const Stmt& s, std::set<std::string>& writes, std::set<std::string>& reads) {
    // Conservative: returns false (do not move) for control flow and prints.
    if (s.kind == Stmt::Kind::Let || s.kind == Stmt::Kind::Assign) {
        if (stmt_contains_call(s)) return false;
        writes.insert(s.name);
        collect_vars(*s.expr, reads);
        return true;
    }
    return false;
}

inline MiniProgram reorder_functions(const MiniProgram& p, std::uint64_t seed) {
    MiniProgram out = p.clone();
    std::mt19937_64 rng(seed);
    std::shuffle(out.functions.begin(), out.functions.end(), rng);

    // Swap adjacent call-free let/assign pairs with disjoint variable sets.
    for (auto& f : out.functions) {
        std::function<void(std::vector<StmtPtr>&)> shuffle_block = [&](std::vector<StmtPtr>& body) {
            for (auto& s : body) {
                shuffle_block(s->body);
                shuffle_block(s->else_body);
            }
            for (std::size_t i = 0; i + 1 < body.size(); ++i) {
                if (rng() % 2 == 0) continue;
                std::set<std::string> w1, r1, w2, r2;
                if (!stmt_writes(*body[i], w1, r1) || !stmt_writes(*body[i + 1], w2, r2)) continue;
                // Lets introduce names; swapping a let past a reader/writer of
                // that name would change bindings, so require full disjointness.
                auto disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b) {
                    for (const auto& x : a) {
                        if (b.count(x)) return false;
                    }
                    return true;
                };
                if (disjoint(w1, w2) && disjoint(w1, r2) && disjoint(w2, r1)) std::swap(body[i], body[i + 1]);
            }
        };
        shuffle_block(f.body);
    }
    minilang::number_call_sites(out);
    return out;
}

// --- dead code ------------------------------------------------------------

inline MiniProgram insert_dead_code(const MiniProgram& p, std::uint64_t seed) {
    MiniProgram out = p.clone();
    std::mt19937_64 rng(seed);
    int di = 0;
    for (auto& f : out.functions) {
        std::function<void(std::vector<StmtPtr>&)> visit = [&](std::vector<StmtPtr>& body) {
            for (auto& s : body) {
                visit(s->body);
                visit(s->else_body);
            }
            if (rng() % 2 == 0) return;
            std::string v = "__dead" + std::to_string(di++);
            std::vector<StmtPtr> junk;
            junk.push_back(minilang::make_let(v, minilang::make_int(static_cast<std::int64_t>(rng() % 100))));
            junk.push_back(minilang::make_assign(v, minilang::make_binary("*", minilang::make_var(v), minilang::make_int(7))));
            junk.push_back(std::make_unique<Stmt>());
            junk.back()->kind = Stmt::Kind::Print;
            junk.back()->expr = minilang::make_var(v);
            auto block = minilang::make_if(minilang::make_int(0), std::move(junk));
            std::size_t pos = body.empty() ? 0 : rng() % (body.size() + 1);
            body.insert(body.begin() + static_cast<std::ptrdiff_t>(pos), std::move(block));
        };
        visit(f.body);
    }
    minilang::number_call_sites(out);
    return out;
}

// --- guard tampering ------------------------------------------------------

/// A guard statement: an if whose condition compares some variable against
/// integer constants and whose then-branch starts with `v = v + <int>`.
inline bool looks_like_guard(const Stmt& s) {
    if (s.kind != Stmt::Kind::If || s.body.empty() || !s.else_body.empty()) return false;
    std::set<std::string> vars;
    collect_vars(*s.expr, vars);
    if (vars.size() != 1) return false;
    const Stmt& first = *s.body.front();
    if (first.kind != Stmt::Kind::Assign) return false;
    const Expr& rhs = *first.expr;
    return rhs.kind == Expr::Kind::Binary && rhs.name == "+" && rhs.children[0]->kind == Expr::Kind::Var &&
           rhs.children[0]->name == first.name && rhs.children[1]->kind == Expr::Kind::IntLit && vars.count(first.name) != 0;
}

/// Collect pointers to guard statements in definition order.
inline std::vector<Stmt*> guard_statements(MiniProgram& p) {
    std::vector<Stmt*> out;
    for (auto& f : p.functions) {
        walk_stmts(f.body, [&](StmtPtr& s) {
            if (looks_like_guard(*s)) out.push_back(s.get());
        });
    }
    return out;
}

inline int count_guards(const MiniProgram& p) {
    MiniProgram copy = p.clone();
    return static_cast<int>(guard_statements(copy).size());
}

inline MiniProgram remove_guard(const MiniProgram& p, std::uint64_t seed, int site) {
    MiniProgram out = p.clone();
    std::vector<Stmt*> guards = guard_statements(out);
    if (guards.empty()) throw Error("remove-guard: no guard statements found");
    std::size_t idx = site >= 0 ? static_cast<std::size_t>(site) : std::mt19937_64(seed)() % guards.size();
    if (idx >= guards.size()) throw Error("remove-guard: site index out of range");
    Stmt* victim = guards[idx];
    bool removed = false;
    for (auto& f : out.functions) {
        std::function<void(std::vector<StmtPtr>&)> visit = [&](std::vector<StmtPtr>& body) {
            for (auto it = body.begin(); it != body.end(); ++it) {
                if (it->get() == victim) {
                    body.erase(it);
                    removed = true;
                    return;
                }
                visit((*it)->body);
                visit((*it)->else_body);
                if (removed) return;
            }
        };
        visit(f.body);
        if (removed) break;
    }
    minilang::number_call_sites(out);
    return out;
}

inline MiniProgram perturb_cf_constant(const MiniProgram& p, std::uint64_t seed, int site) {
    MiniProgram out = p.clone();
    // Candidates: every integer literal inside a guard statement (comparison
    // operands and the increment).
    std::vector<Expr*> lits;
    for (auto& f : out.functions) {
        walk_stmts(f.body, [&](StmtPtr& s) {
            if (!looks_like_guard(*s)) return;
            std::function<void(Expr&)> grab = [&](Expr& e) {
                if (e.kind == Expr::Kind::IntLit) lits.push_back(&e);
                for (auto& c : e.children) grab(*c);
            };
            grab(*s->expr);
            grab(*s->body.front()->expr);
        });
    }
    if (lits.empty()) throw Error("perturb-cf-constant: no guard constants found");
    std::mt19937_64 rng(seed);
    std::size_t idx = site >= 0 ? static_cast<std::size_t>(site) : rng() % lits.size();
    if (idx >= lits.size()) throw Error("perturb-cf-constant: site index out of range");
    std::int64_t delta = 1 + static_cast<std::int64_t>(rng() % 3);
    lits[idx]->value += (rng() % 2 == 0) ? delta : -delta;
    return out;
}

// --- inline / outline -----------------------------------------------------

inline MiniProgram inline_attack(const MiniProgram& p, std::uint64_t seed) {
    MiniProgram out = p.clone();
    std::vector<std::string> candidates;
    for (const auto& f : out.functions) {
        if (f.name != "main" && !embed::detail::calls_function(f.body, f.name)) candidates.push_back(f.name);
    }
    if (candidates.empty()) throw Error("inline: no inlinable function");
    std::mt19937_64 rng(seed);
    embed::inline_function(out, candidates[rng() % candidates.size()]);
    return out;
}

inline MiniProgram outline_attack(const MiniProgram& p, std::uint64_t seed) {
    MiniProgram out = p.clone();
    std::set<std::string> global_names;
    for (const auto& g : out.globals) global_names.insert(g.name);
    // Candidates: top-level statements that touch only globals (so they can
    // move into a fresh function unchanged) and are not lets.
    struct Cand {
        Function* fn;
        std::size_t index;
    };
    std::vector<Cand> cands;
    for (auto& f : out.functions) {
        for (std::size_t i = 0; i < f.body.size(); ++i) {
            const Stmt& s = *f.body[i];
            if (s.kind == Stmt::Kind::Let || s.kind == Stmt::Kind::Return) continue;
            std::set<std::string> vars;
            std::function<void(const Stmt&)> grab = [&](const Stmt& st) {
                if (st.kind == Stmt::Kind::Let) vars.insert("__not_outlineable__");
                if (st.expr) collect_vars(*st.expr, vars);
                if (st.kind == Stmt::Kind::Assign) vars.insert(st.name);
                for (const auto& b : st.body) grab(*b);
                for (const auto& b : st.else_body) grab(*b);
            };
            grab(s);
            bool ok = true;
            for (const auto& v : vars) {
                if (!global_names.count(v)) {
                    ok = false;
                    break;
                }
            }
            if (ok) cands.push_back({&f, i});
        }
    }
    if (cands.empty()) throw Error("outline: no outlineable statement");
    std::mt19937_64 rng(seed);
    Cand c = cands[rng() % cands.size()];
    std::string name = "__out" + std::to_string(rng() % 10000);
    Function nf;
    nf.name = name;
    nf.body.push_back(std::move(c.fn->body[c.index]));
    c.fn->body[c.index] = minilang::make_call_stmt(minilang::make_call(name, {}));
    out.functions.push_back(std::move(nf));
    minilang::number_call_sites(out);
    return out;
}

}  // namespace detail

/// Number of attackable guard/constant sites in a program (for site sweeps).
using detail::count_guards;

/// Apply a source-level attack.  edge-retarget needs re-embedding context and
/// is handled by run_gauntlet / the CLI, not here.
inline MiniProgram attack_program(const MiniProgram& p, const AttackSpec& spec) {
    switch (spec.kind) {
        case Kind::Identity: return p.clone();
        case Kind::RenameIdentifiers: return detail::rename_identifiers(p, spec.seed);
        case Kind::ReorderFunctions: return detail::reorder_functions(p, spec.seed);
        case Kind::InsertDeadCode: return detail::insert_dead_code(p, spec.seed);
        case Kind::RemoveGuard: return detail::remove_guard(p, spec.seed, spec.site);
        case Kind::PerturbCfConstant: return detail::perturb_cf_constant(p, spec.seed, spec.site);
        case Kind::InlineFunction: return detail::inline_attack(p, spec.seed);
        case Kind::OutlineBlock: return detail::outline_attack(p, spec.seed);
        case Kind::EdgeRetarget: throw Error("edge-retarget requires the embedding context; use run_gauntlet");
    }
    throw Error("attack_program: unknown kind");
}

/// Re-embed with one water row retargeted to a different assigned function:
/// a graph-level tamper of a single watermark edge.
inline MiniProgram edge_retarget(const MiniProgram& p, const std::vector<std::int64_t>& key, std::uint64_t w,
                                 embed::Mode mode, std::uint64_t seed) {
    embed::MiniProgram prepared = embed::prepare_program(p, key, w);
    embed::EmbeddingPlan plan = embed::plan_from_trace(minilang::run_program(prepared, key), key, w,
                                                       mode == embed::Mode::Stealthy ? embed::CfConfig{3, 2, 1, 1}
                                                                                     : embed::CfConfig{});
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> water;
    for (std::size_t i = 0; i < plan.rows.size(); ++i) {
        if (embed::is_water(plan.rows[i].tag)) water.push_back(i);
    }
    if (water.empty()) throw Error("edge-retarget: plan has no water rows");
    embed::PlanRow& row = plan.rows[water[rng() % water.size()]];
    std::vector<int> others;
    for (int n = 0; n <= plan.graph.s_label(); ++n) {
        if (n != row.callee_node && n != row.caller_node) others.push_back(n);
    }
    int nn = others[rng() % others.size()];
    row.callee_node = nn;
    row.callee = plan.assignment[static_cast<std::size_t>(nn)];
    if (row.mark == embed::Mark::Last) row.mark = embed::Mark::Mid;  // no longer realizes the original call
    return embed::rewrite_program(prepared, plan, mode);
}

// ---------------------------------------------------------------------------
// Gauntlet.

struct AttackReport {
    Kind kind = Kind::Identity;
    std::uint64_t seed = 0;
    bool functionality_preserved = false;
    std::string extraction;      // "<w>" | "detected" | "wrong"
    std::string classification;  // survived | detected | defeated
};

inline std::string report_line(const AttackReport& r) {
    std::ostringstream out;
    out << "attack=" << kind_name(r.kind) << " seed=" << r.seed << " functionality=" << (r.functionality_preserved ? "ok" : "broken")
        << " extraction=" << r.extraction;
    return out.str();
}

inline bool outputs_match(const MiniProgram& a, const MiniProgram& b, const std::vector<std::vector<std::int64_t>>& inputs) {
    for (const auto& in : inputs) {
        std::vector<std::int64_t> oa, ob;
        try {
            oa = minilang::run_program(a, in).output;
        } catch (const Error&) {
            oa = {INT64_MIN};  // sentinel: original failed; require same failure class
            try {
                (void)minilang::run_program(b, in);
                return false;
            } catch (const Error&) {
                continue;
            }
        }
        try {
            ob = minilang::run_program(b, in).output;
        } catch (const Error&) {
            return false;
        }
        if (oa != ob) return false;
    }
    return true;
}

/// Embed, attack, and classify each spec.  `inputs` is the functionality
/// suite (key plus non-key inputs).
inline std::vector<AttackReport> run_gauntlet(const MiniProgram& p, const std::vector<std::int64_t>& key, std::uint64_t w,
                                              const std::vector<AttackSpec>& specs, embed::Mode mode,
                                              const std::vector<std::vector<std::int64_t>>& inputs) {
    embed::EmbedResult base = embed::embed(p, key, w, mode);
    std::vector<AttackReport> reports;
    for (const AttackSpec& spec : specs) {
        AttackReport r;
        r.kind = spec.kind;
        r.seed = spec.seed;
        MiniProgram attacked;
        try {
            attacked = spec.kind == Kind::EdgeRetarget ? edge_retarget(p, key, w, mode, spec.seed)
                                                       : attack_program(base.program, spec);
        } catch (const Error&) {
            r.functionality_preserved = false;
            r.extraction = "detected";
            r.classification = "detected";
            reports.push_back(std::move(r));
            continue;
        }
        r.functionality_preserved = outputs_match(p, attacked, inputs);
        try {
            ExtractionResult ex = extract_watermark(attacked, key);
            if (ex.watermark == w) {
                r.extraction = std::to_string(ex.watermark);
                r.classification = "survived";
            } else {
                r.extraction = "wrong";
                r.classification = "defeated";
            }
        } catch (const Error&) {
            r.extraction = "detected";
            r.classification = "detected";
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace waterrpg::attacks
