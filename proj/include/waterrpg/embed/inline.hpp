#pragma once

// Function inlining over normalized programs.  Used in two places: the
// embedder inlines traced functions that exceed the node budget, and the
// attack gauntlet inlines functions to try to destroy watermark nodes.
//
// Requires the program to be normalized (calls only at statement level).
// `return e;` inside the inlined body becomes a result assignment plus a
// done-flag; trailing statements and loop conditions are fenced on the flag.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "waterrpg/embed/normalize.hpp"

namespace waterrpg::embed {

namespace detail {

struct Inliner {
    MiniProgram& program;
    int next_id = 1;

    std::string fresh(const std::string& hint) { return "__in" + std::to_string(next_id++) + "_" + hint; }

    /// Whether a block contains a return statement anywhere.
    static bool block_returns(const std::vector<StmtPtr>& body) {
        for (const auto& s : body) {
            if (s->kind == Stmt::Kind::Return) return true;
            if (block_returns(s->body) || block_returns(s->else_body)) return true;
        }
        return false;
    }

    static void rename_expr(Expr& e, const std::map<std::string, std::string>& names) {
        if (e.kind == Expr::Kind::Var) {
            if (auto it = names.find(e.name); it != names.end()) e.name = it->second;
        }
        for (auto& c : e.children) rename_expr(*c, names);
    }

    /// Rewrite an inlined body block: rename locals, lower returns to
    /// `result = e; done = 1;`, fence statements after a possible return.
    std::vector<StmtPtr> lower_block(const std::vector<StmtPtr>& body, std::map<std::string, std::string>& names,
                                     const std::string& result_var, const std::string& done_var) {
        std::vector<StmtPtr> out;
        std::vector<StmtPtr>* sink = &out;
        for (const auto& src : body) {
            StmtPtr s = src->clone();
            bool may_return = false;
            switch (s->kind) {
                case Stmt::Kind::Let: {
                    std::string renamed = fresh(s->name);
                    if (s->expr) rename_expr(*s->expr, names);
                    names[s->name] = renamed;
                    s->name = renamed;
                    break;
                }
                case Stmt::Kind::Assign:
                    rename_expr(*s->expr, names);
                    if (auto it = names.find(s->name); it != names.end()) s->name = it->second;
                    break;
                case Stmt::Kind::Print:
                case Stmt::Kind::CallStmt:
                    rename_expr(*s->expr, names);
                    break;
                case Stmt::Kind::Return: {
                    auto done = minilang::make_assign(done_var, minilang::make_int(1));
                    if (s->has_expr) {
                        rename_expr(*s->expr, names);
                        sink->push_back(minilang::make_assign(result_var, std::move(s->expr)));
                    }
                    sink->push_back(std::move(done));
                    // Everything after an unconditional return is dead.
                    return out;
                }
                case Stmt::Kind::If: {
                    rename_expr(*s->expr, names);
                    may_return = block_returns(s->body) || block_returns(s->else_body);
                    std::map<std::string, std::string> then_names = names;
                    auto then_body = lower_block(s->body, then_names, result_var, done_var);
                    std::map<std::string, std::string> else_names = names;
                    auto else_body = lower_block(s->else_body, else_names, result_var, done_var);
                    s->body = std::move(then_body);
                    s->else_body = std::move(else_body);
                    break;
                }
                case Stmt::Kind::While: {
                    rename_expr(*s->expr, names);
                    may_return = block_returns(s->body);
                    std::map<std::string, std::string> loop_names = names;
                    s->body = lower_block(s->body, loop_names, result_var, done_var);
                    if (may_return) {
                        // while (c) -> while (done == 0 && c)
                        s->expr = minilang::make_binary("&&",
                                                        minilang::make_binary("==", minilang::make_var(done_var), minilang::make_int(0)),
                                                        std::move(s->expr));
                    }
                    break;
                }
            }
            sink->push_back(std::move(s));
            if (may_return) {
                // Fence the remainder of this block behind the done-flag.
                auto fence = minilang::make_if(minilang::make_binary("==", minilang::make_var(done_var), minilang::make_int(0)), {});
                Stmt* fence_raw = fence.get();
                sink->push_back(std::move(fence));
                sink = &fence_raw->body;
            }
        }
        return out;
    }

    /// Expand one call statement in place: returns the replacement statements.
    std::vector<StmtPtr> expand_call(const Expr& call, const std::string& assign_to, bool is_let) {
        const Function* callee = program.find_function(call.name);
        std::vector<StmtPtr> out;
        std::string result_var = fresh("r");
        std::string done_var = fresh("d");
        out.push_back(minilang::make_let(result_var, minilang::make_int(0)));
        out.push_back(minilang::make_let(done_var, minilang::make_int(0)));
        std::map<std::string, std::string> names;
        for (std::size_t i = 0; i < callee->params.size(); ++i) {
            std::string p = fresh(callee->params[i]);
            names[callee->params[i]] = p;
            out.push_back(minilang::make_let(p, i < call.children.size() ? call.children[i]->clone() : minilang::make_int(0)));
        }
        auto body = lower_block(callee->body, names, result_var, done_var);
        for (auto& s : body) out.push_back(std::move(s));
        if (!assign_to.empty()) {
            out.push_back(is_let ? minilang::make_let(assign_to, minilang::make_var(result_var))
                                 : minilang::make_assign(assign_to, minilang::make_var(result_var)));
        }
        return out;
    }

    /// Inline every statement-level call to `target` in `body`.
    void inline_in_block(std::vector<StmtPtr>& body, const std::string& target) {
        std::vector<StmtPtr> out;
        for (auto& s : body) {
            inline_in_block(s->body, target);
            inline_in_block(s->else_body, target);
            bool expanded = false;
            if (s->kind == Stmt::Kind::CallStmt && s->expr->name == target) {
                for (auto& r : expand_call(*s->expr, "", false)) out.push_back(std::move(r));
                expanded = true;
            } else if ((s->kind == Stmt::Kind::Let || s->kind == Stmt::Kind::Assign) && s->expr->kind == Expr::Kind::Call &&
                       s->expr->name == target) {
                for (auto& r : expand_call(*s->expr, s->name, s->kind == Stmt::Kind::Let)) out.push_back(std::move(r));
                expanded = true;
            }
            if (!expanded) out.push_back(std::move(s));
        }
        body = std::move(out);
    }
};

inline bool calls_function(const std::vector<StmtPtr>& body, const std::string& name) {
    auto expr_calls = [&](auto&& self, const Expr& e) -> bool {
        if (e.kind == Expr::Kind::Call && e.name == name) return true;
        for (const auto& c : e.children) {
            if (self(self, *c)) return true;
        }
        return false;
    };
    for (const auto& s : body) {
        if (s->expr && expr_calls(expr_calls, *s->expr)) return true;
        if (calls_function(s->body, name) || calls_function(s->else_body, name)) return true;
    }
    return false;
}

}  // namespace detail

/// Inline all calls to `name` everywhere and remove its definition.
/// The program must be normalized; `name` must not be recursive or main.
inline void inline_function(MiniProgram& p, const std::string& name) {
    if (name == "main") throw Error("inline_function: cannot inline main");
    const Function* f = p.find_function(name);
    if (!f) throw Error("inline_function: no function named '" + name + "'");
    if (detail::calls_function(f->body, name)) throw Error("inline_function: '" + name + "' is recursive");
    if (!is_normalized(p)) throw Error("inline_function: program is not normalized");

    detail::Inliner inliner{p};
    // Find a safe starting id for fresh __inN_ temporaries by scanning the
    // serialized text, so repeated inlining never collides.
    {
        std::string text = minilang::serialize_program(p);
        std::size_t pos = 0;
        while ((pos = text.find("__in", pos)) != std::string::npos) {
            std::size_t q = pos + 4;
            int v = 0;
            bool digits = false;
            while (q < text.size() && std::isdigit(static_cast<unsigned char>(text[q]))) {
                v = v * 10 + (text[q] - '0');
                digits = true;
                ++q;
            }
            if (digits && v >= inliner.next_id) inliner.next_id = v + 1;
            pos = q;
        }
    }
    for (auto& fn : p.functions) {
        if (fn.name == name) continue;
        inliner.inline_in_block(fn.body, name);
    }
    std::erase_if(p.functions, [&](const Function& fn) { return fn.name == name; });
    minilang::number_call_sites(p);
}

/// Inline the set of functions in dependency order (callee before caller
/// within the set).  Throws on recursion inside the set.
inline void inline_functions(MiniProgram& p, const std::set<std::string>& names) {
    std::set<std::string> remaining = names;
    while (!remaining.empty()) {
        // Pick one that calls no other remaining member, so each member is
        // inlined at most once per site cascade.
        std::string pick;
        for (const auto& n : remaining) {
            const Function* f = p.find_function(n);
            if (!f) throw Error("inline_functions: no function named '" + n + "'");
            bool calls_other = false;
            for (const auto& m : remaining) {
                if (m != n && detail::calls_function(f->body, m)) {
                    calls_other = true;
                    break;
                }
            }
            if (!calls_other) {
                pick = n;
                break;
            }
        }
        if (pick.empty()) throw Error("inline_functions: recursion among functions to inline");
        inline_function(p, pick);
        remaining.erase(pick);
    }
}

}  // namespace waterrpg::embed
