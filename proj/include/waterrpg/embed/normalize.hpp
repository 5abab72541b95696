#pragma once

// Call-hoisting normalization.  After normalization every call expression is
// either a bare call statement or the sole right-hand side of a let/assign,
// so caller-side instrumentation can be inserted as a statement immediately
// before the call.  Evaluation of && and || is strict, so hoisting embedded
// calls in evaluation order preserves the invocation-event sequence.

#include <string>
#include <vector>

#include "waterrpg/minilang/ast.hpp"

namespace waterrpg::embed {

using minilang::Expr;
using minilang::ExprPtr;
using minilang::Function;
using minilang::MiniProgram;
using minilang::Stmt;
using minilang::StmtPtr;

namespace detail {

struct Hoister {
    int next_temp = 1;

    std::string fresh() { return "__wm_t" + std::to_string(next_temp++); }

    bool contains_call(const Expr& e) const {
        if (e.kind == Expr::Kind::Call) return true;
        for (const auto& c : e.children) {
            if (contains_call(*c)) return true;
        }
        return false;
    }

    /// Hoist every call strictly inside `e` (children in evaluation order)
    /// into let-statements appended to `pre`, leaving variables behind.
    /// `e` itself is left in place even when it is a call, so the caller
    /// decides whether a top-level call may stay.
    void hoist_children(ExprPtr& e, std::vector<StmtPtr>& pre) {
        for (auto& c : e->children) {
            hoist_children(c, pre);
            if (c->kind == Expr::Kind::Call) {
                std::string t = fresh();
                pre.push_back(minilang::make_let(t, std::move(c)));
                c = minilang::make_var(t);
            }
        }
    }

    /// Normalize `e` in a statement position where a top-level call is
    /// allowed to remain (let/assign RHS).
    void hoist_rhs(ExprPtr& e, std::vector<StmtPtr>& pre) { hoist_children(e, pre); }

    /// Normalize `e` where no call may remain (conditions, print, return).
    void hoist_all(ExprPtr& e, std::vector<StmtPtr>& pre) {
        hoist_children(e, pre);
        if (e->kind == Expr::Kind::Call) {
            std::string t = fresh();
            pre.push_back(minilang::make_let(t, std::move(e)));
            e = minilang::make_var(t);
        }
    }

    std::vector<StmtPtr> normalize_block(std::vector<StmtPtr> body) {
        std::vector<StmtPtr> out;
        for (auto& s : body) {
            switch (s->kind) {
                case Stmt::Kind::Let:
                case Stmt::Kind::Assign:
                    hoist_rhs(s->expr, out);
                    out.push_back(std::move(s));
                    break;
                case Stmt::Kind::CallStmt:
                    hoist_children(s->expr, out);
                    out.push_back(std::move(s));
                    break;
                case Stmt::Kind::Print:
                case Stmt::Kind::Return:
                    if (s->expr && s->has_expr) hoist_all(s->expr, out);
                    out.push_back(std::move(s));
                    break;
                case Stmt::Kind::If: {
                    hoist_all(s->expr, out);
                    s->body = normalize_block(std::move(s->body));
                    s->else_body = normalize_block(std::move(s->else_body));
                    out.push_back(std::move(s));
                    break;
                }
                case Stmt::Kind::While: {
                    if (!contains_call(*s->expr)) {
                        s->body = normalize_block(std::move(s->body));
                        out.push_back(std::move(s));
                        break;
                    }
                    // while (C) { B }  with calls in C becomes
                    //   <lets for C's calls> let __c = C';
                    //   while (__c) { B'; <re-assign hoists> __c = C'; }
                    ExprPtr cond = std::move(s->expr);
                    std::vector<StmtPtr> pre;
                    hoist_all(cond, pre);  // cond ends call-free; pre holds the lets
                    // Each hoisted let already has a normalized RHS, so the
                    // loop tail re-runs the same computations as assignments.
                    std::vector<StmtPtr> tail;
                    for (const auto& p : pre) tail.push_back(minilang::make_assign(p->name, p->expr->clone()));
                    for (auto& p : pre) out.push_back(std::move(p));
                    auto loop = std::make_unique<Stmt>();
                    loop->kind = Stmt::Kind::While;
                    loop->expr = std::move(cond);
                    loop->body = normalize_block(std::move(s->body));
                    for (auto& t : tail) loop->body.push_back(std::move(t));
                    out.push_back(std::move(loop));
                    break;
                }
            }
        }
        return out;
    }
};

}  // namespace detail

/// Returns a semantically equivalent program in which every call expression
/// sits at statement level.
inline MiniProgram normalize_program(const MiniProgram& p) {
    MiniProgram out = p.clone();
    detail::Hoister h;
    for (auto& f : out.functions) f.body = h.normalize_block(std::move(f.body));
    minilang::number_call_sites(out);
    return out;
}

/// True when every call is a bare call statement or the sole RHS of a
/// let/assign.
inline bool is_normalized(const MiniProgram& p) {
    auto expr_has_inner_call = [](auto&& self, const Expr& e) -> bool {
        for (const auto& c : e.children) {
            if (c->kind == Expr::Kind::Call || self(self, *c)) return true;
        }
        return false;
    };
    auto check_block = [&](auto&& self, const std::vector<StmtPtr>& body) -> bool {
        for (const auto& s : body) {
            if (s->expr) {
                bool top_call_ok = s->kind == Stmt::Kind::Let || s->kind == Stmt::Kind::Assign || s->kind == Stmt::Kind::CallStmt;
                if (!top_call_ok && s->expr->kind == Expr::Kind::Call) return false;
                if (expr_has_inner_call(expr_has_inner_call, *s->expr)) return false;
            }
            if (!self(self, s->body) || !self(self, s->else_body)) return false;
        }
        return true;
    };
    for (const auto& f : p.functions) {
        if (!check_block(check_block, f.body)) return false;
    }
    return true;
}

}  // namespace waterrpg::embed
