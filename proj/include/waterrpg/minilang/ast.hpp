#pragma once

// AST for the toy language that carries the watermark.  Integer-only,
// deterministic, no heap objects.  Logical && and || evaluate both sides.

#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "waterrpg/error.hpp"

namespace waterrpg::minilang {

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;

struct Expr {
    enum class Kind { IntLit, Var, Unary, Binary, Call, Arg, NumArgs };

    Kind kind = Kind::IntLit;
    std::int64_t value = 0;          // IntLit
    std::string name;                // Var name, Call target, Unary/Binary operator
    std::vector<ExprPtr> children;   // operands / call arguments / arg() index
    int site_id = 0;                 // unique per Call, assigned by number_call_sites()

    ExprPtr clone() const {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->value = value;
        e->name = name;
        e->site_id = site_id;
        for (const auto& c : children) e->children.push_back(c->clone());
        return e;
    }
};

inline ExprPtr make_int(std::int64_t v) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::IntLit;
    e->value = v;
    return e;
}

inline ExprPtr make_var(std::string name) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Var;
    e->name = std::move(name);
    return e;
}

inline ExprPtr make_binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Binary;
    e->name = std::move(op);
    e->children.push_back(std::move(lhs));
    e->children.push_back(std::move(rhs));
    return e;
}

inline ExprPtr make_unary(std::string op, ExprPtr operand) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Unary;
    e->name = std::move(op);
    e->children.push_back(std::move(operand));
    return e;
}

inline ExprPtr make_call(std::string target, std::vector<ExprPtr> args) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Call;
    e->name = std::move(target);
    e->children = std::move(args);
    return e;
}

struct Stmt {
    enum class Kind { Let, Assign, If, While, Return, Print, CallStmt };

    Kind kind = Kind::Let;
    std::string name;                 // Let/Assign target
    ExprPtr expr;                     // RHS / condition / return value / print value / call expr
    std::vector<StmtPtr> body;        // If-then / While body
    std::vector<StmtPtr> else_body;   // If-else
    bool has_expr = true;             // false for bare `return;`

    StmtPtr clone() const {
        auto s = std::make_unique<Stmt>();
        s->kind = kind;
        s->name = name;
        s->has_expr = has_expr;
        if (expr) s->expr = expr->clone();
        for (const auto& b : body) s->body.push_back(b->clone());
        for (const auto& b : else_body) s->else_body.push_back(b->clone());
        return s;
    }
};

inline StmtPtr make_let(std::string name, ExprPtr rhs) {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Let;
    s->name = std::move(name);
    s->expr = std::move(rhs);
    return s;
}

inline StmtPtr make_assign(std::string name, ExprPtr rhs) {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Assign;
    s->name = std::move(name);
    s->expr = std::move(rhs);
    return s;
}

inline StmtPtr make_if(ExprPtr cond, std::vector<StmtPtr> then_body, std::vector<StmtPtr> else_body = {}) {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::If;
    s->expr = std::move(cond);
    s->body = std::move(then_body);
    s->else_body = std::move(else_body);
    return s;
}

inline StmtPtr make_call_stmt(ExprPtr call) {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::CallStmt;
    s->expr = std::move(call);
    return s;
}

struct Function {
    std::string name;
    std::vector<std::string> params;
    std::vector<StmtPtr> body;

    Function clone() const {
        Function f;
        f.name = name;
        f.params = params;
        for (const auto& s : body) f.body.push_back(s->clone());
        return f;
    }
};

struct GlobalDecl {
    std::string name;
    std::int64_t init = 0;
};

struct MiniProgram {
    std::vector<GlobalDecl> globals;
    std::vector<Function> functions;

    MiniProgram clone() const {
        MiniProgram p;
        p.globals = globals;
        for (const auto& f : functions) p.functions.push_back(f.clone());
        return p;
    }

    const Function* find_function(const std::string& name) const {
        for (const auto& f : functions)
            if (f.name == name) return &f;
        return nullptr;
    }

    Function* find_function(const std::string& name) {
        for (auto& f : functions)
            if (f.name == name) return &f;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Canonical printer.

namespace detail {

inline int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") return 3;
    if (op == "+" || op == "-") return 4;
    return 5;  // * / %
}

inline void print_expr(std::ostream& out, const Expr& e, int parent_prec) {
    switch (e.kind) {
        case Expr::Kind::IntLit:
            out << e.value;
            break;
        case Expr::Kind::Var:
            out << e.name;
            break;
        case Expr::Kind::Unary:
            out << e.name;
            print_expr(out, *e.children[0], 6);
            break;
        case Expr::Kind::Binary: {
            int prec = precedence(e.name);
            bool paren = prec < parent_prec;
            if (paren) out << "(";
            print_expr(out, *e.children[0], prec);
            out << " " << e.name << " ";
            print_expr(out, *e.children[1], prec + 1);
            if (paren) out << ")";
            break;
        }
        case Expr::Kind::Call:
        case Expr::Kind::Arg:
        case Expr::Kind::NumArgs: {
            out << (e.kind == Expr::Kind::Call ? e.name : (e.kind == Expr::Kind::Arg ? "arg" : "num_args")) << "(";
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out << ", ";
                print_expr(out, *e.children[i], 0);
            }
            out << ")";
            break;
        }
    }
}

inline void print_block(std::ostream& out, const std::vector<StmtPtr>& body, int indent);

inline void print_stmt(std::ostream& out, const Stmt& s, int indent) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    out << pad;
    switch (s.kind) {
        case Stmt::Kind::Let:
            out << "let " << s.name << " = ";
            print_expr(out, *s.expr, 0);
            out << ";\n";
            break;
        case Stmt::Kind::Assign:
            out << s.name << " = ";
            print_expr(out, *s.expr, 0);
            out << ";\n";
            break;
        case Stmt::Kind::If:
            out << "if (";
            print_expr(out, *s.expr, 0);
            out << ") {\n";
            print_block(out, s.body, indent + 1);
            out << pad << "}";
            if (!s.else_body.empty()) {
                out << " else {\n";
                print_block(out, s.else_body, indent + 1);
                out << pad << "}";
            }
            out << "\n";
            break;
        case Stmt::Kind::While:
            out << "while (";
            print_expr(out, *s.expr, 0);
            out << ") {\n";
            print_block(out, s.body, indent + 1);
            out << pad << "}\n";
            break;
        case Stmt::Kind::Return:
            out << "return";
            if (s.has_expr) {
                out << " ";
                print_expr(out, *s.expr, 0);
            }
            out << ";\n";
            break;
        case Stmt::Kind::Print:
            out << "print ";
            print_expr(out, *s.expr, 0);
            out << ";\n";
            break;
        case Stmt::Kind::CallStmt:
            print_expr(out, *s.expr, 0);
            out << ";\n";
            break;
    }
}

inline void print_block(std::ostream& out, const std::vector<StmtPtr>& body, int indent) {
    for (const auto& s : body) print_stmt(out, *s, indent);
}

}  // namespace detail

inline std::string serialize_program(const MiniProgram& p) {
    std::ostringstream out;
    for (const auto& g : p.globals) out << "global " << g.name << " = " << g.init << ";\n";
    if (!p.globals.empty()) out << "\n";
    for (std::size_t i = 0; i < p.functions.size(); ++i) {
        const auto& f = p.functions[i];
        if (i) out << "\n";
        out << "fn " << f.name << "(";
        for (std::size_t j = 0; j < f.params.size(); ++j) {
            if (j) out << ", ";
            out << f.params[j];
        }
        out << ") {\n";
        detail::print_block(out, f.body, 1);
        out << "}\n";
    }
    return out.str();
}

/// Assign a distinct positive site_id to every call expression, in
/// definition order.  Returns the number of call sites.
inline int number_call_sites(MiniProgram& p) {
    int next = 1;
    auto visit_expr = [&](auto&& self, Expr& e) -> void {
        if (e.kind == Expr::Kind::Call) e.site_id = next++;
        for (auto& c : e.children) self(self, *c);
    };
    auto visit_block = [&](auto&& self, std::vector<StmtPtr>& body) -> void {
        for (auto& s : body) {
            if (s->expr) visit_expr(visit_expr, *s->expr);
            self(self, s->body);
            self(self, s->else_body);
        }
    };
    for (auto& f : p.functions) visit_block(visit_block, f.body);
    return next - 1;
}

}  // namespace waterrpg::minilang
