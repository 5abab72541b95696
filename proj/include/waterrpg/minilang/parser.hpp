#pragma once

// Recursive-descent parser for the toy language.  Reports the first syntax
// error with line/column.  serialize_program(parse_program(x)) == x for
// canonical x.

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "waterrpg/minilang/ast.hpp"

namespace waterrpg::minilang {

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int col)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg) {}
};

namespace detail {

struct Token {
    enum class Kind { Ident, Int, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    std::int64_t value = 0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws_and_comments();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::Kind::End;
            tok_.text = "<eof>";
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) bump();
            tok_.kind = Token::Kind::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
            tok_.kind = Token::Kind::Int;
            tok_.text = src_.substr(start, pos_ - start);
            try {
                tok_.value = std::stoll(tok_.text);
            } catch (const std::exception&) {
                throw ParseError("integer literal out of range", tok_.line, tok_.col);
            }
            return;
        }
        static const char* two_char[] = {"==", "!=", "<=", ">=", "&&", "||"};
        for (const char* op : two_char) {
            if (src_.compare(pos_, 2, op) == 0) {
                tok_.kind = Token::Kind::Punct;
                tok_.text = op;
                bump();
                bump();
                return;
            }
        }
        static const std::string single = "(){};,=<>+-*/%!";
        if (single.find(c) != std::string::npos) {
            tok_.kind = Token::Kind::Punct;
            tok_.text = std::string(1, c);
            bump();
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

    void skip_ws_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    MiniProgram parse() {
        MiniProgram p;
        while (lex_.peek().kind != Token::Kind::End) {
            if (lex_.peek().text == "global") {
                p.globals.push_back(parse_global());
            } else if (lex_.peek().text == "fn") {
                p.functions.push_back(parse_function());
            } else {
                fail("expected 'global' or 'fn'");
            }
        }
        check_program(p);
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg + " (got '" + lex_.peek().text + "')", lex_.peek().line, lex_.peek().col); }

    Token expect_punct(const std::string& text) {
        if (lex_.peek().kind != Token::Kind::Punct || lex_.peek().text != text) fail("expected '" + text + "'");
        return lex_.next();
    }

    std::string expect_ident() {
        if (lex_.peek().kind != Token::Kind::Ident) fail("expected identifier");
        std::string name = lex_.next().text;
        if (is_keyword(name)) throw ParseError("'" + name + "' is reserved", lex_.peek().line, lex_.peek().col);
        return name;
    }

    static bool is_keyword(const std::string& s) {
        static const std::set<std::string> kw = {"global", "fn", "let", "if", "else", "while", "return", "print", "arg", "num_args"};
        return kw.count(s) != 0;
    }

    GlobalDecl parse_global() {
        lex_.next();  // global
        GlobalDecl g;
        g.name = expect_ident();
        expect_punct("=");
        bool neg = false;
        if (lex_.peek().text == "-") {
            neg = true;
            lex_.next();
        }
        if (lex_.peek().kind != Token::Kind::Int) fail("expected integer initializer");
        g.init = lex_.next().value;
        if (neg) g.init = -g.init;
        expect_punct(";");
        return g;
    }

    Function parse_function() {
        lex_.next();  // fn
        Function f;
        f.name = expect_ident();
        expect_punct("(");
        if (lex_.peek().text != ")") {
            f.params.push_back(expect_ident());
            while (lex_.peek().text == ",") {
                lex_.next();
                f.params.push_back(expect_ident());
            }
        }
        expect_punct(")");
        f.body = parse_block();
        return f;
    }

    std::vector<StmtPtr> parse_block() {
        expect_punct("{");
        std::vector<StmtPtr> body;
        while (lex_.peek().text != "}") {
            if (lex_.peek().kind == Token::Kind::End) fail("unterminated block");
            body.push_back(parse_stmt());
        }
        lex_.next();  // }
        return body;
    }

    StmtPtr parse_stmt() {
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::Ident) fail("expected statement");
        if (t.text == "let") {
            lex_.next();
            std::string name = expect_ident();
            expect_punct("=");
            auto rhs = parse_expr();
            expect_punct(";");
            return make_let(std::move(name), std::move(rhs));
        }
        if (t.text == "if") {
            lex_.next();
            expect_punct("(");
            auto cond = parse_expr();
            expect_punct(")");
            auto then_body = parse_block();
            std::vector<StmtPtr> else_body;
            if (lex_.peek().text == "else") {
                lex_.next();
                else_body = parse_block();
            }
            return make_if(std::move(cond), std::move(then_body), std::move(else_body));
        }
        if (t.text == "while") {
            lex_.next();
            expect_punct("(");
            auto cond = parse_expr();
            expect_punct(")");
            auto s = std::make_unique<Stmt>();
            s->kind = Stmt::Kind::While;
            s->expr = std::move(cond);
            s->body = parse_block();
            return s;
        }
        if (t.text == "return") {
            lex_.next();
            auto s = std::make_unique<Stmt>();
            s->kind = Stmt::Kind::Return;
            if (lex_.peek().text != ";") {
                s->expr = parse_expr();
            } else {
                s->has_expr = false;
            }
            expect_punct(";");
            return s;
        }
        if (t.text == "print") {
            lex_.next();
            auto s = std::make_unique<Stmt>();
            s->kind = Stmt::Kind::Print;
            s->expr = parse_expr();
            expect_punct(";");
            return s;
        }
        // assignment or call statement
        std::string name = expect_ident();
        if (lex_.peek().text == "(") {
            auto call = parse_call_tail(std::move(name));
            expect_punct(";");
            return make_call_stmt(std::move(call));
        }
        expect_punct("=");
        auto rhs = parse_expr();
        expect_punct(";");
        return make_assign(std::move(name), std::move(rhs));
    }

    ExprPtr parse_call_tail(std::string name) {
        expect_punct("(");
        std::vector<ExprPtr> args;
        if (lex_.peek().text != ")") {
            args.push_back(parse_expr());
            while (lex_.peek().text == ",") {
                lex_.next();
                args.push_back(parse_expr());
            }
        }
        expect_punct(")");
        return make_call(std::move(name), std::move(args));
    }

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (lex_.peek().text == "||") {
            lex_.next();
            lhs = make_binary("||", std::move(lhs), parse_and());
        }
        return lhs;
    }

    ExprPtr parse_and() {
        auto lhs = parse_cmp();
        while (lex_.peek().text == "&&") {
            lex_.next();
            lhs = make_binary("&&", std::move(lhs), parse_cmp());
        }
        return lhs;
    }

    ExprPtr parse_cmp() {
        auto lhs = parse_add();
        const std::string& op = lex_.peek().text;
        if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") {
            std::string o = lex_.next().text;
            return make_binary(std::move(o), std::move(lhs), parse_add());
        }
        return lhs;
    }

    ExprPtr parse_add() {
        auto lhs = parse_mul();
        while (lex_.peek().text == "+" || lex_.peek().text == "-") {
            std::string o = lex_.next().text;
            lhs = make_binary(std::move(o), std::move(lhs), parse_mul());
        }
        return lhs;
    }

    ExprPtr parse_mul() {
        auto lhs = parse_unary();
        while (lex_.peek().text == "*" || lex_.peek().text == "/" || lex_.peek().text == "%") {
            std::string o = lex_.next().text;
            lhs = make_binary(std::move(o), std::move(lhs), parse_unary());
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (lex_.peek().text == "!" || lex_.peek().text == "-") {
            std::string o = lex_.next().text;
            return make_unary(std::move(o), parse_unary());
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Int) return make_int(lex_.next().value);
        if (t.text == "(") {
            lex_.next();
            auto e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (t.kind == Token::Kind::Ident) {
            if (t.text == "arg") {
                lex_.next();
                expect_punct("(");
                auto idx = parse_expr();
                expect_punct(")");
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::Arg;
                e->children.push_back(std::move(idx));
                return e;
            }
            if (t.text == "num_args") {
                lex_.next();
                expect_punct("(");
                expect_punct(")");
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::NumArgs;
                return e;
            }
            std::string name = expect_ident();
            if (lex_.peek().text == "(") return parse_call_tail(std::move(name));
            return make_var(std::move(name));
        }
        fail("expected expression");
    }

    void check_program(const MiniProgram& p) {
        std::set<std::string> fnames;
        std::set<std::string> gnames;
        for (const auto& g : p.globals) {
            if (!gnames.insert(g.name).second) throw Error("duplicate global '" + g.name + "'");
        }
        for (const auto& f : p.functions) {
            if (!fnames.insert(f.name).second) throw Error("duplicate function '" + f.name + "'");
        }
        if (!fnames.count("main")) throw Error("missing main");
        // Every call target must resolve to a defined function.
        auto check_expr = [&](auto&& self, const Expr& e) -> void {
            if (e.kind == Expr::Kind::Call && !fnames.count(e.name)) throw Error("unresolved call target '" + e.name + "'");
            for (const auto& c : e.children) self(self, *c);
        };
        auto check_block = [&](auto&& self, const std::vector<StmtPtr>& body) -> void {
            for (const auto& s : body) {
                if (s->expr) check_expr(check_expr, *s->expr);
                self(self, s->body);
                self(self, s->else_body);
            }
        };
        for (const auto& f : p.functions) check_block(check_block, f.body);
    }

    Lexer lex_;
};

}  // namespace detail

inline MiniProgram parse_program(const std::string& source) {
    detail::Parser p(source);
    return p.parse();
}

}  // namespace waterrpg::minilang
