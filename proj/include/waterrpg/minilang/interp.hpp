#pragma once

// Deterministic tree-walking interpreter.  Produces the execution trace the
// watermark embedder and extractor both consume: the ordered (caller, callee)
// invocation events plus step/output/depth measurements.

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "waterrpg/minilang/ast.hpp"

namespace waterrpg::minilang {

struct ExecutionTrace {
    std::vector<std::pair<std::string, std::string>> calls;
    std::vector<int> site_ids;  // site of each invocation event, parallel to calls
    std::int64_t step_count = 0;
    std::vector<std::int64_t> output;
    int max_depth = 0;
};

class RunError : public Error {
public:
    enum class Kind { DivByZero, Overflow, BudgetExceeded, DepthExceeded, BadArg, UndefinedVar };

    RunError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}
    Kind kind;
};

class Interpreter {
public:
    explicit Interpreter(const MiniProgram& program, std::vector<std::int64_t> input,
                         std::int64_t step_budget = 10'000'000, int depth_limit = 10'000)
        : program_(program), input_(std::move(input)), step_budget_(step_budget), depth_limit_(depth_limit) {}

    ExecutionTrace run() {
        for (const auto& g : program_.globals) globals_[g.name] = g.init;
        const Function* main_fn = program_.find_function("main");
        if (!main_fn) throw Error("run: program has no main");
        call_function("main", *main_fn, {});
        return std::move(trace_);
    }

private:
    using Env = std::map<std::string, std::int64_t>;

    std::int64_t call_function(const std::string& name, const Function& f, const std::vector<std::int64_t>& args) {
        ++depth_;
        if (depth_ > depth_limit_) throw RunError(RunError::Kind::DepthExceeded, "call depth limit exceeded in '" + name + "'");
        if (depth_ > trace_.max_depth) trace_.max_depth = depth_;

        Env env;
        // Call-by-value; missing arguments default to 0, extras are dropped.
        for (std::size_t i = 0; i < f.params.size(); ++i) env[f.params[i]] = i < args.size() ? args[i] : 0;

        std::int64_t ret = 0;
        exec_block(f.body, env, ret);
        --depth_;
        return ret;
    }

    /// Returns true if a `return` was executed.
    bool exec_block(const std::vector<StmtPtr>& body, Env& env, std::int64_t& ret) {
        for (const auto& s : body) {
            if (exec_stmt(*s, env, ret)) return true;
        }
        return false;
    }

    bool exec_stmt(const Stmt& s, Env& env, std::int64_t& ret) {
        if (++trace_.step_count > step_budget_) throw RunError(RunError::Kind::BudgetExceeded, "step budget exceeded");
        switch (s.kind) {
            case Stmt::Kind::Let:
                env[s.name] = eval(*s.expr, env);
                return false;
            case Stmt::Kind::Assign: {
                std::int64_t v = eval(*s.expr, env);
                if (auto it = env.find(s.name); it != env.end()) {
                    it->second = v;
                } else if (auto git = globals_.find(s.name); git != globals_.end()) {
                    git->second = v;
                } else {
                    throw RunError(RunError::Kind::UndefinedVar, "assignment to undefined variable '" + s.name + "'");
                }
                return false;
            }
            case Stmt::Kind::If:
                if (eval(*s.expr, env) != 0) return exec_block(s.body, env, ret);
                return exec_block(s.else_body, env, ret);
            case Stmt::Kind::While:
                while (eval(*s.expr, env) != 0) {
                    if (exec_block(s.body, env, ret)) return true;
                    if (++trace_.step_count > step_budget_) throw RunError(RunError::Kind::BudgetExceeded, "step budget exceeded");
                }
                return false;
            case Stmt::Kind::Return:
                ret = s.has_expr ? eval(*s.expr, env) : 0;
                return true;
            case Stmt::Kind::Print:
                trace_.output.push_back(eval(*s.expr, env));
                return false;
            case Stmt::Kind::CallStmt:
                eval(*s.expr, env);
                return false;
        }
        return false;
    }

    std::int64_t eval(const Expr& e, Env& env) {
        switch (e.kind) {
            case Expr::Kind::IntLit:
                return e.value;
            case Expr::Kind::Var: {
                if (auto it = env.find(e.name); it != env.end()) return it->second;
                if (auto git = globals_.find(e.name); git != globals_.end()) return git->second;
                throw RunError(RunError::Kind::UndefinedVar, "undefined variable '" + e.name + "'");
            }
            case Expr::Kind::Unary: {
                std::int64_t v = eval(*e.children[0], env);
                if (e.name == "!") return v == 0 ? 1 : 0;
                // unary minus
                std::int64_t r;
                if (__builtin_sub_overflow(std::int64_t{0}, v, &r)) throw RunError(RunError::Kind::Overflow, "overflow in unary -");
                return r;
            }
            case Expr::Kind::Binary:
                return eval_binary(e, env);
            case Expr::Kind::Call: {
                const Function* callee = program_.find_function(e.name);
                if (!callee) throw Error("call to undefined function '" + e.name + "'");
                std::vector<std::int64_t> args;
                args.reserve(e.children.size());
                for (const auto& a : e.children) args.push_back(eval(*a, env));
                trace_.calls.emplace_back(current_function_name(), e.name);
                trace_.site_ids.push_back(e.site_id);
                call_stack_.push_back(e.name);
                std::int64_t r = call_function(e.name, *callee, args);
                call_stack_.pop_back();
                return r;
            }
            case Expr::Kind::Arg: {
                std::int64_t i = eval(*e.children[0], env);
                if (i < 0 || i >= static_cast<std::int64_t>(input_.size()))
                    throw RunError(RunError::Kind::BadArg, "arg(" + std::to_string(i) + ") out of range");
                return input_[static_cast<std::size_t>(i)];
            }
            case Expr::Kind::NumArgs:
                return static_cast<std::int64_t>(input_.size());
        }
        return 0;
    }

    std::int64_t eval_binary(const Expr& e, Env& env) {
        // Both operands always evaluate; && and || do not short-circuit, so
        // normalization can hoist embedded calls without reordering events.
        std::int64_t a = eval(*e.children[0], env);
        std::int64_t b = eval(*e.children[1], env);
        const std::string& op = e.name;
        std::int64_t r = 0;
        if (op == "+") {
            if (__builtin_add_overflow(a, b, &r)) throw RunError(RunError::Kind::Overflow, "overflow in +");
        } else if (op == "-") {
            if (__builtin_sub_overflow(a, b, &r)) throw RunError(RunError::Kind::Overflow, "overflow in -");
        } else if (op == "*") {
            if (__builtin_mul_overflow(a, b, &r)) throw RunError(RunError::Kind::Overflow, "overflow in *");
        } else if (op == "/") {
            if (b == 0) throw RunError(RunError::Kind::DivByZero, "division by zero");
            if (a == INT64_MIN && b == -1) throw RunError(RunError::Kind::Overflow, "overflow in /");
            r = a / b;
        } else if (op == "%") {
            if (b == 0) throw RunError(RunError::Kind::DivByZero, "modulo by zero");
            if (a == INT64_MIN && b == -1) throw RunError(RunError::Kind::Overflow, "overflow in %");
            r = a % b;
        } else if (op == "==") {
            r = a == b;
        } else if (op == "!=") {
            r = a != b;
        } else if (op == "<") {
            r = a < b;
        } else if (op == "<=") {
            r = a <= b;
        } else if (op == ">") {
            r = a > b;
        } else if (op == ">=") {
            r = a >= b;
        } else if (op == "&&") {
            r = (a != 0) && (b != 0);
        } else if (op == "||") {
            r = (a != 0) || (b != 0);
        } else {
            throw Error("unknown operator '" + op + "'");
        }
        return r;
    }

    const std::string& current_function_name() const { return call_stack_.back(); }

    const MiniProgram& program_;
    std::vector<std::int64_t> input_;
    std::int64_t step_budget_;
    int depth_limit_;
    std::map<std::string, std::int64_t> globals_;
    std::vector<std::string> call_stack_ = {"main"};
    int depth_ = 0;
    ExecutionTrace trace_;
};

inline ExecutionTrace run_program(const MiniProgram& p, const std::vector<std::int64_t>& input,
                                  std::int64_t step_budget = 10'000'000, int depth_limit = 10'000) {
    Interpreter interp(p, input, step_budget, depth_limit);
    return interp.run();
}

// ---------------------------------------------------------------------------
// Dynamic call graph and function order.

struct DynamicCallGraph {
    std::vector<std::string> nodes;                            // first-appearance order
    std::set<std::pair<std::string, std::string>> edges;       // distinct pairs

    bool operator==(const DynamicCallGraph&) const = default;
};

inline DynamicCallGraph build_dynamic_call_graph(const ExecutionTrace& t) {
    DynamicCallGraph g;
    std::set<std::string> seen;
    auto add_node = [&](const std::string& name) {
        if (seen.insert(name).second) g.nodes.push_back(name);
    };
    for (const auto& [caller, callee] : t.calls) {
        add_node(caller);
        add_node(callee);
        g.edges.insert({caller, callee});
    }
    return g;
}

/// Function names by first appearance in the trace, main first even for an
/// empty trace.
inline std::vector<std::string> distinct_functions_in_order(const ExecutionTrace& t) {
    std::vector<std::string> order = {"main"};
    std::set<std::string> seen = {"main"};
    for (const auto& [caller, callee] : t.calls) {
        if (seen.insert(caller).second) order.push_back(caller);
        if (seen.insert(callee).second) order.push_back(callee);
    }
    return order;
}

// ---------------------------------------------------------------------------
// Trace file format: "caller -> callee" lines, then "steps <k>",
// "output <v1> <v2> ...", "depth <d>".

inline std::string serialize_trace(const ExecutionTrace& t) {
    std::ostringstream out;
    for (const auto& [caller, callee] : t.calls) out << caller << " -> " << callee << "\n";
    out << "steps " << t.step_count << "\n";
    out << "output";
    for (std::int64_t v : t.output) out << " " << v;
    out << "\n";
    out << "depth " << t.max_depth << "\n";
    return out.str();
}

inline ExecutionTrace parse_trace(const std::string& text) {
    ExecutionTrace t;
    std::istringstream in(text);
    std::string line;
    bool saw_steps = false, saw_output = false, saw_depth = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string first;
        ls >> first;
        if (first == "steps") {
            if (!(ls >> t.step_count)) throw Error("parse_trace: bad steps line");
            saw_steps = true;
        } else if (first == "output") {
            std::int64_t v;
            while (ls >> v) t.output.push_back(v);
            saw_output = true;
        } else if (first == "depth") {
            if (!(ls >> t.max_depth)) throw Error("parse_trace: bad depth line");
            saw_depth = true;
        } else {
            std::string arrow, callee;
            if (!(ls >> arrow >> callee) || arrow != "->") throw Error("parse_trace: malformed line '" + line + "'");
            if (saw_steps || saw_output || saw_depth) throw Error("parse_trace: call line after trailer");
            t.calls.emplace_back(first, callee);
            t.site_ids.push_back(0);
        }
    }
    if (!saw_steps || !saw_output || !saw_depth) throw Error("parse_trace: missing trailer line(s)");
    return t;
}

}  // namespace waterrpg::minilang
