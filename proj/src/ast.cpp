#include "amlt/ast.hpp"

#include <cmath>
#include <sstream>

namespace amlt {

bool is_comparison(BinOp op) {
    switch (op) {
        case BinOp::Gt:
        case BinOp::Ge:
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Eq:
            return true;
        default:
            return false;
    }
}

const char* binop_symbol(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Eq: return "==";
    }
    return "?";
}

namespace {

// Higher binds tighter. Comparisons sit below additive so that
// a*b > c parses/prints as (a*b) > c without parentheses.
int precedence(BinOp op) {
    switch (op) {
        case BinOp::Mul:
        case BinOp::Div:
            return 3;
        case BinOp::Add:
        case BinOp::Sub:
            return 2;
        default:
            return 1;  // comparisons
    }
}

std::string format_number(double v) {
    // Integers print without a decimal point so round-tripped sources stay
    // readable; everything else uses enough digits to reparse exactly.
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::ostringstream os;
        os << static_cast<long long>(v);
        return os.str();
    }
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void print_rec(const Ast& ast, NodeId id, int parent_prec, bool right_side, std::string& out) {
    const AstNode& n = ast.at(id);
    switch (n.kind) {
        case NodeKind::Number:
            out += format_number(n.number);
            return;
        case NodeKind::Ref:
            out += n.name;
            for (NodeId idx : n.indices) {
                out += '[';
                print_rec(ast, idx, 0, false, out);
                out += ']';
            }
            return;
        case NodeKind::Binary: {
            int prec = precedence(n.op);
            // All operators associate left; a right child at equal precedence
            // needs parentheses to survive a round trip.
            bool parens = prec < parent_prec || (prec == parent_prec && right_side);
            if (parens) out += '(';
            print_rec(ast, n.lhs, prec, false, out);
            out += binop_symbol(n.op);
            print_rec(ast, n.rhs, prec, true, out);
            if (parens) out += ')';
            return;
        }
    }
}

}  // namespace

std::string print_expr(const Ast& ast, NodeId id) {
    std::string out;
    print_rec(ast, id, 0, false, out);
    return out;
}

std::string print_statement(const TaskSpec& task) {
    std::string out = print_expr(task.ast, task.statement.target);
    out += task.statement.accumulate ? " += " : " = ";
    out += print_expr(task.ast, task.statement.rhs);
    out += ';';
    return out;
}

std::string print_task(const TaskSpec& task) {
    std::string out = "where(";
    for (size_t i = 0; i < task.loop_vars.size(); ++i) {
        if (i) out += " and ";
        const LoopVar& lv = task.loop_vars[i];
        out += lv.name;
        out += " in [";
        out += print_expr(task.ast, lv.start);
        out += "..";
        out += print_expr(task.ast, lv.end);
        out += ']';
    }
    out += ") { ";
    out += print_statement(task);
    out += " }";
    return out;
}

bool expr_equal(const Ast& a, NodeId ia, const Ast& b, NodeId ib) {
    const AstNode& x = a.at(ia);
    const AstNode& y = b.at(ib);
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case NodeKind::Number:
            return x.number == y.number;
        case NodeKind::Ref:
            if (x.name != y.name || x.indices.size() != y.indices.size()) return false;
            for (size_t i = 0; i < x.indices.size(); ++i)
                if (!expr_equal(a, x.indices[i], b, y.indices[i])) return false;
            return true;
        case NodeKind::Binary:
            return x.op == y.op && expr_equal(a, x.lhs, b, y.lhs) && expr_equal(a, x.rhs, b, y.rhs);
    }
    return false;
}

bool task_equal(const TaskSpec& a, const TaskSpec& b) {
    if (a.loop_vars.size() != b.loop_vars.size()) return false;
    for (size_t i = 0; i < a.loop_vars.size(); ++i) {
        if (a.loop_vars[i].name != b.loop_vars[i].name) return false;
        if (!expr_equal(a.ast, a.loop_vars[i].start, b.ast, b.loop_vars[i].start)) return false;
        if (!expr_equal(a.ast, a.loop_vars[i].end, b.ast, b.loop_vars[i].end)) return false;
    }
    if (a.statement.accumulate != b.statement.accumulate) return false;
    return expr_equal(a.ast, a.statement.target, b.ast, b.statement.target) &&
           expr_equal(a.ast, a.statement.rhs, b.ast, b.statement.rhs);
}

}  // namespace amlt
