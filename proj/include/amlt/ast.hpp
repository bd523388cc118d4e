#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace amlt {

// Expression AST for task statements and range bounds. Nodes live in a flat
// arena owned by the enclosing TaskSpec; references between nodes are indices
// into that arena, which keeps traversal allocation-free (the naive fallback
// interprets this tree once per output element, so it is on a warm path).
using NodeId = std::int32_t;
constexpr NodeId kNoNode = -1;

enum class BinOp { Add, Sub, Mul, Div, Gt, Ge, Lt, Le, Eq };

bool is_comparison(BinOp op);
const char* binop_symbol(BinOp op);

enum class NodeKind { Number, Ref, Binary };

struct AstNode {
    NodeKind kind = NodeKind::Number;
    // Number
    double number = 0.0;
    // Ref: name plus 0..2 subscript expressions (0 = bare scalar)
    std::string name;
    std::vector<NodeId> indices;
    // Binary
    BinOp op = BinOp::Add;
    NodeId lhs = kNoNode;
    NodeId rhs = kNoNode;
    // Source position, for error reporting
    int line = 0;
    int col = 0;
};

struct Ast {
    std::vector<AstNode> nodes;

    const AstNode& at(NodeId id) const { return nodes[static_cast<size_t>(id)]; }
    NodeId add(AstNode n) {
        nodes.push_back(std::move(n));
        return static_cast<NodeId>(nodes.size() - 1);
    }
};

struct LoopVar {
    std::string name;
    NodeId start = kNoNode;  // inclusive
    NodeId end = kNoNode;    // exclusive: "x in [s..e]" iterates s <= x < e
    int line = 0;
    int col = 0;
};

struct Statement {
    NodeId target = kNoNode;  // always a Ref node with >= 1 subscript
    bool accumulate = true;   // += vs =
    NodeId rhs = kNoNode;
};

struct TaskSpec {
    Ast ast;
    std::vector<LoopVar> loop_vars;
    Statement statement;
};

// Canonical text form: minimal parentheses, single spaces around binary
// operators, ranges printed as in the input grammar. parse_task(print_task(t))
// reproduces t structurally.
std::string print_expr(const Ast& ast, NodeId id);
std::string print_task(const TaskSpec& task);
std::string print_statement(const TaskSpec& task);

bool expr_equal(const Ast& a, NodeId ia, const Ast& b, NodeId ib);
bool task_equal(const TaskSpec& a, const TaskSpec& b);

}  // namespace amlt
