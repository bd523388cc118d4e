#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amlt/ast.hpp"
#include "amlt/recognize.hpp"

namespace amlt {

enum class DagOp {
    Add, Sub, Mul, Div,
    CmpGT, CmpGE, CmpLT, CmpLE, CmpEQ,
    MaskSub,  // MaskSub(x, m, y) = x - m*y
    MaskAdd   // MaskAdd(x, m, y) = x + m*y
};

bool dag_op_is_cmp(DagOp op);
const char* dag_op_name(DagOp op);

// How a statement leaf is fetched by the kernel. A and B are the two
// multiplicand arrays; the aux roles mirror LeafClass.
enum class LeafRole { A, B, AuxConstant, AuxVecI, AuxVecJ, AuxMatIJ };

const char* leaf_role_name(LeafRole r);

struct DagLeaf {
    std::string name;
    LeafRole role = LeafRole::AuxConstant;
};

struct DagNode {
    enum class Kind { Leaf, Literal, Op };
    Kind kind = Kind::Op;
    int leaf = -1;       // Kind::Leaf: index into ExprDag::leaves
    double value = 0.0;  // Kind::Literal
    DagOp op = DagOp::Add;
    std::array<std::int32_t, 3> child{-1, -1, -1};
    int n_child = 0;
};

// Expression DAG with structural sharing: equal subexpressions are one node.
// Comparison nodes are mask-valued; everywhere a mask meets arithmetic the
// builder has rewritten the expression into MaskSub/MaskAdd, so the root is
// always numeric.
struct ExprDag {
    std::vector<DagLeaf> leaves;
    std::vector<DagNode> nodes;
    std::int32_t root = -1;
    bool accumulate = true;

    const DagNode& at(std::int32_t id) const { return nodes[static_cast<size_t>(id)]; }
    int op_node_count() const;
};

// Builds the DAG for the statement of a recognized task. Applies the masking
// rewrites
//   X - (cond)*Y  ->  MaskSub(X, cond, Y)
//   X + (cond)*Y  ->  MaskAdd(X, cond, Y)
// and materializes any other comparison used as a number as
// MaskAdd(0, cond, 1). Deterministic given the same statement.
ExprDag build_dag(const TaskSpec& task, const Mmlt& recog);

// Evaluates the DAG at one point. `bindings` maps leaf names to values;
// comparisons yield 1.0/0.0, MaskSub/MaskAdd follow their definitions, so the
// result equals a direct interpretation of the original statement expression.
double eval_scalar(const ExprDag& dag, const std::map<std::string, double>& bindings);

// Node-per-line dump ("n2 = mul n0 n1") for diagnostics.
std::string dump_dag(const ExprDag& dag);

// Renders the root back to grammar-accepted expression text (shared nodes are
// expanded; reparsing and rebuilding yields an isomorphic DAG).
std::string dag_expression_text(const ExprDag& dag);

bool dag_isomorphic(const ExprDag& a, const ExprDag& b);

}  // namespace amlt
