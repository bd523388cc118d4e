#include "amlt/expr_dag.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <tuple>

#include "amlt/errors.hpp"

namespace amlt {

bool dag_op_is_cmp(DagOp op) {
    switch (op) {
        case DagOp::CmpGT:
        case DagOp::CmpGE:
        case DagOp::CmpLT:
        case DagOp::CmpLE:
        case DagOp::CmpEQ:
            return true;
        default:
            return false;
    }
}

const char* dag_op_name(DagOp op) {
    switch (op) {
        case DagOp::Add: return "add";
        case DagOp::Sub: return "sub";
        case DagOp::Mul: return "mul";
        case DagOp::Div: return "div";
        case DagOp::CmpGT: return "gt";
        case DagOp::CmpGE: return "ge";
        case DagOp::CmpLT: return "lt";
        case DagOp::CmpLE: return "le";
        case DagOp::CmpEQ: return "eq";
        case DagOp::MaskSub: return "masksub";
        case DagOp::MaskAdd: return "maskadd";
    }
    return "?";
}

int ExprDag::op_node_count() const {
    int n = 0;
    for (const auto& node : nodes)
        if (node.kind == DagNode::Kind::Op) ++n;
    return n;
}

const char* leaf_role_name(LeafRole r) {
    switch (r) {
        case LeafRole::A: return "a";
        case LeafRole::B: return "b";
        case LeafRole::AuxConstant: return "Constant";
        case LeafRole::AuxVecI: return "VecI";
        case LeafRole::AuxVecJ: return "VecJ";
        case LeafRole::AuxMatIJ: return "MatIJ";
    }
    return "?";
}

namespace {

class DagBuilder {
public:
    DagBuilder(const TaskSpec& task, const Mmlt& recog) : task_(task), recog_(recog) {}

    ExprDag build() {
        dag_.accumulate = task_.statement.accumulate;
        dag_.root = convert_numeric(task_.statement.rhs);
        return std::move(dag_);
    }

private:
    using Key = std::tuple<int, int, std::uint64_t, std::int32_t, std::int32_t, std::int32_t>;

    std::int32_t intern(DagNode n) {
        Key key{static_cast<int>(n.kind),
                n.kind == DagNode::Kind::Op ? static_cast<int>(n.op) : 0,
                n.kind == DagNode::Kind::Literal ? std::bit_cast<std::uint64_t>(n.value)
                                                 : static_cast<std::uint64_t>(n.leaf),
                n.child[0], n.child[1], n.child[2]};
        auto it = cse_.find(key);
        if (it != cse_.end()) return it->second;
        dag_.nodes.push_back(n);
        std::int32_t id = static_cast<std::int32_t>(dag_.nodes.size() - 1);
        cse_.emplace(key, id);
        return id;
    }

    std::int32_t literal(double v) {
        DagNode n;
        n.kind = DagNode::Kind::Literal;
        n.value = v;
        return intern(n);
    }

    std::int32_t leaf(const std::string& name) {
        int idx = -1;
        for (size_t i = 0; i < dag_.leaves.size(); ++i)
            if (dag_.leaves[i].name == name) idx = static_cast<int>(i);
        if (idx < 0) {
            DagLeaf l;
            l.name = name;
            l.role = role_of(name);
            dag_.leaves.push_back(l);
            idx = static_cast<int>(dag_.leaves.size() - 1);
        }
        DagNode n;
        n.kind = DagNode::Kind::Leaf;
        n.leaf = idx;
        return intern(n);
    }

    LeafRole role_of(const std::string& name) const {
        if (name == recog_.a) return LeafRole::A;
        if (name == recog_.b) return LeafRole::B;
        for (const auto& x : recog_.aux) {
            if (x.name != name) continue;
            switch (x.cls) {
                case LeafClass::Constant: return LeafRole::AuxConstant;
                case LeafClass::VecI: return LeafRole::AuxVecI;
                case LeafClass::VecJ: return LeafRole::AuxVecJ;
                case LeafClass::MatIJ: return LeafRole::AuxMatIJ;
            }
        }
        throw UnsupportedExpression("leaf '" + name + "' is not part of the recognized form");
    }

    std::int32_t op2(DagOp op, std::int32_t a, std::int32_t b) {
        DagNode n;
        n.op = op;
        n.child = {a, b, -1};
        n.n_child = 2;
        return intern(n);
    }

    std::int32_t op3(DagOp op, std::int32_t a, std::int32_t b, std::int32_t c) {
        DagNode n;
        n.op = op;
        n.child = {a, b, c};
        n.n_child = 3;
        return intern(n);
    }

    static DagOp cmp_op(BinOp op) {
        switch (op) {
            case BinOp::Gt: return DagOp::CmpGT;
            case BinOp::Ge: return DagOp::CmpGE;
            case BinOp::Lt: return DagOp::CmpLT;
            case BinOp::Le: return DagOp::CmpLE;
            case BinOp::Eq: return DagOp::CmpEQ;
            default: throw UnsupportedExpression("not a comparison");
        }
    }

    const AstNode& ast(NodeId id) const { return task_.ast.at(id); }

    // Splits a multiplication spine into factors, left to right. Division
    // nodes are opaque factors; only Mul is flattened.
    void flatten_mul(NodeId id, std::vector<NodeId>& factors) const {
        const AstNode& n = ast(id);
        if (n.kind == NodeKind::Binary && n.op == BinOp::Mul) {
            flatten_mul(n.lhs, factors);
            factors.push_back(n.rhs);
        } else {
            factors.push_back(id);
        }
    }

    static bool is_cmp_node(const AstNode& n) {
        return n.kind == NodeKind::Binary && is_comparison(n.op);
    }

    // Product term containing a comparison factor: returns the comparison node
    // and the product of the remaining factors (left-associated in original
    // order; 1 when the comparison is alone). Used by the masking rewrites.
    struct MaskedTerm {
        std::int32_t cond;
        std::int32_t value;
    };

    bool try_masked_term(NodeId id, MaskedTerm& out) {
        const AstNode& n = ast(id);
        if (is_cmp_node(n)) {
            out.cond = convert_cmp(id);
            out.value = literal(1.0);
            return true;
        }
        if (!(n.kind == NodeKind::Binary && n.op == BinOp::Mul)) return false;
        std::vector<NodeId> factors;
        flatten_mul(id, factors);
        int cmp_at = -1;
        for (size_t f = 0; f < factors.size(); ++f) {
            if (is_cmp_node(ast(factors[f]))) {
                cmp_at = static_cast<int>(f);
                break;
            }
        }
        if (cmp_at < 0) return false;
        out.cond = convert_cmp(factors[static_cast<size_t>(cmp_at)]);
        std::int32_t value = -1;
        for (size_t f = 0; f < factors.size(); ++f) {
            if (static_cast<int>(f) == cmp_at) continue;
            std::int32_t v = convert_numeric(factors[f]);
            value = value < 0 ? v : op2(DagOp::Mul, value, v);
        }
        out.value = value < 0 ? literal(1.0) : value;
        return true;
    }

    std::int32_t convert_cmp(NodeId id) {
        const AstNode& n = ast(id);
        return op2(cmp_op(n.op), convert_numeric(n.lhs), convert_numeric(n.rhs));
    }

    // Additive chain with the masking rewrites applied to each term.
    std::int32_t convert_sum(NodeId id) {
        const AstNode& n = ast(id);
        if (n.kind == NodeKind::Binary && (n.op == BinOp::Add || n.op == BinOp::Sub)) {
            std::int32_t lhs = convert_sum(n.lhs);
            MaskedTerm mt;
            if (try_masked_term(n.rhs, mt))
                return op3(n.op == BinOp::Sub ? DagOp::MaskSub : DagOp::MaskAdd, lhs, mt.cond,
                           mt.value);
            std::int32_t rhs = convert_numeric(n.rhs);
            return op2(n.op == BinOp::Sub ? DagOp::Sub : DagOp::Add, lhs, rhs);
        }
        // Leading term of the chain: no left context, so a masked term gets a
        // zero on the left.
        MaskedTerm mt;
        if (try_masked_term(id, mt)) return op3(DagOp::MaskAdd, literal(0.0), mt.cond, mt.value);
        return convert_plain(id);
    }

    // Conversion in a context that requires a numeric value.
    std::int32_t convert_numeric(NodeId id) {
        const AstNode& n = ast(id);
        if (is_cmp_node(n))
            return op3(DagOp::MaskAdd, literal(0.0), convert_cmp(id), literal(1.0));
        if (n.kind == NodeKind::Binary && (n.op == BinOp::Add || n.op == BinOp::Sub))
            return convert_sum(id);
        MaskedTerm mt;
        if (try_masked_term(id, mt)) return op3(DagOp::MaskAdd, literal(0.0), mt.cond, mt.value);
        return convert_plain(id);
    }

    // No masking involved at this level.
    std::int32_t convert_plain(NodeId id) {
        const AstNode& n = ast(id);
        switch (n.kind) {
            case NodeKind::Number:
                return literal(n.number);
            case NodeKind::Ref:
                return leaf(n.name);
            case NodeKind::Binary:
                switch (n.op) {
                    case BinOp::Add:
                    case BinOp::Sub:
                        return convert_sum(id);
                    case BinOp::Mul:
                        return op2(DagOp::Mul, convert_numeric(n.lhs), convert_numeric(n.rhs));
                    case BinOp::Div:
                        return op2(DagOp::Div, convert_numeric(n.lhs), convert_numeric(n.rhs));
                    default:
                        return op3(DagOp::MaskAdd, literal(0.0), convert_cmp(id), literal(1.0));
                }
        }
        throw UnsupportedExpression("unsupported expression form");
    }

    const TaskSpec& task_;
    const Mmlt& recog_;
    ExprDag dag_;
    std::map<Key, std::int32_t> cse_;
};

double eval_node(const ExprDag& dag, std::int32_t id, const std::map<std::string, double>& env,
                 std::vector<double>& memo, std::vector<char>& done) {
    if (done[static_cast<size_t>(id)]) return memo[static_cast<size_t>(id)];
    const DagNode& n = dag.at(id);
    double v = 0.0;
    switch (n.kind) {
        case DagNode::Kind::Literal:
            v = n.value;
            break;
        case DagNode::Kind::Leaf: {
            auto it = env.find(dag.leaves[static_cast<size_t>(n.leaf)].name);
            if (it == env.end())
                throw MissingBinding(dag.leaves[static_cast<size_t>(n.leaf)].name);
            v = it->second;
            break;
        }
        case DagNode::Kind::Op: {
            double a = eval_node(dag, n.child[0], env, memo, done);
            double b = eval_node(dag, n.child[1], env, memo, done);
            switch (n.op) {
                case DagOp::Add: v = a + b; break;
                case DagOp::Sub: v = a - b; break;
                case DagOp::Mul: v = a * b; break;
                case DagOp::Div: v = a / b; break;
                case DagOp::CmpGT: v = a > b ? 1.0 : 0.0; break;
                case DagOp::CmpGE: v = a >= b ? 1.0 : 0.0; break;
                case DagOp::CmpLT: v = a < b ? 1.0 : 0.0; break;
                case DagOp::CmpLE: v = a <= b ? 1.0 : 0.0; break;
                case DagOp::CmpEQ: v = a == b ? 1.0 : 0.0; break;
                case DagOp::MaskSub:
                case DagOp::MaskAdd: {
                    double c = eval_node(dag, n.child[2], env, memo, done);
                    v = n.op == DagOp::MaskSub ? a - b * c : a + b * c;
                    break;
                }
            }
            break;
        }
    }
    memo[static_cast<size_t>(id)] = v;
    done[static_cast<size_t>(id)] = 1;
    return v;
}

void expr_text_rec(const ExprDag& dag, std::int32_t id, std::string& out) {
    const DagNode& n = dag.at(id);
    switch (n.kind) {
        case DagNode::Kind::Literal: {
            std::ostringstream os;
            if (n.value == std::floor(n.value) && std::abs(n.value) < 1e15)
                os << static_cast<long long>(n.value);
            else {
                os.precision(17);
                os << n.value;
            }
            out += os.str();
            return;
        }
        case DagNode::Kind::Leaf: {
            const DagLeaf& l = dag.leaves[static_cast<size_t>(n.leaf)];
            out += l.name;
            // Subscripts are irrelevant to structure; the caller reparses with
            // the same recognition, so bare names keep roles via recog lookup.
            return;
        }
        case DagNode::Kind::Op: {
            if (n.op == DagOp::MaskSub || n.op == DagOp::MaskAdd) {
                out += '(';
                expr_text_rec(dag, n.child[0], out);
                out += n.op == DagOp::MaskSub ? '-' : '+';
                out += '(';
                expr_text_rec(dag, n.child[1], out);
                out += ")*(";
                expr_text_rec(dag, n.child[2], out);
                out += "))";
                return;
            }
            const char* sym = "?";
            switch (n.op) {
                case DagOp::Add: sym = "+"; break;
                case DagOp::Sub: sym = "-"; break;
                case DagOp::Mul: sym = "*"; break;
                case DagOp::Div: sym = "/"; break;
                case DagOp::CmpGT: sym = ">"; break;
                case DagOp::CmpGE: sym = ">="; break;
                case DagOp::CmpLT: sym = "<"; break;
                case DagOp::CmpLE: sym = "<="; break;
                case DagOp::CmpEQ: sym = "=="; break;
                default: break;
            }
            out += '(';
            expr_text_rec(dag, n.child[0], out);
            out += sym;
            expr_text_rec(dag, n.child[1], out);
            out += ')';
            return;
        }
    }
}

bool iso_rec(const ExprDag& a, std::int32_t ia, const ExprDag& b, std::int32_t ib) {
    const DagNode& x = a.at(ia);
    const DagNode& y = b.at(ib);
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case DagNode::Kind::Literal:
            return x.value == y.value;
        case DagNode::Kind::Leaf:
            return a.leaves[static_cast<size_t>(x.leaf)].name ==
                   b.leaves[static_cast<size_t>(y.leaf)].name;
        case DagNode::Kind::Op:
            if (x.op != y.op || x.n_child != y.n_child) return false;
            for (int c = 0; c < x.n_child; ++c)
                if (!iso_rec(a, x.child[static_cast<size_t>(c)], b,
                             y.child[static_cast<size_t>(c)]))
                    return false;
            return true;
    }
    return false;
}

}  // namespace

ExprDag build_dag(const TaskSpec& task, const Mmlt& recog) {
    DagBuilder b(task, recog);
    return b.build();
}

double eval_scalar(const ExprDag& dag, const std::map<std::string, double>& bindings) {
    std::vector<double> memo(dag.nodes.size(), 0.0);
    std::vector<char> done(dag.nodes.size(), 0);
    return eval_node(dag, dag.root, bindings, memo, done);
}

std::string dump_dag(const ExprDag& dag) {
    std::ostringstream os;
    for (size_t i = 0; i < dag.nodes.size(); ++i) {
        const DagNode& n = dag.nodes[i];
        os << "n" << i << " = ";
        switch (n.kind) {
            case DagNode::Kind::Literal:
                os << n.value;
                break;
            case DagNode::Kind::Leaf:
                os << dag.leaves[static_cast<size_t>(n.leaf)].name << " ("
                   << leaf_role_name(dag.leaves[static_cast<size_t>(n.leaf)].role) << ")";
                break;
            case DagNode::Kind::Op:
                os << dag_op_name(n.op);
                for (int c = 0; c < n.n_child; ++c) os << " n" << n.child[static_cast<size_t>(c)];
                break;
        }
        os << "\n";
    }
    os << "root = n" << dag.root << (dag.accumulate ? " (accumulate)" : " (assign)") << "\n";
    return os.str();
}

std::string dag_expression_text(const ExprDag& dag) {
    std::string out;
    expr_text_rec(dag, dag.root, out);
    return out;
}

bool dag_isomorphic(const ExprDag& a, const ExprDag& b) {
    if (a.accumulate != b.accumulate) return false;
    return iso_rec(a, a.root, b, b.root);
}

}  // namespace amlt
