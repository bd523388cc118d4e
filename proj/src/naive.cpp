#include "amlt/naive.hpp"

#include <vector>

#include "amlt/errors.hpp"

namespace amlt {

namespace {

// Name resolution is hoisted out of the loop nest: every Ref node is bound
// once to either a loop-variable slot or a buffer pointer.
struct Binding {
    int var_slot = -1;
    MatrixBuffer* buf = nullptr;
};

class NaiveRunner {
public:
    NaiveRunner(const TaskSpec& task, const std::map<std::string, MatrixBuffer*>& arrays)
        : task_(task), ast_(task.ast) {
        for (const auto& lv : task.loop_vars) var_names_.push_back(lv.name);
        vars_.resize(var_names_.size(), 0);
        bind_.resize(ast_.nodes.size());
        // Only nodes reachable from the statement get bound; loop-range
        // expressions share the arena but reference dimensions, not arrays.
        bind_refs(task.statement.target, arrays);
        bind_refs(task.statement.rhs, arrays);
    }

    void run(const std::vector<std::int64_t>& starts, const std::vector<std::int64_t>& ends) {
        const AstNode& target = ast_.at(task_.statement.target);
        MatrixBuffer* out = bind_[static_cast<size_t>(task_.statement.target)].buf;
        nest(0, starts, ends, target, out);
    }

private:
    void bind_refs(NodeId id, const std::map<std::string, MatrixBuffer*>& arrays) {
        const AstNode& node = ast_.at(id);
        switch (node.kind) {
            case NodeKind::Number:
                return;
            case NodeKind::Binary:
                bind_refs(node.lhs, arrays);
                bind_refs(node.rhs, arrays);
                return;
            case NodeKind::Ref: {
                Binding b;
                if (node.indices.empty()) {
                    for (size_t v = 0; v < var_names_.size(); ++v)
                        if (var_names_[v] == node.name) b.var_slot = static_cast<int>(v);
                }
                if (b.var_slot < 0) {
                    auto it = arrays.find(node.name);
                    if (it == arrays.end()) throw MissingBinding(node.name);
                    b.buf = it->second;
                }
                bind_[static_cast<size_t>(id)] = b;
                for (NodeId idx : node.indices) bind_refs(idx, arrays);
                return;
            }
        }
    }

    void nest(size_t depth, const std::vector<std::int64_t>& starts,
              const std::vector<std::int64_t>& ends, const AstNode& target, MatrixBuffer* out) {
        if (depth == vars_.size()) {
            std::int64_t r = static_cast<std::int64_t>(eval(target.indices[0]));
            std::int64_t c = target.indices.size() > 1
                                 ? static_cast<std::int64_t>(eval(target.indices[1]))
                                 : 0;
            double v = eval(task_.statement.rhs);
            if (task_.statement.accumulate)
                out->at(r, c) += v;
            else
                out->at(r, c) = v;
            return;
        }
        for (std::int64_t x = starts[depth]; x < ends[depth]; ++x) {
            vars_[depth] = x;
            nest(depth + 1, starts, ends, target, out);
        }
    }

    double eval(NodeId id) {
        const AstNode& n = ast_.at(id);
        switch (n.kind) {
            case NodeKind::Number:
                return n.number;
            case NodeKind::Ref: {
                const Binding& b = bind_[static_cast<size_t>(id)];
                if (b.var_slot >= 0) return static_cast<double>(vars_[static_cast<size_t>(b.var_slot)]);
                if (n.indices.empty()) return b.buf->at(0, 0);
                std::int64_t r = static_cast<std::int64_t>(eval(n.indices[0]));
                std::int64_t c =
                    n.indices.size() > 1 ? static_cast<std::int64_t>(eval(n.indices[1])) : 0;
                return b.buf->at(r, c);
            }
            case NodeKind::Binary: {
                double a = eval(n.lhs);
                double b = eval(n.rhs);
                switch (n.op) {
                    case BinOp::Add: return a + b;
                    case BinOp::Sub: return a - b;
                    case BinOp::Mul: return a * b;
                    case BinOp::Div: return a / b;
                    case BinOp::Gt: return a > b ? 1.0 : 0.0;
                    case BinOp::Ge: return a >= b ? 1.0 : 0.0;
                    case BinOp::Lt: return a < b ? 1.0 : 0.0;
                    case BinOp::Le: return a <= b ? 1.0 : 0.0;
                    case BinOp::Eq: return a == b ? 1.0 : 0.0;
                }
                return 0.0;
            }
        }
        return 0.0;
    }

    const TaskSpec& task_;
    const Ast& ast_;
    std::vector<std::string> var_names_;
    std::vector<std::int64_t> vars_;
    std::vector<Binding> bind_;
};

}  // namespace

std::int64_t eval_bound(const Ast& ast, NodeId id,
                        const std::map<std::string, std::int64_t>& dims) {
    const AstNode& n = ast.at(id);
    switch (n.kind) {
        case NodeKind::Number:
            return static_cast<std::int64_t>(n.number);
        case NodeKind::Ref: {
            if (!n.indices.empty())
                throw UnsupportedExpression("subscripted name in loop range: " + n.name);
            auto it = dims.find(n.name);
            if (it == dims.end()) throw MissingBinding(n.name);
            return it->second;
        }
        case NodeKind::Binary: {
            std::int64_t a = eval_bound(ast, n.lhs, dims);
            std::int64_t b = eval_bound(ast, n.rhs, dims);
            switch (n.op) {
                case BinOp::Add: return a + b;
                case BinOp::Sub: return a - b;
                case BinOp::Mul: return a * b;
                case BinOp::Div: return a / b;
                default:
                    throw UnsupportedExpression("comparison in loop range");
            }
        }
    }
    return 0;
}

void run_naive(const TaskSpec& task, const std::map<std::string, MatrixBuffer*>& arrays,
               const std::map<std::string, std::int64_t>& dims) {
    std::vector<std::int64_t> starts, ends;
    for (const auto& lv : task.loop_vars) {
        starts.push_back(eval_bound(task.ast, lv.start, dims));
        ends.push_back(eval_bound(task.ast, lv.end, dims));
    }
    NaiveRunner runner(task, arrays);
    runner.run(starts, ends);
}

}  // namespace amlt
