#include "amlt/schedule.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "amlt/errors.hpp"

namespace amlt {

const char* popcode_name(POpcode op) {
    switch (op) {
        case POpcode::mov: return "mov";
        case POpcode::add: return "add";
        case POpcode::sub: return "sub";
        case POpcode::mul: return "mul";
        case POpcode::div: return "div";
        case POpcode::gtcmp: return "gtcmp";
        case POpcode::gecmp: return "gecmp";
        case POpcode::ltcmp: return "ltcmp";
        case POpcode::lecmp: return "lecmp";
        case POpcode::eqcmp: return "eqcmp";
        case POpcode::masksub: return "masksub";
        case POpcode::maskadd: return "maskadd";
    }
    return "?";
}

namespace {

POpcode opcode_for(DagOp op) {
    switch (op) {
        case DagOp::Add: return POpcode::add;
        case DagOp::Sub: return POpcode::sub;
        case DagOp::Mul: return POpcode::mul;
        case DagOp::Div: return POpcode::div;
        case DagOp::CmpGT: return POpcode::gtcmp;
        case DagOp::CmpGE: return POpcode::gecmp;
        case DagOp::CmpLT: return POpcode::ltcmp;
        case DagOp::CmpLE: return POpcode::lecmp;
        case DagOp::CmpEQ: return POpcode::eqcmp;
        case DagOp::MaskSub: return POpcode::masksub;
        case DagOp::MaskAdd: return POpcode::maskadd;
    }
    return POpcode::mov;
}

class Scheduler {
public:
    Scheduler(const ExprDag& dag, bool fuse_tail) : dag_(dag), fuse_tail_(fuse_tail) {
        uses_.assign(dag.nodes.size(), 0);
        temp_of_.assign(dag.nodes.size(), -1);
        emitted_.assign(dag.nodes.size(), 0);
        label_.assign(dag.nodes.size(), -1);
        visited_.assign(dag.nodes.size(), 0);
        count_uses(dag.root);
        uses_[static_cast<size_t>(dag.root)] += 1;  // the final accumulate/move
    }

    // Whether the root is a multiply that can fold into the accumulate as a
    // fused multiply-accumulate (no temp needed for the product).
    bool tail_fusable() const {
        const DagNode& root = dag_.at(dag_.root);
        return dag_.accumulate && root.kind == DagNode::Kind::Op && root.op == DagOp::Mul &&
               uses_[static_cast<size_t>(dag_.root)] == 1;
    }

    PseudoProgram run() {
        PseudoProgram p;
        p.accumulate = dag_.accumulate;
        for (const auto& l : dag_.leaves) p.leaf_names.push_back(l.name);

        bool fused = fuse_tail_ && tail_fusable();
        if (fused) {
            // Counting-only pass: the product folds into the accumulate, so
            // the root gets no temp. Both operands stay live until the fused
            // instruction, hence children are released only after both exist.
            const DagNode& root = dag_.at(dag_.root);
            for (int c : child_order(root)) emit(p, root.child[static_cast<size_t>(c)]);
            for (int c = 0; c < root.n_child; ++c) release_use(root.child[static_cast<size_t>(c)]);
        } else {
            POperand root_val = emit(p, dag_.root);
            PseudoInstr tail;
            if (dag_.accumulate) {
                tail.op = POpcode::add;
                tail.dst = POperand{POperand::Kind::Result, 0};
                tail.src[0] = POperand{POperand::Kind::Result, 0};
                tail.src[1] = root_val;
                tail.n_src = 2;
            } else {
                tail.op = POpcode::mov;
                tail.dst = POperand{POperand::Kind::Result, 0};
                tail.src[0] = root_val;
                tail.n_src = 1;
            }
            p.instrs.push_back(tail);
            release_use(dag_.root);
        }
        p.n_extra_vec_regs = peak_vec_;
        p.n_mask_regs = peak_mask_;
        return p;
    }

private:
    // Counts uses per edge: a node consumed twice by one instruction holds
    // two uses, matching the two releases at emission.
    void count_uses(std::int32_t id) {
        const DagNode& n = dag_.at(id);
        if (n.kind != DagNode::Kind::Op) return;
        for (int c = 0; c < n.n_child; ++c) {
            std::int32_t ch = n.child[static_cast<size_t>(c)];
            uses_[static_cast<size_t>(ch)] += 1;
            if (!visited_[static_cast<size_t>(ch)]) {
                visited_[static_cast<size_t>(ch)] = 1;
                count_uses(ch);
            }
        }
    }

    // Approximate vector-register need of the subtree below `id`, treating
    // shared nodes as trees (the classic labeling; emission tracks real
    // liveness). Leaves are preloaded and cost nothing; comparison results
    // live in mask registers and do not count.
    int label(std::int32_t id) {
        if (label_[static_cast<size_t>(id)] >= 0) return label_[static_cast<size_t>(id)];
        const DagNode& n = dag_.at(id);
        int need = 0;
        if (n.kind == DagNode::Kind::Op) {
            std::vector<int> order = child_order(n);
            int held = 0, peak = 0;
            for (int c : order) {
                std::int32_t ch = n.child[static_cast<size_t>(c)];
                peak = std::max(peak, held + label(ch));
                held += temp_cost(ch);
            }
            if (!dag_op_is_cmp(n.op)) peak = std::max(peak, held > 0 ? held : 1);
            need = peak;
        }
        label_[static_cast<size_t>(id)] = need;
        return need;
    }

    int temp_cost(std::int32_t id) const {
        const DagNode& n = dag_.at(id);
        return n.kind == DagNode::Kind::Op && !dag_op_is_cmp(n.op) ? 1 : 0;
    }

    std::vector<int> child_order(const DagNode& n) {
        std::vector<int> order(static_cast<size_t>(n.n_child));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
            return label(n.child[static_cast<size_t>(x)]) > label(n.child[static_cast<size_t>(y)]);
        });
        return order;
    }

    POperand emit(PseudoProgram& p, std::int32_t id) {
        const DagNode& n = dag_.at(id);
        if (n.kind == DagNode::Kind::Leaf) return POperand{POperand::Kind::Leaf, n.leaf};
        if (n.kind == DagNode::Kind::Literal)
            return POperand{POperand::Kind::Literal, literal_index(p, n.value)};
        if (emitted_[static_cast<size_t>(id)])
            return temp_operand(id);

        for (int c : child_order(n)) emit(p, n.child[static_cast<size_t>(c)]);

        PseudoInstr instr;
        instr.op = opcode_for(n.op);
        instr.n_src = n.n_child;
        if (n.op == DagOp::MaskSub || n.op == DagOp::MaskAdd) {
            // Printed operand order puts the mask first: masksub dst MASK x y
            instr.src[0] = operand_of(p, n.child[1]);
            instr.src[1] = operand_of(p, n.child[0]);
            instr.src[2] = operand_of(p, n.child[2]);
        } else {
            for (int c = 0; c < n.n_child; ++c)
                instr.src[static_cast<size_t>(c)] = operand_of(p, n.child[static_cast<size_t>(c)]);
        }
        // This instruction consumes one use of each child; temps whose last
        // use this is become free before the destination is assigned, so the
        // destination may reuse a dying source register.
        for (int c = 0; c < n.n_child; ++c) release_use(n.child[static_cast<size_t>(c)]);

        bool is_mask = dag_op_is_cmp(n.op);
        int reg = alloc(is_mask);
        temp_of_[static_cast<size_t>(id)] = reg;
        temp_is_mask_[id] = is_mask;
        emitted_[static_cast<size_t>(id)] = 1;
        instr.dst = temp_operand(id);
        p.instrs.push_back(instr);
        return instr.dst;
    }

    POperand operand_of(PseudoProgram& p, std::int32_t id) {
        const DagNode& n = dag_.at(id);
        if (n.kind == DagNode::Kind::Leaf) return POperand{POperand::Kind::Leaf, n.leaf};
        if (n.kind == DagNode::Kind::Literal)
            return POperand{POperand::Kind::Literal, literal_index(p, n.value)};
        assert(emitted_[static_cast<size_t>(id)]);
        return temp_operand(id);
    }

    POperand temp_operand(std::int32_t id) const {
        bool is_mask = temp_is_mask_.at(id);
        return POperand{is_mask ? POperand::Kind::MaskTemp : POperand::Kind::VecTemp,
                        temp_of_[static_cast<size_t>(id)]};
    }

    static int literal_index(PseudoProgram& p, double v) {
        for (size_t i = 0; i < p.literal_pool.size(); ++i)
            if (p.literal_pool[i] == v && std::signbit(p.literal_pool[i]) == std::signbit(v))
                return static_cast<int>(i);
        p.literal_pool.push_back(v);
        return static_cast<int>(p.literal_pool.size() - 1);
    }

    int alloc(bool is_mask) {
        auto& free_list = is_mask ? free_mask_ : free_vec_;
        int& next = is_mask ? next_mask_ : next_vec_;
        int& live = is_mask ? live_mask_ : live_vec_;
        int& peak = is_mask ? peak_mask_ : peak_vec_;
        int reg;
        if (!free_list.empty()) {
            reg = free_list.front();
            free_list.erase(free_list.begin());
        } else {
            reg = next++;
        }
        ++live;
        peak = std::max(peak, live);
        return reg;
    }

    void release_use(std::int32_t id) {
        const DagNode& n = dag_.at(id);
        if (n.kind != DagNode::Kind::Op) return;
        int& u = uses_[static_cast<size_t>(id)];
        if (--u > 0) return;
        bool is_mask = temp_is_mask_.at(id);
        auto& free_list = is_mask ? free_mask_ : free_vec_;
        int reg = temp_of_[static_cast<size_t>(id)];
        free_list.insert(std::lower_bound(free_list.begin(), free_list.end(), reg), reg);
        (is_mask ? live_mask_ : live_vec_)--;
    }

    const ExprDag& dag_;
    bool fuse_tail_;
    std::vector<int> uses_;
    std::vector<int> temp_of_;
    std::vector<char> emitted_;
    std::vector<int> label_;
    std::map<std::int32_t, bool> temp_is_mask_;
    std::vector<char> visited_;
    std::vector<int> free_vec_, free_mask_;
    int next_vec_ = 0, next_mask_ = 0;
    int live_vec_ = 0, live_mask_ = 0;
    int peak_vec_ = 0, peak_mask_ = 0;
};

}  // namespace

PseudoProgram schedule_labelfs(const ExprDag& dag) {
    Scheduler main_pass(dag, /*fuse_tail=*/false);
    PseudoProgram p = main_pass.run();
    Scheduler fused_pass(dag, /*fuse_tail=*/true);
    PseudoProgram fused = fused_pass.run();
    p.n_extra_vec_regs_fused = fused.n_extra_vec_regs;
    p.fused_tail = p.n_extra_vec_regs_fused != p.n_extra_vec_regs;
    return p;
}

namespace {

std::string operand_text(const PseudoProgram& p, const POperand& o) {
    switch (o.kind) {
        case POperand::Kind::Result:
            return "R";
        case POperand::Kind::VecTemp:
            return "REG" + std::to_string(o.index);
        case POperand::Kind::MaskTemp:
            return "MASKREG" + std::to_string(o.index);
        case POperand::Kind::Leaf: {
            std::string up = p.leaf_names[static_cast<size_t>(o.index)];
            for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return up;
        }
        case POperand::Kind::Literal: {
            double v = p.literal_pool[static_cast<size_t>(o.index)];
            std::ostringstream os;
            if (v == std::floor(v) && std::abs(v) < 1e15)
                os << "$" << static_cast<long long>(v);
            else
                os << "$" << v;
            return os.str();
        }
    }
    return "?";
}

}  // namespace

std::string print_program(const PseudoProgram& p) {
    std::ostringstream os;
    for (const auto& in : p.instrs) {
        os << popcode_name(in.op) << " " << operand_text(p, in.dst);
        for (int s = 0; s < in.n_src; ++s) os << " " << operand_text(p, in.src[s]);
        os << "\n";
    }
    return os.str();
}

double run_program_scalar(const PseudoProgram& p, const std::map<std::string, double>& bindings,
                          double acc_in) {
    std::vector<double> vec(static_cast<size_t>(p.n_extra_vec_regs) + 1, 0.0);
    std::vector<double> mask(static_cast<size_t>(p.n_mask_regs) + 1, 0.0);
    double result = acc_in;
    auto read = [&](const POperand& o) -> double {
        switch (o.kind) {
            case POperand::Kind::Result: return result;
            case POperand::Kind::VecTemp: return vec[static_cast<size_t>(o.index)];
            case POperand::Kind::MaskTemp: return mask[static_cast<size_t>(o.index)];
            case POperand::Kind::Literal: return p.literal_pool[static_cast<size_t>(o.index)];
            case POperand::Kind::Leaf: {
                auto it = bindings.find(p.leaf_names[static_cast<size_t>(o.index)]);
                if (it == bindings.end())
                    throw MissingBinding(p.leaf_names[static_cast<size_t>(o.index)]);
                return it->second;
            }
        }
        return 0.0;
    };
    auto write = [&](const POperand& o, double v) {
        switch (o.kind) {
            case POperand::Kind::Result: result = v; break;
            case POperand::Kind::VecTemp: vec[static_cast<size_t>(o.index)] = v; break;
            case POperand::Kind::MaskTemp: mask[static_cast<size_t>(o.index)] = v; break;
            default: break;
        }
    };
    for (const auto& in : p.instrs) {
        double v = 0.0;
        switch (in.op) {
            case POpcode::mov: v = read(in.src[0]); break;
            case POpcode::add: v = read(in.src[0]) + read(in.src[1]); break;
            case POpcode::sub: v = read(in.src[0]) - read(in.src[1]); break;
            case POpcode::mul: v = read(in.src[0]) * read(in.src[1]); break;
            case POpcode::div: v = read(in.src[0]) / read(in.src[1]); break;
            case POpcode::gtcmp: v = read(in.src[0]) > read(in.src[1]) ? 1.0 : 0.0; break;
            case POpcode::gecmp: v = read(in.src[0]) >= read(in.src[1]) ? 1.0 : 0.0; break;
            case POpcode::ltcmp: v = read(in.src[0]) < read(in.src[1]) ? 1.0 : 0.0; break;
            case POpcode::lecmp: v = read(in.src[0]) <= read(in.src[1]) ? 1.0 : 0.0; break;
            case POpcode::eqcmp: v = read(in.src[0]) == read(in.src[1]) ? 1.0 : 0.0; break;
            // mask, x, y
            case POpcode::masksub: v = read(in.src[1]) - read(in.src[0]) * read(in.src[2]); break;
            case POpcode::maskadd: v = read(in.src[1]) + read(in.src[0]) * read(in.src[2]); break;
        }
        write(in.dst, v);
    }
    return result;
}

}  // namespace amlt
