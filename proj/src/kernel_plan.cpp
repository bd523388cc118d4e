#include "amlt/kernel_plan.hpp"

#include <algorithm>
#include <sstream>

#include "amlt/errors.hpp"

namespace amlt {

namespace {

int vec_blocks(KernelShape shape, int simd_width) {
    return (shape.i_w + simd_width - 1) / simd_width;
}

int leaf_registers(LeafRole role, int vb) {
    switch (role) {
        case LeafRole::A: return 1;
        case LeafRole::B: return vb;
        case LeafRole::AuxConstant: return 1;
        case LeafRole::AuxVecI: return 1;
        case LeafRole::AuxVecJ: return vb;
        case LeafRole::AuxMatIJ: return 1;
    }
    return 0;
}

LoadStrategy leaf_strategy(LeafRole role) {
    switch (role) {
        case LeafRole::A:
        case LeafRole::AuxVecI:
        case LeafRole::AuxMatIJ:
            return LoadStrategy::BroadcastRowElement;
        case LeafRole::B:
        case LeafRole::AuxVecJ:
            return LoadStrategy::VectorRow;
        case LeafRole::AuxConstant:
            return LoadStrategy::BroadcastConstant;
    }
    return LoadStrategy::BroadcastConstant;
}

}  // namespace

RegisterLedger register_ledger(const PseudoProgram& program, const std::vector<DagLeaf>& leaves,
                               KernelShape shape, int simd_width) {
    int vb = vec_blocks(shape, simd_width);
    RegisterLedger ledger;
    ledger.subresults = shape.i_h * vb;
    ledger.a_broadcast = 1;
    ledger.b_rows = vb;
    for (size_t i = 0; i < leaves.size(); ++i) {
        const DagLeaf& l = leaves[i];
        if (l.role == LeafRole::A || l.role == LeafRole::B) continue;
        LeafLoad load;
        load.leaf = static_cast<int>(i);
        load.name = l.name;
        load.role = l.role;
        load.strategy = leaf_strategy(l.role);
        load.registers = leaf_registers(l.role, vb);
        ledger.aux.push_back(load);
    }
    // Each distinct literal sits in its own broadcast register for the whole
    // kernel, like a named constant.
    for (size_t i = 0; i < program.literal_pool.size(); ++i) {
        LeafLoad load;
        load.leaf = -1;
        std::ostringstream os;
        os << "$" << program.literal_pool[i];
        load.name = os.str();
        load.role = LeafRole::AuxConstant;
        load.strategy = LoadStrategy::BroadcastConstant;
        load.registers = 1;
        ledger.aux.push_back(load);
    }
    ledger.scheduler_temps = program.n_extra_vec_regs_fused;
    ledger.mask_regs = program.n_mask_regs;
    ledger.total = ledger.subresults + ledger.a_broadcast + ledger.b_rows;
    for (const auto& x : ledger.aux) ledger.total += x.registers;
    ledger.total += ledger.scheduler_temps;
    return ledger;
}

int count_vec_registers(const PseudoProgram& program, const std::vector<DagLeaf>& leaves,
                        KernelShape shape, int simd_width) {
    return register_ledger(program, leaves, shape, simd_width).total;
}

KernelShape choose_kernel_shape(const PseudoProgram& program, const std::vector<DagLeaf>& leaves,
                                const MachineModel& machine) {
    int sw = machine.simd_width;
    // Starting width: the configured maximum, floored to a multiple of S_w.
    int iw = std::max(sw, machine.max_kernel_w / sw * sw);
    for (;;) {
        for (int ih = machine.max_kernel_h; ih >= 1; --ih) {
            KernelShape shape{ih, iw};
            if (count_vec_registers(program, leaves, shape, sw) <= machine.vec_regs) return shape;
        }
        if (iw == sw) break;
        iw = std::max(sw, iw / 2 / sw * sw);
    }
    throw NoFeasibleKernel("no kernel shape fits in " + std::to_string(machine.vec_regs) +
                           " vector registers (even 1x" + std::to_string(sw) + ")");
}

KernelPlan lower_kernel(const Mmlt& recog, const PseudoProgram& program,
                        const std::vector<DagLeaf>& leaves, KernelShape shape,
                        const MachineModel& machine) {
    KernelPlan plan;
    plan.recog = recog;
    plan.program = program;
    plan.shape = shape;
    plan.simd_width = machine.simd_width;
    plan.ledger = register_ledger(program, leaves, shape, machine.simd_width);

    int vb = vec_blocks(shape, machine.simd_width);
    plan.accumulator_slots = shape.i_h * vb;
    plan.vector_loads_per_k = vb;       // B rows
    plan.broadcasts_per_k = shape.i_h;  // A elements
    for (size_t i = 0; i < leaves.size(); ++i) {
        const DagLeaf& l = leaves[i];
        LeafLoad load;
        load.leaf = static_cast<int>(i);
        load.name = l.name;
        load.role = l.role;
        load.strategy = leaf_strategy(l.role);
        load.registers = leaf_registers(l.role, vb);
        plan.leaf_loads.push_back(load);
        switch (l.role) {
            case LeafRole::B:
                break;  // already counted
            case LeafRole::AuxVecJ:
                plan.vector_loads_per_k += vb;
                break;
            case LeafRole::AuxVecI:
                plan.broadcasts_per_k += shape.i_h;
                break;
            default:
                break;
        }
    }
    return plan;
}

std::string print_ledger(const RegisterLedger& ledger, KernelShape shape, int simd_width) {
    std::ostringstream os;
    int vb = (shape.i_w + simd_width - 1) / simd_width;
    os << "register ledger for " << shape.i_h << "x" << shape.i_w << " kernel (S_w=" << simd_width
       << "):\n";
    os << "  subresults        " << shape.i_h << "*" << vb << " = " << ledger.subresults << "\n";
    os << "  a broadcast       " << ledger.a_broadcast << "\n";
    os << "  b rows            " << ledger.b_rows << "\n";
    for (const auto& x : ledger.aux)
        os << "  aux " << x.name << " (" << leaf_role_name(x.role) << ") " << x.registers << "\n";
    os << "  scheduler temps   " << ledger.scheduler_temps << "\n";
    os << "  total             " << ledger.total << "\n";
    os << "  mask registers    " << ledger.mask_regs << " (separate file, not budgeted)\n";
    return os.str();
}

}  // namespace amlt
