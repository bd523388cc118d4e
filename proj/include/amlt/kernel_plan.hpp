#pragma once

#include <string>
#include <vector>

#include "amlt/machine.hpp"
#include "amlt/recognize.hpp"
#include "amlt/schedule.hpp"

namespace amlt {

// How the kernel brings one statement leaf into a register:
//   BroadcastRowElement: one register, refilled per kernel row (A, VecI, and
//                        MatIJ leaves; the latter refills per subresult with a
//                        row of values rather than a single element)
//   VectorRow:           ceil(i_w/S_w) registers holding a row segment,
//                        refilled per k step (B and VecJ leaves)
//   BroadcastConstant:   one register filled once (constants and literals)
enum class LoadStrategy { BroadcastRowElement, VectorRow, BroadcastConstant };

struct LeafLoad {
    int leaf = -1;  // index into the program's leaf table; -1 for literals
    std::string name;
    LeafRole role = LeafRole::AuxConstant;
    LoadStrategy strategy = LoadStrategy::BroadcastConstant;
    int registers = 0;
};

// Line-item account of the vector registers a shape needs, in the order the
// budget is assembled. Mask registers are listed but not budgeted.
struct RegisterLedger {
    int subresults = 0;       // i_h * ceil(i_w/S_w)
    int a_broadcast = 0;      // always 1
    int b_rows = 0;           // ceil(i_w/S_w)
    std::vector<LeafLoad> aux;  // named aux leaves and literals
    int scheduler_temps = 0;  // extra temps after multiply-accumulate fusion
    int total = 0;
    int mask_regs = 0;
};

// Total vector registers the kernel needs at the given shape:
//   i_h*ceil(i_w/S_w) + 1 + ceil(i_w/S_w)
//   + per aux leaf (Constant 1, VecI 1, VecJ ceil(i_w/S_w), MatIJ 1)
//   + scheduler temps (with a trailing multiply-accumulate fused, so a pure
//     multiply statement adds nothing)
int count_vec_registers(const PseudoProgram& program, const std::vector<DagLeaf>& leaves,
                        KernelShape shape, int simd_width);

RegisterLedger register_ledger(const PseudoProgram& program, const std::vector<DagLeaf>& leaves,
                               KernelShape shape, int simd_width);

// Largest feasible kernel shape: starts at max_kernel_h x max_kernel_w,
// shrinks i_h by one while the count exceeds the budget, then halves i_w (to
// a multiple of S_w, at least S_w) and starts over. Throws NoFeasibleKernel
// when even 1 x S_w does not fit.
KernelShape choose_kernel_shape(const PseudoProgram& program, const std::vector<DagLeaf>& leaves,
                                const MachineModel& machine);

// Everything the executor needs for one task, fixed at plan time.
struct KernelPlan {
    Mmlt recog;
    PseudoProgram program;
    KernelShape shape;
    int simd_width = 8;
    RegisterLedger ledger;
    std::vector<LeafLoad> leaf_loads;  // one per program leaf, by leaf index
    // Derived structure counts, for inspection: per k step the kernel issues
    // vector_loads_per_k row loads and broadcasts_per_k element broadcasts.
    int accumulator_slots = 0;
    int vector_loads_per_k = 0;
    int broadcasts_per_k = 0;
};

KernelPlan lower_kernel(const Mmlt& recog, const PseudoProgram& program,
                        const std::vector<DagLeaf>& leaves, KernelShape shape,
                        const MachineModel& machine);

std::string print_ledger(const RegisterLedger& ledger, KernelShape shape, int simd_width);

}  // namespace amlt
