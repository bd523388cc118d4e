#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "amlt/kernel_plan.hpp"
#include "amlt/matrix.hpp"
#include "amlt/packing.hpp"

namespace amlt {

// Bound operands for one task execution. Aux arrays are keyed by leaf name:
// VecI leaves are M x 1 buffers, VecJ are N x 1, MatIJ are M x N, named
// constants 1 x 1. The packed panel pointers, when set, must cover the block
// being executed; fringe (scalar) execution always reads the source buffers.
struct Operands {
    const MatrixBuffer* a = nullptr;
    const MatrixBuffer* b = nullptr;
    MatrixBuffer* r = nullptr;
    std::map<std::string, const MatrixBuffer*> aux;
    const PackedPanelA* packed_a = nullptr;
    const PackedPanelB* packed_b = nullptr;
};

// The pseudo program re-encoded for the interpreting executor: flat operand
// descriptors instead of tagged variants, literal values staged like named
// constants, and a flag for the fused multiply-accumulate fast path.
struct CompiledKernel {
    struct Opd {
        std::uint8_t kind = 0;  // 0 acc, 1 vec temp, 2 mask temp, 3 leaf/literal slot
        std::uint8_t idx = 0;
    };
    struct Instr {
        POpcode op = POpcode::mov;
        Opd dst;
        Opd src[3];
        int n_src = 0;
    };
    std::vector<Instr> instrs;
    int n_vec_temps = 0;
    int n_mask_temps = 0;
    int n_leaves = 0;
    std::vector<LeafRole> leaf_roles;      // per leaf slot
    std::vector<std::string> leaf_names;   // per leaf slot
    std::vector<double> literals;          // slots n_leaves.. hold these values
    bool accumulate = true;
    // R += A*B with nothing else: skip the interpreter and run a plain fused
    // multiply-accumulate loop.
    bool fused_multiply_add = false;
    int fused_a_slot = -1;
    int fused_b_slot = -1;
    // Per-slot offsets into the block-local staging area (worst case: every
    // slot staged), sized by compile_kernel from the plan's shape and width.
    std::vector<int> slot_offset;
    int stage_total = 0;
};

CompiledKernel compile_kernel(const KernelPlan& plan);

// Runs one register-blocked kernel instance: output rows [i, i+i_h), columns
// [j, j+i_w), accumulating the statement over k values [k, k+kc). Subresults
// live in local accumulators; R is read and written only in the epilogue.
// The caller guarantees the block lies fully inside the output and k+kc does
// not exceed the operand extent.
void execute_block(const KernelPlan& plan, const CompiledKernel& kernel, const Operands& ops,
                   std::int64_t i, std::int64_t k, std::int64_t j, std::int64_t kc);

// Element-at-a-time fallback for fringe regions: applies the statement for
// every (i, j, k) in the given half-open ranges, ascending, reading operands
// from the source buffers.
void execute_scalar_region(const KernelPlan& plan, const CompiledKernel& kernel,
                           const Operands& ops, std::int64_t i0, std::int64_t i1, std::int64_t j0,
                           std::int64_t j1, std::int64_t k0, std::int64_t k1);

}  // namespace amlt
