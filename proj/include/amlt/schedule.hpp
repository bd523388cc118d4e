#pragma once

#include <map>
#include <string>
#include <vector>

#include "amlt/expr_dag.hpp"

namespace amlt {

enum class POpcode {
    mov, add, sub, mul, div,
    gtcmp, gecmp, ltcmp, lecmp, eqcmp,
    masksub, maskadd
};

const char* popcode_name(POpcode op);

struct POperand {
    enum class Kind { Result, VecTemp, MaskTemp, Leaf, Literal };
    Kind kind = Kind::Result;
    int index = 0;  // temp number, leaf index, or literal-pool index
};

struct PseudoInstr {
    POpcode op = POpcode::mov;
    POperand dst;
    POperand src[3];
    int n_src = 0;
};

// Straight-line vector program for one output element: one instruction per
// DAG op node (shared nodes computed once), then a final instruction that
// accumulates into (or moves to) the result placeholder R.
struct PseudoProgram {
    std::vector<PseudoInstr> instrs;
    std::vector<std::string> leaf_names;  // by leaf index, mirrors dag.leaves
    std::vector<double> literal_pool;
    bool accumulate = true;
    int n_extra_vec_regs = 0;  // max simultaneously live vector temps
    int n_mask_regs = 0;       // max simultaneously live mask temps
    // Extra vector temps after folding a trailing mul feeding the accumulate
    // into a fused multiply-accumulate. For R += A*B this is 0 where
    // n_extra_vec_regs is 1; the register budget uses this number because the
    // generated kernel needs no temp for a fused tail.
    int n_extra_vec_regs_fused = 0;
    bool fused_tail = false;
};

// Orders each node's children by register need, larger first (ties keep
// source order), and assigns temps greedily, reusing a register as soon as
// its last consumer has been emitted.
PseudoProgram schedule_labelfs(const ExprDag& dag);

// One instruction per line in "opcode dst src..." form, e.g.
//   mul REG0 A B
//   gtcmp MASKREG0 REG0 THRES
// Leaf placeholders print as the upper-cased leaf name, literals as $value.
std::string print_program(const PseudoProgram& p);

// Reference interpreter used by tests: executes the program on scalar
// "registers", returning the final value of R (acc_in is R's prior value).
double run_program_scalar(const PseudoProgram& p, const std::map<std::string, double>& bindings,
                          double acc_in);

}  // namespace amlt
