#pragma once

namespace amlt {

// Vector-unit description the planner works against. Defaults describe a
// 512-bit unit: 8 doubles per vector, 32 architectural vector registers.
// Mask registers are a separate file and are not budgeted.
struct MachineModel {
    int simd_width = 8;     // S_w: doubles per vector register
    int vec_regs = 32;      // R: usable vector registers
    int max_kernel_h = 12;  // widest kernel considered, rows
    int max_kernel_w = 16;  // widest kernel considered, columns
};

// Register-blocked kernel footprint: i_h rows by i_w columns of the output,
// i_w a multiple of the vector width.
struct KernelShape {
    int i_h = 0;
    int i_w = 0;
};

}  // namespace amlt
