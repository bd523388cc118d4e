#pragma once

#include <cstdint>
#include <vector>

#include "amlt/matrix.hpp"
#include "amlt/recognize.hpp"

namespace amlt {

// Copies of operand regions reordered to the kernel's access order, so the
// hot loop reads contiguous memory. Packing also absorbs transposed statement
// forms and column-major storage: the packed scan is layout-independent.
//
// An A panel covers rows [i0, i0+rows) x depth k values, split into row
// blocks of i_h; within a block values are ordered k-step-major, row-minor,
// matching the kernel's broadcast order. Only full blocks are packed; fringe
// rows stay in the source buffer.
struct PackedPanelA {
    std::int64_t i0 = 0, rows = 0, k0 = 0, depth = 0;
    int i_h = 0;
    std::int64_t blocks = 0;
    std::vector<double> data;

    const double* block(std::int64_t b) const {
        return data.data() + static_cast<size_t>(b * depth * i_h);
    }
};

// A B panel covers depth k values x columns [j0, j0+cols), split into column
// blocks of i_w ordered k-step-major, column-minor, matching the kernel's
// row-vector loads.
struct PackedPanelB {
    std::int64_t k0 = 0, depth = 0, j0 = 0, cols = 0;
    int i_w = 0;
    std::int64_t blocks = 0;
    std::vector<double> data;

    const double* block(std::int64_t b) const {
        return data.data() + static_cast<size_t>(b * depth * i_w);
    }
};

// `layout` is the statement-side orientation: Transposed means the statement
// reads A[k][i] (resp. B[j][k]), so the packed element (r, kk) comes from
// buffer position (k0+kk, i0+r) instead of (i0+r, k0+kk).
PackedPanelA pack_a_panel(const MatrixBuffer& a, OperandLayout layout, std::int64_t i0,
                          std::int64_t rows, std::int64_t k0, std::int64_t depth, int i_h);

PackedPanelB pack_b_panel(const MatrixBuffer& b, OperandLayout layout, std::int64_t k0,
                          std::int64_t depth, std::int64_t j0, std::int64_t cols, int i_w);

}  // namespace amlt
