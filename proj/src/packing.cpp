#include "amlt/packing.hpp"

namespace amlt {

PackedPanelA pack_a_panel(const MatrixBuffer& a, OperandLayout layout, std::int64_t i0,
                          std::int64_t rows, std::int64_t k0, std::int64_t depth, int i_h) {
    PackedPanelA p;
    p.i0 = i0;
    p.rows = rows;
    p.k0 = k0;
    p.depth = depth;
    p.i_h = i_h;
    p.blocks = rows / i_h;
    p.data.resize(static_cast<size_t>(p.blocks * depth * i_h));
    double* out = p.data.data();
    for (std::int64_t b = 0; b < p.blocks; ++b) {
        std::int64_t base_i = i0 + b * i_h;
        for (std::int64_t kk = 0; kk < depth; ++kk)
            for (int r = 0; r < i_h; ++r)
                *out++ = layout == OperandLayout::Transposed ? a.at(k0 + kk, base_i + r)
                                                             : a.at(base_i + r, k0 + kk);
    }
    return p;
}

PackedPanelB pack_b_panel(const MatrixBuffer& b, OperandLayout layout, std::int64_t k0,
                          std::int64_t depth, std::int64_t j0, std::int64_t cols, int i_w) {
    PackedPanelB p;
    p.k0 = k0;
    p.depth = depth;
    p.j0 = j0;
    p.cols = cols;
    p.i_w = i_w;
    p.blocks = cols / i_w;
    p.data.resize(static_cast<size_t>(p.blocks * depth * i_w));
    double* out = p.data.data();
    for (std::int64_t blk = 0; blk < p.blocks; ++blk) {
        std::int64_t base_j = j0 + blk * i_w;
        for (std::int64_t kk = 0; kk < depth; ++kk)
            for (int c = 0; c < i_w; ++c)
                *out++ = layout == OperandLayout::Transposed ? b.at(base_j + c, k0 + kk)
                                                             : b.at(k0 + kk, base_j + c);
    }
    return p;
}

}  // namespace amlt
