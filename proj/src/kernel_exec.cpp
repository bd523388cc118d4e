#include "amlt/kernel_exec.hpp"

#include <cassert>

#include "amlt/errors.hpp"

namespace amlt {

namespace {

constexpr int kMaxH = 16;
constexpr int kMaxW = 32;
constexpr int kMaxSlots = 32;
constexpr int kMaxTemps = 16;
constexpr int kMaxStage = 8192;

CompiledKernel::Opd encode(const POperand& o, int n_leaves) {
    switch (o.kind) {
        case POperand::Kind::Result:
            return {0, 0};
        case POperand::Kind::VecTemp:
            return {1, static_cast<std::uint8_t>(o.index)};
        case POperand::Kind::MaskTemp:
            return {2, static_cast<std::uint8_t>(o.index)};
        case POperand::Kind::Leaf:
            return {3, static_cast<std::uint8_t>(o.index)};
        case POperand::Kind::Literal:
            return {3, static_cast<std::uint8_t>(n_leaves + o.index)};
    }
    return {0, 0};
}

// Effective element addressing for a 2-D operand under a statement-side
// transpose: pos0 is the element at (row0, col0) in statement coordinates,
// row_step/col_step walk the statement row/column axes.
struct Addr2D {
    const double* pos0;
    std::int64_t row_step;
    std::int64_t col_step;
};

Addr2D addr2d(const MatrixBuffer& m, OperandLayout layout, std::int64_t row0, std::int64_t col0) {
    if (layout == OperandLayout::Transposed)
        return {m.data() + m.index(col0, row0), m.step_along_cols(), m.step_along_rows()};
    return {m.data() + m.index(row0, col0), m.step_along_rows(), m.step_along_cols()};
}

const MatrixBuffer* find_aux(const Operands& ops, const std::string& name) {
    auto it = ops.aux.find(name);
    if (it == ops.aux.end()) throw MissingBinding(name);
    return it->second;
}

// Per-slot fetch state for one block: lanes are contiguous at `base +
// r*r_stride + cv*cv_stride`. Slots that cannot expose contiguous lanes
// directly (broadcasts, strided rows) point into the staging area.
struct SlotCtx {
    const double* base = nullptr;
    std::int64_t r_stride = 0;
    std::int64_t cv_stride = 0;
};

template <int SW>
void run_instrs(const CompiledKernel& ck, const SlotCtx* slots, double* acc_cell, double* vtmp,
                double* mtmp, int r, int cv) {
    for (const auto& in : ck.instrs) {
        const double* s[3];
        for (int a = 0; a < in.n_src; ++a) {
            const auto& o = in.src[a];
            switch (o.kind) {
                case 0: s[a] = acc_cell; break;
                case 1: s[a] = vtmp + o.idx * SW; break;
                case 2: s[a] = mtmp + o.idx * SW; break;
                default: {
                    const SlotCtx& sc = slots[o.idx];
                    s[a] = sc.base + r * sc.r_stride + cv * sc.cv_stride;
                }
            }
        }
        double* d;
        switch (in.dst.kind) {
            case 0: d = acc_cell; break;
            case 1: d = vtmp + in.dst.idx * SW; break;
            default: d = mtmp + in.dst.idx * SW; break;
        }
        switch (in.op) {
            case POpcode::mov:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l];
                break;
            case POpcode::add:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] + s[1][l];
                break;
            case POpcode::sub:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] - s[1][l];
                break;
            case POpcode::mul:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] * s[1][l];
                break;
            case POpcode::div:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] / s[1][l];
                break;
            case POpcode::gtcmp:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] > s[1][l] ? 1.0 : 0.0;
                break;
            case POpcode::gecmp:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] >= s[1][l] ? 1.0 : 0.0;
                break;
            case POpcode::ltcmp:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] < s[1][l] ? 1.0 : 0.0;
                break;
            case POpcode::lecmp:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] <= s[1][l] ? 1.0 : 0.0;
                break;
            case POpcode::eqcmp:
                for (int l = 0; l < SW; ++l) d[l] = s[0][l] == s[1][l] ? 1.0 : 0.0;
                break;
            case POpcode::masksub:
                // masksub dst MASK x y: dst = x - mask*y
                for (int l = 0; l < SW; ++l) d[l] = s[1][l] - s[0][l] * s[2][l];
                break;
            case POpcode::maskadd:
                for (int l = 0; l < SW; ++l) d[l] = s[1][l] + s[0][l] * s[2][l];
                break;
        }
    }
}

template <int SW>
void exec_block_t(const KernelPlan& plan, const CompiledKernel& ck, const Operands& ops,
                  std::int64_t i, std::int64_t k, std::int64_t j, std::int64_t kc) {
    const int ih = plan.shape.i_h;
    const int iw = plan.shape.i_w;
    const int vb = iw / SW;

    double acc[kMaxH * kMaxW];
    for (int s = 0; s < ih * iw; ++s) acc[s] = 0.0;

    // Fast path: plain multiply-accumulate, no interpretation.
    if (ck.fused_multiply_add) {
        const double* apack = nullptr;
        Addr2D aaddr{};
        if (ops.packed_a) {
            assert((i - ops.packed_a->i0) % ih == 0 && k >= ops.packed_a->k0 &&
                   k + kc <= ops.packed_a->k0 + ops.packed_a->depth);
            apack = ops.packed_a->block((i - ops.packed_a->i0) / ih) +
                    (k - ops.packed_a->k0) * ih;
        } else {
            aaddr = addr2d(*ops.a, plan.recog.layout_a, i, k);
        }
        const double* bpack = nullptr;
        Addr2D baddr{};
        if (ops.packed_b) {
            assert((j - ops.packed_b->j0) % iw == 0 && k >= ops.packed_b->k0 &&
                   k + kc <= ops.packed_b->k0 + ops.packed_b->depth);
            bpack = ops.packed_b->block((j - ops.packed_b->j0) / iw) +
                    (k - ops.packed_b->k0) * iw;
        } else {
            baddr = addr2d(*ops.b, plan.recog.layout_b, k, j);
        }
        double brow_stage[kMaxW];
        for (std::int64_t kk = 0; kk < kc; ++kk) {
            const double* brow;
            if (bpack) {
                brow = bpack + kk * iw;
            } else if (baddr.col_step == 1) {
                brow = baddr.pos0 + kk * baddr.row_step;
            } else {
                const double* src = baddr.pos0 + kk * baddr.row_step;
                for (int c = 0; c < iw; ++c) brow_stage[c] = src[c * baddr.col_step];
                brow = brow_stage;
            }
            for (int r = 0; r < ih; ++r) {
                double aval = apack ? apack[kk * ih + r]
                                     : aaddr.pos0[r * aaddr.row_step + kk * aaddr.col_step];
                double* arow = acc + r * iw;
                for (int c = 0; c < iw; ++c) arow[c] += aval * brow[c];
            }
        }
    } else {
        double stage[kMaxStage];
        double vtmp[kMaxTemps * SW];
        double mtmp[kMaxTemps * SW];
        SlotCtx slots[kMaxSlots];
        int n_slots = ck.n_leaves + static_cast<int>(ck.literals.size());

        // Literal and constant slots are filled once per block; VecI, VecJ and
        // MatIJ do not change with k, so they are staged (or pointed at)
        // up front as well. A and B are refreshed inside the k loop.
        Addr2D aaddr{};
        const double* apack = nullptr;
        int a_slot = -1;
        struct BSlot {
            int slot;
            Addr2D addr;
            bool direct;
        };
        BSlot bslots[kMaxSlots];
        int n_bslots = 0;
        const double* bpack = nullptr;
        int bpack_slot = -1;

        for (int sl = 0; sl < ck.n_leaves; ++sl) {
            double* area = stage + ck.slot_offset[static_cast<size_t>(sl)];
            switch (ck.leaf_roles[static_cast<size_t>(sl)]) {
                case LeafRole::A:
                    a_slot = sl;
                    if (ops.packed_a) {
                        assert((i - ops.packed_a->i0) % ih == 0 && k >= ops.packed_a->k0 &&
                               k + kc <= ops.packed_a->k0 + ops.packed_a->depth);
                        apack = ops.packed_a->block((i - ops.packed_a->i0) / ih) +
                                (k - ops.packed_a->k0) * ih;
                    } else {
                        aaddr = addr2d(*ops.a, plan.recog.layout_a, i, k);
                    }
                    slots[sl] = {area, 0, 0};  // refilled per (k, r)
                    break;
                case LeafRole::B:
                    if (ops.packed_b) {
                        assert((j - ops.packed_b->j0) % iw == 0 && k >= ops.packed_b->k0 &&
                               k + kc <= ops.packed_b->k0 + ops.packed_b->depth);
                        bpack = ops.packed_b->block((j - ops.packed_b->j0) / iw) +
                                (k - ops.packed_b->k0) * iw;
                        bpack_slot = sl;
                        slots[sl] = {bpack, 0, SW};
                    } else {
                        Addr2D ad = addr2d(*ops.b, plan.recog.layout_b, k, j);
                        bool direct = ad.col_step == 1;
                        bslots[n_bslots++] = {sl, ad, direct};
                        slots[sl] = {direct ? ad.pos0 : area, 0, SW};
                    }
                    break;
                case LeafRole::AuxVecI: {
                    const MatrixBuffer* v = find_aux(ops, ck.leaf_names[static_cast<size_t>(sl)]);
                    for (int r = 0; r < ih; ++r)
                        for (int l = 0; l < SW; ++l) area[r * SW + l] = v->at(i + r, 0);
                    slots[sl] = {area, SW, 0};
                    break;
                }
                case LeafRole::AuxVecJ: {
                    const MatrixBuffer* v = find_aux(ops, ck.leaf_names[static_cast<size_t>(sl)]);
                    // N x 1 buffers are contiguous along rows; point straight in.
                    slots[sl] = {v->data() + v->index(j, 0), 0, SW};
                    break;
                }
                case LeafRole::AuxMatIJ: {
                    const MatrixBuffer* m = find_aux(ops, ck.leaf_names[static_cast<size_t>(sl)]);
                    if (m->step_along_cols() == 1) {
                        slots[sl] = {m->data() + m->index(i, j), m->step_along_rows(), SW};
                    } else {
                        for (int r = 0; r < ih; ++r)
                            for (int c = 0; c < iw; ++c)
                                area[r * iw + c] = m->at(i + r, j + c);
                        slots[sl] = {area, iw, SW};
                    }
                    break;
                }
                case LeafRole::AuxConstant: {
                    const MatrixBuffer* v = find_aux(ops, ck.leaf_names[static_cast<size_t>(sl)]);
                    for (int l = 0; l < SW; ++l) area[l] = v->at(0, 0);
                    slots[sl] = {area, 0, 0};
                    break;
                }
            }
        }
        for (size_t li = 0; li < ck.literals.size(); ++li) {
            int sl = ck.n_leaves + static_cast<int>(li);
            double* area = stage + ck.slot_offset[static_cast<size_t>(sl)];
            for (int l = 0; l < SW; ++l) area[l] = ck.literals[li];
            slots[sl] = {area, 0, 0};
        }
        (void)n_slots;

        double* a_area = a_slot >= 0 ? stage + ck.slot_offset[static_cast<size_t>(a_slot)] : nullptr;

        for (std::int64_t kk = 0; kk < kc; ++kk) {
            if (bpack_slot >= 0) slots[bpack_slot].base = bpack + kk * iw;
            for (int bs = 0; bs < n_bslots; ++bs) {
                const BSlot& b = bslots[bs];
                if (b.direct) {
                    slots[b.slot].base = b.addr.pos0 + kk * b.addr.row_step;
                } else {
                    double* area = stage + ck.slot_offset[static_cast<size_t>(b.slot)];
                    const double* src = b.addr.pos0 + kk * b.addr.row_step;
                    for (int c = 0; c < iw; ++c) area[c] = src[c * b.addr.col_step];
                }
            }
            for (int r = 0; r < ih; ++r) {
                if (a_slot >= 0) {
                    double aval = apack ? apack[kk * ih + r]
                                         : aaddr.pos0[r * aaddr.row_step + kk * aaddr.col_step];
                    for (int l = 0; l < SW; ++l) a_area[l] = aval;
                }
                for (int cv = 0; cv < vb; ++cv)
                    run_instrs<SW>(ck, slots, acc + (r * vb + cv) * SW, vtmp, mtmp, r, cv);
            }
        }
    }

    // Epilogue: single read-modify-write (or write) of R per element.
    MatrixBuffer& r_buf = *ops.r;
    std::int64_t rstep = r_buf.step_along_rows();
    std::int64_t cstep = r_buf.step_along_cols();
    double* rbase = r_buf.data() + r_buf.index(i, j);
    if (ck.accumulate) {
        for (int r = 0; r < ih; ++r)
            for (int c = 0; c < iw; ++c)
                rbase[r * rstep + c * cstep] += acc[r * iw + c];
    } else {
        for (int r = 0; r < ih; ++r)
            for (int c = 0; c < iw; ++c)
                rbase[r * rstep + c * cstep] = acc[r * iw + c];
    }
}

}  // namespace

CompiledKernel compile_kernel(const KernelPlan& plan) {
    const PseudoProgram& p = plan.program;
    CompiledKernel ck;
    ck.accumulate = p.accumulate;
    ck.n_leaves = static_cast<int>(p.leaf_names.size());
    ck.leaf_names = p.leaf_names;
    ck.literals = p.literal_pool;
    ck.leaf_roles.resize(p.leaf_names.size());
    for (const auto& load : plan.leaf_loads)
        if (load.leaf >= 0) ck.leaf_roles[static_cast<size_t>(load.leaf)] = load.role;

    if (ck.n_leaves + static_cast<int>(ck.literals.size()) > kMaxSlots)
        throw UnsupportedExpression("statement has too many distinct leaves");
    if (p.n_extra_vec_regs > kMaxTemps || p.n_mask_regs > kMaxTemps)
        throw UnsupportedExpression("statement needs too many scheduler temps");
    if (plan.shape.i_h > kMaxH || plan.shape.i_w > kMaxW)
        throw UnsupportedExpression("kernel shape exceeds executor limits");

    for (const auto& in : p.instrs) {
        CompiledKernel::Instr ci;
        ci.op = in.op;
        ci.dst = encode(in.dst, ck.n_leaves);
        ci.n_src = in.n_src;
        for (int s = 0; s < in.n_src; ++s) ci.src[s] = encode(in.src[s], ck.n_leaves);
        ck.instrs.push_back(ci);
    }
    ck.n_vec_temps = p.n_extra_vec_regs;
    ck.n_mask_temps = p.n_mask_regs;

    // Staging layout: every slot gets room for its worst case (strided
    // sources force copies; contiguous ones point in directly and waste it).
    int ih = plan.shape.i_h, iw = plan.shape.i_w, sw = plan.simd_width;
    auto slot_size = [&](LeafRole role) {
        switch (role) {
            case LeafRole::A: return sw;
            case LeafRole::B: return iw;
            case LeafRole::AuxVecI: return ih * sw;
            case LeafRole::AuxVecJ: return iw;
            case LeafRole::AuxMatIJ: return ih * iw;
            case LeafRole::AuxConstant: return sw;
        }
        return sw;
    };
    int off = 0;
    for (int sl = 0; sl < ck.n_leaves; ++sl) {
        ck.slot_offset.push_back(off);
        off += slot_size(ck.leaf_roles[static_cast<size_t>(sl)]);
    }
    for (size_t li = 0; li < ck.literals.size(); ++li) {
        ck.slot_offset.push_back(off);
        off += sw;
    }
    ck.stage_total = off;
    if (off > kMaxStage) throw UnsupportedExpression("statement staging exceeds executor limits");

    // R += A*B and nothing else: two instructions, a leaf-by-leaf multiply
    // feeding the accumulate.
    if (ck.accumulate && ck.instrs.size() == 2) {
        const auto& m = ck.instrs[0];
        const auto& t = ck.instrs[1];
        if (m.op == POpcode::mul && m.src[0].kind == 3 && m.src[1].kind == 3 &&
            m.src[0].idx < ck.n_leaves && m.src[1].idx < ck.n_leaves && m.dst.kind == 1 &&
            t.op == POpcode::add && t.dst.kind == 0 && t.src[0].kind == 0 &&
            t.src[1].kind == 1 && t.src[1].idx == m.dst.idx) {
            LeafRole r0 = ck.leaf_roles[m.src[0].idx];
            LeafRole r1 = ck.leaf_roles[m.src[1].idx];
            if ((r0 == LeafRole::A && r1 == LeafRole::B) ||
                (r0 == LeafRole::B && r1 == LeafRole::A)) {
                ck.fused_multiply_add = true;
                ck.fused_a_slot = r0 == LeafRole::A ? m.src[0].idx : m.src[1].idx;
                ck.fused_b_slot = r0 == LeafRole::A ? m.src[1].idx : m.src[0].idx;
            }
        }
    }
    return ck;
}

void execute_block(const KernelPlan& plan, const CompiledKernel& kernel, const Operands& ops,
                   std::int64_t i, std::int64_t k, std::int64_t j, std::int64_t kc) {
    switch (plan.simd_width) {
        case 1: exec_block_t<1>(plan, kernel, ops, i, k, j, kc); break;
        case 2: exec_block_t<2>(plan, kernel, ops, i, k, j, kc); break;
        case 4: exec_block_t<4>(plan, kernel, ops, i, k, j, kc); break;
        case 8: exec_block_t<8>(plan, kernel, ops, i, k, j, kc); break;
        case 16: exec_block_t<16>(plan, kernel, ops, i, k, j, kc); break;
        default:
            throw UnsupportedExpression("unsupported vector width " +
                                        std::to_string(plan.simd_width));
    }
}

void execute_scalar_region(const KernelPlan& plan, const CompiledKernel& kernel,
                           const Operands& ops, std::int64_t i0, std::int64_t i1, std::int64_t j0,
                           std::int64_t j1, std::int64_t k0, std::int64_t k1) {
    if (i0 >= i1 || j0 >= j1 || k0 >= k1) return;
    int n_slots = kernel.n_leaves + static_cast<int>(kernel.literals.size());
    double slot[kMaxSlots];
    double vt[kMaxTemps];
    double mt[kMaxTemps];
    SlotCtx slots[kMaxSlots];
    for (int s = 0; s < n_slots; ++s) slots[s] = {slot + s, 0, 0};
    for (size_t li = 0; li < kernel.literals.size(); ++li)
        slot[kernel.n_leaves + static_cast<int>(li)] = kernel.literals[li];

    // Resolve aux buffers once.
    const MatrixBuffer* bufs[kMaxSlots] = {nullptr};
    for (int sl = 0; sl < kernel.n_leaves; ++sl) {
        switch (kernel.leaf_roles[static_cast<size_t>(sl)]) {
            case LeafRole::A: bufs[sl] = ops.a; break;
            case LeafRole::B: bufs[sl] = ops.b; break;
            default: bufs[sl] = find_aux(ops, kernel.leaf_names[static_cast<size_t>(sl)]); break;
        }
        if (kernel.leaf_roles[static_cast<size_t>(sl)] == LeafRole::AuxConstant)
            slot[sl] = bufs[sl]->at(0, 0);
    }

    bool a_t = plan.recog.layout_a == OperandLayout::Transposed;
    bool b_t = plan.recog.layout_b == OperandLayout::Transposed;
    for (std::int64_t i = i0; i < i1; ++i) {
        for (int sl = 0; sl < kernel.n_leaves; ++sl)
            if (kernel.leaf_roles[static_cast<size_t>(sl)] == LeafRole::AuxVecI)
                slot[sl] = bufs[sl]->at(i, 0);
        for (std::int64_t j = j0; j < j1; ++j) {
            for (int sl = 0; sl < kernel.n_leaves; ++sl) {
                LeafRole role = kernel.leaf_roles[static_cast<size_t>(sl)];
                if (role == LeafRole::AuxVecJ) slot[sl] = bufs[sl]->at(j, 0);
                if (role == LeafRole::AuxMatIJ) slot[sl] = bufs[sl]->at(i, j);
            }
            double accv = ops.r->at(i, j);
            for (std::int64_t k = k0; k < k1; ++k) {
                for (int sl = 0; sl < kernel.n_leaves; ++sl) {
                    LeafRole role = kernel.leaf_roles[static_cast<size_t>(sl)];
                    if (role == LeafRole::A) slot[sl] = a_t ? bufs[sl]->at(k, i) : bufs[sl]->at(i, k);
                    if (role == LeafRole::B) slot[sl] = b_t ? bufs[sl]->at(j, k) : bufs[sl]->at(k, j);
                }
                run_instrs<1>(kernel, slots, &accv, vt, mt, 0, 0);
            }
            ops.r->at(i, j) = accv;
        }
    }
}

}  // namespace amlt
