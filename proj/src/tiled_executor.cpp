#include "amlt/tiled_executor.hpp"

#include <algorithm>

#include "amlt/packing.hpp"

namespace amlt {

double run_subtask(const KernelPlan& plan, const CompiledKernel& kernel, const Operands& ops,
                   const TileParams& params, const Bounds& b, Clock& clock, ExecLog* log) {
    const int ih = plan.shape.i_h;
    const int iw = plan.shape.i_w;
    const std::int64_t kc = std::max<std::int64_t>(1, params.kc);
    const std::int64_t nc = std::max<std::int64_t>(1, params.nc);
    const std::int64_t full_rows = (b.i1 - b.i0) / ih * ih;

    // Segment starts, listed up front so packing can mirror the nest exactly.
    std::vector<std::int64_t> ksegs, jsegs;
    for (std::int64_t k = b.k0; k < b.k1; k += kc) ksegs.push_back(k);
    for (std::int64_t j = b.j0; j < b.j1; j += nc) jsegs.push_back(j);

    std::vector<PackedPanelA> pa;
    std::vector<PackedPanelB> pb;  // k segment major, j segment minor
    if (params.pack) {
        pa.reserve(ksegs.size());
        pb.reserve(ksegs.size() * jsegs.size());
        for (std::int64_t k : ksegs) {
            std::int64_t kc_eff = std::min(kc, b.k1 - k);
            pa.push_back(pack_a_panel(*ops.a, plan.recog.layout_a, b.i0, full_rows, k, kc_eff, ih));
            for (std::int64_t j : jsegs) {
                std::int64_t nc_eff = std::min(nc, b.j1 - j);
                pb.push_back(pack_b_panel(*ops.b, plan.recog.layout_b, k, kc_eff, j,
                                          nc_eff / iw * iw, iw));
            }
        }
    }

    Operands block_ops = ops;

    double t0 = clock.now();
    for (std::size_t ks = 0; ks < ksegs.size(); ++ks) {
        const std::int64_t k = ksegs[ks];
        const std::int64_t kc_eff = std::min(kc, b.k1 - k);
        for (std::size_t js = 0; js < jsegs.size(); ++js) {
            const std::int64_t j = jsegs[js];
            const std::int64_t nc_eff = std::min(nc, b.j1 - j);
            const std::int64_t full_w = nc_eff / iw * iw;
            if (params.pack) {
                block_ops.packed_a = &pa[ks];
                block_ops.packed_b = &pb[ks * jsegs.size() + js];
            }
            for (std::int64_t i = b.i0; i + ih <= b.i1; i += ih) {
                for (std::int64_t jj = j; jj < j + full_w; jj += iw) {
                    execute_block(plan, kernel, block_ops, i, k, jj, kc_eff);
                    if (log)
                        log->records.push_back({false, i, i + ih, jj, jj + iw, k, k + kc_eff});
                }
            }
            if (full_w < nc_eff && full_rows > 0) {
                execute_scalar_region(plan, kernel, ops, b.i0, b.i0 + full_rows, j + full_w,
                                      j + nc_eff, k, k + kc_eff);
                if (log)
                    log->records.push_back(
                        {true, b.i0, b.i0 + full_rows, j + full_w, j + nc_eff, k, k + kc_eff});
            }
            if (b.i0 + full_rows < b.i1) {
                execute_scalar_region(plan, kernel, ops, b.i0 + full_rows, b.i1, j, j + nc_eff, k,
                                      k + kc_eff);
                if (log)
                    log->records.push_back(
                        {true, b.i0 + full_rows, b.i1, j, j + nc_eff, k, k + kc_eff});
            }
        }
    }
    double t1 = clock.now();
    return t1 - t0;
}

}  // namespace amlt
