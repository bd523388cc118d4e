#pragma once

#include <cstdint>
#include <vector>

#include "amlt/clock.hpp"
#include "amlt/tiled_executor.hpp"

namespace amlt {

// One scored tuning subtask: the parameter value tried, the elapsed seconds,
// and the normalized score (elapsed / value) the decision is based on.
struct Trial {
    std::int64_t value = 0;
    double elapsed = 0.0;
    double score = 0.0;
};

// A completed output region, full M rows, identified by its (k, j) ranges.
struct CoverRect {
    std::int64_t k0 = 0, k1 = 0;
    std::int64_t j0 = 0, j1 = 0;
};

struct TuneReport {
    std::vector<Trial> kc_trials;
    std::vector<Trial> nc_trials;
    std::int64_t best_kc = 0;
    std::int64_t best_nc = 0;
    bool tuned = false;  // false when the task was too small to test on
    std::vector<CoverRect> coverage;  // pairwise disjoint, union = K x N
    double tuning_fraction = 0.0;     // tested output columns / N
    double total_seconds = 0.0;       // sum over all subtasks
};

// Candidate cache depths: K, then repeated halving (rounding up), keeping
// values >= 16, descending. K < 16 degenerates to [K] so a depth always
// exists.
std::vector<std::int64_t> kc_candidates(std::int64_t K);

// Phase 1: scores kc candidates on the first 4*i_w output columns. Columns
// [j0, j0+2*i_w) run as one subtask over the full K range with kc = K;
// columns [j0+2*i_w, j0+4*i_w) are split along K into consecutive segments,
// one per remaining candidate (segment depth = candidate), each scored
// elapsed/kc; any leftover K range runs unscored with the best candidate so
// far. nc is fixed to i_w throughout. Returns the argmin-score kc (ties keep
// the earlier, larger candidate) and appends trials and coverage to the
// report. Requires j1 - j0 >= 4*i_w.
std::int64_t find_kc(const KernelPlan& plan, const CompiledKernel& kernel, const Operands& ops,
                     const Bounds& bounds, bool pack, Clock& clock, TuneReport& report,
                     ExecLog* log = nullptr);

// Phase 2: scores nc = i_w, 2*i_w, 4*i_w, ... on disjoint column strips
// starting at j0+4*i_w, each spanning K range [k0, k0+best_kc) and full M,
// scored elapsed/nc. Stops at the first score increase (returning the
// immediately previous candidate) or when the next strip would run past j1
// (returning the best score so far, ties keeping the earlier candidate).
// When not even the first strip fits, returns the full remaining width.
std::int64_t find_nc(const KernelPlan& plan, const CompiledKernel& kernel, const Operands& ops,
                     const Bounds& bounds, std::int64_t best_kc, bool pack, Clock& clock,
                     TuneReport& report, ExecLog* log = nullptr);

// Full adaptive run over the bounds: find_kc, find_nc, then the uncovered
// region in maximal rectangles with the winning parameters. Every subtask
// writes into R, so tuning work is never repeated. Tasks too small to tune
// (fewer than 4*i_w columns or fewer than i_h rows) run as a single subtask
// with kc = min(K, 256), nc = N and the report marked untuned.
TuneReport adaptive_execute(const KernelPlan& plan, const CompiledKernel& kernel,
                            const Operands& ops, const Bounds& bounds, bool pack, Clock& clock,
                            ExecLog* log = nullptr);

}  // namespace amlt
