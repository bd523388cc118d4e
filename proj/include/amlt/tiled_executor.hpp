#pragma once

#include <cstdint>
#include <vector>

#include "amlt/clock.hpp"
#include "amlt/kernel_exec.hpp"

namespace amlt {

struct TileParams {
    std::int64_t kc = 0;
    std::int64_t nc = 0;
    bool pack = false;
};

struct Bounds {
    std::int64_t i0 = 0, i1 = 0;
    std::int64_t j0 = 0, j1 = 0;
    std::int64_t k0 = 0, k1 = 0;
};

// One dispatch the executor made: a register-blocked kernel call or a scalar
// fringe sweep, over half-open index ranges.
struct ExecRecord {
    bool scalar = false;
    std::int64_t i0 = 0, i1 = 0;
    std::int64_t j0 = 0, j1 = 0;
    std::int64_t k0 = 0, k1 = 0;
};

struct ExecLog {
    std::vector<ExecRecord> records;
};

// Cache-tiled loop nest over the given bounds: k in steps of kc, j in steps
// of nc, then register blocks of i_h x i_w columns-first within the tile.
// Full-height rows with leftover columns, and leftover rows, fall through to
// the scalar path. The clock is read exactly twice, immediately around the
// nest; packing (when requested) happens before the first read. Returns the
// elapsed seconds between the two reads.
double run_subtask(const KernelPlan& plan, const CompiledKernel& kernel, const Operands& ops,
                   const TileParams& params, const Bounds& bounds, Clock& clock,
                   ExecLog* log = nullptr);

}  // namespace amlt
