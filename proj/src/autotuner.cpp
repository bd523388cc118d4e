#include "amlt/autotuner.hpp"

#include <algorithm>
#include <cassert>

namespace amlt {

std::vector<std::int64_t> kc_candidates(std::int64_t K) {
    std::vector<std::int64_t> out;
    if (K < 16) {
        out.push_back(K);
        return out;
    }
    for (std::int64_t c = K; c >= 16; c = (c + 1) / 2) out.push_back(c);
    return out;
}

std::int64_t find_kc(const KernelPlan& plan, const CompiledKernel& kernel, const Operands& ops,
                     const Bounds& b, bool pack, Clock& clock, TuneReport& report, ExecLog* log) {
    const std::int64_t iw = plan.shape.i_w;
    const std::int64_t K = b.k1 - b.k0;
    assert(b.j1 - b.j0 >= 4 * iw);
    auto cands = kc_candidates(K);

    auto best_so_far = [&]() {
        std::int64_t best = cands[0];
        double best_score = report.kc_trials.empty() ? 0.0 : report.kc_trials[0].score;
        for (const auto& t : report.kc_trials)
            if (t.score < best_score) {
                best_score = t.score;
                best = t.value;
            }
        return best;
    };

    // Strip S1: candidate kc = K on columns [j0, j0+2*i_w), full K range.
    {
        Bounds s1{b.i0, b.i1, b.j0, b.j0 + 2 * iw, b.k0, b.k1};
        double el = run_subtask(plan, kernel, ops, {cands[0], iw, pack}, s1, clock, log);
        report.total_seconds += el;
        report.kc_trials.push_back({cands[0], el, el / static_cast<double>(cands[0])});
        report.coverage.push_back({b.k0, b.k1, s1.j0, s1.j1});
    }

    // Strip S2: remaining candidates on columns [j0+2*i_w, j0+4*i_w), laid
    // end to end along K, one segment per candidate.
    const std::int64_t sj0 = b.j0 + 2 * iw;
    const std::int64_t sj1 = b.j0 + 4 * iw;
    std::int64_t kcur = b.k0;
    for (std::size_t ci = 1; ci < cands.size(); ++ci) {
        std::int64_t len = cands[ci];
        if (kcur + len > b.k1) continue;  // would not fit; never expected
        Bounds seg{b.i0, b.i1, sj0, sj1, kcur, kcur + len};
        double el = run_subtask(plan, kernel, ops, {len, iw, pack}, seg, clock, log);
        report.total_seconds += el;
        report.kc_trials.push_back({len, el, el / static_cast<double>(len)});
        report.coverage.push_back({kcur, kcur + len, sj0, sj1});
        kcur += len;
    }
    // Leftover K range of S2 runs unscored with the best candidate so far.
    if (kcur < b.k1) {
        std::int64_t kc = best_so_far();
        Bounds rest{b.i0, b.i1, sj0, sj1, kcur, b.k1};
        report.total_seconds += run_subtask(plan, kernel, ops, {kc, iw, pack}, rest, clock, log);
        report.coverage.push_back({kcur, b.k1, sj0, sj1});
    }
    return best_so_far();
}

std::int64_t find_nc(const KernelPlan& plan, const CompiledKernel& kernel, const Operands& ops,
                     const Bounds& b, std::int64_t best_kc, bool pack, Clock& clock,
                     TuneReport& report, ExecLog* log) {
    const std::int64_t iw = plan.shape.i_w;
    std::int64_t jcur = b.j0 + 4 * iw;
    const std::int64_t kb1 = std::min(b.k0 + best_kc, b.k1);

    std::int64_t best = 0;
    double best_score = 0.0;
    std::int64_t prev = 0;
    double prev_score = 0.0;
    for (std::int64_t w = iw;; w *= 2) {
        if (jcur + w > b.j1) break;  // column budget: keep best so far
        Bounds strip{b.i0, b.i1, jcur, jcur + w, b.k0, kb1};
        double el = run_subtask(plan, kernel, ops, {best_kc, w, pack}, strip, clock, log);
        report.total_seconds += el;
        double score = el / static_cast<double>(w);
        report.nc_trials.push_back({w, el, score});
        report.coverage.push_back({b.k0, kb1, jcur, jcur + w});
        jcur += w;
        // First increase: the immediately previous candidate wins outright.
        if (prev != 0 && score > prev_score) return prev;
        prev = w;
        prev_score = score;
        if (best == 0 || score < best_score) {
            best = w;
            best_score = score;
        }
    }
    // Budget stop (or nothing fit at all: fall back to the full width).
    return best != 0 ? best : b.j1 - b.j0;
}

TuneReport adaptive_execute(const KernelPlan& plan, const CompiledKernel& kernel,
                            const Operands& ops, const Bounds& b, bool pack, Clock& clock,
                            ExecLog* log) {
    TuneReport report;
    const std::int64_t iw = plan.shape.i_w;
    const std::int64_t ih = plan.shape.i_h;
    const std::int64_t N = b.j1 - b.j0;
    const std::int64_t K = b.k1 - b.k0;

    if (N < 4 * iw || b.i1 - b.i0 < ih) {
        // Too small to test on: run whole with fixed defaults.
        report.tuned = false;
        report.best_kc = std::min<std::int64_t>(K, 256);
        report.best_nc = N;
        report.total_seconds +=
            run_subtask(plan, kernel, ops, {report.best_kc, report.best_nc, pack}, b, clock, log);
        report.coverage.push_back({b.k0, b.k1, b.j0, b.j1});
        report.tuning_fraction = 0.0;
        return report;
    }

    report.tuned = true;
    report.best_kc = find_kc(plan, kernel, ops, b, pack, clock, report, log);
    report.best_nc = find_nc(plan, kernel, ops, b, report.best_kc, pack, clock, report, log);

    std::int64_t tested_w = 0;
    for (const auto& t : report.nc_trials) tested_w += t.value;
    report.tuning_fraction =
        static_cast<double>(4 * iw + tested_w) / static_cast<double>(N);

    // Remainder, in maximal rectangles run with the winners: below the nc
    // strips (their columns, K range past best_kc), then everything right of
    // the tested columns.
    const std::int64_t nc_j0 = b.j0 + 4 * iw;
    const std::int64_t nc_j1 = nc_j0 + tested_w;
    const std::int64_t kb1 = std::min(b.k0 + report.best_kc, b.k1);
    TileParams winners{report.best_kc, report.best_nc, pack};
    if (tested_w > 0 && kb1 < b.k1) {
        Bounds r1{b.i0, b.i1, nc_j0, nc_j1, kb1, b.k1};
        report.total_seconds += run_subtask(plan, kernel, ops, winners, r1, clock, log);
        report.coverage.push_back({kb1, b.k1, nc_j0, nc_j1});
    }
    if (nc_j1 < b.j1) {
        Bounds r2{b.i0, b.i1, nc_j1, b.j1, b.k0, b.k1};
        report.total_seconds += run_subtask(plan, kernel, ops, winners, r2, clock, log);
        report.coverage.push_back({b.k0, b.k1, nc_j1, b.j1});
    }
    return report;
}

}  // namespace amlt
