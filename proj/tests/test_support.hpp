#pragma once

// Shared helpers for the test binaries: independent mini-oracles (AST
// evaluation, brute-force scheduling, tuner-rule simulation), random task
// generation, and exactly-once execution tallies.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amlt/ast.hpp"
#include "amlt/autotuner.hpp"
#include "amlt/engine.hpp"
#include "amlt/expr_dag.hpp"
#include "amlt/schedule.hpp"
#include "amlt/tiled_executor.hpp"

namespace ts {

using namespace amlt;

// ---------------------------------------------------------------------------
// Direct AST expression evaluation, written independently of src/. Values
// are bound per leaf NAME, mirroring how the DAG binds leaves (recognition
// guarantees one axis pattern per name).
inline double ast_eval_by_name(const Ast& ast, NodeId id,
                               const std::map<std::string, double>& by_name) {
    const AstNode& n = ast.at(id);
    if (n.kind == NodeKind::Number) return n.number;
    if (n.kind == NodeKind::Ref) return by_name.at(n.name);
    double a = ast_eval_by_name(ast, n.lhs, by_name);
    double b = ast_eval_by_name(ast, n.rhs, by_name);
    switch (n.op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Div: return a / b;
        case BinOp::Gt: return a > b ? 1.0 : 0.0;
        case BinOp::Ge: return a >= b ? 1.0 : 0.0;
        case BinOp::Lt: return a < b ? 1.0 : 0.0;
        case BinOp::Le: return a <= b ? 1.0 : 0.0;
        case BinOp::Eq: return a == b ? 1.0 : 0.0;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Random recognizable tasks. Leaves draw from A/B (orientation fixed per
// task), aux vectors/matrix/scalar/literals; an A*B product is always mixed
// in so recognition cannot fail on a missing operand.

struct RandomTask {
    std::string source;
    bool a_transposed = false;
    bool b_transposed = false;
};

class TaskGen {
public:
    explicit TaskGen(std::uint64_t seed) : rng_(seed) {}

    RandomTask next() {
        RandomTask t;
        t.a_transposed = flip(0.3);
        t.b_transposed = flip(0.3);
        a_ref_ = t.a_transposed ? "A[k][i]" : "A[i][k]";
        b_ref_ = t.b_transposed ? "B[j][k]" : "B[k][j]";
        std::string core = a_ref_ + "*" + b_ref_;
        std::string expr = flip(0.25) ? core : core + (flip(0.5) ? " + " : " - ") + subtree(0);
        std::ostringstream os;
        os << "where(i in [0..M] and j in [0..N] and k in [0..K]) {\n  R[i][j] "
           << (flip(0.9) ? "+=" : "=") << " " << expr << ";\n}\n";
        t.source = os.str();
        return t;
    }

private:
    bool flip(double p) { return std::uniform_real_distribution<>(0, 1)(rng_) < p; }
    int pick(int n) { return std::uniform_int_distribution<>(0, n - 1)(rng_); }

    std::string leaf() {
        switch (pick(7)) {
            case 0: return a_ref_;
            case 1: return b_ref_;
            case 2: return "u[i]";
            case 3: return "v[j]";
            case 4: return "W[i][j]";
            case 5: return "s";
            default: return std::to_string(pick(9));  // grammar has no unary minus
        }
    }

    std::string subtree(int depth) {
        if (depth >= 3 || flip(0.35)) return leaf();
        std::string lhs = subtree(depth + 1);
        // Divisors stay powers of two so integer-seeded data remains exactly
        // representable and block/naive sums round identically.
        if (flip(0.1)) return "(" + lhs + ")/" + std::to_string(1 << (1 + pick(3)));
        const char* ops[] = {" + ", " - ", "*", " > ", " >= ", " < ", " <= ", " == "};
        int o = pick(flip(0.75) ? 3 : 8);  // comparisons rarer
        return "(" + lhs + ")" + ops[o] + "(" + subtree(depth + 1) + ")";
    }

    std::mt19937_64 rng_;
    std::string a_ref_, b_ref_;
};

// ---------------------------------------------------------------------------
// Brute-force minimum-peak-register schedule over all topological orders of
// the DAG's op nodes (small DAGs only). Mirrors the executor's register
// conventions: comparison results live in the mask file, an instruction's
// destination is allocated after its dying sources are released, and the root
// value is consumed once more by the accumulate/store tail.

struct BruteResult {
    int min_vec_peak = 0;
    long orders = 0;
};

inline BruteResult brute_force_min_regs(const ExprDag& dag) {
    std::vector<std::int32_t> ops;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(dag.nodes.size()); ++i)
        if (dag.nodes[static_cast<size_t>(i)].kind == DagNode::Kind::Op) ops.push_back(i);
    int n = static_cast<int>(ops.size());

    std::map<std::int32_t, int> uses;  // op node -> consumer count
    for (std::int32_t i : ops) {
        const DagNode& nd = dag.at(i);
        for (int c = 0; c < nd.n_child; ++c) {
            std::int32_t ch = nd.child[static_cast<size_t>(c)];
            if (dag.at(ch).kind == DagNode::Kind::Op) ++uses[ch];
        }
    }
    ++uses[dag.root];

    BruteResult best;
    best.min_vec_peak = 1 << 20;

    std::vector<std::int32_t> order;
    std::vector<bool> done(dag.nodes.size(), false);

    auto ready = [&](std::int32_t id) {
        const DagNode& nd = dag.at(id);
        for (int c = 0; c < nd.n_child; ++c) {
            std::int32_t ch = nd.child[static_cast<size_t>(c)];
            if (dag.at(ch).kind == DagNode::Kind::Op && !done[static_cast<size_t>(ch)])
                return false;
        }
        return true;
    };

    // Simulates one complete order.
    auto simulate = [&]() {
        std::map<std::int32_t, int> left = uses;
        int live_vec = 0, peak = 0;
        for (std::int32_t id : order) {
            const DagNode& nd = dag.at(id);
            for (int c = 0; c < nd.n_child; ++c) {
                std::int32_t ch = nd.child[static_cast<size_t>(c)];
                if (dag.at(ch).kind != DagNode::Kind::Op) continue;
                if (--left[ch] == 0 && !dag_op_is_cmp(dag.at(ch).op)) --live_vec;
            }
            if (!dag_op_is_cmp(nd.op)) {
                ++live_vec;
                peak = std::max(peak, live_vec);
            }
        }
        if (peak < best.min_vec_peak) best.min_vec_peak = peak;
        ++best.orders;
    };

    std::function<void()> rec = [&]() {
        if (static_cast<int>(order.size()) == n) {
            simulate();
            return;
        }
        for (std::int32_t id : ops) {
            if (done[static_cast<size_t>(id)] || !ready(id)) continue;
            done[static_cast<size_t>(id)] = true;
            order.push_back(id);
            rec();
            order.pop_back();
            done[static_cast<size_t>(id)] = false;
        }
    };
    rec();
    return best;
}

// ---------------------------------------------------------------------------
// Exactly-once tallies.

struct Tally3 {
    std::int64_t i1, j1, k1;
    std::vector<std::uint8_t> cells;

    Tally3(std::int64_t i, std::int64_t j, std::int64_t k)
        : i1(i), j1(j), k1(k), cells(static_cast<size_t>(i * j * k), 0) {}

    bool add(const ExecRecord& r) {
        if (r.i0 < 0 || r.i1 > i1 || r.j0 < 0 || r.j1 > j1 || r.k0 < 0 || r.k1 > k1)
            return false;
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j)
                for (std::int64_t k = r.k0; k < r.k1; ++k) {
                    auto& c = cells[static_cast<size_t>((i * j1 + j) * k1 + k)];
                    if (c == 255) return false;
                    ++c;
                }
        return true;
    }

    bool exactly_once(const Bounds& b) const {
        for (std::int64_t i = 0; i < i1; ++i)
            for (std::int64_t j = 0; j < j1; ++j)
                for (std::int64_t k = 0; k < k1; ++k) {
                    bool inside = i >= b.i0 && i < b.i1 && j >= b.j0 && j < b.j1 && k >= b.k0 &&
                                  k < b.k1;
                    if (cells[static_cast<size_t>((i * j1 + j) * k1 + k)] != (inside ? 1 : 0))
                        return false;
                }
        return true;
    }
};

inline bool coverage_exactly_once(const std::vector<CoverRect>& rects, const Bounds& b) {
    std::vector<std::uint8_t> cells(
        static_cast<size_t>((b.k1 - b.k0) * (b.j1 - b.j0)), 0);
    for (const auto& r : rects)
        for (std::int64_t k = r.k0; k < r.k1; ++k)
            for (std::int64_t j = r.j0; j < r.j1; ++j) {
                if (k < b.k0 || k >= b.k1 || j < b.j0 || j >= b.j1) return false;
                auto& c = cells[static_cast<size_t>((k - b.k0) * (b.j1 - b.j0) + (j - b.j0))];
                if (++c > 1) return false;
            }
    for (auto c : cells)
        if (c != 1) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Independent restatement of the tuning rules, used to predict the winners
// for an injected elapsed-time script. Returns the expected choices plus how
// many script entries each phase consumes.

struct TunerExpect {
    std::vector<std::int64_t> kc_values;  // scored, in trial order
    std::vector<std::int64_t> nc_values;
    std::int64_t best_kc = 0;
    std::int64_t best_nc = 0;
    std::size_t deltas_used = 0;
};

inline TunerExpect simulate_tuner(std::int64_t K, std::int64_t N, std::int64_t iw,
                                  const std::vector<double>& deltas) {
    TunerExpect e;
    std::size_t d = 0;

    // Candidate list: K, then ceil-halving while >= 16.
    std::vector<std::int64_t> cands;
    if (K < 16)
        cands.push_back(K);
    else
        for (std::int64_t c = K; c >= 16; c = (c + 1) / 2) cands.push_back(c);

    // kc phase: strip 1 scores cands[0]; strip 2 scores the rest laid along
    // K; leftover K range consumes one unscored run.
    double best_score = 0.0;
    std::int64_t covered = 0;
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        if (ci > 0 && covered + cands[ci] > K) continue;
        double score = deltas[d++] / static_cast<double>(cands[ci]);
        e.kc_values.push_back(cands[ci]);
        if (e.best_kc == 0 || score < best_score) {
            e.best_kc = cands[ci];
            best_score = score;
        }
        if (ci > 0) covered += cands[ci];
    }
    if (covered < K) ++d;  // unscored leftover

    // nc phase: widths iw, 2iw, ... from column 4iw; stop on first score
    // increase (previous wins) or budget (best so far wins).
    std::int64_t jcur = 4 * iw;
    double prev = 0.0, best_nc_score = 0.0;
    std::int64_t prev_nc = 0, best_nc = 0, tested_w = 0;
    bool stopped_on_increase = false;
    for (std::int64_t w = iw;; w *= 2) {
        if (jcur + w > N) break;
        double score = deltas[d++] / static_cast<double>(w);
        e.nc_values.push_back(w);
        jcur += w;
        tested_w += w;
        if (prev_nc != 0 && score > prev) {
            e.best_nc = prev_nc;
            stopped_on_increase = true;
            break;
        }
        prev = score;
        prev_nc = w;
        if (best_nc == 0 || score < best_nc_score) {
            best_nc = w;
            best_nc_score = score;
        }
    }
    if (!stopped_on_increase) e.best_nc = best_nc != 0 ? best_nc : N;

    // Remainder rectangles, unscored: below the tested strips, then all
    // untouched columns.
    if (tested_w > 0 && e.best_kc < K) ++d;
    if (4 * iw + tested_w < N) ++d;
    e.deltas_used = d;
    return e;
}

// ---------------------------------------------------------------------------
// Engine conveniences.

inline CompiledTask compile(const std::string& src, MachineModel machine = {}) {
    return compile_task(src, machine);
}

struct AdaptiveVsNaive {
    VerifyResult verify;
    TuneReport report;
};

inline AdaptiveVsNaive adaptive_vs_naive(const std::string& src, std::int64_t M, std::int64_t K,
                                         std::int64_t N, std::uint64_t seed, bool pack = false,
                                         DataMode mode = DataMode::IntValued,
                                         StorageOrder oa = StorageOrder::RowMajor,
                                         StorageOrder ob = StorageOrder::RowMajor,
                                         ExecLog* log = nullptr) {
    CompiledTask ct = compile_task(src, MachineModel{});
    DimBinding bind = bind_dims(ct, M, K, N);
    TaskData data = make_task_data(ct, bind, seed, oa, ob, mode);
    SteadyClock clock;
    AdaptiveVsNaive out;
    out.report = run_adaptive(ct, data, bind, pack, clock, log);
    out.verify = verify_against_naive(ct, data, bind, mode);
    return out;
}

}  // namespace ts
