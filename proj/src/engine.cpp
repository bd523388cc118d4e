#include "amlt/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <variant>

#include "amlt/errors.hpp"
#include "amlt/kernel_plan.hpp"
#include "amlt/naive.hpp"
#include "amlt/schedule.hpp"

namespace amlt {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Extent a subscript expression traverses: a loop variable spans [0, end),
// a numeric constant needs const+1 entries. Anything else cannot be sized.
std::int64_t subscript_extent(const TaskSpec& task, NodeId id,
                              const std::map<std::string, std::int64_t>& dims) {
    const AstNode& n = task.ast.at(id);
    if (n.kind == NodeKind::Number) return static_cast<std::int64_t>(n.number) + 1;
    if (n.kind == NodeKind::Ref && n.indices.empty()) {
        for (const auto& lv : task.loop_vars)
            if (lv.name == n.name) return eval_bound(task.ast, lv.end, dims);
        throw MissingBinding(n.name);
    }
    throw UnsupportedExpression("cannot size arrays: subscript at " + std::to_string(n.line) +
                                ":" + std::to_string(n.col) +
                                " is neither a loop variable nor a number");
}

struct Shape2 {
    std::int64_t rows = 1, cols = 1;
};

void collect_shapes(const TaskSpec& task, NodeId id,
                    const std::map<std::string, std::int64_t>& dims,
                    std::map<std::string, Shape2>& shapes) {
    const AstNode& n = task.ast.at(id);
    switch (n.kind) {
        case NodeKind::Number:
            return;
        case NodeKind::Binary:
            collect_shapes(task, n.lhs, dims, shapes);
            collect_shapes(task, n.rhs, dims, shapes);
            return;
        case NodeKind::Ref: {
            bool is_loop_var = false;
            if (n.indices.empty())
                for (const auto& lv : task.loop_vars)
                    if (lv.name == n.name) is_loop_var = true;
            if (is_loop_var) return;
            Shape2& s = shapes[n.name];
            if (!n.indices.empty())
                s.rows = std::max(s.rows, subscript_extent(task, n.indices[0], dims));
            if (n.indices.size() > 1)
                s.cols = std::max(s.cols, subscript_extent(task, n.indices[1], dims));
            for (NodeId idx : n.indices) collect_shapes(task, idx, dims, shapes);
            return;
        }
    }
}

void bind_loop_end(const TaskSpec& task, int loop_idx, std::int64_t value,
                   std::map<std::string, std::int64_t>& dims) {
    const AstNode& e = task.ast.at(task.loop_vars[static_cast<size_t>(loop_idx)].end);
    if (e.kind != NodeKind::Ref || !e.indices.empty()) return;  // numeric/compound range
    auto [it, inserted] = dims.emplace(e.name, value);
    if (!inserted && it->second != value)
        throw EngineError("conflicting values for dimension '" + e.name + "': " +
                          std::to_string(it->second) + " vs " + std::to_string(value));
}

}  // namespace

CompiledTask compile_task(const std::string& source, const MachineModel& machine) {
    CompiledTask ct;
    ct.task = parse_task(source);
    Recognition r = recognize(ct.task);
    if (std::holds_alternative<Mmlt>(r)) {
        ct.mmlt = true;
        ct.recog = std::get<Mmlt>(r);
        ct.dag = build_dag(ct.task, ct.recog);
        PseudoProgram prog = schedule_labelfs(ct.dag);
        KernelShape shape = choose_kernel_shape(prog, ct.dag.leaves, machine);
        ct.plan = lower_kernel(ct.recog, prog, ct.dag.leaves, shape, machine);
        ct.kernel = compile_kernel(ct.plan);
    } else {
        ct.why_not = std::get<NotMmlt>(r);
    }
    return ct;
}

DimBinding bind_dims(const CompiledTask& ct, std::int64_t M, std::int64_t K, std::int64_t N) {
    DimBinding b;
    const TaskSpec& task = ct.task;
    if (ct.mmlt) {
        bind_loop_end(task, ct.recog.loop_i, M, b.dims);
        bind_loop_end(task, ct.recog.loop_k, K, b.dims);
        bind_loop_end(task, ct.recog.loop_j, N, b.dims);
        const LoopVar& li = task.loop_vars[static_cast<size_t>(ct.recog.loop_i)];
        const LoopVar& lj = task.loop_vars[static_cast<size_t>(ct.recog.loop_j)];
        const LoopVar& lk = task.loop_vars[static_cast<size_t>(ct.recog.loop_k)];
        b.bounds.i0 = eval_bound(task.ast, li.start, b.dims);
        b.bounds.i1 = eval_bound(task.ast, li.end, b.dims);
        b.bounds.j0 = eval_bound(task.ast, lj.start, b.dims);
        b.bounds.j1 = eval_bound(task.ast, lj.end, b.dims);
        b.bounds.k0 = eval_bound(task.ast, lk.start, b.dims);
        b.bounds.k1 = eval_bound(task.ast, lk.end, b.dims);
    } else {
        const std::int64_t vals[3] = {M, K, N};
        for (size_t l = 0; l < task.loop_vars.size() && l < 3; ++l)
            bind_loop_end(task, static_cast<int>(l), vals[l], b.dims);
    }
    return b;
}

TaskData make_task_data(const CompiledTask& ct, const DimBinding& bind, std::uint64_t seed,
                        StorageOrder order_a, StorageOrder order_b, DataMode mode) {
    const TaskSpec& task = ct.task;
    std::map<std::string, Shape2> shapes;
    collect_shapes(task, task.statement.target, bind.dims, shapes);
    collect_shapes(task, task.statement.rhs, bind.dims, shapes);

    TaskData data;
    data.result_name = task.ast.at(task.statement.target).name;
    std::string a_name = ct.mmlt ? ct.recog.a : "A";
    std::string b_name = ct.mmlt ? ct.recog.b : "B";
    for (const auto& [name, shape] : shapes) {
        StorageOrder order = StorageOrder::RowMajor;
        if (name == a_name) order = order_a;
        if (name == b_name) order = order_b;
        if (name == data.result_name) {
            data.arrays.emplace(name, MatrixBuffer(shape.rows, shape.cols, order));
        } else {
            data.arrays.emplace(
                name, gen_matrix(seed ^ fnv1a(name), shape.rows, shape.cols, order, mode));
        }
    }
    return data;
}

Operands make_operands(const CompiledTask& ct, TaskData& data) {
    if (!ct.mmlt) throw EngineError("task is not in multiply-accumulate form");
    Operands ops;
    ops.a = &data.buf(ct.recog.a);
    ops.b = &data.buf(ct.recog.b);
    ops.r = &data.result();
    for (const auto& leaf : ct.dag.leaves)
        if (leaf.role != LeafRole::A && leaf.role != LeafRole::B)
            ops.aux[leaf.name] = &data.buf(leaf.name);
    return ops;
}

TuneReport run_adaptive(const CompiledTask& ct, TaskData& data, const DimBinding& bind, bool pack,
                        Clock& clock, ExecLog* log) {
    Operands ops = make_operands(ct, data);
    return adaptive_execute(ct.plan, ct.kernel, ops, bind.bounds, pack, clock, log);
}

double run_fixed(const CompiledTask& ct, TaskData& data, const DimBinding& bind, std::int64_t kc,
                 std::int64_t nc, bool pack, Clock& clock, ExecLog* log) {
    Operands ops = make_operands(ct, data);
    return run_subtask(ct.plan, ct.kernel, ops, {kc, nc, pack}, bind.bounds, clock, log);
}

double run_naive_task(const CompiledTask& ct, TaskData& data, const DimBinding& bind) {
    std::map<std::string, MatrixBuffer*> arrays;
    for (auto& [name, buf] : data.arrays) arrays[name] = &buf;
    auto t0 = std::chrono::steady_clock::now();
    run_naive(ct.task, arrays, bind.dims);
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

VerifyResult verify_against_naive(const CompiledTask& ct, TaskData& data, const DimBinding& bind,
                                  DataMode mode) {
    const MatrixBuffer& got = data.result();
    MatrixBuffer scratch(got.rows(), got.cols(), got.order());
    std::map<std::string, MatrixBuffer*> arrays;
    for (auto& [name, buf] : data.arrays) arrays[name] = &buf;
    arrays[data.result_name] = &scratch;
    run_naive(ct.task, arrays, bind.dims);

    VerifyResult v;
    v.exact = true;
    for (std::int64_t r = 0; r < got.rows(); ++r) {
        for (std::int64_t c = 0; c < got.cols(); ++c) {
            double x = got.at(r, c);
            double y = scratch.at(r, c);
            if (!(x == y)) v.exact = false;
            double abs_err = std::abs(x - y);
            double mag = std::max(std::abs(x), std::abs(y));
            v.max_abs_err = std::max(v.max_abs_err, abs_err);
            if (mag > 0.0) v.max_rel_err = std::max(v.max_rel_err, abs_err / mag);
        }
    }
    v.pass = mode == DataMode::IntValued ? v.exact : (v.exact || v.max_rel_err <= 1e-12);
    return v;
}

double spr(std::int64_t M, std::int64_t K, std::int64_t N, double seconds) {
    if (seconds <= 0.0) throw NonPositiveTime(seconds);
    return static_cast<double>(M) * static_cast<double>(K) * static_cast<double>(N) /
           (1e9 * seconds);
}

}  // namespace amlt
