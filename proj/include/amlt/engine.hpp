#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "amlt/autotuner.hpp"
#include "amlt/expr_dag.hpp"
#include "amlt/kernel_exec.hpp"
#include "amlt/matrix.hpp"
#include "amlt/parser.hpp"
#include "amlt/recognize.hpp"

namespace amlt {

// Parse -> recognize -> DAG -> schedule -> shape -> executable kernel. For
// tasks that do not fit the multiply-accumulate form, `mmlt` is false, only
// `task` and `why_not` are meaningful, and execution falls back to the naive
// interpreter.
struct CompiledTask {
    TaskSpec task;
    bool mmlt = false;
    Mmlt recog;             // valid when mmlt
    NotMmlt why_not;        // valid when !mmlt
    ExprDag dag;            // valid when mmlt
    KernelPlan plan;        // valid when mmlt
    CompiledKernel kernel;  // valid when mmlt
};

CompiledTask compile_task(const std::string& source, const MachineModel& machine);

// Loop-range identifiers bound to the (M, K, N) dimension triple: recognized
// tasks bind by role (the i loop's end identifier gets M, the k loop's K,
// the j loop's N); unrecognized tasks bind loop ends in declaration order
// M, K, N. Binding one identifier to two different values throws EngineError;
// numeric range ends simply ignore the triple. `bounds` holds the evaluated
// half-open i/j/k ranges (recognized tasks only).
struct DimBinding {
    std::map<std::string, std::int64_t> dims;
    Bounds bounds;
};

DimBinding bind_dims(const CompiledTask& ct, std::int64_t M, std::int64_t K, std::int64_t N);

// Deterministic operand set for one task: every array named in the statement,
// sized from the loop ranges its subscripts traverse, filled per-name from
// the base seed; the target array starts zeroed. A task's multiplicand
// arrays take the requested storage orders (by role when recognized, by the
// literal names "A"/"B" otherwise); all other arrays are row-major.
struct TaskData {
    std::map<std::string, MatrixBuffer> arrays;
    std::string result_name;

    MatrixBuffer& buf(const std::string& name) { return arrays.at(name); }
    const MatrixBuffer& buf(const std::string& name) const { return arrays.at(name); }
    MatrixBuffer& result() { return arrays.at(result_name); }
};

TaskData make_task_data(const CompiledTask& ct, const DimBinding& bind, std::uint64_t seed,
                        StorageOrder order_a, StorageOrder order_b, DataMode mode);

// Operand view over a TaskData for the kernel executors.
Operands make_operands(const CompiledTask& ct, TaskData& data);

// Execution drivers. run_adaptive/run_fixed require a recognized task.
TuneReport run_adaptive(const CompiledTask& ct, TaskData& data, const DimBinding& bind, bool pack,
                        Clock& clock, ExecLog* log = nullptr);
double run_fixed(const CompiledTask& ct, TaskData& data, const DimBinding& bind, std::int64_t kc,
                 std::int64_t nc, bool pack, Clock& clock, ExecLog* log = nullptr);
// Naive interpreter over the same data (any task); returns elapsed seconds.
double run_naive_task(const CompiledTask& ct, TaskData& data, const DimBinding& bind);

struct VerifyResult {
    bool exact = false;  // every element bit-identical
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    bool pass = false;  // exact for int-valued data; rel err <= 1e-12 for real
};

// Reruns the task with the naive interpreter on a scratch result buffer and
// compares it element by element against the result in `data`.
VerifyResult verify_against_naive(const CompiledTask& ct, TaskData& data, const DimBinding& bind,
                                  DataMode mode);

// Scaled processing rate M*K*N / (1e9 * T). Throws NonPositiveTime for T <= 0.
double spr(std::int64_t M, std::int64_t K, std::int64_t N, double seconds);

}  // namespace amlt
