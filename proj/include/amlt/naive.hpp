#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "amlt/ast.hpp"
#include "amlt/matrix.hpp"

namespace amlt {

// Evaluates a loop-bound expression (numbers, dimension names, arithmetic)
// to an integer. Throws MissingBinding for names absent from `dims`.
std::int64_t eval_bound(const Ast& ast, NodeId id, const std::map<std::string, std::int64_t>& dims);

// Reference executor: walks the task's loops in declaration order and
// evaluates the statement expression straight off the syntax tree for every
// index combination. This is the correctness oracle for every other
// execution path, and the fallback for tasks the planner cannot handle.
//
// `arrays` maps each array name in the statement (including the target) to
// its buffer; 1-D arrays are len x 1, named scalars 1 x 1. `dims` binds the
// identifiers used in loop ranges.
void run_naive(const TaskSpec& task, const std::map<std::string, MatrixBuffer*>& arrays,
               const std::map<std::string, std::int64_t>& dims);

}  // namespace amlt
