#pragma once

#include <string>
#include <variant>
#include <vector>

#include "amlt/ast.hpp"

namespace amlt {

// Classification of auxiliary statement leaves by which loop indices they
// depend on. Determines how many vector registers the leaf costs and how the
// kernel loads it.
enum class LeafClass { Constant, VecI, VecJ, MatIJ };

const char* leaf_class_name(LeafClass c);

enum class OperandLayout { Normal, Transposed };

struct AuxLeaf {
    std::string name;
    LeafClass cls = LeafClass::Constant;
};

// A task in canonical multiply-accumulate form: three nested loops writing
// R[i][j] from arrays indexed A[i][k] (or A[k][i]) and B[k][j] (or B[j][k]),
// plus any number of auxiliary leaves.
struct Mmlt {
    std::string result;
    std::string a;
    std::string b;
    OperandLayout layout_a = OperandLayout::Normal;
    OperandLayout layout_b = OperandLayout::Normal;
    // Positions of the loops playing the i/j/k roles within
    // TaskSpec::loop_vars, and their variable names.
    int loop_i = 0, loop_j = 0, loop_k = 0;
    std::string var_i, var_j, var_k;
    std::vector<AuxLeaf> aux;  // in order of first appearance in the statement
};

// Which of the four structural conditions failed, 1-based:
//   1: not a single assignment/increment statement
//   2: not exactly three loop variables
//   3: target is not a 2-D array indexed by two distinct loop variables
//   4: right-hand side leaves do not fit the multiply-accumulate pattern
struct NotMmlt {
    int failed_condition = 0;
    std::string detail;
};

using Recognition = std::variant<Mmlt, NotMmlt>;

// Structural recognition. Deterministic: the same task always yields the same
// outcome, and on failure the first violated condition (in the order above) is
// reported.
Recognition recognize(const TaskSpec& task);

std::string describe(const Recognition& r);

}  // namespace amlt
