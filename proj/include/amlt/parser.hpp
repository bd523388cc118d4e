#pragma once

#include <set>
#include <string>
#include <string_view>

#include "amlt/ast.hpp"

namespace amlt {

// Parses one task of the form
//
//   where(i in [0..M] and j in [0..N] and k in [0..K]) {
//     R[i][j] += A[i][k]*B[k][j];
//   }
//
// Ranges are half-open: "x in [s..e]" iterates s <= x < e. The block holds
// exactly one assignment (=) or increment (+=) to a subscripted array.
// Expressions allow + - * /, the comparisons > >= < <= ==, parentheses,
// numeric literals, bare names and 1-D/2-D subscripts. '//' starts a line
// comment.
//
// Throws ParseError for malformed syntax (with line/column) and
// UnboundVariable when an identifier inside a subscript of the statement is
// neither a loop variable nor listed in `externals`.
TaskSpec parse_task(std::string_view source, const std::set<std::string>& externals = {});

// Parses a bare statement ("R[i][j] += ...;") against the given loop
// variables. Used by tests that rebuild DAGs from printed statements.
TaskSpec parse_statement_with_vars(std::string_view statement,
                                   const std::vector<std::string>& loop_var_names);

}  // namespace amlt
